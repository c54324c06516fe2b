#pragma once

#include "mcc/ci.hpp"
#include "mcc/covariates.hpp"
#include "mcc/engine.hpp"
#include "mcc/io.hpp"
#include "mcc/mcc_one.hpp"
#include "mcc/oracle.hpp"
#include "mcc/sim.hpp"
