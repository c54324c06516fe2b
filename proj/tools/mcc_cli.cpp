// Command-line front end for the mcc library: batch p-values, confidence
// intervals, permutation oracles, simulations, and timing benchmarks.

#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "mcc/mcc.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using mcc::Index;
using mcc::Real;

// FNV-1a over the reassembled invocation, recorded in output headers so a
// result file identifies the exact configuration that produced it.
std::uint64_t manifest_hash(int argc, char** argv) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int i = 1; i < argc; ++i) {
        for (const char* p = argv[i]; *p; ++p) {
            h ^= static_cast<unsigned char>(*p);
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_header(std::ostream& os, const std::string& subcommand,
                  std::uint64_t seed, std::uint64_t manifest) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(manifest));
    os << "# mcc " << kVersion << " " << subcommand << "\n";
    os << "# seed=" << seed << "\n";
    os << "# manifest=" << buf << "\n";
}

struct OutputTarget {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit OutputTarget(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path);
        if (!file) throw mcc::io::ParseError("cannot write " + path);
        os = &file;
    }
};

std::string fmt(Real v, bool raw) { return mcc::io::format_real(v, raw); }

const char* fit_name(mcc::FitKind k) {
    return k == mcc::FitKind::RescaledBeta ? "beta" : "gamma";
}

int cmd_run(int argc, char** argv, CLI::App& app, const std::string& matrix_path,
            const std::string& response_path, const std::string& covariates_path,
            const std::string& strata_path, const std::string& method,
            const std::string& continuity, Real offset, std::uint64_t seed,
            unsigned workers, const std::string& output, std::uint64_t verify_b,
            bool raw) {
    (void)app;
    const auto mf = mcc::io::read_matrix(matrix_path);
    const auto y =
        mcc::io::join_response(mcc::io::read_column_file(response_path), mf.sample_ids);

    std::optional<mcc::StrataAssignment> strata;
    mcc::FeatureMatrix X = mf.X;
    if (!strata_path.empty() && !covariates_path.empty())
        throw CLI::ValidationError("--strata and --covariates are mutually exclusive");
    std::vector<Real> y_used = y;
    if (!covariates_path.empty()) {
        const auto Z = mcc::io::join_covariates(
            mcc::io::read_column_file(covariates_path), mf.sample_ids);
        if (static_cast<Real>(Z.q()) / static_cast<Real>(Z.n) > 0.05)
            std::cerr << "warning: q/n > 0.05; residual exchangeability may be "
                         "degraded\n";
        X = mcc::residualize_matrix(X, Z, workers);
        y_used = mcc::residualize(y, Z);
    }
    if (!strata_path.empty())
        strata = mcc::io::join_strata(mcc::io::read_column_file(strata_path),
                                      mf.sample_ids);
    if (strata && method != "mcc")
        throw CLI::ValidationError("stratified runs support --method mcc only");

    mcc::AnalysisConfig cfg;
    cfg.workers = workers;
    if (continuity == "on") {
        cfg.continuity_auto = false;
        cfg.continuity_correction = true;
    } else if (continuity == "off") {
        cfg.continuity_auto = false;
        cfg.continuity_correction = false;
    }
    cfg.continuity_offset = offset;

    std::vector<mcc::PValueSet> results(X.rows);
    if (strata) {
        mcc::parallel_for(X.rows, workers, [&](Index i) {
            results[i] = mcc::stratified_mcc_row(X.row(i), y_used, *strata, cfg);
        });
    } else if (method == "mcc") {
        results = mcc::mcc_matrix(X, y_used, cfg);
    } else {
        mcc::parallel_for(X.rows, workers, [&](Index i) {
            if (mcc::is_constant(X.row(i))) {
                results[i].untestable = true;
                return;
            }
            results[i] = method == "mcc1" ? mcc::mcc1_row(X.row(i), y_used, cfg)
                                          : mcc::mcc1_all_row(X.row(i), y_used, cfg);
        });
    }

    std::vector<mcc::OracleResult> oracle(verify_b ? X.rows : 0);
    if (verify_b) {
        mcc::parallel_for(X.rows, workers, [&](Index i) {
            if (results[i].untestable) return;
            oracle[i] =
                mcc::monte_carlo_pvalues(X.row(i), y_used, verify_b, seed, strata, i);
        });
    }

    OutputTarget out(output);
    write_header(*out.os, "run", seed, manifest_hash(argc, argv));
    *out.os << "feature_id\tn\tr_obs\tskewness\texcess_kurtosis\tfit_kind\t"
               "p_left\tp_right\tp_two\tp_directional\tp_double\tflags";
    if (verify_b) *out.os << "\tp_mc_left\tp_mc_right\tp_mc_double\tmc_se";
    *out.os << "\n";
    for (Index i = 0; i < X.rows; ++i) {
        const auto& r = results[i];
        const std::string id =
            i < X.feature_ids.size() ? X.feature_ids[i] : std::to_string(i + 1);
        *out.os << id << '\t' << X.cols << '\t' << fmt(r.r_obs, raw) << '\t'
                << fmt(r.skewness, raw) << '\t' << fmt(r.excess_kurtosis, raw)
                << '\t' << fit_name(r.fit_kind) << '\t' << fmt(r.p_left, raw)
                << '\t' << fmt(r.p_right, raw) << '\t' << fmt(r.p_two, raw) << '\t'
                << fmt(r.p_directional, raw) << '\t' << fmt(r.p_double, raw)
                << '\t' << (r.untestable ? "untestable" : "ok");
        if (verify_b) {
            const auto& o = oracle[i];
            *out.os << '\t' << fmt(o.p_left, raw) << '\t' << fmt(o.p_right, raw)
                    << '\t' << fmt(o.p_double, raw) << '\t'
                    << fmt(std::max(o.se_left, o.se_right), raw);
        }
        *out.os << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moment-corrected correlation permutation testing"};
    app.require_subcommand(1);
    const std::uint64_t manifest = manifest_hash(argc, argv);

    std::string matrix_path, response_path, covariates_path, strata_path;
    std::string method = "mcc", continuity = "auto", output;
    Real offset = 0.5;
    std::uint64_t seed = 1, verify_b = 0;
    unsigned workers = 0;
    bool raw = false;

    auto* run = app.add_subcommand("run", "batch p-values for a feature matrix");
    run->add_option("--matrix", matrix_path, "feature matrix file")->required();
    run->add_option("--response", response_path, "response column file")->required();
    run->add_option("--covariates", covariates_path, "covariate column file");
    run->add_option("--strata", strata_path, "stratum column file");
    run->add_option("--method", method)
        ->check(CLI::IsMember({"mcc", "mcc1", "mcc1-all"}));
    run->add_option("--continuity", continuity)
        ->check(CLI::IsMember({"auto", "on", "off"}));
    run->add_option("--offset", offset, "continuity offset");
    run->add_option("--seed", seed);
    run->add_option("--workers", workers);
    run->add_option("--output", output, "output path (default stdout)");
    run->add_option("--verify", verify_b,
                    "append Monte-Carlo oracle columns using this many draws");
    run->add_flag("--raw", raw, "full-precision output");

    Real level = 0.95;
    std::string ci_method = "mcc";
    auto* ci = app.add_subcommand("ci", "test-inversion confidence intervals");
    ci->add_option("--matrix", matrix_path)->required();
    ci->add_option("--response", response_path)->required();
    ci->add_option("--level", level, "coverage level")->required();
    ci->add_option("--method", ci_method)
        ->check(CLI::IsMember({"mcc", "mcc1", "exhaustive"}));
    ci->add_option("--output", output);
    ci->add_flag("--raw", raw);

    std::string oracle_mode = "auto";
    std::uint64_t draws = 1000000;
    auto* orc = app.add_subcommand("oracle", "ground-truth permutation p-values");
    orc->add_option("--matrix", matrix_path)->required();
    orc->add_option("--response", response_path)->required();
    orc->add_option("--strata", strata_path);
    orc->add_option("--mode", oracle_mode)
        ->check(CLI::IsMember({"auto", "exhaustive", "mc"}));
    orc->add_option("--draws", draws, "Monte-Carlo draw count");
    orc->add_option("--seed", seed);
    orc->add_option("--output", output);
    orc->add_flag("--raw", raw);

    std::string scenario = "iii", sim_mode = "type1";
    Index n = 500, reps = 1000;
    std::vector<Real> alphas = {1e-2, 1e-3};
    std::vector<Real> betas = {0.0, 0.25, 0.5, 0.75, 1.0};
    Real sim_alpha = 1e-3, a1 = 5, a2 = 20;
    std::vector<Real> deltas = {0.01, 0.02, 0.05};
    auto* sim = app.add_subcommand("sim", "simulation studies");
    sim->add_option("--mode", sim_mode)
        ->check(CLI::IsMember({"type1", "power", "ordering"}));
    sim->add_option("--scenario", scenario)
        ->check(CLI::IsMember({"i", "ii", "iii", "iv", "v", "power-a", "power-b"}));
    sim->add_option("--n", n);
    sim->add_option("--reps", reps);
    sim->add_option("--alphas", alphas, "type1 alpha grid");
    sim->add_option("--alpha", sim_alpha, "significance level (power/ordering)");
    sim->add_option("--betas", betas, "power effect grid");
    sim->add_option("--a1", a1, "ordering beta shape 1");
    sim->add_option("--a2", a2, "ordering beta shape 2");
    sim->add_option("--deltas", deltas, "ordering shift grid");
    sim->add_option("--seed", seed);
    sim->add_option("--workers", workers);
    sim->add_option("--output", output);
    sim->add_flag("--raw", raw);

    std::vector<Index> m_grid = {16384, 32768};
    std::vector<Index> n_grid = {512, 1024};
    auto* bench = app.add_subcommand("bench", "batch-engine timing");
    bench->add_option("--m", m_grid, "feature counts");
    bench->add_option("--n", n_grid, "sample counts");
    bench->add_option("--seed", seed);
    bench->add_option("--workers", workers);
    bench->add_option("--output", output);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(argc, argv, app, matrix_path, response_path,
                           covariates_path, strata_path, method, continuity,
                           offset, seed, workers, output, verify_b, raw);

        if (ci->parsed()) {
            const auto mf = mcc::io::read_matrix(matrix_path);
            const auto y = mcc::io::join_response(
                mcc::io::read_column_file(response_path), mf.sample_ids);
            const mcc::CiMethod m = ci_method == "mcc"
                                        ? mcc::CiMethod::MCC
                                        : (ci_method == "mcc1" ? mcc::CiMethod::MCC1
                                                               : mcc::CiMethod::Exhaustive);
            OutputTarget out(output);
            write_header(*out.os, "ci", seed, manifest);
            *out.os << "feature_id\tlevel\tlower\tupper\tmethod\tflags\n";
            for (Index i = 0; i < mf.X.rows; ++i) {
                const auto interval = mcc::mcc_ci(mf.X.row(i), y, level, m);
                *out.os << mf.X.feature_ids[i] << '\t' << fmt(level, raw) << '\t'
                        << fmt(interval.lower, raw) << '\t'
                        << fmt(interval.upper, raw) << '\t' << ci_method << '\t'
                        << (interval.bracket_warning ? "bracket_widened" : "ok")
                        << "\n";
            }
            return 0;
        }

        if (orc->parsed()) {
            const auto mf = mcc::io::read_matrix(matrix_path);
            const auto y = mcc::io::join_response(
                mcc::io::read_column_file(response_path), mf.sample_ids);
            std::optional<mcc::StrataAssignment> strata;
            if (!strata_path.empty())
                strata = mcc::io::join_strata(
                    mcc::io::read_column_file(strata_path), mf.sample_ids);
            OutputTarget out(output);
            write_header(*out.os, "oracle", seed, manifest);
            *out.os << "feature_id\tmode\tdraws\tp_left\tp_right\tp_two\t"
                       "p_double\tmid_p_left\tmid_p_right\tse_left\tse_right\n";
            for (Index i = 0; i < mf.X.rows; ++i) {
                mcc::OracleResult r;
                std::string mode_used = oracle_mode;
                if (oracle_mode == "exhaustive") {
                    r = mcc::exhaustive_pvalues(mf.X.row(i), y, strata);
                } else if (oracle_mode == "mc") {
                    r = mcc::monte_carlo_pvalues(mf.X.row(i), y, draws, seed,
                                                 strata, i);
                } else {
                    try {
                        r = mcc::exhaustive_pvalues(mf.X.row(i), y, strata);
                        mode_used = "exhaustive";
                    } catch (const std::invalid_argument&) {
                        r = mcc::monte_carlo_pvalues(mf.X.row(i), y, draws, seed,
                                                     strata, i);
                        mode_used = "mc";
                    }
                }
                *out.os << mf.X.feature_ids[i] << '\t' << mode_used << '\t'
                        << r.draws << '\t' << fmt(r.p_left, raw) << '\t'
                        << fmt(r.p_right, raw) << '\t' << fmt(r.p_two, raw) << '\t'
                        << fmt(r.p_double, raw) << '\t' << fmt(r.mid_p_left, raw)
                        << '\t' << fmt(r.mid_p_right, raw) << '\t'
                        << fmt(r.se_left, raw) << '\t' << fmt(r.se_right, raw)
                        << "\n";
            }
            return 0;
        }

        if (sim->parsed()) {
            static const std::map<std::string, mcc::ScenarioId> ids = {
                {"i", mcc::ScenarioId::I},       {"ii", mcc::ScenarioId::II},
                {"iii", mcc::ScenarioId::III},   {"iv", mcc::ScenarioId::IV},
                {"v", mcc::ScenarioId::V},       {"power-a", mcc::ScenarioId::PowerA},
                {"power-b", mcc::ScenarioId::PowerB}};
            OutputTarget out(output);
            write_header(*out.os, "sim", seed, manifest);
            if (sim_mode == "type1") {
                mcc::ScenarioSpec spec{ids.at(scenario), n, seed, 0};
                const auto rep = mcc::type1_experiment(spec, reps, alphas, workers);
                *out.os << "alpha\tmcc_left\tmcc_right\tstd_left\tstd_right\t"
                           "log10_mcc_left\tlog10_mcc_right\tlog10_std_left\t"
                           "log10_std_right\tsd_mcc_left\tsd_mcc_right\t"
                           "sd_std_left\tsd_std_right\n";
                for (const auto& c : rep.cells)
                    *out.os << fmt(c.alpha, raw) << '\t' << fmt(c.mcc_left, raw)
                            << '\t' << fmt(c.mcc_right, raw) << '\t'
                            << fmt(c.std_left, raw) << '\t' << fmt(c.std_right, raw)
                            << '\t'
                            << fmt(mcc::Type1Report::log_ratio(c.mcc_left, c.alpha), raw)
                            << '\t'
                            << fmt(mcc::Type1Report::log_ratio(c.mcc_right, c.alpha), raw)
                            << '\t'
                            << fmt(mcc::Type1Report::log_ratio(c.std_left, c.alpha), raw)
                            << '\t'
                            << fmt(mcc::Type1Report::log_ratio(c.std_right, c.alpha), raw)
                            << '\t' << fmt(c.sd_mcc_left, raw) << '\t'
                            << fmt(c.sd_mcc_right, raw) << '\t'
                            << fmt(c.sd_std_left, raw) << '\t'
                            << fmt(c.sd_std_right, raw) << "\n";
            } else if (sim_mode == "power") {
                mcc::ScenarioSpec spec{ids.at(scenario), n, seed, 0};
                const auto pts =
                    mcc::power_experiment(spec, betas, sim_alpha, reps, workers);
                *out.os << "beta_abs\tpower_double\tpower_two\tse_double\tse_two\n";
                for (const auto& p : pts)
                    *out.os << fmt(p.beta_abs, raw) << '\t'
                            << fmt(p.power_double, raw) << '\t'
                            << fmt(p.power_two, raw) << '\t' << fmt(p.se_double, raw)
                            << '\t' << fmt(p.se_two, raw) << "\n";
            } else {
                *out.os << "delta\tcond1\tcond2\tregion_ordered\tmargin1\t"
                           "margin2\tregion1\tregion2\n";
                for (Real d : deltas) {
                    const auto o = mcc::ordering_check(a1, a2, sim_alpha, d);
                    *out.os << fmt(d, raw) << '\t' << o.cond1 << '\t' << o.cond2
                            << '\t' << o.region_ordered << '\t'
                            << fmt(o.margin1, raw) << '\t' << fmt(o.margin2, raw)
                            << '\t' << fmt(o.region1, raw) << '\t'
                            << fmt(o.region2, raw) << "\n";
                }
            }
            return 0;
        }

        if (bench->parsed()) {
            const auto rep = mcc::timing_benchmark(m_grid, n_grid, seed, workers);
            OutputTarget out(output);
            write_header(*out.os, "bench", seed, manifest);
            *out.os << "m\tn\tseconds\n";
            for (const auto& c : rep.cells)
                *out.os << c.m << '\t' << c.n << '\t' << fmt(c.seconds, false)
                        << "\n";
            *out.os << "# fit: log(t) = " << fmt(rep.intercept, false) << " + "
                    << fmt(rep.slope, false) << " * log(m*n)\n";
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
