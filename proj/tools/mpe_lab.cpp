// Command-line laboratory for the stochastic moist primitive equations on
// the spherical shell: trajectory runs, pullback-attractor and absorbing-set
// experiments, invariant-measure statistics, spectrum dumps, and the
// operator check suite.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mpe/checks.hpp"
#include "mpe/config.hpp"
#include "mpe/snapshot.hpp"

namespace fs = std::filesystem;
using namespace mpe;

namespace {

constexpr const char* kVersion = "mpe-lab 0.1.0";

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int snapshot_every = 0;
    bool force = false;
};

int prepare_out_dir(const CliOptions& opt) {
    fs::path out(opt.out_dir);
    if (fs::exists(out)) {
        if (!fs::is_directory(out)) {
            std::fprintf(stderr, "error: --out '%s' exists and is not a directory\n",
                         opt.out_dir.c_str());
            return 2;
        }
        if (!fs::is_empty(out) && !opt.force) {
            std::fprintf(stderr,
                         "error: --out '%s' is not empty (pass --force to overwrite)\n",
                         opt.out_dir.c_str());
            return 2;
        }
    } else {
        fs::create_directories(out);
    }
    return 0;
}

void write_manifest(const CliOptions& opt, const ParsedConfig& pc, const std::string& experiment) {
    std::ofstream os(fs::path(opt.out_dir) / "manifest.txt");
    os << "# " << kVersion << "\n";
    os << "# experiment = " << experiment << "\n";
    os << "# effective seed = " << pc.run.seed << "\n";
    os << "# config echo follows\n";
    for (const std::string& line : pc.lines) os << line << "\n";
}

void print_warnings(const ParsedConfig& pc) {
    for (const std::string& w : pc.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

ParsedConfig load(const CliOptions& opt, const std::string& experiment) {
    ParsedConfig pc = parse_config_file(opt.config_path);
    if (opt.seed) pc.run.seed = *opt.seed;
    validate_config(pc, experiment);
    return pc;
}

void write_energy_csv(const std::string& path, const std::vector<EnergyRecord>& records) {
    std::ofstream os(path);
    os << EnergyRecord::csv_header() << "\n";
    for (const EnergyRecord& r : records) os << r.csv_row() << "\n";
}

int cmd_run(const CliOptions& opt) {
    ParsedConfig pc = load(opt, "run");
    pc.run.gamma = pc.gamma.value_or(1.0);
    print_warnings(pc);
    if (int rc = prepare_out_dir(opt)) return rc;
    write_manifest(opt, pc, "run");

    Simulator sim(pc.run);
    State U0 = make_smooth_state(sim, pc.run.seed, 1, 1.0);
    Trajectory tr = sim.run(std::move(U0), opt.snapshot_every);

    write_energy_csv((fs::path(opt.out_dir) / "energy.csv").string(), tr.records);
    for (const auto& [step, st] : tr.snapshots) {
        char name[64];
        std::snprintf(name, sizeof name, "state_%010lld.mpe1", (long long)step);
        snapshot::write_state((fs::path(opt.out_dir) / name).string(), st);
    }
    snapshot::write_state((fs::path(opt.out_dir) / "final.mpe1").string(), tr.final_state);

    if (tr.blowup) {
        std::fprintf(stderr, "error: %s (dt too large for the flow; the model itself is "
                             "globally well-posed)\n",
                     tr.blowup->what().c_str());
        return 3;
    }
    std::printf("run: %lld steps, %zu records, final |U|_2 = %.6g\n",
                (long long)(pc.run.t_end - pc.run.t_start), tr.records.size(),
                norm_l2(tr.final_state));
    return 0;
}

int cmd_pullback(const CliOptions& opt) {
    ParsedConfig pc = load(opt, "pullback");
    print_warnings(pc);
    if (int rc = prepare_out_dir(opt)) return rc;
    write_manifest(opt, pc, "pullback");

    RunConfig cfg = pc.run;
    {
        Simulator tmp(cfg);
        cfg.gamma = resolve_gamma(pc, "pullback", tmp.spectrum());
    }
    PullbackPlan plan;
    std::int64_t deepest = cfg.t_end;
    plan.starts = {-std::max<std::int64_t>(1, deepest / 16),
                   -std::max<std::int64_t>(2, deepest / 8),
                   -std::max<std::int64_t>(4, deepest / 4),
                   -std::max<std::int64_t>(8, deepest / 2), -deepest};
    plan.n_states = 3;
    plan.radius = 1.0;
    plan.seed = cfg.seed;

    double d0 = initial_diameter(cfg, plan);
    PullbackResult res = pullback_run(cfg, plan);
    if (res.blowup) {
        std::fprintf(stderr, "error: %s (%s)\n", res.blowup->what().c_str(),
                     res.blowup_context.c_str());
        return 3;
    }

    std::ofstream os(fs::path(opt.out_dir) / "pullback.csv");
    os << "s,pair,distance_V,diameter\n";
    char buf[160];
    for (const PullbackRow& row : res.rows)
        for (std::size_t p = 0; p < row.pair_dist.size(); ++p) {
            std::snprintf(buf, sizeof buf, "%lld,%zu,%.17g,%.17g", (long long)row.s, p,
                          row.pair_dist[p], row.diameter);
            os << buf << "\n";
        }
    std::printf("pullback: initial diameter %.6g\n", d0);
    for (const PullbackRow& row : res.rows)
        std::printf("  s=%lld diameter=%.6g (%.4f of initial)\n", (long long)row.s,
                    row.diameter, row.diameter / d0);
    std::printf("pullback: monotone contraction %s\n", res.monotone ? "yes" : "no");
    return 0;
}

int cmd_absorb(const CliOptions& opt) {
    ParsedConfig pc = load(opt, "absorb");
    print_warnings(pc);
    if (int rc = prepare_out_dir(opt)) return rc;
    write_manifest(opt, pc, "absorb");

    RunConfig cfg = pc.run;
    {
        Simulator tmp(cfg);
        cfg.gamma = resolve_gamma(pc, "absorb", tmp.spectrum());
    }
    std::int64_t deepest = cfg.t_end;
    std::vector<std::int64_t> starts = {-std::max<std::int64_t>(1, deepest / 4),
                                        -std::max<std::int64_t>(2, deepest / 2), -deepest};
    AbsorbResult res = absorbing_radius(cfg, {0.5, 1.0, 2.0}, starts, cfg.seed);

    std::ofstream os(fs::path(opt.out_dir) / "absorb.csv");
    os << "rho,s,final_l2\n";
    char buf[120];
    for (const AbsorbRow& row : res.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%lld,%.17g", row.rho, (long long)row.s,
                      row.final_l2);
        os << buf << "\n";
    }
    std::printf("absorb: radius estimate %.6g, spread %.2f%%, %s\n", res.radius,
                100 * res.spread,
                res.converged ? "rho-independent within 5%"
                              : "not converged at the deepest start (go deeper)");
    return 0;
}

int cmd_measure(const CliOptions& opt) {
    ParsedConfig pc = load(opt, "measure");
    print_warnings(pc);
    if (int rc = prepare_out_dir(opt)) return rc;
    write_manifest(opt, pc, "measure");

    RunConfig cfg = pc.run;
    {
        Simulator tmp(cfg);
        cfg.gamma = resolve_gamma(pc, "measure", tmp.spectrum());
    }
    std::int64_t T2 = cfg.t_end;
    std::int64_t T1 = T2 / 4;
    int sample_every = std::max(1, cfg.record_every);
    MeasureResult res = empirical_measure(cfg, T1, T2, sample_every);

    std::ofstream os(fs::path(opt.out_dir) / "measure.csv");
    os << "observable,window,mean,stderr\n";
    char buf[200];
    for (const MeasureEstimate& m : res.rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g", m.observable.c_str(), m.window,
                      m.mean, m.stderr_);
        os << buf << "\n";
    }
    std::printf("measure: burn-in %lld, window [%lld,%lld], stationary %s "
                "(worst two-window gap %.2f sigma)\n",
                (long long)T1, (long long)T1, (long long)T2,
                res.stationary ? "yes" : "no", res.worst_sigma);
    return 0;
}

int cmd_checks(const CliOptions& opt) {
    ParsedConfig pc = load(opt, "checks");
    print_warnings(pc);
    if (int rc = prepare_out_dir(opt)) return rc;
    write_manifest(opt, pc, "checks");

    std::vector<CheckResult> results = run_check_suite(pc.run);
    std::ofstream os(fs::path(opt.out_dir) / "checks.csv");
    os << "check,value,tolerance,pass\n";
    bool all = true;
    char buf[200];
    for (const CheckResult& c : results) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%d", c.name.c_str(), c.value, c.tol,
                      c.pass ? 1 : 0);
        os << buf << "\n";
        std::printf("%-28s %12.4e (tol %9.2e)  %s\n", c.name.c_str(), c.value, c.tol,
                    c.pass ? "pass" : "FAIL");
        all = all && c.pass;
    }
    return all ? 0 : 4;
}

int cmd_dump_spectrum(const CliOptions& opt) {
    ParsedConfig pc = load(opt, "run");
    print_warnings(pc);
    if (int rc = prepare_out_dir(opt)) return rc;
    write_manifest(opt, pc, "dump-spectrum");

    GridPtr g = make_grid(pc.run.ntheta, pc.run.nphi, pc.run.nxi, pc.run.r0, pc.run.rs);
    ModeSpectrum sp = build_spectrum(*g, pc.run.noise, pc.run.alpha, pc.run.beta);
    std::ofstream os(fs::path(opt.out_dir) / "spectrum.csv");
    os << "component,l,m,k,lambda,gamma_mode\n";
    char buf[160];
    for (int j = 0; j < 3; ++j)
        for (const Mode& md : sp.comp[j]) {
            std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.17g,%.17g", j + 1, md.l, md.m, md.k,
                          md.lambda, md.gamma);
            os << buf << "\n";
        }
    SummabilityReport sr = sp.summability();
    std::printf("spectrum: %zu modes; sum lambda*gamma^(2+sigma) = %.4g/%.4g/%.4g, "
                "sum lambda^2*gamma^(2+sigma) = %.4g/%.4g/%.4g, tail bound %s\n",
                sp.total_modes(), sr.sum_lambda_g2s[0], sr.sum_lambda_g2s[1],
                sr.sum_lambda_g2s[2], sr.sum_lambda2_g2s[0], sr.sum_lambda2_g2s[1],
                sr.sum_lambda2_g2s[2], sr.tail_ok ? "ok" : "VIOLATED");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the 3-D stochastic moist primitive equations "
                 "on S^2 x (0,1)"};
    app.require_subcommand(1);

    CliOptions opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "configuration file")->required();
        sub->add_option("--out", opt.out_dir, "output directory")->required();
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--snapshot-every", opt.snapshot_every, "write MPE1 snapshots every N steps");
        sub->add_flag("--force", opt.force, "allow writing into a non-empty output directory");
    };

    CLI::App* c_run = app.add_subcommand("run", "integrate one trajectory");
    CLI::App* c_pull = app.add_subcommand("pullback", "pullback contraction experiment");
    CLI::App* c_abs = app.add_subcommand("absorb", "absorbing-radius estimate");
    CLI::App* c_meas = app.add_subcommand("measure", "invariant-measure statistics");
    CLI::App* c_chk = app.add_subcommand("checks", "operator and identity check suite");
    CLI::App* c_dump = app.add_subcommand("dump-spectrum", "write the noise mode table");
    for (CLI::App* s : {c_run, c_pull, c_abs, c_meas, c_chk, c_dump}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c_run)) return cmd_run(opt);
        if (app.got_subcommand(c_pull)) return cmd_pullback(opt);
        if (app.got_subcommand(c_abs)) return cmd_absorb(opt);
        if (app.got_subcommand(c_meas)) return cmd_measure(opt);
        if (app.got_subcommand(c_chk)) return cmd_checks(opt);
        if (app.got_subcommand(c_dump)) return cmd_dump_spectrum(opt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const BlowUp& b) {
        std::fprintf(stderr, "error: %s\n", b.what().c_str());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
