#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lattwave/calculus.hpp"
#include "lattwave/config.hpp"
#include "lattwave/experiments.hpp"
#include "lattwave/solvers.hpp"
#include "lattwave/verify.hpp"

namespace fs = std::filesystem;
using namespace lattwave;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBlowup = 3;

int cmd_kernel(int d, int L, int axis) {
    LatticeBox box = make_box(d, L);
    Kernel ker = kernel_periodized(box, axis);
    std::printf("# kernel d=%d L=%d axis=%d\n", d, L, axis);
    std::printf("%6s  %24s  %24s\n", "a", "raw.im", "periodized.im");
    cplx total(0.0, 0.0);
    for (int a = -L / 2; a < L / 2; ++a) {
        cplx raw = infinite_kernel_value(a);
        cplx per = ker.values[std::size_t(unsigned_index(box, a))];
        total += per;
        std::printf("%6d  %24.17g  %24.17g\n", a, raw.imag(), per.imag());
    }
    std::printf("# sum.im=%.17g sum.re=%.17g\n", total.imag(), total.real());
    std::printf("# tail_bound=%.17g tail_terms=%d\n", ker.tail_bound, ker.tail_terms);
    return kExitOk;
}

SolverConfig solver_for_run(const RunConfig& cfg, int snapshot_every) {
    SolverConfig s = cfg.solver;
    if (snapshot_every > 0) {
        s.keep_states = true;
        s.sample_every = 1;   // snapshots are indexed by step
    }
    return s;
}

void write_snapshots(const fs::path& dir, const Trajectory& traj, int every) {
    if (every <= 0) return;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        if (i % std::size_t(every) != 0) continue;
        char name[32];
        std::snprintf(name, sizeof(name), "u-%06zu.snap", i);
        save_snapshot((dir / name).string(), traj.states[i].u);
    }
}

int cmd_simulate(const std::string& config_path, const std::string& out_override,
                 std::optional<std::uint64_t> seed_override, int snapshot_every) {
    RunConfig cfg = parse_config_file(config_path, seed_override);
    if (cfg.experiment != "simulate" && cfg.experiment != "quadratic_demo")
        throw ConfigError("config error: experiment '" + cfg.experiment +
                          "' is not runnable with simulate (use scan)");

    fs::path out = out_override.empty() ? fs::path(cfg.out_dir) : fs::path(out_override);
    auto [f, g] = realize_data(cfg);
    SolverConfig scfg = solver_for_run(cfg, snapshot_every);

    Trajectory traj;
    double demo_residual = -1.0;
    if (cfg.experiment == "quadratic_demo") {
        QuadraticDemoReport rep = faddeev_demo(f, g, scfg);
        traj = std::move(rep.trajectory);
        demo_residual = rep.residual;
    } else {
        traj = evolve(f, g, cfg.equation, scfg);
    }

    fs::create_directories(out);
    write_energy_csv((out / "energy.csv").string(), traj, cfg.hash);
    write_snapshots(out, traj, snapshot_every);
    save_checkpoint((out / "state.ckpt").string(), traj.final_state, cfg.hash);
    if (demo_residual >= 0.0) {
        std::ofstream os(out / "demo.json", std::ios::binary);
        os << "{\"residual\":" << format_g17(demo_residual)
           << ",\"completed\":" << (traj.completed ? "true" : "false") << "}\n";
    }

    if (traj.blowup) {
        std::ofstream os(out / "blowup.json", std::ios::binary);
        os << "{\"t\":" << format_g17(traj.blowup->t)
           << ",\"sup_u\":" << format_g17(traj.blowup->sup_u)
           << ",\"sup_ut\":" << format_g17(traj.blowup->sup_ut)
           << ",\"halvings\":" << traj.blowup->halvings << ",\"config\":\"" << hex_u64(cfg.hash)
           << "\"}\n";
        std::fprintf(stderr, "blow-up declared at t=%.17g\n", traj.blowup->t);
        return kExitBlowup;
    }
    std::printf("wrote %s (%zu samples)\n", (out / "energy.csv").string().c_str(),
                traj.samples.size());
    return kExitOk;
}

int cmd_scan(const std::string& config_path, const std::string& out_override,
             std::optional<std::uint64_t> seed_override, int jobs) {
    RunConfig cfg = parse_config_file(config_path, seed_override);
    fs::path out = out_override.empty() ? fs::path(cfg.out_dir) : fs::path(out_override);

    ScanResult scan;
    if (cfg.experiment == "lifespan") {
        DataFamily family = cfg.scan.family == "profile"
                                ? [&] {
                                      auto [f, g] = realize_data(cfg);
                                      return scaled_profile_family(f, g);
                                  }()
                                : blowup_trajectory_family(cfg.box, cfg.equation.forcing.p);
        scan = lifespan_scan_family(cfg.equation, family, cfg.eps_grid(), cfg.solver,
                                    cfg.scan.threshold_R, jobs);
    } else if (cfg.experiment == "dichotomy") {
        scan = counterexample_growth(cfg.scan.L_grid, cfg.box.d == 0 ? 1 : cfg.box.d);
    } else if (cfg.experiment == "isomorphism") {
        IsomorphismReport rep = isomorphism_check(cfg.seed, cfg.scan.trials, cfg.box.L, cfg.box.d);
        scan.experiment = "isomorphism";
        scan.columns = {"trial", "ratio", "min_ratio", "max_ratio"};
        for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
            ScanRow row;
            row.parameter = double(i);
            row.measured = rep.ratios[i];
            row.secondary = rep.min_ratio;
            row.predicted = rep.max_ratio;
            scan.rows.push_back(row);
        }
        if (!rep.within_bounds)
            throw std::runtime_error("isomorphism ratios left the equivalence interval");
    } else {
        throw ConfigError("config error: experiment '" + cfg.experiment +
                          "' is not a scan (use simulate)");
    }

    fs::create_directories(out);
    std::string stem = scan.experiment + "-" + hex_u64(cfg.hash);
    write_scan_csv((out / (stem + ".csv")).string(), scan, cfg.hash);
    write_scan_ndjson((out / (stem + ".ndjson")).string(), scan, cfg.hash);
    std::printf("wrote %s\n", (out / (stem + ".csv")).string().c_str());
    return kExitOk;
}

int cmd_verify(const std::string& suite, bool as_json, std::uint64_t seed) {
    std::vector<CheckResult> results = run_verify_suite(suite, seed);
    bool all_pass = true;
    if (as_json) {
        std::printf("[");
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            std::printf("%s{\"suite\":\"%s\",\"name\":\"%s\",\"pass\":%s,\"measured\":%.17g,"
                        "\"bound\":%.17g}",
                        i ? "," : "", r.suite.c_str(), r.name.c_str(), r.pass ? "true" : "false",
                        r.measured, r.bound);
            all_pass = all_pass && r.pass;
        }
        std::printf("]\n");
    } else {
        for (const auto& r : results) {
            std::printf("[%s] %s/%s measured=%.3g bound=%.3g\n", r.pass ? "PASS" : "FAIL",
                        r.suite.c_str(), r.name.c_str(), r.measured, r.bound);
            all_pass = all_pass && r.pass;
        }
    }
    return all_pass ? kExitOk : kExitError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete nonlocal wave equation toolbox"};
    app.require_subcommand(1);

    auto* kernel = app.add_subcommand("kernel", "print the periodized derivative kernel");
    int kd = 1, kL = 16, kaxis = 1;
    kernel->add_option("--d", kd, "dimension (1..3)")->required();
    kernel->add_option("--L", kL, "sites per axis (even)")->required();
    kernel->add_option("--axis", kaxis, "derivative axis, 1-based")->required();

    std::string sim_config, sim_out;
    long long sim_seed = -1;
    int sim_jobs = 1, sim_snap = 0;
    auto* sim = app.add_subcommand("simulate", "run one evolution from a config");
    sim->add_option("--config", sim_config, "JSON run config")->required();
    sim->add_option("--out", sim_out, "output directory (overrides config)");
    sim->add_option("--jobs", sim_jobs, "worker threads (single runs ignore this)");
    sim->add_option("--seed", sim_seed, "RNG seed override");
    sim->add_option("--snapshot-every", sim_snap, "write a field snapshot every N steps");

    std::string scan_config, scan_out;
    long long scan_seed = -1;
    int scan_jobs = 1;
    auto* scan = app.add_subcommand("scan", "run a parameter scan from a config");
    scan->add_option("--config", scan_config, "JSON run config")->required();
    scan->add_option("--out", scan_out, "output directory (overrides config)");
    scan->add_option("--jobs", scan_jobs, "worker threads");
    scan->add_option("--seed", scan_seed, "RNG seed override");

    std::string verify_suite;
    bool verify_json = false;
    long long verify_seed = 20240901;
    auto* verify = app.add_subcommand("verify", "run an invariant suite");
    verify->add_option("suite", verify_suite, "identities|adjointness|conservation|"
                                              "counterexample|isomorphism|all")
        ->required();
    verify->add_flag("--json", verify_json, "machine-readable output");
    verify->add_option("--seed", verify_seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (kernel->parsed()) return cmd_kernel(kd, kL, kaxis);
        if (sim->parsed())
            return cmd_simulate(sim_config, sim_out,
                                sim_seed >= 0 ? std::optional<std::uint64_t>(sim_seed)
                                              : std::nullopt,
                                sim_snap);
        if (scan->parsed())
            return cmd_scan(scan_config, scan_out,
                            scan_seed >= 0 ? std::optional<std::uint64_t>(scan_seed)
                                           : std::nullopt,
                            scan_jobs);
        if (verify->parsed()) return cmd_verify(verify_suite, verify_json, std::uint64_t(verify_seed));
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
