#pragma once

// Experiment orchestration: multi-run scenarios with derived per-run seeds,
// deterministic CSV emission, and side-by-side policy comparison.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "relsim/config.hpp"
#include "relsim/kernel.hpp"
#include "relsim/report.hpp"
#include "relsim/workloads.hpp"

namespace relsim {

struct ExperimentResult {
    std::string policy;
    std::vector<MetricsReport> runs;
    std::vector<double> wall_ms; // per run, informational only

    // Aggregate over runs: mean of per-run average CPU loads.
    double avg_cpu_load() const {
        if (runs.empty()) return 0.0;
        double s = 0.0;
        for (const auto& r : runs) s += r.average_cpu_load();
        return s / static_cast<double>(runs.size());
    }
    double avg_total_cache_accesses() const {
        if (runs.empty()) return 0.0;
        double s = 0.0;
        for (const auto& r : runs) s += static_cast<double>(r.total_cache_accesses());
        return s / static_cast<double>(runs.size());
    }
    double avg_bus_load() const {
        if (runs.empty()) return 0.0;
        double s = 0.0;
        for (const auto& r : runs) s += r.bus_load();
        return s / static_cast<double>(runs.size());
    }
};

/// Calibrated AppSpecs for a config; calibration is deterministic, so one
/// build serves every run and policy.
inline std::vector<AppSpec> build_apps(const RunConfig& cfg) {
    std::vector<AppSpec> apps;
    for (const auto& w : effective_workloads(cfg)) apps.push_back(build_app(w, cfg.platform));
    return apps;
}

inline MetricsReport single_run(const RunConfig& cfg, const std::vector<AppSpec>& apps,
                                std::uint64_t seed) {
    KernelConfig kc;
    kc.platform = cfg.platform;
    kc.policy = parse_policy(cfg.policy);
    kc.claim_cap = cfg.claim_cap;
    kc.load_window_ns = cfg.load_window_ns;
    kc.seed = seed;
    Simulation sim(kc);
    for (const auto& a : apps) sim.register_app(a);
    return sim.run_until(cfg.sim_time_ns);
}

inline std::string summary_text(const RunConfig& cfg, const ExperimentResult& res) {
    std::ostringstream os;
    os << "policy: " << res.policy << "\n"
       << "runs: " << res.runs.size() << "  sim_time_ms: " << cfg.sim_time_ns / 1'000'000
       << "  seed: " << cfg.seed << "\n"
       << "platform: " << cfg.platform.num_cpus << " CPUs @ " << cfg.platform.freq_hz / 1'000'000
       << " MHz, cache hit rate " << cfg.platform.cache_hit_rate.str() << ", bus transfer "
       << cfg.platform.bus_transfer_cycles << " cycles\n\n";
    for (size_t i = 0; i < res.runs.size(); ++i) {
        const auto& r = res.runs[i];
        std::int64_t busy = 0;
        for (const auto& c : r.cpus) busy += c.busy_cycles;
        os << "run " << i << ": avg_cpu_load "
           << format_fraction(busy, r.horizon_cycles * static_cast<std::int64_t>(r.cpus.size()))
           << "  cache_accesses " << r.total_cache_accesses() << "  bus_load "
           << format_fraction(r.bus_busy_cycles, r.horizon_cycles) << "  allocations "
           << r.allocations.size() << "  iterations " << r.iterations.size() << "  skipped "
           << r.total_skipped() << "  denied " << r.denied_requests << "  violations "
           << r.invariant_violations;
        if (i < res.wall_ms.size()) os << "  wall_ms " << static_cast<long long>(res.wall_ms[i]);
        os << "\n";
    }
    os << "\naveraged avg_cpu_load: " << format_fraction(
              static_cast<std::int64_t>(res.avg_cpu_load() * 1'000'000'000), 1'000'000'000)
       << "\n";
    return os.str();
}

/// Runs `cfg.runs` independent simulations with seeds seed, seed+1, ... and
/// writes run_<i>_cpu.csv, run_<i>_alloc.csv, avg_cpu.csv, events.csv (run 0
/// context transitions) and summary.txt into the output directory.
inline ExperimentResult run_experiment(const RunConfig& cfg,
                                       const std::vector<AppSpec>* prebuilt = nullptr) {
    namespace fs = std::filesystem;
    const std::vector<AppSpec> apps = prebuilt ? *prebuilt : build_apps(cfg);
    fs::create_directories(cfg.output_dir);

    ExperimentResult res;
    res.policy = cfg.policy;
    for (int i = 0; i < cfg.runs; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        res.runs.push_back(single_run(cfg, apps, cfg.seed + static_cast<std::uint64_t>(i)));
        const auto t1 = std::chrono::steady_clock::now();
        res.wall_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    for (size_t i = 0; i < res.runs.size(); ++i) {
        const std::string tag = "run_" + std::to_string(i);
        write_file(cfg.output_dir + "/" + tag + "_cpu.csv", cpu_csv(res.runs[i]));
        write_file(cfg.output_dir + "/" + tag + "_alloc.csv", alloc_csv(res.runs[i]));
    }
    write_file(cfg.output_dir + "/avg_cpu.csv", avg_cpu_csv(res.runs));
    write_file(cfg.output_dir + "/events.csv", events_csv(res.runs.front()));
    write_file(cfg.output_dir + "/summary.txt", summary_text(cfg, res));
    return res;
}

/// Runs each policy on the same seeds and emits a side-by-side table
/// (comparison.txt) of average CPU load, cache accesses and bus load.
inline std::vector<ExperimentResult> compare_policies(const RunConfig& cfg,
                                                      const std::vector<std::string>& policies) {
    if (policies.size() < 2)
        throw std::invalid_argument("compare_policies needs at least two policies");
    const std::vector<AppSpec> apps = build_apps(cfg);
    std::vector<ExperimentResult> results;
    for (size_t i = 0; i < policies.size(); ++i) {
        RunConfig sub = cfg;
        sub.policy = policies[i];
        parse_policy(sub.policy); // validate before running
        sub.output_dir = cfg.output_dir + "/" + std::to_string(i) + "_" + sub.policy;
        results.push_back(run_experiment(sub, &apps));
    }

    std::ostringstream os;
    os << "metric";
    for (const auto& r : results) os << ',' << r.policy;
    os << "\navg_cpu_load";
    for (const auto& r : results)
        os << ',' << format_fraction(static_cast<std::int64_t>(r.avg_cpu_load() * 1'000'000'000),
                                     1'000'000'000);
    os << "\ntotal_cache_accesses";
    for (const auto& r : results)
        os << ',' << format_fraction(static_cast<std::int64_t>(r.avg_total_cache_accesses() * 10'000),
                                     10'000);
    os << "\nbus_load";
    for (const auto& r : results)
        os << ',' << format_fraction(static_cast<std::int64_t>(r.avg_bus_load() * 1'000'000'000),
                                     1'000'000'000);
    os << "\n";
    std::filesystem::create_directories(cfg.output_dir);
    write_file(cfg.output_dir + "/comparison.txt", os.str());
    return results;
}

} // namespace relsim
