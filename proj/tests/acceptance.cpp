// End-to-end acceptance checks over the default two-app scenario. Each check
// prints one [PASS]/[FAIL] line; the process exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relsim/experiment.hpp"

using namespace relsim;

namespace {

struct Check {
    int id;
    std::string title;
    std::function<bool(std::string&)> fn;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Exhaustive reference for the scalability policy, written as a flat
// odometer enumeration so it shares no code with the recursive
// implementation under test.
std::map<std::string, int> scalability_oracle(const std::map<std::string, ScalabilityCurve>& curves,
                                              const std::vector<Demand>& demands, int free,
                                              int cap) {
    std::vector<Demand> sorted = demands;
    std::sort(sorted.begin(), sorted.end(),
              [](const Demand& a, const Demand& b) { return a.app_id < b.app_id; });
    const size_t k = sorted.size();
    std::vector<int> cur(k, 0), best;
    double best_obj = -1.0;
    int best_spread = 0;
    while (true) {
        int sum = 0;
        bool feasible = true;
        for (size_t i = 0; i < k; ++i) {
            sum += cur[i];
            if (cur[i] > std::min(sorted[i].max_cpus, cap)) feasible = false;
            if (free >= static_cast<int>(k) && sorted[i].min_cpus == 1 && cur[i] < 1)
                feasible = false;
        }
        if (sum > free) feasible = false;
        if (feasible) {
            double obj = 0.0;
            for (size_t i = 0; i < k; ++i) obj += curves.at(sorted[i].app_id).at(cur[i]);
            const auto [mn, mx] = std::minmax_element(cur.begin(), cur.end());
            const int spread = *mx - *mn;
            if (best.empty() || obj > best_obj ||
                (obj == best_obj && (spread < best_spread || (spread == best_spread && cur < best)))) {
                best = cur;
                best_obj = obj;
                best_spread = spread;
            }
        }
        size_t i = 0;
        while (i < k && ++cur[i] > free) cur[i++] = 0;
        if (i == k) break;
    }
    std::map<std::string, int> out;
    for (size_t i = 0; i < k; ++i) out[sorted[i].app_id] = best[i];
    return out;
}

// Per-epoch grants to the two default apps, keyed by allocation timestamp,
// restricted to epochs where both requested at the same instant.
std::map<SimTime, std::map<std::string, int>> co_request_grants(const MetricsReport& rep) {
    std::map<SimTime, std::map<std::string, int>> out;
    for (const auto& a : rep.allocations)
        if (a.batch_size == 2) out[a.time][a.app_id] = a.granted;
    return out;
}

} // namespace

int main() {
    const RunConfig base; // bundled defaults: 6 CPUs, 3500 ms, 5 runs, seed 1
    namespace fs = std::filesystem;
    const fs::path work = fs::temp_directory_path() / "relsim_acceptance";
    fs::remove_all(work);

    const auto wall_start = std::chrono::steady_clock::now();
    const std::vector<AppSpec> apps = build_apps(base);

    RunConfig cfg_load = base;
    cfg_load.policy = "load";
    cfg_load.output_dir = (work / "load").string();
    RunConfig cfg_scal = base;
    cfg_scal.policy = "scalability";
    cfg_scal.output_dir = (work / "scalability").string();

    const auto t_load0 = std::chrono::steady_clock::now();
    const ExperimentResult res_load = run_experiment(cfg_load, &apps);
    const auto t_load1 = std::chrono::steady_clock::now();
    const ExperimentResult res_scal = run_experiment(cfg_scal, &apps);
    const double load_secs = std::chrono::duration<double>(t_load1 - t_load0).count();

    std::vector<Check> checks;

    checks.push_back({1, "load policy grants 5 CPUs to corner detection and 1 to audio", [&](std::string& why) {
        bool any = false;
        for (const auto& rep : res_load.runs) {
            for (const auto& [t, grants] : co_request_grants(rep)) {
                any = true;
                if (grants.at("corner_detection") != 5 || grants.at("audio_eq") != 1) {
                    why = "at t=" + std::to_string(t) + " ns: corner=" +
                          std::to_string(grants.at("corner_detection")) +
                          " audio=" + std::to_string(grants.at("audio_eq"));
                    return false;
                }
            }
        }
        if (!any) { why = "no co-request epochs observed"; return false; }
        if (load_secs >= 10.0) { why = "experiment took " + std::to_string(load_secs) + " s"; return false; }
        return true;
    }});

    checks.push_back({2, "scalability policy grants 3 + 3", [&](std::string& why) {
        bool any = false;
        for (const auto& rep : res_scal.runs) {
            for (const auto& [t, grants] : co_request_grants(rep)) {
                any = true;
                if (grants.at("corner_detection") != 3 || grants.at("audio_eq") != 3) {
                    why = "at t=" + std::to_string(t) + " ns: corner=" +
                          std::to_string(grants.at("corner_detection")) +
                          " audio=" + std::to_string(grants.at("audio_eq"));
                    return false;
                }
            }
        }
        if (!any) why = "no co-request epochs observed";
        return any;
    }});

    checks.push_back({3, "load policy utilization exceeds scalability by >= 2 pp", [&](std::string& why) {
        const double gap = res_load.avg_cpu_load() - res_scal.avg_cpu_load();
        why = "load " + std::to_string(res_load.avg_cpu_load() * 100) + "% vs scalability " +
              std::to_string(res_scal.avg_cpu_load() * 100) + "% (gap " +
              std::to_string(gap * 100) + " pp)";
        return gap >= 0.02;
    }});

    checks.push_back({4, "load policy triggers at least as many cache accesses", [&](std::string& why) {
        why = "load " + std::to_string(res_load.avg_total_cache_accesses()) + " vs scalability " +
              std::to_string(res_scal.avg_total_cache_accesses());
        return res_load.avg_total_cache_accesses() >= res_scal.avg_total_cache_accesses();
    }});

    checks.push_back({5, "scalability policy matches the enumeration oracle on 200 random batches", [&](std::string& why) {
        std::mt19937_64 rng(2024);
        for (int trial = 0; trial < 200; ++trial) {
            const int num_cpus = 2 + static_cast<int>(rng() % 7);
            const int cap = 1 + static_cast<int>(rng() % (num_cpus - 1));
            const int free = static_cast<int>(rng() % (num_cpus + 1));
            const int n_apps = 1 + static_cast<int>(rng() % 3);
            std::map<std::string, ScalabilityCurve> curves;
            std::vector<Demand> demands;
            for (int a = 0; a < n_apps; ++a) {
                const std::string id = "app" + std::to_string(a);
                ScalabilityCurve c;
                c.app_id = id;
                c.speedup = {1.0};
                for (int n = 2; n <= num_cpus; ++n)
                    c.speedup.push_back(c.speedup.back() + static_cast<double>(rng() % 17) / 16.0);
                curves[id] = c;
                Demand d;
                d.app_id = id;
                d.min_cpus = 1 + static_cast<int>(rng() % 2);
                d.max_cpus = std::min(num_cpus, d.min_cpus + static_cast<int>(rng() % num_cpus));
                demands.push_back(d);
            }
            const std::vector<int> limits(demands.size(), num_cpus);
            const auto got = policy_scalability(curves, demands, free, cap, limits);
            const auto want = scalability_oracle(curves, demands, free, cap);
            if (got != want) {
                why = "mismatch in trial " + std::to_string(trial);
                return false;
            }
        }
        return true;
    }});

    checks.push_back({6, "online reservation invariants hold with zero violations", [&](std::string& why) {
        for (const auto* res : {&res_load, &res_scal}) {
            for (size_t i = 0; i < res->runs.size(); ++i) {
                if (res->runs[i].invariant_violations != 0) {
                    why = res->policy + " run " + std::to_string(i) + ": " +
                          std::to_string(res->runs[i].invariant_violations) + " violations";
                    if (!res->runs[i].violation_log.empty())
                        why += " (first: " + res->runs[i].violation_log.front() + ")";
                    return false;
                }
            }
        }
        return true;
    }});

    checks.push_back({7, "cycle conservation and byte-identical reruns", [&](std::string& why) {
        for (const auto* res : {&res_load, &res_scal}) {
            for (const auto& rep : res->runs) {
                for (const auto& c : rep.cpus) {
                    if (c.busy_cycles + c.idle_cycles != rep.horizon_cycles) {
                        why = "cpu " + std::to_string(c.cpu_id) + ": busy+idle != horizon";
                        return false;
                    }
                }
            }
        }
        RunConfig again = cfg_load;
        again.output_dir = (work / "load_again").string();
        run_experiment(again, &apps);
        for (const std::string name :
             {"run_0_cpu.csv", "run_0_alloc.csv", "run_4_cpu.csv", "avg_cpu.csv", "events.csv"}) {
            if (slurp(cfg_load.output_dir + "/" + name) != slurp(again.output_dir + "/" + name)) {
                why = name + " differs between identical runs";
                return false;
            }
        }
        return true;
    }});

    checks.push_back({8, "stored speedup curves match standalone remeasurement within 1%", [&](std::string& why) {
        for (const auto& wcfg : effective_workloads(base)) {
            const AppSpec* spec = nullptr;
            for (const auto& a : apps)
                if (a.app_id == wcfg.app_id) spec = &a;
            const SimTime t1 = measure_standalone_latency(wcfg, base.platform, 1);
            for (int n = 1; n <= 5; ++n) {
                const SimTime tn = measure_standalone_latency(wcfg, base.platform, n);
                const double measured = static_cast<double>(t1) / static_cast<double>(tn);
                const double stored = spec->scalability.at(n);
                if (std::abs(stored - measured) / measured > 0.01) {
                    why = wcfg.app_id + " at n=" + std::to_string(n) + ": stored " +
                          std::to_string(stored) + " vs measured " + std::to_string(measured);
                    return false;
                }
            }
        }
        return true;
    }});

    checks.push_back({9, "run to completion: every context's CPU time is one contiguous interval", [&](std::string& why) {
        for (const auto* res : {&res_load, &res_scal}) {
            for (const auto& rep : res->runs) {
                // (context, cpu) -> interval count; contiguity means exactly one
                std::map<std::pair<std::int64_t, int>, int> counts;
                for (const auto& iv : rep.busy_intervals) ++counts[{iv.context_id, iv.cpu_id}];
                for (const auto& [key, n] : counts) {
                    if (n != 1) {
                        why = "context " + std::to_string(key.first) + " on cpu " +
                              std::to_string(key.second) + " split into " + std::to_string(n) +
                              " intervals";
                        return false;
                    }
                }
                // and no two intervals on one CPU overlap
                std::map<int, std::vector<std::pair<SimTime, SimTime>>> per_cpu;
                for (const auto& iv : rep.busy_intervals) per_cpu[iv.cpu_id].push_back({iv.start, iv.end});
                for (auto& [cpu, ivs] : per_cpu) {
                    std::sort(ivs.begin(), ivs.end());
                    for (size_t i = 1; i < ivs.size(); ++i) {
                        if (ivs[i].first < ivs[i - 1].second) {
                            why = "overlapping intervals on cpu " + std::to_string(cpu);
                            return false;
                        }
                    }
                }
            }
        }
        return true;
    }});

    checks.push_back({10, "full two-policy comparison stays under 60 s", [&](std::string& why) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        why = std::to_string(secs) + " s including calibration and reruns";
        return secs < 60.0;
    }});

    int failures = 0;
    for (const auto& c : checks) {
        std::string why;
        bool ok = false;
        try {
            ok = c.fn(why);
        } catch (const std::exception& e) {
            why = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    why.empty() ? "" : " -- ", why.c_str());
        if (!ok) ++failures;
    }
    fs::remove_all(work);
    return failures == 0 ? 0 : 1;
}
