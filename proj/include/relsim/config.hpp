#pragma once

// Run configuration: one strict JSON document covering platform, workloads
// and experiment parameters. Unknown keys are rejected with the offending
// path.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "relsim/kernel.hpp"
#include "relsim/workloads.hpp"

namespace relsim {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    PlatformConfig platform;
    std::vector<WorkloadConfig> workloads; // empty -> both bundled apps
    std::string policy = "scalability";
    SimTime sim_time_ns = 3'500'000'000;
    int runs = 5;
    std::uint64_t seed = 1;
    int claim_cap = 5; // num_cpus - 1
    SimTime load_window_ns = 100'000'000;
    std::string output_dir = "out";
};

namespace config_detail {

inline void strict_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                        const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw SchemaError("unknown key at " + path + "/" + it.key());
    }
}

template <typename T>
inline void get_if(const nlohmann::json& obj, const char* key, T& out, const std::string& path) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError("bad value at " + path + "/" + key);
    }
}

inline WorkloadConfig workload_preset(const std::string& app_id) {
    if (app_id == "audio_eq") return default_audio_config();
    if (app_id == "corner_detection") return default_corner_config();
    WorkloadConfig cfg;
    cfg.app_id = app_id;
    return cfg;
}

inline WorkloadConfig parse_workload(const nlohmann::json& j, const std::string& path) {
    strict_keys(j,
                {"app_id", "period_ms", "total_kcycles", "parallel_fraction", "adaptation",
                 "mem_accesses_per_kcycle", "segment_count", "first_request_ms", "jitter_ms",
                 "min_cpus", "max_cpus"},
                path);
    if (!j.contains("app_id")) throw SchemaError("missing app_id at " + path);
    WorkloadConfig cfg = workload_preset(j.at("app_id").get<std::string>());
    get_if(j, "period_ms", cfg.period_ms, path);
    get_if(j, "total_kcycles", cfg.total_kcycles, path);
    get_if(j, "parallel_fraction", cfg.parallel_fraction, path);
    get_if(j, "mem_accesses_per_kcycle", cfg.mem_accesses_per_kcycle, path);
    get_if(j, "segment_count", cfg.segment_count, path);
    get_if(j, "first_request_ms", cfg.first_request_ms, path);
    get_if(j, "jitter_ms", cfg.jitter_ms, path);
    get_if(j, "min_cpus", cfg.min_cpus, path);
    get_if(j, "max_cpus", cfg.max_cpus, path);
    if (j.contains("adaptation")) {
        cfg.adaptation.clear();
        for (auto it = j.at("adaptation").begin(); it != j.at("adaptation").end(); ++it) {
            try {
                cfg.adaptation[std::stoi(it.key())] = it.value().get<double>();
            } catch (const std::exception&) {
                throw SchemaError("bad adaptation entry at " + path + "/adaptation/" + it.key());
            }
        }
    }
    return cfg;
}

} // namespace config_detail

inline RunConfig parse_config(const std::string& text) {
    using config_detail::get_if;
    using config_detail::strict_keys;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("config must be a JSON object");
    strict_keys(doc,
                {"platform", "workloads", "policy", "sim_time_ms", "runs", "seed", "claim_cap",
                 "load_window_ms", "output_dir"},
                "");

    RunConfig cfg;
    bool claim_cap_set = doc.contains("claim_cap");
    if (doc.contains("platform")) {
        const auto& jp = doc.at("platform");
        strict_keys(jp, {"num_cpus", "freq_hz", "cache", "bus"}, "/platform");
        get_if(jp, "num_cpus", cfg.platform.num_cpus, "/platform");
        get_if(jp, "freq_hz", cfg.platform.freq_hz, "/platform");
        if (jp.contains("cache")) {
            const auto& jc = jp.at("cache");
            strict_keys(jc, {"size_bits", "line_bits", "hit_rate"}, "/platform/cache");
            get_if(jc, "size_bits", cfg.platform.cache_size_bits, "/platform/cache");
            get_if(jc, "line_bits", cfg.platform.cache_line_bits, "/platform/cache");
            if (jc.contains("hit_rate")) {
                try {
                    cfg.platform.cache_hit_rate = HitRate::parse(jc.at("hit_rate").get<std::string>());
                } catch (const std::exception&) {
                    throw SchemaError("bad value at /platform/cache/hit_rate");
                }
            }
        }
        if (jp.contains("bus")) {
            const auto& jb = jp.at("bus");
            strict_keys(jb, {"transfer_cycles"}, "/platform/bus");
            get_if(jb, "transfer_cycles", cfg.platform.bus_transfer_cycles, "/platform/bus");
        }
    }
    if (doc.contains("workloads")) {
        if (!doc.at("workloads").is_array()) throw SchemaError("/workloads must be an array");
        int i = 0;
        for (const auto& jw : doc.at("workloads"))
            cfg.workloads.push_back(
                config_detail::parse_workload(jw, "/workloads/" + std::to_string(i++)));
    }
    get_if(doc, "policy", cfg.policy, "");
    std::int64_t sim_time_ms = cfg.sim_time_ns / 1'000'000;
    get_if(doc, "sim_time_ms", sim_time_ms, "");
    cfg.sim_time_ns = sim_time_ms * 1'000'000;
    get_if(doc, "runs", cfg.runs, "");
    get_if(doc, "seed", cfg.seed, "");
    get_if(doc, "claim_cap", cfg.claim_cap, "");
    std::int64_t window_ms = cfg.load_window_ns / 1'000'000;
    get_if(doc, "load_window_ms", window_ms, "");
    cfg.load_window_ns = window_ms * 1'000'000;
    get_if(doc, "output_dir", cfg.output_dir, "");

    if (!claim_cap_set) cfg.claim_cap = cfg.platform.num_cpus - 1;

    // Semantic validation.
    if (cfg.platform.num_cpus < 2) throw SchemaError("platform/num_cpus must be >= 2");
    if (cfg.platform.freq_hz <= 0 || kNsPerSecond % cfg.platform.freq_hz != 0)
        throw SchemaError("platform/freq_hz must divide 1e9");
    if (cfg.platform.bus_transfer_cycles < 1) throw SchemaError("platform/bus/transfer_cycles must be >= 1");
    if (cfg.runs < 1) throw SchemaError("runs must be >= 1");
    if (cfg.sim_time_ns <= 0) throw SchemaError("sim_time_ms must be > 0");
    if (cfg.claim_cap < 1 || cfg.claim_cap >= cfg.platform.num_cpus)
        throw SchemaError("claim_cap must be in [1, num_cpus)");
    if (cfg.load_window_ns <= 0) throw SchemaError("load_window_ms must be > 0");
    try {
        parse_policy(cfg.policy);
    } catch (const std::exception&) {
        throw SchemaError("unknown policy \"" + cfg.policy + "\"");
    }
    for (const auto& w : cfg.workloads) workload_detail::check(w);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// The workload set a config stands for: explicit entries, or the two
/// bundled applications when none are given.
inline std::vector<WorkloadConfig> effective_workloads(const RunConfig& cfg) {
    if (!cfg.workloads.empty()) return cfg.workloads;
    return {default_audio_config(), default_corner_config()};
}

} // namespace relsim
