#pragma once

// The two bundled periodic adaptive applications (audio equalization and
// corner detection) as AIR + trace-table + curve bundles. Scalability and
// standalone-load curves are not free parameters: they are measured by
// standalone calibration runs of the simulator itself.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "relsim/app.hpp"
#include "relsim/kernel.hpp"

namespace relsim {

struct ConfigOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WorkloadConfig {
    std::string app_id;
    std::int64_t period_ms = 0;
    std::int64_t total_kcycles = 0;
    double parallel_fraction = 1.0;
    std::map<int, double> adaptation; // claim size -> work scale
    std::int64_t mem_accesses_per_kcycle = 2;
    int segment_count = 8;
    std::int64_t first_request_ms = 0;
    std::int64_t jitter_ms = 0;
    int min_cpus = 1;
    int max_cpus = 5;
};

inline std::map<int, double> default_adaptation() {
    return {{1, 0.5}, {2, 0.6}, {3, 0.65}, {4, 0.9}, {5, 1.0}};
}

/// Audio equalization: 400 ms period. The parallel fraction and cycle budget
/// are calibration outputs chosen so the bundled scenario splits reproduce
/// (see tests); both are config-overridable.
inline WorkloadConfig default_audio_config() {
    WorkloadConfig cfg;
    cfg.app_id = "audio_eq";
    cfg.period_ms = 400;
    cfg.total_kcycles = 28'000;
    cfg.parallel_fraction = 0.91;
    cfg.adaptation = default_adaptation();
    return cfg;
}

/// Corner detection: 1000 ms period, heavier cycle budget so its standalone
/// load dominates audio equalization at every CPU count.
inline WorkloadConfig default_corner_config() {
    WorkloadConfig cfg;
    cfg.app_id = "corner_detection";
    cfg.period_ms = 1000;
    cfg.total_kcycles = 90'000;
    cfg.parallel_fraction = 0.92;
    cfg.adaptation = default_adaptation();
    return cfg;
}

namespace workload_detail {

inline void check(const WorkloadConfig& cfg) {
    if (cfg.period_ms <= 0) throw ConfigOutOfRange("period_ms must be > 0");
    if (cfg.total_kcycles <= 0) throw ConfigOutOfRange("total_kcycles must be > 0");
    if (cfg.parallel_fraction < 0.0 || cfg.parallel_fraction > 1.0)
        throw ConfigOutOfRange("parallel_fraction outside [0,1]");
    if (cfg.min_cpus < 1 || cfg.min_cpus > cfg.max_cpus)
        throw ConfigOutOfRange("bad min/max cpus");
    if (cfg.segment_count < 1) throw ConfigOutOfRange("segment_count must be >= 1");
    if (cfg.mem_accesses_per_kcycle < 0) throw ConfigOutOfRange("negative memory density");
    if (cfg.jitter_ms < 0 || cfg.first_request_ms < 0)
        throw ConfigOutOfRange("negative timing offset");
    for (const auto& [k, scale] : cfg.adaptation)
        if (k < 1 || scale <= 0.0 || scale > 1.0)
            throw ConfigOutOfRange("adaptation scale must be in (0,1]");
}

inline double adaptation_scale(const WorkloadConfig& cfg, int claim_size) {
    auto it = cfg.adaptation.find(claim_size);
    return it == cfg.adaptation.end() ? 1.0 : it->second;
}

/// The seven-node adaptive AIR: entry get_resource with guarded branches for
/// claim sizes 1, 2, 3 and 4-5 (each one Fen, joining at a release leaf) and
/// a default edge for the empty claim straight to a release leaf.
inline air::AirGraph build_adaptive_air(const std::string& app_id, int min_cpus, int max_cpus) {
    air::AirGraph g;
    g.graph_id = app_id;
    g.entry_node = "get";
    air::AirNode get;
    get.node_id = "get";
    get.kind = air::AirNode::Kind::GetResource;
    get.demand.min_cpus = min_cpus;
    get.demand.max_cpus = max_cpus;
    g.nodes.push_back(get);
    auto fen = [&](const std::string& id, const std::string& trace_ref) {
        air::AirNode n;
        n.node_id = id;
        n.kind = air::AirNode::Kind::Fen;
        n.trace_ref = trace_ref;
        g.nodes.push_back(n);
    };
    fen("fen_n1", app_id + "_n1");
    fen("fen_n2", app_id + "_n2");
    fen("fen_n3", app_id + "_n3");
    fen("fen_n45", app_id + "_n45");
    air::AirNode rel;
    rel.node_id = "release";
    rel.kind = air::AirNode::Kind::ReleaseResource;
    g.nodes.push_back(rel);
    air::AirNode skip = rel;
    skip.node_id = "release_skip";
    g.nodes.push_back(skip);

    g.edges.push_back({"get", "fen_n1", air::Guard::eq(1)});
    g.edges.push_back({"get", "fen_n2", air::Guard::eq(2)});
    g.edges.push_back({"get", "fen_n3", air::Guard::eq(3)});
    g.edges.push_back({"get", "fen_n45", air::Guard::in(4, 5)});
    g.edges.push_back({"get", "release_skip", air::Guard::fallback()});
    g.edges.push_back({"fen_n1", "release", air::Guard::always()});
    g.edges.push_back({"fen_n2", "release", air::Guard::always()});
    g.edges.push_back({"fen_n3", "release", air::Guard::always()});
    g.edges.push_back({"fen_n45", "release", air::Guard::always()});
    return g;
}

inline std::string trace_ref_for(const std::string& app_id, int claim_size) {
    if (claim_size <= 3) return app_id + "_n" + std::to_string(claim_size);
    return app_id + "_n45";
}

/// Trace table for claim sizes 1..5. `adapted` applies the per-claim work
/// scaling; calibration uses the unscaled table so measured speedup means
/// the same work on a varying CPU count.
inline TraceTable build_trace_table(const WorkloadConfig& cfg, bool adapted) {
    TraceTable table;
    for (int k = 1; k <= cfg.max_cpus; ++k) {
        const double scale = adapted ? adaptation_scale(cfg, k) : 1.0;
        TraceParams p;
        p.total_work_cycles =
            static_cast<std::int64_t>(std::llround(static_cast<double>(cfg.total_kcycles) * 1000.0 * scale));
        p.parallel_fraction = cfg.parallel_fraction;
        p.mem_accesses_per_kcycle = cfg.mem_accesses_per_kcycle;
        p.segment_count = cfg.segment_count;
        table.put(trace_ref_for(cfg.app_id, k), k, synth_trace(p, k));
    }
    return table;
}

inline AppSpec assemble(const WorkloadConfig& cfg, bool adapted) {
    AppSpec spec;
    spec.app_id = cfg.app_id;
    spec.air = build_adaptive_air(cfg.app_id, cfg.min_cpus, cfg.max_cpus);
    spec.period = cfg.period_ms * 1'000'000;
    spec.traces = build_trace_table(cfg, adapted);
    spec.demand.app_id = cfg.app_id;
    spec.demand.min_cpus = cfg.min_cpus;
    spec.demand.max_cpus = cfg.max_cpus;
    spec.first_request = cfg.first_request_ms * 1'000'000;
    spec.jitter_bound = cfg.jitter_ms * 1'000'000;
    return spec;
}

/// Standalone run with the claim size pinned to exactly n; returns the
/// finalized report. Used by both calibration and the curve-consistency
/// tests.
inline MetricsReport standalone_run(const WorkloadConfig& cfg, const PlatformConfig& platform,
                                    int n, bool adapted, SimTime horizon) {
    KernelConfig kc;
    kc.platform = platform;
    kc.policy = Policy::FirstFit;
    kc.claim_cap = platform.num_cpus - 1;
    WorkloadConfig pinned = cfg;
    pinned.min_cpus = n;
    pinned.max_cpus = n;
    pinned.jitter_ms = 0;
    Simulation sim(kc);
    sim.register_app(assemble(pinned, adapted));
    return sim.run_until(horizon);
}

} // namespace workload_detail

/// Iteration latency of the app alone on exactly n CPUs with full
/// (unadapted) work. Fatal if the iteration does not finish within 16
/// periods, which would mean the configuration is infeasible outright.
inline SimTime measure_standalone_latency(const WorkloadConfig& cfg,
                                          const PlatformConfig& platform, int n) {
    const MetricsReport rep =
        workload_detail::standalone_run(cfg, platform, n, /*adapted=*/false,
                                        cfg.period_ms * 1'000'000 * 16);
    if (rep.iterations.empty())
        throw ConfigOutOfRange("workload " + cfg.app_id + " never completes an iteration");
    return rep.iterations.front().completed - rep.iterations.front().requested;
}

/// Average utilization of the n allocated CPUs over two periods, with the
/// app's adaptive (claim-size scaled) traces.
inline double measure_standalone_load(const WorkloadConfig& cfg, const PlatformConfig& platform,
                                      int n) {
    const SimTime horizon = cfg.period_ms * 1'000'000 * 2;
    const MetricsReport rep =
        workload_detail::standalone_run(cfg, platform, n, /*adapted=*/true, horizon);
    std::int64_t busy = 0;
    for (const auto& c : rep.cpus) busy += c.busy_cycles;
    return static_cast<double>(busy) / (static_cast<double>(rep.horizon_cycles) * n);
}

/// Builds a full AppSpec: adaptive traces plus curves derived from
/// standalone calibration runs (speedup normalized to the 1-CPU latency).
inline AppSpec build_app(const WorkloadConfig& cfg, const PlatformConfig& platform) {
    workload_detail::check(cfg);
    AppSpec spec = workload_detail::assemble(cfg, /*adapted=*/true);

    spec.scalability.app_id = cfg.app_id;
    const SimTime t1 = measure_standalone_latency(cfg, platform, 1);
    for (int n = 1; n <= cfg.max_cpus; ++n) {
        const SimTime tn = measure_standalone_latency(cfg, platform, n);
        spec.scalability.speedup.push_back(static_cast<double>(t1) / static_cast<double>(tn));
    }
    spec.standalone_load.app_id = cfg.app_id;
    for (int n = 1; n <= cfg.max_cpus; ++n)
        spec.standalone_load.load.push_back(measure_standalone_load(cfg, platform, n));
    return spec;
}

/// Structural AIR validation plus trace-table coverage: every Fen node must
/// resolve its trace_ref for every claim size it is reachable under, and
/// every Fen branch must be reachable at all.
inline air::ValidationReport validate_app_spec(const AppSpec& spec, int num_cpus) {
    air::ValidationReport rep = air::validate_air(spec.air, num_cpus);
    const auto reachable = air::reachable_claim_sizes(spec.air, num_cpus);
    for (const auto& node : spec.air.nodes) {
        if (node.kind != air::AirNode::Kind::Fen) continue;
        auto it = reachable.find(node.node_id);
        bool any = false;
        if (it != reachable.end()) {
            for (int k : it->second) {
                if (k < 1) continue;
                any = true;
                if (!spec.traces.contains(node.trace_ref, k))
                    rep.violations.push_back({air::Violation::Code::MissingTrace, node.node_id,
                                              "claim size " + std::to_string(k)});
            }
        }
        if (!any)
            rep.violations.push_back({air::Violation::Code::UnreachableBranch, node.node_id, ""});
    }
    return rep;
}

inline AppSpec build_audio_eq(const PlatformConfig& platform) {
    return build_app(default_audio_config(), platform);
}
inline AppSpec build_corner_detection(const PlatformConfig& platform) {
    return build_app(default_corner_config(), platform);
}

} // namespace relsim
