#pragma once

// Finalized per-run metrics: utilization/cache/bus counters plus the
// allocation, context and iteration logs used for post-hoc verification.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relsim/time.hpp"

namespace relsim {

struct UnknownCpu : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct CpuMetrics {
    int cpu_id = 0;
    std::int64_t busy_cycles = 0;
    std::int64_t idle_cycles = 0;
    std::int64_t cache_accesses = 0;
    std::int64_t cache_hits = 0;
};

struct AllocationRecord {
    SimTime time = 0;
    std::string app_id;
    int requested_min = 0;
    int requested_max = 0;
    int granted = 0;
    std::vector<int> cpus;
    int batch_size = 1; // demands decided in the same policy call
};

struct ContextRecord {
    std::int64_t context_id = 0;
    std::string app_id;
    std::string fen_id;
    std::vector<int> cpus;
    SimTime start = 0;
    std::optional<SimTime> end; // unset: still in flight at horizon end
};

struct IterationRecord {
    std::string app_id;
    std::int64_t iteration = 0;
    SimTime requested = 0;
    SimTime completed = 0;
    int granted = 0;
};

struct CpuInterval {
    int cpu_id = 0;
    SimTime start = 0;
    SimTime end = 0;
    std::int64_t context_id = 0;
};

struct MetricsReport {
    SimTime horizon_ns = 0;
    std::int64_t freq_hz = 0;
    std::int64_t horizon_cycles = 0;
    std::vector<CpuMetrics> cpus;
    std::int64_t bus_grants = 0;
    std::int64_t bus_busy_cycles = 0;
    std::vector<AllocationRecord> allocations;
    std::vector<ContextRecord> contexts;
    std::vector<IterationRecord> iterations;
    std::map<std::string, std::int64_t> skipped_iterations;
    std::int64_t denied_requests = 0;
    std::int64_t invariant_violations = 0;
    std::vector<std::string> violation_log;
    std::vector<CpuInterval> busy_intervals;

    double cpu_load(int cpu_id) const {
        if (cpu_id < 0 || cpu_id >= static_cast<int>(cpus.size()))
            throw UnknownCpu("no such cpu: " + std::to_string(cpu_id));
        if (horizon_cycles == 0) return 0.0;
        return static_cast<double>(cpus[static_cast<size_t>(cpu_id)].busy_cycles) /
               static_cast<double>(horizon_cycles);
    }

    double average_cpu_load() const {
        if (cpus.empty() || horizon_cycles == 0) return 0.0;
        std::int64_t busy = 0;
        for (const auto& c : cpus) busy += c.busy_cycles;
        return static_cast<double>(busy) /
               (static_cast<double>(horizon_cycles) * static_cast<double>(cpus.size()));
    }

    std::int64_t total_cache_accesses() const {
        std::int64_t n = 0;
        for (const auto& c : cpus) n += c.cache_accesses;
        return n;
    }

    double bus_load() const {
        if (horizon_cycles == 0) return 0.0;
        return static_cast<double>(bus_busy_cycles) / static_cast<double>(horizon_cycles);
    }

    std::int64_t total_skipped() const {
        std::int64_t n = 0;
        for (const auto& [_, v] : skipped_iterations) n += v;
        return n;
    }
};

} // namespace relsim
