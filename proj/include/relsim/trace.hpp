#pragma once

// Synthetic application traces: sequences of compute/memory segments consumed
// by one CPU. The synthesizer splits a total cycle budget across CPUs with an
// Amdahl-style serial share on CPU 0.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace relsim {

struct TraceSegment {
    std::int64_t compute_cycles = 0;
    std::int64_t mem_reads = 0;
    std::int64_t mem_writes = 0;

    bool operator==(const TraceSegment&) const = default;
};

using Trace = std::vector<TraceSegment>;

inline std::int64_t trace_compute_cycles(const Trace& t) {
    std::int64_t sum = 0;
    for (const auto& s : t) sum += s.compute_cycles;
    return sum;
}

inline std::int64_t trace_accesses(const Trace& t) {
    std::int64_t sum = 0;
    for (const auto& s : t) sum += s.mem_reads + s.mem_writes;
    return sum;
}

struct TraceParams {
    std::int64_t total_work_cycles = 0;
    double parallel_fraction = 1.0; // in [0,1]
    std::int64_t mem_accesses_per_kcycle = 0;
    int segment_count = 1;
};

/// Splits `params.total_work_cycles` over `n_cpus` traces: the parallel share
/// is divided evenly (remainder cycles to the lowest-index CPUs) and the
/// serial share lands on CPU 0, so implied speedup follows Amdahl's law and
/// the per-claim compute total is conserved exactly. Memory accesses are
/// proportional to per-CPU work, split reads:writes = 3:1, remainders to the
/// earliest segments.
inline std::vector<Trace> synth_trace(const TraceParams& params, int n_cpus) {
    if (n_cpus < 1) throw std::invalid_argument("synth_trace: n_cpus must be >= 1");
    if (params.parallel_fraction < 0.0 || params.parallel_fraction > 1.0)
        throw std::invalid_argument("synth_trace: parallel_fraction outside [0,1]");
    if (params.total_work_cycles < 0 || params.segment_count < 1)
        throw std::invalid_argument("synth_trace: bad params");

    const std::int64_t total = params.total_work_cycles;
    const auto parallel =
        static_cast<std::int64_t>(static_cast<double>(total) * params.parallel_fraction + 0.5);
    const std::int64_t serial = total - parallel;

    std::vector<Trace> traces(static_cast<size_t>(n_cpus));
    for (int cpu = 0; cpu < n_cpus; ++cpu) {
        std::int64_t work = parallel / n_cpus + (cpu < parallel % n_cpus ? 1 : 0);
        if (cpu == 0) work += serial;
        const std::int64_t accesses = work * params.mem_accesses_per_kcycle / 1000;

        Trace& t = traces[static_cast<size_t>(cpu)];
        const int segs = params.segment_count;
        for (int s = 0; s < segs; ++s) {
            TraceSegment seg;
            seg.compute_cycles = work / segs + (s < work % segs ? 1 : 0);
            const std::int64_t acc = accesses / segs + (s < accesses % segs ? 1 : 0);
            seg.mem_reads = acc * 3 / 4;
            seg.mem_writes = acc - seg.mem_reads;
            t.push_back(seg);
        }
    }
    return traces;
}

/// Trace table of one workload: (trace_ref, claim_size) -> one Trace per
/// member CPU. Fen nodes resolve their payload here at dispatch time.
class TraceTable {
public:
    void put(const std::string& trace_ref, int claim_size, std::vector<Trace> traces) {
        table_[trace_ref][claim_size] = std::move(traces);
    }

    bool contains(const std::string& trace_ref, int claim_size) const {
        auto it = table_.find(trace_ref);
        return it != table_.end() && it->second.count(claim_size) > 0;
    }

    const std::vector<Trace>& lookup(const std::string& trace_ref, int claim_size) const {
        auto it = table_.find(trace_ref);
        if (it == table_.end())
            throw std::out_of_range("trace ref not found: " + trace_ref);
        auto jt = it->second.find(claim_size);
        if (jt == it->second.end())
            throw std::out_of_range("trace ref " + trace_ref + " has no entry for claim size " +
                                    std::to_string(claim_size));
        return jt->second;
    }

    const std::map<std::string, std::map<int, std::vector<Trace>>>& entries() const {
        return table_;
    }

private:
    std::map<std::string, std::map<int, std::vector<Trace>>> table_;
};

} // namespace relsim
