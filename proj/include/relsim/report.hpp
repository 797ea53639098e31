#pragma once

// CSV and summary emission. All decimal cells are printed from integer
// rationals with 4 fractional digits, round-half-even, so output bytes do
// not depend on platform floating point.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "relsim/metrics.hpp"

namespace relsim {

/// num/den rendered with `digits` fractional digits, round-half-even.
inline std::string format_fraction(std::int64_t num, std::int64_t den, int digits = 4) {
    if (den <= 0) throw std::invalid_argument("format_fraction: denominator must be positive");
    const bool neg = num < 0;
    unsigned __int128 n = neg ? static_cast<unsigned __int128>(-(num + 1)) + 1
                              : static_cast<unsigned __int128>(num);
    unsigned __int128 d = static_cast<unsigned __int128>(den);
    unsigned __int128 pow10 = 1;
    for (int i = 0; i < digits; ++i) pow10 *= 10;
    unsigned __int128 scaled = n * pow10;
    unsigned __int128 q = scaled / d;
    unsigned __int128 r = scaled % d;
    if (2 * r > d || (2 * r == d && (q % 2) == 1)) ++q;

    const std::uint64_t ip = static_cast<std::uint64_t>(q / pow10);
    std::uint64_t fp = static_cast<std::uint64_t>(q % pow10);
    std::string frac(static_cast<size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
        frac[static_cast<size_t>(i)] = static_cast<char>('0' + fp % 10);
        fp /= 10;
    }
    std::string out = (neg && q != 0 ? "-" : "") + std::to_string(ip);
    if (digits > 0) out += "." + frac;
    return out;
}

inline std::string join_cpus(const std::vector<int>& cpus) {
    std::string s;
    for (size_t i = 0; i < cpus.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(cpus[i]);
    }
    return s;
}

inline std::string cpu_csv(const MetricsReport& rep) {
    std::ostringstream os;
    os << "cpu_id,busy_cycles,idle_cycles,load,cache_accesses,cache_hits\n";
    for (const auto& c : rep.cpus)
        os << c.cpu_id << ',' << c.busy_cycles << ',' << c.idle_cycles << ','
           << format_fraction(c.busy_cycles, rep.horizon_cycles) << ',' << c.cache_accesses << ','
           << c.cache_hits << '\n';
    return os.str();
}

inline std::string alloc_csv(const MetricsReport& rep) {
    std::ostringstream os;
    os << "time_ns,app_id,requested_min,requested_max,granted,cpu_list\n";
    for (const auto& a : rep.allocations)
        os << a.time << ',' << a.app_id << ',' << a.requested_min << ',' << a.requested_max << ','
           << a.granted << ',' << join_cpus(a.cpus) << '\n';
    return os.str();
}

inline std::string events_csv(const MetricsReport& rep) {
    std::ostringstream os;
    os << "time_ns,context_id,app_id,fen_id,status,cpu_list\n";
    for (const auto& c : rep.contexts) {
        os << c.start << ',' << c.context_id << ',' << c.app_id << ',' << c.fen_id
           << ",execution_started," << join_cpus(c.cpus) << '\n';
        if (c.end)
            os << *c.end << ',' << c.context_id << ',' << c.app_id << ',' << c.fen_id
               << ",execution_finished," << join_cpus(c.cpus) << '\n';
    }
    return os.str();
}

/// Cell-exact average over the per-run reports: each cell is the mean of the
/// per-run values, emitted as Σ/(runs·unit) with the shared formatter.
inline std::string avg_cpu_csv(const std::vector<MetricsReport>& runs) {
    if (runs.empty()) return "cpu_id,busy_cycles,idle_cycles,load,cache_accesses,cache_hits\n";
    const auto n = static_cast<std::int64_t>(runs.size());
    std::ostringstream os;
    os << "cpu_id,busy_cycles,idle_cycles,load,cache_accesses,cache_hits\n";
    for (size_t cpu = 0; cpu < runs.front().cpus.size(); ++cpu) {
        std::int64_t busy = 0, idle = 0, acc = 0, hit = 0;
        for (const auto& r : runs) {
            busy += r.cpus[cpu].busy_cycles;
            idle += r.cpus[cpu].idle_cycles;
            acc += r.cpus[cpu].cache_accesses;
            hit += r.cpus[cpu].cache_hits;
        }
        os << cpu << ',' << format_fraction(busy, n) << ',' << format_fraction(idle, n) << ','
           << format_fraction(busy, runs.front().horizon_cycles * n) << ','
           << format_fraction(acc, n) << ',' << format_fraction(hit, n) << '\n';
    }
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

} // namespace relsim
