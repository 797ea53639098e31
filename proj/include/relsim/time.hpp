#pragma once

#include <cstdint>
#include <stdexcept>

namespace relsim {

/// Simulation time in integer nanoseconds since simulation start.
using SimTime = std::int64_t;

constexpr SimTime kNsPerSecond = 1'000'000'000;

/// Cycle<->time conversion for one clock domain. Requires the nanosecond
/// period to be integral (true for the default 100 MHz platform), so all
/// conversions are exact and the kernel stays free of floating point.
class Clock {
public:
    explicit Clock(std::int64_t freq_hz) : freq_hz_(freq_hz) {
        if (freq_hz <= 0 || kNsPerSecond % freq_hz != 0)
            throw std::invalid_argument("clock frequency must divide 1e9 Hz");
        ns_per_cycle_ = kNsPerSecond / freq_hz;
    }

    std::int64_t freq_hz() const { return freq_hz_; }
    std::int64_t ns_per_cycle() const { return ns_per_cycle_; }

    SimTime cycles_to_ns(std::int64_t cycles) const { return cycles * ns_per_cycle_; }
    std::int64_t ns_to_cycles(SimTime ns) const { return ns / ns_per_cycle_; }

private:
    std::int64_t freq_hz_;
    std::int64_t ns_per_cycle_;
};

} // namespace relsim
