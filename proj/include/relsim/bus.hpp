#pragma once

// Shared bus with round-robin arbitration, one line transfer in flight at a
// time, fixed latency per transfer. Requests are never reordered within a
// CPU's queue.

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "relsim/time.hpp"

namespace relsim {

struct BusTransfer {
    int cpu_id;
    SimTime request_time;
    SimTime grant_time;
    SimTime done_time;
};

class SharedBus {
public:
    SharedBus() = default;
    SharedBus(int num_cpus, std::int64_t transfer_cycles, const Clock& clock)
        : pending_(static_cast<size_t>(num_cpus)),
          transfer_cycles_(transfer_cycles),
          transfer_ns_(clock.cycles_to_ns(transfer_cycles)) {}

    bool idle() const { return !in_flight_.has_value(); }
    SimTime busy_until() const { return busy_until_; }
    std::int64_t transfer_cycles() const { return transfer_cycles_; }
    SimTime transfer_ns() const { return transfer_ns_; }
    std::int64_t granted_count() const { return granted_count_; }
    const std::vector<BusTransfer>& log() const { return log_; }

    void request(int cpu_id, SimTime now) {
        pending_.at(static_cast<size_t>(cpu_id)).push_back(now);
    }

    /// Starts the next transfer if the bus is idle and a request is pending.
    /// Returns the granted CPU and the completion time.
    std::optional<BusTransfer> try_grant(SimTime now) {
        if (in_flight_) return std::nullopt;
        const int n = static_cast<int>(pending_.size());
        for (int i = 0; i < n; ++i) {
            const int cpu = (grant_pointer_ + i) % n;
            auto& q = pending_[static_cast<size_t>(cpu)];
            if (q.empty()) continue;
            BusTransfer t{cpu, q.front(), now, now + transfer_ns_};
            q.pop_front();
            in_flight_ = t;
            busy_until_ = t.done_time;
            ++granted_count_;
            log_.push_back(t);
            return t;
        }
        return std::nullopt;
    }

    /// Completes the in-flight transfer and advances the round-robin pointer
    /// past the granted CPU.
    BusTransfer complete() {
        if (!in_flight_) throw std::logic_error("bus completion with no transfer in flight");
        BusTransfer t = *in_flight_;
        in_flight_.reset();
        grant_pointer_ = (t.cpu_id + 1) % static_cast<int>(pending_.size());
        return t;
    }

    /// Bus busy nanoseconds within [0, t_end], from the transfer log.
    SimTime busy_ns_until(SimTime t_end) const {
        SimTime busy = 0;
        for (const auto& t : log_) {
            const SimTime lo = std::min(t.grant_time, t_end);
            const SimTime hi = std::min(t.done_time, t_end);
            busy += hi - lo;
        }
        return busy;
    }

private:
    std::vector<std::deque<SimTime>> pending_;
    std::int64_t transfer_cycles_ = 20;
    SimTime transfer_ns_ = 200;
    int grant_pointer_ = 0;
    std::optional<BusTransfer> in_flight_;
    SimTime busy_until_ = 0;
    std::int64_t granted_count_ = 0;
    std::vector<BusTransfer> log_;
};

} // namespace relsim
