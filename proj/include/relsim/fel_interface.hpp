#pragma once

// Bridge between the layers: the Execution Controller registers FEN
// execution contexts and their lifecycle, the Status Collector derives
// resource snapshots (reservation state plus trailing-window loads) for the
// resource manager.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relsim/rm.hpp"
#include "relsim/time.hpp"

namespace relsim {

struct CpuNotReserved : std::logic_error {
    using std::logic_error::logic_error;
};
struct CpuBusy : std::logic_error {
    using std::logic_error::logic_error;
};
struct UnknownContext : std::logic_error {
    using std::logic_error::logic_error;
};
struct AlreadyFinished : std::logic_error {
    using std::logic_error::logic_error;
};

struct FenContext {
    std::int64_t context_id = 0;
    std::string fen_id;
    std::string air_id;
    std::vector<int> cpu_ids;
    enum class Status { Started, Finished } status = Status::Started;
    SimTime start = 0;
    std::optional<SimTime> end;
    int remaining = 0; // CPUs still running; the context finishes when 0
};

/// Registers one unique context per dispatched FEN so concurrent nodes from
/// different applications stay distinguishable. The kernel drives the CPUs;
/// the controller only tracks lifecycle.
class ExecutionController {
public:
    /// `reserved_ok(cpu)` and `idle(cpu)` are supplied by the caller so the
    /// controller stays independent of the kernel's CPU representation.
    std::int64_t dispatch(const std::string& fen_id, const std::string& air_id,
                          const std::vector<int>& cpu_ids, SimTime now,
                          const std::function<bool(int)>& reserved_ok,
                          const std::function<bool(int)>& idle) {
        for (int cpu : cpu_ids) {
            if (!reserved_ok(cpu))
                throw CpuNotReserved("fen " + fen_id + " dispatched on unreserved cpu " +
                                     std::to_string(cpu));
            if (!idle(cpu))
                throw CpuBusy("fen " + fen_id + " dispatched on busy cpu " + std::to_string(cpu));
        }
        FenContext ctx;
        ctx.context_id = next_id_++;
        ctx.fen_id = fen_id;
        ctx.air_id = air_id;
        ctx.cpu_ids = cpu_ids;
        ctx.start = now;
        ctx.remaining = static_cast<int>(cpu_ids.size());
        contexts_.emplace(ctx.context_id, ctx);
        return ctx.context_id;
    }

    FenContext& get(std::int64_t context_id) {
        auto it = contexts_.find(context_id);
        if (it == contexts_.end())
            throw UnknownContext("unknown context " + std::to_string(context_id));
        return it->second;
    }

    /// One member CPU finished its trace; returns true when the whole
    /// barrier is done.
    bool cpu_complete(std::int64_t context_id) {
        FenContext& ctx = get(context_id);
        if (ctx.remaining <= 0) throw AlreadyFinished("cpu completion on finished context");
        return --ctx.remaining == 0;
    }

    /// Flips the context to execution_finished. Requires the barrier to be
    /// complete; a second notification is an error.
    void notify_finished(std::int64_t context_id, SimTime now) {
        FenContext& ctx = get(context_id);
        if (ctx.status == FenContext::Status::Finished)
            throw AlreadyFinished("context " + std::to_string(context_id) + " already finished");
        if (ctx.remaining != 0)
            throw std::logic_error("notify_finished before all traces completed");
        ctx.status = FenContext::Status::Finished;
        ctx.end = now;
    }

    const std::map<std::int64_t, FenContext>& contexts() const { return contexts_; }

private:
    std::int64_t next_id_ = 0;
    std::map<std::int64_t, FenContext> contexts_;
};

/// One busy span of a CPU; `end` is the completion time (open spans are
/// passed with end == query time).
struct BusySpan {
    SimTime start = 0;
    SimTime end = 0;
};

class StatusCollector {
public:
    explicit StatusCollector(SimTime load_window_ns = 100'000'000)
        : load_window_ns_(load_window_ns) {}

    SimTime load_window_ns() const { return load_window_ns_; }

    /// send_resource(): snapshot of reservation state and trailing-window
    /// loads at `now`. Pure read; two calls at the same instant agree.
    ResourceSnapshot send_resource(SimTime now, const ResourceManager& rm,
                                   const std::vector<std::vector<BusySpan>>& spans) const {
        ResourceSnapshot snap;
        snap.taken_at = now;
        for (int cpu = 0; cpu < rm.num_cpus(); ++cpu) {
            ResourceStatus st;
            st.cpu_id = cpu;
            st.reserved_by = rm.reserved_by(cpu);
            st.recent_load = window_load(now, spans[static_cast<size_t>(cpu)]);
            snap.entries.push_back(std::move(st));
        }
        return snap;
    }

    double window_load(SimTime now, const std::vector<BusySpan>& spans) const {
        const SimTime window = std::min(now, load_window_ns_);
        if (window <= 0) return 0.0;
        const SimTime lo = now - window;
        SimTime busy = 0;
        for (const auto& s : spans) {
            const SimTime a = std::max(s.start, lo);
            const SimTime b = std::min(s.end, now);
            if (b > a) busy += b - a;
        }
        return static_cast<double>(busy) / static_cast<double>(window);
    }

private:
    SimTime load_window_ns_;
};

} // namespace relsim
