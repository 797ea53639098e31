#pragma once

// Deterministic discrete-event kernel tying everything together: periodic
// iteration triggers, AIR executors, the resource manager with its policy,
// the execution controller, and the CPU/cache/bus platform models.
//
// Strictly single-threaded; all time arithmetic is integral (nanoseconds and
// cycles), so identical config + seed yields identical reports everywhere.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "relsim/app.hpp"
#include "relsim/bus.hpp"
#include "relsim/cache.hpp"
#include "relsim/fel_interface.hpp"
#include "relsim/metrics.hpp"
#include "relsim/policy.hpp"
#include "relsim/rm.hpp"
#include "relsim/time.hpp"
#include "relsim/trace.hpp"

namespace relsim {

struct EventInPast : std::logic_error {
    using std::logic_error::logic_error;
};
struct ProtocolViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct PlatformConfig {
    int num_cpus = 6;
    std::int64_t freq_hz = 100'000'000;
    std::int64_t cache_size_bits = 32 * 1024 * 8;
    std::int64_t cache_line_bits = 1024;
    HitRate cache_hit_rate{3, 4};
    std::int64_t bus_transfer_cycles = 20;
};

struct KernelConfig {
    PlatformConfig platform;
    Policy policy = Policy::FirstFit;
    int claim_cap = 5; // default num_cpus - 1
    SimTime load_window_ns = 100'000'000;
    std::uint64_t seed = 0;
};

class Simulation {
public:
    explicit Simulation(const KernelConfig& cfg)
        : cfg_(cfg), clock_(cfg.platform.freq_hz),
          rm_(cfg.platform.num_cpus, cfg.claim_cap),
          bus_(cfg.platform.num_cpus, cfg.platform.bus_transfer_cycles, clock_),
          collector_(cfg.load_window_ns), rng_(cfg.seed) {
        for (int i = 0; i < cfg.platform.num_cpus; ++i) {
            caches_.emplace_back(cfg.platform.cache_size_bits, cfg.platform.cache_line_bits,
                                 cfg.platform.cache_hit_rate);
            cpus_.emplace_back();
            spans_.emplace_back();
        }
    }

    /// Registers a workload; its first iteration trigger is scheduled at
    /// first_request (+ seeded jitter).
    void register_app(AppSpec spec) {
        const int idx = static_cast<int>(apps_.size());
        spec.demand.app_id = spec.app_id;
        apps_.push_back(std::move(spec));
        executors_.push_back(Executor{});
        executors_.back().nominal_next = apps_.back().first_request;
        schedule(apps_.back().first_request + draw_jitter(apps_.back()), EventKind::IterationTrigger,
                 idx);
    }

    const AppSpec& app(int idx) const { return apps_.at(static_cast<size_t>(idx)); }
    const ResourceManager& resource_manager() const { return rm_; }
    const SharedBus& bus() const { return bus_; }
    SimTime now() const { return now_; }

    /// Drains all events with time <= t_end in (time, seq) order and
    /// finalizes the report over [0, t_end].
    MetricsReport run_until(SimTime t_end) {
        while (!queue_.empty() && queue_.top().time <= t_end) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.time < now_) throw EventInPast("event scheduled before current time");
            now_ = ev.time;
            handle(ev);
        }
        return finalize(t_end);
    }

    /// Direct dispatch used by unit tests: runs `trace` on `cpu` from the
    /// current time, bypassing AIR executors. Returns the context id.
    std::int64_t dispatch_raw(int cpu, const Trace& trace, const std::string& tag) {
        return start_context(tag, "raw", {cpu}, {trace}, -1, true);
    }

    /// Multi-CPU variant; the context completes when all traces finish.
    std::int64_t dispatch_raw(const std::vector<int>& cpus, const std::vector<Trace>& traces,
                              const std::string& tag) {
        return start_context(tag, "raw", cpus, traces, -1, true);
    }

    ResourceSnapshot snapshot() const {
        return collector_.send_resource(now_, rm_, current_spans());
    }

private:
    // -- events -----------------------------------------------------------

    enum class EventKind { IterationTrigger, AllocSweep, BusRequest, BusDone, CpuDone, FenComplete };

    struct Event {
        SimTime time;
        std::int64_t seq;
        EventKind kind;
        int a = 0;          // app or cpu index
        std::int64_t b = 0; // context id
        bool operator>(const Event& o) const {
            if (time != o.time) return time > o.time;
            return seq > o.seq;
        }
    };

    void schedule(SimTime t, EventKind kind, int a = 0, std::int64_t b = 0) {
        if (t < now_) throw EventInPast("scheduling event in the past");
        queue_.push(Event{t, next_seq_++, kind, a, b});
    }

    void handle(const Event& ev) {
        switch (ev.kind) {
        case EventKind::IterationTrigger: on_trigger(ev.a); break;
        case EventKind::AllocSweep: on_alloc_sweep(); break;
        case EventKind::BusRequest: on_bus_request(ev.a); break;
        case EventKind::BusDone: on_bus_done(); break;
        case EventKind::CpuDone: on_cpu_done(ev.a); break;
        case EventKind::FenComplete: on_fen_complete(ev.a, ev.b); break;
        }
    }

    // -- periodic harness + executor --------------------------------------

    struct Executor {
        bool idle = true;
        std::string current_node;
        std::optional<Claim> claim;
        std::int64_t iteration = 0;
        std::int64_t skipped = 0;
        SimTime request_time = 0;
        SimTime nominal_next = 0;
        std::int64_t pending_context = -1;
        int last_grant = 0;
    };

    SimTime draw_jitter(const AppSpec& spec) {
        if (spec.jitter_bound <= 0) return 0;
        // Quantized to whole cycles so busy spans stay cycle-aligned.
        const std::int64_t cycles = clock_.ns_to_cycles(spec.jitter_bound);
        std::uniform_int_distribution<std::int64_t> dist(0, cycles);
        return clock_.cycles_to_ns(dist(rng_));
    }

    void on_trigger(int app_idx) {
        AppSpec& spec = apps_[static_cast<size_t>(app_idx)];
        Executor& ex = executors_[static_cast<size_t>(app_idx)];
        ex.nominal_next += spec.period;
        schedule(ex.nominal_next + draw_jitter(spec), EventKind::IterationTrigger, app_idx);

        if (!ex.idle) { // previous iteration still live: run-to-completion, skip
            ++ex.skipped;
            return;
        }
        ex.idle = false;
        ex.request_time = now_;
        ex.current_node = spec.air.entry_node;
        executor_continue(app_idx);
    }

    void executor_continue(int app_idx) {
        AppSpec& spec = apps_[static_cast<size_t>(app_idx)];
        Executor& ex = executors_[static_cast<size_t>(app_idx)];
        while (true) {
            const air::AirNode& node = spec.air.node(ex.current_node);
            switch (node.kind) {
            case air::AirNode::Kind::GetResource: {
                Demand d = node.demand;
                d.app_id = spec.app_id;
                pending_.push_back({app_idx, d});
                if (!sweep_scheduled_) {
                    sweep_scheduled_ = true;
                    schedule(now_, EventKind::AllocSweep);
                }
                return; // parked until the claim arrives
            }
            case air::AirNode::Kind::Fen: {
                if (!ex.claim || ex.claim->empty())
                    throw ProtocolViolation("fen node reached without a live claim: " +
                                            node.node_id);
                const auto& traces = spec.traces.lookup(node.trace_ref, ex.claim->size());
                if (static_cast<int>(traces.size()) != ex.claim->size())
                    throw ProtocolViolation("trace count does not match claim size for " +
                                            node.trace_ref);
                ex.pending_context =
                    start_context(spec.app_id, node.node_id, ex.claim->resources, traces, app_idx,
                                  false);
                return; // parked until FenComplete
            }
            case air::AirNode::Kind::ReleaseResource: {
                if (ex.claim && !ex.claim->empty())
                    rm_.release_resource(*ex.claim, [&](int cpu) {
                        return cpus_[static_cast<size_t>(cpu)].busy;
                    });
                ex.claim.reset();
                if (spec.air.out_edges(ex.current_node).empty()) {
                    finish_iteration(app_idx);
                    return;
                }
                ex.current_node = air::select_edge(spec.air, ex.current_node, 0);
                break;
            }
            }
        }
    }

    void finish_iteration(int app_idx) {
        Executor& ex = executors_[static_cast<size_t>(app_idx)];
        IterationRecord rec;
        rec.app_id = apps_[static_cast<size_t>(app_idx)].app_id;
        rec.iteration = ex.iteration;
        rec.requested = ex.request_time;
        rec.completed = now_;
        rec.granted = ex.last_grant;
        iterations_.push_back(std::move(rec));
        ++ex.iteration;
        ex.idle = true;
    }

    // -- allocation sweep (simultaneous requests batched per timestamp) ----

    struct PendingRequest {
        int app_idx;
        Demand demand;
    };

    void on_alloc_sweep() {
        sweep_scheduled_ = false;
        std::vector<PendingRequest> batch;
        batch.swap(pending_);
        if (batch.empty()) return;

        // Candidate availability from one common pre-batch snapshot feeds
        // the policy; reservations then run sequentially against live state.
        const ResourceSnapshot pre = snapshot();
        std::vector<Demand> demands;
        std::vector<int> limits;
        for (const auto& req : batch) {
            demands.push_back(req.demand);
            limits.push_back(static_cast<int>(rm_.get_resource(req.demand, pre).size()));
        }
        const auto grants =
            allocate_batch(cfg_.policy, demands, scalability_curves(), load_curves(),
                           rm_.free_count(), cfg_.claim_cap, limits);

        for (const auto& req : batch) {
            const ResourceSnapshot live = snapshot();
            const CandidateSet cands = rm_.get_resource(req.demand, live);
            const int grant =
                std::min(grants.at(req.demand.app_id), static_cast<int>(cands.size()));
            Executor& ex = executors_[static_cast<size_t>(req.app_idx)];
            Claim claim = rm_.reserve_resource(cands, req.demand, grant, now_);
            claim.iteration = ex.iteration;

            AllocationRecord rec;
            rec.time = now_;
            rec.app_id = req.demand.app_id;
            rec.requested_min = req.demand.min_cpus;
            rec.requested_max = req.demand.max_cpus;
            rec.granted = claim.size();
            rec.cpus = claim.resources;
            rec.batch_size = static_cast<int>(batch.size());
            allocations_.push_back(std::move(rec));

            ex.claim = claim;
            ex.last_grant = claim.size();
            ex.current_node = air::select_edge(apps_[static_cast<size_t>(req.app_idx)].air,
                                               ex.current_node, claim.size());
            executor_continue(req.app_idx);
        }
    }

    std::map<std::string, ScalabilityCurve> scalability_curves() const {
        std::map<std::string, ScalabilityCurve> m;
        for (const auto& a : apps_) m[a.app_id] = a.scalability;
        return m;
    }
    std::map<std::string, StandaloneLoadCurve> load_curves() const {
        std::map<std::string, StandaloneLoadCurve> m;
        for (const auto& a : apps_) m[a.app_id] = a.standalone_load;
        return m;
    }

    // -- CPU trace execution ----------------------------------------------

    struct CpuRuntime {
        bool busy = false;
        std::int64_t context_id = -1;
        const Trace* trace = nullptr;
        size_t seg_idx = 0;
        bool compute_charged = false;
        std::int64_t accesses_done = 0;
        SimTime dispatch_start = 0;
    };

    std::int64_t start_context(const std::string& app_id, const std::string& fen_id,
                               const std::vector<int>& cpu_ids,
                               const std::vector<Trace>& traces, int app_idx, bool raw) {
        const std::int64_t ctx_id = controller_.dispatch(
            fen_id, app_id, cpu_ids, now_,
            [&](int cpu) {
                if (raw) return true;
                const auto& r = rm_.reserved_by(cpu);
                return r && *r == app_id;
            },
            [&](int cpu) { return !cpus_[static_cast<size_t>(cpu)].busy; });
        context_owner_[ctx_id] = app_idx;
        // Keep a stable copy per context; CpuRuntime points into it.
        const std::vector<Trace>& stored = context_traces_.emplace(ctx_id, traces).first->second;
        for (size_t i = 0; i < cpu_ids.size(); ++i) {
            const int cpu = cpu_ids[i];
            const Trace& trace = stored[i];
            if (trace.empty()) throw std::invalid_argument("empty trace dispatched");
            CpuRuntime& rt = cpus_[static_cast<size_t>(cpu)];
            if (rt.busy) throw CpuBusy("dispatch onto busy cpu " + std::to_string(cpu));
            rt.busy = true;
            rt.context_id = ctx_id;
            rt.trace = &trace;
            rt.seg_idx = 0;
            rt.compute_charged = false;
            rt.accesses_done = 0;
            rt.dispatch_start = now_;
            continue_cpu(cpu);
        }
        return ctx_id;
    }

    /// Advances a CPU through its trace from the current time: compute and
    /// cache hits are batched into one delay, the next miss turns into a bus
    /// request. Stall time waiting for the bus counts as busy.
    void continue_cpu(int cpu) {
        CpuRuntime& rt = cpus_[static_cast<size_t>(cpu)];
        CacheModel& cache = caches_[static_cast<size_t>(cpu)];
        std::int64_t cycles = 0;
        while (rt.seg_idx < rt.trace->size()) {
            const TraceSegment& seg = (*rt.trace)[rt.seg_idx];
            if (!rt.compute_charged) {
                cycles += seg.compute_cycles;
                rt.compute_charged = true;
            }
            const std::int64_t total_acc = seg.mem_reads + seg.mem_writes;
            while (rt.accesses_done < total_acc) {
                ++rt.accesses_done;
                cycles += 1; // cache access latency, hit or miss
                if (cache.access() == CacheModel::Result::Miss) {
                    schedule(now_ + clock_.cycles_to_ns(cycles), EventKind::BusRequest, cpu);
                    return;
                }
            }
            ++rt.seg_idx;
            rt.compute_charged = false;
            rt.accesses_done = 0;
        }
        schedule(now_ + clock_.cycles_to_ns(cycles), EventKind::CpuDone, cpu);
    }

    void on_bus_request(int cpu) {
        bus_.request(cpu, now_);
        if (auto t = bus_.try_grant(now_)) schedule(t->done_time, EventKind::BusDone);
    }

    void on_bus_done() {
        const BusTransfer t = bus_.complete();
        continue_cpu(t.cpu_id); // line fill delivered; resume after the miss
        if (auto next = bus_.try_grant(now_)) schedule(next->done_time, EventKind::BusDone);
    }

    void on_cpu_done(int cpu) {
        CpuRuntime& rt = cpus_[static_cast<size_t>(cpu)];
        if (!rt.busy) throw ProtocolViolation("completion on idle cpu");
        spans_[static_cast<size_t>(cpu)].push_back(
            CpuInterval{cpu, rt.dispatch_start, now_, rt.context_id});
        const std::int64_t ctx_id = rt.context_id;
        rt.busy = false;
        rt.trace = nullptr;
        rt.context_id = -1;
        if (controller_.cpu_complete(ctx_id)) {
            controller_.notify_finished(ctx_id, now_);
            const int app_idx = context_owner_.at(ctx_id);
            if (app_idx >= 0) // same timestamp, later sequence number
                schedule(now_, EventKind::FenComplete, app_idx, ctx_id);
        }
    }

    void on_fen_complete(int app_idx, std::int64_t ctx_id) {
        AppSpec& spec = apps_[static_cast<size_t>(app_idx)];
        Executor& ex = executors_[static_cast<size_t>(app_idx)];
        if (ex.pending_context != ctx_id ||
            spec.air.node(ex.current_node).kind != air::AirNode::Kind::Fen)
            throw ProtocolViolation("FenComplete does not match executor state of " + spec.app_id);
        ex.pending_context = -1;
        const int size = ex.claim ? ex.claim->size() : 0;
        ex.current_node = air::select_edge(spec.air, ex.current_node, size);
        executor_continue(app_idx);
    }

    // -- finalization ------------------------------------------------------

    std::vector<std::vector<BusySpan>> current_spans() const {
        std::vector<std::vector<BusySpan>> out(spans_.size());
        for (size_t cpu = 0; cpu < spans_.size(); ++cpu) {
            for (const auto& iv : spans_[cpu]) out[cpu].push_back({iv.start, iv.end});
            if (cpus_[cpu].busy) out[cpu].push_back({cpus_[cpu].dispatch_start, now_});
        }
        return out;
    }

    MetricsReport finalize(SimTime t_end) {
        MetricsReport rep;
        rep.horizon_ns = t_end;
        rep.freq_hz = clock_.freq_hz();
        rep.horizon_cycles = clock_.ns_to_cycles(t_end);
        for (int cpu = 0; cpu < cfg_.platform.num_cpus; ++cpu) {
            CpuMetrics cm;
            cm.cpu_id = cpu;
            SimTime busy_ns = 0;
            for (const auto& iv : spans_[static_cast<size_t>(cpu)]) {
                const SimTime hi = std::min(iv.end, t_end);
                const SimTime lo = std::min(iv.start, t_end);
                busy_ns += hi - lo;
                rep.busy_intervals.push_back(CpuInterval{cpu, lo, hi, iv.context_id});
            }
            const CpuRuntime& rt = cpus_[static_cast<size_t>(cpu)];
            if (rt.busy && rt.dispatch_start < t_end) {
                busy_ns += t_end - rt.dispatch_start;
                rep.busy_intervals.push_back(
                    CpuInterval{cpu, rt.dispatch_start, t_end, rt.context_id});
            }
            cm.busy_cycles = clock_.ns_to_cycles(busy_ns);
            cm.idle_cycles = rep.horizon_cycles - cm.busy_cycles;
            cm.cache_accesses = caches_[static_cast<size_t>(cpu)].access_count();
            cm.cache_hits = caches_[static_cast<size_t>(cpu)].hit_count();
            rep.cpus.push_back(cm);
        }
        rep.bus_grants = bus_.granted_count();
        rep.bus_busy_cycles = clock_.ns_to_cycles(bus_.busy_ns_until(t_end));
        rep.allocations = allocations_;
        for (const auto& [id, ctx] : controller_.contexts()) {
            ContextRecord cr;
            cr.context_id = id;
            cr.app_id = ctx.air_id;
            cr.fen_id = ctx.fen_id;
            cr.cpus = ctx.cpu_ids;
            cr.start = ctx.start;
            cr.end = ctx.end;
            rep.contexts.push_back(std::move(cr));
        }
        rep.iterations = iterations_;
        for (size_t i = 0; i < apps_.size(); ++i)
            rep.skipped_iterations[apps_[i].app_id] = executors_[i].skipped;
        rep.denied_requests = rm_.denied_count();
        rep.invariant_violations = rm_.violation_count();
        rep.violation_log = rm_.violations();
        return rep;
    }

    KernelConfig cfg_;
    Clock clock_;
    ResourceManager rm_;
    SharedBus bus_;
    StatusCollector collector_;
    ExecutionController controller_;
    std::mt19937_64 rng_;

    std::vector<AppSpec> apps_;
    std::vector<Executor> executors_;
    std::vector<CacheModel> caches_;
    std::vector<CpuRuntime> cpus_;
    std::vector<std::vector<CpuInterval>> spans_;
    std::map<std::int64_t, std::vector<Trace>> context_traces_;
    std::map<std::int64_t, int> context_owner_;

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    SimTime now_ = 0;
    std::int64_t next_seq_ = 0;
    std::vector<PendingRequest> pending_;
    bool sweep_scheduled_ = false;
    std::vector<AllocationRecord> allocations_;
    std::vector<IterationRecord> iterations_;
};

} // namespace relsim
