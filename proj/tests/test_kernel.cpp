#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "relsim/kernel.hpp"

using namespace relsim;

namespace {

KernelConfig default_config() {
    KernelConfig kc;
    kc.platform.num_cpus = 6;
    kc.platform.freq_hz = 100'000'000;
    kc.platform.cache_hit_rate = HitRate(3, 4);
    kc.platform.bus_transfer_cycles = 20;
    return kc;
}

} // namespace

TEST_CASE("empty kernel reports zero everywhere") {
    Simulation sim(default_config());
    auto rep = sim.run_until(3'500'000'000);
    REQUIRE(rep.cpus.size() == 6);
    CHECK(rep.horizon_cycles == 350'000'000);
    for (const auto& c : rep.cpus) {
        CHECK(c.busy_cycles == 0);
        CHECK(c.idle_cycles == rep.horizon_cycles);
        CHECK(c.cache_accesses == 0);
    }
    CHECK(rep.bus_grants == 0);
    CHECK(rep.average_cpu_load() == 0.0);
}

TEST_CASE("single 50-cycle segment over a 100-cycle horizon is load 0.50") {
    Simulation sim(default_config());
    sim.dispatch_raw(0, {TraceSegment{50, 0, 0}}, "t");
    auto rep = sim.run_until(1000);
    CHECK(rep.cpus[0].busy_cycles == 50);
    CHECK(rep.cpus[0].idle_cycles == 50);
    CHECK(rep.cpu_load(0) == 0.50);
}

TEST_CASE("pure compute trace completes after its cycle count") {
    Simulation sim(default_config());
    sim.dispatch_raw(2, {TraceSegment{100, 0, 0}}, "t");
    auto rep = sim.run_until(10'000);
    REQUIRE(rep.contexts.size() == 1);
    REQUIRE(rep.contexts[0].end.has_value());
    CHECK(*rep.contexts[0].end == 1000);
}

TEST_CASE("four reads at 3/4 hit rate cost 24 cycles with an idle bus") {
    // Hand-simulated oracle for the access pattern H,H,H,M:
    //   3 hits at 1 cycle + miss (1 cycle + 20-cycle transfer) = 24 cycles.
    std::int64_t expect_cycles = 0;
    int phase = 0;
    for (int acc = 0; acc < 4; ++acc) {
        expect_cycles += 1;
        if (phase >= 3) expect_cycles += 20; // miss: line transfer on idle bus
        phase = (phase + 1) % 4;
    }
    REQUIRE(expect_cycles == 24);

    Simulation sim(default_config());
    sim.dispatch_raw(0, {TraceSegment{0, 4, 0}}, "t");
    auto rep = sim.run_until(10'000);
    REQUIRE(rep.contexts[0].end.has_value());
    CHECK(*rep.contexts[0].end == 240);
    CHECK(rep.cpus[0].busy_cycles == 24);
    CHECK(rep.cpus[0].cache_accesses == 4);
    CHECK(rep.cpus[0].cache_hits == 3);
    CHECK(rep.bus_grants == 1);
}

TEST_CASE("two simultaneous misses serialize on the bus") {
    auto kc = default_config();
    kc.platform.cache_hit_rate = HitRate(0, 1); // every access misses
    Simulation sim(kc);
    sim.dispatch_raw(0, {TraceSegment{0, 1, 0}}, "a");
    sim.dispatch_raw(1, {TraceSegment{0, 1, 0}}, "b");
    auto rep = sim.run_until(10'000);
    REQUIRE(rep.contexts.size() == 2);
    const SimTime end0 = *rep.contexts[0].end;
    const SimTime end1 = *rep.contexts[1].end;
    // both request at 10 ns; round robin grants cpu 0 first, cpu 1 waits
    CHECK(end0 == 210);
    CHECK(end1 - end0 == 200); // exactly transfer_cycles apart
    // stall time waiting for the bus counts as busy
    CHECK(rep.cpus[1].busy_cycles == 41);
}

TEST_CASE("bus transfers are disjoint and follow a reference arbiter") {
    auto kc = default_config();
    kc.platform.cache_hit_rate = HitRate(1, 2);
    Simulation sim(kc);
    for (int cpu = 0; cpu < 4; ++cpu)
        sim.dispatch_raw(cpu, {TraceSegment{cpu * 7, 10, 3}}, "t" + std::to_string(cpu));
    auto rep = sim.run_until(100'000);
    const auto& log = sim.bus().log();
    REQUIRE(!log.empty());
    for (size_t i = 1; i < log.size(); ++i) CHECK(log[i].grant_time >= log[i - 1].done_time);

    // reference arbiter: replay the request stream through a fresh bus model
    Clock clock(kc.platform.freq_hz);
    SharedBus ref(kc.platform.num_cpus, kc.platform.bus_transfer_cycles, clock);
    std::vector<BusTransfer> requests = log;
    std::sort(requests.begin(), requests.end(), [](const BusTransfer& a, const BusTransfer& b) {
        if (a.request_time != b.request_time) return a.request_time < b.request_time;
        return a.cpu_id < b.cpu_id;
    });
    // replay: feed requests in time order, completing transfers in between
    size_t next = 0;
    std::vector<BusTransfer> replayed;
    SimTime now = 0;
    while (replayed.size() < log.size()) {
        while (next < requests.size() && requests[next].request_time <= now) {
            ref.request(requests[next].cpu_id, requests[next].request_time);
            ++next;
        }
        if (auto g = ref.try_grant(std::max(now, SimTime{0}))) {
            replayed.push_back(*g);
            now = g->done_time;
            ref.complete();
        } else if (next < requests.size()) {
            now = requests[next].request_time;
        } else {
            break;
        }
    }
    REQUIRE(replayed.size() == log.size());
    for (size_t i = 0; i < log.size(); ++i) CHECK(replayed[i].cpu_id == log[i].cpu_id);
}

TEST_CASE("cycle conservation holds exactly for arbitrary traffic") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto kc = default_config();
        kc.platform.cache_hit_rate = HitRate(1 + rng() % 3, 4);
        Simulation sim(kc);
        for (int cpu = 0; cpu < 6; ++cpu) {
            if (rng() % 3 == 0) continue;
            Trace t;
            const int segs = 1 + static_cast<int>(rng() % 4);
            for (int s = 0; s < segs; ++s)
                t.push_back(TraceSegment{static_cast<std::int64_t>(rng() % 500),
                                         static_cast<std::int64_t>(rng() % 20),
                                         static_cast<std::int64_t>(rng() % 8)});
            sim.dispatch_raw(cpu, t, "t" + std::to_string(cpu));
        }
        // horizon deliberately short enough to cut some executions mid-flight
        const SimTime t_end = 1000 + static_cast<SimTime>(rng() % 20'000) / 10 * 10;
        auto rep = sim.run_until(t_end);
        for (const auto& c : rep.cpus)
            CHECK(c.busy_cycles + c.idle_cycles == rep.horizon_cycles);
    }
}

TEST_CASE("cache ratio invariant at simulation end") {
    auto kc = default_config();
    kc.platform.cache_hit_rate = HitRate(3, 4);
    Simulation sim(kc);
    sim.dispatch_raw(0, {TraceSegment{0, 1237, 411}}, "t");
    auto rep = sim.run_until(4'000'000);
    const auto& c = rep.cpus[0];
    CHECK(c.cache_accesses == 1237 + 411);
    const double expected_hits = 0.75 * static_cast<double>(c.cache_accesses);
    CHECK(std::abs(static_cast<double>(c.cache_hits) - expected_hits) < 4.0);
}

TEST_CASE("dispatch onto a busy cpu is fatal") {
    Simulation sim(default_config());
    sim.dispatch_raw(0, {TraceSegment{1000, 0, 0}}, "a");
    CHECK_THROWS_AS(sim.dispatch_raw(0, {TraceSegment{10, 0, 0}}, "b"), CpuBusy);
}

TEST_CASE("empty trace is rejected") {
    Simulation sim(default_config());
    CHECK_THROWS_AS(sim.dispatch_raw(0, {}, "a"), std::invalid_argument);
}

TEST_CASE("unknown cpu in load query") {
    Simulation sim(default_config());
    auto rep = sim.run_until(1000);
    CHECK_THROWS_AS(rep.cpu_load(99), UnknownCpu);
}
