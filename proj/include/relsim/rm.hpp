#pragma once

// Resource-aware execution layer state: demands, candidate sets, claims and
// the centralized resource manager with exclusive reservation semantics.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "relsim/air.hpp"
#include "relsim/time.hpp"

namespace relsim {

using Demand = air::Demand;

struct CandidateSet {
    std::vector<int> resources; // ascending cpu_id, no duplicates

    size_t size() const { return resources.size(); }
    bool contains(int cpu) const {
        return std::binary_search(resources.begin(), resources.end(), cpu);
    }
};

struct Claim {
    std::string app_id;
    std::vector<int> resources; // ascending; empty == denied
    SimTime granted_at = 0;
    std::int64_t iteration = 0;

    bool empty() const { return resources.empty(); }
    int size() const { return static_cast<int>(resources.size()); }
};

struct ResourceStatus {
    int cpu_id = 0;
    std::optional<std::string> reserved_by;
    double recent_load = 0.0; // trailing-window fraction
};

struct ResourceSnapshot {
    SimTime taken_at = 0;
    std::vector<ResourceStatus> entries; // one per platform CPU
};

/// Speedup vs CPU count, normalized so speedup(1) == 1. Index 0 holds n=1.
struct ScalabilityCurve {
    std::string app_id;
    std::vector<double> speedup;

    double at(int n) const {
        if (n <= 0) return 0.0;
        return speedup.at(static_cast<size_t>(n - 1));
    }
};

/// Average CPU utilization vs CPU count when the app runs alone.
struct StandaloneLoadCurve {
    std::string app_id;
    std::vector<double> load;

    double at(int n) const { return load.at(static_cast<size_t>(n - 1)); }
};

struct AlreadyReserved : std::logic_error {
    using std::logic_error::logic_error;
};
struct ClaimNotLive : std::logic_error {
    using std::logic_error::logic_error;
};
struct CpuStillBusy : std::logic_error {
    using std::logic_error::logic_error;
};

/// Centralized resource manager. Tracks exclusive per-CPU reservations and
/// runs an online invariant checker on every reserve/release; violations are
/// counted rather than thrown so a full run can be audited after the fact.
class ResourceManager {
public:
    ResourceManager() = default;
    ResourceManager(int num_cpus, int claim_cap)
        : num_cpus_(num_cpus), claim_cap_(claim_cap),
          reserved_by_(static_cast<size_t>(num_cpus)) {
        if (claim_cap < 1 || claim_cap >= num_cpus)
            throw std::invalid_argument("claim_cap must be in [1, num_cpus)");
    }

    int num_cpus() const { return num_cpus_; }
    int claim_cap() const { return claim_cap_; }

    int free_count() const {
        int n = 0;
        for (const auto& r : reserved_by_)
            if (!r) ++n;
        return n;
    }

    const std::optional<std::string>& reserved_by(int cpu) const {
        return reserved_by_.at(static_cast<size_t>(cpu));
    }

    bool has_live_claim(const std::string& app_id) const {
        return live_claims_.count(app_id) > 0;
    }

    const std::map<std::string, Claim>& live_claims() const { return live_claims_; }

    /// Candidate filter: every CPU that is unreserved and, when the demand carries a
    /// load threshold, whose recent load does not exceed it. Pure query;
    /// nothing is reserved.
    CandidateSet get_resource(const Demand& demand, const ResourceSnapshot& snapshot) const {
        CandidateSet out;
        for (const auto& st : snapshot.entries) {
            if (st.reserved_by) continue;
            if (demand.max_load && st.recent_load > *demand.max_load) continue;
            out.resources.push_back(st.cpu_id);
        }
        std::sort(out.resources.begin(), out.resources.end());
        return out;
    }

    /// Reserves the first grant_count candidates (ascending cpu_id)
    /// exclusively for the demanding app. A grant below min_cpus reserves
    /// nothing and yields an empty claim.
    Claim reserve_resource(const CandidateSet& candidates, const Demand& demand,
                           int grant_count, SimTime now) {
        Claim claim;
        claim.app_id = demand.app_id;
        claim.granted_at = now;
        if (grant_count > static_cast<int>(candidates.size()) || grant_count > claim_cap_)
            throw std::logic_error("reserve_resource: grant_count exceeds candidates or cap");
        if (grant_count < demand.min_cpus) {
            ++denied_count_;
            check_claim(claim, candidates, demand);
            return claim; // empty: demand unmet
        }
        for (int i = 0; i < grant_count; ++i) {
            const int cpu = candidates.resources[static_cast<size_t>(i)];
            auto& slot = reserved_by_[static_cast<size_t>(cpu)];
            if (slot) throw AlreadyReserved("cpu " + std::to_string(cpu) + " already reserved");
            slot = demand.app_id;
            claim.resources.push_back(cpu);
        }
        live_claims_[demand.app_id] = claim;
        check_claim(claim, candidates, demand);
        check_global();
        return claim;
    }

    /// Returns every CPU of the claim to its pre-reservation state. Empty
    /// claims release as a no-op. `busy` reports whether a CPU still runs a
    /// dispatched FEN, which would violate run-to-completion bookkeeping.
    template <typename BusyFn>
    void release_resource(const Claim& claim, BusyFn&& busy) {
        if (claim.empty()) return;
        auto it = live_claims_.find(claim.app_id);
        if (it == live_claims_.end()) throw ClaimNotLive("release of non-live claim: " + claim.app_id);
        for (int cpu : claim.resources) {
            if (busy(cpu)) throw CpuStillBusy("release while cpu " + std::to_string(cpu) + " busy");
            auto& slot = reserved_by_[static_cast<size_t>(cpu)];
            if (!slot || *slot != claim.app_id)
                throw ClaimNotLive("claim/reservation mismatch on cpu " + std::to_string(cpu));
            slot.reset();
        }
        live_claims_.erase(it);
        check_global();
    }

    void release_resource(const Claim& claim) {
        release_resource(claim, [](int) { return false; });
    }

    std::int64_t denied_count() const { return denied_count_; }
    std::int64_t violation_count() const { return violation_count_; }
    const std::vector<std::string>& violations() const { return violation_log_; }

private:
    void violation(const std::string& what) {
        ++violation_count_;
        if (violation_log_.size() < 100) violation_log_.push_back(what);
    }

    void check_claim(const Claim& claim, const CandidateSet& candidates, const Demand& demand) {
        for (int cpu : claim.resources)
            if (!candidates.contains(cpu))
                violation("claim cpu outside candidate set: " + claim.app_id);
        if (claim.size() > claim_cap_) violation("claim exceeds cap: " + claim.app_id);
        const int cap = std::min(demand.max_cpus, claim_cap_);
        if (!claim.empty() && (claim.size() < demand.min_cpus || claim.size() > cap))
            violation("claim size outside [min, min(max, cap)]: " + claim.app_id);
    }

    void check_global() {
        // Live claims pairwise disjoint and consistent with reserved_by.
        std::set<int> seen;
        for (const auto& [app, claim] : live_claims_) {
            for (int cpu : claim.resources) {
                if (!seen.insert(cpu).second) violation("overlapping live claims at cpu " + std::to_string(cpu));
                const auto& slot = reserved_by_[static_cast<size_t>(cpu)];
                if (!slot || *slot != app) violation("reserved_by inconsistent at cpu " + std::to_string(cpu));
            }
        }
        for (int cpu = 0; cpu < num_cpus_; ++cpu)
            if (reserved_by_[static_cast<size_t>(cpu)] && !seen.count(cpu))
                violation("reservation without live claim at cpu " + std::to_string(cpu));
    }

    int num_cpus_ = 0;
    int claim_cap_ = 1;
    std::vector<std::optional<std::string>> reserved_by_;
    std::map<std::string, Claim> live_claims_;
    std::int64_t denied_count_ = 0;
    std::int64_t violation_count_ = 0;
    std::vector<std::string> violation_log_;
};

} // namespace relsim
