#pragma once

// Allocation policies: how many CPUs each demanding app gets when one batch
// of simultaneous requests is decided.

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "relsim/rm.hpp"

namespace relsim {

enum class Policy { Scalability, Load, FirstFit };

struct MissingCurve : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Policy parse_policy(const std::string& s) {
    if (s == "scalability") return Policy::Scalability;
    if (s == "load") return Policy::Load;
    if (s == "firstfit") return Policy::FirstFit;
    throw std::invalid_argument("unknown policy \"" + s + "\"");
}

inline std::string policy_name(Policy p) {
    switch (p) {
    case Policy::Scalability: return "scalability";
    case Policy::Load: return "load";
    case Policy::FirstFit: return "firstfit";
    }
    return "?";
}

namespace policy_detail {

/// Per-app grant ceiling: demand, claim cap and (when the max_load filter
/// shrank the candidate set) candidate availability.
inline int grant_ceiling(const Demand& d, int cap, int candidate_limit) {
    return std::min({d.max_cpus, cap, candidate_limit});
}

} // namespace policy_detail

/// Grant vector maximizing the summed speedup over the batch, subject to
/// per-app ceilings and the free-CPU budget. speedup(0) := 0. When free CPUs
/// cover the batch, every app with min_cpus == 1 is guaranteed at least one
/// CPU (starvation guard). Ties break by smaller spread (max - min), then by
/// the lexicographically smallest vector in app_id order.
///
/// `demands` must be sorted however the caller wants grants reported; the
/// tie-break orders components by ascending app_id internally.
inline std::map<std::string, int> policy_scalability(
    const std::map<std::string, ScalabilityCurve>& curves,
    const std::vector<Demand>& demands, int free, int cap,
    const std::vector<int>& candidate_limits) {
    const int k = static_cast<int>(demands.size());
    // Work in app_id order so lexicographic tie-break is direct.
    std::vector<int> order(static_cast<size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return demands[static_cast<size_t>(a)].app_id < demands[static_cast<size_t>(b)].app_id;
    });

    std::vector<int> ceil_(static_cast<size_t>(k)), floor_(static_cast<size_t>(k));
    std::vector<const ScalabilityCurve*> curve(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        const Demand& d = demands[static_cast<size_t>(order[static_cast<size_t>(i)])];
        auto it = curves.find(d.app_id);
        if (it == curves.end()) throw MissingCurve("no scalability curve for app " + d.app_id);
        curve[static_cast<size_t>(i)] = &it->second;
        ceil_[static_cast<size_t>(i)] = policy_detail::grant_ceiling(
            d, cap, candidate_limits[static_cast<size_t>(order[static_cast<size_t>(i)])]);
        floor_[static_cast<size_t>(i)] =
            (free >= k && d.min_cpus == 1 && ceil_[static_cast<size_t>(i)] >= 1) ? 1 : 0;
    }

    std::vector<int> cur(static_cast<size_t>(k)), best;
    double best_obj = -1.0;
    int best_spread = 0;

    auto consider = [&]() {
        double obj = 0.0;
        for (int i = 0; i < k; ++i) obj += curve[static_cast<size_t>(i)]->at(cur[static_cast<size_t>(i)]);
        const auto [mn, mx] = std::minmax_element(cur.begin(), cur.end());
        const int spread = *mx - *mn;
        if (best.empty() || obj > best_obj ||
            (obj == best_obj && (spread < best_spread || (spread == best_spread && cur < best)))) {
            best = cur;
            best_obj = obj;
            best_spread = spread;
        }
    };
    auto rec = [&](auto&& self, int i, int budget) -> void {
        if (i == k) {
            consider();
            return;
        }
        const int hi = std::min(ceil_[static_cast<size_t>(i)], budget);
        for (int n = floor_[static_cast<size_t>(i)]; n <= hi; ++n) {
            cur[static_cast<size_t>(i)] = n;
            self(self, i + 1, budget - n);
        }
    };
    rec(rec, 0, free);

    std::map<std::string, int> grants;
    for (int i = 0; i < k; ++i)
        grants[demands[static_cast<size_t>(order[static_cast<size_t>(i)])].app_id] =
            best[static_cast<size_t>(i)];
    return grants;
}

/// Ranks apps by standalone load at their max requested CPU count,
/// descending (ties by app_id ascending); serves them in rank order, holding
/// back one CPU per app still to serve so everyone gets at least one while
/// free CPUs permit.
inline std::map<std::string, int> policy_load(
    const std::map<std::string, StandaloneLoadCurve>& loads,
    const std::vector<Demand>& demands, int free, int cap,
    const std::vector<int>& candidate_limits) {
    const int k = static_cast<int>(demands.size());
    std::vector<int> order(static_cast<size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    auto rank_load = [&](int i) {
        const Demand& d = demands[static_cast<size_t>(i)];
        return loads.at(d.app_id).at(std::min(
            d.max_cpus, static_cast<int>(loads.at(d.app_id).load.size())));
    };
    for (const auto& d : demands)
        if (!loads.count(d.app_id))
            throw MissingCurve("no standalone load curve for app " + d.app_id);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double la = rank_load(a), lb = rank_load(b);
        if (la != lb) return la > lb;
        return demands[static_cast<size_t>(a)].app_id < demands[static_cast<size_t>(b)].app_id;
    });

    std::map<std::string, int> grants;
    int remaining = free;
    for (int pos = 0; pos < k; ++pos) {
        const int i = order[static_cast<size_t>(pos)];
        const Demand& d = demands[static_cast<size_t>(i)];
        const int apps_left = k - pos - 1;
        const int held_back = std::max(remaining - apps_left, 0);
        int g = std::min(policy_detail::grant_ceiling(d, cap, candidate_limits[static_cast<size_t>(i)]),
                         std::max(held_back, remaining > 0 ? 1 : 0));
        g = std::min(g, remaining);
        grants[d.app_id] = g;
        remaining -= g;
    }
    return grants;
}

/// Baseline: in arrival order, each app takes min(max_cpus, cap, remaining).
inline std::map<std::string, int> policy_firstfit(const std::vector<Demand>& demands, int free,
                                                  int cap,
                                                  const std::vector<int>& candidate_limits) {
    std::map<std::string, int> grants;
    int remaining = free;
    for (size_t i = 0; i < demands.size(); ++i) {
        const int g =
            std::min(policy_detail::grant_ceiling(demands[i], cap, candidate_limits[i]), remaining);
        grants[demands[i].app_id] = g;
        remaining -= g;
    }
    return grants;
}

/// One policy decision over a batch of simultaneous demands. Grants sum to at
/// most the free-CPU count and respect per-app ceilings; requests at distinct
/// timestamps arrive as singleton batches (FCFS).
inline std::map<std::string, int> allocate_batch(
    Policy policy, const std::vector<Demand>& demands,
    const std::map<std::string, ScalabilityCurve>& scalability,
    const std::map<std::string, StandaloneLoadCurve>& loads, int free, int cap,
    const std::vector<int>& candidate_limits) {
    if (demands.empty()) return {};
    switch (policy) {
    case Policy::Scalability:
        return policy_scalability(scalability, demands, free, cap, candidate_limits);
    case Policy::Load:
        return policy_load(loads, demands, free, cap, candidate_limits);
    case Policy::FirstFit:
        return policy_firstfit(demands, free, cap, candidate_limits);
    }
    return {};
}

} // namespace relsim
