#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "nucs/class_difficulty.hpp"
#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"

namespace nucs {

/// Integer per-class selection budgets summing to the global coreset size.
struct BudgetPlan {
    std::vector<std::int64_t> budgets;
    double alpha = 0.0;
    std::string strategy;

    std::int64_t total() const {
        return std::accumulate(budgets.begin(), budgets.end(), std::int64_t{0});
    }
};

namespace detail {

// Splits an integer budget across classes proportionally to positive weights,
// never exceeding any class size and giving every class at least one sample.
// Three stages: cap-and-redistribute to a fixpoint on real targets, floor with
// largest-remainder completion, then a minimum-of-one repair pass.
inline std::vector<std::int64_t> allocate_by_weight(const std::vector<double>& weights,
                                                    const std::vector<std::int64_t>& counts,
                                                    std::int64_t budget) {
    const auto y = static_cast<std::int64_t>(counts.size());
    const std::int64_t n = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    if (budget < y)
        throw config_error("budget " + std::to_string(budget) + " cannot give each of " +
                           std::to_string(y) + " classes a sample");
    if (budget > n) throw config_error("budget exceeds dataset size");

    // Proportional real-valued targets; classes whose target exceeds their size
    // are frozen at the cap and the excess re-split among the rest. A round can
    // push new classes over their cap, so iterate; each round freezes at least
    // one class, bounding the loop by the class count.
    std::vector<double> target(weights.begin(), weights.end());
    std::vector<char> capped(y, 0);
    for (std::int64_t round = 0; round < y; ++round) {
        double weight_sum = 0.0;
        std::int64_t budget_left = budget;
        for (std::int64_t j = 0; j < y; ++j) {
            if (capped[j])
                budget_left -= counts[j];
            else
                weight_sum += weights[j];
        }
        if (weight_sum == 0.0) break; // everything capped, budget covers all
        bool changed = false;
        for (std::int64_t j = 0; j < y; ++j) {
            if (capped[j]) continue;
            target[j] = static_cast<double>(budget_left) * (weights[j] / weight_sum);
            if (target[j] > static_cast<double>(counts[j])) {
                capped[j] = 1;
                changed = true;
            }
        }
        if (!changed) break;
    }

    std::vector<std::int64_t> b(y);
    std::vector<double> frac(y, 0.0);
    std::int64_t assigned = 0;
    for (std::int64_t j = 0; j < y; ++j) {
        if (capped[j]) {
            b[j] = counts[j];
        } else {
            b[j] = static_cast<std::int64_t>(std::floor(target[j]));
            frac[j] = target[j] - std::floor(target[j]);
        }
        assigned += b[j];
    }

    // Hand out the units lost to flooring, largest fractional part first (ties
    // by class index). Classes already at their size cannot take more.
    std::vector<std::int64_t> order(y);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::int64_t a, std::int64_t c) { return frac[a] > frac[c]; });
    std::int64_t leftover = budget - assigned;
    for (std::int64_t j : order) {
        if (leftover == 0) break;
        if (b[j] < counts[j]) {
            ++b[j];
            --leftover;
        }
    }
    if (leftover != 0) throw numeric_error("budget allocation failed to converge");

    // Every class keeps at least one sample. Donors are the classes with the
    // most to spare; among equals the lighter-weighted class gives first, which
    // keeps budgets monotone in weight.
    for (std::int64_t j = 0; j < y; ++j) {
        if (b[j] > 0) continue;
        std::int64_t donor = -1;
        for (std::int64_t d = 0; d < y; ++d) {
            if (b[d] < 2) continue;
            if (donor < 0 || b[d] > b[donor] ||
                (b[d] == b[donor] && weights[d] < weights[donor]))
                donor = d;
        }
        if (donor < 0) throw numeric_error("budget allocation failed to converge");
        --b[donor];
        b[j] = 1;
    }
    return b;
}

inline void require_alpha_open(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");
}

} // namespace detail

/// Budgets proportional to difficulty mass S_j * N_j: harder classes keep more
/// of their samples. Requires strictly positive difficulties; margin-style raw
/// scores must be normalized first.
inline BudgetPlan allocate_nonuniform(const ClassDifficultyTable& table, double alpha) {
    detail::require_alpha_open(alpha);
    const int y = table.num_classes();
    std::vector<double> weights(y);
    for (int j = 0; j < y; ++j) {
        if (!(table.difficulty[j] > 0.0))
            throw data_error("class " + std::to_string(j) +
                             " has non-positive difficulty; normalize scores first");
        weights[j] = table.difficulty[j] * static_cast<double>(table.counts[j]);
    }
    BudgetPlan plan;
    plan.alpha = alpha;
    plan.strategy = "nonuniform";
    plan.budgets = detail::allocate_by_weight(weights, table.counts,
                                              coreset_size(table.total(), alpha));
    return plan;
}

/// Budgets proportional to class size: every class is pruned at the same rate.
inline BudgetPlan allocate_uniform(const ClassDifficultyTable& table, double alpha) {
    detail::require_alpha_open(alpha);
    const int y = table.num_classes();
    std::vector<double> weights(y);
    for (int j = 0; j < y; ++j) weights[j] = static_cast<double>(table.counts[j]);
    BudgetPlan plan;
    plan.alpha = alpha;
    plan.strategy = "uniform";
    plan.budgets = detail::allocate_by_weight(weights, table.counts,
                                              coreset_size(table.total(), alpha));
    return plan;
}

} // namespace nucs
