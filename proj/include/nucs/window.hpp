#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nucs/budget.hpp"
#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"

namespace nucs {

/// Fractional window endpoints: multiples of the step, always closed by 1.0.
struct WindowGrid {
    std::vector<double> endpoints;

    static WindowGrid with_step(double step) {
        if (!(step > 0.0) || !(step <= 1.0)) throw config_error("step must lie in (0, 1]");
        WindowGrid grid;
        for (int i = 0;; ++i) {
            // Canonicalize i*step so grid points like 3*0.1 print as 0.3.
            const double k = std::round(static_cast<double>(i) * step * 1e12) / 1e12;
            if (k >= 1.0 - 1e-12) break;
            grid.endpoints.push_back(k);
        }
        grid.endpoints.push_back(1.0);
        return grid;
    }
};

namespace detail {

// Class member indices ordered by ascending (score, id); the id tiebreak makes
// the order reproducible across runs and machines.
inline std::vector<std::vector<std::int64_t>> sorted_class_members(const ScoredDataset& ds) {
    std::vector<std::vector<std::int64_t>> members(ds.num_classes);
    for (std::int64_t i = 0; i < ds.size(); ++i) members[ds.labels[i]].push_back(i);
    for (auto& m : members)
        std::sort(m.begin(), m.end(), [&](std::int64_t a, std::int64_t b) {
            if (ds.scores[a] != ds.scores[b]) return ds.scores[a] < ds.scores[b];
            return ds.ids[a] < ds.ids[b];
        });
    return members;
}

inline void require_plan_matches(const ScoredDataset& ds, const BudgetPlan& plan) {
    if (static_cast<int>(plan.budgets.size()) != ds.num_classes)
        throw config_error("budget plan class count does not match dataset");
    const auto counts = ds.class_counts();
    for (int j = 0; j < ds.num_classes; ++j)
        if (plan.budgets[j] < 1 || plan.budgets[j] > counts[j])
            throw config_error("budget plan is inconsistent with class sizes");
}

// Half-open rank range [start, end) of the class-j window at endpoint k.
inline std::pair<std::int64_t, std::int64_t> window_range(std::int64_t class_size,
                                                          std::int64_t budget, double k) {
    std::int64_t end = floor_index(k * static_cast<double>(class_size));
    std::int64_t start = end - budget;
    if (start < 0) {
        start = 0;
        end = budget;
    }
    return {start, end};
}

inline CoresetSelection select_window_sorted(
    const ScoredDataset& ds, const BudgetPlan& plan,
    const std::vector<std::vector<std::int64_t>>& members, double k) {
    CoresetSelection sel;
    sel.method = "window";
    sel.per_class_counts.assign(ds.num_classes, 0);
    for (int j = 0; j < ds.num_classes; ++j) {
        const auto [start, end] =
            window_range(static_cast<std::int64_t>(members[j].size()), plan.budgets[j], k);
        for (std::int64_t r = start; r < end; ++r)
            sel.selected_ids.push_back(ds.ids[members[j][r]]);
        sel.per_class_counts[j] = end - start;
    }
    return sel;
}

} // namespace detail

/// Takes each class's contiguous difficulty window ending at fraction k of the
/// (score, id)-sorted class: ranks [floor(k*N_j) - b_j, floor(k*N_j)), shifted
/// up to [0, b_j) when the window would start below zero. Selected ids are
/// listed class by class in ascending rank order.
inline CoresetSelection select_window(const ScoredDataset& ds, const BudgetPlan& plan, double k) {
    if (!(k >= 0.0) || !(k <= 1.0)) throw config_error("window endpoint must lie in [0, 1]");
    detail::require_plan_matches(ds, plan);
    return detail::select_window_sorted(ds, plan, detail::sorted_class_members(ds), k);
}

/// One window candidate per grid endpoint.
struct WindowCandidate {
    double k = 0.0;
    CoresetSelection selection;
    bool duplicate = false; // same samples as the previous endpoint (clamping)
};

/// Materializes the window at every grid endpoint. Clamped low-k windows can
/// coincide; those are kept (the grid shape is part of the contract) but
/// flagged so downstream proxy fits can reuse the previous result.
inline std::vector<WindowCandidate> enumerate_windows(const ScoredDataset& ds,
                                                      const BudgetPlan& plan,
                                                      const WindowGrid& grid) {
    if (grid.endpoints.empty()) throw config_error("window grid is empty");
    detail::require_plan_matches(ds, plan);
    const auto members = detail::sorted_class_members(ds);

    std::vector<WindowCandidate> out;
    out.reserve(grid.endpoints.size());
    std::vector<std::pair<std::int64_t, std::int64_t>> prev_ranges;
    for (double k : grid.endpoints) {
        std::vector<std::pair<std::int64_t, std::int64_t>> ranges(ds.num_classes);
        for (int j = 0; j < ds.num_classes; ++j)
            ranges[j] = detail::window_range(static_cast<std::int64_t>(members[j].size()),
                                             plan.budgets[j], k);
        WindowCandidate cand;
        cand.k = k;
        cand.duplicate = !out.empty() && ranges == prev_ranges;
        cand.selection = detail::select_window_sorted(ds, plan, members, k);
        out.push_back(std::move(cand));
        prev_ranges = std::move(ranges);
    }
    return out;
}

} // namespace nucs
