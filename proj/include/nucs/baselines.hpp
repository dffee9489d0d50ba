#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "nucs/budget.hpp"
#include "nucs/class_difficulty.hpp"
#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"
#include "nucs/ridge.hpp"
#include "nucs/window.hpp"

namespace nucs {

namespace detail {

inline std::int64_t nonempty_coreset_size(std::int64_t n, double alpha) {
    const std::int64_t b = coreset_size(n, alpha);
    if (b < 1) throw config_error("pruning rate leaves an empty coreset");
    return b;
}

// Dataset indices ordered hardest first (score descending, id ascending).
inline std::vector<std::int64_t> hardness_order(const ScoredDataset& ds,
                                                const std::vector<std::int64_t>& subset) {
    std::vector<std::int64_t> order = subset;
    std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
        if (ds.scores[a] != ds.scores[b]) return ds.scores[a] > ds.scores[b];
        return ds.ids[a] < ds.ids[b];
    });
    return order;
}

// Stratified-sampling core shared by the global and per-class variants: drop
// the hardest beta fraction of the candidates, slice the surviving score range
// into equal-width strata, spread the budget as evenly as the stratum sizes
// allow (smallest strata settled first, so their shortfall spills to the rest),
// then draw uniformly within each stratum.
inline std::vector<std::int64_t> stratified_core(const ScoredDataset& ds,
                                                 std::vector<std::int64_t> candidates,
                                                 std::int64_t budget, double beta,
                                                 std::int64_t bins, std::mt19937_64& rng) {
    if (!(beta >= 0.0) || !(beta < 1.0)) throw config_error("beta must lie in [0, 1)");
    if (bins < 1) throw config_error("bins must be at least 1");

    const auto n = static_cast<std::int64_t>(candidates.size());
    const std::int64_t drop = floor_index(beta * static_cast<double>(n));
    auto order = hardness_order(ds, candidates);
    order.erase(order.begin(), order.begin() + drop);
    std::sort(order.begin(), order.end()); // back to dataset order
    if (budget > static_cast<std::int64_t>(order.size()))
        throw config_error("budget exceeds the pool left after the hard cutoff");

    double lo = ds.scores[order.front()], hi = lo;
    for (auto i : order) {
        lo = std::min(lo, ds.scores[i]);
        hi = std::max(hi, ds.scores[i]);
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::vector<std::int64_t>> strata(bins);
    for (auto i : order) {
        std::int64_t s = width > 0.0
                             ? static_cast<std::int64_t>((ds.scores[i] - lo) / width)
                             : 0;
        s = std::clamp<std::int64_t>(s, 0, bins - 1);
        strata[s].push_back(i);
    }

    // Even split: visit non-empty strata from smallest to largest, each taking
    // at most an equal share of what is still unassigned.
    std::vector<std::int64_t> by_size;
    for (std::int64_t s = 0; s < bins; ++s)
        if (!strata[s].empty()) by_size.push_back(s);
    std::stable_sort(by_size.begin(), by_size.end(), [&](std::int64_t a, std::int64_t b) {
        return strata[a].size() < strata[b].size();
    });
    std::vector<std::int64_t> take(bins, 0);
    std::int64_t remaining_budget = budget;
    std::int64_t remaining_strata = static_cast<std::int64_t>(by_size.size());
    for (std::int64_t s : by_size) {
        const std::int64_t share = remaining_budget / remaining_strata;
        take[s] = std::min<std::int64_t>(static_cast<std::int64_t>(strata[s].size()), share);
        remaining_budget -= take[s];
        --remaining_strata;
    }
    if (remaining_budget != 0) throw numeric_error("stratified allocation failed to converge");

    // Draw in stratum order so the RNG stream does not depend on stratum sizes.
    std::vector<std::int64_t> picked;
    picked.reserve(budget);
    for (std::int64_t s = 0; s < bins; ++s) {
        if (take[s] == 0) continue;
        for (auto i : sample_without_replacement(std::move(strata[s]), take[s], rng))
            picked.push_back(i);
    }
    return picked;
}

inline CoresetSelection selection_from_indices(const ScoredDataset& ds,
                                               const std::vector<std::int64_t>& indices,
                                               std::string method) {
    CoresetSelection sel;
    sel.method = std::move(method);
    sel.selected_ids.reserve(indices.size());
    for (auto i : indices) sel.selected_ids.push_back(ds.ids[i]);
    fill_class_counts(sel, ds);
    return sel;
}

} // namespace detail

/// Uniform sample without replacement of the whole dataset.
inline CoresetSelection select_random(const ScoredDataset& ds, double alpha, std::uint64_t seed) {
    const std::int64_t budget = detail::nonempty_coreset_size(ds.size(), alpha);
    std::vector<std::int64_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(seed);
    return detail::selection_from_indices(
        ds, detail::sample_without_replacement(std::move(all), budget, rng), "random");
}

/// The globally hardest samples, hardest first.
inline CoresetSelection select_hard(const ScoredDataset& ds, double alpha) {
    const std::int64_t budget = detail::nonempty_coreset_size(ds.size(), alpha);
    std::vector<std::int64_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    auto order = detail::hardness_order(ds, all);
    order.resize(budget);
    return detail::selection_from_indices(ds, order, "el2n-hard");
}

/// Stratified sampling over the score range after cutting the hardest beta
/// fraction. With one stratum and no cutoff this degrades to select_random,
/// byte for byte.
inline CoresetSelection select_ccs(const ScoredDataset& ds, double alpha, double beta,
                                   std::int64_t bins, std::uint64_t seed) {
    const std::int64_t budget = detail::nonempty_coreset_size(ds.size(), alpha);
    std::vector<std::int64_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(seed);
    return detail::selection_from_indices(
        ds, detail::stratified_core(ds, std::move(all), budget, beta, bins, rng), "ccs");
}

/// Per class, the class-proportional budget of samples whose feature-space
/// distance to the class centroid is closest to the class median distance.
inline CoresetSelection select_moderate(const ScoredDataset& ds, double alpha) {
    if (!ds.has_features()) throw data_error("method requires a feature matrix");
    const auto table = winsorized_class_difficulty(ds, 0.0);
    const auto plan = allocate_uniform(table, alpha);
    const Eigen::MatrixXd feats = ds.features->cast<double>();

    std::vector<std::int64_t> picked;
    for (int j = 0; j < ds.num_classes; ++j) {
        const auto members = ds.class_members(j);
        const auto m = static_cast<std::int64_t>(members.size());
        Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(feats.cols());
        for (auto i : members) centroid += feats.row(i);
        centroid /= static_cast<double>(m);

        std::vector<double> dist(m);
        for (std::int64_t r = 0; r < m; ++r)
            dist[r] = (feats.row(members[r]) - centroid).norm();
        std::vector<double> sorted_dist = dist;
        std::sort(sorted_dist.begin(), sorted_dist.end());
        const double median = (m % 2 == 1)
                                  ? sorted_dist[m / 2]
                                  : 0.5 * (sorted_dist[m / 2 - 1] + sorted_dist[m / 2]);

        std::vector<std::int64_t> ranks(m);
        std::iota(ranks.begin(), ranks.end(), 0);
        std::sort(ranks.begin(), ranks.end(), [&](std::int64_t a, std::int64_t b) {
            const double da = std::abs(dist[a] - median), db = std::abs(dist[b] - median);
            if (da != db) return da < db;
            return ds.ids[members[a]] < ds.ids[members[b]];
        });
        for (std::int64_t r = 0; r < plan.budgets[j]; ++r) picked.push_back(members[ranks[r]]);
    }
    return detail::selection_from_indices(ds, picked, "moderate");
}

/// The window pipeline run on class-proportional budgets instead of
/// difficulty-weighted ones.
inline CoresetSelection select_bws(const ScoredDataset& ds, double alpha, const WindowGrid& grid,
                                   const RidgeConfig& cfg) {
    const auto table = winsorized_class_difficulty(ds, 0.0);
    const auto plan = allocate_uniform(table, alpha);
    auto choice = choose_optimal_window(enumerate_windows(ds, plan, grid), ds, cfg);
    choice.selection.method = "bws";
    return std::move(choice.selection);
}

/// Stratified sampling run independently inside every class on its
/// class-proportional budget. A single-class dataset reduces to select_ccs.
inline CoresetSelection select_ccs_cp(const ScoredDataset& ds, double alpha, double beta,
                                      std::int64_t bins, std::uint64_t seed) {
    const auto table = winsorized_class_difficulty(ds, 0.0);
    const auto plan = allocate_uniform(table, alpha);

    std::vector<std::int64_t> picked;
    for (int j = 0; j < ds.num_classes; ++j) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ull);
        for (auto i : detail::stratified_core(ds, ds.class_members(j), plan.budgets[j], beta,
                                              bins, rng))
            picked.push_back(i);
    }
    auto sel = detail::selection_from_indices(ds, picked, "ccs-cp");
    return sel;
}

} // namespace nucs
