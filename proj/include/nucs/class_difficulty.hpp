#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"
#include "nucs/parallel.hpp"

namespace nucs {

/// Per-class sample counts and winsorized difficulty scores.
struct ClassDifficultyTable {
    std::vector<std::int64_t> counts;
    std::vector<double> difficulty;
    double gamma = 0.05;

    int num_classes() const { return static_cast<int>(counts.size()); }
    std::int64_t total() const {
        std::int64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

/// Winsorized average: both tails of the sorted values are clamped to the
/// nearest interior order statistic before averaging. The trim count is
/// floor(gamma * n), so gamma below 1/n leaves the plain mean.
inline double winsorized_mean(std::vector<double> values, double gamma) {
    if (!(gamma >= 0.0) || !(gamma < 0.5)) throw config_error("gamma must lie in [0, 0.5)");
    if (values.empty()) throw data_error("winsorized mean of an empty class");
    const auto n = static_cast<std::int64_t>(values.size());
    std::sort(values.begin(), values.end());
    const std::int64_t k = detail::floor_index(gamma * static_cast<double>(n));

    double sum = 0.0;
    for (std::int64_t i = k; i < n - k; ++i) sum += values[i];
    sum += static_cast<double>(k) * values[k];
    sum += static_cast<double>(k) * values[n - k - 1];
    return sum / static_cast<double>(n);
}

/// Per-class difficulty: winsorized mean of each class's scores. Classes are
/// independent, so they are processed in parallel; results are deterministic
/// regardless of thread count.
inline ClassDifficultyTable winsorized_class_difficulty(const ScoredDataset& ds, double gamma) {
    if (!(gamma >= 0.0) || !(gamma < 0.5)) throw config_error("gamma must lie in [0, 0.5)");
    const int y = ds.num_classes;
    std::vector<std::vector<double>> per_class(y);
    for (std::int64_t i = 0; i < ds.size(); ++i) per_class[ds.labels[i]].push_back(ds.scores[i]);

    ClassDifficultyTable table;
    table.gamma = gamma;
    table.counts.resize(y);
    table.difficulty.resize(y);
    for (int c = 0; c < y; ++c) table.counts[c] = static_cast<std::int64_t>(per_class[c].size());
    parallel_for(static_cast<std::size_t>(y), [&](std::size_t c) {
        table.difficulty[c] = winsorized_mean(std::move(per_class[c]), gamma);
    });
    return table;
}

/// Spread of the per-class difficulties: sample standard deviation (divisor
/// Y - 1) over their mean. Needs at least two classes and a positive mean.
inline double coefficient_of_variation(const ClassDifficultyTable& table) {
    const int y = table.num_classes();
    if (y < 2) throw config_error("coefficient of variation needs at least two classes");
    double mean = 0.0;
    for (double s : table.difficulty) mean += s;
    mean /= static_cast<double>(y);
    if (!(mean > 0.0)) throw numeric_error("degenerate difficulty table");
    double ss = 0.0;
    for (double s : table.difficulty) ss += (s - mean) * (s - mean);
    return std::sqrt(ss / static_cast<double>(y - 1)) / mean;
}

/// Flips score polarity so higher means harder, shifting into strictly
/// positive territory. Used for margin-style scores where low raw values mark
/// the hard samples.
inline std::vector<double> normalize_aum_scores(const std::vector<double>& raw) {
    if (raw.empty()) throw data_error("cannot normalize an empty score vector");
    double hi = raw.front();
    for (double v : raw) {
        if (!std::isfinite(v)) throw data_error("non-finite raw score");
        hi = std::max(hi, v);
    }
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = hi - raw[i] + 1e-9;
    return out;
}

/// Averages per-epoch error norms (samples x epochs) into one score per sample.
inline std::vector<double> combine_epoch_errors(const Eigen::MatrixXd& per_epoch) {
    if (per_epoch.rows() == 0 || per_epoch.cols() == 0)
        throw data_error("epoch error matrix is empty");
    if (!per_epoch.allFinite() || per_epoch.minCoeff() < 0.0)
        throw data_error("epoch errors must be finite and non-negative");
    std::vector<double> out(static_cast<std::size_t>(per_epoch.rows()));
    for (Eigen::Index i = 0; i < per_epoch.rows(); ++i)
        out[static_cast<std::size_t>(i)] =
            per_epoch.row(i).sum() / static_cast<double>(per_epoch.cols());
    return out;
}

} // namespace nucs
