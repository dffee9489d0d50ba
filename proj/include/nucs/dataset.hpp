#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "nucs/errors.hpp"

namespace nucs {

/// The selection universe: unique sample ids, dense class labels in [0, Y),
/// per-sample difficulty scores (higher = harder) and an optional feature
/// matrix with one row per sample. Immutable after finalize(); safe to share
/// read-only across threads.
struct ScoredDataset {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<double> scores;
    std::optional<Eigen::MatrixXf> features;
    int num_classes = 0;

    std::int64_t size() const { return static_cast<std::int64_t>(ids.size()); }
    bool has_features() const { return features.has_value(); }

    /// Row index of an id, or -1 if unknown. Valid after finalize().
    std::int64_t index_of(const std::string& id) const {
        auto it = id_index_.find(id);
        return it == id_index_.end() ? -1 : it->second;
    }

    /// Per-class sample counts, indexed by class.
    std::vector<std::int64_t> class_counts() const {
        std::vector<std::int64_t> counts(num_classes, 0);
        for (int y : labels) ++counts[y];
        return counts;
    }

    /// Sample indices of one class, in dataset order.
    std::vector<std::int64_t> class_members(int cls) const {
        std::vector<std::int64_t> out;
        for (std::int64_t i = 0; i < size(); ++i)
            if (labels[i] == cls) out.push_back(i);
        return out;
    }

    /// Checks all invariants and builds the id lookup index. Throws data_error.
    void finalize() {
        const std::size_t n = ids.size();
        if (n == 0) throw data_error("dataset is empty");
        if (labels.size() != n || scores.size() != n)
            throw data_error("ids, labels and scores must have equal length");
        id_index_.clear();
        id_index_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!id_index_.emplace(ids[i], static_cast<std::int64_t>(i)).second)
                throw data_error("duplicate id '" + ids[i] + "'");
        }
        if (num_classes < 1) throw data_error("dataset must declare at least one class");
        std::vector<std::int64_t> counts(num_classes, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] < 0 || labels[i] >= num_classes)
                throw data_error("label out of range for id '" + ids[i] + "'");
            ++counts[labels[i]];
            if (!std::isfinite(scores[i]))
                throw data_error("non-finite score for id '" + ids[i] + "'");
        }
        for (int c = 0; c < num_classes; ++c)
            if (counts[c] == 0)
                throw data_error("class " + std::to_string(c) + " has no samples");
        if (features) {
            if (features->rows() != static_cast<Eigen::Index>(n))
                throw data_error("feature matrix row count does not match sample count");
            if (features->cols() < 1) throw data_error("feature matrix has no columns");
            if (!features->allFinite()) throw data_error("feature matrix contains non-finite values");
        }
    }

private:
    std::unordered_map<std::string, std::int64_t> id_index_;
};

/// Builds a finalized dataset from parallel columns. Labels must already be dense.
inline ScoredDataset make_dataset(std::vector<std::string> ids, std::vector<int> labels,
                                  std::vector<double> scores,
                                  std::optional<Eigen::MatrixXf> features = std::nullopt) {
    ScoredDataset ds;
    ds.ids = std::move(ids);
    ds.labels = std::move(labels);
    ds.scores = std::move(scores);
    ds.features = std::move(features);
    int y = 0;
    for (int label : ds.labels) y = std::max(y, label + 1);
    ds.num_classes = y;
    ds.finalize();
    return ds;
}

/// A chosen subset plus provenance: which method produced it and with which parameters.
struct CoresetSelection {
    std::vector<std::string> selected_ids;
    std::string method;
    std::map<std::string, std::string> params;
    std::vector<std::int64_t> per_class_counts;

    std::int64_t size() const { return static_cast<std::int64_t>(selected_ids.size()); }
};

namespace detail {

// floor() with a guard for products like (1 - 0.9) * 50 that land one ulp
// under an integer; the guard only fires within 1e-9 of an integer, far below
// any legitimate fractional part at realistic sizes.
inline std::int64_t floor_index(double value) {
    return static_cast<std::int64_t>(std::floor(value + 1e-9));
}

} // namespace detail

/// Coreset size for pruning rate alpha on n samples.
inline std::int64_t coreset_size(std::int64_t n, double alpha) {
    if (!(alpha >= 0.0) || !(alpha < 1.0))
        throw config_error("alpha must lie in [0, 1)");
    return detail::floor_index((1.0 - alpha) * static_cast<double>(n));
}

namespace detail {

// Fills per_class_counts from the dataset labels of the selected ids.
inline void fill_class_counts(CoresetSelection& sel, const ScoredDataset& ds) {
    sel.per_class_counts.assign(ds.num_classes, 0);
    for (const auto& id : sel.selected_ids) {
        const std::int64_t idx = ds.index_of(id);
        if (idx < 0) throw data_error("selected id '" + id + "' not in dataset");
        ++sel.per_class_counts[ds.labels[idx]];
    }
}

// Partial Fisher-Yates: first `take` entries of a uniformly shuffled prefix.
inline std::vector<std::int64_t> sample_without_replacement(std::vector<std::int64_t> indices,
                                                            std::int64_t take,
                                                            std::mt19937_64& rng) {
    const std::int64_t n = static_cast<std::int64_t>(indices.size());
    for (std::int64_t i = 0; i < take && i < n - 1; ++i) {
        std::uniform_int_distribution<std::int64_t> pick(i, n - 1);
        std::swap(indices[i], indices[pick(rng)]);
    }
    indices.resize(take);
    return indices;
}

} // namespace detail

/// Subsamples classes on a geometric schedule so the largest-to-smallest size
/// ratio approximates the imbalance factor: class j keeps
/// floor(N_j * mu^j) samples with mu = I^(1/(1-Y)). Retained samples are drawn
/// uniformly at random under the seed; dataset order is preserved. I = 1 is the
/// identity. Throws if any class would drop to zero samples.
inline ScoredDataset make_long_tailed(const ScoredDataset& ds, double imbalance_factor,
                                      std::uint64_t seed) {
    if (!(imbalance_factor >= 1.0))
        throw config_error("imbalance factor must be >= 1");
    if (ds.num_classes < 2)
        throw config_error("long-tail subsampling needs at least two classes");

    const int y = ds.num_classes;
    const double mu = std::pow(imbalance_factor, 1.0 / (1.0 - static_cast<double>(y)));
    const std::vector<std::int64_t> counts = ds.class_counts();

    std::vector<char> keep(ds.size(), 0);
    std::mt19937_64 rng(seed);
    for (int cls = 0; cls < y; ++cls) {
        const double share = std::pow(mu, static_cast<double>(cls));
        const auto target =
            static_cast<std::int64_t>(std::floor(static_cast<double>(counts[cls]) * share));
        if (target < 1)
            throw data_error("class " + std::to_string(cls) +
                             " would drop to 0 samples under imbalance factor");
        auto members = ds.class_members(cls);
        if (target >= counts[cls]) {
            for (auto i : members) keep[i] = 1;
            continue;
        }
        for (auto i : detail::sample_without_replacement(std::move(members), target, rng))
            keep[i] = 1;
    }

    ScoredDataset out;
    out.num_classes = y;
    std::vector<std::int64_t> rows;
    for (std::int64_t i = 0; i < ds.size(); ++i) {
        if (!keep[i]) continue;
        out.ids.push_back(ds.ids[i]);
        out.labels.push_back(ds.labels[i]);
        out.scores.push_back(ds.scores[i]);
        rows.push_back(i);
    }
    if (ds.features) {
        Eigen::MatrixXf sub(static_cast<Eigen::Index>(rows.size()), ds.features->cols());
        for (std::size_t r = 0; r < rows.size(); ++r)
            sub.row(static_cast<Eigen::Index>(r)) = ds.features->row(rows[r]);
        out.features = std::move(sub);
    }
    out.finalize();
    return out;
}

} // namespace nucs
