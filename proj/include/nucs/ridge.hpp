#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"
#include "nucs/parallel.hpp"
#include "nucs/window.hpp"

namespace nucs {

/// Closed-form linear proxy settings. The bias flag appends a constant-one
/// feature, regularized like any other (kept simple on purpose).
struct RidgeConfig {
    double lambda = 1.0;
    bool bias = true;
};

namespace detail {

inline Eigen::MatrixXd with_bias_column(const Eigen::MatrixXd& x, bool bias) {
    if (!bias) return x;
    Eigen::MatrixXd out(x.rows(), x.cols() + 1);
    out.leftCols(x.cols()) = x;
    out.col(x.cols()).setOnes();
    return out;
}

inline Eigen::MatrixXd features_as_double(const ScoredDataset& ds) {
    if (!ds.has_features()) throw data_error("method requires a feature matrix");
    return ds.features->cast<double>();
}

// Per-row argmax with ties resolved toward the lowest class index.
inline std::vector<int> argmax_rows(const Eigen::MatrixXd& scores) {
    std::vector<int> out(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        int best = 0;
        for (Eigen::Index c = 1; c < scores.cols(); ++c)
            if (scores(i, c) > scores(i, best)) best = static_cast<int>(c);
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

} // namespace detail

/// Solves the regularized least-squares problem against one-hot class targets:
/// (X'X + lambda I) W = X' Y. Uses the n x n dual form when the sample count is
/// below the (bias-extended) feature width; both routes solve the same normal
/// equations, which is verified by an explicit residual check. The returned
/// matrix has one column per class; the bias weight, if any, is the last row.
inline Eigen::MatrixXd fit_ridge(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                 int num_classes, const RidgeConfig& cfg) {
    if (!(cfg.lambda > 0.0)) throw config_error("lambda must be positive");
    const auto n = features.rows();
    if (n < 1) throw data_error("cannot fit on an empty subset");
    if (static_cast<std::size_t>(n) != labels.size())
        throw data_error("feature rows and labels differ in length");
    if (num_classes < 1) throw data_error("need at least one class");

    const Eigen::MatrixXd x = detail::with_bias_column(features, cfg.bias);
    const auto d = x.cols();
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, num_classes);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= num_classes) throw data_error("label out of range in ridge fit");
        onehot(i, y) = 1.0;
    }

    const Eigen::MatrixXd xty = x.transpose() * onehot;
    Eigen::MatrixXd w;
    if (n >= d) {
        Eigen::MatrixXd gram = x.transpose() * x;
        gram.diagonal().array() += cfg.lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) throw numeric_error("ridge factorization failed");
        w = llt.solve(xty);
    } else {
        Eigen::MatrixXd gram = x * x.transpose();
        gram.diagonal().array() += cfg.lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) throw numeric_error("ridge factorization failed");
        w = x.transpose() * llt.solve(onehot);
    }

    const Eigen::MatrixXd residual = x.transpose() * (x * w) + cfg.lambda * w - xty;
    const double tol = 1e-6 * (1.0 + xty.cwiseAbs().maxCoeff());
    if (!(residual.cwiseAbs().maxCoeff() <= tol))
        throw numeric_error("ridge solution failed the residual check");
    return w;
}

/// Class predictions of a fitted weight matrix on a raw feature block.
inline std::vector<int> predict_classes(const Eigen::MatrixXd& weights,
                                        const Eigen::MatrixXd& features,
                                        const RidgeConfig& cfg) {
    const Eigen::MatrixXd x = detail::with_bias_column(features, cfg.bias);
    if (x.cols() != weights.rows()) throw data_error("feature width does not match the model");
    return detail::argmax_rows(x * weights);
}

/// Fraction of the full dataset the linear proxy classifies correctly.
inline double proxy_accuracy(const Eigen::MatrixXd& weights, const ScoredDataset& ds,
                             const RidgeConfig& cfg) {
    const auto pred = predict_classes(weights, detail::features_as_double(ds), cfg);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < ds.size(); ++i)
        if (pred[static_cast<std::size_t>(i)] == ds.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

/// Winner of the window grid search plus the full accuracy trace.
struct WindowChoice {
    double k = 0.0;
    CoresetSelection selection;
    std::vector<std::pair<double, double>> proxy; // (k, accuracy) in grid order
};

/// Fits the proxy on every distinct window candidate, scores it on the full
/// dataset, and keeps the best. Duplicate-flagged candidates reuse the
/// previous fit. Ties in accuracy go to the larger endpoint, independent of
/// candidate order. Fits run in parallel; results are reduced in grid order.
inline WindowChoice choose_optimal_window(const std::vector<WindowCandidate>& candidates,
                                          const ScoredDataset& ds, const RidgeConfig& cfg) {
    if (candidates.empty()) throw config_error("no window candidates to choose from");
    const Eigen::MatrixXd full = detail::features_as_double(ds);
    const Eigen::MatrixXd full_ext = detail::with_bias_column(full, cfg.bias);

    std::vector<double> acc(candidates.size(), -1.0);
    std::vector<std::size_t> distinct;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (i == 0 || !candidates[i].duplicate) distinct.push_back(i);

    parallel_for(distinct.size(), [&](std::size_t slot) {
        const auto& cand = candidates[distinct[slot]];
        const auto m = static_cast<Eigen::Index>(cand.selection.selected_ids.size());
        Eigen::MatrixXd sub(m, full.cols());
        std::vector<int> sub_labels(static_cast<std::size_t>(m));
        for (Eigen::Index r = 0; r < m; ++r) {
            const auto idx = ds.index_of(cand.selection.selected_ids[static_cast<std::size_t>(r)]);
            if (idx < 0) throw data_error("window candidate references an unknown id");
            sub.row(r) = full.row(idx);
            sub_labels[static_cast<std::size_t>(r)] = ds.labels[idx];
        }
        const Eigen::MatrixXd w = fit_ridge(sub, sub_labels, ds.num_classes, cfg);
        const auto pred = detail::argmax_rows(full_ext * w);
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < ds.size(); ++i)
            if (pred[static_cast<std::size_t>(i)] == ds.labels[i]) ++hits;
        acc[distinct[slot]] = static_cast<double>(hits) / static_cast<double>(ds.size());
    });

    WindowChoice choice;
    std::size_t best = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i > 0 && candidates[i].duplicate) acc[i] = acc[i - 1];
        choice.proxy.push_back({candidates[i].k, acc[i]});
        if (i > 0 && (acc[i] > acc[best] ||
                      (acc[i] == acc[best] && candidates[i].k > candidates[best].k)))
            best = i;
    }
    choice.k = candidates[best].k;
    choice.selection = candidates[best].selection;
    return choice;
}

/// Worst-class accuracy, recall spread, and plain accuracy of a prediction set.
struct BiasMetrics {
    double wca = 0.0;
    double diff = 0.0;
    double accuracy = 0.0;
};

inline BiasMetrics bias_metrics(const std::vector<int>& predictions,
                                const std::vector<int>& labels) {
    if (labels.empty() || predictions.size() != labels.size())
        throw data_error("predictions and labels must have equal, nonzero length");
    int y = 0;
    for (int v : labels) {
        if (v < 0) throw data_error("negative label");
        y = std::max(y, v + 1);
    }
    std::vector<std::int64_t> total(y, 0), correct(y, 0);
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i] < 0) throw data_error("negative prediction");
        ++total[labels[i]];
        if (predictions[i] == labels[i]) {
            ++correct[labels[i]];
            ++hits;
        }
    }
    double lo = 2.0, hi = -1.0;
    for (int c = 0; c < y; ++c) {
        if (total[c] == 0) throw data_error("class " + std::to_string(c) + " absent from labels");
        const double recall = static_cast<double>(correct[c]) / static_cast<double>(total[c]);
        lo = std::min(lo, recall);
        hi = std::max(hi, recall);
    }
    BiasMetrics m;
    m.wca = lo;
    m.diff = hi - lo;
    m.accuracy = static_cast<double>(hits) / static_cast<double>(labels.size());
    return m;
}

} // namespace nucs
