#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nucs/baselines.hpp"
#include "nucs/budget.hpp"
#include "nucs/class_difficulty.hpp"
#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"
#include "nucs/window.hpp"

namespace {

nucs::ScoredDataset simple_ds(std::vector<int> labels, std::vector<double> scores) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < labels.size(); ++i) ids.push_back("s" + std::to_string(i));
    return nucs::make_dataset(ids, labels, scores);
}

nucs::ScoredDataset random_ds(std::mt19937_64& rng, int classes, std::int64_t per_class_max) {
    std::vector<int> labels;
    std::vector<double> scores;
    std::uniform_int_distribution<std::int64_t> size_dist(5, per_class_max);
    std::uniform_real_distribution<double> score_dist(-2.0, 7.0);
    for (int c = 0; c < classes; ++c) {
        const std::int64_t n = size_dist(rng);
        for (std::int64_t i = 0; i < n; ++i) {
            labels.push_back(c);
            scores.push_back(score_dist(rng));
        }
    }
    return simple_ds(std::move(labels), std::move(scores));
}

std::set<std::string> id_set(const nucs::CoresetSelection& sel) {
    return {sel.selected_ids.begin(), sel.selected_ids.end()};
}

double score_of(const nucs::ScoredDataset& ds, const std::string& id) {
    return ds.scores[ds.index_of(id)];
}

} // namespace

TEST_CASE("random selector returns the exact budget with unique ids") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        auto ds = random_ds(rng, 1 + static_cast<int>(rng() % 4), 40);
        std::uniform_real_distribution<double> alpha_dist(0.05, 0.9);
        const double alpha = alpha_dist(rng);
        const std::int64_t want = nucs::coreset_size(ds.size(), alpha);
        if (want < 1) continue;
        auto sel = nucs::select_random(ds, alpha, rep);
        REQUIRE(sel.size() == want);
        REQUIRE(id_set(sel).size() == static_cast<std::size_t>(want));
        REQUIRE(std::accumulate(sel.per_class_counts.begin(), sel.per_class_counts.end(),
                                std::int64_t{0}) == want);
        for (const auto& id : sel.selected_ids) REQUIRE(ds.index_of(id) >= 0);
    }
}

TEST_CASE("random selector keeps everything at alpha zero") {
    auto ds = simple_ds({0, 0, 1, 1, 1}, {1, 2, 3, 4, 5});
    auto sel = nucs::select_random(ds, 0.0, 7);
    REQUIRE(sel.size() == 5);
    REQUIRE(id_set(sel) == std::set<std::string>{"s0", "s1", "s2", "s3", "s4"});
}

TEST_CASE("random selector is deterministic per seed") {
    std::mt19937_64 rng(12);
    auto ds = random_ds(rng, 3, 30);
    auto a = nucs::select_random(ds, 0.4, 99);
    auto b = nucs::select_random(ds, 0.4, 99);
    REQUIRE(a.selected_ids == b.selected_ids);
    auto c = nucs::select_random(ds, 0.4, 100);
    REQUIRE(a.selected_ids != c.selected_ids);
}

TEST_CASE("random selector hits per-class rates within three sigma") {
    std::vector<int> labels;
    std::vector<double> scores;
    std::mt19937_64 noise(5);
    for (int i = 0; i < 10000; ++i) {
        labels.push_back(i % 2);
        scores.push_back(std::uniform_real_distribution<double>(0, 1)(noise));
    }
    auto ds = simple_ds(std::move(labels), std::move(scores));
    auto sel = nucs::select_random(ds, 0.5, 42);
    const double sigma = std::sqrt(0.5 * 0.5 / 5000.0);
    for (int cls = 0; cls < 2; ++cls) {
        const double rate = static_cast<double>(sel.per_class_counts[cls]) / 5000.0;
        REQUIRE(std::abs(rate - 0.5) <= 3.0 * sigma);
    }
}

TEST_CASE("random selector rejects an empty coreset") {
    auto ds = simple_ds({0, 0, 0}, {1, 2, 3});
    REQUIRE_THROWS_AS(nucs::select_random(ds, 0.9, 1), nucs::config_error);
}

TEST_CASE("hard selector keeps the top scores, hardest first") {
    auto ds = simple_ds({0, 0, 0, 0, 0, 1, 1, 1, 1, 1},
                        {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    auto sel = nucs::select_hard(ds, 0.7);
    REQUIRE(sel.selected_ids == std::vector<std::string>{"s9", "s8", "s7"});
    REQUIRE(sel.method == "el2n-hard");
}

TEST_CASE("hard selector breaks score ties by id") {
    auto ds = nucs::make_dataset({"zeta", "beta", "alpha"}, {0, 0, 0}, {5.0, 5.0, 5.0});
    auto sel = nucs::select_hard(ds, 0.5);
    REQUIRE(sel.selected_ids == std::vector<std::string>{"alpha"});
}

TEST_CASE("hard selections nest as the budget shrinks") {
    std::mt19937_64 rng(13);
    auto ds = random_ds(rng, 4, 60);
    auto big = id_set(nucs::select_hard(ds, 0.5));
    auto small = id_set(nucs::select_hard(ds, 0.8));
    REQUIRE(small.size() < big.size());
    REQUIRE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    auto all = id_set(nucs::select_hard(ds, 0.0));
    REQUIRE(all.size() == static_cast<std::size_t>(ds.size()));
}

TEST_CASE("stratified selector with one bin and no cutoff equals the random selector") {
    std::mt19937_64 rng(14);
    for (std::uint64_t seed : {0ull, 1ull, 77ull}) {
        auto ds = random_ds(rng, 3, 40);
        auto plain = nucs::select_random(ds, 0.6, seed);
        auto strat = nucs::select_ccs(ds, 0.6, 0.0, 1, seed);
        REQUIRE(plain.selected_ids == strat.selected_ids);
        REQUIRE(plain.per_class_counts == strat.per_class_counts);
    }
}

TEST_CASE("stratified selector cuts the hardest fraction before sampling") {
    auto ds = simple_ds({0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
                        {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    auto sel = nucs::select_ccs(ds, 0.5, 0.5, 2, 3);
    REQUIRE(sel.size() == 5);
    REQUIRE(id_set(sel) == std::set<std::string>{"s0", "s1", "s2", "s3", "s4"});
}

TEST_CASE("stratified selector spreads the budget evenly over equal strata") {
    std::vector<int> labels(100, 0);
    std::vector<double> scores(100);
    for (int i = 0; i < 100; ++i) scores[i] = static_cast<double>(i);
    auto ds = simple_ds(std::move(labels), std::move(scores));
    auto sel = nucs::select_ccs(ds, 0.5, 0.0, 5, 21);
    REQUIRE(sel.size() == 50);
    std::vector<int> per_stratum(5, 0);
    for (const auto& id : sel.selected_ids) {
        const double s = score_of(ds, id);
        ++per_stratum[std::min(4, static_cast<int>(s / (99.0 / 5.0)))];
    }
    for (int b = 0; b < 5; ++b) REQUIRE(per_stratum[b] == 10);
}

TEST_CASE("stratified selector spills budget from exhausted strata") {
    // Scores 0..9 plus a far outlier: with two bins the outlier sits alone in
    // the upper stratum, so it is taken whole and the rest spills down.
    std::vector<int> labels(11, 0);
    std::vector<double> scores{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 1000};
    auto ds = simple_ds(std::move(labels), std::move(scores));
    auto sel = nucs::select_ccs(ds, 0.3, 0.0, 2, 9);
    REQUIRE(sel.size() == 7);
    int upper = 0;
    for (const auto& id : sel.selected_ids)
        if (score_of(ds, id) > 500.0) ++upper;
    REQUIRE(upper == 1);
}

TEST_CASE("stratified selector copes with budgets below the stratum count") {
    std::vector<int> labels(30, 0);
    std::vector<double> scores;
    for (int i = 0; i < 30; ++i) scores.push_back(static_cast<double>(i % 3) * 10.0);
    auto ds = simple_ds(std::move(labels), std::move(scores));
    auto sel = nucs::select_ccs(ds, 0.9, 0.0, 30, 4);
    REQUIRE(sel.size() == 3);
}

TEST_CASE("stratified selector handles constant scores") {
    std::vector<int> labels(20, 0);
    std::vector<double> scores(20, 3.25);
    auto ds = simple_ds(std::move(labels), std::move(scores));
    auto sel = nucs::select_ccs(ds, 0.5, 0.0, 8, 5);
    REQUIRE(sel.size() == 10);
    REQUIRE(id_set(sel).size() == 10);
}

TEST_CASE("stratified selector validates its parameters") {
    auto ds = simple_ds({0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
                        {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    REQUIRE_THROWS_AS(nucs::select_ccs(ds, 0.2, 0.5, 2, 1), nucs::config_error);
    REQUIRE_THROWS_WITH(nucs::select_ccs(ds, 0.2, 0.5, 2, 1),
                        "budget exceeds the pool left after the hard cutoff");
    REQUIRE_THROWS_AS(nucs::select_ccs(ds, 0.5, 1.0, 2, 1), nucs::config_error);
    REQUIRE_THROWS_AS(nucs::select_ccs(ds, 0.5, -0.1, 2, 1), nucs::config_error);
    REQUIRE_THROWS_AS(nucs::select_ccs(ds, 0.5, 0.0, 0, 1), nucs::config_error);
}

TEST_CASE("moderate selector keeps samples nearest the median centroid distance") {
    Eigen::MatrixXf feats(5, 1);
    feats << 0.0f, 1.0f, -1.0f, 4.0f, -4.0f;
    auto ds = nucs::make_dataset({"a", "b", "c", "d", "e"}, {0, 0, 0, 0, 0},
                                 {1, 1, 1, 1, 1}, feats);
    auto sel = nucs::select_moderate(ds, 0.6);
    REQUIRE(id_set(sel) == std::set<std::string>{"b", "c"});
    REQUIRE(sel.method == "moderate");
}

TEST_CASE("moderate selector breaks distance ties by id") {
    Eigen::MatrixXf feats(4, 1);
    feats << -2.0f, -1.0f, 1.0f, 2.0f;
    auto ds = nucs::make_dataset({"a", "b", "c", "d"}, {0, 0, 0, 0}, {1, 1, 1, 1}, feats);
    auto sel = nucs::select_moderate(ds, 0.5);
    REQUIRE(id_set(sel) == std::set<std::string>{"a", "b"});
}

TEST_CASE("moderate selections bracket the median distance") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = 1001;
    Eigen::MatrixXf feats(n, 2);
    std::vector<int> labels(n, 0);
    std::vector<double> scores(n, 1.0);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
        feats(i, 0) = static_cast<float>(gauss(rng));
        feats(i, 1) = static_cast<float>(gauss(rng));
        ids.push_back("g" + std::to_string(i));
    }
    auto ds = nucs::make_dataset(ids, labels, scores, feats);

    Eigen::RowVector2d centroid = feats.cast<double>().colwise().mean();
    std::vector<double> dist(n);
    for (int i = 0; i < n; ++i)
        dist[i] = (feats.row(i).cast<double>() - centroid).norm();
    std::vector<double> sorted = dist;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[n / 2];

    auto sel = nucs::select_moderate(ds, 0.5);
    double lo = 1e300, hi = -1e300;
    for (const auto& id : sel.selected_ids) {
        const double d = dist[ds.index_of(id)];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    REQUIRE(lo <= median);
    REQUIRE(hi >= median);
}

TEST_CASE("moderate selector follows the uniform budget split") {
    std::mt19937_64 rng(18);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<int> labels;
    std::vector<double> scores;
    std::vector<std::string> ids;
    std::vector<std::int64_t> counts{120, 60, 33};
    for (int c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < counts[c]; ++i) {
            labels.push_back(c);
            scores.push_back(1.0);
            ids.push_back("m" + std::to_string(ids.size()));
        }
    Eigen::MatrixXf feats(static_cast<Eigen::Index>(labels.size()), 2);
    for (Eigen::Index i = 0; i < feats.rows(); ++i) {
        feats(i, 0) = static_cast<float>(gauss(rng) + 3.0 * labels[i]);
        feats(i, 1) = static_cast<float>(gauss(rng));
    }
    auto ds = nucs::make_dataset(ids, labels, scores, feats);
    auto sel = nucs::select_moderate(ds, 0.55);

    const auto table = nucs::winsorized_class_difficulty(ds, 0.0);
    const auto plan = nucs::allocate_uniform(table, 0.55);
    REQUIRE(sel.per_class_counts == plan.budgets);
    REQUIRE(sel.size() == plan.total());
}

TEST_CASE("moderate selector requires features") {
    auto ds = simple_ds({0, 0, 1, 1}, {1, 2, 3, 4});
    REQUIRE_THROWS_AS(nucs::select_moderate(ds, 0.5), nucs::data_error);
}

namespace {

/// Two separable classes with identical score multisets, so difficulty-based
/// and size-based budget splits agree exactly.
nucs::ScoredDataset balanced_feature_ds(std::int64_t per_class) {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> gauss(0.0, 0.3);
    std::vector<int> labels;
    std::vector<double> scores;
    std::vector<std::string> ids;
    Eigen::MatrixXf feats(2 * per_class, 2);
    for (int c = 0; c < 2; ++c)
        for (std::int64_t i = 0; i < per_class; ++i) {
            const auto row = static_cast<Eigen::Index>(labels.size());
            labels.push_back(c);
            scores.push_back(static_cast<double>(i) / static_cast<double>(per_class));
            ids.push_back("w" + std::to_string(row));
            feats(row, 0) = static_cast<float>(gauss(rng) + 5.0 * c);
            feats(row, 1) = static_cast<float>(gauss(rng));
        }
    return nucs::make_dataset(ids, labels, scores, feats);
}

} // namespace

TEST_CASE("window baseline follows the uniform plan and reports exact sizes") {
    auto ds = balanced_feature_ds(40);
    const auto grid = nucs::WindowGrid::with_step(0.25);
    auto sel = nucs::select_bws(ds, 0.5, grid, {});
    REQUIRE(sel.method == "bws");
    REQUIRE(sel.size() == nucs::coreset_size(ds.size(), 0.5));

    const auto table = nucs::winsorized_class_difficulty(ds, 0.0);
    const auto plan = nucs::allocate_uniform(table, 0.5);
    REQUIRE(sel.per_class_counts == plan.budgets);
}

TEST_CASE("window baseline matches the difficulty-weighted pipeline when classes tie") {
    auto ds = balanced_feature_ds(32);
    const auto grid = nucs::WindowGrid::with_step(0.2);
    const nucs::RidgeConfig cfg{};

    const auto table = nucs::winsorized_class_difficulty(ds, 0.05);
    REQUIRE(table.difficulty[0] == table.difficulty[1]);
    const auto weighted = nucs::allocate_nonuniform(table, 0.6);
    const auto uniform = nucs::allocate_uniform(table, 0.6);
    REQUIRE(weighted.budgets == uniform.budgets);

    auto via_weighted =
        nucs::choose_optimal_window(nucs::enumerate_windows(ds, weighted, grid), ds, cfg);
    auto baseline = nucs::select_bws(ds, 0.6, grid, cfg);
    REQUIRE(baseline.selected_ids == via_weighted.selection.selected_ids);
}

TEST_CASE("window baseline spreads long-tailed classes at the shared rate") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss(0.0, 0.4);
    std::vector<std::int64_t> counts{300, 150, 75, 40};
    std::vector<int> labels;
    std::vector<double> scores;
    std::vector<std::string> ids;
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    Eigen::MatrixXf feats(total, 2);
    for (int c = 0; c < static_cast<int>(counts.size()); ++c)
        for (std::int64_t i = 0; i < counts[c]; ++i) {
            const auto row = static_cast<Eigen::Index>(labels.size());
            labels.push_back(c);
            scores.push_back(std::abs(gauss(rng)));
            ids.push_back("t" + std::to_string(row));
            feats(row, 0) = static_cast<float>(gauss(rng) + 4.0 * (c % 2));
            feats(row, 1) = static_cast<float>(gauss(rng) + 4.0 * (c / 2));
        }
    auto ds = nucs::make_dataset(ids, labels, scores, feats);
    auto sel = nucs::select_bws(ds, 0.7, nucs::WindowGrid::with_step(0.5), {});
    for (std::size_t j = 0; j < counts.size(); ++j) {
        const double rate =
            static_cast<double>(sel.per_class_counts[j]) / static_cast<double>(counts[j]);
        REQUIRE(std::abs(rate - 0.3) <= 1.0 / static_cast<double>(counts[j]) + 1e-12);
    }
}

TEST_CASE("per-class stratified selector reduces to the global one on a single class") {
    std::mt19937_64 rng(24);
    auto ds = random_ds(rng, 1, 80);
    for (std::uint64_t seed : {3ull, 19ull}) {
        auto global = nucs::select_ccs(ds, 0.4, 0.2, 4, seed);
        auto per_class = nucs::select_ccs_cp(ds, 0.4, 0.2, 4, seed);
        REQUIRE(global.selected_ids == per_class.selected_ids);
    }
}

TEST_CASE("per-class stratified selector follows the uniform budget split") {
    std::mt19937_64 rng(25);
    auto ds = random_ds(rng, 4, 50);
    auto sel = nucs::select_ccs_cp(ds, 0.45, 0.1, 3, 8);
    const auto table = nucs::winsorized_class_difficulty(ds, 0.0);
    const auto plan = nucs::allocate_uniform(table, 0.45);
    REQUIRE(sel.per_class_counts == plan.budgets);
}

TEST_CASE("per-class stratified selector draws each class from its own seeded stream") {
    std::mt19937_64 rng(26);
    auto ds = random_ds(rng, 2, 40);
    const std::uint64_t seed = 31;
    auto sel = nucs::select_ccs_cp(ds, 0.5, 0.0, 1, seed);

    const auto table = nucs::winsorized_class_difficulty(ds, 0.0);
    const auto plan = nucs::allocate_uniform(table, 0.5);
    std::vector<std::string> expect;
    for (int j = 0; j < 2; ++j) {
        std::mt19937_64 class_rng(seed + static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ull);
        auto members = ds.class_members(j);
        for (auto i : nucs::detail::sample_without_replacement(std::move(members),
                                                               plan.budgets[j], class_rng))
            expect.push_back(ds.ids[i]);
    }
    REQUIRE(sel.selected_ids == expect);
}

TEST_CASE("per-class stratified selector cuts the hardest samples inside each class") {
    std::vector<int> labels;
    std::vector<double> scores;
    for (int i = 0; i < 10; ++i) {
        labels.push_back(0);
        scores.push_back(static_cast<double>(i));
    }
    for (int i = 0; i < 10; ++i) {
        labels.push_back(1);
        scores.push_back(100.0 + i);
    }
    auto ds = simple_ds(std::move(labels), std::move(scores));
    auto sel = nucs::select_ccs_cp(ds, 0.5, 0.5, 2, 6);
    REQUIRE(sel.size() == 10);
    for (const auto& id : sel.selected_ids) {
        const auto idx = ds.index_of(id);
        const double base = ds.labels[idx] == 0 ? 0.0 : 100.0;
        REQUIRE(ds.scores[idx] - base <= 4.0);
    }
}

TEST_CASE("per-class stratified selector rejects a class budget beyond its pool") {
    auto ds = simple_ds({0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
                        {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    REQUIRE_THROWS_AS(nucs::select_ccs_cp(ds, 0.3, 0.5, 2, 1), nucs::config_error);
}

TEST_CASE("all selectors deliver exactly the requested size") {
    std::mt19937_64 rng(27);
    for (int rep = 0; rep < 25; ++rep) {
        auto ds = random_ds(rng, 2 + static_cast<int>(rng() % 3), 45);
        std::uniform_real_distribution<double> alpha_dist(0.1, 0.8);
        const double alpha = alpha_dist(rng);
        const std::int64_t want = nucs::coreset_size(ds.size(), alpha);
        if (want < ds.num_classes) continue;
        REQUIRE(nucs::select_random(ds, alpha, rep).size() == want);
        REQUIRE(nucs::select_hard(ds, alpha).size() == want);
        REQUIRE(nucs::select_ccs(ds, alpha, 0.05, 7, rep).size() == want);
        REQUIRE(nucs::select_ccs_cp(ds, alpha, 0.0, 3, rep).size() == want);
    }
}
