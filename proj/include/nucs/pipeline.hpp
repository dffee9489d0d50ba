#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nucs/baselines.hpp"
#include "nucs/budget.hpp"
#include "nucs/class_difficulty.hpp"
#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"
#include "nucs/ridge.hpp"
#include "nucs/window.hpp"

namespace nucs {

/// Effective settings of one selection run, defaults included.
struct SelectConfig {
    std::string method = "nucs";
    double alpha = 0.5;
    double gamma = 0.05;
    double step = 0.1;
    double lambda = 1.0;
    double beta = 0.0;
    std::int64_t bins = 50;
    std::optional<double> k_fixed;
    std::uint64_t seed = 0;
};

/// Selection plus the intermediate state a report wants to show.
struct SelectOutcome {
    CoresetSelection selection;
    ClassDifficultyTable table;
    std::optional<double> chosen_k;
    std::vector<std::pair<double, double>> proxy_scores;
};

/// Dispatches one configured run: difficulty table first, then the
/// method-specific selector. Window-search methods also surface the winning
/// endpoint and the proxy accuracy trace.
inline SelectOutcome run_selection(const ScoredDataset& ds, const SelectConfig& cfg) {
    SelectOutcome out;
    out.table = winsorized_class_difficulty(ds, cfg.gamma);
    const RidgeConfig proxy{cfg.lambda, true};

    if (cfg.method == "nucs") {
        const auto plan = allocate_nonuniform(out.table, cfg.alpha);
        const auto grid = WindowGrid::with_step(cfg.step);
        auto choice = choose_optimal_window(enumerate_windows(ds, plan, grid), ds, proxy);
        out.chosen_k = choice.k;
        out.proxy_scores = std::move(choice.proxy);
        out.selection = std::move(choice.selection);
    } else if (cfg.method == "nucs-o") {
        if (!cfg.k_fixed)
            throw config_error("method nucs-o needs a fixed window endpoint (--k-fixed)");
        const auto plan = allocate_nonuniform(out.table, cfg.alpha);
        out.selection = select_window(ds, plan, *cfg.k_fixed);
        out.chosen_k = *cfg.k_fixed;
    } else if (cfg.method == "random") {
        out.selection = select_random(ds, cfg.alpha, cfg.seed);
    } else if (cfg.method == "el2n-hard") {
        out.selection = select_hard(ds, cfg.alpha);
    } else if (cfg.method == "moderate") {
        out.selection = select_moderate(ds, cfg.alpha);
    } else if (cfg.method == "ccs") {
        out.selection = select_ccs(ds, cfg.alpha, cfg.beta, cfg.bins, cfg.seed);
    } else if (cfg.method == "bws") {
        const auto plan = allocate_uniform(out.table, cfg.alpha);
        const auto grid = WindowGrid::with_step(cfg.step);
        auto choice = choose_optimal_window(enumerate_windows(ds, plan, grid), ds, proxy);
        out.chosen_k = choice.k;
        out.proxy_scores = std::move(choice.proxy);
        out.selection = std::move(choice.selection);
        out.selection.method = "bws";
    } else if (cfg.method == "ccs-cp") {
        out.selection = select_ccs_cp(ds, cfg.alpha, cfg.beta, cfg.bins, cfg.seed);
    } else {
        throw config_error("unknown method '" + cfg.method + "'");
    }

    if (cfg.method == "nucs" || cfg.method == "nucs-o") out.selection.method = cfg.method;
    return out;
}

} // namespace nucs
