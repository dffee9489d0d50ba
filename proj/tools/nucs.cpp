// Command-line front end: select (coreset selection on a scored dataset),
// simulate (two-class Gaussian allocation sweep), evaluate (prediction bias
// metrics). Errors exit 1 (config), 2 (data), or 3 (numeric) with a one-line
// diagnostic on stderr; results land in files or on stdout, never mixed.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nucs/nucs.hpp"

namespace {

struct SelectArgs {
    std::string labels, scores, features, out, report;
    nucs::SelectConfig cfg;
    double k_fixed_raw = -1.0; // sentinel replaced when the flag is given
};

int do_select(const SelectArgs& args) {
    if (!(args.cfg.alpha > 0.0) || !(args.cfg.alpha < 1.0))
        throw nucs::config_error("alpha must lie in (0, 1)");
    const auto ds = nucs::load_dataset(
        args.labels, args.scores,
        args.features.empty() ? std::nullopt : std::optional<std::string>(args.features));
    const auto outcome = nucs::run_selection(ds, args.cfg);
    nucs::save_selection(outcome.selection, args.out);

    nucs::RunReport report;
    report.class_counts = outcome.table.counts;
    report.class_difficulty = outcome.table.difficulty;
    report.class_budgets = outcome.selection.per_class_counts;
    report.chosen_k = outcome.chosen_k;
    report.proxy_scores = outcome.proxy_scores;
    report.params = nlohmann::ordered_json{
        {"method", args.cfg.method}, {"alpha", args.cfg.alpha},   {"gamma", args.cfg.gamma},
        {"step", args.cfg.step},     {"lambda", args.cfg.lambda}, {"beta", args.cfg.beta},
        {"bins", args.cfg.bins},     {"seed", args.cfg.seed},
    };
    if (args.cfg.k_fixed)
        report.params["k_fixed"] = *args.cfg.k_fixed;
    else
        report.params["k_fixed"] = nullptr;
    nucs::save_report(report, args.report);
    return 0;
}

struct SimulateArgs {
    double mu0 = 0.0, mu1 = 0.0, sigma0 = 1.0, sigma1 = 1.0, f = 0.5;
    std::string out;
    std::int64_t sweep_points = 21;
    std::int64_t mc_samples = 200000;
    std::uint64_t seed = 0;
};

int do_simulate(const SimulateArgs& args) {
    if (args.sweep_points < 2) throw nucs::config_error("sweep-points must be at least 2");
    if (args.mc_samples < 1) throw nucs::config_error("mc-samples must be at least 1");
    const nucs::GaussianTwoClassModel model(args.mu0, args.mu1, args.sigma0, args.sigma1,
                                            args.f);
    const auto opt = nucs::optimal_constrained(model);
    const auto repr = [](double v) { return nucs::detail::shortest_repr(v); };

    std::string csv = "f0,t,E_closed,E_mc,regime\n";
    const double lo = model.f0_min(), hi = model.f0_max();
    for (std::int64_t i = 0; i < args.sweep_points; ++i) {
        const double raw =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(args.sweep_points - 1);
        const double f0 = std::round(raw * 1e12) / 1e12; // tame decimal grid points
        const double t = nucs::best_threshold(model, f0);
        const double closed = nucs::error_rate(model, t, f0);
        const double mc = nucs::monte_carlo_error(model, t, f0, args.mc_samples, args.seed);
        csv += repr(f0) + "," + repr(t) + "," + repr(closed) + "," + repr(mc) + "," +
               nucs::to_string(opt.regime) + "\n";
    }
    nucs::atomic_write(args.out, csv);

    std::cout << "t*=" << repr(opt.t) << " f0*=" << repr(opt.f0) << " f1*=" << repr(opt.f1)
              << " regime=" << nucs::to_string(opt.regime) << " E*=" << repr(opt.error)
              << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string selection, predictions, labels;
};

int do_evaluate(const EvaluateArgs& args) {
    const auto label_rows = nucs::read_id_value_csv(args.labels, "id,label");
    if (label_rows.empty()) throw nucs::data_error(args.labels + ": no samples");
    std::unordered_map<std::string, int> token_to_class;
    std::unordered_map<std::string, int> label_of;
    for (const auto& [id, token] : label_rows) {
        if (!label_of.emplace(id, 0).second)
            throw nucs::data_error(args.labels + ": duplicate id '" + id + "'");
        const auto [it, fresh] =
            token_to_class.emplace(token, static_cast<int>(token_to_class.size()));
        label_of[id] = it->second;
    }

    const auto pred_rows = nucs::read_id_value_csv(args.predictions, "id,prediction");
    std::unordered_map<std::string, int> pred_of;
    for (const auto& [id, token] : pred_rows) {
        const auto cls = token_to_class.find(token);
        if (cls == token_to_class.end())
            throw nucs::data_error(args.predictions + ": unknown class token '" + token + "'");
        if (!pred_of.emplace(id, cls->second).second)
            throw nucs::data_error(args.predictions + ": duplicate id '" + id + "'");
    }

    // The evaluation universe: the selection file when given, else every
    // labeled sample. Predictions must cover the universe; rows outside a
    // given selection are simply out of scope, but without one the id sets
    // must match exactly.
    std::vector<std::string> universe;
    if (!args.selection.empty()) {
        universe = nucs::read_selection(args.selection);
        std::unordered_set<std::string> seen;
        for (const auto& id : universe) {
            if (!label_of.count(id))
                throw nucs::data_error(args.selection + ": id '" + id + "' not in labels");
            if (!seen.insert(id).second)
                throw nucs::data_error(args.selection + ": duplicate id '" + id + "'");
        }
    } else {
        for (const auto& [id, token] : label_rows) universe.push_back(id);
        if (pred_of.size() != universe.size())
            throw nucs::data_error("prediction id set does not match the evaluated samples");
    }

    std::vector<int> labels, predictions;
    for (const auto& id : universe) {
        const auto p = pred_of.find(id);
        if (p == pred_of.end())
            throw nucs::data_error(args.predictions + ": missing prediction for id '" + id +
                                   "'");
        labels.push_back(label_of.at(id));
        predictions.push_back(p->second);
    }

    const auto m = nucs::bias_metrics(predictions, labels);
    nlohmann::ordered_json j{{"wca", m.wca}, {"diff", m.diff}, {"accuracy", m.accuracy}};
    std::cout << j.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-uniform class-wise coreset selection toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML config file; flags given on the command line win");

    SelectArgs sel;
    auto* select = app.add_subcommand("select", "select a coreset from a scored dataset");
    select->fallthrough();
    select->add_option("--labels", sel.labels, "labels CSV (id,label)")->required();
    select->add_option("--scores", sel.scores, "difficulty scores CSV (id,score)")->required();
    select->add_option("--features", sel.features, "feature matrix file (optional)");
    select->add_option("--method", sel.cfg.method,
                       "nucs, nucs-o, random, el2n-hard, moderate, ccs, bws, ccs-cp")
        ->required();
    select->add_option("--alpha", sel.cfg.alpha, "pruning rate in (0,1)")->required();
    select->add_option("--gamma", sel.cfg.gamma, "winsorization rate (default 0.05)");
    select->add_option("--step", sel.cfg.step, "window grid step (default 0.1)");
    select->add_option("--lambda", sel.cfg.lambda, "ridge strength (default 1)");
    select->add_option("--beta", sel.cfg.beta, "hard-cutoff rate for ccs (default 0)");
    select->add_option("--bins", sel.cfg.bins, "stratum count for ccs (default 50)");
    auto* kflag =
        select->add_option("--k-fixed", sel.k_fixed_raw, "fixed window endpoint for nucs-o");
    select->add_option("--seed", sel.cfg.seed, "random seed (default 0)");
    select->add_option("--out", sel.out, "selection CSV output path")->required();
    select->add_option("--report", sel.report, "report JSON output path")->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "two-class Gaussian allocation sweep");
    simulate->fallthrough();
    simulate->add_option("--mu0", sim.mu0, "class 0 mean")->required();
    simulate->add_option("--mu1", sim.mu1, "class 1 mean")->required();
    simulate->add_option("--sigma0", sim.sigma0, "class 0 stddev (default 1)");
    simulate->add_option("--sigma1", sim.sigma1, "class 1 stddev (default 1)");
    simulate->add_option("--f", sim.f, "overall selection rate in (0,1]")->required();
    simulate->add_option("--sweep-points", sim.sweep_points, "rows in the sweep (default 21)");
    simulate->add_option("--mc-samples", sim.mc_samples,
                         "Monte-Carlo draws per class (default 200000)");
    simulate->add_option("--seed", sim.seed, "random seed (default 0)");
    simulate->add_option("--out", sim.out, "sweep CSV output path")->required();

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "bias metrics for predictions");
    evaluate->fallthrough();
    evaluate->add_option("--selection", eval.selection,
                         "restrict evaluation to these ids (optional)");
    evaluate->add_option("--predictions", eval.predictions, "predictions CSV (id,prediction)")
        ->required();
    evaluate->add_option("--labels", eval.labels, "labels CSV (id,label)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (select->parsed()) {
            if (kflag->count() > 0) sel.cfg.k_fixed = sel.k_fixed_raw;
            return do_select(sel);
        }
        if (simulate->parsed()) return do_simulate(sim);
        return do_evaluate(eval);
    } catch (const nucs::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nucs::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nucs::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
