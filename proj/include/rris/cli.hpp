#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rris/dataset.hpp"
#include "rris/evaluation.hpp"
#include "rris/gradcheck.hpp"
#include "rris/lexicon.hpp"
#include "rris/metrics.hpp"
#include "rris/refseg.hpp"

// The `rris` tool. run() takes its streams as arguments so tests can drive
// it in-process.

namespace rris::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInputError = 2, kGenerationFailed = 3 };

struct RunConfig {
    std::string input;
    std::string output;
    std::string predictions;
    std::string lexicon;
    std::string model_config;
    std::uint64_t seed = 0;
    std::string mode = "val";
    std::size_t negatives_per_ref = 10;
    std::vector<double> thresholds = kDefaultThresholds;
    bool json = false;
    bool verbose = false;
    bool no_absolute_positions = false;
    std::size_t train_steps = 0;
    double learning_rate = 0.1;
    std::size_t samples = 100;
    bool corrupt_gradient = false;
};

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::generation_exhausted:
        case ErrorCode::no_absent_category:
            return kGenerationFailed;
        default:
            return kInputError;
    }
}

namespace detail {

inline void require_input(const std::string& path, const char* what) {
    if (path.empty()) throw Error(ErrorCode::invalid_argument, std::string("--") + what + " is required");
    if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::io_error, "cannot read " + path);
}

inline void require_output_dir(const std::string& path) {
    if (path.empty()) return;
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        throw Error(ErrorCode::io_error, "output directory " + parent.string() + " does not exist");
}

inline Lexicons lexicons_for(const RunConfig& cfg) {
    Lexicons lex = cfg.lexicon.empty() ? Lexicons::defaults() : load_lexicon(cfg.lexicon);
    return cfg.no_absolute_positions ? lex.without_absolute_positions() : lex;
}

inline refseg::ModelConfig model_config_for(const RunConfig& cfg) {
    if (cfg.model_config.empty()) {
        refseg::ModelConfig c;
        c.seed = cfg.seed;
        return c;
    }
    require_input(cfg.model_config, "model-config");
    return refseg::config_from_json(parse_json(read_file(cfg.model_config), cfg.model_config));
}

inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.output.empty())
        out << text;
    else
        write_file(cfg.output, text);
}

}  // namespace detail

inline int cmd_build(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::require_input(cfg.input, "input");
    if (cfg.output.empty()) throw Error(ErrorCode::invalid_argument, "--output is required");
    detail::require_output_dir(cfg.output);
    BuildOptions opts;
    opts.mode = build_mode_from_string(cfg.mode);
    opts.seed = cfg.seed;
    opts.negatives_per_ref = cfg.negatives_per_ref;
    opts.lexicons = cfg.lexicon.empty() ? Lexicons::defaults() : load_lexicon(cfg.lexicon);
    opts.no_absolute_positions = cfg.no_absolute_positions;

    const RobustDataset ds = load_annotations(cfg.input);
    if (cfg.verbose) err << "loaded " << ds.references.size() << " references from " << cfg.input << "\n";
    const RobustDataset built = build_robust_split(ds, opts);
    serialize(built, cfg.output);

    std::map<std::string, std::size_t> counts;
    for (auto s : kStrategyCycle) counts[std::string(to_string(s))] = 0;
    std::size_t total = 0;
    for (const auto& r : built.references)
        for (const auto& n : r.negatives) {
            ++counts[std::string(to_string(n.strategy))];
            ++total;
        }
    if (cfg.json) {
        out << nlohmann::json({{"references", built.references.size()}, {"negatives", total}, {"strategies", counts}}).dump(2)
            << "\n";
    } else {
        for (auto s : kStrategyCycle) {
            const std::string name(to_string(s));
            out << name << std::string(18 - name.size(), ' ') << counts[name] << "\n";
        }
        out << "total" << std::string(13, ' ') << total << "\n";
    }
    return kOk;
}

inline int cmd_stats(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    detail::require_input(cfg.input, "input");
    const DatasetStats stats = compute_stats(load_annotations(cfg.input));
    std::string text;
    if (cfg.json) {
        nlohmann::json j;
        for (const auto& [name, s] : stats.splits)
            j[name] = {{"references", s.reference_count},
                       {"positives_per_reference", s.positives_per_reference},
                       {"negatives_per_reference", s.negatives_per_reference},
                       {"sentences_per_reference", s.sentences_per_reference}};
        text = j.dump(2) + "\n";
    } else {
        char line[128];
        std::snprintf(line, sizeof line, "%-6s %10s %10s %10s %10s\n", "split", "refs", "pos/ref", "neg/ref", "sent/ref");
        text += line;
        for (const auto& [name, s] : stats.splits) {
            std::snprintf(line, sizeof line, "%-6s %10zu %10.2f %10.2f %10.2f\n", name.c_str(), s.reference_count,
                          s.positives_per_reference, s.negatives_per_reference, s.sentences_per_reference);
            text += line;
        }
    }
    detail::emit(cfg, out, text);
    return kOk;
}

inline int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::require_input(cfg.input, "input");
    detail::require_input(cfg.predictions, "predictions");
    detail::require_output_dir(cfg.output);
    const RobustDataset ds = load_annotations(cfg.input);
    const EvalJoin join = join_predictions(ds, load_predictions(cfg.predictions));
    if (!join.complete()) {
        for (const auto& m : join.missing) err << "missing prediction: " << m << "\n";
        for (const auto& p : join.problems) err << p << "\n";
        return kInputError;
    }
    const MetricReport report = aggregate_report(join.references, cfg.thresholds);
    if (!cfg.output.empty()) write_file(cfg.output, report_json(report));
    out << (cfg.json ? report_json(report) : report_table(report));
    return kOk;
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::require_input(cfg.input, "input");
    const RobustDataset ds = load_annotations(cfg.input);
    const auto failures = validate_dataset(ds, detail::lexicons_for(cfg));
    std::size_t checked = 0;
    for (const auto& r : ds.references) checked += r.negatives.size();
    for (const auto& f : failures)
        err << "ref " << f.ref_id << " negative " << f.negative_index << " \"" << f.text << "\": " << f.reason << "\n";
    if (cfg.json)
        out << nlohmann::json({{"checked", checked}, {"failures", failures.size()}, {"passed", failures.empty()}}).dump(2)
            << "\n";
    else
        out << (failures.empty() ? "ok" : "FAILED") << ": " << checked << " negatives checked, " << failures.size()
            << " failures\n";
    return failures.empty() ? kOk : kInputError;
}

inline int cmd_demo_model(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::require_output_dir(cfg.output);
    const refseg::ModelConfig mc = detail::model_config_for(cfg);
    auto params = refseg::init_params(mc);
    const auto batch = refseg::synthetic_batch(mc, 2, 32, cfg.seed);
    const auto trace = refseg::run_model(mc, params, batch[0].image, batch[0].tokens);
    if (cfg.verbose)
        err << "parameters " << refseg::parameter_count(params) << ", worst attention row error "
            << refseg::max_attention_row_error(trace) << "\n";
    nlohmann::json j = refseg::to_json(trace);
    j["attention_row_error"] = refseg::max_attention_row_error(trace);
    if (cfg.train_steps > 0) j["train_losses"] = refseg::train_demo(mc, params, batch, cfg.train_steps, cfg.learning_rate);
    detail::emit(cfg, out, j.dump(cfg.json ? 2 : -1) + "\n");
    return kOk;
}

inline int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const refseg::ModelConfig mc = detail::model_config_for(cfg);
    const auto params = refseg::init_params(mc);
    const std::vector<refseg::Sample> batch = {refseg::synthetic_batch(mc, 1, 32, cfg.seed).front()};
    auto loss = [&](const refseg::ToyModelParams<Tensor>& p) { return refseg::batch_loss(mc, p, batch); };
    auto gradient = [&](const refseg::ToyModelParams<Tensor>& p) {
        auto g = refseg::loss_and_gradient(mc, p, batch).second;
        // Debug aid: a small relative bias plus offset that any sound check must catch.
        if (cfg.corrupt_gradient)
            for_each_param(g, [](const std::string&, Tensor& t) {
                for (auto& v : t.data()) v = v * 1.01 + 1e-6;
            });
        return g;
    };
    GradCheckOptions opts;
    opts.sample_size = cfg.samples;
    opts.seed = cfg.seed;
    const auto report = grad_check(params, loss, gradient, opts);
    if (cfg.verbose)
        for (const auto& e : report.entries)
            err << e.name << "[" << e.index << "] analytic " << e.analytic << " numeric " << e.numeric << "\n";
    if (cfg.json) {
        out << nlohmann::json({{"samples", report.entries.size()},
                               {"parameters", report.parameter_count},
                               {"max_relative_error", report.max_relative_error},
                               {"tolerance", opts.tolerance},
                               {"passed", report.passed}})
                   .dump(2)
            << "\n";
    } else {
        char line[160];
        std::snprintf(line, sizeof line, "%s: max relative error %.3e over %zu of %zu parameters (tol %.0e)\n",
                      report.passed ? "pass" : "FAIL", report.max_relative_error, report.entries.size(),
                      report.parameter_count, opts.tolerance);
        out << line;
    }
    return report.passed ? kOk : kCheckFailed;
}

/// Runs the untrained toy model over every (reference, sentence) pair on
/// images synthesized from the ground truth. Output feeds `eval`.
inline std::vector<Prediction> synthetic_predictions(const RobustDataset& ds, const refseg::ModelConfig& mc,
                                                     std::uint64_t seed) {
    const auto params = refseg::init_params(mc);
    std::vector<Prediction> preds;
    for (const auto& r : ds.references) {
        Rng rng(sub_seed(seed, static_cast<std::uint64_t>(r.ref_id)));
        const Tensor image = refseg::synthetic_image(rle_decode(r.gt_rle), mc.image_channels, rng);
        auto predict = [&](const std::string& text, bool negative, std::size_t id) {
            const auto prompt = refseg::text_prompt_concat({text}, mc.max_tokens);
            const auto tokens = refseg::encode_tokens(prompt.text, mc.vocab_size, mc.max_tokens);
            const auto trace = refseg::run_model(mc, params, image, tokens);
            const BinaryMask m = refseg::predict_mask(trace);
            preds.push_back({r.ref_id, id, negative, m.area() == 0 ? std::nullopt : std::optional(rle_encode(m))});
        };
        for (std::size_t i = 0; i < r.sentences.size(); ++i) predict(r.sentences[i], false, i);
        for (std::size_t i = 0; i < r.negatives.size(); ++i) predict(r.negatives[i].text, true, i);
    }
    return preds;
}

inline int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    detail::require_input(cfg.input, "input");
    detail::require_output_dir(cfg.output);
    const auto preds = synthetic_predictions(load_annotations(cfg.input), detail::model_config_for(cfg), cfg.seed);
    detail::emit(cfg, out, to_json(preds).dump(cfg.json ? 2 : -1) + "\n");
    return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Robust referring segmentation toolkit: negative generation, robust metrics, toy model checks", "rris"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_flag("--json", cfg.json, "Machine-readable output");
        sub->add_flag("-v,--verbose", cfg.verbose, "Progress on stderr");
        sub->add_option("--seed", cfg.seed, "Master seed (default 0)");
    };
    auto* build = app.add_subcommand("build", "Generate negative sentences for every reference");
    build->add_option("-i,--input", cfg.input, "Annotations JSON")->required();
    build->add_option("-o,--output", cfg.output, "Robust dataset JSON")->required();
    build->add_option("--mode", cfg.mode, "train: one negative per positive; val: --negatives-per-ref each")
        ->check(CLI::IsMember({"train", "val"}));
    build->add_option("--negatives-per-ref", cfg.negatives_per_ref, "Negatives per reference in val mode");
    build->add_option("--lexicon", cfg.lexicon, "Lexicon file overriding built-in sections");
    build->add_flag("--no-absolute-positions", cfg.no_absolute_positions, "Drop absolute position words");

    auto* stats = app.add_subcommand("stats", "Per-split sentence statistics");
    stats->add_option("-i,--input", cfg.input, "Dataset JSON")->required();
    stats->add_option("-o,--output", cfg.output, "Write to file instead of stdout");

    auto* eval = app.add_subcommand("eval", "Robust metrics for a predictions file");
    eval->add_option("-i,--input", cfg.input, "Robust dataset JSON")->required();
    eval->add_option("-p,--predictions", cfg.predictions, "Predictions JSON")->required();
    eval->add_option("-o,--output", cfg.output, "Write the metric report JSON here");
    eval->add_option("--thresholds", cfg.thresholds, "Precision thresholds")->delimiter(',');

    auto* validate = app.add_subcommand("validate", "Re-check every negative of a built dataset");
    validate->add_option("-i,--input", cfg.input, "Robust dataset JSON")->required();
    validate->add_option("--lexicon", cfg.lexicon, "Lexicon file used for the build");
    validate->add_flag("--no-absolute-positions", cfg.no_absolute_positions, "Lexicon without absolute positions");

    auto* demo = app.add_subcommand("demo-model", "Forward trace of the toy model on synthetic input");
    demo->add_option("--model-config", cfg.model_config, "Model config JSON");
    demo->add_option("-o,--output", cfg.output, "Trace JSON path (default stdout)");
    demo->add_option("--train-steps", cfg.train_steps, "Also run this many gradient-descent steps");
    demo->add_option("--learning-rate", cfg.learning_rate, "Step size for --train-steps");

    auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the toy model gradient");
    gc->add_option("--model-config", cfg.model_config, "Model config JSON");
    gc->add_option("--samples", cfg.samples, "Parameters to probe")->check(CLI::PositiveNumber);
    gc->add_flag("--corrupt-gradient", cfg.corrupt_gradient, "Perturb the analytic gradient (must fail)");

    auto* predict = app.add_subcommand("predict", "Toy-model predictions for every sentence of a dataset");
    predict->add_option("-i,--input", cfg.input, "Robust dataset JSON")->required();
    predict->add_option("--model-config", cfg.model_config, "Model config JSON");
    predict->add_option("-o,--output", cfg.output, "Predictions JSON path (default stdout)");

    for (auto* sub : {build, stats, eval, validate, demo, gc, predict}) common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (build->parsed()) return cmd_build(cfg, out, err);
        if (stats->parsed()) return cmd_stats(cfg, out, err);
        if (eval->parsed()) return cmd_eval(cfg, out, err);
        if (validate->parsed()) return cmd_validate(cfg, out, err);
        if (demo->parsed()) return cmd_demo_model(cfg, out, err);
        if (gc->parsed()) return cmd_gradcheck(cfg, out, err);
        if (predict->parsed()) return cmd_predict(cfg, out, err);
    } catch (const Error& e) {
        err << "rris: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "rris: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace rris::cli
