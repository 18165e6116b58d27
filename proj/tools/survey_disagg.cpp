#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "disagg/config.hpp"
#include "disagg/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spatio-temporal disaggregation of survey-based areal proportion estimates"};
    app.require_subcommand(1);

    std::string config_path, out_dir, model = "proposed";
    std::optional<std::uint64_t> seed;
    std::optional<int> chains;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "configuration file");
        if (needs_config) c->required();
        sub->add_option("--out-dir", out_dir, "output directory");
        std::uint64_t* seed_slot = nullptr;
        (void)seed_slot;
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { seed = v; }, "RNG seed override");
        sub->add_option_function<int>(
            "--chains", [&](int v) { chains = v; }, "number of chains");
    };

    auto* sim = app.add_subcommand("simulate", "generate a synthetic survey dataset");
    add_common(sim, true);

    auto* fit = app.add_subcommand("fit", "fit the disaggregation model");
    add_common(fit, true);
    fit->add_option("--model", model, "proposed | standard-binomial")
        ->check(CLI::IsMember({"proposed", "standard-binomial"}));

    std::string draws_path, supports_path, out_path, predictions_path, truth_path;
    std::string targets, estimates_path, label = "proposed";

    auto* predict = app.add_subcommand("predict", "aggregate posterior draws onto supports");
    predict->add_option("--draws", draws_path, "draws file")->required();
    predict->add_option("--supports", supports_path, "support spec CSV")->required();
    predict->add_option("--out", out_path, "output CSV")->required();

    auto* validate = app.add_subcommand("validate", "score predictions against truth");
    validate->add_option("--predictions", predictions_path, "predictions CSV")->required();
    validate->add_option("--truth", truth_path, "truth CSV (support_name,truth)")->required();
    validate->add_option("--out", out_path, "output CSV")->required();
    validate->add_option("--label", label, "model label in the report");

    auto* summarize = app.add_subcommand("summarize", "export density and histogram tables");
    summarize->add_option("--draws", draws_path, "draws file")->required();
    summarize->add_option("--targets", targets, "comma list: pi:<tract>:<year>, "
                                                "avg5:<tract>:<end_year>, param:<name>")
        ->required();
    summarize->add_option("--out-dir", out_dir, "output directory")->required();
    summarize->add_option("--estimates", estimates_path,
                          "estimate CSV for the truncated-normal reference");

    CLI11_PARSE(app, argc, argv);

    disagg::cli::CommonOverrides ov;
    if (!out_dir.empty()) ov.out_dir = out_dir;
    ov.seed = seed;
    ov.chains = chains;
    ov.model = model;

    try {
        if (app.got_subcommand(sim))
            return disagg::cli::cmd_simulate(disagg::Config::parse_file(config_path), ov);
        if (app.got_subcommand(fit))
            return disagg::cli::cmd_fit(disagg::Config::parse_file(config_path), ov);
        if (app.got_subcommand(predict))
            return disagg::cli::cmd_predict(draws_path, supports_path, out_path);
        if (app.got_subcommand(validate))
            return disagg::cli::cmd_validate(predictions_path, truth_path, out_path, label);
        if (app.got_subcommand(summarize))
            return disagg::cli::cmd_summarize(draws_path, targets, out_dir, estimates_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return disagg::cli::kExitInput;
    }
    return disagg::cli::kExitInput;
}
