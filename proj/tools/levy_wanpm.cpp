#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wanpm/error.hpp"
#include "wanpm/experiment.hpp"

namespace {

struct CommonArgs {
    std::string experiment;
    std::string preset;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "runs";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--experiment", args.experiment, "Experiment id");
    cmd->add_option("--preset", args.preset, "Scale preset")->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--config", args.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "Random seed");
    cmd->add_option("--out", args.out, "Output directory");
    cmd->add_option("overrides", args.overrides, "key=value overrides (dotted keys)");
}

wanpm::RunConfig resolve(const CommonArgs& args) {
    std::optional<std::filesystem::path> file;
    if (!args.config.empty()) file = args.config;
    return wanpm::resolve_config(args.experiment, args.preset, file, args.seed, args.overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weak adversarial neural pushforward solver for fractional Fokker-Planck equations"};
    app.require_subcommand(1);

    CommonArgs train_args, sim_args, eval_args;
    std::string checkpoint, particles, learned, report_dir = "runs";

    auto* train = app.add_subcommand("train", "Train the pushforward map against the plane-wave bank");
    add_common(train, train_args);
    auto* simulate = app.add_subcommand("simulate", "Run the particle benchmark");
    add_common(simulate, sim_args);
    auto* evaluate = app.add_subcommand("evaluate", "Compare a trained model with particle snapshots");
    add_common(evaluate, eval_args);
    evaluate->add_option("--checkpoint", checkpoint, "Directory written by train");
    evaluate->add_option("--particles", particles, "Directory written by simulate")->required();
    evaluate->add_option("--learned", learned, "Snapshot CSV used in place of a checkpoint");
    auto* report = app.add_subcommand("report", "Aggregate evaluate outputs against thresholds");
    report->add_option("dir", report_dir, "Directory holding evaluate outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train) return wanpm::cmd_train(resolve(train_args), train_args.out);
        if (*simulate) return wanpm::cmd_simulate(resolve(sim_args), sim_args.out);
        if (*evaluate) {
            std::optional<std::filesystem::path> ckpt, learned_csv;
            if (!checkpoint.empty()) ckpt = checkpoint;
            if (!learned.empty()) learned_csv = learned;
            return wanpm::cmd_evaluate(resolve(eval_args), ckpt, particles, learned_csv, eval_args.out);
        }
        if (*report) return wanpm::cmd_report(report_dir);
    } catch (const wanpm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const wanpm::DomainError& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return 2;
    } catch (const wanpm::ContractError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const wanpm::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 1;
    } catch (const wanpm::SimulationError& e) {
        std::cerr << "simulation failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
