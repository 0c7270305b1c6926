#include <CLI11.hpp>

#include "movac/cli_commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"multi-objective vector actor-critic toolkit"};
    app.require_subcommand(1);

    movac::cli::TrainArgs train_args;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0;
    std::string out_flag;
    auto* train = app.add_subcommand("train", "train a policy from a run config");
    train->add_option("--config", train_args.config_path, "run config path")->required();
    auto* seed_opt = train->add_option("--seed", seed_flag, "override the config seed");
    auto* workers_opt =
        train->add_option("--workers", workers_flag, "collection threads (0 = single-worker)");
    auto* out_opt = train->add_option("--out", out_flag, "output directory override");

    movac::cli::EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint deterministically");
    eval->add_option("checkpoint", eval_args.checkpoint_path, "checkpoint path")->required();
    eval->add_option("--env", eval_args.env_name, "environment name (default: from checkpoint)");
    eval->add_option("--episodes", eval_args.episodes, "evaluation episodes");
    eval->add_option("--out", eval_args.out_dir, "directory for radar.json");
    eval->add_option("--seed", eval_args.seed, "evaluation seed");

    movac::cli::AolsArgs aols_args;
    auto* aols = app.add_subcommand("aols", "run optimistic linear support on a value set");
    aols->add_option("values", aols_args.input_path, "JSON list of value vectors")->required();
    aols->add_option("--eps", aols_args.eps, "improvement threshold");
    aols->add_option("--out", aols_args.out_dir, "directory for undominated_set.json");

    movac::cli::ExportArgs export_args;
    auto* exp = app.add_subcommand("export", "extract plot-ready CSV columns from a run");
    exp->add_option("run_dir", export_args.run_dir, "run output directory")->required();
    exp->add_option("what", export_args.what, "delta-r | w-matrix | returns")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : movac::cli::kExitBadInput;
    }

    if (train->parsed()) {
        if (*seed_opt) train_args.seed = seed_flag;
        if (*workers_opt) train_args.workers = workers_flag;
        if (*out_opt) train_args.out_dir = out_flag;
        return movac::cli::cmd_train(train_args);
    }
    if (eval->parsed()) return movac::cli::cmd_eval(eval_args);
    if (aols->parsed()) return movac::cli::cmd_aols(aols_args);
    if (exp->parsed()) return movac::cli::cmd_export(export_args);
    return movac::cli::kExitBadInput;
}
