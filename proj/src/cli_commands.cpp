#include "movac/cli_commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "movac/log.hpp"
#include "movac/trainer.hpp"

namespace movac::cli {

namespace fs = std::filesystem;

int cmd_train(const TrainArgs& args) {
    RunConfig run;
    try {
        run = parse_run_config(args.config_path);
        if (args.seed) run.train.seed = *args.seed;
        if (args.workers) run.train.workers = *args.workers;
        if (args.out_dir) run.out_dir = *args.out_dir;
        validate_train_config(run.train);
    } catch (const ConfigError& e) {
        log::error(e.what());
        return kExitBadInput;
    }

    try {
        Trainer trainer(run.train);
        log::info("training '" + run.name + "' on " + run.train.env_name + " with " +
                  std::to_string(trainer.objectives()) + " objectives");
        TrainResult result = trainer.train(run.out_dir, [](long batch, double delta) {
            log::info("batch " + std::to_string(batch) + "  front improvement " +
                      std::to_string(delta));
        });
        log::info("finished after " + std::to_string(result.batches_run) + " batches" +
                  (result.stopped_early ? " (converged)" : ""));
        return kExitOk;
    } catch (const ConfigError& e) {
        log::error(e.what());
        return kExitBadInput;
    } catch (const Error& e) {
        // numeric or environment fault mid-run; the last checkpoint on disk
        // stays valid
        log::error(e.what());
        return kExitNumeric;
    }
}

int cmd_eval(const EvalArgs& args) {
    TrainingCheckpoint ckpt;
    try {
        ckpt = load_checkpoint(args.checkpoint_path);
    } catch (const CheckpointError& e) {
        log::error(e.what());
        return kExitCheckpoint;
    }

    std::unique_ptr<MomdpEnv> env;
    try {
        const std::string name = args.env_name.empty() ? ckpt.env_name : args.env_name;
        env = make_env(name, args.env_name.empty() ? ckpt.env_options : EnvOptions{});
    } catch (const ConfigError& e) {
        log::error(e.what());
        return kExitBadInput;
    }

    EvalReport rep;
    try {
        rep = Trainer::evaluate(ckpt, *env, args.episodes, args.seed);
    } catch (const CheckpointError& e) {
        log::error(e.what());
        return kExitCheckpoint;
    }

    std::printf("%-16s %14s %14s\n", "objective", "mean", "std");
    for (std::size_t j = 0; j < rep.objectives.size(); ++j)
        std::printf("%-16s %14.6f %14.6f\n", rep.objectives[j].c_str(), rep.means[j], rep.stds[j]);

    if (args.episodes <= 0) {
        log::error("zero evaluation episodes requested");
        return kExitBadInput;
    }

    nlohmann::json radar;
    radar["objectives"] = rep.objectives;
    radar["values"] = std::vector<double>(rep.normalized.data(),
                                          rep.normalized.data() + rep.normalized.size());
    radar["raw"] = nlohmann::json::array();
    for (Eigen::Index j = 0; j < rep.means.size(); ++j)
        radar["raw"].push_back({rep.means[j], rep.stds[j]});
    fs::create_directories(args.out_dir);
    const std::string path = (fs::path(args.out_dir) / "radar.json").string();
    std::ofstream out(path, std::ios::trunc);
    out << radar.dump(2) << "\n";
    if (!out) {
        log::error("cannot write " + path);
        return kExitBadInput;
    }
    return kExitOk;
}

int cmd_aols(const AolsArgs& args) {
    UndominatedSet input;
    try {
        std::ifstream in(args.input_path);
        if (!in) throw ConfigError("cannot open value-set JSON: " + args.input_path);
        std::stringstream buf;
        buf << in.rdbuf();
        input = undominated_set_from_json(buf.str());
        if (input.members.empty()) throw ConfigError("value-set JSON contains no vectors");
    } catch (const nlohmann::json::exception& e) {
        log::error(std::string("malformed JSON: ") + e.what());
        return kExitBadInput;
    } catch (const ConfigError& e) {
        log::error(e.what());
        return kExitBadInput;
    }

    if (args.eps <= 0.0) {
        log::error("eps must be positive");
        return kExitBadInput;
    }

    std::vector<Vector> candidates;
    for (const auto& m : input.members) candidates.push_back(m.value);
    AolsResult res;
    try {
        res = aols(lookup_evaluator(candidates), static_cast<int>(candidates.front().size()),
                   args.eps);
    } catch (const Error& e) {
        log::error(e.what());
        return kExitNumeric;
    }

    auto print_vec = [](const Vector& v) {
        std::string s = "(";
        for (Eigen::Index i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + std::to_string(v[i]);
        return s + ")";
    };
    std::printf("undominated set: %zu members\n", res.us.members.size());
    for (const auto& m : res.us.members) std::printf("  %s\n", print_vec(m.value).c_str());
    std::printf("marginal weights: %zu\n", res.marginal_weights.size());
    for (const auto& w : res.marginal_weights) std::printf("  %s\n", print_vec(w).c_str());
    std::printf("delta_max: %.12g\n", res.delta_max);

    fs::create_directories(args.out_dir);
    const std::string path = (fs::path(args.out_dir) / "undominated_set.json").string();
    std::ofstream out(path, std::ios::trunc);
    out << undominated_set_to_json(res.us) << "\n";
    if (!out) {
        log::error("cannot write " + path);
        return kExitBadInput;
    }
    return kExitOk;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace

int cmd_export(const ExportArgs& args) {
    const bool known =
        args.what == "delta-r" || args.what == "w-matrix" || args.what == "returns";
    if (!known) {
        log::error("unknown export kind '" + args.what +
                   "' (valid kinds: delta-r, w-matrix, returns)");
        return kExitBadInput;
    }

    const std::string metrics = (fs::path(args.run_dir) / "metrics.csv").string();
    std::ifstream in(metrics);
    if (!in) {
        log::error("no metrics CSV found at " + metrics);
        return kExitBadInput;
    }

    std::string header_line;
    if (!std::getline(in, header_line)) {
        log::error("metrics CSV is empty: " + metrics);
        return kExitBadInput;
    }
    const auto header = split_csv_line(header_line);

    auto want = [&](const std::string& col) {
        if (col == "batch" || col == "sequence") return true;
        if (args.what == "delta-r") return col == "delta_r";
        if (args.what == "w-matrix") return col.rfind("w_", 0) == 0;
        return col.rfind("ret_mean_", 0) == 0;
    };
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (want(header[c])) keep.push_back(c);

    const std::string out_path =
        (fs::path(args.run_dir) / ("export_" + args.what + ".csv")).string();
    std::ofstream out(out_path, std::ios::trunc);
    for (std::size_t k = 0; k < keep.size(); ++k)
        out << (k ? "," : "") << header[keep[k]];
    out << "\n";

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        for (std::size_t k = 0; k < keep.size(); ++k)
            out << (k ? "," : "") << (keep[k] < cells.size() ? cells[keep[k]] : "");
        out << "\n";
    }
    if (!out) {
        log::error("cannot write " + out_path);
        return kExitBadInput;
    }
    log::info("wrote " + out_path);
    return kExitOk;
}

}  // namespace movac::cli
