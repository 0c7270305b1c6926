#include "movac/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace movac {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct Cursor {
    std::string path;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(path + ":" + std::to_string(line) + ": " + msg);
    }
};

double to_double(const Cursor& at, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        at.fail("expected a number, got '" + v + "'");
    }
}

long to_long(const Cursor& at, const std::string& v) {
    const double x = to_double(at, v);
    if (x != std::floor(x)) at.fail("expected an integer, got '" + v + "'");
    return static_cast<long>(x);
}

std::uint64_t to_seed(const Cursor& at, const std::string& v) {
    try {
        std::size_t used = 0;
        const std::uint64_t x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        at.fail("expected an unsigned integer, got '" + v + "'");
    }
}

ScheduleKind to_schedule_kind(const Cursor& at, const std::string& v) {
    if (v == "constant") return ScheduleKind::kConstant;
    if (v == "inverse-power") return ScheduleKind::kInversePower;
    at.fail("schedule kind must be 'constant' or 'inverse-power', got '" + v + "'");
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text, const std::string& path_for_errors) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    Cursor at{path_for_errors, 0};

    while (std::getline(in, raw)) {
        ++at.line;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') at.fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "run" && section != "env" && section != "train")
                at.fail("unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) at.fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) at.fail("empty key");
        if (value.empty()) at.fail("empty value for '" + key + "'");

        if (section == "run") {
            if (key == "name") cfg.name = value;
            else if (key == "out") cfg.out_dir = value;
            else if (key == "seed") cfg.train.seed = to_seed(at, value);
            else if (key == "workers") cfg.train.workers = static_cast<int>(to_long(at, value));
            else if (key == "log") cfg.log_level = value;
            else at.fail("unknown key '" + key + "' in [run]");
        } else if (section == "env") {
            if (key == "name") cfg.train.env_name = value;
            else cfg.train.env_options[key] = value;
        } else if (section == "train") {
            if (key == "gamma") cfg.train.gamma = to_double(at, value);
            else if (key == "lambda") cfg.train.lambda = to_double(at, value);
            else if (key == "eps_clip") cfg.train.eps_clip = to_double(at, value);
            else if (key == "eps_aols") cfg.train.eps_aols = to_double(at, value);
            else if (key == "horizon") cfg.train.horizon = static_cast<int>(to_long(at, value));
            else if (key == "n_envs") cfg.train.n_envs = static_cast<int>(to_long(at, value));
            else if (key == "epochs") cfg.train.epochs = static_cast<int>(to_long(at, value));
            else if (key == "minibatch") cfg.train.minibatch = static_cast<int>(to_long(at, value));
            else if (key == "total_episodes") cfg.train.total_episodes = to_long(at, value);
            else if (key == "actor_schedule")
                cfg.train.actor_schedule.kind = to_schedule_kind(at, value);
            else if (key == "actor_lr") cfg.train.actor_schedule.base = to_double(at, value);
            else if (key == "actor_power") cfg.train.actor_schedule.power = to_double(at, value);
            else if (key == "critic_schedule")
                cfg.train.critic_schedule.kind = to_schedule_kind(at, value);
            else if (key == "critic_lr") cfg.train.critic_schedule.base = to_double(at, value);
            else if (key == "critic_power") cfg.train.critic_schedule.power = to_double(at, value);
            else if (key == "hidden_actor") cfg.train.hidden_actor = static_cast<int>(to_long(at, value));
            else if (key == "hidden_critic") cfg.train.hidden_critic = static_cast<int>(to_long(at, value));
            else if (key == "aols_max_iters") cfg.train.aols_max_iters = static_cast<int>(to_long(at, value));
            else at.fail("unknown key '" + key + "' in [train]");
        } else {
            at.fail("key '" + key + "' outside any section");
        }
    }

    validate_train_config(cfg.train);
    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config_text(buf.str(), path);
}

void validate_train_config(const TrainConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (cfg.gamma < 0.0 || cfg.gamma > 1.0) fail("gamma must be in [0, 1]");
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0) fail("lambda must be in [0, 1]");
    if (cfg.eps_clip <= 0.0) fail("eps_clip must be positive");
    if (cfg.eps_aols <= 0.0) fail("eps_aols must be positive");
    if (cfg.horizon < 1) fail("horizon must be at least 1");
    if (cfg.n_envs < 1) fail("n_envs must be at least 1");
    if (cfg.epochs < 1) fail("epochs must be at least 1");
    if (cfg.minibatch < 1) fail("minibatch must be at least 1");
    if (cfg.total_episodes < 0) fail("total_episodes must be non-negative");
    if (cfg.hidden_actor < 1 || cfg.hidden_critic < 1) fail("hidden widths must be positive");
    if (cfg.aols_max_iters < 1) fail("aols_max_iters must be at least 1");
    if (cfg.workers < 0) fail("workers must be non-negative");
    if (!validate_two_timescale(cfg.actor_schedule, cfg.critic_schedule))
        fail("stepsize schedules violate the two-timescale condition "
             "(actor must update slower than the critic)");
}

}  // namespace movac
