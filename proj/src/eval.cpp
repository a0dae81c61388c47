#include "marlsim/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "marlsim/common.hpp"
#include "marlsim/version.hpp"

namespace marlsim {

void EvalConfig::validate() const {
    if (scenario.nodes.empty()) throw ConfigError("evaluation config has no scenario");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (max_episode_len < 1) throw ConfigError("max_episode_len must be >= 1");
    if (!(availability_threshold > 0.0 && availability_threshold <= 1.0))
        throw ConfigError("availability threshold must lie in (0, 1]");
    if (!(availability_penalty < 0.0))
        throw ConfigError("availability penalty must be negative");
    if (red_source == "none" && blue_source == "none")
        throw ConfigError("at least one side must act");
}

EnvConfig EvalConfig::env_config(std::uint64_t base_seed) const {
    EnvConfig ec;
    ec.invalid_mode = invalid_mode;
    ec.availability_threshold = availability_threshold;
    ec.availability_penalty = availability_penalty;
    ec.no_reset = no_reset;
    ec.max_episode_len = max_episode_len;
    ec.stop_on_full_ownership = stop_on_full_ownership;
    ec.seed = base_seed;
    return ec;
}

double Aggregate::stddev_value() const {
    if (!stddev) throw InsufficientData("standard deviation needs at least 2 values");
    return *stddev;
}

double Aggregate::ci_half_width_value() const {
    if (!ci_half_width) throw InsufficientData("confidence interval needs at least 2 values");
    return *ci_half_width;
}

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) throw InsufficientData("aggregate of an empty sample");
    Aggregate a;
    const auto n = static_cast<double>(values.size());
    for (double v : values) a.mean += v;
    a.mean /= n;
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - a.mean) * (v - a.mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        a.stddev = sd;
        a.ci_half_width = 1.96 * sd / std::sqrt(n);
    }
    return a;
}

namespace {

std::unique_ptr<AgentPolicy> make_side(const std::string& source, Side side,
                                       const Scenario& scenario) {
    if (source == "none") return nullptr;
    if (source == "basic") return std::make_unique<BasicPolicy>(side, 0);
    auto policy = load_model(source, scenario);
    if (policy->side() != side)
        throw ConfigError("checkpoint '" + source + "' holds a " + side_name(policy->side()) +
                          "-side model, used on the " + side_name(side) + " side");
    return policy;
}

EvalEpisodeRecord run_episode(BattleRunner& runner, int episode_index) {
    runner.begin_episode();
    EvalEpisodeRecord rec;
    rec.episode = episode_index;
    while (true) {
        const StepPairRecord s = runner.step_pair(false);
        rec.red_reward += s.red_reward;
        rec.blue_reward += s.blue_reward;
        ++rec.length;
        if (s.terminal) break;
    }
    runner.finish_episode(false, true);
    return rec;
}

}  // namespace

EvalReport evaluate(const EvalConfig& config) {
    config.validate();
    EvalReport report;
    report.config = config;
    report.episodes.resize(config.episodes);

    auto red_proto = make_side(config.red_source, Side::Red, config.scenario);
    auto blue_proto = make_side(config.blue_source, Side::Blue, config.scenario);

    if (!config.parallel) {
        BattleRunner runner(config.scenario, config.env_config(config.seed), red_proto.get(),
                            blue_proto.get());
        for (int e = 0; e < config.episodes; ++e) report.episodes[e] = run_episode(runner, e);
    } else {
#pragma omp parallel for schedule(dynamic)
        for (int e = 0; e < config.episodes; ++e) {
            auto red = red_proto ? red_proto->clone() : nullptr;
            auto blue = blue_proto ? blue_proto->clone() : nullptr;
            BattleRunner runner(config.scenario, config.env_config(config.seed + e), red.get(),
                                blue.get());
            report.episodes[e] = run_episode(runner, e);
        }
    }

    std::vector<double> reds, blues, lengths;
    reds.reserve(report.episodes.size());
    blues.reserve(report.episodes.size());
    lengths.reserve(report.episodes.size());
    for (const auto& e : report.episodes) {
        reds.push_back(e.red_reward);
        blues.push_back(e.blue_reward);
        lengths.push_back(static_cast<double>(e.length));
    }
    report.red_reward = aggregate(reds);
    report.blue_reward = aggregate(blues);
    report.length = aggregate(lengths);
    return report;
}

std::string report_csv(const EvalReport& report) {
    std::string out = "episode,length,red_reward,blue_reward\n";
    char line[128];
    for (const auto& e : report.episodes) {
        std::snprintf(line, sizeof(line), "%d,%d,%.10g,%.10g\n", e.episode, e.length,
                      e.red_reward, e.blue_reward);
        out += line;
    }
    return out;
}

namespace {

const char* invalid_mode_name(const InvalidActionMode& m) {
    switch (m.kind) {
    case InvalidActionMode::Kind::Penalty: return "penalty";
    case InvalidActionMode::Kind::PassThrough: return "passthrough";
    case InvalidActionMode::Kind::ZeroReward: return "zero";
    }
    return "?";
}

nlohmann::ordered_json aggregate_json(const Aggregate& a) {
    nlohmann::ordered_json j;
    j["mean"] = a.mean;
    if (a.stddev) j["stddev"] = *a.stddev;
    if (a.ci_half_width) j["ci_half_width"] = *a.ci_half_width;
    return j;
}

}  // namespace

std::string report_json(const EvalReport& report) {
    const EvalConfig& c = report.config;
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["build_id"] = kBuildId;
    j["ci_method"] = "normal approximation, z=1.96";
    nlohmann::ordered_json cfg;
    cfg["scenario"] = c.scenario_name;
    cfg["red"] = c.red_source;
    cfg["blue"] = c.blue_source;
    cfg["episodes"] = c.episodes;
    cfg["max_episode_len"] = c.max_episode_len;
    cfg["availability_threshold"] = c.availability_threshold;
    cfg["availability_penalty"] = c.availability_penalty;
    cfg["invalid_mode"] = invalid_mode_name(c.invalid_mode);
    if (c.invalid_mode.kind == InvalidActionMode::Kind::Penalty)
        cfg["invalid_penalty"] = c.invalid_mode.penalty;
    cfg["no_reset"] = c.no_reset;
    cfg["stop_on_full_ownership"] = c.stop_on_full_ownership;
    cfg["seed"] = c.seed;
    cfg["parallel"] = c.parallel;
    j["config"] = cfg;
    nlohmann::ordered_json eps = nlohmann::ordered_json::array();
    for (const auto& e : report.episodes) {
        nlohmann::ordered_json row;
        row["episode"] = e.episode;
        row["length"] = e.length;
        row["red_reward"] = e.red_reward;
        row["blue_reward"] = e.blue_reward;
        eps.push_back(row);
    }
    j["episodes"] = eps;
    nlohmann::ordered_json agg;
    agg["red_reward"] = aggregate_json(report.red_reward);
    agg["blue_reward"] = aggregate_json(report.blue_reward);
    agg["length"] = aggregate_json(report.length);
    j["aggregates"] = agg;
    return j.dump(2) + "\n";
}

void write_report_files(const std::string& out_dir, const EvalReport& report) {
    for (const char* name : {"report.csv", "report.json"}) {
        const std::string path = out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        const std::string text =
            std::string(name) == "report.csv" ? report_csv(report) : report_json(report);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw IoError("failed writing '" + path + "'");
    }
}

}  // namespace marlsim
