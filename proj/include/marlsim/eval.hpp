#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marlsim/marl.hpp"

namespace marlsim {

struct EvalConfig {
    Scenario scenario;
    std::string scenario_name = "toyctf";
    std::string red_source = "basic";  // "none" | "basic" | checkpoint path
    std::string blue_source = "none";
    int episodes = 25;
    int max_episode_len = 2000;
    double availability_threshold = 0.6;
    double availability_penalty = -5000.0;
    InvalidActionMode invalid_mode{};
    bool no_reset = false;
    bool stop_on_full_ownership = false;
    std::uint64_t seed = 0;
    bool parallel = false;

    void validate() const;  // throws ConfigError
    EnvConfig env_config(std::uint64_t base_seed) const;
};

struct Aggregate {
    double mean = 0.0;
    std::optional<double> stddev;         // set when n >= 2
    std::optional<double> ci_half_width;  // 1.96 * stddev / sqrt(n)

    double stddev_value() const;         // throws InsufficientData when unset
    double ci_half_width_value() const;  // throws InsufficientData when unset
};

// mean / sample standard deviation / normal-approximation 95% CI half-width.
// Throws InsufficientData when values is empty; with one value only the mean
// is available.
Aggregate aggregate(const std::vector<double>& values);

struct EvalEpisodeRecord {
    int episode = 0;
    int length = 0;
    double red_reward = 0.0;
    double blue_reward = 0.0;
};

struct EvalReport {
    std::vector<EvalEpisodeRecord> episodes;
    Aggregate red_reward;
    Aggregate blue_reward;
    Aggregate length;
    EvalConfig config;
};

// Runs the configured matchup with exploration disabled and no learning.
// Deterministic given the seed; the parallel flag changes scheduling only,
// never results.
EvalReport evaluate(const EvalConfig& config);

std::string report_csv(const EvalReport& report);
std::string report_json(const EvalReport& report);
// Writes report.csv and report.json under out_dir (always both).
void write_report_files(const std::string& out_dir, const EvalReport& report);

}  // namespace marlsim
