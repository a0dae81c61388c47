#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "marlsim/agents.hpp"
#include "marlsim/wrappers.hpp"

namespace marlsim {

struct TrainConfig {
    Scenario scenario;
    std::string scenario_name = "toyctf";  // for manifests; builtin name or file path
    std::int64_t total_timesteps = 300000;
    int max_episode_len = 2000;
    double availability_threshold = 0.6;
    double availability_penalty = -5000.0;
    InvalidActionMode invalid_mode{};
    bool no_reset = false;
    bool stop_on_full_ownership = false;
    Algo red_algo = Algo::None;
    Algo blue_algo = Algo::None;
    Hyperparams hyper{};
    std::uint64_t seed = 0;
    std::string red_checkpoint;   // empty: do not write
    std::string blue_checkpoint;

    void validate() const;  // throws ConfigError
    EnvConfig env_config() const;
};

struct EpisodeRecord {
    std::int64_t episode = 0;
    int length = 0;
    double red_reward = 0.0;
    double blue_reward = 0.0;
    int violations = 0;
    int red_invalid = 0;
    int blue_invalid = 0;
};

struct TrainingCurve {
    std::vector<EpisodeRecord> episodes;
    std::string to_csv() const;
};

struct StepPairRecord {
    double red_reward = 0.0;
    double blue_reward = 0.0;
    bool red_invalid = false;
    bool blue_invalid = false;
    bool terminal = false;
};

// Drives one environment with up to two policies under the strict
// red-then-blue-then-tick turn order. Used by both training (learn=true:
// exploration on, transitions delivered) and evaluation (learn=false).
class BattleRunner {
public:
    BattleRunner(const Scenario& scenario, const EnvConfig& config, AgentPolicy* red,
                 AgentPolicy* blue);

    // Coordinated reset plus per-episode policy reseeding (seeds derive from
    // the env base seed and episode index, so sequential and parallel
    // evaluation see identical streams).
    void begin_episode();
    StepPairRecord step_pair(bool learn);
    // Completes the two sides' pending transitions. `terminal` is false only
    // when a training run is cut mid-episode by the timestep budget.
    void finish_episode(bool learn, bool terminal);

    BattleEnv& env() { return *env_; }
    const BattleEnv& env() const { return *env_; }

private:
    std::shared_ptr<BattleEnv> env_;
    AttackerWrapper red_wrapper_;
    DefenderWrapper blue_wrapper_;
    AgentPolicy* red_;
    AgentPolicy* blue_;

    struct Pending {
        std::vector<double> obs;
        std::vector<int> action;
        double reward = 0.0;
        bool set = false;
    };
    Pending pending_red_, pending_blue_;
};

struct TrainResult {
    std::unique_ptr<AgentPolicy> red;
    std::unique_ptr<AgentPolicy> blue;
    TrainingCurve curve;
};

// At most one learnable side; the other none or basic. A learnable blue with
// red=none trains against the basic red agent.
TrainResult train_single(const TrainConfig& config);
// Both sides learnable, sharing one episode stream.
TrainResult train_joint(const TrainConfig& config);
// Dispatches on how many sides are learnable.
TrainResult train(const TrainConfig& config);

void write_curve_csv(const std::string& path, const TrainingCurve& curve);
void write_manifest(const std::string& path, const TrainConfig& config);

}  // namespace marlsim
