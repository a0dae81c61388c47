#include "marlsim/marl.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "marlsim/common.hpp"
#include "marlsim/version.hpp"

namespace marlsim {

void TrainConfig::validate() const {
    if (scenario.nodes.empty()) throw ConfigError("training config has no scenario");
    if (!(availability_threshold > 0.0 && availability_threshold <= 1.0))
        throw ConfigError("availability threshold must lie in (0, 1]");
    if (max_episode_len < 1) throw ConfigError("max_episode_len must be >= 1");
    if (total_timesteps < max_episode_len)
        throw ConfigError("total_timesteps must be >= max_episode_len");
    if (!(availability_penalty < 0.0))
        throw ConfigError("availability penalty must be negative");
    if (invalid_mode.kind == InvalidActionMode::Kind::Penalty && !(invalid_mode.penalty < 0.0))
        throw ConfigError("invalid-action penalty must be negative");
    hyper.validate();
}

EnvConfig TrainConfig::env_config() const {
    EnvConfig ec;
    ec.invalid_mode = invalid_mode;
    ec.availability_threshold = availability_threshold;
    ec.availability_penalty = availability_penalty;
    ec.no_reset = no_reset;
    ec.max_episode_len = max_episode_len;
    ec.stop_on_full_ownership = stop_on_full_ownership;
    ec.seed = seed;
    return ec;
}

std::string TrainingCurve::to_csv() const {
    std::string out = "episode,length,red_reward,blue_reward,violations,red_invalid,blue_invalid\n";
    char line[224];
    for (const EpisodeRecord& e : episodes) {
        std::snprintf(line, sizeof(line), "%lld,%d,%.10g,%.10g,%d,%d,%d\n",
                      static_cast<long long>(e.episode), e.length, e.red_reward, e.blue_reward,
                      e.violations, e.red_invalid, e.blue_invalid);
        out += line;
    }
    return out;
}

BattleRunner::BattleRunner(const Scenario& scenario, const EnvConfig& config, AgentPolicy* red,
                           AgentPolicy* blue)
    : env_(std::make_shared<BattleEnv>(scenario, config)),
      red_wrapper_(env_),
      blue_wrapper_(env_),
      red_(red),
      blue_(blue) {
    if (red_ != nullptr) red_->bind_env(env_.get());
    if (blue_ != nullptr) blue_->bind_env(env_.get());
}

void BattleRunner::begin_episode() {
    red_wrapper_.reset();
    blue_wrapper_.reset();
    pending_red_.set = false;
    pending_blue_.set = false;
    const std::uint64_t ep_base = env_->config().seed + (env_->real_reset_count() - 1);
    if (red_ != nullptr) red_->reseed(derive_seed(ep_base, 0, SeedTag::RedPolicy));
    if (blue_ != nullptr) blue_->reseed(derive_seed(ep_base, 0, SeedTag::BluePolicy));
}

StepPairRecord BattleRunner::step_pair(bool learn) {
    StepPairRecord rec;
    if (red_ != nullptr) {
        auto obs = red_wrapper_.observation();
        if (learn && pending_red_.set) {
            red_->observe({std::move(pending_red_.obs), std::move(pending_red_.action),
                           pending_red_.reward, obs, false});
        }
        pending_red_.set = false;
        auto action = red_->act(obs, learn);
        auto result = red_wrapper_.step(action);
        rec.red_reward = result.shaped_reward;
        rec.red_invalid = result.was_invalid;
        if (learn) {
            pending_red_ = {std::move(obs), std::move(action), result.shaped_reward, true};
        }
    }
    if (blue_ != nullptr) {
        auto obs = blue_wrapper_.observation();  // post-red state, same timestep
        if (learn && pending_blue_.set) {
            blue_->observe({std::move(pending_blue_.obs), std::move(pending_blue_.action),
                            pending_blue_.reward, obs, false});
        }
        pending_blue_.set = false;
        auto action = blue_->act(obs, learn);
        auto result = blue_wrapper_.step(action);
        rec.blue_reward = result.shaped_reward;
        rec.blue_invalid = result.was_invalid;
        if (learn) {
            pending_blue_ = {std::move(obs), std::move(action), result.shaped_reward, true};
        }
    }
    env_->tick_and_advance();
    rec.terminal = env_->episode_done();
    return rec;
}

void BattleRunner::finish_episode(bool learn, bool terminal) {
    if (learn) {
        if (red_ != nullptr && pending_red_.set) {
            red_->observe({std::move(pending_red_.obs), std::move(pending_red_.action),
                           pending_red_.reward, red_wrapper_.observation(), terminal});
        }
        if (blue_ != nullptr && pending_blue_.set) {
            blue_->observe({std::move(pending_blue_.obs), std::move(pending_blue_.action),
                            pending_blue_.reward, blue_wrapper_.observation(), terminal});
        }
        if (terminal) {
            if (red_ != nullptr) red_->end_episode();
            if (blue_ != nullptr) blue_->end_episode();
        }
    }
    pending_red_.set = false;
    pending_blue_.set = false;
}

namespace {

TrainResult run_training(const TrainConfig& config, Algo red_algo, Algo blue_algo) {
    TrainResult result;
    if (red_algo != Algo::None)
        result.red = make_policy(red_algo, Side::Red, config.scenario, config.hyper,
                                 derive_seed(config.seed, 0, SeedTag::RedPolicy));
    if (blue_algo != Algo::None)
        result.blue = make_policy(blue_algo, Side::Blue, config.scenario, config.hyper,
                                  derive_seed(config.seed, 0, SeedTag::BluePolicy));

    BattleRunner runner(config.scenario, config.env_config(), result.red.get(),
                        result.blue.get());

    std::int64_t steps = 0;
    std::int64_t episode = 0;
    while (steps < config.total_timesteps) {
        runner.begin_episode();
        EpisodeRecord rec;
        rec.episode = episode;
        bool terminal = false;
        while (steps < config.total_timesteps) {
            const StepPairRecord s = runner.step_pair(true);
            rec.red_reward += s.red_reward;
            rec.blue_reward += s.blue_reward;
            ++rec.length;
            ++steps;
            if (s.terminal) {
                terminal = true;
                break;
            }
        }
        runner.finish_episode(true, terminal);
        rec.violations = runner.env().availability_violations();
        rec.red_invalid = runner.env().attacker_invalid_count();
        rec.blue_invalid = runner.env().defender_invalid_count();
        result.curve.episodes.push_back(rec);
        ++episode;
    }

    if (result.red != nullptr) result.red->finish_training();
    if (result.blue != nullptr) result.blue->finish_training();

    if (!config.red_checkpoint.empty() && result.red != nullptr &&
        algo_learnable(result.red->algo()))
        save_model(*result.red, config.red_checkpoint);
    if (!config.blue_checkpoint.empty() && result.blue != nullptr &&
        algo_learnable(result.blue->algo()))
        save_model(*result.blue, config.blue_checkpoint);
    return result;
}

}  // namespace

TrainResult train_single(const TrainConfig& config) {
    config.validate();
    if (algo_learnable(config.red_algo) && algo_learnable(config.blue_algo))
        throw ConfigError("both sides are learnable; use joint training");
    Algo red = config.red_algo;
    // The defender's opposing stream: a lone learnable blue trains against
    // the basic red agent.
    if (algo_learnable(config.blue_algo) && red == Algo::None) red = Algo::Basic;
    return run_training(config, red, config.blue_algo);
}

TrainResult train_joint(const TrainConfig& config) {
    config.validate();
    if (!algo_learnable(config.red_algo) || !algo_learnable(config.blue_algo))
        throw ConfigError("joint training requires learnable algorithms on both sides");
    return run_training(config, config.red_algo, config.blue_algo);
}

TrainResult train(const TrainConfig& config) {
    if (algo_learnable(config.red_algo) && algo_learnable(config.blue_algo))
        return train_joint(config);
    return train_single(config);
}

void write_curve_csv(const std::string& path, const TrainingCurve& curve) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const std::string text = curve.to_csv();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
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

}  // namespace

void write_manifest(const std::string& path, const TrainConfig& config) {
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["build_id"] = kBuildId;
    j["scenario"] = config.scenario_name;
    j["red"] = algo_name(config.red_algo);
    j["blue"] = algo_name(config.blue_algo);
    j["total_timesteps"] = config.total_timesteps;
    j["max_episode_len"] = config.max_episode_len;
    j["availability_threshold"] = config.availability_threshold;
    j["availability_penalty"] = config.availability_penalty;
    j["invalid_mode"] = invalid_mode_name(config.invalid_mode);
    if (config.invalid_mode.kind == InvalidActionMode::Kind::Penalty)
        j["invalid_penalty"] = config.invalid_mode.penalty;
    j["no_reset"] = config.no_reset;
    j["stop_on_full_ownership"] = config.stop_on_full_ownership;
    j["seed"] = config.seed;
    j["red_checkpoint"] = config.red_checkpoint;
    j["blue_checkpoint"] = config.blue_checkpoint;
    nlohmann::ordered_json hp;
    hp["gamma"] = config.hyper.gamma;
    hp["gae_lambda"] = config.hyper.gae_lambda;
    hp["clip_eps"] = config.hyper.clip_eps;
    hp["entropy_coef"] = config.hyper.entropy_coef;
    hp["value_coef"] = config.hyper.value_coef;
    hp["step_size"] = config.hyper.step_size;
    hp["rollout_len"] = config.hyper.rollout_len;
    hp["minibatches"] = config.hyper.minibatches;
    hp["epochs"] = config.hyper.epochs;
    hp["hidden"] = config.hyper.hidden;
    hp["normalize_advantage"] = config.hyper.normalize_advantage;
    hp["q_alpha"] = config.hyper.q_alpha;
    hp["q_epsilon"] = config.hyper.q_epsilon;
    hp["q_epsilon_min"] = config.hyper.q_epsilon_min;
    hp["q_epsilon_decay"] = config.hyper.q_epsilon_decay;
    j["hyperparams"] = hp;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    const std::string text = j.dump(2) + "\n";
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace marlsim
