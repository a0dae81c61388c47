#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "marlsim/simcore.hpp"

namespace marlsim {

// Reward shaping applied when an invalid attacker action is redirected to a
// random valid one.
struct InvalidActionMode {
    enum class Kind { Penalty = 0, PassThrough = 1, ZeroReward = 2 };
    Kind kind = Kind::ZeroReward;
    double penalty = -1.0;  // Penalty mode only; must be negative

    static InvalidActionMode penalty_mode(double amount = -1.0);
    static InvalidActionMode pass_through() { return {Kind::PassThrough, 0.0}; }
    static InvalidActionMode zero_reward() { return {Kind::ZeroReward, 0.0}; }

    bool operator==(const InvalidActionMode&) const = default;
};

// Flattened integer-vector encoding of structured actions. Dimensions are
// fixed by the scenario's encoding bounds so model shapes do not depend on
// runtime discoveries.
class FlatActionSpace {
public:
    explicit FlatActionSpace(const Scenario& scenario);

    // attacker: [action_type, source, target, vulnerability, port, credential]
    const std::vector<int>& attacker_dims() const { return attacker_dims_; }
    // defender: [action_type, node, port, direction]
    const std::vector<int>& defender_dims() const { return defender_dims_; }

    std::vector<int> encode(const AttackerAction& a) const;
    std::vector<int> encode(const DefenderAction& a) const;
    AttackerAction decode_attacker(std::span<const int> flat) const;
    DefenderAction decode_defender(std::span<const int> flat) const;

    std::int64_t attacker_flat_count() const;
    std::int64_t defender_flat_count() const;

private:
    std::vector<int> attacker_dims_;
    std::vector<int> defender_dims_;
};

struct AttackerObservation {
    // last step
    int newly_discovered_count = 0;
    bool lateral_move_succeeded = false;
    int newly_leaked_credential_count = 0;
    // episode
    int discovered_count = 0;
    int owned_count = 0;
    std::vector<std::uint8_t> discovered_properties;  // kPropertyWidth
    std::vector<std::uint8_t> known_credentials;      // max_credentials

    std::vector<double> pack() const;
    static int vector_length(const Scenario& s);
};

struct DefenderObservation {
    // All fields mirror EnvState at observation time; rows are padded to
    // max_nodes.
    std::vector<std::uint8_t> infected;       // max_nodes
    std::vector<std::uint8_t> firewall_in;    // max_nodes x port_count
    std::vector<std::uint8_t> firewall_out;   // max_nodes x port_count
    std::vector<std::uint8_t> services;       // max_nodes x port_count

    std::vector<double> pack() const;
    static int vector_length(const Scenario& s);
};

struct EnvConfig {
    InvalidActionMode invalid_mode{};
    double availability_threshold = 0.6;
    double availability_penalty = -5000.0;
    bool no_reset = false;  // violation penalizes but does not end the episode
    int max_episode_len = 2000;
    bool stop_on_full_ownership = false;
    double defender_invalid_penalty = -1.0;
    std::uint64_t seed = 0;
};

struct WrappedStep {
    std::vector<double> observation;
    double shaped_reward = 0.0;
    bool terminal = false;
    bool was_invalid = false;  // raw action was redirected / no-op'd
};

// Shared environment core behind the two wrappers: one EnvState, the reset
// generation counter, the redirect RNG streams and the per-timestep
// bookkeeping that links the defender's reward to the attacker's.
class BattleEnv {
public:
    BattleEnv(const Scenario& scenario, EnvConfig config);

    const Scenario& scenario() const { return *scenario_; }
    const EnvConfig& config() const { return config_; }
    const FlatActionSpace& space() const { return space_; }
    const EnvState& state() const { return state_; }

    std::uint64_t generation() const { return generation_; }
    std::uint64_t real_reset_count() const { return real_resets_; }
    // Episode seeds follow base_seed + episode_index, so one env stepping
    // through episodes matches independent per-episode envs exactly.
    void real_reset();

    WrappedStep attacker_step(std::span<const int> flat);
    WrappedStep defender_step(std::span<const int> flat);
    void tick_and_advance();

    bool episode_done() const { return episode_done_; }
    int timestep() const { return timestep_; }
    AttackerObservation attacker_observation() const;
    DefenderObservation defender_observation() const;
    double last_attacker_shaped_reward() const { return last_red_shaped_; }

    // Per-episode diagnostics, cleared on real_reset.
    int availability_violations() const { return violations_; }
    int attacker_invalid_count() const { return red_invalid_; }
    int defender_invalid_count() const { return blue_invalid_; }

private:
    const Scenario* scenario_;
    EnvConfig config_;
    FlatActionSpace space_;
    EnvState state_;
    std::uint64_t generation_ = 0;
    std::uint64_t real_resets_ = 0;
    std::mt19937_64 red_redirect_;
    std::mt19937_64 blue_redirect_;

    bool episode_done_ = false;
    int timestep_ = 0;
    double last_red_shaped_ = 0.0;
    bool penalty_armed_ = true;
    int violations_ = 0;
    int red_invalid_ = 0;
    int blue_invalid_ = 0;
    // last attacker step effects, for the observation's last-step section
    int last_discovered_ = 0;
    int last_leaked_ = 0;
    bool last_lateral_ = false;

    friend class AttackerWrapper;
    friend class DefenderWrapper;
};

// Agent-facing adapters. Both wrappers share one BattleEnv; reset calls are
// coordinated through the env's generation counter so the underlying reset
// runs exactly once per episode transition no matter which side resets first.
class AttackerWrapper {
public:
    explicit AttackerWrapper(std::shared_ptr<BattleEnv> env) : env_(std::move(env)) {}

    std::vector<double> reset();
    WrappedStep step(std::span<const int> flat);
    std::vector<double> observation() const { return env_->attacker_observation().pack(); }
    BattleEnv& env() { return *env_; }

private:
    std::shared_ptr<BattleEnv> env_;
    std::uint64_t last_seen_generation_ = 0;
};

class DefenderWrapper {
public:
    explicit DefenderWrapper(std::shared_ptr<BattleEnv> env) : env_(std::move(env)) {}

    std::vector<double> reset();
    WrappedStep step(std::span<const int> flat);
    std::vector<double> observation() const { return env_->defender_observation().pack(); }
    BattleEnv& env() { return *env_; }

private:
    std::shared_ptr<BattleEnv> env_;
    std::uint64_t last_seen_generation_ = 0;
};

}  // namespace marlsim
