#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "marlsim/nets.hpp"
#include "marlsim/wrappers.hpp"

namespace marlsim {

enum class Algo { None = 0, Basic = 1, TabularQ = 2, A2C = 3, PPO = 4 };
enum class Side { Red = 0, Blue = 1 };

Algo algo_from_string(const std::string& name);  // throws ConfigError
const char* algo_name(Algo a);
const char* side_name(Side s);
bool algo_learnable(Algo a);

struct Hyperparams {
    // policy-gradient learners
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double step_size = 3e-4;
    int rollout_len = 2048;
    int minibatches = 4;
    int epochs = 4;
    int hidden = 64;
    bool normalize_advantage = true;  // clipped-surrogate updates only
    // tabular Q
    double q_alpha = 0.1;
    double q_epsilon = 1.0;
    double q_epsilon_min = 0.05;
    double q_epsilon_decay = 0.995;

    void validate() const;  // throws ConfigError
    bool operator==(const Hyperparams&) const = default;
};

struct Transition {
    std::vector<double> obs;
    std::vector<int> action;  // flat multi-index, as returned by act()
    double reward = 0.0;
    std::vector<double> next_obs;
    bool terminal = false;
};

// Encoding bounds a checkpoint is tied to; loading against a scenario with
// different bounds is a VersionMismatch.
struct ScenarioBounds {
    int max_nodes = 0;
    int max_credentials = 0;
    int property_width = 0;
    int port_count = 0;
    int vuln_count = 0;
    int node_count = 0;

    static ScenarioBounds of(const Scenario& s);
    bool operator==(const ScenarioBounds&) const = default;
};

class AgentPolicy {
public:
    virtual ~AgentPolicy() = default;
    virtual std::vector<int> act(const std::vector<double>& obs, bool explore) = 0;
    virtual void observe(const Transition& t) { (void)t; }
    virtual void end_episode() {}
    // Flushes any buffered learning data at the end of a training run.
    virtual void finish_training() {}
    virtual void reseed(std::uint64_t seed) { (void)seed; }
    // Valid-action-backed policies (basic, tabular Q) query the environment
    // they play in; pure function approximators ignore this.
    virtual void bind_env(BattleEnv* env) { (void)env; }
    // Independent copy for parallel evaluation; clones never share state.
    virtual std::unique_ptr<AgentPolicy> clone() const = 0;
    virtual Algo algo() const = 0;
    virtual Side side() const = 0;
};

struct LossComponents {
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    double total = 0.0;
};

// On-policy experience for one update, stored as flat arrays.
struct Rollout {
    int obs_dim = 0;
    int num_heads = 0;
    std::vector<double> obs;              // n x obs_dim
    std::vector<int> actions;             // n x num_heads
    std::vector<double> rewards;          // n
    std::vector<std::uint8_t> terminals;  // n
    std::vector<double> values;           // n, V(s_t) under behavior params
    std::vector<double> log_probs;        // n, behavior log-prob of actions
    double bootstrap_value = 0.0;         // V after the last step (0 if terminal)

    int size() const { return static_cast<int>(rewards.size()); }
    void clear();
};

// Generalized advantage estimation; returns[t] = advantages[t] + values[t].
void compute_gae(const Rollout& r, double gamma, double lambda,
                 std::vector<double>& advantages, std::vector<double>& returns);

class BasicPolicy final : public AgentPolicy {
public:
    BasicPolicy(Side side, std::uint64_t seed) : side_(side), rng_(seed) {}

    std::vector<int> act(const std::vector<double>& obs, bool explore) override;
    void reseed(std::uint64_t seed) override { rng_.seed(seed); }
    void bind_env(BattleEnv* env) override { env_ = env; }
    std::unique_ptr<AgentPolicy> clone() const override { return std::make_unique<BasicPolicy>(*this); }
    Algo algo() const override { return Algo::Basic; }
    Side side() const override { return side_; }

private:
    Side side_;
    std::mt19937_64 rng_;
    BattleEnv* env_ = nullptr;
};

class TabularQPolicy final : public AgentPolicy {
public:
    TabularQPolicy(Side side, const Scenario& scenario, const Hyperparams& hp,
                   std::uint64_t seed);

    std::vector<int> act(const std::vector<double>& obs, bool explore) override;
    void observe(const Transition& t) override;
    void end_episode() override;
    void reseed(std::uint64_t seed) override { rng_.seed(seed); }
    void bind_env(BattleEnv* env) override { env_ = env; }
    std::unique_ptr<AgentPolicy> clone() const override { return std::make_unique<TabularQPolicy>(*this); }
    Algo algo() const override { return Algo::TabularQ; }
    Side side() const override { return side_; }

    // Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)); absent
    // entries read as 0.
    void q_update(std::uint64_t key, std::int64_t action, double reward,
                  std::uint64_t next_key);
    void q_update_terminal(std::uint64_t key, std::int64_t action, double reward);
    double q_value(std::uint64_t key, std::int64_t action) const;
    double max_q(std::uint64_t key) const;

    std::uint64_t obs_key(const std::vector<double>& obs) const;
    std::int64_t flat_index(const std::vector<int>& action) const;

    double epsilon() const { return epsilon_; }
    void set_epsilon(double e) { epsilon_ = e; }
    const std::map<std::uint64_t, std::map<std::int64_t, double>>& table() const { return q_; }
    void set_entry(std::uint64_t key, std::int64_t action, double value);
    const Hyperparams& hyperparams() const { return hp_; }
    const ScenarioBounds& bounds() const { return bounds_; }

private:
    Side side_;
    Hyperparams hp_;
    ScenarioBounds bounds_{};
    std::vector<int> dims_;
    std::int64_t flat_count_ = 0;
    int max_nodes_ = 0;
    int port_count_ = 0;
    double epsilon_;
    std::map<std::uint64_t, std::map<std::int64_t, double>> q_;
    std::mt19937_64 rng_;
    BattleEnv* env_ = nullptr;
};

// Advantage actor-critic and clipped-surrogate learners over the shared
// policy-value network; the algorithm tag selects the update rule.
class PolicyGradientPolicy final : public AgentPolicy {
public:
    PolicyGradientPolicy(Algo algo, Side side, const Scenario& scenario,
                         const Hyperparams& hp, std::uint64_t seed);

    std::vector<int> act(const std::vector<double>& obs, bool explore) override;
    void observe(const Transition& t) override;
    void finish_training() override;
    void reseed(std::uint64_t seed) override { rng_.seed(seed); }
    std::unique_ptr<AgentPolicy> clone() const override {
        return std::make_unique<PolicyGradientPolicy>(*this);
    }
    Algo algo() const override { return algo_; }
    Side side() const override { return side_; }

    // One full update from a complete rollout (the training path). Throws
    // NonFiniteLoss and restores the pre-update parameters on any non-finite
    // intermediate.
    LossComponents update_from_rollout(const Rollout& r);
    // Loss (and optionally gradient) of the current parameters on a rollout
    // treated as a single batch; pure, parameters untouched. This is the
    // finite-difference oracle surface.
    LossComponents loss_and_grad(const Rollout& r, std::vector<double>* grad) const;

    PolicyValueNet& net() { return net_; }
    const PolicyValueNet& net() const { return net_; }
    Adam& optimizer() { return opt_; }
    const Adam& optimizer() const { return opt_; }
    Hyperparams& hyperparams() { return hp_; }
    const Hyperparams& hyperparams() const { return hp_; }
    const ScenarioBounds& bounds() const { return bounds_; }
    const LossComponents& last_loss() const { return last_loss_; }
    int update_count() const { return update_count_; }

private:
    Algo algo_;
    Side side_;
    Hyperparams hp_;
    ScenarioBounds bounds_{};
    PolicyValueNet net_;
    Adam opt_;
    std::mt19937_64 rng_;
    Rollout buf_;
    std::vector<double> last_next_obs_;
    bool last_terminal_ = false;
    std::vector<double> pending_obs_;
    double pending_value_ = 0.0;
    double pending_logp_ = 0.0;
    bool pending_set_ = false;
    LossComponents last_loss_{};
    int update_count_ = 0;

    void value_and_logp(const std::vector<double>& obs, const std::vector<int>& action,
                        double& value, double& logp) const;
    LossComponents batch_step(const double* obs, const int* actions, const double* advantages,
                              const double* returns, const double* old_logp, int n,
                              std::vector<double>* grad_out) const;
    void flush(double bootstrap_value);
};

// Convenience wrappers matching the two update rules by name.
LossComponents a2c_update(PolicyGradientPolicy& agent, const Rollout& r);
LossComponents ppo_update(PolicyGradientPolicy& agent, const Rollout& r);

std::unique_ptr<AgentPolicy> make_policy(Algo algo, Side side, const Scenario& scenario,
                                         const Hyperparams& hp, std::uint64_t seed);

// Versioned binary checkpoint ("MRLN"): algorithm tag, side, scenario
// encoding bounds, parameters and optimizer state, FNV-1a checksum.
void save_model(const AgentPolicy& policy, const std::string& path);
std::unique_ptr<AgentPolicy> load_model(const std::string& path, const Scenario& scenario);

}  // namespace marlsim
