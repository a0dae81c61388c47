#include "marlsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "marlsim/common.hpp"

namespace marlsim {

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool loss_finite(const LossComponents& l) {
    return std::isfinite(l.policy) && std::isfinite(l.value) && std::isfinite(l.entropy) &&
           std::isfinite(l.total);
}

}  // namespace

Algo algo_from_string(const std::string& name) {
    if (name == "none") return Algo::None;
    if (name == "basic") return Algo::Basic;
    if (name == "tabular_q") return Algo::TabularQ;
    if (name == "a2c") return Algo::A2C;
    if (name == "ppo") return Algo::PPO;
    throw ConfigError("unknown algorithm '" + name +
                      "' (expected none, basic, tabular_q, a2c, ppo)");
}

const char* algo_name(Algo a) {
    switch (a) {
    case Algo::None: return "none";
    case Algo::Basic: return "basic";
    case Algo::TabularQ: return "tabular_q";
    case Algo::A2C: return "a2c";
    case Algo::PPO: return "ppo";
    }
    return "?";
}

const char* side_name(Side s) { return s == Side::Red ? "red" : "blue"; }

bool algo_learnable(Algo a) {
    return a == Algo::TabularQ || a == Algo::A2C || a == Algo::PPO;
}

void Hyperparams::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw ConfigError("gae_lambda must lie in [0, 1]");
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip_eps must lie in (0, 1)");
    if (!(entropy_coef >= 0.0)) throw ConfigError("entropy_coef must be non-negative");
    if (!(value_coef >= 0.0)) throw ConfigError("value_coef must be non-negative");
    if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
    if (rollout_len < 1) throw ConfigError("rollout_len must be >= 1");
    if (minibatches < 1) throw ConfigError("minibatches must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (hidden < 1) throw ConfigError("hidden width must be >= 1");
    if (!(q_alpha > 0.0 && q_alpha <= 1.0)) throw ConfigError("q_alpha must lie in (0, 1]");
    if (!(q_epsilon >= 0.0 && q_epsilon <= 1.0)) throw ConfigError("q_epsilon must lie in [0, 1]");
    if (!(q_epsilon_min >= 0.0 && q_epsilon_min <= 1.0))
        throw ConfigError("q_epsilon_min must lie in [0, 1]");
    if (!(q_epsilon_decay > 0.0 && q_epsilon_decay <= 1.0))
        throw ConfigError("q_epsilon_decay must lie in (0, 1]");
}

ScenarioBounds ScenarioBounds::of(const Scenario& s) {
    return {s.max_nodes, s.max_credentials, kPropertyWidth,
            s.port_count(), s.vuln_count(), s.node_count()};
}

void Rollout::clear() {
    obs.clear();
    actions.clear();
    rewards.clear();
    terminals.clear();
    values.clear();
    log_probs.clear();
    bootstrap_value = 0.0;
}

void compute_gae(const Rollout& r, double gamma, double lambda,
                 std::vector<double>& advantages, std::vector<double>& returns) {
    const int n = r.size();
    advantages.assign(n, 0.0);
    returns.assign(n, 0.0);
    double carry = 0.0;
    for (int t = n - 1; t >= 0; --t) {
        const double nonterminal = r.terminals[t] ? 0.0 : 1.0;
        const double next_value = (t == n - 1) ? r.bootstrap_value : r.values[t + 1];
        const double delta = r.rewards[t] + gamma * next_value * nonterminal - r.values[t];
        carry = delta + gamma * lambda * nonterminal * carry;
        advantages[t] = carry;
        returns[t] = carry + r.values[t];
    }
}

// ---------------------------------------------------------------------------
// BasicPolicy
// ---------------------------------------------------------------------------

std::vector<int> BasicPolicy::act(const std::vector<double>& obs, bool explore) {
    (void)obs;
    (void)explore;  // inherently random: valid actions, uniformly
    if (env_ == nullptr) throw ConfigError("basic policy is not bound to an environment");
    if (side_ == Side::Red) {
        const auto valid = env_->state().valid_attacker_actions();
        if (valid.empty()) throw NoValidAction("attacker has no valid action");
        return env_->space().encode(valid[uniform_below(rng_, valid.size())]);
    }
    const auto valid = env_->state().valid_defender_actions();
    if (valid.empty()) throw NoValidAction("defender has no valid action");
    return env_->space().encode(valid[uniform_below(rng_, valid.size())]);
}

// ---------------------------------------------------------------------------
// TabularQPolicy
// ---------------------------------------------------------------------------

TabularQPolicy::TabularQPolicy(Side side, const Scenario& scenario, const Hyperparams& hp,
                               std::uint64_t seed)
    : side_(side), hp_(hp), bounds_(ScenarioBounds::of(scenario)), epsilon_(hp.q_epsilon),
      rng_(seed) {
    hp_.validate();
    FlatActionSpace space(scenario);
    dims_ = side == Side::Red ? space.attacker_dims() : space.defender_dims();
    flat_count_ = side == Side::Red ? space.attacker_flat_count() : space.defender_flat_count();
    max_nodes_ = scenario.max_nodes;
    port_count_ = scenario.port_count();
}

std::int64_t TabularQPolicy::flat_index(const std::vector<int>& action) const {
    if (action.size() != dims_.size()) throw OutOfRange("action arity mismatch");
    std::int64_t idx = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (action[i] < 0 || action[i] >= dims_[i]) throw OutOfRange("action component out of range");
        idx = idx * dims_[i] + action[i];
    }
    return idx;
}

std::uint64_t TabularQPolicy::obs_key(const std::vector<double>& obs) const {
    auto popcount = [&](std::size_t begin, std::size_t end) {
        std::uint64_t c = 0;
        for (std::size_t i = begin; i < end && i < obs.size(); ++i)
            if (obs[i] != 0.0) ++c;
        return c;
    };
    if (side_ == Side::Red) {
        // [last-step x3, discovered_count, owned_count, properties, credentials]
        const auto discovered = static_cast<std::uint64_t>(obs.at(3));
        const auto owned = static_cast<std::uint64_t>(obs.at(4));
        const std::uint64_t creds = popcount(5 + kPropertyWidth, obs.size());
        return (discovered << 32) | (owned << 16) | creds;
    }
    const auto n = static_cast<std::size_t>(max_nodes_);
    const auto np = static_cast<std::size_t>(max_nodes_) * port_count_;
    const std::uint64_t infected = popcount(0, n);
    const std::uint64_t allows = popcount(n, n + 2 * np);
    const std::uint64_t running = popcount(n + 2 * np, n + 3 * np);
    return (infected << 40) | (allows << 20) | running;
}

double TabularQPolicy::q_value(std::uint64_t key, std::int64_t action) const {
    auto row = q_.find(key);
    if (row == q_.end()) return 0.0;
    auto cell = row->second.find(action);
    return cell == row->second.end() ? 0.0 : cell->second;
}

double TabularQPolicy::max_q(std::uint64_t key) const {
    auto row = q_.find(key);
    if (row == q_.end()) return 0.0;
    double best = 0.0;  // some flat action is always unstored (huge space)
    bool all_stored = static_cast<std::int64_t>(row->second.size()) >= flat_count_;
    if (all_stored && !row->second.empty()) best = row->second.begin()->second;
    for (const auto& [a, v] : row->second) best = std::max(best, v);
    return best;
}

void TabularQPolicy::q_update(std::uint64_t key, std::int64_t action, double reward,
                              std::uint64_t next_key) {
    double& cell = q_[key][action];
    cell += hp_.q_alpha * (reward + hp_.gamma * max_q(next_key) - cell);
}

void TabularQPolicy::q_update_terminal(std::uint64_t key, std::int64_t action, double reward) {
    double& cell = q_[key][action];
    cell += hp_.q_alpha * (reward - cell);
}

void TabularQPolicy::set_entry(std::uint64_t key, std::int64_t action, double value) {
    q_[key][action] = value;
}

std::vector<int> TabularQPolicy::act(const std::vector<double>& obs, bool explore) {
    if (env_ == nullptr) throw ConfigError("tabular Q policy is not bound to an environment");
    const std::uint64_t key = obs_key(obs);
    if (side_ == Side::Red) {
        const auto valid = env_->state().valid_attacker_actions();
        if (valid.empty()) throw NoValidAction("attacker has no valid action");
        if (explore && uniform_unit(rng_) < epsilon_)
            return env_->space().encode(valid[uniform_below(rng_, valid.size())]);
        std::vector<int> best = env_->space().encode(valid[0]);
        double best_q = q_value(key, flat_index(best));
        for (std::size_t i = 1; i < valid.size(); ++i) {
            auto enc = env_->space().encode(valid[i]);
            const double qv = q_value(key, flat_index(enc));
            if (qv > best_q) {
                best_q = qv;
                best = std::move(enc);
            }
        }
        return best;
    }
    const auto valid = env_->state().valid_defender_actions();
    if (valid.empty()) throw NoValidAction("defender has no valid action");
    if (explore && uniform_unit(rng_) < epsilon_)
        return env_->space().encode(valid[uniform_below(rng_, valid.size())]);
    std::vector<int> best = env_->space().encode(valid[0]);
    double best_q = q_value(key, flat_index(best));
    for (std::size_t i = 1; i < valid.size(); ++i) {
        auto enc = env_->space().encode(valid[i]);
        const double qv = q_value(key, flat_index(enc));
        if (qv > best_q) {
            best_q = qv;
            best = std::move(enc);
        }
    }
    return best;
}

void TabularQPolicy::observe(const Transition& t) {
    const std::uint64_t key = obs_key(t.obs);
    const std::int64_t a = flat_index(t.action);
    if (t.terminal)
        q_update_terminal(key, a, t.reward);
    else
        q_update(key, a, t.reward, obs_key(t.next_obs));
}

void TabularQPolicy::end_episode() {
    epsilon_ = std::max(hp_.q_epsilon_min, epsilon_ * hp_.q_epsilon_decay);
}

// ---------------------------------------------------------------------------
// PolicyGradientPolicy
// ---------------------------------------------------------------------------

namespace {

NetShape shape_for(Side side, const Scenario& scenario, int hidden) {
    FlatActionSpace space(scenario);
    NetShape shape;
    shape.hidden = hidden;
    if (side == Side::Red) {
        shape.obs_dim = AttackerObservation::vector_length(scenario);
        shape.head_dims = space.attacker_dims();
    } else {
        shape.obs_dim = DefenderObservation::vector_length(scenario);
        shape.head_dims = space.defender_dims();
    }
    return shape;
}

}  // namespace

PolicyGradientPolicy::PolicyGradientPolicy(Algo algo, Side side, const Scenario& scenario,
                                           const Hyperparams& hp, std::uint64_t seed)
    : algo_(algo),
      side_(side),
      hp_(hp),
      bounds_(ScenarioBounds::of(scenario)),
      net_(shape_for(side, scenario, hp.hidden)),
      opt_(net_.param_count(), hp.step_size),
      rng_(seed) {
    if (algo != Algo::A2C && algo != Algo::PPO)
        throw ConfigError("policy-gradient agent requires a2c or ppo");
    hp_.validate();
    net_.init(splitmix64(seed ^ 0x5e71u));
    buf_.obs_dim = net_.shape().obs_dim;
    buf_.num_heads = static_cast<int>(net_.shape().head_dims.size());
}

std::vector<int> PolicyGradientPolicy::act(const std::vector<double>& obs, bool explore) {
    if (static_cast<int>(obs.size()) != net_.shape().obs_dim)
        throw OutOfRange("observation length mismatch");
    const auto f = net_.forward(obs.data(), 1);
    if (!explore) return net_.greedy_action(f, 0);
    auto action = net_.sample_action(f, 0, rng_);
    pending_obs_ = obs;
    pending_value_ = net_.value(f, 0);
    pending_logp_ = net_.action_log_prob(f, 0, action.data());
    pending_set_ = true;
    return action;
}

void PolicyGradientPolicy::value_and_logp(const std::vector<double>& obs,
                                          const std::vector<int>& action, double& value,
                                          double& logp) const {
    const auto f = net_.forward(obs.data(), 1);
    value = net_.value(f, 0);
    logp = net_.action_log_prob(f, 0, action.data());
}

void PolicyGradientPolicy::observe(const Transition& t) {
    double value, logp;
    if (pending_set_ && pending_obs_ == t.obs) {
        value = pending_value_;
        logp = pending_logp_;
    } else {
        value_and_logp(t.obs, t.action, value, logp);
    }
    pending_set_ = false;

    buf_.obs.insert(buf_.obs.end(), t.obs.begin(), t.obs.end());
    buf_.actions.insert(buf_.actions.end(), t.action.begin(), t.action.end());
    buf_.rewards.push_back(t.reward);
    buf_.terminals.push_back(t.terminal ? 1 : 0);
    buf_.values.push_back(value);
    buf_.log_probs.push_back(logp);
    last_next_obs_ = t.next_obs;
    last_terminal_ = t.terminal;

    if (buf_.size() >= hp_.rollout_len) {
        double bootstrap = 0.0;
        if (!t.terminal) {
            const auto f = net_.forward(t.next_obs.data(), 1);
            bootstrap = net_.value(f, 0);
        }
        flush(bootstrap);
    }
}

void PolicyGradientPolicy::finish_training() {
    if (buf_.size() == 0) return;
    double bootstrap = 0.0;
    if (!last_terminal_ && !last_next_obs_.empty()) {
        const auto f = net_.forward(last_next_obs_.data(), 1);
        bootstrap = net_.value(f, 0);
    }
    flush(bootstrap);
}

void PolicyGradientPolicy::flush(double bootstrap_value) {
    buf_.bootstrap_value = bootstrap_value;
    update_from_rollout(buf_);
    buf_.clear();
}

LossComponents PolicyGradientPolicy::batch_step(const double* obs, const int* actions,
                                                const double* advantages, const double* returns,
                                                const double* old_logp, int n,
                                                std::vector<double>* grad_out) const {
    const auto& shape = net_.shape();
    const int l1 = shape.total_head_dim() + 1;
    const int heads = static_cast<int>(shape.head_dims.size());
    const auto f = net_.forward(obs, n);

    LossComponents loss;
    std::vector<double> dout(static_cast<std::size_t>(n) * l1, 0.0);
    std::vector<double> lp;
    const double inv_n = 1.0 / n;
    for (int t = 0; t < n; ++t) {
        const int* at = actions + static_cast<std::size_t>(t) * heads;
        const double logp_new = net_.action_log_prob(f, t, at);
        double pg_coef;  // d(policy loss)/d(logp_t)
        if (algo_ == Algo::PPO) {
            const double ratio = std::exp(logp_new - old_logp[t]);
            const double clipped = std::clamp(ratio, 1.0 - hp_.clip_eps, 1.0 + hp_.clip_eps);
            const double s1 = ratio * advantages[t];
            const double s2 = clipped * advantages[t];
            if (s1 <= s2) {
                loss.policy -= s1 * inv_n;
                pg_coef = -advantages[t] * ratio * inv_n;
            } else {
                loss.policy -= s2 * inv_n;
                pg_coef = 0.0;  // clamp is saturated where the min picks it
            }
        } else {
            loss.policy -= advantages[t] * logp_new * inv_n;
            pg_coef = -advantages[t] * inv_n;
        }

        const double v = net_.value(f, t);
        const double verr = v - returns[t];
        loss.value += verr * verr * inv_n;
        double* drow = dout.data() + static_cast<std::size_t>(t) * l1;
        drow[l1 - 1] = hp_.value_coef * 2.0 * verr * inv_n;

        int offset = 0;
        for (int head = 0; head < heads; ++head) {
            const int k = shape.head_dims[head];
            lp.resize(k);
            net_.head_log_probs(f, t, head, lp.data());
            double h_head = 0.0;
            for (int i = 0; i < k; ++i) h_head -= std::exp(lp[i]) * lp[i];
            loss.entropy += h_head * inv_n;
            for (int i = 0; i < k; ++i) {
                const double p = std::exp(lp[i]);
                double d = pg_coef * ((i == at[head] ? 1.0 : 0.0) - p);
                d += hp_.entropy_coef * inv_n * p * (lp[i] + h_head);
                drow[offset + i] += d;
            }
            offset += k;
        }
    }
    loss.total = loss.policy + hp_.value_coef * loss.value - hp_.entropy_coef * loss.entropy;
    if (grad_out != nullptr) *grad_out = net_.backward(f, dout);
    return loss;
}

LossComponents PolicyGradientPolicy::loss_and_grad(const Rollout& r,
                                                   std::vector<double>* grad) const {
    const int n = r.size();
    if (n < 1) throw ConfigError("rollout is empty");
    std::vector<double> adv, ret;
    compute_gae(r, hp_.gamma, hp_.gae_lambda, adv, ret);
    if (algo_ == Algo::PPO && hp_.normalize_advantage && n >= 2) {
        double mean = 0.0;
        for (double a : adv) mean += a;
        mean /= n;
        double var = 0.0;
        for (double a : adv) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / (n - 1));
        for (double& a : adv) a = (a - mean) / (sd + 1e-8);
    }
    return batch_step(r.obs.data(), r.actions.data(), adv.data(), ret.data(), r.log_probs.data(),
                      n, grad);
}

LossComponents PolicyGradientPolicy::update_from_rollout(const Rollout& r) {
    const int n = r.size();
    if (n < 1) throw ConfigError("rollout is empty");
    if (static_cast<int>(r.obs.size()) != n * buf_.obs_dim ||
        static_cast<int>(r.actions.size()) != n * buf_.num_heads)
        throw ConfigError("rollout layout mismatch");

    const std::vector<double> params_backup = net_.params();
    const std::uint64_t opt_t = opt_.steps_taken();
    const std::vector<double> opt_m = opt_.m();
    const std::vector<double> opt_v = opt_.v();

    std::vector<double> adv, ret;
    compute_gae(r, hp_.gamma, hp_.gae_lambda, adv, ret);

    const int heads = buf_.num_heads;
    const int d = buf_.obs_dim;
    LossComponents loss;
    std::vector<double> grad;
    try {
        if (algo_ == Algo::A2C) {
            loss = batch_step(r.obs.data(), r.actions.data(), adv.data(), ret.data(),
                              r.log_probs.data(), n, &grad);
            if (!loss_finite(loss) || !all_finite(grad))
                throw NonFiniteLoss("non-finite a2c update");
            opt_.step(net_.params(), grad);
        } else {
            std::vector<int> order(n);
            for (int i = 0; i < n; ++i) order[i] = i;
            const int nb = std::min(hp_.minibatches, n);
            std::vector<double> mb_obs, mb_adv, mb_ret, mb_old;
            std::vector<int> mb_act;
            for (int epoch = 0; epoch < hp_.epochs; ++epoch) {
                for (int i = n - 1; i > 0; --i)
                    std::swap(order[i], order[uniform_below(rng_, static_cast<std::uint64_t>(i) + 1)]);
                for (int b = 0; b < nb; ++b) {
                    const int begin = static_cast<int>(static_cast<std::int64_t>(n) * b / nb);
                    const int end = static_cast<int>(static_cast<std::int64_t>(n) * (b + 1) / nb);
                    const int bs = end - begin;
                    mb_obs.resize(static_cast<std::size_t>(bs) * d);
                    mb_act.resize(static_cast<std::size_t>(bs) * heads);
                    mb_adv.resize(bs);
                    mb_ret.resize(bs);
                    mb_old.resize(bs);
                    for (int i = 0; i < bs; ++i) {
                        const int src = order[begin + i];
                        std::copy_n(r.obs.begin() + static_cast<std::size_t>(src) * d, d,
                                    mb_obs.begin() + static_cast<std::size_t>(i) * d);
                        std::copy_n(r.actions.begin() + static_cast<std::size_t>(src) * heads,
                                    heads, mb_act.begin() + static_cast<std::size_t>(i) * heads);
                        mb_adv[i] = adv[src];
                        mb_ret[i] = ret[src];
                        mb_old[i] = r.log_probs[src];
                    }
                    if (hp_.normalize_advantage && bs >= 2) {
                        double mean = 0.0;
                        for (double a : mb_adv) mean += a;
                        mean /= bs;
                        double var = 0.0;
                        for (double a : mb_adv) var += (a - mean) * (a - mean);
                        const double sd = std::sqrt(var / (bs - 1));
                        for (double& a : mb_adv) a = (a - mean) / (sd + 1e-8);
                    }
                    loss = batch_step(mb_obs.data(), mb_act.data(), mb_adv.data(), mb_ret.data(),
                                      mb_old.data(), bs, &grad);
                    if (!loss_finite(loss) || !all_finite(grad))
                        throw NonFiniteLoss("non-finite ppo update");
                    opt_.step(net_.params(), grad);
                }
            }
        }
    } catch (const NonFiniteLoss&) {
        net_.params() = params_backup;
        opt_.restore(opt_t, opt_m, opt_v);
        throw;
    }
    last_loss_ = loss;
    ++update_count_;
    return loss;
}

LossComponents a2c_update(PolicyGradientPolicy& agent, const Rollout& r) {
    if (agent.algo() != Algo::A2C) throw ConfigError("agent is not an a2c learner");
    return agent.update_from_rollout(r);
}

LossComponents ppo_update(PolicyGradientPolicy& agent, const Rollout& r) {
    if (agent.algo() != Algo::PPO) throw ConfigError("agent is not a ppo learner");
    return agent.update_from_rollout(r);
}

std::unique_ptr<AgentPolicy> make_policy(Algo algo, Side side, const Scenario& scenario,
                                         const Hyperparams& hp, std::uint64_t seed) {
    switch (algo) {
    case Algo::Basic: return std::make_unique<BasicPolicy>(side, seed);
    case Algo::TabularQ: return std::make_unique<TabularQPolicy>(side, scenario, hp, seed);
    case Algo::A2C:
    case Algo::PPO:
        return std::make_unique<PolicyGradientPolicy>(algo, side, scenario, hp, seed);
    case Algo::None: break;
    }
    throw ConfigError("cannot instantiate a policy for algorithm 'none'");
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'R', 'L', 'N'};
constexpr std::uint32_t kVersion = 1;

void push_u8(std::vector<unsigned char>& b, std::uint8_t v) { b.push_back(v); }
void push_u32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void push_u64(std::vector<unsigned char>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void push_i32(std::vector<unsigned char>& b, std::int32_t v) {
    push_u32(b, static_cast<std::uint32_t>(v));
}
void push_i64(std::vector<unsigned char>& b, std::int64_t v) {
    push_u64(b, static_cast<std::uint64_t>(v));
}
void push_f64(std::vector<unsigned char>& b, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    push_u64(b, bits);
}

struct Reader {
    const unsigned char* p;
    std::size_t n;
    std::size_t at = 0;

    void need(std::size_t k) const {
        if (at + k > n) throw CorruptFile("checkpoint truncated");
    }
    std::uint8_t u8() {
        need(1);
        return p[at++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[at++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[at++]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

void push_hyperparams(std::vector<unsigned char>& b, const Hyperparams& hp) {
    push_f64(b, hp.gamma);
    push_f64(b, hp.gae_lambda);
    push_f64(b, hp.clip_eps);
    push_f64(b, hp.entropy_coef);
    push_f64(b, hp.value_coef);
    push_f64(b, hp.step_size);
    push_i32(b, hp.rollout_len);
    push_i32(b, hp.minibatches);
    push_i32(b, hp.epochs);
    push_i32(b, hp.hidden);
    push_u8(b, hp.normalize_advantage ? 1 : 0);
    push_f64(b, hp.q_alpha);
    push_f64(b, hp.q_epsilon);
    push_f64(b, hp.q_epsilon_min);
    push_f64(b, hp.q_epsilon_decay);
}

Hyperparams read_hyperparams(Reader& r) {
    Hyperparams hp;
    hp.gamma = r.f64();
    hp.gae_lambda = r.f64();
    hp.clip_eps = r.f64();
    hp.entropy_coef = r.f64();
    hp.value_coef = r.f64();
    hp.step_size = r.f64();
    hp.rollout_len = r.i32();
    hp.minibatches = r.i32();
    hp.epochs = r.i32();
    hp.hidden = r.i32();
    hp.normalize_advantage = r.u8() != 0;
    hp.q_alpha = r.f64();
    hp.q_epsilon = r.f64();
    hp.q_epsilon_min = r.f64();
    hp.q_epsilon_decay = r.f64();
    return hp;
}

void push_bounds(std::vector<unsigned char>& b, const ScenarioBounds& k) {
    push_i32(b, k.max_nodes);
    push_i32(b, k.max_credentials);
    push_i32(b, k.property_width);
    push_i32(b, k.port_count);
    push_i32(b, k.vuln_count);
    push_i32(b, k.node_count);
}

void check_bounds(Reader& r, const Scenario& s) {
    const ScenarioBounds want = ScenarioBounds::of(s);
    ScenarioBounds got;
    got.max_nodes = r.i32();
    got.max_credentials = r.i32();
    got.property_width = r.i32();
    got.port_count = r.i32();
    got.vuln_count = r.i32();
    got.node_count = r.i32();
    auto fail = [](const char* field) {
        throw VersionMismatch(std::string("checkpoint was written for a scenario with a "
                                          "different ") +
                              field);
    };
    if (got.max_nodes != want.max_nodes) fail("max_nodes");
    if (got.max_credentials != want.max_credentials) fail("max_credentials");
    if (got.property_width != want.property_width) fail("property width");
    if (got.port_count != want.port_count) fail("port count");
    if (got.vuln_count != want.vuln_count) fail("vulnerability count");
    if (got.node_count != want.node_count) fail("node count");
}

}  // namespace

void save_model(const AgentPolicy& policy, const std::string& path) {
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    push_u32(buf, kVersion);
    push_u8(buf, static_cast<std::uint8_t>(policy.algo()));
    push_u8(buf, static_cast<std::uint8_t>(policy.side()));

    if (const auto* pg = dynamic_cast<const PolicyGradientPolicy*>(&policy)) {
        const auto& net = pg->net();
        push_bounds(buf, pg->bounds());
        push_hyperparams(buf, pg->hyperparams());
        push_i32(buf, net.shape().obs_dim);
        push_i32(buf, net.shape().hidden);
        push_i32(buf, static_cast<std::int32_t>(net.shape().head_dims.size()));
        for (int hd : net.shape().head_dims) push_i32(buf, hd);
        for (double p : net.params())
            if (!std::isfinite(p)) throw ConfigError("refusing to save non-finite parameters");
        push_u64(buf, net.param_count());
        for (double p : net.params()) push_f64(buf, p);
        const Adam& opt = pg->optimizer();
        push_u64(buf, opt.steps_taken());
        for (double m : opt.m()) push_f64(buf, m);
        for (double v : opt.v()) push_f64(buf, v);
    } else if (const auto* q = dynamic_cast<const TabularQPolicy*>(&policy)) {
        push_bounds(buf, q->bounds());
        push_hyperparams(buf, q->hyperparams());
        push_f64(buf, q->epsilon());
        std::uint64_t entries = 0;
        for (const auto& [key, row] : q->table()) entries += row.size();
        push_u64(buf, entries);
        for (const auto& [key, row] : q->table())
            for (const auto& [action, value] : row) {
                push_u64(buf, key);
                push_i64(buf, action);
                if (!std::isfinite(value))
                    throw ConfigError("refusing to save non-finite parameters");
                push_f64(buf, value);
            }
    } else {
        throw ConfigError(std::string("policy '") + algo_name(policy.algo()) +
                          "' has no parameters to checkpoint");
    }

    Fnv1a sum;
    sum.update(buf.data(), buf.size());
    push_u64(buf, sum.digest());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::unique_ptr<AgentPolicy> load_model(const std::string& path, const Scenario& scenario) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 4 + 4 + 2 + 8) throw CorruptFile("checkpoint truncated");
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw CorruptFile("not a checkpoint file (bad magic)");
    Fnv1a sum;
    sum.update(buf.data(), buf.size() - 8);
    Reader tail{buf.data() + buf.size() - 8, 8};
    if (sum.digest() != tail.u64()) throw CorruptFile("checkpoint checksum mismatch");

    Reader r{buf.data(), buf.size() - 8};
    r.at = 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw VersionMismatch("unsupported checkpoint version " + std::to_string(version));
    const auto algo = static_cast<Algo>(r.u8());
    const auto side = static_cast<Side>(r.u8());
    if (side != Side::Red && side != Side::Blue) throw CorruptFile("invalid side tag");

    if (algo == Algo::A2C || algo == Algo::PPO) {
        check_bounds(r, scenario);
        Hyperparams hp = read_hyperparams(r);
        const std::int32_t obs_dim = r.i32();
        const std::int32_t hidden = r.i32();
        const std::int32_t head_count = r.i32();
        std::vector<int> head_dims(head_count);
        for (auto& hd : head_dims) hd = r.i32();
        hp.hidden = hidden;
        auto agent = std::make_unique<PolicyGradientPolicy>(algo, side, scenario, hp, 0);
        const auto& shape = agent->net().shape();
        if (shape.obs_dim != obs_dim || shape.head_dims != head_dims)
            throw VersionMismatch("checkpoint network shape does not match the scenario");
        const std::uint64_t count = r.u64();
        if (count != agent->net().param_count())
            throw VersionMismatch("checkpoint parameter count does not match the scenario");
        for (std::size_t i = 0; i < count; ++i) agent->net().params()[i] = r.f64();
        const std::uint64_t opt_t = r.u64();
        std::vector<double> m(count), v(count);
        for (auto& x : m) x = r.f64();
        for (auto& x : v) x = r.f64();
        agent->optimizer().restore(opt_t, std::move(m), std::move(v));
        if (r.at != r.n) throw CorruptFile("trailing bytes in checkpoint");
        return agent;
    }
    if (algo == Algo::TabularQ) {
        check_bounds(r, scenario);
        Hyperparams hp = read_hyperparams(r);
        const double epsilon = r.f64();
        auto agent = std::make_unique<TabularQPolicy>(side, scenario, hp, 0);
        agent->set_epsilon(epsilon);
        const std::uint64_t entries = r.u64();
        for (std::uint64_t i = 0; i < entries; ++i) {
            const std::uint64_t key = r.u64();
            const std::int64_t action = r.i64();
            agent->set_entry(key, action, r.f64());
        }
        if (r.at != r.n) throw CorruptFile("trailing bytes in checkpoint");
        return agent;
    }
    throw CorruptFile("invalid algorithm tag in checkpoint");
}

}  // namespace marlsim
