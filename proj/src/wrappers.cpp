#include "marlsim/wrappers.hpp"

#include <algorithm>
#include <cstdio>

#include "marlsim/common.hpp"

namespace marlsim {

namespace {

int clamp_dim(std::size_t n) { return n == 0 ? 1 : static_cast<int>(n); }

[[noreturn]] void throw_component(const char* space, const char* name, int value, int dim) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s action component '%s' = %d outside [0, %d)",
                  space, name, value, dim);
    throw OutOfRange(buf);
}

void check_component(const char* space, const char* name, int value, int dim) {
    if (value < 0 || value >= dim) throw_component(space, name, value, dim);
}

}  // namespace

InvalidActionMode InvalidActionMode::penalty_mode(double amount) {
    if (!(amount < 0.0)) throw ConfigError("invalid-action penalty must be negative");
    return {Kind::Penalty, amount};
}

FlatActionSpace::FlatActionSpace(const Scenario& scenario) {
    attacker_dims_ = {3,
                      scenario.max_nodes,
                      scenario.max_nodes,
                      clamp_dim(scenario.vuln_ids.size()),
                      clamp_dim(scenario.ports.size()),
                      clamp_dim(static_cast<std::size_t>(scenario.max_credentials))};
    defender_dims_ = {5, scenario.max_nodes, clamp_dim(scenario.ports.size()), 2};
}

std::vector<int> FlatActionSpace::encode(const AttackerAction& a) const {
    std::vector<int> flat(6, 0);
    flat[0] = static_cast<int>(a.type);
    check_component("attacker", "action_type", flat[0], attacker_dims_[0]);
    switch (a.type) {
    case AttackerAction::Type::LocalExploit:
        check_component("attacker", "source", a.source, attacker_dims_[1]);
        check_component("attacker", "vulnerability", a.vuln, attacker_dims_[3]);
        flat[1] = a.source;
        flat[3] = a.vuln;
        break;
    case AttackerAction::Type::RemoteExploit:
        check_component("attacker", "source", a.source, attacker_dims_[1]);
        check_component("attacker", "target", a.target, attacker_dims_[2]);
        check_component("attacker", "vulnerability", a.vuln, attacker_dims_[3]);
        flat[1] = a.source;
        flat[2] = a.target;
        flat[3] = a.vuln;
        break;
    case AttackerAction::Type::Connect:
        check_component("attacker", "source", a.source, attacker_dims_[1]);
        check_component("attacker", "target", a.target, attacker_dims_[2]);
        check_component("attacker", "port", a.port, attacker_dims_[4]);
        check_component("attacker", "credential", a.credential, attacker_dims_[5]);
        flat[1] = a.source;
        flat[2] = a.target;
        flat[4] = a.port;
        flat[5] = a.credential;
        break;
    }
    return flat;
}

std::vector<int> FlatActionSpace::encode(const DefenderAction& a) const {
    std::vector<int> flat(4, 0);
    flat[0] = static_cast<int>(a.type);
    check_component("defender", "action_type", flat[0], defender_dims_[0]);
    check_component("defender", "node", a.node, defender_dims_[1]);
    flat[1] = a.node;
    switch (a.type) {
    case DefenderAction::Type::Reimage:
        break;
    case DefenderAction::Type::BlockTraffic:
    case DefenderAction::Type::AllowTraffic:
        check_component("defender", "port", a.port, defender_dims_[2]);
        check_component("defender", "direction", static_cast<int>(a.direction), defender_dims_[3]);
        flat[2] = a.port;
        flat[3] = static_cast<int>(a.direction);
        break;
    case DefenderAction::Type::StopService:
    case DefenderAction::Type::StartService:
        check_component("defender", "port", a.port, defender_dims_[2]);
        flat[2] = a.port;
        break;
    }
    return flat;
}

AttackerAction FlatActionSpace::decode_attacker(std::span<const int> flat) const {
    if (flat.size() != attacker_dims_.size()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "attacker action vector has length %zu, expected %zu",
                      flat.size(), attacker_dims_.size());
        throw OutOfRange(buf);
    }
    static const char* kNames[6] = {"action_type", "source",  "target",
                                    "vulnerability", "port", "credential"};
    for (std::size_t i = 0; i < flat.size(); ++i)
        check_component("attacker", kNames[i], flat[i], attacker_dims_[i]);
    switch (static_cast<AttackerAction::Type>(flat[0])) {
    case AttackerAction::Type::LocalExploit:
        return AttackerAction::local(flat[1], flat[3]);
    case AttackerAction::Type::RemoteExploit:
        return AttackerAction::remote(flat[1], flat[2], flat[3]);
    default:
        return AttackerAction::connect(flat[1], flat[2], flat[4], flat[5]);
    }
}

DefenderAction FlatActionSpace::decode_defender(std::span<const int> flat) const {
    if (flat.size() != defender_dims_.size()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "defender action vector has length %zu, expected %zu",
                      flat.size(), defender_dims_.size());
        throw OutOfRange(buf);
    }
    static const char* kNames[4] = {"action_type", "node", "port", "direction"};
    for (std::size_t i = 0; i < flat.size(); ++i)
        check_component("defender", kNames[i], flat[i], defender_dims_[i]);
    switch (static_cast<DefenderAction::Type>(flat[0])) {
    case DefenderAction::Type::Reimage:
        return DefenderAction::reimage(flat[1]);
    case DefenderAction::Type::BlockTraffic:
        return DefenderAction::block(flat[1], flat[2], static_cast<Direction>(flat[3]));
    case DefenderAction::Type::AllowTraffic:
        return DefenderAction::allow(flat[1], flat[2], static_cast<Direction>(flat[3]));
    case DefenderAction::Type::StopService:
        return DefenderAction::stop_service(flat[1], flat[2]);
    default:
        return DefenderAction::start_service(flat[1], flat[2]);
    }
}

std::int64_t FlatActionSpace::attacker_flat_count() const {
    std::int64_t n = 1;
    for (int d : attacker_dims_) n *= d;
    return n;
}

std::int64_t FlatActionSpace::defender_flat_count() const {
    std::int64_t n = 1;
    for (int d : defender_dims_) n *= d;
    return n;
}

std::vector<double> AttackerObservation::pack() const {
    std::vector<double> v;
    v.reserve(5 + discovered_properties.size() + known_credentials.size());
    v.push_back(static_cast<double>(newly_discovered_count));
    v.push_back(lateral_move_succeeded ? 1.0 : 0.0);
    v.push_back(static_cast<double>(newly_leaked_credential_count));
    v.push_back(static_cast<double>(discovered_count));
    v.push_back(static_cast<double>(owned_count));
    for (std::uint8_t b : discovered_properties) v.push_back(static_cast<double>(b));
    for (std::uint8_t b : known_credentials) v.push_back(static_cast<double>(b));
    return v;
}

int AttackerObservation::vector_length(const Scenario& s) {
    return 5 + kPropertyWidth + s.max_credentials;
}

std::vector<double> DefenderObservation::pack() const {
    std::vector<double> v;
    v.reserve(infected.size() + firewall_in.size() + firewall_out.size() + services.size());
    for (std::uint8_t b : infected) v.push_back(static_cast<double>(b));
    for (std::uint8_t b : firewall_in) v.push_back(static_cast<double>(b));
    for (std::uint8_t b : firewall_out) v.push_back(static_cast<double>(b));
    for (std::uint8_t b : services) v.push_back(static_cast<double>(b));
    return v;
}

int DefenderObservation::vector_length(const Scenario& s) {
    const int ports = static_cast<int>(s.ports.size());
    return s.max_nodes + 3 * s.max_nodes * ports;
}

BattleEnv::BattleEnv(const Scenario& scenario, EnvConfig config)
    : scenario_(&scenario), config_(std::move(config)), space_(scenario) {
    if (!(config_.availability_threshold >= 0.0 && config_.availability_threshold <= 1.0))
        throw ConfigError("availability threshold must lie in [0, 1]");
    if (config_.max_episode_len <= 0)
        throw ConfigError("max_episode_len must be positive");
    if (config_.invalid_mode.kind == InvalidActionMode::Kind::Penalty &&
        !(config_.invalid_mode.penalty < 0.0))
        throw ConfigError("invalid-action penalty must be negative");
    real_reset();
}

void BattleEnv::real_reset() {
    const std::uint64_t ep_base = config_.seed + real_resets_;
    state_ = EnvState::reset(*scenario_, derive_seed(ep_base, 0, SeedTag::EnvState));
    red_redirect_.seed(derive_seed(ep_base, 0, SeedTag::RedRedirect));
    blue_redirect_.seed(derive_seed(ep_base, 0, SeedTag::BlueRedirect));
    episode_done_ = false;
    timestep_ = 0;
    last_red_shaped_ = 0.0;
    penalty_armed_ = true;
    violations_ = 0;
    red_invalid_ = 0;
    blue_invalid_ = 0;
    last_discovered_ = 0;
    last_leaked_ = 0;
    last_lateral_ = false;
    ++real_resets_;
    ++generation_;
}

WrappedStep BattleEnv::attacker_step(std::span<const int> flat) {
    const AttackerAction requested = space_.decode_attacker(flat);
    last_discovered_ = 0;
    last_leaked_ = 0;
    last_lateral_ = false;

    StepOutcome outcome;
    double shaped = 0.0;
    const bool invalid = !state_.is_valid(requested);
    if (!invalid) {
        outcome = state_.attacker_step(requested);
        shaped = outcome.raw_reward;
    } else {
        ++red_invalid_;
        const auto valid = state_.valid_attacker_actions();
        if (!valid.empty()) {
            const auto& replacement = valid[uniform_below(red_redirect_, valid.size())];
            outcome = state_.attacker_step(replacement);
        }
        switch (config_.invalid_mode.kind) {
        case InvalidActionMode::Kind::Penalty: shaped = config_.invalid_mode.penalty; break;
        case InvalidActionMode::Kind::PassThrough: shaped = outcome.raw_reward; break;
        case InvalidActionMode::Kind::ZeroReward: shaped = 0.0; break;
        }
    }

    for (const StepEvent& e : outcome.events) {
        switch (e.kind) {
        case StepEvent::Kind::NodesDiscovered: last_discovered_ += e.count; break;
        case StepEvent::Kind::CredentialsLeaked: last_leaked_ += e.count; break;
        case StepEvent::Kind::NodeOwned: last_lateral_ = true; break;
        case StepEvent::Kind::NoEffect: break;
        }
    }
    last_red_shaped_ = shaped;

    if (config_.stop_on_full_ownership && state_.all_nodes_owned()) episode_done_ = true;

    WrappedStep out;
    out.observation = attacker_observation().pack();
    out.shaped_reward = shaped;
    out.terminal = episode_done_;
    out.was_invalid = invalid;
    return out;
}

WrappedStep BattleEnv::defender_step(std::span<const int> flat) {
    const DefenderAction requested = space_.decode_defender(flat);
    double shaped = 0.0;
    bool invalid = false;
    if (state_.is_valid(requested)) {
        state_.defender_step(requested);
        shaped = -last_red_shaped_;
    } else {
        invalid = true;
        ++blue_invalid_;
        shaped = config_.defender_invalid_penalty;
    }

    const double avail = state_.availability();
    if (avail < config_.availability_threshold) {
        if (penalty_armed_) {
            penalty_armed_ = false;
            ++violations_;
            shaped += config_.availability_penalty;
            if (!config_.no_reset) episode_done_ = true;
        }
    } else {
        penalty_armed_ = true;
    }

    WrappedStep out;
    out.observation = defender_observation().pack();
    out.shaped_reward = shaped;
    out.terminal = episode_done_;
    out.was_invalid = invalid;
    return out;
}

void BattleEnv::tick_and_advance() {
    state_.tick();
    ++timestep_;
    if (timestep_ >= config_.max_episode_len) episode_done_ = true;
}

AttackerObservation BattleEnv::attacker_observation() const {
    AttackerObservation obs;
    obs.newly_discovered_count = last_discovered_;
    obs.lateral_move_succeeded = last_lateral_;
    obs.newly_leaked_credential_count = last_leaked_;
    obs.discovered_count = state_.discovered_count();
    obs.owned_count = state_.owned_count();
    obs.discovered_properties.assign(kPropertyWidth, 0);
    for (int p = 0; p < kPropertyWidth; ++p)
        if (state_.property_discovered(p)) obs.discovered_properties[p] = 1;
    obs.known_credentials.assign(scenario_->max_credentials, 0);
    const int cred_count = static_cast<int>(scenario_->credentials.size());
    for (int c = 0; c < cred_count; ++c)
        if (state_.credential_cached(c)) obs.known_credentials[c] = 1;
    return obs;
}

DefenderObservation BattleEnv::defender_observation() const {
    DefenderObservation obs;
    const int ports = static_cast<int>(scenario_->ports.size());
    const int node_count = static_cast<int>(scenario_->nodes.size());
    obs.infected.assign(scenario_->max_nodes, 0);
    obs.firewall_in.assign(static_cast<std::size_t>(scenario_->max_nodes) * ports, 0);
    obs.firewall_out.assign(static_cast<std::size_t>(scenario_->max_nodes) * ports, 0);
    obs.services.assign(static_cast<std::size_t>(scenario_->max_nodes) * ports, 0);
    for (int n = 0; n < node_count; ++n) {
        if (state_.owned(n)) obs.infected[n] = 1;
        for (int p = 0; p < ports; ++p) {
            const std::size_t at = static_cast<std::size_t>(n) * ports + p;
            if (state_.permission(n, p, Direction::Incoming) == Permission::Allow)
                obs.firewall_in[at] = 1;
            if (state_.permission(n, p, Direction::Outgoing) == Permission::Allow)
                obs.firewall_out[at] = 1;
            if (state_.has_service(n, p) && state_.service_running(n, p)) obs.services[at] = 1;
        }
    }
    return obs;
}

std::vector<double> AttackerWrapper::reset() {
    if (last_seen_generation_ == env_->generation()) env_->real_reset();
    last_seen_generation_ = env_->generation();
    return env_->attacker_observation().pack();
}

WrappedStep AttackerWrapper::step(std::span<const int> flat) { return env_->attacker_step(flat); }

std::vector<double> DefenderWrapper::reset() {
    if (last_seen_generation_ == env_->generation()) env_->real_reset();
    last_seen_generation_ = env_->generation();
    return env_->defender_observation().pack();
}

WrappedStep DefenderWrapper::step(std::span<const int> flat) { return env_->defender_step(flat); }

}  // namespace marlsim
