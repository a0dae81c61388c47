#include "marlsim/simcore.hpp"

#include <algorithm>

#include "marlsim/common.hpp"

namespace marlsim {

AttackerAction AttackerAction::local(int node, int vuln) {
    AttackerAction a;
    a.type = Type::LocalExploit;
    a.source = node;
    a.vuln = vuln;
    return a;
}

AttackerAction AttackerAction::remote(int source, int target, int vuln) {
    AttackerAction a;
    a.type = Type::RemoteExploit;
    a.source = source;
    a.target = target;
    a.vuln = vuln;
    return a;
}

AttackerAction AttackerAction::connect(int source, int target, int port, int credential) {
    AttackerAction a;
    a.type = Type::Connect;
    a.source = source;
    a.target = target;
    a.port = port;
    a.credential = credential;
    return a;
}

DefenderAction DefenderAction::reimage(int node) {
    DefenderAction a;
    a.type = Type::Reimage;
    a.node = node;
    return a;
}

DefenderAction DefenderAction::block(int node, int port, Direction dir) {
    DefenderAction a;
    a.type = Type::BlockTraffic;
    a.node = node;
    a.port = port;
    a.direction = dir;
    return a;
}

DefenderAction DefenderAction::allow(int node, int port, Direction dir) {
    DefenderAction a;
    a.type = Type::AllowTraffic;
    a.node = node;
    a.port = port;
    a.direction = dir;
    return a;
}

DefenderAction DefenderAction::stop_service(int node, int port) {
    DefenderAction a;
    a.type = Type::StopService;
    a.node = node;
    a.port = port;
    return a;
}

DefenderAction DefenderAction::start_service(int node, int port) {
    DefenderAction a;
    a.type = Type::StartService;
    a.node = node;
    a.port = port;
    return a;
}

EnvState EnvState::reset(const Scenario& scenario, std::uint64_t seed) {
    EnvState st;
    st.scenario_ = &scenario;
    st.seed_ = seed;
    st.step_ = 0;
    const int p = scenario.port_count();
    st.nodes_.resize(scenario.node_count());
    for (int i = 0; i < scenario.node_count(); ++i) {
        NodeRt& rt = st.nodes_[i];
        rt.svc_exists.assign(p, 0);
        rt.svc_default.assign(p, 0);
        rt.svc_running.assign(p, 0);
        for (const Service& sv : scenario.nodes[i].services) {
            rt.svc_exists[sv.port_index] = 1;
            rt.svc_default[sv.port_index] = sv.running ? 1 : 0;
            rt.svc_running[sv.port_index] = sv.running ? 1 : 0;
        }
        for (Direction dir : {Direction::Incoming, Direction::Outgoing}) {
            auto& fw = rt.fw[static_cast<int>(dir)];
            fw.assign(p, 0);
            for (int pi = 0; pi < p; ++pi) {
                fw[pi] = scenario.default_permission(i, pi, dir) == Permission::Allow ? 1 : 0;
            }
        }
    }
    NodeRt& start = st.nodes_[scenario.start_node_index];
    start.owned = true;
    start.discovered = true;
    st.cred_cache_.assign(scenario.credential_count(), 0);
    st.properties_.assign(kPropertyWidth, 0);
    st.value_granted_.assign(scenario.node_count(), 0);
    return st;
}

bool EnvState::service_running(int node, int port_index) const {
    return nodes_[node].svc_running[port_index] != 0;
}

bool EnvState::has_service(int node, int port_index) const {
    return nodes_[node].svc_exists[port_index] != 0;
}

Permission EnvState::permission(int node, int port_index, Direction dir) const {
    return nodes_[node].fw[static_cast<int>(dir)][port_index] ? Permission::Allow
                                                             : Permission::Block;
}

int EnvState::owned_count() const {
    int c = 0;
    for (const NodeRt& n : nodes_) c += n.owned ? 1 : 0;
    return c;
}

int EnvState::discovered_count() const {
    int c = 0;
    for (const NodeRt& n : nodes_) c += n.discovered ? 1 : 0;
    return c;
}

int EnvState::cached_credential_count() const {
    int c = 0;
    for (std::uint8_t b : cred_cache_) c += b;
    return c;
}

const Vulnerability* EnvState::find_vuln(int node, int vuln_index, VulnKind kind) const {
    for (const Vulnerability& v : scenario_->nodes[node].vulnerabilities) {
        if (v.vuln_index == vuln_index && v.kind == kind) return &v;
    }
    return nullptr;
}

bool EnvState::is_valid(const AttackerAction& a) const {
    const int n = scenario_->node_count();
    switch (a.type) {
        case AttackerAction::Type::LocalExploit: {
            if (a.source < 0 || a.source >= n) return false;
            if (!nodes_[a.source].owned) return false;
            return find_vuln(a.source, a.vuln, VulnKind::Local) != nullptr;
        }
        case AttackerAction::Type::RemoteExploit: {
            if (a.source < 0 || a.source >= n || a.target < 0 || a.target >= n) return false;
            if (a.source == a.target) return false;
            if (!nodes_[a.source].owned) return false;
            const NodeRt& t = nodes_[a.target];
            if (!t.discovered || t.owned || t.countdown > 0) return false;
            const Vulnerability* v = find_vuln(a.target, a.vuln, VulnKind::Remote);
            if (v == nullptr) return false;
            return t.fw[static_cast<int>(Direction::Incoming)][v->port_index] != 0;
        }
        case AttackerAction::Type::Connect: {
            if (a.source < 0 || a.source >= n || a.target < 0 || a.target >= n) return false;
            if (a.source == a.target) return false;
            if (a.port < 0 || a.port >= scenario_->port_count()) return false;
            if (a.credential < 0 || a.credential >= scenario_->credential_count()) return false;
            if (!nodes_[a.source].owned) return false;
            const NodeRt& t = nodes_[a.target];
            if (!t.discovered || t.countdown > 0) return false;
            if (!cred_cache_[a.credential]) return false;
            const Credential& c = scenario_->credentials[a.credential];
            if (c.node_index != a.target || c.port_index != a.port) return false;
            if (!t.svc_exists[a.port] || !t.svc_running[a.port]) return false;
            if (!nodes_[a.source].fw[static_cast<int>(Direction::Outgoing)][a.port]) return false;
            return t.fw[static_cast<int>(Direction::Incoming)][a.port] != 0;
        }
    }
    return false;
}

bool EnvState::is_valid(const DefenderAction& a) const {
    const int n = scenario_->node_count();
    if (a.node < 0 || a.node >= n) return false;
    switch (a.type) {
        case DefenderAction::Type::Reimage:
            return scenario_->nodes[a.node].reimagable && nodes_[a.node].countdown == 0;
        case DefenderAction::Type::BlockTraffic:
            if (a.port < 0 || a.port >= scenario_->port_count()) return false;
            return nodes_[a.node].fw[static_cast<int>(a.direction)][a.port] != 0;
        case DefenderAction::Type::AllowTraffic:
            if (a.port < 0 || a.port >= scenario_->port_count()) return false;
            return nodes_[a.node].fw[static_cast<int>(a.direction)][a.port] == 0;
        case DefenderAction::Type::StopService:
            if (a.port < 0 || a.port >= scenario_->port_count()) return false;
            return nodes_[a.node].svc_exists[a.port] && nodes_[a.node].svc_running[a.port];
        case DefenderAction::Type::StartService:
            if (a.port < 0 || a.port >= scenario_->port_count()) return false;
            return nodes_[a.node].svc_exists[a.port] && !nodes_[a.node].svc_running[a.port];
    }
    return false;
}

StepOutcome EnvState::apply_exploit(int target_node, const Vulnerability& v) {
    StepOutcome out;
    out.valid = true;

    const auto bonus_key = std::pair(target_node, v.vuln_index);
    const bool first = bonus_granted_.insert(bonus_key).second;
    exercised_.insert(bonus_key);
    out.raw_reward = (first ? v.reward_bonus : 0.0) - v.cost;

    switch (v.outcome.kind) {
        case VulnOutcome::Kind::DiscoverNodes: {
            int newly = 0;
            for (int idx : v.outcome.node_indices) {
                if (!nodes_[idx].discovered) {
                    nodes_[idx].discovered = true;
                    ++newly;
                }
            }
            if (newly > 0) out.events.push_back({StepEvent::Kind::NodesDiscovered, newly});
            break;
        }
        case VulnOutcome::Kind::LeakCredentials: {
            int newly = 0;
            for (int idx : v.outcome.credential_indices) {
                if (!cred_cache_[idx]) {
                    cred_cache_[idx] = 1;
                    ++newly;
                }
            }
            if (newly > 0) out.events.push_back({StepEvent::Kind::CredentialsLeaked, newly});
            break;
        }
        case VulnOutcome::Kind::ProbeInfo:
            properties_[v.outcome.property_index] = 1;
            break;
    }
    if (out.events.empty()) out.events.push_back({StepEvent::Kind::NoEffect, 0});
    return out;
}

StepOutcome EnvState::attacker_step(const AttackerAction& a) {
    if (!is_valid(a)) return {};
    switch (a.type) {
        case AttackerAction::Type::LocalExploit:
            return apply_exploit(a.source, *find_vuln(a.source, a.vuln, VulnKind::Local));
        case AttackerAction::Type::RemoteExploit:
            return apply_exploit(a.target, *find_vuln(a.target, a.vuln, VulnKind::Remote));
        case AttackerAction::Type::Connect: {
            StepOutcome out;
            out.valid = true;
            NodeRt& t = nodes_[a.target];
            if (!t.owned) {
                t.owned = true;
                if (!value_granted_[a.target]) {
                    value_granted_[a.target] = 1;
                    out.raw_reward = scenario_->nodes[a.target].value;
                }
                out.events.push_back({StepEvent::Kind::NodeOwned, 1});
            } else {
                out.events.push_back({StepEvent::Kind::NoEffect, 0});
            }
            return out;
        }
    }
    return {};
}

StepOutcome EnvState::defender_step(const DefenderAction& a) {
    if (!is_valid(a)) return {};
    StepOutcome out;
    out.valid = true;
    NodeRt& n = nodes_[a.node];
    switch (a.type) {
        case DefenderAction::Type::Reimage: {
            n.owned = false;
            n.countdown = kReimageDuration;
            // Drop the node's exercised records; one-time reward grants stay.
            for (auto it = exercised_.begin(); it != exercised_.end();) {
                if (it->first == a.node) {
                    it = exercised_.erase(it);
                } else {
                    ++it;
                }
            }
            break;
        }
        case DefenderAction::Type::BlockTraffic:
            n.fw[static_cast<int>(a.direction)][a.port] = 0;
            break;
        case DefenderAction::Type::AllowTraffic:
            n.fw[static_cast<int>(a.direction)][a.port] = 1;
            break;
        case DefenderAction::Type::StopService:
            n.svc_running[a.port] = 0;
            break;
        case DefenderAction::Type::StartService:
            n.svc_running[a.port] = 1;
            break;
    }
    return out;
}

void EnvState::tick() {
    for (NodeRt& n : nodes_) {
        if (n.countdown > 0) --n.countdown;
    }
    ++step_;
}

double EnvState::availability() const {
    int up = 0;
    for (const NodeRt& n : nodes_) {
        if (n.countdown > 0) continue;
        bool ok = true;
        for (std::size_t p = 0; p < n.svc_default.size(); ++p) {
            if (n.svc_default[p] && !n.svc_running[p]) {
                ok = false;
                break;
            }
        }
        if (ok) ++up;
    }
    return static_cast<double>(up) / static_cast<double>(scenario_->node_count());
}

std::vector<AttackerAction> EnvState::valid_attacker_actions() const {
    // Candidate generation from the owned/discovered/cached sets keeps this
    // far below a scan of the full flattened space; the result is identical
    // (tests cross-check against the brute-force filter).
    std::vector<AttackerAction> out;
    const int n = scenario_->node_count();
    for (int src = 0; src < n; ++src) {
        if (!nodes_[src].owned) continue;
        for (const Vulnerability& v : scenario_->nodes[src].vulnerabilities) {
            if (v.kind == VulnKind::Local) out.push_back(AttackerAction::local(src, v.vuln_index));
        }
        for (int tgt = 0; tgt < n; ++tgt) {
            if (tgt == src || !nodes_[tgt].discovered) continue;
            for (const Vulnerability& v : scenario_->nodes[tgt].vulnerabilities) {
                if (v.kind != VulnKind::Remote) continue;
                AttackerAction a = AttackerAction::remote(src, tgt, v.vuln_index);
                if (is_valid(a)) out.push_back(a);
            }
        }
        for (int c = 0; c < scenario_->credential_count(); ++c) {
            if (!cred_cache_[c]) continue;
            const Credential& cred = scenario_->credentials[c];
            AttackerAction a =
                AttackerAction::connect(src, cred.node_index, cred.port_index, c);
            if (is_valid(a)) out.push_back(a);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const AttackerAction& a, const AttackerAction& b) { return a.tuple() < b.tuple(); });
    return out;
}

std::vector<DefenderAction> EnvState::valid_defender_actions() const {
    std::vector<DefenderAction> out;
    const int n = scenario_->node_count();
    const int p = scenario_->port_count();
    for (int i = 0; i < n; ++i) {
        const NodeRt& rt = nodes_[i];
        if (scenario_->nodes[i].reimagable && rt.countdown == 0) {
            out.push_back(DefenderAction::reimage(i));
        }
        for (int pi = 0; pi < p; ++pi) {
            for (Direction dir : {Direction::Incoming, Direction::Outgoing}) {
                if (rt.fw[static_cast<int>(dir)][pi]) {
                    out.push_back(DefenderAction::block(i, pi, dir));
                } else {
                    out.push_back(DefenderAction::allow(i, pi, dir));
                }
            }
            if (rt.svc_exists[pi]) {
                out.push_back(rt.svc_running[pi] ? DefenderAction::stop_service(i, pi)
                                                 : DefenderAction::start_service(i, pi));
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const DefenderAction& a, const DefenderAction& b) { return a.tuple() < b.tuple(); });
    return out;
}

std::uint64_t EnvState::state_hash() const {
    Fnv1a h;
    h.update_u64(seed_);
    h.update_i64(step_);
    for (const NodeRt& n : nodes_) {
        h.update_u64((n.owned ? 1u : 0u) | (n.discovered ? 2u : 0u));
        h.update_i64(n.countdown);
        h.update(n.svc_running.data(), n.svc_running.size());
        h.update(n.fw[0].data(), n.fw[0].size());
        h.update(n.fw[1].data(), n.fw[1].size());
    }
    h.update(cred_cache_.data(), cred_cache_.size());
    h.update(properties_.data(), properties_.size());
    h.update(value_granted_.data(), value_granted_.size());
    for (const auto& [node, vuln] : exercised_) {
        h.update_i64(node);
        h.update_i64(vuln);
    }
    h.update_u64(0xfeed);
    for (const auto& [node, vuln] : bonus_granted_) {
        h.update_i64(node);
        h.update_i64(vuln);
    }
    return h.digest();
}

}  // namespace marlsim
