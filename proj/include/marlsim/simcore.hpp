#pragma once

#include <cstdint>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "marlsim/scenario.hpp"

namespace marlsim {

// Ticks a node stays offline after a reimage.
inline constexpr int kReimageDuration = 15;

// Structured attacker action. Unused fields are zero so that the canonical
// flattened encoding is just the field tuple.
struct AttackerAction {
    enum class Type { LocalExploit = 0, RemoteExploit = 1, Connect = 2 };
    Type type = Type::LocalExploit;
    int source = 0;      // LocalExploit: the node acted on
    int target = 0;
    int vuln = 0;        // global vulnerability index
    int port = 0;        // global port index (Connect only)
    int credential = 0;  // credential index (Connect only)

    static AttackerAction local(int node, int vuln);
    static AttackerAction remote(int source, int target, int vuln);
    static AttackerAction connect(int source, int target, int port, int credential);

    bool operator==(const AttackerAction&) const = default;
    auto tuple() const { return std::tuple(static_cast<int>(type), source, target, vuln, port, credential); }
};

struct DefenderAction {
    enum class Type {
        Reimage = 0,
        BlockTraffic = 1,
        AllowTraffic = 2,
        StopService = 3,
        StartService = 4
    };
    Type type = Type::Reimage;
    int node = 0;
    int port = 0;  // global port index
    Direction direction = Direction::Incoming;

    static DefenderAction reimage(int node);
    static DefenderAction block(int node, int port, Direction dir);
    static DefenderAction allow(int node, int port, Direction dir);
    static DefenderAction stop_service(int node, int port);
    static DefenderAction start_service(int node, int port);

    bool operator==(const DefenderAction&) const = default;
    auto tuple() const { return std::tuple(static_cast<int>(type), node, port, static_cast<int>(direction)); }
};

struct StepEvent {
    enum class Kind { NodeOwned, NodesDiscovered, CredentialsLeaked, NoEffect };
    Kind kind = Kind::NoEffect;
    int count = 0;

    bool operator==(const StepEvent&) const = default;
};

struct StepOutcome {
    double raw_reward = 0.0;
    std::vector<StepEvent> events;
    bool valid = false;
};

// Mutable runtime state of one episode. Invalid actions never mutate state
// or abort; they come back as valid=false outcomes.
class EnvState {
public:
    static EnvState reset(const Scenario& scenario, std::uint64_t seed);

    StepOutcome attacker_step(const AttackerAction& a);
    StepOutcome defender_step(const DefenderAction& a);

    // Advances the reimage clock and the step counter. Called once per
    // environment timestep after both agents acted.
    void tick();

    // Fraction of nodes that are up: not reimaging, and every
    // default-running service currently running.
    double availability() const;

    bool is_valid(const AttackerAction& a) const;
    bool is_valid(const DefenderAction& a) const;

    // Exactly the actions for which is_valid holds, sorted by their
    // flattened encoding.
    std::vector<AttackerAction> valid_attacker_actions() const;
    std::vector<DefenderAction> valid_defender_actions() const;

    std::uint64_t state_hash() const;

    const Scenario& scenario() const { return *scenario_; }
    std::int64_t step() const { return step_; }
    std::uint64_t seed() const { return seed_; }
    bool owned(int node) const { return nodes_[node].owned; }
    bool discovered(int node) const { return nodes_[node].discovered; }
    int reimage_countdown(int node) const { return nodes_[node].countdown; }
    bool service_running(int node, int port_index) const;
    bool has_service(int node, int port_index) const;
    Permission permission(int node, int port_index, Direction dir) const;
    bool credential_cached(int credential) const { return cred_cache_[credential] != 0; }
    bool property_discovered(int property_index) const { return properties_[property_index] != 0; }
    int owned_count() const;
    int discovered_count() const;
    int cached_credential_count() const;
    bool all_nodes_owned() const { return owned_count() == scenario_->node_count(); }

private:
    struct NodeRt {
        bool owned = false;
        bool discovered = false;
        int countdown = 0;
        std::vector<std::uint8_t> svc_exists;   // by port index
        std::vector<std::uint8_t> svc_default;  // default running flag
        std::vector<std::uint8_t> svc_running;
        std::vector<std::uint8_t> fw[2];        // [direction][port index]
    };

    const Scenario* scenario_ = nullptr;
    std::uint64_t seed_ = 0;
    std::int64_t step_ = 0;
    std::vector<NodeRt> nodes_;
    std::vector<std::uint8_t> cred_cache_;
    std::vector<std::uint8_t> properties_;
    // Exercised (node, vuln) pairs; reimage clears the node's entries.
    std::set<std::pair<int, int>> exercised_;
    // One-time reward ledgers for the episode; reimage does not clear these,
    // so every value/bonus is granted at most once per episode.
    std::vector<std::uint8_t> value_granted_;
    std::set<std::pair<int, int>> bonus_granted_;

    const Vulnerability* find_vuln(int node, int vuln_index, VulnKind kind) const;
    StepOutcome apply_exploit(int target_node, const Vulnerability& v);
};

}  // namespace marlsim
