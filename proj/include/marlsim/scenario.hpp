#pragma once

#include <string>
#include <vector>

namespace marlsim {

// Width of the discovered-property bitmap in attacker observations. Scenarios
// may define at most this many distinct property tags.
inline constexpr int kPropertyWidth = 16;

enum class Permission { Block = 0, Allow = 1 };
enum class Direction { Incoming = 0, Outgoing = 1 };
enum class VulnKind { Local = 0, Remote = 1 };

// Names are the document-level identity; the *_index fields are resolved
// against the scenario's global tables during validation and drive the
// runtime hot paths.

struct FirewallRule {
    std::string port;
    Permission permission = Permission::Block;
    int port_index = -1;

    bool operator==(const FirewallRule&) const = default;
};

struct Service {
    std::string port;
    bool running = true;
    std::vector<std::string> accepted_credentials;
    int port_index = -1;
    std::vector<int> accepted_credential_indices;

    bool operator==(const Service&) const = default;
};

struct VulnOutcome {
    enum class Kind { DiscoverNodes = 0, LeakCredentials = 1, ProbeInfo = 2 };
    Kind kind = Kind::ProbeInfo;
    std::vector<std::string> nodes;         // DiscoverNodes
    std::vector<std::string> credentials;   // LeakCredentials
    std::string property;                   // ProbeInfo
    std::vector<int> node_indices;
    std::vector<int> credential_indices;
    int property_index = -1;

    bool operator==(const VulnOutcome&) const = default;
};

struct Vulnerability {
    std::string id;
    VulnKind kind = VulnKind::Local;
    std::string port;   // transit port, REMOTE only
    double cost = 1.0;
    double reward_bonus = 0.0;
    VulnOutcome outcome;
    int vuln_index = -1;   // into Scenario::vuln_ids
    int port_index = -1;

    bool operator==(const Vulnerability&) const = default;
};

struct NodeSpec {
    std::string id;
    double value = 0.0;
    bool initially_owned = false;
    bool reimagable = true;
    std::vector<Service> services;
    std::vector<FirewallRule> firewall_in;
    std::vector<FirewallRule> firewall_out;
    std::vector<Vulnerability> vulnerabilities;

    bool operator==(const NodeSpec&) const = default;
};

struct Credential {
    std::string id;
    std::string node;
    std::string port;
    int node_index = -1;
    int port_index = -1;

    bool operator==(const Credential&) const = default;
};

// Immutable network description. Safe to share across environment instances
// once built; nothing here changes at runtime.
struct Scenario {
    std::vector<NodeSpec> nodes;
    std::vector<Credential> credentials;
    std::string start_node;
    int max_nodes = 0;         // flattened-encoding bound, >= nodes.size()
    int max_credentials = 0;   // flattened-encoding bound, >= credentials.size()

    // Global tables derived during validation (sorted, deterministic).
    std::vector<std::string> ports;
    std::vector<std::string> vuln_ids;
    std::vector<std::string> properties;
    int start_node_index = -1;

    bool operator==(const Scenario&) const = default;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int credential_count() const { return static_cast<int>(credentials.size()); }
    int port_count() const { return static_cast<int>(ports.size()); }
    int vuln_count() const { return static_cast<int>(vuln_ids.size()); }

    int node_index_of(const std::string& id) const;          // -1 if absent
    const Service* find_service(int node, int port_index) const;
    Permission default_permission(int node, int port_index, Direction dir) const;
};

// Resolves index tables and checks every referential-integrity rule.
// Throws ValidationError on the first violation found.
void validate_scenario(Scenario& s);

// Parses a schema_version-1 JSON document. Throws ParseError on malformed
// input and ValidationError on integrity violations.
Scenario load_scenario(const std::string& text);

// Inverse of load_scenario up to whitespace; output reparses to an equal
// Scenario.
std::string serialize_scenario(const Scenario& s);

// Built-in 10-node capture-the-flag scenario: a client foothold, a website
// open to all traffic with three vulnerabilities, and a chain of
// credential-gated higher-value targets. See docs/toyctf.md.
Scenario builtin_toyctf();

// Built-in 3-node chain (A owned -> B -> C) small enough to enumerate every
// flattened action; the standard fixture for oracle tests.
Scenario builtin_tiny();

}  // namespace marlsim
