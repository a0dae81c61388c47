#include "marlsim/scenario.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "marlsim/common.hpp"

namespace marlsim {

namespace {

using nlohmann::ordered_json;

std::string locus(const std::string& where) { return where.empty() ? "" : where + ": "; }

int lookup(const std::vector<std::string>& table, const std::string& name) {
    auto it = std::lower_bound(table.begin(), table.end(), name);
    if (it == table.end() || *it != name) return -1;
    return static_cast<int>(it - table.begin());
}

}  // namespace

int Scenario::node_index_of(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

const Service* Scenario::find_service(int node, int port_index) const {
    for (const Service& sv : nodes[node].services) {
        if (sv.port_index == port_index) return &sv;
    }
    return nullptr;
}

Permission Scenario::default_permission(int node, int port_index, Direction dir) const {
    const auto& rules =
        dir == Direction::Incoming ? nodes[node].firewall_in : nodes[node].firewall_out;
    for (const FirewallRule& r : rules) {
        if (r.port_index == port_index) return r.permission;
    }
    return Permission::Block;  // absent rule defaults to BLOCK
}

void validate_scenario(Scenario& s) {
    if (s.nodes.empty()) throw ValidationError("scenario has no nodes");

    // Global tables: collect every mentioned port name, vulnerability id and
    // property tag, sorted for a deterministic encoding.
    std::set<std::string> ports, vuln_ids, properties;
    for (const NodeSpec& n : s.nodes) {
        for (const Service& sv : n.services) ports.insert(sv.port);
        for (const FirewallRule& r : n.firewall_in) ports.insert(r.port);
        for (const FirewallRule& r : n.firewall_out) ports.insert(r.port);
        for (const Vulnerability& v : n.vulnerabilities) {
            vuln_ids.insert(v.id);
            if (!v.port.empty()) ports.insert(v.port);
            if (v.outcome.kind == VulnOutcome::Kind::ProbeInfo) properties.insert(v.outcome.property);
        }
    }
    for (const Credential& c : s.credentials) ports.insert(c.port);
    s.ports.assign(ports.begin(), ports.end());
    s.vuln_ids.assign(vuln_ids.begin(), vuln_ids.end());
    s.properties.assign(properties.begin(), properties.end());
    if (s.port_count() == 0) throw ValidationError("scenario mentions no ports");
    if (static_cast<int>(s.properties.size()) > kPropertyWidth) {
        throw ValidationError("more than " + std::to_string(kPropertyWidth) +
                              " distinct property tags");
    }

    std::unordered_map<std::string, int> node_index;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        if (!node_index.emplace(s.nodes[i].id, static_cast<int>(i)).second) {
            throw ValidationError("duplicate node id '" + s.nodes[i].id + "'");
        }
    }
    std::unordered_map<std::string, int> cred_index;
    for (std::size_t i = 0; i < s.credentials.size(); ++i) {
        if (!cred_index.emplace(s.credentials[i].id, static_cast<int>(i)).second) {
            throw ValidationError("duplicate credential id '" + s.credentials[i].id + "'");
        }
    }

    // Start node / foothold.
    auto sit = node_index.find(s.start_node);
    if (sit == node_index.end()) {
        throw ValidationError("start_node '" + s.start_node + "' does not exist");
    }
    s.start_node_index = sit->second;
    int owned_count = 0;
    for (const NodeSpec& n : s.nodes) owned_count += n.initially_owned ? 1 : 0;
    if (owned_count == 0) throw ValidationError("no initially-owned node");
    if (owned_count > 1) throw ValidationError("more than one initially-owned node");
    if (!s.nodes[s.start_node_index].initially_owned) {
        throw ValidationError("start_node '" + s.start_node + "' is not initially owned");
    }

    // Encoding bounds.
    if (s.max_nodes < s.node_count()) {
        throw ValidationError("max_nodes " + std::to_string(s.max_nodes) + " < node count " +
                              std::to_string(s.node_count()));
    }
    if (s.max_credentials < s.credential_count()) {
        throw ValidationError("max_credentials " + std::to_string(s.max_credentials) +
                              " < credential count " + std::to_string(s.credential_count()));
    }
    if (s.credential_count() > 0 && s.max_credentials <= 0) {
        throw ValidationError("max_credentials must be positive");
    }

    // Credentials target existing node services.
    for (Credential& c : s.credentials) {
        auto nit = node_index.find(c.node);
        if (nit == node_index.end()) {
            throw ValidationError("credential '" + c.id + "' references unknown node '" +
                                  c.node + "'");
        }
        c.node_index = nit->second;
        c.port_index = lookup(s.ports, c.port);
        bool exposed = false;
        for (const Service& sv : s.nodes[c.node_index].services) {
            if (sv.port == c.port) exposed = true;
        }
        if (!exposed) {
            throw ValidationError("credential '" + c.id + "' targets port '" + c.port +
                                  "' which node '" + c.node + "' does not expose");
        }
    }

    for (std::size_t ni = 0; ni < s.nodes.size(); ++ni) {
        NodeSpec& n = s.nodes[ni];
        const std::string where = "node '" + n.id + "'";
        if (n.value < 0) throw ValidationError(where + ": negative value");

        std::unordered_set<std::string> seen_ports;
        for (Service& sv : n.services) {
            if (!seen_ports.insert(sv.port).second) {
                throw ValidationError(where + ": duplicate service port '" + sv.port + "'");
            }
            sv.port_index = lookup(s.ports, sv.port);
            sv.accepted_credential_indices.clear();
            for (const std::string& cid : sv.accepted_credentials) {
                auto cit = cred_index.find(cid);
                if (cit == cred_index.end()) {
                    throw ValidationError(where + ": service '" + sv.port +
                                          "' accepts unknown credential '" + cid + "'");
                }
                const Credential& c = s.credentials[cit->second];
                if (c.node != n.id || c.port != sv.port) {
                    throw ValidationError(where + ": service '" + sv.port +
                                          "' accepts credential '" + cid +
                                          "' which targets a different node/port");
                }
                sv.accepted_credential_indices.push_back(cit->second);
            }
        }

        for (auto* rules : {&n.firewall_in, &n.firewall_out}) {
            std::unordered_set<std::string> seen;
            for (FirewallRule& r : *rules) {
                if (!seen.insert(r.port).second) {
                    throw ValidationError(where + ": duplicate firewall rule for port '" +
                                          r.port + "'");
                }
                r.port_index = lookup(s.ports, r.port);
            }
        }

        std::unordered_set<std::string> seen_vulns;
        for (Vulnerability& v : n.vulnerabilities) {
            const std::string vwhere = where + ", vulnerability '" + v.id + "'";
            if (!seen_vulns.insert(v.id).second) {
                throw ValidationError(where + ": duplicate vulnerability '" + v.id + "'");
            }
            if (v.cost < 0) throw ValidationError(vwhere + ": negative cost");
            if (v.reward_bonus < 0) throw ValidationError(vwhere + ": negative reward_bonus");
            v.vuln_index = lookup(s.vuln_ids, v.id);
            if (v.kind == VulnKind::Remote) {
                if (v.port.empty()) {
                    throw ValidationError(vwhere + ": remote vulnerability needs a port");
                }
                v.port_index = lookup(s.ports, v.port);
            } else {
                v.port_index = -1;
                if (!v.port.empty()) {
                    throw ValidationError(vwhere + ": local vulnerability must not set a port");
                }
            }
            VulnOutcome& o = v.outcome;
            o.node_indices.clear();
            o.credential_indices.clear();
            o.property_index = -1;
            switch (o.kind) {
                case VulnOutcome::Kind::DiscoverNodes:
                    for (const std::string& id : o.nodes) {
                        auto it = node_index.find(id);
                        if (it == node_index.end()) {
                            throw ValidationError(vwhere + ": discovers unknown node '" + id +
                                                  "'");
                        }
                        o.node_indices.push_back(it->second);
                    }
                    break;
                case VulnOutcome::Kind::LeakCredentials:
                    for (const std::string& id : o.credentials) {
                        auto it = cred_index.find(id);
                        if (it == cred_index.end()) {
                            throw ValidationError(vwhere + ": leaks unknown credential '" + id +
                                                  "'");
                        }
                        o.credential_indices.push_back(it->second);
                    }
                    break;
                case VulnOutcome::Kind::ProbeInfo:
                    o.property_index = lookup(s.properties, o.property);
                    break;
            }
        }
    }
}

namespace {

const ordered_json& require(const ordered_json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(locus(where) + "missing key '" + key + "'");
    return *it;
}

std::string get_string(const ordered_json& j, const char* key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_string()) throw ParseError(locus(where) + "key '" + key + "' must be a string");
    return v.get<std::string>();
}

double get_number(const ordered_json& j, const char* key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_number()) throw ParseError(locus(where) + "key '" + key + "' must be a number");
    return v.get<double>();
}

bool get_bool(const ordered_json& j, const char* key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_boolean()) throw ParseError(locus(where) + "key '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::vector<std::string> get_string_array(const ordered_json& v, const std::string& where) {
    if (!v.is_array()) throw ParseError(locus(where) + "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw ParseError(locus(where) + "expected an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

Permission parse_permission(const std::string& text, const std::string& where) {
    if (text == "ALLOW") return Permission::Allow;
    if (text == "BLOCK") return Permission::Block;
    throw ParseError(locus(where) + "permission must be ALLOW or BLOCK, got '" + text + "'");
}

VulnOutcome parse_outcome(const ordered_json& j, const std::string& where) {
    VulnOutcome o;
    const std::string type = get_string(j, "type", where);
    if (type == "discover_nodes") {
        o.kind = VulnOutcome::Kind::DiscoverNodes;
        o.nodes = get_string_array(require(j, "nodes", where), where + ".nodes");
    } else if (type == "leak_credentials") {
        o.kind = VulnOutcome::Kind::LeakCredentials;
        o.credentials =
            get_string_array(require(j, "credentials", where), where + ".credentials");
    } else if (type == "probe_info") {
        o.kind = VulnOutcome::Kind::ProbeInfo;
        o.property = get_string(j, "property", where);
    } else {
        throw ParseError(locus(where) + "unknown outcome type '" + type + "'");
    }
    return o;
}

std::vector<FirewallRule> parse_rules(const ordered_json& v, const std::string& where) {
    if (!v.is_array()) throw ParseError(locus(where) + "expected an array");
    std::vector<FirewallRule> out;
    for (const auto& e : v) {
        FirewallRule r;
        r.port = get_string(e, "port", where);
        r.permission = parse_permission(get_string(e, "permission", where), where);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

Scenario load_scenario(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("top level must be an object");
    const auto version = get_number(doc, "schema_version", "");
    if (version != 1) {
        throw ParseError("unsupported schema_version " + std::to_string(version));
    }

    Scenario s;
    s.start_node = get_string(doc, "start_node", "");
    s.max_nodes = static_cast<int>(get_number(doc, "max_nodes", ""));
    s.max_credentials = static_cast<int>(get_number(doc, "max_credentials", ""));
    if (s.max_nodes <= 0) throw ParseError("max_nodes must be positive");
    if (s.max_credentials < 0) throw ParseError("max_credentials must be non-negative");

    const auto& nodes = require(doc, "nodes", "");
    if (!nodes.is_array()) throw ParseError("'nodes' must be an array");
    for (const auto& jn : nodes) {
        NodeSpec n;
        n.id = get_string(jn, "id", "node");
        const std::string where = "node '" + n.id + "'";
        n.value = get_number(jn, "value", where);
        n.initially_owned = get_bool(jn, "initially_owned", where);
        n.reimagable = get_bool(jn, "reimagable", where);
        for (const auto& js : require(jn, "services", where)) {
            Service sv;
            sv.port = get_string(js, "port", where + " service");
            sv.running = get_bool(js, "running", where + " service");
            sv.accepted_credentials = get_string_array(
                require(js, "accepted_credentials", where), where + " accepted_credentials");
            n.services.push_back(std::move(sv));
        }
        n.firewall_in = parse_rules(require(jn, "firewall_in", where), where + " firewall_in");
        n.firewall_out = parse_rules(require(jn, "firewall_out", where), where + " firewall_out");
        for (const auto& jv : require(jn, "vulnerabilities", where)) {
            Vulnerability v;
            v.id = get_string(jv, "id", where + " vulnerability");
            const std::string vwhere = where + " vulnerability '" + v.id + "'";
            const std::string kind = get_string(jv, "kind", vwhere);
            if (kind == "LOCAL") {
                v.kind = VulnKind::Local;
            } else if (kind == "REMOTE") {
                v.kind = VulnKind::Remote;
            } else {
                throw ParseError(locus(vwhere) + "kind must be LOCAL or REMOTE");
            }
            if (jv.contains("port")) v.port = get_string(jv, "port", vwhere);
            v.cost = jv.contains("cost") ? get_number(jv, "cost", vwhere) : 1.0;
            v.reward_bonus =
                jv.contains("reward_bonus") ? get_number(jv, "reward_bonus", vwhere) : 0.0;
            v.outcome = parse_outcome(require(jv, "outcome", vwhere), vwhere + " outcome");
            n.vulnerabilities.push_back(std::move(v));
        }
        s.nodes.push_back(std::move(n));
    }

    const auto& creds = require(doc, "credentials", "");
    if (!creds.is_array()) throw ParseError("'credentials' must be an array");
    for (const auto& jc : creds) {
        Credential c;
        c.id = get_string(jc, "id", "credential");
        c.node = get_string(jc, "node", "credential '" + c.id + "'");
        c.port = get_string(jc, "port", "credential '" + c.id + "'");
        s.credentials.push_back(std::move(c));
    }

    validate_scenario(s);
    return s;
}

std::string serialize_scenario(const Scenario& s) {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["start_node"] = s.start_node;
    doc["max_nodes"] = s.max_nodes;
    doc["max_credentials"] = s.max_credentials;
    doc["nodes"] = ordered_json::array();
    for (const NodeSpec& n : s.nodes) {
        ordered_json jn;
        jn["id"] = n.id;
        jn["value"] = n.value;
        jn["initially_owned"] = n.initially_owned;
        jn["reimagable"] = n.reimagable;
        jn["services"] = ordered_json::array();
        for (const Service& sv : n.services) {
            jn["services"].push_back({{"port", sv.port},
                                      {"running", sv.running},
                                      {"accepted_credentials", sv.accepted_credentials}});
        }
        auto rules = [](const std::vector<FirewallRule>& rs) {
            ordered_json a = ordered_json::array();
            for (const FirewallRule& r : rs) {
                a.push_back({{"port", r.port},
                             {"permission", r.permission == Permission::Allow ? "ALLOW" : "BLOCK"}});
            }
            return a;
        };
        jn["firewall_in"] = rules(n.firewall_in);
        jn["firewall_out"] = rules(n.firewall_out);
        jn["vulnerabilities"] = ordered_json::array();
        for (const Vulnerability& v : n.vulnerabilities) {
            ordered_json jv;
            jv["id"] = v.id;
            jv["kind"] = v.kind == VulnKind::Local ? "LOCAL" : "REMOTE";
            if (!v.port.empty()) jv["port"] = v.port;
            jv["cost"] = v.cost;
            jv["reward_bonus"] = v.reward_bonus;
            switch (v.outcome.kind) {
                case VulnOutcome::Kind::DiscoverNodes:
                    jv["outcome"] = {{"type", "discover_nodes"}, {"nodes", v.outcome.nodes}};
                    break;
                case VulnOutcome::Kind::LeakCredentials:
                    jv["outcome"] = {{"type", "leak_credentials"},
                                     {"credentials", v.outcome.credentials}};
                    break;
                case VulnOutcome::Kind::ProbeInfo:
                    jv["outcome"] = {{"type", "probe_info"}, {"property", v.outcome.property}};
                    break;
            }
            jn["vulnerabilities"].push_back(std::move(jv));
        }
        doc["nodes"].push_back(std::move(jn));
    }
    doc["credentials"] = ordered_json::array();
    for (const Credential& c : s.credentials) {
        doc["credentials"].push_back({{"id", c.id}, {"node", c.node}, {"port", c.port}});
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Built-in scenarios.
// ---------------------------------------------------------------------------

namespace {

struct NodeBuilder {
    NodeSpec n;

    NodeBuilder(std::string id, double value) {
        n.id = std::move(id);
        n.value = value;
    }
    NodeBuilder& owned() {
        n.initially_owned = true;
        n.reimagable = false;  // the foothold is the attacker's own machine
        return *this;
    }
    NodeBuilder& service(std::string port, std::vector<std::string> creds = {},
                         bool running = true) {
        n.services.push_back({std::move(port), running, std::move(creds)});
        return *this;
    }
    NodeBuilder& allow_in(std::initializer_list<const char*> ports) {
        for (const char* p : ports) n.firewall_in.push_back({p, Permission::Allow});
        return *this;
    }
    NodeBuilder& allow_out(std::initializer_list<const char*> ports) {
        for (const char* p : ports) n.firewall_out.push_back({p, Permission::Allow});
        return *this;
    }
    NodeBuilder& local_vuln(std::string id, VulnOutcome outcome, double bonus, double cost = 1.0) {
        Vulnerability v;
        v.id = std::move(id);
        v.kind = VulnKind::Local;
        v.cost = cost;
        v.reward_bonus = bonus;
        v.outcome = std::move(outcome);
        n.vulnerabilities.push_back(std::move(v));
        return *this;
    }
    NodeBuilder& remote_vuln(std::string id, std::string port, VulnOutcome outcome, double bonus,
                             double cost = 1.0) {
        Vulnerability v;
        v.id = std::move(id);
        v.kind = VulnKind::Remote;
        v.port = std::move(port);
        v.cost = cost;
        v.reward_bonus = bonus;
        v.outcome = std::move(outcome);
        n.vulnerabilities.push_back(std::move(v));
        return *this;
    }
};

VulnOutcome discovers(std::vector<std::string> nodes) {
    VulnOutcome o;
    o.kind = VulnOutcome::Kind::DiscoverNodes;
    o.nodes = std::move(nodes);
    return o;
}

VulnOutcome leaks(std::vector<std::string> creds) {
    VulnOutcome o;
    o.kind = VulnOutcome::Kind::LeakCredentials;
    o.credentials = std::move(creds);
    return o;
}

VulnOutcome probes(std::string property) {
    VulnOutcome o;
    o.kind = VulnOutcome::Kind::ProbeInfo;
    o.property = std::move(property);
    return o;
}

}  // namespace

Scenario builtin_toyctf() {
    Scenario s;
    s.start_node = "client";
    s.max_nodes = 12;
    s.max_credentials = 10;

    s.credentials = {
        {"c_website_ssh", "Website", "SSH"},
        {"c_github_git", "GitHubProject", "GIT"},
        {"c_storage_https", "AzureStorage", "HTTPS"},
        {"c_sharepoint_smb", "Sharepoint", "SMB"},
        {"c_arm_https", "AzureResourceManager", "HTTPS"},
        {"c_vm_ssh", "AzureVM", "SSH"},
        {"c_monitor_https", "AzureMonitor", "HTTPS"},
        {"c_vault_https", "AzureKeyVault", "HTTPS"},
    };

    s.nodes.push_back(
        NodeBuilder("client", 0)
            .owned()
            .allow_out({"HTTPS", "SSH", "GIT", "SMB", "SQL"})
            .local_vuln("browser_history_leak", discovers({"Website"}), 5)
            .n);
    // Open to incoming traffic on every port; carries the scan / directory /
    // file-read vulnerability triple.
    s.nodes.push_back(
        NodeBuilder("Website", 20)
            .service("HTTPS")
            .service("SSH", {"c_website_ssh"})
            .allow_in({"HTTPS", "SSH", "GIT", "SMB", "SQL"})
            .allow_out({"HTTPS", "GIT", "SQL"})
            .remote_vuln("connection_log_scan", "HTTPS",
                         discovers({"Website.Directory", "GitHubProject"}), 10)
            .remote_vuln("directory_browse", "HTTPS", probes("exposed-directory"), 2)
            .remote_vuln("config_file_read", "HTTPS", leaks({"c_website_ssh"}), 10)
            .local_vuln("ssh_history_scan", discovers({"Sharepoint"}), 5)
            .n);
    s.nodes.push_back(
        NodeBuilder("Website.Directory", 0)
            .service("HTTPS")
            .allow_in({"HTTPS"})
            .remote_vuln("parent_dir_traversal", "HTTPS", leaks({"c_github_git"}), 10)
            .n);
    s.nodes.push_back(
        NodeBuilder("GitHubProject", 15)
            .service("GIT", {"c_github_git"})
            .allow_in({"GIT"})
            .allow_out({"HTTPS", "GIT"})
            .remote_vuln("git_history_leak", "GIT", leaks({"c_storage_https"}), 10)
            .local_vuln("repo_secret_scan", leaks({"c_sharepoint_smb"}), 5)
            .n);
    s.nodes.push_back(
        NodeBuilder("AzureStorage", 50)
            .service("HTTPS", {"c_storage_https"})
            .allow_in({"HTTPS"})
            .allow_out({"HTTPS"})
            .local_vuln("access_key_dump", leaks({"c_vm_ssh"}), 10)
            .n);
    s.nodes.push_back(
        NodeBuilder("Sharepoint", 35)
            .service("HTTPS")
            .service("SMB", {"c_sharepoint_smb"})
            .allow_in({"HTTPS", "SMB"})
            .allow_out({"HTTPS", "SQL"})
            .remote_vuln("sharepoint_doc_leak", "HTTPS", leaks({"c_arm_https"}), 10)
            .remote_vuln("ad_portal_enum", "HTTPS", discovers({"AzureResourceManager"}), 5)
            .n);
    s.nodes.push_back(
        NodeBuilder("AzureResourceManager", 50)
            .service("HTTPS", {"c_arm_https"})
            .allow_in({"HTTPS"})
            .allow_out({"HTTPS", "SSH"})
            .local_vuln("subscription_enum", discovers({"AzureVM", "AzureMonitor"}), 10)
            .local_vuln("monitor_token_dump", leaks({"c_monitor_https"}), 5)
            .n);
    s.nodes.push_back(
        NodeBuilder("AzureVM", 80)
            .service("SSH", {"c_vm_ssh"})
            .allow_in({"SSH"})
            .allow_out({"HTTPS"})
            .local_vuln("vm_disk_scan", leaks({"c_vault_https"}), 10)
            .local_vuln("cloud_metadata_probe", discovers({"AzureKeyVault"}), 5)
            .n);
    s.nodes.push_back(
        NodeBuilder("AzureMonitor", 25)
            .service("HTTPS", {"c_monitor_https"})
            .allow_in({"HTTPS"})
            .allow_out({"HTTPS"})
            .local_vuln("log_analytics_probe", probes("central-logging"), 2)
            .n);
    s.nodes.push_back(
        NodeBuilder("AzureKeyVault", 100)
            .service("HTTPS", {"c_vault_https"})
            .allow_in({"HTTPS"})
            .allow_out({"HTTPS"})
            .n);

    validate_scenario(s);
    return s;
}

Scenario builtin_tiny() {
    Scenario s;
    s.start_node = "A";
    s.max_nodes = 3;
    s.max_credentials = 2;

    s.credentials = {
        {"c_B", "B", "SSH"},
        {"c_C", "C", "SSH"},
    };

    s.nodes.push_back(
        NodeBuilder("A", 0)
            .owned()
            .allow_out({"SSH", "HTTPS"})
            .local_vuln("scan_logs", discovers({"B"}), 5)
            .local_vuln("cred_dump", leaks({"c_B"}), 5)
            .n);
    s.nodes.push_back(
        NodeBuilder("B", 30)
            .service("SSH", {"c_B"})
            .service("HTTPS")
            .allow_in({"SSH", "HTTPS"})
            .allow_out({"SSH", "HTTPS"})
            .remote_vuln("remote_scan", "HTTPS", discovers({"C"}), 5)
            .local_vuln("cred_dump_c", leaks({"c_C"}), 5)
            .n);
    s.nodes.push_back(
        NodeBuilder("C", 50)
            .service("SSH", {"c_C"})
            .allow_in({"SSH"})
            .n);

    validate_scenario(s);
    return s;
}

}  // namespace marlsim
