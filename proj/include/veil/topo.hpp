#ifndef VEIL_TOPO_HPP
#define VEIL_TOPO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "veil/bytes.hpp"

// Anonymity-set analysis over AS-level topologies. A compromised AS on a
// flowlet path observes its ingress and egress links; the sender anonymity
// set S_s is every host that could have originated a packet arriving that
// way, the recipient set S_d every host it could be heading to, and the
// relationship set S_r = S_s x S_d. Headers that leak path position
// (distance to both ends) shrink the sets to the exact-distance slices.
namespace veil::topo {

struct AsGraph {
    struct AsNode {
        std::uint32_t id = 0;
        std::uint64_t hosts = 0;
    };

    std::vector<AsNode> ases;
    std::vector<std::vector<std::size_t>> adj; ///< by internal index

    std::size_t add_as(std::uint32_t id, std::uint64_t hosts);
    void add_edge(std::uint32_t a, std::uint32_t b);
    std::size_t index_of(std::uint32_t id) const; ///< throws if unknown
    bool adjacent(std::size_t a, std::size_t b) const;
    std::size_t size() const { return ases.size(); }

private:
    std::unordered_map<std::uint32_t, std::size_t> index_;
};

struct CompromiseScenario {
    std::vector<std::uint32_t> path;      ///< AS numbers, sender side first
    std::vector<std::size_t> compromised; ///< positions on the path
    bool position_known = false;
    bool correlating = false;
};

struct SetSizes {
    std::uint64_t sender = 0;
    std::uint64_t recipient = 0;
    std::uint64_t relationship = 0;
};

/// Anonymity sets seen by a single compromised AS (the scenario must list
/// exactly one position). max_path_ases bounds the number of ASes a path
/// may traverse when positions are unknown.
SetSizes anonymity_sets(const AsGraph& graph, const CompromiseScenario& scenario,
                        std::size_t max_path_ases = 7);

/// Relationship-set size under q >= 1 compromised ASes. Correlating
/// adversaries combine the smallest sender and recipient sets; otherwise
/// only the smallest per-AS relationship set survives.
std::uint64_t multi_compromise(const AsGraph& graph, const CompromiseScenario& scenario,
                               std::size_t max_path_ases = 7);

/// The six-AS worked example: AS0(8)-AS1(8)-AS2(24)-AS3(8) in a chain with
/// AS4(8) and AS5(8) attached to AS3; the example path runs AS0..AS3.
AsGraph build_toy_topology();
CompromiseScenario toy_example_path();

// Text format: `as <id> <hosts>`, `edge <a> <b>`, `path <id> <id> ...`,
// `scenario <name> compromised=<pos>[,<pos>...] [known] [correlating]`,
// '#' comments. One path per file; scenarios reference it.
struct TopologyFile {
    AsGraph graph;
    std::vector<std::uint32_t> path;
    std::vector<std::pair<std::string, CompromiseScenario>> scenarios;
};

TopologyFile parse_topology(std::istream& in);

} // namespace veil::topo

#endif
