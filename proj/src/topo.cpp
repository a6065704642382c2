#include "veil/topo.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

namespace veil::topo {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw Error("topo: " + what);
}

// Mark every AS that can originate a simple path of edge-length within
// [d_min, d_max] that ends (..., first_hop, pivot). Explores all simple
// paths outward from the pivot; desk-scale graphs keep this cheap.
class FeasibleOrigins {
public:
    FeasibleOrigins(const AsGraph& graph, std::size_t pivot, std::size_t first_hop,
                    std::size_t d_min, std::size_t d_max)
        : graph_(graph), d_min_(d_min), d_max_(d_max), on_path_(graph.size(), false),
          feasible_(graph.size(), false) {
        on_path_[pivot] = true;
        if (d_max_ >= 1) extend(first_hop, 1);
    }

    std::uint64_t host_total() const {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < graph_.size(); ++i) {
            if (feasible_[i]) total += graph_.ases[i].hosts;
        }
        return total;
    }

private:
    void extend(std::size_t as, std::size_t depth) {
        if (depth >= d_min_ && depth <= d_max_) feasible_[as] = true;
        if (depth == d_max_) return;
        on_path_[as] = true;
        for (std::size_t next : graph_.adj[as]) {
            if (!on_path_[next]) extend(next, depth + 1);
        }
        on_path_[as] = false;
    }

    const AsGraph& graph_;
    std::size_t d_min_;
    std::size_t d_max_;
    std::vector<char> on_path_;
    std::vector<char> feasible_;
};

struct SideSizes {
    std::uint64_t sender;
    std::uint64_t recipient;
};

SideSizes one_as_view(const AsGraph& graph, const CompromiseScenario& scenario, std::size_t pos,
                      std::size_t max_path_ases) {
    const auto& path = scenario.path;
    const std::size_t len = path.size();
    require(pos < len, "compromised position beyond the path");
    const std::size_t pivot = graph.index_of(path[pos]);
    for (std::size_t i = 0; i + 1 < len; ++i) {
        require(graph.adjacent(graph.index_of(path[i]), graph.index_of(path[i + 1])),
                "scenario path uses a missing link");
    }
    require(len <= max_path_ases, "scenario path longer than the protocol permits");
    const std::size_t max_edges = max_path_ases - 1;

    bool host_ingress = (pos == 0);
    bool host_egress = (pos + 1 == len);

    std::uint64_t sender;
    if (host_ingress) {
        // The packet arrived on a host port: the sender itself is observed.
        sender = 1;
    } else {
        std::size_t first_hop = graph.index_of(path[pos - 1]);
        std::size_t d_min = scenario.position_known ? pos : 1;
        std::size_t d_max =
            scenario.position_known ? pos : max_edges - (host_egress ? 0 : 1);
        sender = FeasibleOrigins(graph, pivot, first_hop, d_min, d_max).host_total();
    }

    std::uint64_t recipient;
    if (host_egress) {
        recipient = 1;
    } else {
        std::size_t first_hop = graph.index_of(path[pos + 1]);
        std::size_t dist = len - 1 - pos;
        std::size_t d_min = scenario.position_known ? dist : 1;
        std::size_t d_max =
            scenario.position_known ? dist : max_edges - (host_ingress ? 0 : 1);
        recipient = FeasibleOrigins(graph, pivot, first_hop, d_min, d_max).host_total();
    }
    return {sender, recipient};
}

} // namespace

std::size_t AsGraph::add_as(std::uint32_t id, std::uint64_t hosts) {
    require(!index_.contains(id), "duplicate AS id");
    std::size_t idx = ases.size();
    ases.push_back({id, hosts});
    adj.emplace_back();
    index_[id] = idx;
    return idx;
}

void AsGraph::add_edge(std::uint32_t a, std::uint32_t b) {
    std::size_t ia = index_of(a);
    std::size_t ib = index_of(b);
    require(ia != ib, "self loop");
    if (!adjacent(ia, ib)) {
        adj[ia].push_back(ib);
        adj[ib].push_back(ia);
    }
}

std::size_t AsGraph::index_of(std::uint32_t id) const {
    auto it = index_.find(id);
    require(it != index_.end(), "unknown AS id " + std::to_string(id));
    return it->second;
}

bool AsGraph::adjacent(std::size_t a, std::size_t b) const {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
}

SetSizes anonymity_sets(const AsGraph& graph, const CompromiseScenario& scenario,
                        std::size_t max_path_ases) {
    require(scenario.compromised.size() == 1, "anonymity_sets expects one compromised AS");
    auto side = one_as_view(graph, scenario, scenario.compromised[0], max_path_ases);
    return {side.sender, side.recipient, side.sender * side.recipient};
}

std::uint64_t multi_compromise(const AsGraph& graph, const CompromiseScenario& scenario,
                               std::size_t max_path_ases) {
    require(!scenario.compromised.empty(), "no compromised AS given");
    std::uint64_t min_sender = UINT64_MAX;
    std::uint64_t min_recipient = UINT64_MAX;
    std::uint64_t min_product = UINT64_MAX;
    for (std::size_t pos : scenario.compromised) {
        auto side = one_as_view(graph, scenario, pos, max_path_ases);
        min_sender = std::min(min_sender, side.sender);
        min_recipient = std::min(min_recipient, side.recipient);
        min_product = std::min(min_product, side.sender * side.recipient);
    }
    return scenario.correlating ? min_sender * min_recipient : min_product;
}

AsGraph build_toy_topology() {
    AsGraph g;
    g.add_as(0, 8);
    g.add_as(1, 8);
    g.add_as(2, 24);
    g.add_as(3, 8);
    g.add_as(4, 8);
    g.add_as(5, 8);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    g.add_edge(3, 4);
    g.add_edge(3, 5);
    return g;
}

CompromiseScenario toy_example_path() {
    CompromiseScenario s;
    s.path = {0, 1, 2, 3};
    return s;
}

TopologyFile parse_topology(std::istream& in) {
    TopologyFile out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        auto fail = [&](const std::string& what) {
            throw Error("topo: line " + std::to_string(line_no) + ": " + what);
        };
        if (word == "as") {
            std::uint32_t id;
            std::uint64_t hosts;
            if (!(ls >> id >> hosts)) fail("expected: as <id> <hosts>");
            out.graph.add_as(id, hosts);
        } else if (word == "edge") {
            std::uint32_t a, b;
            if (!(ls >> a >> b)) fail("expected: edge <a> <b>");
            out.graph.add_edge(a, b);
        } else if (word == "path") {
            if (!out.path.empty()) fail("only one path per file");
            std::uint32_t id;
            while (ls >> id) out.path.push_back(id);
            if (out.path.empty()) fail("empty path");
        } else if (word == "scenario") {
            std::string name;
            if (!(ls >> name)) fail("scenario needs a name");
            CompromiseScenario sc;
            sc.path = out.path;
            std::string opt;
            while (ls >> opt) {
                if (opt.rfind("compromised=", 0) == 0) {
                    std::istringstream vs(opt.substr(12));
                    std::string tok;
                    while (std::getline(vs, tok, ',')) {
                        sc.compromised.push_back(std::stoul(tok));
                    }
                } else if (opt == "known") {
                    sc.position_known = true;
                } else if (opt == "correlating") {
                    sc.correlating = true;
                } else {
                    fail("unknown scenario option '" + opt + "'");
                }
            }
            if (sc.path.empty()) fail("scenario before any path line");
            if (sc.compromised.empty()) fail("scenario without compromised positions");
            out.scenarios.emplace_back(name, std::move(sc));
        } else {
            fail("unknown directive '" + word + "'");
        }
    }
    return out;
}

} // namespace veil::topo
