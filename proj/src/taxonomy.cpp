#include "cilin/taxonomy.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <tuple>

#include "cilin/errors.hpp"

namespace cilin {

namespace {

using Key = std::pair<std::string, std::string>;

struct WorkEdge {
    double strength = 0.0;
    bool reversed = false;
};

using EdgeMap = std::map<Key, WorkEdge>;

std::map<std::string, std::vector<std::string>> adjacency(const EdgeMap& edges) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [key, _] : edges) {
        adj[key.first].push_back(key.second);
        adj[key.second];
    }
    // keys are iterated in order, so each list is already sorted
    return adj;
}

// Shortest directed cycle as a node sequence v0 -> v1 -> ... -> v0, searched by BFS
// from each node in code-point order.
std::optional<std::vector<std::string>> shortest_cycle(const EdgeMap& edges) {
    auto adj = adjacency(edges);
    std::optional<std::vector<std::string>> best;
    for (const auto& [start, _] : adj) {
        std::map<std::string, std::string> parent;
        std::map<std::string, std::size_t> dist;
        std::deque<std::string> queue{start};
        dist[start] = 0;
        std::optional<std::string> closing;
        while (!queue.empty() && !closing) {
            std::string u = queue.front();
            queue.pop_front();
            if (best && dist[u] + 1 >= best->size()) break;
            for (const auto& v : adj[u]) {
                if (v == start) {
                    closing = u;
                    break;
                }
                if (!dist.count(v)) {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if (!closing) continue;
        std::vector<std::string> cycle;
        for (std::string v = *closing; v != start; v = parent[v]) cycle.push_back(v);
        cycle.push_back(start);
        std::reverse(cycle.begin(), cycle.end());
        if (!best || cycle.size() < best->size()) best = std::move(cycle);
        if (best->size() == 2) break;
    }
    return best;
}

bool reachable_avoiding(const EdgeMap& edges, const std::string& from, const std::string& to, const Key& skip) {
    auto adj = adjacency(edges);
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
        std::string u = stack.back();
        stack.pop_back();
        for (const auto& v : adj[u]) {
            if (u == skip.first && v == skip.second) continue;
            if (v == to) return true;
            if (seen.insert(v).second) stack.push_back(v);
        }
    }
    return false;
}

} // namespace

std::vector<Edge> normalize_edges(std::span<const Edge> edges) {
    std::map<Key, double> best;
    for (const auto& e : edges) {
        if (e.hyponym == e.hypernym) continue;
        Key k{e.hyponym, e.hypernym};
        auto it = best.find(k);
        if (it == best.end() || e.strength > it->second) best[k] = e.strength;
    }
    std::vector<Edge> out;
    out.reserve(best.size());
    for (auto& [k, s] : best) out.push_back({k.first, k.second, s});
    return out;
}

std::optional<std::vector<std::string>> find_cycle(std::span<const Edge> edges) {
    EdgeMap work;
    for (const auto& e : normalize_edges(edges)) work[{e.hyponym, e.hypernym}] = {e.strength, false};
    for (const auto& e : edges)
        if (e.hyponym == e.hypernym) return std::vector<std::string>{e.hyponym};
    return shortest_cycle(work);
}

bool is_acyclic(std::span<const Edge> edges) {
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : edges) {
        adj[e.hyponym].push_back(e.hypernym);
        ++indegree[e.hypernym];
        indegree[e.hyponym];
    }
    std::vector<std::string> ready;
    for (const auto& [node, deg] : indegree)
        if (deg == 0) ready.push_back(node);
    std::size_t visited = 0;
    while (!ready.empty()) {
        std::string u = ready.back();
        ready.pop_back();
        ++visited;
        for (const auto& v : adj[u])
            if (--indegree[v] == 0) ready.push_back(v);
    }
    return visited == indegree.size();
}

std::vector<Edge> resolve_cycles(std::span<const Edge> edges, CycleReport* report) {
    CycleReport local;
    EdgeMap work;
    for (const auto& e : normalize_edges(edges)) work[{e.hyponym, e.hypernym}] = {e.strength, false};

    while (auto cycle = shortest_cycle(work)) {
        const std::size_t len = cycle->size();
        Key weakest;
        double weakest_strength = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < len; ++i) {
            Key k{(*cycle)[i], (*cycle)[(i + 1) % len]};
            double s = work.at(k).strength;
            if (s < weakest_strength || (s == weakest_strength && k < weakest)) {
                weakest = k;
                weakest_strength = s;
            }
        }
        WorkEdge w = work.at(weakest);
        work.erase(weakest);
        if (len == 2 || w.reversed) {
            ++local.removed;
        } else {
            work[{weakest.second, weakest.first}] = {w.strength, true};
            ++local.reversed;
        }
    }

    std::vector<Key> reversed;
    for (const auto& [k, w] : work)
        if (w.reversed) reversed.push_back(k);
    for (const auto& k : reversed) {
        if (reachable_avoiding(work, k.first, k.second, k)) {
            work.erase(k);
            ++local.pruned;
        }
    }

    std::vector<Edge> out;
    out.reserve(work.size());
    for (const auto& [k, w] : work) out.push_back({k.first, k.second, w.strength});
    if (report) *report = local;
    return out;
}

HypernymGraph::HypernymGraph(std::span<const Edge> edges) {
    for (const auto& e : edges) {
        up_[e.hyponym].push_back(e.hypernym);
        down_[e.hypernym].push_back(e.hyponym);
        up_[e.hypernym];
        down_[e.hyponym];
    }
    for (auto& [_, v] : up_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (auto& [_, v] : down_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
}

const std::vector<std::string>& HypernymGraph::hypernyms(const std::string& term) const {
    static const std::vector<std::string> empty;
    auto it = up_.find(term);
    return it == up_.end() ? empty : it->second;
}

const std::vector<std::string>& HypernymGraph::hyponyms(const std::string& term) const {
    static const std::vector<std::string> empty;
    auto it = down_.find(term);
    return it == down_.end() ? empty : it->second;
}

bool HypernymGraph::contains(const std::string& term) const { return up_.count(term) > 0; }

std::vector<std::string> HypernymGraph::nodes() const {
    std::vector<std::string> out;
    out.reserve(up_.size());
    for (const auto& [n, _] : up_) out.push_back(n);
    return out;
}

std::vector<HypernymPath> HypernymGraph::paths_to_roots(const std::string& term) const {
    std::vector<HypernymPath> out;
    std::vector<std::string> chain;
    std::set<std::string> on_chain{term};
    std::function<void(const std::string&)> walk = [&](const std::string& node) {
        const auto& parents = hypernyms(node);
        if (parents.empty()) {
            out.push_back({term, chain});
            return;
        }
        for (const auto& p : parents) {
            if (!on_chain.insert(p).second)
                throw IntegrityError("cycle in hypernym edges", node + " -> " + p);
            chain.push_back(p);
            walk(p);
            chain.pop_back();
            on_chain.erase(p);
        }
    };
    walk(term);
    return out;
}

std::vector<HypernymPath> paths_to_roots(std::span<const Edge> edges, const std::string& term) {
    return HypernymGraph(edges).paths_to_roots(term);
}

} // namespace cilin
