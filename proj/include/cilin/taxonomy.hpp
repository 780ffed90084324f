#ifndef CILIN_TAXONOMY_HPP
#define CILIN_TAXONOMY_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cilin {

// Directed is-a link, hyponym -> hypernym. Larger strength means more confident.
struct Edge {
    std::string hyponym;
    std::string hypernym;
    double strength = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct HypernymPath {
    std::string entity;
    // From the entity's immediate hypernym up to a root.
    std::vector<std::string> nodes;

    friend bool operator==(const HypernymPath&, const HypernymPath&) = default;
    friend auto operator<=>(const HypernymPath&, const HypernymPath&) = default;
};

struct CycleReport {
    std::size_t removed = 0;   // two-node cycles broken by deletion
    std::size_t reversed = 0;  // longer cycles broken by reversing the weakest link
    std::size_t pruned = 0;    // reversed links dropped as transitively redundant
};

// Sorts by (hyponym, hypernym), drops self-loops and keeps the strongest of any
// parallel duplicates.
std::vector<Edge> normalize_edges(std::span<const Edge> edges);

bool is_acyclic(std::span<const Edge> edges);

// A shortest directed cycle as nodes v0, v1, ..., vk (closing back to v0), if any.
std::optional<std::vector<std::string>> find_cycle(std::span<const Edge> edges);

// Breaks every directed cycle, shortest first (ties: the cycle found from the
// code-point-smallest start node). A two-node cycle loses its weakest link; a longer
// one has its weakest link reversed. A link already reversed once is deleted instead,
// which bounds the work. Finally, reversed links that duplicate another directed
// path between their endpoints are pruned. Output is acyclic and sorted.
std::vector<Edge> resolve_cycles(std::span<const Edge> edges, CycleReport* report = nullptr);

// Read-only adjacency view over an acyclic edge set.
class HypernymGraph {
public:
    explicit HypernymGraph(std::span<const Edge> edges);

    // Hypernyms of `term` in code-point order.
    const std::vector<std::string>& hypernyms(const std::string& term) const;
    const std::vector<std::string>& hyponyms(const std::string& term) const;
    bool contains(const std::string& term) const;
    // Every node, code-point ordered.
    std::vector<std::string> nodes() const;

    // Every maximal upward chain from `term`, depth-first with hypernyms visited in
    // code-point order. Throws IntegrityError if a cycle is met.
    std::vector<HypernymPath> paths_to_roots(const std::string& term) const;

private:
    std::map<std::string, std::vector<std::string>> up_;
    std::map<std::string, std::vector<std::string>> down_;
};

std::vector<HypernymPath> paths_to_roots(std::span<const Edge> edges, const std::string& term);

} // namespace cilin

#endif
