#include <random>

#include <gtest/gtest.h>

#include "cilin/errors.hpp"
#include "cilin/taxonomy.hpp"
#include "oracles.hpp"

using namespace cilin;

namespace {

std::vector<Edge> random_edges(std::mt19937_64& rng, std::size_t max_nodes, double density) {
    std::size_t n = 2 + rng() % (max_nodes - 1);
    std::bernoulli_distribution link(density);
    std::uniform_real_distribution<double> w(0, 1);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && link(rng)) edges.push_back({"n" + std::to_string(i), "n" + std::to_string(j), w(rng)});
    return edges;
}

std::set<std::pair<std::string, std::string>> undirected(const std::vector<Edge>& edges) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& e : edges) out.insert(std::minmax(e.hyponym, e.hypernym));
    return out;
}

} // namespace

TEST(Taxonomy, WorkedExamples) {
    std::vector<Edge> two{{"A", "B", 0.9}, {"B", "A", 0.4}};
    CycleReport r;
    EXPECT_EQ(resolve_cycles(two, &r), (std::vector<Edge>{{"A", "B", 0.9}}));
    EXPECT_EQ(r.removed, 1u);
    std::vector<Edge> three{{"A", "B", 0.9}, {"B", "C", 0.8}, {"C", "A", 0.2}};
    CycleReport r3;
    EXPECT_EQ(resolve_cycles(three, &r3), (std::vector<Edge>{{"A", "B", 0.9}, {"B", "C", 0.8}}));
    EXPECT_EQ(r3.reversed, 1u);
    EXPECT_EQ(r3.pruned, 1u);
}

TEST(Taxonomy, ResolutionIsAcyclicAndNeverInventsLinks) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        std::mt19937_64 rng(seed);
        auto edges = random_edges(rng, 9, 0.35);
        auto out = resolve_cycles(edges);
        EXPECT_FALSE(oracle::has_cycle(out)) << "seed " << seed;
        EXPECT_TRUE(is_acyclic(out));
        auto allowed = undirected(edges);
        for (const auto& p : undirected(out)) EXPECT_TRUE(allowed.count(p)) << p.first << "-" << p.second;
        EXPECT_TRUE(std::is_sorted(out.begin(), out.end(), [](auto& a, auto& b) {
            return std::tie(a.hyponym, a.hypernym) < std::tie(b.hyponym, b.hypernym);
        }));
        EXPECT_EQ(resolve_cycles(out), out);
    }
}

TEST(Taxonomy, AcyclicInputIsOnlyNormalized) {
    std::vector<Edge> dag{{"b", "c", 0.5}, {"a", "b", 0.5}, {"a", "b", 0.7}, {"a", "a", 1.0}, {"a", "c", 0.1}};
    EXPECT_EQ(resolve_cycles(dag), (std::vector<Edge>{{"a", "b", 0.7}, {"a", "c", 0.1}, {"b", "c", 0.5}}));
    EXPECT_EQ(normalize_edges(dag), resolve_cycles(dag));
}

TEST(Taxonomy, FindCycleReturnsAShortestCycle) {
    std::vector<Edge> e{{"a", "b", 1}, {"b", "c", 1}, {"c", "a", 1}, {"x", "y", 1}, {"y", "x", 1}};
    auto c = find_cycle(e);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->size(), 2u);
    EXPECT_FALSE(find_cycle(std::vector<Edge>{{"a", "b", 1}}));
}

TEST(Taxonomy, PathsMatchBruteForceChains) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::mt19937_64 rng(seed + 500);
        auto dag = resolve_cycles(random_edges(rng, 7, 0.4));
        HypernymGraph g(dag);
        for (const auto& node : g.nodes()) {
            std::set<std::vector<std::string>> got;
            for (const auto& p : g.paths_to_roots(node)) {
                EXPECT_EQ(p.entity, node);
                got.insert(p.nodes);
            }
            EXPECT_EQ(got, oracle::all_chains(dag, node)) << "seed " << seed << " node " << node;
        }
    }
}

TEST(Taxonomy, GraphAdjacencyIsOrdered) {
    std::vector<Edge> e{{"苹果", "食品", 1}, {"苹果", "水果", 1}, {"水果", "食品", 1}};
    HypernymGraph g(e);
    EXPECT_EQ(g.hypernyms("苹果"), (std::vector<std::string>{"水果", "食品"}));
    EXPECT_EQ(g.hyponyms("食品"), (std::vector<std::string>{"水果", "苹果"}));
    EXPECT_TRUE(g.hypernyms("无").empty());
    EXPECT_FALSE(g.contains("无"));
}

TEST(Taxonomy, CyclicGraphPathsThrow) {
    std::vector<Edge> e{{"a", "b", 1}, {"b", "a", 1}};
    EXPECT_THROW(paths_to_roots(e, "a"), IntegrityError);
}
