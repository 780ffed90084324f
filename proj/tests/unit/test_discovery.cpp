#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cilin/discovery.hpp"
#include "cilin/errors.hpp"
#include "oracles.hpp"

using namespace cilin;

namespace {

std::vector<TaggedSnippet> toy_snippets() {
    std::ifstream in(fixture::toy_dir() / "snippets.jsonl");
    return load_snippets(in);
}

TaggedSnippet snippet(const std::string& entity, std::vector<std::pair<std::string, bool>> tokens) {
    TaggedSnippet s{entity, {}};
    for (auto& [t, noun] : tokens) s.tokens.push_back({t, noun ? PartOfSpeech::Noun : PartOfSpeech::Other});
    return s;
}

} // namespace

TEST(Discovery, TopNMatchesCountingOracle) {
    auto snippets = toy_snippets();
    for (std::string entity : {"苹果", "香蕉", "梨", "诺基亚", "皇帝企鹅"})
        for (std::size_t n : {1u, 3u, 10u, 50u}) {
            auto got = collect_snippet_candidates(entity, snippets, n);
            auto want = oracle::top_n_terms(fixture::toy_dir() / "snippets.jsonl", entity, n);
            ASSERT_EQ(got.size(), want.size()) << entity << " n=" << n;
            for (std::size_t i = 0; i < got.size(); ++i) {
                EXPECT_EQ(got[i].term, want[i].first);
                EXPECT_EQ(got[i].count, want[i].second);
            }
        }
}

TEST(Discovery, NounRunsAndEntityExclusion) {
    std::vector<TaggedSnippet> s{
        snippet("X", {{"电子", true}, {"产品", true}, {"的", false}, {"X", true}, {"手机", true}})};
    auto got = collect_snippet_candidates("X", s, 10);
    std::vector<TermCount> want{{"产品", 1}, {"手机", 1}, {"电子", 1}, {"电子产品", 1}};
    EXPECT_EQ(got, want);
}

TEST(Discovery, SnippetsLoaderRejectsBadRecords) {
    std::istringstream bad_json("{\"entity\": \"a\", \"tokens\": [}\n");
    EXPECT_THROW(load_snippets(bad_json), LoadError);
    std::istringstream bad_pos("{\"entity\": \"a\", \"tokens\": [{\"t\": \"b\", \"pos\": \"VERB\"}]}\n");
    EXPECT_THROW(load_snippets(bad_pos), LoadError);
}

TEST(Discovery, HeadWordIsLongestProperSuffix) {
    Dictionary d{"企鹅", "鹅", "皇帝企鹅"};
    EXPECT_EQ(extract_head_word("皇帝企鹅", d), std::optional<std::string>("企鹅"));
    EXPECT_EQ(extract_head_word("企鹅", d), std::optional<std::string>("鹅"));
    EXPECT_EQ(extract_head_word("鹅", d), std::nullopt);
    std::ifstream in(fixture::toy_dir() / "dictionary.txt");
    EXPECT_EQ(extract_head_word("皇帝企鹅", load_dictionary(in)), std::optional<std::string>("企鹅"));
}

TEST(Discovery, MergeIsIdempotentAndTracksSources) {
    std::vector<TermCount> snip{{"水果", 3}, {"食品", 1}};
    auto merged = merge_candidates(snip, {"水果", "植物"}, std::string("果"));
    ASSERT_EQ(merged.size(), 4u);
    auto find = [&](const std::string& t) { return *std::find_if(merged.begin(), merged.end(), [&](auto& c) { return c.term == t; }); };
    EXPECT_EQ(find("水果").sources, (SourceSet{Source::Snippet, Source::Tag}));
    EXPECT_EQ(find("水果").cooccurrence, 3u);
    EXPECT_EQ(find("果").sources, SourceSet{Source::Head});
    std::vector<TermCount> twice{{"水果", 3}, {"食品", 1}, {"水果", 3}, {"食品", 1}};
    EXPECT_EQ(merge_candidates(twice, {"水果", "植物"}, std::string("果")), merged);
    EXPECT_TRUE(std::is_sorted(merged.begin(), merged.end(), [](auto& a, auto& b) { return a.term < b.term; }));
}

TEST(Discovery, FeaturesFollowTheirDefinitions) {
    std::istringstream emb("2 2\n苹果 1 0\n水果 1 1\n");
    auto table = EmbeddingTable::load(emb);
    Candidate c{"水果", {Source::Snippet, Source::Tag}, 3, {}, {}};
    CorpusFrequency freq{{"水果", 7}};
    auto f = featurize("苹果", c, table, freq);
    EXPECT_NEAR(f[0], std::log(4.0), 1e-15);
    EXPECT_EQ(f[1], 1.0);
    EXPECT_EQ(f[2], 0.0);
    EXPECT_NEAR(f[3], 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(f[4], std::log(8.0), 1e-15);
    EXPECT_EQ(f[5], 1.0);
    Candidate oov{"香蕉皮很长", {Source::Head}, 0, {}, {}};
    auto g = featurize("苹果", oov, table, freq);
    EXPECT_EQ(g[3], 0.0);
    EXPECT_EQ(g[5], 2.0);
}

TEST(Discovery, HeuristicLabels) {
    CandidateSet cs{{"a", {Source::Snippet, Source::Tag}, 2, {}, {}},
                    {"b", {Source::Snippet}, 1, {}, {}},
                    {"c", {Source::Snippet}, 5, {}, {}},
                    {"d", {Source::Snippet}, 1, {}, {}}};
    auto labeled = heuristic_label("e", cs, {{"e", "d"}});
    ASSERT_EQ(labeled.size(), 3u);
    EXPECT_EQ(labeled[0].label, 1);
    EXPECT_EQ(labeled[1].label, 0);
    EXPECT_EQ(labeled[2].label, 1);
}
