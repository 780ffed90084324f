#include <fstream>

#include <gtest/gtest.h>

#include "cilin/errors.hpp"
#include "cilin/store.hpp"
#include "oracles.hpp"

using namespace cilin;
namespace fs = std::filesystem;

namespace {

StoreSnapshot apple() {
    StoreSnapshot s;
    s.entities = {{"苹果", {"fruit", "phone"}}, {"香蕉", {}}};
    s.senses = {{"苹果", "fruit", {"类别/水果"}}, {"苹果", "phone", {"类别/手机"}}};
    s.triples = {{"苹果", "fruit", "类别", "水果"}, {"苹果", "phone", "类别", "手机"}};
    s.edges = {{"苹果", "水果", 0.9}, {"苹果", "手机", 0.8}, {"香蕉", "水果", 0.7}, {"水果", "物", 0.5},
               {"手机", "物", 0.5}};
    s.assignments = {{{"苹果", {"水果", "物"}}, "fruit", 0.8},
                     {{"苹果", {"手机", "物"}}, "phone", 0.7},
                     {{"香蕉", {"水果", "物"}}, std::nullopt, -1.0}};
    s.manifest.created = "2024-01-01T00:00:00Z";
    return s;
}

std::string integrity_message(const StoreSnapshot& s) {
    try {
        s.validate();
    } catch (const IntegrityError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Store, RoundTripPreservesRecords) {
    fixture::TempDir tmp;
    auto s = apple();
    auto manifest = save_snapshot(s, tmp.path());
    EXPECT_EQ(manifest.counts.at("entities"), 2u);
    EXPECT_EQ(manifest.counts.at("edges"), 5u);
    auto back = load_snapshot(tmp.path());
    s.canonicalize();
    EXPECT_TRUE(back.same_records(s));
    EXPECT_EQ(back.manifest, manifest);
}

TEST(Store, RecordFilesHaveOneLinePerRecord) {
    fixture::TempDir tmp;
    auto manifest = save_snapshot(apple(), tmp.path());
    for (const auto& [name, count] : manifest.counts) {
        std::ifstream in(tmp.path() / (name + ".jsonl"));
        std::size_t lines = 0;
        for (std::string line; std::getline(in, line);) ++lines;
        EXPECT_EQ(lines, count) << name;
    }
}

TEST(Store, SavingIsByteDeterministic) {
    fixture::TempDir tmp;
    auto s = apple();
    save_snapshot(s, tmp / "a");
    std::reverse(s.edges.begin(), s.edges.end());
    std::reverse(s.entities.begin(), s.entities.end());
    save_snapshot(s, tmp / "b");
    EXPECT_TRUE(fixture::same_tree(tmp / "a", tmp / "b"));
}

TEST(Store, IntegrityViolationsNameTheRecord) {
    auto s = apple();
    s.entities[0].sense_ids.push_back("ghost");
    EXPECT_NE(integrity_message(s).find("ghost"), std::string::npos);

    s = apple();
    s.triples.push_back({"梨", "x", "类别", "水果"});
    EXPECT_NE(integrity_message(s).find("梨"), std::string::npos);

    s = apple();
    s.edges.push_back({"物", "苹果", 0.1});
    auto msg = integrity_message(s);
    EXPECT_NE(msg.find("物"), std::string::npos);

    s = apple();
    s.assignments.push_back({{"苹果", {"水果", "不存在"}}, "fruit", 0.5});
    EXPECT_NE(integrity_message(s).find("不存在"), std::string::npos);

    s = apple();
    s.assignments[0].sense_id = "phantom";
    EXPECT_NE(integrity_message(s).find("phantom"), std::string::npos);

    fixture::TempDir tmp;
    s = apple();
    s.edges.push_back({"物", "苹果", 0.1});
    EXPECT_THROW(save_snapshot(s, tmp.path()), IntegrityError);
    EXPECT_FALSE(fs::exists(tmp.path() / "manifest.json"));
}

TEST(Store, LoadRejectsDamage) {
    fixture::TempDir tmp;
    save_snapshot(apple(), tmp.path());
    EXPECT_THROW(load_snapshot(tmp / "missing"), LoadError);

    auto manifest = nlohmann::json::parse(fixture::read_file(tmp.path() / "manifest.json"));
    manifest["format_version"] = 99;
    std::ofstream(tmp.path() / "manifest.json") << manifest.dump();
    EXPECT_THROW(load_snapshot(tmp.path()), Error);

    save_snapshot(apple(), tmp.path());
    std::ofstream(tmp.path() / "edges.jsonl", std::ios::app) << "{not json\n";
    EXPECT_THROW(load_snapshot(tmp.path()), Error);
}

TEST(Store, QueryEntityJoinsSensesAndPaths) {
    KnowledgeGraph g(apple());
    auto v = g.query_entity("苹果");
    ASSERT_TRUE(v);
    EXPECT_TRUE(v->is_entity);
    ASSERT_EQ(v->senses.size(), 2u);
    ASSERT_EQ(v->paths.size(), 2u);
    for (const auto& sense : v->senses)
        for (auto id : sense.path_ids) EXPECT_EQ(v->paths[id].sense_id, sense.sense.sense_id());
    auto term = g.query_entity("水果");
    ASSERT_TRUE(term);
    EXPECT_FALSE(term->is_entity);
    EXPECT_FALSE(g.query_entity("梨"));
}

TEST(Store, SchemaSamplingAndPathLookups) {
    KnowledgeGraph g(apple());
    auto forest = g.schema_sample(std::nullopt, 3, 20, 0);
    ASSERT_TRUE(forest);
    ASSERT_EQ(forest->size(), 1u);
    EXPECT_EQ((*forest)[0].term, "物");
    EXPECT_EQ((*forest)[0].entity_count, 2u);
    EXPECT_EQ(g.schema_sample(std::nullopt, 3, 20, 0), forest);
    auto limited = g.schema_sample(std::string("物"), 1, 1, 4);
    ASSERT_TRUE(limited);
    EXPECT_EQ((*limited)[0].children.size(), 1u);
    EXPECT_FALSE(g.schema_sample(std::string("无"), 3, 20, 0));
    EXPECT_EQ(g.entities_under_path({"水果", "物"}), (std::vector<std::string>{"苹果", "香蕉"}));
    EXPECT_EQ(g.entities_under_path({"手机", "物"}), (std::vector<std::string>{"苹果"}));
    EXPECT_EQ(g.entities_under_path({"物"}), (std::vector<std::string>{"苹果", "香蕉"}));
    EXPECT_TRUE(g.entities_under_path({"水果"}).empty());
    EXPECT_EQ(g.descendant_entity_count("水果"), 2u);
}

TEST(Store, TimestampFormat) {
    EXPECT_EQ(format_timestamp(0), "1970-01-01T00:00:00Z");
    EXPECT_EQ(format_timestamp(1704067200), "2024-01-01T00:00:00Z");
}
