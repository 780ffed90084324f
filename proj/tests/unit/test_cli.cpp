#include <array>
#include <cstdio>
#include <fstream>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int status = -1;
    std::string out;
};

CliRun cli(const std::string& args, bool merge_stderr = false, const std::string& env = "") {
    std::string cmd = env + "'" + fixture::cli_binary().string() + "' " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int raw = pclose(p);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string resource_flags() {
    auto d = fixture::toy_dir();
    return " --snippets " + q(d / "snippets.jsonl") + " --tags " + q(d / "tags.tsv") + " --dictionary " +
           q(d / "dictionary.txt") + " --embeddings " + q(d / "embeddings.txt") + " --triples " +
           q(d / "triples.tsv") + " --seed-pairs " + q(d / "seed_pairs.tsv") + " --labeled-pairs " +
           q(d / "labeled_pairs.tsv");
}

std::string build_args(const fs::path& out) {
    return "build --entities " + q(fixture::toy_dir() / "entities.txt") + resource_flags() + " --out " + q(out) +
           " --created 2024-01-01T00:00:00Z";
}

} // namespace

TEST(Cli, BuildThenQuery) {
    fixture::TempDir tmp;
    auto b = cli(build_args(tmp / "store"));
    ASSERT_EQ(b.status, 0);
    EXPECT_EQ(json::parse(b.out)["entities"], 4);

    auto qj = cli("query 苹果 --store " + q(tmp / "store"));
    ASSERT_EQ(qj.status, 0);
    EXPECT_EQ(json::parse(qj.out)["entity"], "苹果");
    auto qt = cli("query 苹果 --format text --store " + q(tmp / "store"));
    ASSERT_EQ(qt.status, 0);
    EXPECT_NE(qt.out.find("水果"), std::string::npos);

    EXPECT_EQ(cli("query 苹果 --store " + q(tmp / "nowhere")).status, 4);
    auto via_env = cli("query 苹果", false, "CILIN_STORE=" + q(tmp / "store") + " ");
    EXPECT_EQ(via_env.status, 0);
    EXPECT_EQ(via_env.out, qj.out);
}

TEST(Cli, ExitCodes) {
    fixture::TempDir tmp;
    ASSERT_EQ(cli(build_args(tmp / "store")).status, 0);
    EXPECT_EQ(cli("query 梨 --store " + q(tmp / "store")).status, 3);
    EXPECT_EQ(cli("query 梨 --store " + q(tmp / "missing")).status, 4);
    EXPECT_EQ(cli("").status, 2);
    EXPECT_EQ(cli("frobnicate").status, 2);
    EXPECT_EQ(cli("build --out x").status, 2);
    EXPECT_EQ(cli("query 苹果 --format yaml").status, 2);
    EXPECT_EQ(cli("eval nope").status, 2);
    EXPECT_EQ(cli("build --entities " + q(fixture::toy_dir() / "entities.txt") + " --out " + q(tmp / "x")).status, 1);
    auto err = cli("build --entities " + q(tmp / "nope.txt") + resource_flags() + " --out " + q(tmp / "x"), true);
    EXPECT_NE(err.status, 0);
    EXPECT_NE(err.out.find("cilin: error:"), std::string::npos);
    EXPECT_NE(err.out.find("nope.txt"), std::string::npos);
}

TEST(Cli, GenerateMatchesOfflineBuild) {
    fixture::TempDir tmp;
    ASSERT_EQ(cli(build_args(tmp / "store")).status, 0);
    auto g = cli("query 梨 --generate --store " + q(tmp / "store") + resource_flags());
    ASSERT_EQ(g.status, 0);
    auto doc = json::parse(g.out);
    EXPECT_EQ(doc["generated"], true);
    EXPECT_FALSE(doc["paths"].empty());
    EXPECT_EQ(cli("query 从未出现 --generate --store " + q(tmp / "store") + resource_flags()).status, 3);
}

TEST(Cli, ConfigFileSuppliesFlags) {
    fixture::TempDir tmp;
    ASSERT_EQ(cli(build_args(tmp / "store")).status, 0);
    std::ofstream(tmp / "cilin.toml") << "[query]\nstore = \"" << (tmp / "store").string() << "\"\nformat = \"json\"\n";
    auto r = cli("--config " + q(tmp / "cilin.toml") + " query 苹果");
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out, cli("query 苹果 --store " + q(tmp / "store")).out);
}

TEST(Cli, EvalSuites) {
    for (std::string suite : {"projection", "taxonomy", "ranking", "disambiguation"}) {
        auto r = cli("eval " + suite);
        EXPECT_EQ(r.status, 0) << r.out;
        EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
    }
    auto j = cli("eval taxonomy --format json");
    EXPECT_TRUE(json::parse(j.out)["checks"].is_array());
}

TEST(Cli, TrainRankersWritesAModel) {
    fixture::TempDir tmp;
    auto r = cli("train-rankers --entities " + q(fixture::toy_dir() / "entities.txt") + resource_flags() + " --out " +
                 q(tmp / "r.json"));
    ASSERT_EQ(r.status, 0);
    EXPECT_TRUE(json::parse(fixture::read_file(tmp / "r.json")).contains("linear_svm"));
}
