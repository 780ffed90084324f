#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace oracle {

std::vector<std::pair<std::string, std::size_t>> top_n_terms(const fs::path& snippets, const std::string& entity,
                                                             std::size_t n) {
    std::map<std::string, std::size_t> counts;
    std::ifstream in(snippets);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto record = json::parse(line);
        if (record["entity"] != entity) continue;
        std::vector<std::string> run;
        auto flush = [&] {
            if (run.size() >= 2) {
                std::string joined;
                for (const auto& t : run) joined += t;
                ++counts[joined];
            }
            run.clear();
        };
        for (const auto& tok : record["tokens"]) {
            std::string t = tok["t"];
            if (tok["pos"] != "NOUN" || t == entity) {
                flush();
                continue;
            }
            ++counts[t];
            run.push_back(t);
        }
        flush();
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > n) ranked.resize(n);
    return ranked;
}

double bag_cosine(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t common = 0;
    for (const auto& t : a) common += b.count(t);
    return static_cast<double>(common) / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

bool has_cycle(const std::vector<cilin::Edge>& edges) {
    std::map<std::string, std::vector<std::string>> out;
    std::set<std::string> nodes;
    for (const auto& e : edges) {
        out[e.hyponym].push_back(e.hypernym);
        nodes.insert(e.hyponym);
        nodes.insert(e.hypernym);
    }
    for (const auto& start : nodes) {
        std::set<std::string> on_path;
        std::function<bool(const std::string&)> dfs = [&](const std::string& u) {
            on_path.insert(u);
            for (const auto& v : out[u]) {
                if (v == start) return true;
                if (!on_path.count(v) && dfs(v)) return true;
            }
            on_path.erase(u);
            return false;
        };
        if (dfs(start)) return true;
    }
    return false;
}

std::set<std::vector<std::string>> all_chains(const std::vector<cilin::Edge>& edges, const std::string& term) {
    std::set<std::vector<std::string>> chains;
    std::vector<std::string> chain;
    std::function<void(const std::string&)> walk = [&](const std::string& u) {
        bool leaf = true;
        for (const auto& e : edges) {
            if (e.hyponym != u) continue;
            leaf = false;
            chain.push_back(e.hypernym);
            walk(e.hypernym);
            chain.pop_back();
        }
        if (leaf) chains.insert(chain);
    };
    walk(term);
    return chains;
}

double mean_squared_residual(const Eigen::MatrixXd& phi, const std::vector<cilin::TrainingPair>& pairs) {
    double sum = 0.0;
    for (const auto& p : pairs) sum += (phi * p.x - p.y).squaredNorm();
    return sum / static_cast<double>(pairs.size());
}

Eigen::MatrixXd descend(const std::vector<cilin::TrainingPair>& pairs, std::size_t steps) {
    const auto d = pairs.front().x.size();
    const double n = static_cast<double>(pairs.size());
    double trace = 0.0;
    for (const auto& p : pairs) trace += p.x.squaredNorm();
    // 2/N * trace(X X^T) bounds the gradient's Lipschitz constant from above.
    const double step = n / (2.0 * trace);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t s = 0; s < steps; ++s) {
        Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(d, d);
        for (const auto& p : pairs) grad += (2.0 / n) * (phi * p.x - p.y) * p.x.transpose();
        phi -= step * grad;
    }
    return phi;
}

namespace {

bool fail(std::string* error, const std::string& where, const std::string& what) {
    if (error) *error = where + ": " + what;
    return false;
}

bool type_matches(const std::string& type, const json& doc) {
    if (type == "object") return doc.is_object();
    if (type == "array") return doc.is_array();
    if (type == "string") return doc.is_string();
    if (type == "integer") return doc.is_number_integer();
    if (type == "number") return doc.is_number();
    if (type == "boolean") return doc.is_boolean();
    if (type == "null") return doc.is_null();
    return false;
}

std::size_t code_points(const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

bool check(const json& root, const json& schema, const json& doc, const std::string& where, std::string* error) {
    if (schema.contains("$ref")) {
        std::string ref = schema["$ref"];
        const std::string prefix = "#/$defs/";
        if (ref.rfind(prefix, 0) != 0) return fail(error, where, "unsupported $ref " + ref);
        return check(root, root["$defs"][ref.substr(prefix.size())], doc, where, error);
    }
    if (schema.contains("type")) {
        const auto& t = schema["type"];
        bool ok = false;
        if (t.is_string())
            ok = type_matches(t, doc);
        else
            for (const auto& alt : t) ok = ok || type_matches(alt, doc);
        if (!ok) return fail(error, where, "expected type " + t.dump() + ", got " + doc.dump());
    }
    if (schema.contains("enum") &&
        std::find(schema["enum"].begin(), schema["enum"].end(), doc) == schema["enum"].end())
        return fail(error, where, "value " + doc.dump() + " not in enum");
    if (doc.is_number()) {
        if (schema.contains("minimum") && doc.get<double>() < schema["minimum"].get<double>())
            return fail(error, where, "below minimum");
        if (schema.contains("maximum") && doc.get<double>() > schema["maximum"].get<double>())
            return fail(error, where, "above maximum");
    }
    if (doc.is_string() && schema.contains("minLength") &&
        code_points(doc.get<std::string>()) < schema["minLength"].get<std::size_t>())
        return fail(error, where, "string too short");
    if (doc.is_array()) {
        if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>())
            return fail(error, where, "too few items");
        if (schema.contains("items"))
            for (std::size_t i = 0; i < doc.size(); ++i)
                if (!check(root, schema["items"], doc[i], where + "[" + std::to_string(i) + "]", error)) return false;
    }
    if (doc.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema["required"])
                if (!doc.contains(key.get<std::string>()))
                    return fail(error, where, "missing required key " + key.get<std::string>());
        for (const auto& [key, value] : doc.items()) {
            if (schema.contains("properties") && schema["properties"].contains(key)) {
                if (!check(root, schema["properties"][key], value, where + "." + key, error)) return false;
            } else if (schema.contains("additionalProperties")) {
                const auto& extra = schema["additionalProperties"];
                if (extra.is_boolean() && !extra.get<bool>()) return fail(error, where, "unexpected key " + key);
                if (extra.is_object() && !check(root, extra, value, where + "." + key, error)) return false;
            }
        }
    }
    return true;
}

} // namespace

bool validate(const json& schema, const json& doc, std::string* error) { return check(schema, schema, doc, "$", error); }

json load_schema(const std::string& name) {
    std::ifstream in(fixture::schema_dir() / name);
    return json::parse(in);
}

} // namespace oracle

namespace fixture {

fs::path toy_dir() { return CILIN_TOY_FIXTURE_DIR; }
fs::path schema_dir() { return CILIN_SCHEMA_DIR; }
fs::path cli_binary() { return CILIN_CLI_BINARY; }

cilin::PipelineConfig toy_config(const fs::path& out) {
    const auto dir = toy_dir();
    cilin::PipelineConfig c;
    c.entities = dir / "entities.txt";
    c.snippets = dir / "snippets.jsonl";
    c.tags = dir / "tags.tsv";
    c.dictionary = dir / "dictionary.txt";
    c.embeddings = dir / "embeddings.txt";
    c.triples = dir / "triples.tsv";
    c.seed_pairs = dir / "seed_pairs.tsv";
    c.labeled_pairs = dir / "labeled_pairs.tsv";
    c.out = out;
    c.seed = 0;
    c.created = "2024-01-01T00:00:00Z";
    return c;
}

TempDir::TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("cilin-test-" + std::to_string(rng()));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string* difference) {
    auto listing = [](const fs::path& root) {
        std::set<std::string> files;
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file()) files.insert(fs::relative(entry.path(), root).string());
        return files;
    };
    auto fa = listing(a);
    auto fb = listing(b);
    if (fa != fb) {
        if (difference) *difference = "file lists differ";
        return false;
    }
    for (const auto& f : fa)
        if (read_file(a / f) != read_file(b / f)) {
            if (difference) *difference = f + " differs";
            return false;
        }
    return true;
}

} // namespace fixture
