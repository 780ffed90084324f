#include "cilin/store.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "cilin/errors.hpp"
#include "cilin/text.hpp"

namespace cilin {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kEntitiesFile = "entities.jsonl";
constexpr const char* kSensesFile = "senses.jsonl";
constexpr const char* kTriplesFile = "triples.jsonl";
constexpr const char* kEdgesFile = "edges.jsonl";
constexpr const char* kAssignmentsFile = "assignments.jsonl";

std::string describe_edge(const Edge& e) { return e.hyponym + std::string(kPathSeparator) + e.hypernym; }

void check_term(const std::string& term, const char* what, const std::string& record) {
    if (term.empty()) throw IntegrityError(std::string("empty ") + what, record);
    if (contains_separator(term)) throw IntegrityError(std::string(what) + " contains the path separator", record);
}

json entity_json(const EntityRecord& e) { return {{"name", e.name}, {"sense_ids", e.sense_ids}}; }
json sense_json(const SenseDescriptor& s) {
    return {{"entity", s.entity()}, {"sense_id", s.sense_id()}, {"phrases", s.phrases()}};
}
json triple_json(const TripleRecord& t) {
    return {{"head", t.head}, {"sense_id", t.sense_id}, {"relation", t.relation}, {"value", t.value}};
}
json edge_json(const Edge& e) { return {{"hyponym", e.hyponym}, {"hypernym", e.hypernym}, {"strength", e.strength}}; }
json assignment_json(const AssignmentRecord& a) {
    return {{"entity", a.path.entity},
            {"nodes", a.path.nodes},
            {"sense_id", a.sense_id ? json(*a.sense_id) : json(nullptr)},
            {"score", a.score}};
}

template <class T, class Fn>
void write_lines(const fs::path& path, const std::vector<T>& records, Fn&& to_json) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

template <class T, class Fn>
std::vector<T> read_lines(const fs::path& path, Fn&& from_json) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("missing store file " + path.string());
    std::vector<T> out;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) {
        try {
            out.push_back(from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw LoadError(path.filename().string() + ": " + e.what(), line_no);
        }
    });
    return out;
}

json manifest_json(const Manifest& m) {
    return {{"format_version", m.format_version},
            {"counts", m.counts},
            {"models", m.models},
            {"provenance", m.provenance},
            {"created", m.created}};
}

} // namespace

std::string format_timestamp(std::int64_t unix_seconds) {
    std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void StoreSnapshot::canonicalize() {
    for (auto& e : entities) std::sort(e.sense_ids.begin(), e.sense_ids.end());
    std::sort(entities.begin(), entities.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    std::sort(senses.begin(), senses.end(), [](const auto& a, const auto& b) {
        return std::tie(a.entity(), a.sense_id()) < std::tie(b.entity(), b.sense_id());
    });
    std::sort(triples.begin(), triples.end());
    std::sort(edges.begin(), edges.end(),
              [](const auto& a, const auto& b) { return std::tie(a.hyponym, a.hypernym) < std::tie(b.hyponym, b.hypernym); });
    std::sort(assignments.begin(), assignments.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
}

void StoreSnapshot::validate() const {
    std::set<std::string> names;
    for (const auto& e : entities) {
        check_term(e.name, "entity name", "entity '" + e.name + "'");
        if (!names.insert(e.name).second) throw IntegrityError("duplicate entity", e.name);
        std::set<std::string> ids(e.sense_ids.begin(), e.sense_ids.end());
        if (ids.size() != e.sense_ids.size()) throw IntegrityError("duplicate sense id in entity", e.name);
    }

    std::set<std::pair<std::string, std::string>> sense_keys;
    for (const auto& s : senses) {
        std::string rec = "sense " + s.entity() + "#" + s.sense_id();
        if (!names.count(s.entity())) throw IntegrityError("sense references unknown entity", rec);
        if (s.sense_id().empty()) throw IntegrityError("empty sense id", rec);
        if (!sense_keys.insert({s.entity(), s.sense_id()}).second) throw IntegrityError("duplicate sense", rec);
    }
    for (const auto& e : entities)
        for (const auto& id : e.sense_ids)
            if (!sense_keys.count({e.name, id}))
                throw IntegrityError("dangling sense reference", "entity " + e.name + " -> sense " + id);
    for (const auto& [entity, id] : sense_keys) {
        const auto it = std::find_if(entities.begin(), entities.end(), [&](const auto& e) { return e.name == entity; });
        if (std::find(it->sense_ids.begin(), it->sense_ids.end(), id) == it->sense_ids.end())
            throw IntegrityError("sense not listed by its entity", "sense " + entity + "#" + id);
    }

    for (const auto& t : triples)
        if (!sense_keys.count({t.head, t.sense_id}))
            throw IntegrityError("dangling sense reference in triple",
                                 "triple " + t.head + "#" + t.sense_id + " " + t.relation + "/" + t.value);

    std::set<std::pair<std::string, std::string>> edge_keys;
    for (const auto& e : edges) {
        std::string rec = "edge " + describe_edge(e);
        check_term(e.hyponym, "hyponym", rec);
        check_term(e.hypernym, "hypernym", rec);
        if (e.hyponym == e.hypernym) throw IntegrityError("self-loop edge", rec);
        if (!std::isfinite(e.strength)) throw IntegrityError("non-finite edge strength", rec);
        if (!edge_keys.insert({e.hyponym, e.hypernym}).second) throw IntegrityError("duplicate edge", rec);
    }
    if (auto cycle = find_cycle(edges)) {
        Edge first{(*cycle)[0], (*cycle)[cycle->size() > 1 ? 1 : 0], 0.0};
        throw IntegrityError("cyclic edge set", "edge " + describe_edge(first) + " (cycle " +
                                                    join(*cycle, std::string(kPathSeparator)) + ")");
    }

    std::set<HypernymPath> seen_paths;
    for (const auto& a : assignments) {
        std::string rec = "assignment " + path_string(a.path);
        if (!names.count(a.path.entity)) throw IntegrityError("assignment references unknown entity", rec);
        if (a.sense_id && !sense_keys.count({a.path.entity, *a.sense_id}))
            throw IntegrityError("dangling sense reference in assignment", rec + " -> " + *a.sense_id);
        if (!std::isfinite(a.score) || a.score < -1.0 - 1e-12 || a.score > 1.0 + 1e-12)
            throw IntegrityError("assignment score outside [-1, 1]", rec);
        std::string prev = a.path.entity;
        for (const auto& node : a.path.nodes) {
            if (!edge_keys.count({prev, node}))
                throw IntegrityError("assignment path uses a missing edge", rec);
            prev = node;
        }
        if (!seen_paths.insert(a.path).second) throw IntegrityError("duplicate assignment", rec);
    }
}

Manifest StoreSnapshot::counted_manifest() const {
    Manifest m = manifest;
    m.format_version = kStoreFormatVersion;
    m.counts = {{"entities", entities.size()},
                {"senses", senses.size()},
                {"triples", triples.size()},
                {"edges", edges.size()},
                {"assignments", assignments.size()}};
    return m;
}

bool StoreSnapshot::same_records(const StoreSnapshot& other) const {
    return entities == other.entities && senses == other.senses && triples == other.triples && edges == other.edges &&
           assignments == other.assignments;
}

Manifest save_snapshot(StoreSnapshot snapshot, const fs::path& directory) {
    snapshot.canonicalize();
    snapshot.validate();
    snapshot.manifest = snapshot.counted_manifest();
    fs::create_directories(directory);
    write_lines(directory / kEntitiesFile, snapshot.entities, entity_json);
    write_lines(directory / kSensesFile, snapshot.senses, sense_json);
    write_lines(directory / kTriplesFile, snapshot.triples, triple_json);
    write_lines(directory / kEdgesFile, snapshot.edges, edge_json);
    write_lines(directory / kAssignmentsFile, snapshot.assignments, assignment_json);
    std::ofstream out(directory / kManifestFile, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (directory / kManifestFile).string());
    out << manifest_json(snapshot.manifest).dump(2) << '\n';
    return snapshot.manifest;
}

StoreSnapshot load_snapshot(const fs::path& directory) {
    std::ifstream in(directory / kManifestFile, std::ios::binary);
    if (!in) throw LoadError("no " + std::string(kManifestFile) + " in " + directory.string());
    StoreSnapshot snap;
    try {
        json m = json::parse(in);
        int version = m.at("format_version").get<int>();
        if (version != kStoreFormatVersion)
            throw LoadError("unsupported store format_version " + std::to_string(version) + " (supported: " +
                            std::to_string(kStoreFormatVersion) + ")");
        snap.manifest.format_version = version;
        snap.manifest.counts = m.at("counts").get<std::map<std::string, std::size_t>>();
        snap.manifest.models = m.at("models").get<std::map<std::string, std::string>>();
        snap.manifest.provenance = m.at("provenance").get<std::map<std::string, std::string>>();
        snap.manifest.created = m.at("created").get<std::string>();
    } catch (const json::exception& e) {
        throw LoadError(std::string(kManifestFile) + ": " + e.what());
    }

    snap.entities = read_lines<EntityRecord>(directory / kEntitiesFile, [](const json& j) {
        return EntityRecord{j.at("name").get<std::string>(), j.at("sense_ids").get<std::vector<std::string>>()};
    });
    snap.senses = read_lines<SenseDescriptor>(directory / kSensesFile, [](const json& j) {
        return SenseDescriptor(j.at("entity").get<std::string>(), j.at("sense_id").get<std::string>(),
                               j.at("phrases").get<std::vector<std::string>>());
    });
    snap.triples = read_lines<TripleRecord>(directory / kTriplesFile, [](const json& j) {
        return TripleRecord{j.at("head").get<std::string>(), j.at("sense_id").get<std::string>(),
                            j.at("relation").get<std::string>(), j.at("value").get<std::string>()};
    });
    snap.edges = read_lines<Edge>(directory / kEdgesFile, [](const json& j) {
        return Edge{j.at("hyponym").get<std::string>(), j.at("hypernym").get<std::string>(),
                    j.at("strength").get<double>()};
    });
    snap.assignments = read_lines<AssignmentRecord>(directory / kAssignmentsFile, [](const json& j) {
        AssignmentRecord a;
        a.path.entity = j.at("entity").get<std::string>();
        a.path.nodes = j.at("nodes").get<std::vector<std::string>>();
        if (!j.at("sense_id").is_null()) a.sense_id = j.at("sense_id").get<std::string>();
        a.score = j.at("score").get<double>();
        return a;
    });

    const auto actual = snap.counted_manifest().counts;
    for (const auto& [name, count] : actual) {
        auto it = snap.manifest.counts.find(name);
        if (it == snap.manifest.counts.end()) throw LoadError("manifest lacks a count for " + name);
        if (it->second != count)
            throw LoadError("manifest count for " + name + " is " + std::to_string(it->second) + " but the record file has " +
                            std::to_string(count));
    }
    for (const auto& [role, file] : snap.manifest.models)
        if (!fs::exists(directory / file)) throw LoadError("manifest references missing model file " + file);

    snap.validate();
    return snap;
}

KnowledgeGraph::KnowledgeGraph(StoreSnapshot snapshot) : snapshot_(std::move(snapshot)), graph_(snapshot_.edges) {
    snapshot_.validate();
    for (std::size_t i = 0; i < snapshot_.entities.size(); ++i) entity_index_[snapshot_.entities[i].name] = i;
    for (std::size_t i = 0; i < snapshot_.senses.size(); ++i)
        sense_index_[{snapshot_.senses[i].entity(), snapshot_.senses[i].sense_id()}] = i;
    for (std::size_t i = 0; i < snapshot_.triples.size(); ++i)
        triples_by_sense_[{snapshot_.triples[i].head, snapshot_.triples[i].sense_id}].push_back(i);
    for (std::size_t i = 0; i < snapshot_.assignments.size(); ++i)
        assignment_index_[snapshot_.assignments[i].path] = i;
}

bool KnowledgeGraph::is_entity(const std::string& name) const { return entity_index_.count(name) > 0; }

bool KnowledgeGraph::knows(const std::string& name) const { return is_entity(name) || graph_.contains(name); }

std::optional<EntityView> KnowledgeGraph::query_entity(const std::string& name) const {
    if (!knows(name)) return std::nullopt;
    EntityView view;
    view.name = name;
    view.is_entity = is_entity(name);

    auto paths = graph_.paths_to_roots(name);
    std::erase_if(paths, [](const HypernymPath& p) { return p.nodes.empty(); });
    for (std::size_t i = 0; i < paths.size(); ++i) {
        PathView pv;
        pv.path_id = i;
        pv.path = paths[i];
        auto it = assignment_index_.find(paths[i]);
        if (it != assignment_index_.end()) {
            const auto& a = snapshot_.assignments[it->second];
            pv.sense_id = a.sense_id;
            pv.score = a.score;
        }
        view.paths.push_back(std::move(pv));
    }

    if (view.is_entity) {
        const auto& record = snapshot_.entities[entity_index_.at(name)];
        for (const auto& id : record.sense_ids) {
            SenseView sv;
            sv.sense = snapshot_.senses[sense_index_.at({name, id})];
            if (auto it = triples_by_sense_.find({name, id}); it != triples_by_sense_.end())
                for (auto t : it->second) sv.triples.push_back(snapshot_.triples[t]);
            for (const auto& pv : view.paths)
                if (pv.sense_id == id) sv.path_ids.push_back(pv.path_id);
            view.senses.push_back(std::move(sv));
        }
    }
    return view;
}

std::size_t KnowledgeGraph::descendant_entity_count(const std::string& term) const {
    std::set<std::string> seen;
    std::vector<std::string> stack{term};
    std::size_t count = 0;
    while (!stack.empty()) {
        std::string u = stack.back();
        stack.pop_back();
        for (const auto& v : graph_.hyponyms(u)) {
            if (!seen.insert(v).second) continue;
            if (is_entity(v)) ++count;
            stack.push_back(v);
        }
    }
    return count;
}

SchemaNode KnowledgeGraph::sample_node(const std::string& term, std::size_t depth, std::size_t max_children,
                                       std::uint64_t seed) const {
    SchemaNode node{term, descendant_entity_count(term), {}};
    if (depth == 0) return node;
    std::vector<std::string> children;
    for (const auto& h : graph_.hyponyms(term))
        if (!graph_.hyponyms(h).empty()) children.push_back(h);
    if (children.size() > max_children) {
        std::stable_sort(children.begin(), children.end(), [&](const std::string& a, const std::string& b) {
            return hash_string(a, seed) < hash_string(b, seed);
        });
        children.resize(max_children);
        std::sort(children.begin(), children.end());
    }
    for (const auto& c : children) node.children.push_back(sample_node(c, depth - 1, max_children, seed));
    return node;
}

std::optional<std::vector<SchemaNode>> KnowledgeGraph::schema_sample(const std::optional<std::string>& root,
                                                                     std::size_t depth, std::size_t max_children,
                                                                     std::uint64_t seed) const {
    if (depth == 0 || max_children == 0) throw ParameterError("depth and max_children must be positive");
    std::vector<SchemaNode> forest;
    if (root) {
        if (!knows(*root)) return std::nullopt;
        forest.push_back(sample_node(*root, depth, max_children, seed));
        return forest;
    }
    for (const auto& n : graph_.nodes())
        if (graph_.hypernyms(n).empty() && !graph_.hyponyms(n).empty())
            forest.push_back(sample_node(n, depth, max_children, seed));
    return forest;
}

std::vector<std::string> KnowledgeGraph::entities_under_path(const std::vector<std::string>& path) const {
    if (path.empty()) throw ParameterError("path must be non-empty");
    std::set<std::string> candidates;
    const auto& head = path.front();
    if (is_entity(head)) candidates.insert(head);
    std::vector<std::string> stack{head};
    std::set<std::string> seen{head};
    while (!stack.empty()) {
        std::string u = stack.back();
        stack.pop_back();
        for (const auto& v : graph_.hyponyms(u)) {
            if (!seen.insert(v).second) continue;
            if (is_entity(v)) candidates.insert(v);
            stack.push_back(v);
        }
    }
    std::vector<std::string> out;
    for (const auto& entity : candidates) {
        for (const auto& p : graph_.paths_to_roots(entity)) {
            std::vector<std::string> chain{entity};
            chain.insert(chain.end(), p.nodes.begin(), p.nodes.end());
            if (chain.size() >= path.size() && std::equal(path.rbegin(), path.rend(), chain.rbegin())) {
                out.push_back(entity);
                break;
            }
        }
    }
    return out;
}

} // namespace cilin
