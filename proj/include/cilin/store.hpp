#ifndef CILIN_STORE_HPP
#define CILIN_STORE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cilin/disambiguation.hpp"
#include "cilin/taxonomy.hpp"

namespace cilin {

inline constexpr int kStoreFormatVersion = 1;

struct EntityRecord {
    std::string name;
    std::vector<std::string> sense_ids;

    friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

struct TripleRecord {
    std::string head;
    std::string sense_id;
    std::string relation;
    std::string value;

    friend bool operator==(const TripleRecord&, const TripleRecord&) = default;
    friend auto operator<=>(const TripleRecord&, const TripleRecord&) = default;
};

struct AssignmentRecord {
    HypernymPath path;
    std::optional<std::string> sense_id;
    double score = -1.0;

    friend bool operator==(const AssignmentRecord&, const AssignmentRecord&) = default;
};

struct Manifest {
    int format_version = kStoreFormatVersion;
    std::map<std::string, std::size_t> counts;
    std::map<std::string, std::string> models;      // role -> file name inside the store
    std::map<std::string, std::string> provenance;
    std::string created;                            // ISO-8601 UTC

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct StoreSnapshot {
    std::vector<EntityRecord> entities;
    std::vector<SenseDescriptor> senses;
    std::vector<TripleRecord> triples;
    std::vector<Edge> edges;
    std::vector<AssignmentRecord> assignments;
    Manifest manifest;

    // Sorts every collection by its primary key.
    void canonicalize();
    // Referential integrity across all collections plus edge acyclicity. Throws
    // IntegrityError naming the first offending record.
    void validate() const;
    Manifest counted_manifest() const;

    bool same_records(const StoreSnapshot& other) const;
};

// Writes manifest.json plus one JSON-lines file per collection, sorted by key.
Manifest save_snapshot(StoreSnapshot snapshot, const std::filesystem::path& directory);

// Reads and re-validates a store directory. Throws LoadError or IntegrityError.
StoreSnapshot load_snapshot(const std::filesystem::path& directory);

std::string format_timestamp(std::int64_t unix_seconds);

struct SenseView {
    SenseDescriptor sense;
    std::vector<TripleRecord> triples;
    std::vector<std::size_t> path_ids;
};

struct PathView {
    std::size_t path_id = 0;
    HypernymPath path;
    std::optional<std::string> sense_id;
    std::optional<double> score;
};

struct EntityView {
    std::string name;
    bool is_entity = false;  // false when the name is only a schema term
    std::vector<SenseView> senses;
    std::vector<PathView> paths;
};

struct SchemaNode {
    std::string term;
    std::size_t entity_count = 0;
    std::vector<SchemaNode> children;

    friend bool operator==(const SchemaNode&, const SchemaNode&) = default;
};

// Indexed, read-only view over a validated snapshot. Safe for concurrent reads.
class KnowledgeGraph {
public:
    explicit KnowledgeGraph(StoreSnapshot snapshot);

    const StoreSnapshot& snapshot() const { return snapshot_; }
    const HypernymGraph& graph() const { return graph_; }
    bool is_entity(const std::string& name) const;
    // Known either as an entity or as a node of the edge set.
    bool knows(const std::string& name) const;

    std::optional<EntityView> query_entity(const std::string& name) const;

    // Seeded, breadth-limited downward sample of the schema. Schema terms are nodes
    // with at least one hyponym; without a root every parentless schema term is a
    // root. Returns nullopt for an unknown root.
    std::optional<std::vector<SchemaNode>> schema_sample(const std::optional<std::string>& root, std::size_t depth,
                                                         std::size_t max_children, std::uint64_t seed) const;

    // Entities with an upward chain (entity included) ending in exactly `path`.
    std::vector<std::string> entities_under_path(const std::vector<std::string>& path) const;

    // Distinct entities strictly below `term`.
    std::size_t descendant_entity_count(const std::string& term) const;

private:
    SchemaNode sample_node(const std::string& term, std::size_t depth, std::size_t max_children,
                           std::uint64_t seed) const;

    StoreSnapshot snapshot_;
    HypernymGraph graph_;
    std::map<std::string, std::size_t> entity_index_;
    std::map<std::pair<std::string, std::string>, std::size_t> sense_index_;
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> triples_by_sense_;
    std::map<HypernymPath, std::size_t> assignment_index_;
};

} // namespace cilin

#endif
