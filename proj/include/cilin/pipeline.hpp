#ifndef CILIN_PIPELINE_HPP
#define CILIN_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cilin/discovery.hpp"
#include "cilin/errors.hpp"
#include "cilin/hierarchy.hpp"
#include "cilin/rankers.hpp"
#include "cilin/store.hpp"

namespace cilin {

// A failure inside one pipeline stage; what() is prefixed with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error(stage + ": " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PipelineConfig {
    std::filesystem::path entities;
    std::filesystem::path snippets;
    std::filesystem::path tags;
    std::filesystem::path dictionary;
    std::filesystem::path embeddings;
    std::filesystem::path triples;
    std::filesystem::path seed_pairs;
    std::filesystem::path labeled_pairs;     // hyponym, hypernym, label for the projection model
    std::filesystem::path validation_pairs;  // optional held-out pairs for delta and K
    std::filesystem::path rankers_model;     // pre-trained; skips ranker training
    std::filesystem::path projection_model;  // pre-trained; skips projection training
    std::filesystem::path out;

    std::size_t top_n = 10;
    std::size_t clusters = 10;
    std::optional<double> delta;  // fixed threshold; fitted when unset
    double tau = 0.5;
    double keep_threshold = 0.5;
    std::uint64_t seed = 0;
    std::string created;  // manifest timestamp

    // Checks ranges and that every referenced file exists. Throws ParameterError.
    void validate() const;
    std::vector<std::filesystem::path> input_files() const;
};

// Loaded, immutable pipeline inputs.
struct Resources {
    std::vector<std::string> entities;
    std::vector<TaggedSnippet> snippets;
    TagTable tags;
    Dictionary dictionary;
    std::shared_ptr<const EmbeddingTable> table;
    std::vector<TripleRecord> triples;
    PairSet seed_pairs;
    std::vector<LabeledPair> labeled_pairs;
    std::vector<LabeledPair> validation_pairs;
    std::optional<RankerEnsemble> rankers;
    std::optional<ProjectionModel> projection;
};

Resources load_resources(const PipelineConfig& config);

// entity<TAB>sense_id<TAB>relation<TAB>value per line.
std::vector<TripleRecord> load_triples(std::istream& in);

struct BuildReport {
    std::size_t entities = 0;
    std::size_t candidates = 0;
    std::size_t kept_candidates = 0;
    std::size_t terms = 0;
    std::size_t oov_terms = 0;
    std::size_t projection_edges = 0;
    std::size_t entity_edges = 0;
    std::size_t removed_links = 0;
    std::size_t reversed_links = 0;
    std::size_t pruned_links = 0;
    std::size_t reduced_entity_links = 0;
    std::size_t edges = 0;
    std::size_t assignments = 0;
    std::size_t unassigned = 0;

    nlohmann::json to_json() const;
};

struct BuildResult {
    StoreSnapshot snapshot;
    std::optional<RankerEnsemble> rankers;
    std::optional<ProjectionModel> projection;
    BuildReport report;
};

// discovery -> ranking -> hierarchy -> disambiguation over the given entities.
// Pre-trained models in `resources` are used as-is; otherwise they are trained.
BuildResult run_pipeline(const Resources& resources, const PipelineConfig& config,
                         std::span<const std::string> entities);
BuildResult run_pipeline(const Resources& resources, const PipelineConfig& config);

// Writes the snapshot and its models into `directory`, replacing an existing store
// atomically. Refuses to overwrite a non-empty directory that is not a store.
void write_store(const BuildResult& result, const std::filesystem::path& directory);

// validate -> load -> run -> write.
BuildReport build_store(const PipelineConfig& config);

} // namespace cilin

#endif
