#ifndef CILIN_DISAMBIGUATION_HPP
#define CILIN_DISAMBIGUATION_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cilin/embedding.hpp"
#include "cilin/taxonomy.hpp"

namespace cilin {

// One meaning of an entity. Phrases are "relation/value" strings, kept sorted by
// code point and free of duplicates.
class SenseDescriptor {
public:
    SenseDescriptor() = default;
    SenseDescriptor(std::string entity, std::string sense_id, std::vector<std::string> phrases);

    const std::string& entity() const { return entity_; }
    const std::string& sense_id() const { return sense_id_; }
    const std::vector<std::string>& phrases() const { return phrases_; }

    friend bool operator==(const SenseDescriptor&, const SenseDescriptor&) = default;

private:
    std::string entity_;
    std::string sense_id_;
    std::vector<std::string> phrases_;
};

std::string make_phrase(const std::string& relation, const std::string& value);

// Phrases in code-point order joined by single spaces.
std::string sense_string(const SenseDescriptor& sense);

// Entity followed by the path nodes, joined by the arrow separator.
std::string path_string(const HypernymPath& path);

// Cosine of the two encoded strings; encoder errors propagate.
double score_pair(const SenseDescriptor& sense, const HypernymPath& path, const Encoder& encoder);

struct Assignment {
    HypernymPath path;
    std::optional<std::string> sense_id;  // nullopt means unassigned
    double score = -1.0;
};

// Each path goes to its best-scoring sense when that score reaches tau (ties: smallest
// sense id). Unassigned paths keep their best score, or -1 when there are no senses.
// A sense or path the encoder cannot represent scores -1.
std::vector<Assignment> assign_paths(std::span<const SenseDescriptor> senses, std::span<const HypernymPath> paths,
                                     const Encoder& encoder, double tau);

struct LabeledStringPair {
    std::string sense;
    std::string path;
    int label = 0;
};

struct LabeledStringPairs {
    std::vector<LabeledStringPair> records;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

// sense_string<TAB>path_string<TAB>{0,1} per line.
LabeledStringPairs load_disambiguation_pairs(std::istream& in);

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Predicts positive when cosine(sense, path) >= tau. Pairs the encoder cannot
// represent are predicted negative.
Metrics evaluate(std::span<const LabeledStringPair> pairs, const Encoder& encoder, double tau);

} // namespace cilin

#endif
