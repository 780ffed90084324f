#ifndef CILIN_DISCOVERY_HPP
#define CILIN_DISCOVERY_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cilin/embedding.hpp"

namespace cilin {

enum class PartOfSpeech { Noun, Other };

struct TaggedToken {
    std::string surface;
    PartOfSpeech pos = PartOfSpeech::Other;
};

struct TaggedSnippet {
    std::string entity;
    std::vector<TaggedToken> tokens;
};

// Where a hypernym candidate came from.
enum class Source : std::uint8_t { Snippet = 1, Tag = 2, Head = 4 };

class SourceSet {
public:
    constexpr SourceSet() = default;
    constexpr SourceSet(std::initializer_list<Source> sources) {
        for (Source s : sources) add(s);
    }
    constexpr void add(Source s) { bits_ |= static_cast<std::uint8_t>(s); }
    constexpr void add(SourceSet other) { bits_ |= other.bits_; }
    constexpr bool has(Source s) const { return bits_ & static_cast<std::uint8_t>(s); }
    constexpr bool empty() const { return bits_ == 0; }
    int count() const;
    std::vector<std::string> names() const;
    friend constexpr bool operator==(SourceSet, SourceSet) = default;

private:
    std::uint8_t bits_ = 0;
};

inline constexpr std::size_t kFeatureCount = 6;
using Features = std::array<double, kFeatureCount>;

struct Candidate {
    std::string term;
    SourceSet sources;
    std::size_t cooccurrence = 0;
    Features features{};
    std::optional<double> score;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

using CandidateSet = std::vector<Candidate>;

struct TermCount {
    std::string term;
    std::size_t count = 0;
    friend bool operator==(const TermCount&, const TermCount&) = default;
};

using TagTable = std::map<std::string, std::set<std::string>>;
using Dictionary = std::set<std::string>;
using PairSet = std::set<std::pair<std::string, std::string>>;
using CorpusFrequency = std::unordered_map<std::string, std::size_t>;

// {"entity": ..., "tokens": [{"t": ..., "pos": "NOUN"|"OTHER"}, ...]} per line.
std::vector<TaggedSnippet> load_snippets(std::istream& in);
// entity<TAB>tag per line.
TagTable load_tags(std::istream& in);
// One term per line.
Dictionary load_dictionary(std::istream& in);
// hyponym<TAB>hypernym per line.
PairSet load_seed_pairs(std::istream& in);

// Top-n nouns and maximal noun runs by co-occurrence with the entity. Ties are
// broken by code-point order; the entity's own surface form never appears and
// splits noun runs.
std::vector<TermCount> collect_snippet_candidates(const std::string& entity,
                                                  std::span<const TaggedSnippet> snippets, std::size_t n);

std::set<std::string> collect_category_tags(const std::string& entity, const TagTable& tags);

// Longest proper suffix of the entity found in the dictionary.
std::optional<std::string> extract_head_word(const std::string& entity, const Dictionary& dictionary);

// One candidate per distinct term, ordered by code point. Repeated snippet terms
// keep their largest count, so merging is idempotent.
CandidateSet merge_candidates(std::span<const TermCount> snippet, const std::set<std::string>& tags,
                              const std::optional<std::string>& head);

// Occurrence counts of every token and noun run across the whole snippet corpus.
CorpusFrequency corpus_frequency(std::span<const TaggedSnippet> snippets);

// [log(1+cooccurrence), is-tag, is-head, cosine(entity, term) or 0, log(1+corpus freq),
//  min(len(term)/len(entity), 2)]
Features featurize(const std::string& entity, const Candidate& candidate, const EmbeddingTable& table,
                   const CorpusFrequency& corpus_freq);

void featurize_all(const std::string& entity, CandidateSet& candidates, const EmbeddingTable& table,
                   const CorpusFrequency& corpus_freq);

struct LabeledExample {
    Features features{};
    int label = 0;
};

// Weak supervision: positive when seen by two or more sources or listed in the seeds;
// negative when single-source with co-occurrence <= 1; everything else is left out.
std::vector<LabeledExample> heuristic_label(const std::string& entity, const CandidateSet& candidates,
                                            const PairSet& seed_pairs);

// Name recorded in model files for the labeling rule above.
inline constexpr const char* kHeuristicLabelRule = "multi-source-or-seed (substitute heuristic)";

} // namespace cilin

#endif
