#include "cilin/discovery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>

#include <nlohmann/json.hpp>

#include "cilin/errors.hpp"
#include "cilin/text.hpp"

namespace cilin {

using nlohmann::json;

int SourceSet::count() const { return std::popcount(bits_); }

std::vector<std::string> SourceSet::names() const {
    std::vector<std::string> out;
    if (has(Source::Snippet)) out.emplace_back("SNIPPET");
    if (has(Source::Tag)) out.emplace_back("TAG");
    if (has(Source::Head)) out.emplace_back("HEAD");
    return out;
}

namespace {

void require_term(const std::string& term, std::size_t line_no) {
    if (term.empty()) throw LoadError("empty term", line_no);
    if (contains_separator(term)) throw LoadError("term '" + term + "' contains the reserved path separator", line_no);
}

std::pair<std::string, std::string> two_columns(std::string_view line, std::size_t line_no) {
    auto fields = split(line, "\t");
    if (fields.size() != 2) throw LoadError("expected 2 tab-separated fields, got " + std::to_string(fields.size()), line_no);
    std::string a(trim(fields[0]));
    std::string b(trim(fields[1]));
    require_term(a, line_no);
    require_term(b, line_no);
    return {std::move(a), std::move(b)};
}

// Calls fn(term) for every noun token and every maximal run of two or more noun
// tokens. Tokens equal to `stop` are skipped and break runs.
template <class Fn>
void for_each_noun_term(const TaggedSnippet& snippet, const std::string* stop, Fn&& fn) {
    std::string run;
    std::size_t run_len = 0;
    auto close_run = [&] {
        if (run_len >= 2) fn(run);
        run.clear();
        run_len = 0;
    };
    for (const auto& tok : snippet.tokens) {
        if (tok.pos != PartOfSpeech::Noun || (stop && tok.surface == *stop)) {
            close_run();
            continue;
        }
        fn(tok.surface);
        run += tok.surface;
        ++run_len;
    }
    close_run();
}

} // namespace

std::vector<TaggedSnippet> load_snippets(std::istream& in) {
    std::vector<TaggedSnippet> out;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) {
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw LoadError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!record.is_object() || !record.contains("entity") || !record["entity"].is_string() ||
            !record.contains("tokens") || !record["tokens"].is_array())
            throw LoadError("snippet record needs string 'entity' and array 'tokens'", line_no);
        TaggedSnippet snippet;
        snippet.entity = record["entity"].get<std::string>();
        require_term(snippet.entity, line_no);
        for (const auto& tok : record["tokens"]) {
            if (!tok.is_object() || !tok.contains("t") || !tok["t"].is_string() || !tok.contains("pos") ||
                !tok["pos"].is_string())
                throw LoadError("token needs string fields 't' and 'pos'", line_no);
            TaggedToken t;
            t.surface = tok["t"].get<std::string>();
            require_term(t.surface, line_no);
            auto pos = tok["pos"].get<std::string>();
            if (pos == "NOUN")
                t.pos = PartOfSpeech::Noun;
            else if (pos == "OTHER")
                t.pos = PartOfSpeech::Other;
            else
                throw LoadError("unknown pos '" + pos + "'", line_no);
            snippet.tokens.push_back(std::move(t));
        }
        if (snippet.tokens.empty()) throw LoadError("snippet has no tokens", line_no);
        out.push_back(std::move(snippet));
    });
    return out;
}

TagTable load_tags(std::istream& in) {
    TagTable tags;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) {
        auto [entity, tag] = two_columns(line, line_no);
        tags[entity].insert(tag);
    });
    return tags;
}

Dictionary load_dictionary(std::istream& in) {
    Dictionary dict;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) {
        std::string term(trim(line));
        require_term(term, line_no);
        dict.insert(std::move(term));
    });
    return dict;
}

PairSet load_seed_pairs(std::istream& in) {
    PairSet pairs;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) { pairs.insert(two_columns(line, line_no)); });
    return pairs;
}

std::vector<TermCount> collect_snippet_candidates(const std::string& entity, std::span<const TaggedSnippet> snippets,
                                                  std::size_t n) {
    if (n == 0) throw ParameterError("top-n must be at least 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& snippet : snippets) {
        if (snippet.entity != entity) continue;
        for_each_noun_term(snippet, &entity, [&](const std::string& term) {
            if (term != entity) ++counts[term];
        });
    }
    std::vector<TermCount> ranked;
    ranked.reserve(counts.size());
    for (auto& [term, count] : counts) ranked.push_back({term, count});
    // counts is already code-point ordered, so a stable sort keeps the tie rule.
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const TermCount& a, const TermCount& b) { return a.count > b.count; });
    if (ranked.size() > n) ranked.resize(n);
    return ranked;
}

std::set<std::string> collect_category_tags(const std::string& entity, const TagTable& tags) {
    auto it = tags.find(entity);
    if (it == tags.end()) return {};
    std::set<std::string> out = it->second;
    out.erase(entity);
    return out;
}

std::optional<std::string> extract_head_word(const std::string& entity, const Dictionary& dictionary) {
    if (entity.empty()) throw ParameterError("entity must be non-empty");
    auto chars = utf8_chars(entity);
    std::size_t offset = chars.empty() ? 0 : chars[0].size();
    for (std::size_t i = 1; i < chars.size(); ++i) {
        std::string suffix = entity.substr(offset);
        if (dictionary.count(suffix)) return suffix;
        offset += chars[i].size();
    }
    return std::nullopt;
}

CandidateSet merge_candidates(std::span<const TermCount> snippet, const std::set<std::string>& tags,
                              const std::optional<std::string>& head) {
    std::map<std::string, Candidate> merged;
    auto touch = [&](const std::string& term) -> Candidate& {
        auto& c = merged[term];
        c.term = term;
        return c;
    };
    for (const auto& tc : snippet) {
        auto& c = touch(tc.term);
        c.sources.add(Source::Snippet);
        c.cooccurrence = std::max(c.cooccurrence, tc.count);
    }
    for (const auto& tag : tags) touch(tag).sources.add(Source::Tag);
    if (head) touch(*head).sources.add(Source::Head);

    CandidateSet out;
    out.reserve(merged.size());
    for (auto& [_, c] : merged) out.push_back(std::move(c));
    return out;
}

CorpusFrequency corpus_frequency(std::span<const TaggedSnippet> snippets) {
    CorpusFrequency freq;
    for (const auto& snippet : snippets) {
        for (const auto& tok : snippet.tokens)
            if (tok.pos != PartOfSpeech::Noun) ++freq[tok.surface];
        for_each_noun_term(snippet, nullptr, [&](const std::string& term) { ++freq[term]; });
    }
    return freq;
}

Features featurize(const std::string& entity, const Candidate& candidate, const EmbeddingTable& table,
                   const CorpusFrequency& corpus_freq) {
    Features f{};
    f[0] = std::log1p(static_cast<double>(candidate.cooccurrence));
    f[1] = candidate.sources.has(Source::Tag) ? 1.0 : 0.0;
    f[2] = candidate.sources.has(Source::Head) ? 1.0 : 0.0;
    const Vector* ve = table.find(entity);
    const Vector* vt = table.find(candidate.term);
    if (ve && vt && norm(*ve) > 0.0 && norm(*vt) > 0.0) f[3] = cosine(*ve, *vt);
    auto it = corpus_freq.find(candidate.term);
    f[4] = std::log1p(it == corpus_freq.end() ? 0.0 : static_cast<double>(it->second));
    double entity_len = static_cast<double>(utf8_length(entity));
    f[5] = entity_len > 0 ? std::min(static_cast<double>(utf8_length(candidate.term)) / entity_len, 2.0) : 0.0;
    return f;
}

void featurize_all(const std::string& entity, CandidateSet& candidates, const EmbeddingTable& table,
                   const CorpusFrequency& corpus_freq) {
    for (auto& c : candidates) c.features = featurize(entity, c, table, corpus_freq);
}

std::vector<LabeledExample> heuristic_label(const std::string& entity, const CandidateSet& candidates,
                                            const PairSet& seed_pairs) {
    std::vector<LabeledExample> out;
    for (const auto& c : candidates) {
        bool seeded = seed_pairs.count({entity, c.term}) > 0;
        if (c.sources.count() >= 2 || seeded)
            out.push_back({c.features, 1});
        else if (c.cooccurrence <= 1)
            out.push_back({c.features, 0});
    }
    return out;
}

} // namespace cilin
