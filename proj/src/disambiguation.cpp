#include "cilin/disambiguation.hpp"

#include <algorithm>
#include <istream>

#include "cilin/errors.hpp"
#include "cilin/text.hpp"

namespace cilin {

namespace {

std::optional<EncodedText> try_encode(const Encoder& encoder, const std::string& text) {
    try {
        return encoder.encode(text);
    } catch (const UnencodableError&) {
        return std::nullopt;
    }
}

} // namespace

SenseDescriptor::SenseDescriptor(std::string entity, std::string sense_id, std::vector<std::string> phrases)
    : entity_(std::move(entity)), sense_id_(std::move(sense_id)), phrases_(std::move(phrases)) {
    std::sort(phrases_.begin(), phrases_.end());
    phrases_.erase(std::unique(phrases_.begin(), phrases_.end()), phrases_.end());
}

std::string make_phrase(const std::string& relation, const std::string& value) { return relation + "/" + value; }

std::string sense_string(const SenseDescriptor& sense) { return join(sense.phrases(), " "); }

std::string path_string(const HypernymPath& path) {
    std::string out = path.entity;
    for (const auto& node : path.nodes) {
        out += kPathSeparator;
        out += node;
    }
    return out;
}

double score_pair(const SenseDescriptor& sense, const HypernymPath& path, const Encoder& encoder) {
    auto s = encoder.encode(sense_string(sense));
    auto p = encoder.encode(path_string(path));
    return cosine(s.vector, p.vector);
}

std::vector<Assignment> assign_paths(std::span<const SenseDescriptor> senses, std::span<const HypernymPath> paths,
                                     const Encoder& encoder, double tau) {
    std::vector<const SenseDescriptor*> ordered;
    for (const auto& s : senses) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const SenseDescriptor* a, const SenseDescriptor* b) { return a->sense_id() < b->sense_id(); });
    std::vector<std::optional<EncodedText>> sense_vecs;
    for (const auto* s : ordered) sense_vecs.push_back(try_encode(encoder, sense_string(*s)));

    std::vector<Assignment> out;
    out.reserve(paths.size());
    for (const auto& path : paths) {
        Assignment a{path, std::nullopt, -1.0};
        auto pv = try_encode(encoder, path_string(path));
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            double score = -1.0;
            if (pv && sense_vecs[i]) score = cosine(sense_vecs[i]->vector, pv->vector);
            // strict '>' over id-sorted senses keeps the smallest id on ties
            if (!best || score > a.score) {
                best = i;
                a.score = score;
            }
        }
        if (best && a.score >= tau && pv && sense_vecs[*best]) a.sense_id = ordered[*best]->sense_id();
        out.push_back(std::move(a));
    }
    return out;
}

LabeledStringPairs load_disambiguation_pairs(std::istream& in) {
    LabeledStringPairs out;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) {
        auto fields = split(line, "\t");
        if (fields.size() != 3)
            throw LoadError("expected 3 tab-separated fields, got " + std::to_string(fields.size()), line_no);
        auto label = trim(fields[2]);
        LabeledStringPair p{fields[0], fields[1], 0};
        if (label == "1") {
            p.label = 1;
            ++out.positives;
        } else if (label == "0") {
            ++out.negatives;
        } else {
            throw LoadError("label must be 0 or 1, got '" + std::string(label) + "'", line_no);
        }
        out.records.push_back(std::move(p));
    });
    return out;
}

Metrics evaluate(std::span<const LabeledStringPair> pairs, const Encoder& encoder, double tau) {
    if (pairs.empty()) throw ParameterError("evaluation needs at least one pair");
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& p : pairs) {
        bool predicted = false;
        auto s = try_encode(encoder, p.sense);
        auto q = try_encode(encoder, p.path);
        if (s && q) predicted = cosine(s->vector, q->vector) >= tau;
        else predicted = tau <= -1.0;
        if (predicted && p.label) ++tp;
        else if (predicted) ++fp;
        else if (p.label) ++fn;
        else ++tn;
    }
    Metrics m;
    m.accuracy = (tp + tn) / static_cast<double>(pairs.size());
    m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

} // namespace cilin
