#include "cilin/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>

#include "cilin/disambiguation.hpp"
#include "cilin/taxonomy.hpp"
#include "cilin/text.hpp"

namespace cilin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRankersFile = "rankers.json";
constexpr const char* kProjectionFile = "projection.json";

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    return in;
}

template <typename Loader>
auto load_optional(const fs::path& path, Loader&& loader) -> decltype(loader(std::declval<std::istream&>())) {
    if (path.empty()) return {};
    auto in = open_input(path);
    try {
        return loader(in);
    } catch (const LoadError& e) {
        throw LoadError(path.filename().string() + ": " + e.what());
    }
}

std::vector<std::string> load_entity_list(std::istream& in) {
    std::set<std::string> names;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) {
        std::string name(trim(line));
        if (name.empty()) return;
        if (contains_separator(name)) throw LoadError("entity name contains the path separator", line_no);
        names.insert(std::move(name));
    });
    return {names.begin(), names.end()};
}

std::string number(double v) { return format_double(v); }

// Upward reachability in an acyclic edge set.
bool reaches(const HypernymGraph& graph, const std::string& from, const std::string& to) {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
        auto u = std::move(stack.back());
        stack.pop_back();
        for (const auto& v : graph.hypernyms(u)) {
            if (v == to) return true;
            if (seen.insert(v).second) stack.push_back(v);
        }
    }
    return false;
}

// Drops entity -> h when h is already above another direct hypernym of the entity.
std::vector<Edge> reduce_entity_links(const std::vector<Edge>& edges, const std::set<std::string>& entities,
                                      std::size_t* dropped) {
    HypernymGraph graph(edges);
    std::vector<Edge> out;
    for (const auto& e : edges) {
        bool redundant = false;
        if (entities.count(e.hyponym)) {
            for (const auto& other : graph.hypernyms(e.hyponym))
                if (other != e.hypernym && reaches(graph, other, e.hypernym)) {
                    redundant = true;
                    break;
                }
        }
        if (redundant)
            ++*dropped;
        else
            out.push_back(e);
    }
    return out;
}

ProjectionModel train_projection_stage(const Resources& res, const PipelineConfig& config) {
    std::vector<LabeledPair> positives;
    for (const auto& p : res.labeled_pairs)
        if (p.label == 1) positives.push_back(p);
    if (positives.empty()) throw TrainingError("no positive labeled pairs to train the projection");
    auto train = make_training_pairs(positives, *res.table);

    std::vector<LabeledPair> val_pos;
    for (const auto& p : res.validation_pairs)
        if (p.label == 1) val_pos.push_back(p);
    auto validation = make_training_pairs(val_pos, *res.table);

    std::size_t k = std::min(config.clusters, train.size());
    if (!validation.empty()) k = select_cluster_count(train, validation, k, config.seed);
    auto model = train_projection(train, k, config.seed);

    if (config.delta) {
        model.delta = *config.delta;
        model.provenance["delta_mode"] = "fixed";
    } else if (!res.validation_pairs.empty()) {
        model.delta = fit_delta(model, res.validation_pairs, *res.table).delta;
        model.provenance["delta_mode"] = "fit:validation";
    } else {
        model.delta = fit_delta(model, res.labeled_pairs, *res.table).delta;
        model.provenance["delta_mode"] = "fit:training";
    }
    model.provenance["training_pairs"] = std::to_string(train.size());
    return model;
}

} // namespace

void PipelineConfig::validate() const {
    if (top_n < 1) throw ParameterError("top-n must be at least 1");
    if (clusters < 1) throw ParameterError("clusters must be at least 1");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ParameterError("tau must lie in [0, 1]");
    if (!(keep_threshold >= 0.0 && keep_threshold <= 1.0)) throw ParameterError("keep-threshold must lie in [0, 1]");
    if (delta && !(*delta > 0.0 && std::isfinite(*delta))) throw ParameterError("delta must be a positive number");
    if (embeddings.empty()) throw ParameterError("an embeddings file is required");
    for (const auto& path : input_files())
        if (!fs::is_regular_file(path)) throw ParameterError("input file not found: " + path.string());
}

std::vector<fs::path> PipelineConfig::input_files() const {
    std::vector<fs::path> files;
    for (const auto* p : {&entities, &snippets, &tags, &dictionary, &embeddings, &triples, &seed_pairs, &labeled_pairs,
                          &validation_pairs, &rankers_model, &projection_model})
        if (!p->empty()) files.push_back(*p);
    return files;
}

std::vector<TripleRecord> load_triples(std::istream& in) {
    std::vector<TripleRecord> out;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) {
        auto cols = split(line, "\t");
        if (cols.size() != 4) throw LoadError("expected 4 tab-separated columns, got " + std::to_string(cols.size()), line_no);
        for (auto& c : cols) c = std::string(trim(c));
        if (cols[0].empty() || cols[1].empty() || cols[2].empty() || cols[3].empty())
            throw LoadError("empty column", line_no);
        out.push_back({cols[0], cols[1], cols[2], cols[3]});
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Resources load_resources(const PipelineConfig& config) {
    return in_stage("load", [&] {
        Resources res;
        res.entities = load_optional(config.entities, load_entity_list);
        res.snippets = load_optional(config.snippets, [](std::istream& in) { return load_snippets(in); });
        res.tags = load_optional(config.tags, [](std::istream& in) { return load_tags(in); });
        res.dictionary = load_optional(config.dictionary, [](std::istream& in) { return load_dictionary(in); });
        res.triples = load_optional(config.triples, [](std::istream& in) { return load_triples(in); });
        res.seed_pairs = load_optional(config.seed_pairs, [](std::istream& in) { return load_seed_pairs(in); });
        res.labeled_pairs = load_optional(config.labeled_pairs, [](std::istream& in) { return load_labeled_pairs(in); });
        res.validation_pairs =
            load_optional(config.validation_pairs, [](std::istream& in) { return load_labeled_pairs(in); });
        res.table = std::make_shared<const EmbeddingTable>(EmbeddingTable::load_file(config.embeddings));
        if (!config.rankers_model.empty()) res.rankers = RankerEnsemble::load(config.rankers_model);
        if (!config.projection_model.empty()) {
            res.projection = ProjectionModel::load(config.projection_model);
            if (res.projection->dimension != res.table->dimension())
                throw LoadError("projection model dimension " + std::to_string(res.projection->dimension) +
                                " does not match embeddings dimension " + std::to_string(res.table->dimension()));
        }
        return res;
    });
}

json BuildReport::to_json() const {
    return {{"entities", entities},
            {"candidates", candidates},
            {"kept_candidates", kept_candidates},
            {"terms", terms},
            {"oov_terms", oov_terms},
            {"projection_edges", projection_edges},
            {"entity_edges", entity_edges},
            {"removed_links", removed_links},
            {"reversed_links", reversed_links},
            {"pruned_links", pruned_links},
            {"reduced_entity_links", reduced_entity_links},
            {"edges", edges},
            {"assignments", assignments},
            {"unassigned", unassigned}};
}

BuildResult run_pipeline(const Resources& res, const PipelineConfig& config) {
    return run_pipeline(res, config, res.entities);
}

BuildResult run_pipeline(const Resources& res, const PipelineConfig& config, std::span<const std::string> entity_span) {
    if (!res.table) throw StageError("load", "no embedding table");
    const EmbeddingTable& table = *res.table;
    std::set<std::string> entities(entity_span.begin(), entity_span.end());
    BuildResult result;
    BuildReport& report = result.report;
    report.entities = entities.size();

    // discovery
    std::map<std::string, CandidateSet> candidates = in_stage("discovery", [&] {
        std::map<std::string, CandidateSet> out;
        auto freq = corpus_frequency(res.snippets);
        for (const auto& entity : entities) {
            auto snippet = collect_snippet_candidates(entity, res.snippets, config.top_n);
            auto set = merge_candidates(snippet, collect_category_tags(entity, res.tags),
                                        extract_head_word(entity, res.dictionary));
            featurize_all(entity, set, table, freq);
            report.candidates += set.size();
            out.emplace(entity, std::move(set));
        }
        return out;
    });

    // ranking
    in_stage("ranking", [&] {
        if (res.rankers) {
            result.rankers = res.rankers;
        } else if (report.candidates > 0) {
            std::vector<LabeledExample> examples;
            for (const auto& [entity, set] : candidates) {
                auto labeled = heuristic_label(entity, set, res.seed_pairs);
                examples.insert(examples.end(), labeled.begin(), labeled.end());
            }
            RankerConfig rc;
            rc.seed = config.seed;
            result.rankers = train_rankers(examples, rc);
        }
        if (!result.rankers) return;
        for (auto& [entity, set] : candidates) {
            set = rank_candidates(std::move(set), *result.rankers, config.keep_threshold);
            report.kept_candidates += set.size();
        }
    });

    // hierarchy
    std::vector<Edge> edges = in_stage("hierarchy", [&] {
        std::set<std::string> terms;
        for (const auto& [entity, set] : candidates)
            for (const auto& c : set) terms.insert(c.term);
        report.terms = terms.size();

        if (res.projection)
            result.projection = res.projection;
        else if (!res.labeled_pairs.empty() && !terms.empty())
            result.projection = train_projection_stage(res, config);

        std::vector<Edge> raw;
        if (result.projection && terms.size() > 1) {
            for (const auto& s : build_edge_set(terms, *result.projection, table, &report.oov_terms))
                raw.push_back(s.edge());
        } else {
            for (const auto& t : terms)
                if (!table.contains(t)) ++report.oov_terms;
        }
        report.projection_edges = raw.size();
        for (const auto& [entity, set] : candidates)
            for (const auto& c : set) raw.push_back({entity, c.term, c.score.value_or(0.0)});
        report.entity_edges = raw.size() - report.projection_edges;

        CycleReport cycles;
        auto resolved = resolve_cycles(raw, &cycles);
        report.removed_links = cycles.removed;
        report.reversed_links = cycles.reversed;
        report.pruned_links = cycles.pruned;
        auto reduced = reduce_entity_links(resolved, entities, &report.reduced_entity_links);
        report.edges = reduced.size();
        return reduced;
    });

    // disambiguation
    StoreSnapshot& snap = result.snapshot;
    snap.edges = edges;
    in_stage("disambiguation", [&] {
        std::map<std::pair<std::string, std::string>, std::vector<std::string>> phrases;
        for (const auto& t : res.triples) {
            if (!entities.count(t.head)) continue;
            snap.triples.push_back(t);
            phrases[{t.head, t.sense_id}].push_back(make_phrase(t.relation, t.value));
        }
        std::map<std::string, std::vector<SenseDescriptor>> senses;
        for (auto& [key, list] : phrases) senses[key.first].emplace_back(key.first, key.second, std::move(list));

        HypernymGraph graph(edges);
        AveragingEncoder encoder(table);
        for (const auto& entity : entities) {
            EntityRecord record{entity, {}};
            const auto& own = senses[entity];
            for (const auto& s : own) {
                record.sense_ids.push_back(s.sense_id());
                snap.senses.push_back(s);
            }
            snap.entities.push_back(std::move(record));

            auto paths = graph.paths_to_roots(entity);
            std::erase_if(paths, [](const HypernymPath& p) { return p.nodes.empty(); });
            for (auto& a : assign_paths(own, paths, encoder, config.tau)) {
                if (a.sense_id)
                    ++report.assignments;
                else
                    ++report.unassigned;
                snap.assignments.push_back({std::move(a.path), std::move(a.sense_id), a.score});
            }
        }
    });

    auto& m = snap.manifest;
    m.created = config.created;
    m.provenance = {{"seed", std::to_string(config.seed)},
                    {"top_n", std::to_string(config.top_n)},
                    {"clusters", std::to_string(config.clusters)},
                    {"tau", number(config.tau)},
                    {"keep_threshold", number(config.keep_threshold)},
                    {"dimension", std::to_string(table.dimension())},
                    {"labeling_rule", kHeuristicLabelRule}};
    if (result.rankers) m.models["rankers"] = kRankersFile;
    if (result.projection) {
        m.models["projection"] = kProjectionFile;
        m.provenance["delta"] = number(result.projection->delta);
        m.provenance["projection_clusters"] = std::to_string(result.projection->cluster_count());
    }
    in_stage("store", [&] {
        snap.canonicalize();
        snap.validate();
        snap.manifest = snap.counted_manifest();
    });
    return result;
}

void write_store(const BuildResult& result, const fs::path& directory) {
    in_stage("store", [&] {
        if (directory.empty()) throw ParameterError("an output directory is required");
        const bool exists = fs::exists(directory);
        if (exists && !fs::is_directory(directory))
            throw Error("output path exists and is not a directory: " + directory.string());
        if (exists && !fs::is_empty(directory) && !fs::exists(directory / "manifest.json"))
            throw Error("refusing to overwrite non-store directory " + directory.string());

        auto parent = fs::absolute(directory).parent_path();
        fs::create_directories(parent);
        auto name = fs::absolute(directory).filename().string();
        auto tmp = parent / ("." + name + ".tmp");
        auto old = parent / ("." + name + ".old");
        fs::remove_all(tmp);
        fs::remove_all(old);
        try {
            save_snapshot(result.snapshot, tmp);
            if (result.rankers) result.rankers->save(tmp / kRankersFile);
            if (result.projection) result.projection->save(tmp / kProjectionFile);
            load_snapshot(tmp);
        } catch (...) {
            fs::remove_all(tmp);
            throw;
        }
        if (exists) fs::rename(directory, old);
        fs::rename(tmp, directory);
        fs::remove_all(old);
    });
}

namespace {

std::string default_created(const PipelineConfig& config) {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
        return format_timestamp(parse_integer(epoch));
    std::int64_t latest = 0;
    for (const auto& path : config.input_files()) {
        auto t = fs::last_write_time(path);
        auto sys = std::chrono::file_clock::to_sys(t);
        latest = std::max<std::int64_t>(latest,
                                        std::chrono::duration_cast<std::chrono::seconds>(sys.time_since_epoch()).count());
    }
    return format_timestamp(latest);
}

} // namespace

BuildReport build_store(const PipelineConfig& input) {
    PipelineConfig config = input;
    in_stage("config", [&] {
        config.validate();
        if (config.entities.empty()) throw ParameterError("an entities file is required");
        if (config.out.empty()) throw ParameterError("an output directory is required");
        if (config.created.empty()) config.created = default_created(config);
    });
    auto resources = load_resources(config);
    auto result = run_pipeline(resources, config);
    write_store(result, config.out);
    return result.report;
}

} // namespace cilin
