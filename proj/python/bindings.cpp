#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cilin/disambiguation.hpp"
#include "cilin/discovery.hpp"
#include "cilin/documents.hpp"
#include "cilin/embedding.hpp"
#include "cilin/errors.hpp"
#include "cilin/eval.hpp"
#include "cilin/pipeline.hpp"
#include "cilin/service.hpp"
#include "cilin/store.hpp"
#include "cilin/taxonomy.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

using EdgeTuple = std::tuple<std::string, std::string, double>;

std::vector<cilin::Edge> to_edges(const std::vector<EdgeTuple>& edges) {
    std::vector<cilin::Edge> out;
    for (const auto& [a, b, s] : edges) out.push_back({a, b, s});
    return out;
}

std::vector<EdgeTuple> from_edges(const std::vector<cilin::Edge>& edges) {
    std::vector<EdgeTuple> out;
    for (const auto& e : edges) out.emplace_back(e.hyponym, e.hypernym, e.strength);
    return out;
}

cilin::PipelineConfig make_config(const py::dict& d) {
    cilin::PipelineConfig c;
    auto path = [&](const char* key, fs::path& field) {
        if (d.contains(key) && !d[key].is_none()) field = d[key].cast<fs::path>();
    };
    path("entities", c.entities);
    path("snippets", c.snippets);
    path("tags", c.tags);
    path("dictionary", c.dictionary);
    path("embeddings", c.embeddings);
    path("triples", c.triples);
    path("seed_pairs", c.seed_pairs);
    path("labeled_pairs", c.labeled_pairs);
    path("validation_pairs", c.validation_pairs);
    path("rankers", c.rankers_model);
    path("projection", c.projection_model);
    path("out", c.out);
    if (d.contains("top_n")) c.top_n = d["top_n"].cast<std::size_t>();
    if (d.contains("clusters")) c.clusters = d["clusters"].cast<std::size_t>();
    if (d.contains("delta") && !d["delta"].is_none()) c.delta = d["delta"].cast<double>();
    if (d.contains("tau")) c.tau = d["tau"].cast<double>();
    if (d.contains("keep_threshold")) c.keep_threshold = d["keep_threshold"].cast<double>();
    if (d.contains("seed")) c.seed = d["seed"].cast<std::uint64_t>();
    if (d.contains("created")) c.created = d["created"].cast<std::string>();
    return c;
}

cilin::ApiResponse checked(cilin::ApiResponse r) {
    if (r.status != 200) throw cilin::ParameterError("HTTP " + std::to_string(r.status) + ": " + r.body);
    return r;
}

} // namespace

PYBIND11_MODULE(_cilin, m) {
    m.doc() = "Native core of the cilin hypernym knowledge-graph toolkit";
    py::register_exception<cilin::Error>(m, "CilinError", PyExc_RuntimeError);

    py::class_<cilin::EmbeddingTable>(m, "EmbeddingTable")
        .def_static("load", [](const std::string& path) { return cilin::EmbeddingTable::load_file(path); })
        .def_property_readonly("dimension", &cilin::EmbeddingTable::dimension)
        .def("__len__", &cilin::EmbeddingTable::size)
        .def("__contains__", [](const cilin::EmbeddingTable& t, const std::string& s) { return t.contains(s); })
        .def("lookup", [](const cilin::EmbeddingTable& t, const std::string& s) {
            auto v = t.lookup(s);
            return std::vector<double>(v.begin(), v.end());
        })
        .def("encode", [](const cilin::EmbeddingTable& t, const std::string& text) {
            return cilin::AveragingEncoder(t).encode(text).vector;
        });

    m.def("cosine", [](const std::vector<double>& u, const std::vector<double>& v) { return cilin::cosine(u, v); });
    m.def("extract_head_word", [](const std::string& entity, const std::set<std::string>& dictionary) {
        return cilin::extract_head_word(entity, dictionary);
    });
    m.def("sense_string", [](const std::vector<std::string>& phrases) {
        return cilin::sense_string(cilin::SenseDescriptor("", "", phrases));
    });
    m.def("resolve_cycles", [](const std::vector<EdgeTuple>& edges) {
        return from_edges(cilin::resolve_cycles(to_edges(edges)));
    });
    m.def("is_acyclic", [](const std::vector<EdgeTuple>& edges) { return cilin::is_acyclic(to_edges(edges)); });

    m.def("_build", [](const py::dict& config) {
        return cilin::build_store(make_config(config)).to_json().dump();
    });
    m.def("_query", [](const std::string& store, const std::string& name) -> std::optional<std::string> {
        cilin::KnowledgeGraph graph(cilin::load_snapshot(store));
        auto view = graph.query_entity(name);
        if (!view) return std::nullopt;
        return cilin::to_body(cilin::entity_document(*view));
    });
    m.def("_schema", [](const std::string& store, std::optional<std::string> root, std::size_t depth,
                        std::size_t max_children, std::uint64_t seed) {
        cilin::QueryParams params{{"depth", std::to_string(depth)},
                                  {"max_children", std::to_string(max_children)},
                                  {"seed", std::to_string(seed)}};
        if (root) params.emplace("root", *root);
        return checked(cilin::Service({store, std::nullopt}).schema(params)).body;
    });
    m.def("_path_entities", [](const std::string& store, const std::string& path) {
        return checked(cilin::Service({store, std::nullopt}).path_entities({{"path", path}})).body;
    });
    m.def("_health", [](const std::string& store) { return checked(cilin::Service({store, std::nullopt}).health()).body; });
    m.def("_run_suite", [](const std::string& name, std::uint64_t seed) {
        return cilin::eval::run_suite(name, seed).to_json().dump();
    });
}
