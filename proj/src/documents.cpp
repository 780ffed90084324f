#include "cilin/documents.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "cilin/text.hpp"

namespace cilin {

using nlohmann::json;

json entity_document(const EntityView& view, bool generated) {
    json senses = json::array();
    for (const auto& s : view.senses) {
        json triples = json::array();
        for (const auto& t : s.triples) triples.push_back({{"relation", t.relation}, {"value", t.value}});
        senses.push_back({{"sense_id", s.sense.sense_id()},
                          {"phrases", s.sense.phrases()},
                          {"triples", triples},
                          {"path_ids", s.path_ids}});
    }
    json paths = json::array();
    for (const auto& p : view.paths) {
        paths.push_back({{"path_id", p.path_id},
                         {"nodes", p.path.nodes},
                         {"sense_id", p.sense_id ? json(*p.sense_id) : json(nullptr)},
                         {"score", p.score ? json(*p.score) : json(nullptr)}});
    }
    return {{"entity", view.name},
            {"kind", view.is_entity ? "entity" : "term"},
            {"generated", generated},
            {"senses", senses},
            {"paths", paths}};
}

namespace {

json schema_node(const SchemaNode& node) {
    json children = json::array();
    for (const auto& c : node.children) children.push_back(schema_node(c));
    return {{"term", node.term}, {"entity_count", node.entity_count}, {"children", children}};
}

} // namespace

json schema_document(const std::vector<SchemaNode>& forest) {
    json roots = json::array();
    for (const auto& n : forest) roots.push_back(schema_node(n));
    return {{"roots", roots}};
}

json path_entities_document(const std::vector<std::string>& path, const std::vector<std::string>& entities) {
    return {{"path", path}, {"entities", entities}};
}

json health_document(const Manifest& manifest) {
    return {{"status", "ok"},
            {"snapshot",
             {{"format_version", manifest.format_version}, {"counts", manifest.counts}, {"created", manifest.created}}}};
}

json error_document(const std::string& message) { return {{"error", message}}; }

std::string render_entity_text(const json& doc) {
    std::ostringstream out;
    out << "entity: " << doc.at("entity").get<std::string>();
    if (doc.at("kind") == "term") out << " (schema term)";
    if (doc.at("generated").get<bool>()) out << " [generated]";
    out << '\n';

    std::map<std::size_t, std::string> path_text;
    std::size_t width = 0;
    for (const auto& p : doc.at("paths")) {
        std::vector<std::string> chain{doc.at("entity").get<std::string>()};
        for (const auto& n : p.at("nodes")) chain.push_back(n.get<std::string>());
        auto text = join(chain, std::string(kPathSeparator));
        width = std::max(width, display_width(text));
        path_text[p.at("path_id").get<std::size_t>()] = std::move(text);
    }

    out << "senses: " << doc.at("senses").size() << '\n';
    for (const auto& s : doc.at("senses")) {
        out << "  [" << s.at("sense_id").get<std::string>() << "]\n";
        for (const auto& t : s.at("triples"))
            out << "    " << t.at("relation").get<std::string>() << " / " << t.at("value").get<std::string>() << '\n';
        for (const auto& id : s.at("path_ids")) out << "    path " << id.get<std::size_t>() << '\n';
    }
    out << "paths: " << doc.at("paths").size() << '\n';
    for (const auto& p : doc.at("paths")) {
        const auto& text = path_text[p.at("path_id").get<std::size_t>()];
        out << "  " << p.at("path_id").get<std::size_t>() << "  " << text
            << std::string(width - display_width(text) + 2, ' ');
        if (p.at("sense_id").is_null())
            out << "(unassigned)";
        else
            out << p.at("sense_id").get<std::string>();
        if (!p.at("score").is_null()) out << "  " << format_double(p.at("score").get<double>());
        out << '\n';
    }
    return out.str();
}

} // namespace cilin
