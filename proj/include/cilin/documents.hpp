#ifndef CILIN_DOCUMENTS_HPP
#define CILIN_DOCUMENTS_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cilin/store.hpp"

namespace cilin {

// Response bodies shared by the HTTP service and the offline CLI. Keys are emitted
// in sorted order so identical inputs give byte-identical output.

// {entity, kind, generated, senses:[{sense_id, phrases, triples, path_ids}],
//  paths:[{path_id, nodes, sense_id|null, score|null}]}
nlohmann::json entity_document(const EntityView& view, bool generated = false);

// {roots:[{term, entity_count, children:[...]}]}
nlohmann::json schema_document(const std::vector<SchemaNode>& forest);

// {path:[...], entities:[...]}
nlohmann::json path_entities_document(const std::vector<std::string>& path, const std::vector<std::string>& entities);

// {status:"ok", snapshot:{format_version, counts, created}}
nlohmann::json health_document(const Manifest& manifest);

nlohmann::json error_document(const std::string& message);

// Human-readable rendering of an entity document for terminals.
std::string render_entity_text(const nlohmann::json& document);

} // namespace cilin

#endif
