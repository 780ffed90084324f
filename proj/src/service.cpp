#include "cilin/service.hpp"

#include <charconv>
#include <set>

#include <httplib.h>

#include "cilin/documents.hpp"
#include "cilin/errors.hpp"
#include "cilin/text.hpp"

namespace cilin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kDefaultDepth = 3;
constexpr std::size_t kMaxDepth = 10;
constexpr std::size_t kDefaultChildren = 20;
constexpr std::size_t kMaxChildren = 100;

ApiResponse error_response(int status, const std::string& message) {
    return {status, to_body(error_document(message))};
}

void check_params(const QueryParams& params, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : params) {
        if (!allowed.count(key)) throw ParameterError("unknown query parameter '" + key + "'");
        if (params.count(key) > 1) throw ParameterError("query parameter '" + key + "' given more than once");
    }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text, std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || end != text.data() + text.size())
        throw ParameterError(key + " must be a non-negative integer");
    if (value < lo || value > hi)
        throw ParameterError(key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return value;
}

std::optional<std::string> param(const QueryParams& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

template <typename T>
void read_setting(const std::map<std::string, std::string>& provenance, const char* key, T& field) {
    auto it = provenance.find(key);
    if (it == provenance.end()) return;
    if constexpr (std::is_floating_point_v<T>)
        field = parse_double(it->second);
    else
        field = static_cast<T>(parse_integer(it->second));
}

} // namespace

std::string to_body(const json& document) { return document.dump(-1, ' ', false, json::error_handler_t::replace); }

Generator::Generator(const PipelineConfig& inputs, const fs::path& store, const Manifest& manifest) : config_(inputs) {
    config_.entities.clear();
    config_.out.clear();
    if (config_.rankers_model.empty())
        if (auto it = manifest.models.find("rankers"); it != manifest.models.end()) config_.rankers_model = store / it->second;
    if (config_.projection_model.empty())
        if (auto it = manifest.models.find("projection"); it != manifest.models.end())
            config_.projection_model = store / it->second;
    read_setting(manifest.provenance, "seed", config_.seed);
    read_setting(manifest.provenance, "top_n", config_.top_n);
    read_setting(manifest.provenance, "clusters", config_.clusters);
    read_setting(manifest.provenance, "tau", config_.tau);
    read_setting(manifest.provenance, "keep_threshold", config_.keep_threshold);
    config_.validate();
    resources_ = load_resources(config_);
}

std::optional<json> Generator::generate(const std::string& name) const {
    if (name.empty() || contains_separator(name)) return std::nullopt;
    std::vector<std::string> one{name};
    auto result = run_pipeline(resources_, config_, one);
    if (result.report.candidates == 0 && result.snapshot.senses.empty()) return std::nullopt;
    KnowledgeGraph graph(std::move(result.snapshot));
    auto view = graph.query_entity(name);
    if (!view) return std::nullopt;
    return entity_document(*view, true);
}

Service::State Service::open(const fs::path& store, const std::optional<PipelineConfig>& resources) {
    State s;
    auto snapshot = load_snapshot(store);
    if (resources) s.generator = std::make_shared<const Generator>(*resources, store, snapshot.manifest);
    s.graph = std::make_shared<const KnowledgeGraph>(std::move(snapshot));
    return s;
}

Service::Service(ServiceConfig config) : config_(std::move(config)), state_(open(config_.store, config_.resources)) {}

Service::State Service::state() const {
    std::lock_guard lock(state_mutex_);
    return state_;
}

std::shared_ptr<const KnowledgeGraph> Service::graph() const { return state().graph; }

void Service::reload(const fs::path& store) {
    State fresh = open(store, config_.resources);
    std::map<std::string, std::shared_future<ApiResponse>> stale;
    {
        std::lock_guard lock(state_mutex_);
        state_ = std::move(fresh);
        config_.store = store;
    }
    std::lock_guard lock(overlay_mutex_);
    stale.swap(overlay_);
}

ApiResponse Service::entity(const std::string& name, const QueryParams& params) {
    try {
        check_params(params, {});
    } catch (const ParameterError& e) {
        return error_response(400, e.what());
    }
    if (name.empty()) return error_response(400, "entity name must be non-empty");
    auto s = state();
    if (auto view = s.graph->query_entity(name)) return {200, to_body(entity_document(*view))};
    if (!s.generator) return error_response(404, "unknown entity: " + name);

    std::shared_future<ApiResponse> pending;
    {
        std::lock_guard lock(overlay_mutex_);
        auto it = overlay_.find(name);
        if (it == overlay_.end()) {
            auto generator = s.generator;
            pending = std::async(std::launch::async, [generator, name]() -> ApiResponse {
                          try {
                              auto doc = generator->generate(name);
                              if (!doc) return error_response(404, "unknown entity: " + name);
                              return {200, to_body(*doc)};
                          } catch (const std::exception& e) {
                              return error_response(500, e.what());
                          }
                      }).share();
            overlay_.emplace(name, pending);
        } else {
            pending = it->second;
        }
    }
    if (pending.wait_for(config_.generation_timeout) != std::future_status::ready)
        return error_response(504, "generation for " + name + " is still running; retry later");
    return pending.get();
}

ApiResponse Service::schema(const QueryParams& params) const {
    std::optional<std::string> root;
    std::size_t depth = kDefaultDepth;
    std::size_t max_children = kDefaultChildren;
    std::uint64_t seed = 0;
    try {
        check_params(params, {"root", "depth", "max_children", "seed"});
        root = param(params, "root");
        if (root && root->empty()) throw ParameterError("root must be non-empty");
        if (auto v = param(params, "depth")) depth = parse_unsigned("depth", *v, 1, kMaxDepth);
        if (auto v = param(params, "max_children")) max_children = parse_unsigned("max_children", *v, 1, kMaxChildren);
        if (auto v = param(params, "seed")) seed = parse_unsigned("seed", *v, 0, UINT64_MAX);
    } catch (const ParameterError& e) {
        return error_response(400, e.what());
    }
    auto forest = graph()->schema_sample(root, depth, max_children, seed);
    if (!forest) return error_response(404, "unknown root: " + *root);
    return {200, to_body(schema_document(*forest))};
}

ApiResponse Service::path_entities(const QueryParams& params) const {
    std::vector<std::string> path;
    try {
        check_params(params, {"path"});
        auto text = param(params, "path");
        if (!text || text->empty()) throw ParameterError("path must be non-empty");
        path = split(*text, kPathSeparator);
        for (const auto& node : path)
            if (node.empty()) throw ParameterError("path has an empty node");
    } catch (const ParameterError& e) {
        return error_response(400, e.what());
    }
    return {200, to_body(path_entities_document(path, graph()->entities_under_path(path)))};
}

ApiResponse Service::health(const QueryParams& params) const {
    try {
        check_params(params, {});
    } catch (const ParameterError& e) {
        return error_response(400, e.what());
    }
    return {200, to_body(health_document(graph()->snapshot().manifest))};
}

struct HttpServer::Impl {
    Impl(Service& s, HttpOptions o) : service(s), options(std::move(o)) {}
    Service& service;
    HttpOptions options;
    httplib::Server server;
};

namespace {

constexpr const char* kJson = "application/json; charset=utf-8";

QueryParams to_params(const httplib::Request& req) { return {req.params.begin(), req.params.end()}; }

void send(httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, kJson);
}

} // namespace

HttpServer::HttpServer(Service& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
    auto& server = impl_->server;
    // Plain SO_REUSEADDR so that an occupied port is reported instead of shared.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    Service& svc = impl_->service;
    server.Get(R"(/api/entity/(.+))", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.entity(req.matches[1].str(), to_params(req)));
    });
    server.Get("/api/schema", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.schema(to_params(req)));
    });
    server.Get("/api/path-entities", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.path_entities(to_params(req)));
    });
    server.Get("/healthz", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.health(to_params(req)));
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            message = e.what();
        } catch (...) {
        }
        send(res, error_response(500, message));
    });
    if (!impl_->options.static_dir.empty() && !server.set_mount_point("/", impl_->options.static_dir.string()))
        throw Error("static directory not found: " + impl_->options.static_dir.string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    auto& o = impl_->options;
    if (o.port == 0) {
        int port = impl_->server.bind_to_any_port(o.host);
        if (port < 0) throw Error("cannot bind " + o.host);
        o.port = port;
        return port;
    }
    if (!impl_->server.bind_to_port(o.host, o.port))
        throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
    return o.port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

} // namespace cilin
