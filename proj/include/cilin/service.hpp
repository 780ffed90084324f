#ifndef CILIN_SERVICE_HPP
#define CILIN_SERVICE_HPP

#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cilin/pipeline.hpp"
#include "cilin/store.hpp"

namespace cilin {

// Single-entity pipeline runs against a base store: inputs come from the resource
// config, trained models and hyperparameters from the store unless overridden.
class Generator {
public:
    Generator(const PipelineConfig& inputs, const std::filesystem::path& store, const Manifest& manifest);

    const PipelineConfig& config() const { return config_; }
    // Entity document with generated=true, or nullopt when no source mentions the name.
    std::optional<nlohmann::json> generate(const std::string& name) const;

private:
    PipelineConfig config_;
    Resources resources_;
};

// Compact UTF-8 JSON, keys sorted; invalid byte sequences are replaced.
std::string to_body(const nlohmann::json& document);

struct ApiResponse {
    int status = 200;
    std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

struct ServiceConfig {
    std::filesystem::path store;
    // Set to enable on-demand generation for entities absent from the store.
    std::optional<PipelineConfig> resources;
    std::chrono::milliseconds generation_timeout{10000};
};

// Request handling independent of the HTTP transport. Thread-safe.
class Service {
public:
    explicit Service(ServiceConfig config);

    ApiResponse entity(const std::string& name, const QueryParams& params = {});
    ApiResponse schema(const QueryParams& params) const;
    ApiResponse path_entities(const QueryParams& params) const;
    ApiResponse health(const QueryParams& params = {}) const;

    // Loads and validates another store, then swaps it in atomically. In-flight
    // requests finish on the snapshot they started with.
    void reload(const std::filesystem::path& store);
    std::shared_ptr<const KnowledgeGraph> graph() const;

private:
    struct State {
        std::shared_ptr<const KnowledgeGraph> graph;
        std::shared_ptr<const Generator> generator;
    };
    State state() const;
    static State open(const std::filesystem::path& store, const std::optional<PipelineConfig>& resources);

    ServiceConfig config_;
    mutable std::mutex state_mutex_;
    State state_;

    std::mutex overlay_mutex_;
    std::map<std::string, std::shared_future<ApiResponse>> overlay_;
};

struct HttpOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path static_dir;
};

class HttpServer {
public:
    HttpServer(Service& service, HttpOptions options);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Returns the bound port. Throws Error when the address is unavailable.
    int bind();
    // Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace cilin

#endif
