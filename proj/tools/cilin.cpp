// cilin: build, query, serve and evaluate hypernym knowledge-graph stores.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cilin/documents.hpp"
#include "cilin/errors.hpp"
#include "cilin/eval.hpp"
#include "cilin/pipeline.hpp"
#include "cilin/service.hpp"
#include "cilin/store.hpp"
#include "cilin/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2, kNotFound = 3, kIo = 4 };

int fail(const std::string& message, int code = kFailure) {
    std::string line = message;
    for (auto& c : line)
        if (c == '\n') c = ' ';
    std::cerr << "cilin: error: " << line << '\n';
    return code;
}

struct InputFlags {
    std::string entities, snippets, tags, dictionary, embeddings, triples, seed_pairs, labeled_pairs,
        validation_pairs, rankers, projection;
};

void add_resource_flags(CLI::App* cmd, InputFlags& f) {
    cmd->add_option("--snippets", f.snippets, "POS-tagged snippets (JSON lines)");
    cmd->add_option("--tags", f.tags, "entity<TAB>tag file");
    cmd->add_option("--dictionary", f.dictionary, "head-word dictionary, one term per line");
    cmd->add_option("--embeddings", f.embeddings, "word vectors in text format");
    cmd->add_option("--triples", f.triples, "entity<TAB>sense<TAB>relation<TAB>value file");
    cmd->add_option("--seed-pairs", f.seed_pairs, "hyponym<TAB>hypernym seeds for ranker labels");
    cmd->add_option("--labeled-pairs", f.labeled_pairs, "hyponym<TAB>hypernym<TAB>label projection training pairs");
    cmd->add_option("--validation-pairs", f.validation_pairs, "held-out labeled pairs for delta and K");
    cmd->add_option("--rankers", f.rankers, "pre-trained ranker model");
    cmd->add_option("--projection", f.projection, "pre-trained projection model");
}

void apply_inputs(const InputFlags& f, cilin::PipelineConfig& c) {
    c.entities = f.entities;
    c.snippets = f.snippets;
    c.tags = f.tags;
    c.dictionary = f.dictionary;
    c.embeddings = f.embeddings;
    c.triples = f.triples;
    c.seed_pairs = f.seed_pairs;
    c.labeled_pairs = f.labeled_pairs;
    c.validation_pairs = f.validation_pairs;
    c.rankers_model = f.rankers;
    c.projection_model = f.projection;
}

std::string default_store() {
    const char* env = std::getenv("CILIN_STORE");
    return env && *env ? env : "store";
}

std::pair<std::string, int> parse_addr(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos) throw cilin::ParameterError("--addr must be host:port");
    auto port = cilin::parse_integer(addr.substr(colon + 1));
    if (port < 0 || port > 65535) throw cilin::ParameterError("port out of range in --addr");
    return {addr.substr(0, colon), static_cast<int>(port)};
}

int run_build(const cilin::PipelineConfig& config) {
    auto report = cilin::build_store(config);
    std::cout << report.to_json().dump(2) << '\n';
    return kOk;
}

int run_query(const std::string& store, const std::string& name, const std::string& format, bool generate,
              const cilin::PipelineConfig& resources) {
    cilin::StoreSnapshot snapshot;
    try {
        snapshot = cilin::load_snapshot(store);
    } catch (const cilin::Error& e) {
        return fail("load: " + std::string(e.what()), kIo);
    }
    std::optional<json> doc;
    cilin::Manifest manifest = snapshot.manifest;
    cilin::KnowledgeGraph graph(std::move(snapshot));
    if (auto view = graph.query_entity(name)) {
        doc = cilin::entity_document(*view);
    } else if (generate) {
        doc = cilin::Generator(resources, store, manifest).generate(name);
    }
    if (!doc) return fail("not found: " + name, kNotFound);
    if (format == "text")
        std::cout << cilin::render_entity_text(*doc);
    else
        std::cout << cilin::to_body(*doc) << '\n';
    return kOk;
}

int run_serve(const std::string& store, const std::string& addr, const std::string& static_dir, double timeout,
              const std::optional<cilin::PipelineConfig>& resources) {
    auto [host, port] = parse_addr(addr);

    // Signals are handled on a dedicated thread; block them everywhere else first.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGHUP);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    cilin::ServiceConfig sc;
    sc.store = store;
    sc.resources = resources;
    sc.generation_timeout = std::chrono::milliseconds(static_cast<long long>(timeout * 1000));
    std::unique_ptr<cilin::Service> service;
    try {
        service = std::make_unique<cilin::Service>(sc);
    } catch (const cilin::Error& e) {
        return fail("load: " + std::string(e.what()), kIo);
    }
    cilin::HttpServer server(*service, {host, port, static_dir});
    int bound = 0;
    try {
        bound = server.bind();
    } catch (const cilin::Error& e) {
        return fail("bind: " + std::string(e.what()), kIo);
    }
    std::cout << "listening on http://" << host << ":" << bound << std::endl;

    std::thread watcher([&] {
        for (;;) {
            int sig = 0;
            sigwait(&signals, &sig);
            if (sig == SIGHUP) {
                try {
                    service->reload(store);
                    std::cerr << "cilin: reloaded " << store << '\n';
                } catch (const std::exception& e) {
                    std::cerr << "cilin: error: reload: " << e.what() << '\n';
                }
                continue;
            }
            server.stop();
            return;
        }
    });
    server.listen();
    if (watcher.joinable()) {
        // listen() can also return on its own; wake the watcher so it exits.
        pthread_kill(watcher.native_handle(), SIGTERM);
        watcher.join();
    }
    return kOk;
}

int run_eval(const std::string& suite, std::uint64_t seed, const std::string& format) {
    auto report = cilin::eval::run_suite(suite, seed);
    if (format == "json") {
        std::cout << report.to_json().dump(2) << '\n';
    } else {
        for (const auto& c : report.checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")")
                      << '\n';
        std::cout << report.suite << ": " << (report.passed() ? "ok" : "FAILED") << '\n';
    }
    return report.passed() ? kOk : kFailure;
}

int run_train_rankers(cilin::PipelineConfig config, const std::string& out) {
    config.labeled_pairs.clear();
    config.projection_model.clear();
    config.rankers_model.clear();
    config.validate();
    if (config.entities.empty()) throw cilin::ParameterError("an entities file is required");
    auto resources = cilin::load_resources(config);
    auto result = cilin::run_pipeline(resources, config);
    if (!result.rankers) throw cilin::StageError("ranking", "no candidates to train on");
    result.rankers->save(out);
    std::cout << json{{"candidates", result.report.candidates}, {"kept_candidates", result.report.kept_candidates},
                      {"model", out}}
                     .dump(2)
              << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hypernym knowledge-graph toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI configuration file; command-line flags override it");

    InputFlags in;
    cilin::PipelineConfig pc;
    std::optional<double> delta;
    std::string out, store = default_store(), format = "json", addr = "127.0.0.1:8080", eval_format = "text", static_dir, name, suite;
    std::uint64_t seed = 0;
    double timeout = 10.0;
    bool generate = false;

    auto* build = app.add_subcommand("build", "run the pipeline and write a store");
    build->add_option("--entities", in.entities, "entity list, one per line")->required();
    add_resource_flags(build, in);
    build->add_option("--out", out, "store directory")->required();
    build->add_option("--top-n", pc.top_n, "snippet candidates kept per entity")->capture_default_str();
    build->add_option("--clusters", pc.clusters, "maximum projection clusters K")->capture_default_str();
    build->add_option("--delta", delta, "fixed residual threshold (fitted when omitted)");
    build->add_option("--tau", pc.tau, "minimum sense-path score")->capture_default_str();
    build->add_option("--keep-threshold", pc.keep_threshold, "minimum ranker score")->capture_default_str();
    build->add_option("--seed", pc.seed, "random seed")->capture_default_str();
    build->add_option("--created", pc.created, "manifest timestamp (default: SOURCE_DATE_EPOCH or newest input)");

    auto* query = app.add_subcommand("query", "print one entity from a store");
    query->add_option("name", name, "entity or schema term")->required();
    query->add_option("--store", store, "store directory (default: $CILIN_STORE or ./store)");
    query->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
    query->add_flag("--generate", generate, "run the pipeline for names absent from the store");
    add_resource_flags(query, in);

    auto* serve = app.add_subcommand("serve", "serve a store over HTTP");
    serve->add_option("--store", store, "store directory (default: $CILIN_STORE or ./store)");
    serve->add_option("--addr", addr, "host:port to bind")->capture_default_str();
    serve->add_option("--static", static_dir, "web client directory served at /");
    serve->add_option("--timeout", timeout, "on-demand generation timeout in seconds")->capture_default_str();
    add_resource_flags(serve, in);

    auto* evaluate = app.add_subcommand("eval", "run a synthetic evaluation suite");
    evaluate->add_option("suite", suite, "projection, taxonomy, ranking or disambiguation")->required();
    evaluate->add_option("--seed", seed, "random seed")->capture_default_str();
    evaluate->add_option("--format", eval_format, "json or text")->check(CLI::IsMember({"json", "text"}));

    auto* train = app.add_subcommand("train-rankers", "train the candidate rankers only");
    train->add_option("--entities", in.entities, "entity list, one per line")->required();
    add_resource_flags(train, in);
    train->add_option("--out", out, "model file")->required();
    train->add_option("--top-n", pc.top_n, "snippet candidates kept per entity")->capture_default_str();
    train->add_option("--keep-threshold", pc.keep_threshold, "minimum ranker score")->capture_default_str();
    train->add_option("--seed", pc.seed, "random seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "cilin: usage: " << e.what() << '\n';
        return kUsage;
    }

    try {
        apply_inputs(in, pc);
        pc.delta = delta;
        pc.out = out;
        if (*build) return run_build(pc);
        if (*query) return run_query(store, name, format, generate, pc);
        if (*serve) {
            std::optional<cilin::PipelineConfig> resources;
            if (!pc.embeddings.empty()) resources = pc;
            return run_serve(store, addr, static_dir, timeout, resources);
        }
        if (*evaluate) {
            try {
                return run_eval(suite, seed, eval_format);
            } catch (const cilin::ParameterError& e) {
                std::cerr << "cilin: usage: " << e.what() << '\n';
                return kUsage;
            }
        }
        if (*train) return run_train_rankers(pc, out);
    } catch (const cilin::LoadError& e) {
        return fail(e.what(), kIo);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return kUsage;
}
