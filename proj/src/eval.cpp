#include "cilin/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cilin/disambiguation.hpp"
#include "cilin/errors.hpp"
#include "cilin/rankers.hpp"
#include "cilin/text.hpp"

namespace cilin::eval {

using nlohmann::json;

namespace {

Eigen::VectorXd gaussian_vector(std::size_t d, std::mt19937_64& rng, double sigma = 1.0) {
    std::normal_distribution<double> n(0.0, sigma);
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(rng);
    return v;
}

Eigen::MatrixXd gaussian_matrix(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n(rng);
    return m;
}

Eigen::MatrixXd random_orthogonal(std::size_t d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(d, rng));
    return qr.householderQ();
}

Vector to_vector(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) { return format_double(v); }

// Kahn's algorithm over the edge list, independent of the taxonomy module.
bool topologically_sortable(const std::vector<Edge>& edges) {
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& e : edges) {
        indegree[e.hyponym];
        ++indegree[e.hypernym];
        out[e.hyponym].push_back(e.hypernym);
    }
    std::vector<std::string> ready;
    for (const auto& [n, d] : indegree)
        if (d == 0) ready.push_back(n);
    std::size_t visited = 0;
    while (!ready.empty()) {
        auto n = ready.back();
        ready.pop_back();
        ++visited;
        for (const auto& m : out[n])
            if (--indegree[m] == 0) ready.push_back(m);
    }
    return visited == indegree.size();
}

struct Classified {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

Classified score_predictions(const std::vector<int>& predicted, const std::vector<int>& truth) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] && truth[i]) ++tp;
        if (predicted[i] && !truth[i]) ++fp;
        if (!predicted[i] && truth[i]) ++fn;
    }
    Classified c;
    c.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    c.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    c.f1 = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    return c;
}

} // namespace

RegressionInstance make_regression_instance(std::size_t d, std::size_t n, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(mix64(seed));
    RegressionInstance inst;
    inst.truth = gaussian_matrix(d, rng);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd x = gaussian_vector(d, rng);
        Eigen::VectorXd y = inst.truth * x + gaussian_vector(d, rng, noise);
        inst.pairs.push_back({"x" + std::to_string(i), "y" + std::to_string(i), x, y});
    }
    return inst;
}

Eigen::MatrixXd gradient_descent_projection(const std::vector<TrainingPair>& pairs, std::size_t steps) {
    const auto d = pairs.front().x.size();
    const auto n = static_cast<double>(pairs.size());
    Eigen::MatrixXd xx = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd yx = Eigen::MatrixXd::Zero(d, d);
    for (const auto& p : pairs) {
        xx += p.x * p.x.transpose();
        yx += p.y * p.x.transpose();
    }
    // Lipschitz constant of the gradient: (2/N) * largest eigenvalue of X X^T, by power iteration.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(d).normalized();
    double lambda = 0.0;
    for (int i = 0; i < 500; ++i) {
        Eigen::VectorXd w = xx * v;
        lambda = w.norm();
        if (lambda == 0.0) break;
        v = w / lambda;
    }
    const double step = lambda > 0.0 ? n / (2.0 * lambda) : 0.0;
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t s = 0; s < steps; ++s) phi -= step * (2.0 / n) * (phi * xx - yx);
    return phi;
}

SyntheticHierarchy make_synthetic_hierarchy(std::size_t d, std::size_t k, std::size_t train, std::size_t held_out,
                                            double noise, std::uint64_t seed) {
    std::mt19937_64 rng(mix64(seed ^ 0x5eedULL));
    SyntheticHierarchy h;
    h.table = EmbeddingTable(d);
    std::vector<Eigen::VectorXd> centres;
    std::uniform_real_distribution<double> scale(0.8, 1.5);
    for (std::size_t t = 0; t < k; ++t) {
        h.matrices.push_back(scale(rng) * random_orthogonal(d, rng));
        centres.push_back(5.0 * gaussian_vector(d, rng).normalized());
    }
    std::size_t counter = 0;
    auto hyponym = [&](std::size_t type) {
        Eigen::VectorXd x = centres[type] + gaussian_vector(d, rng, 0.2);
        std::string name = "h" + std::to_string(counter++);
        h.table.insert(name, to_vector(x));
        return std::make_pair(name, x);
    };
    auto hypernym = [&](std::size_t type, const Eigen::VectorXd& x) {
        Eigen::VectorXd y = h.matrices[type] * x + gaussian_vector(d, rng, noise);
        std::string name = "y" + std::to_string(counter++);
        h.table.insert(name, to_vector(y));
        return name;
    };
    auto positive = [&](std::size_t type) {
        auto [name, x] = hyponym(type);
        return LabeledPair{name, hypernym(type, x), 1};
    };
    auto negative = [&](std::size_t type) {
        auto [name, x] = hyponym(type);
        auto [other, x2] = hyponym(type);
        return LabeledPair{name, hypernym(type, x2), 0};
    };
    for (std::size_t i = 0; i < train; ++i) {
        std::size_t type = i % k;
        h.train.push_back(positive(type));
        h.train_types.push_back(type);
    }
    for (auto* set : {&h.validation, &h.test}) {
        for (std::size_t i = 0; i < held_out; ++i) set->push_back(positive(i % k));
        for (std::size_t i = 0; i < held_out; ++i) set->push_back(negative(i % k));
    }
    return h;
}

double cluster_accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth,
                        std::size_t k) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            if (predicted[i] < k && perm[predicted[i]] == truth[i]) ++hits;
        best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return truth.empty() ? 1.0 : static_cast<double>(best) / static_cast<double>(truth.size());
}

std::vector<Edge> make_random_edges(std::size_t max_nodes, double density, std::uint64_t seed) {
    std::mt19937_64 rng(mix64(seed));
    std::size_t n = 2 + rng() % (max_nodes - 1);
    std::bernoulli_distribution link(density);
    std::uniform_real_distribution<double> strength(0.0, 1.0);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && link(rng)) edges.push_back({"n" + std::to_string(i), "n" + std::to_string(j), strength(rng)});
    return edges;
}

std::vector<LabeledExample> make_separable_features(std::size_t positives, std::size_t negatives, std::uint64_t seed) {
    std::mt19937_64 rng(mix64(seed ^ 0xfea7ULL));
    std::normal_distribution<double> n(0.0, 1.0);
    Features w{};
    double norm = 0.0;
    for (auto& v : w) {
        v = n(rng);
        norm += v * v;
    }
    for (auto& v : w) v /= std::sqrt(norm);
    std::vector<LabeledExample> out;
    std::size_t pos = 0, neg = 0;
    while (pos < positives || neg < negatives) {
        LabeledExample e;
        double margin = 0.0;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            e.features[i] = 2.0 * n(rng) + static_cast<double>(i);
            margin += w[i] * (e.features[i] - static_cast<double>(i));
        }
        if (std::abs(margin) < 0.5) continue;
        e.label = margin > 0 ? 1 : 0;
        if (e.label && pos < positives) {
            ++pos;
            out.push_back(e);
        } else if (!e.label && neg < negatives) {
            ++neg;
            out.push_back(e);
        }
    }
    return out;
}

bool SuiteReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json SuiteReport::to_json() const {
    json list = json::array();
    for (const auto& c : checks) list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return {{"suite", suite}, {"passed", passed()}, {"checks", list}, {"metrics", metrics}};
}

SuiteReport run_projection_suite(std::uint64_t seed) {
    SuiteReport report{"projection", {}, json::object()};

    auto start = std::chrono::steady_clock::now();
    double worst_gap = -std::numeric_limits<double>::infinity();
    double worst_grad = 0.0;
    for (std::uint64_t s = seed; s < seed + 20; ++s) {
        auto inst = make_regression_instance(10, 50, 0.01, s);
        auto phi = fit_projection(inst.pairs);
        auto oracle = gradient_descent_projection(inst.pairs, 10000);
        worst_gap = std::max(worst_gap,
                             projection_objective(phi, inst.pairs) - projection_objective(oracle, inst.pairs));
        worst_grad = std::max(worst_grad, projection_gradient(phi, inst.pairs).norm());
    }
    double seconds = elapsed_seconds(start);
    report.checks.push_back({"solver objective within 1e-6 of gradient-descent oracle", worst_gap <= 1e-6,
                             "max gap " + fmt(worst_gap)});
    report.checks.push_back({"gradient norm at solution <= 1e-6", worst_grad <= 1e-6, "max norm " + fmt(worst_grad)});
    report.metrics["solver_gap"] = worst_gap;
    report.metrics["gradient_norm"] = worst_grad;
    report.metrics["solver_seconds"] = seconds;

    start = std::chrono::steady_clock::now();
    auto h = make_synthetic_hierarchy(10, 2, 200, 100, 0.01, seed);
    auto train = make_training_pairs(h.train, h.table);
    auto model = train_projection(train, 2, seed);
    model.delta = fit_delta(model, h.validation, h.table).delta;
    std::vector<int> predicted, truth;
    for (const auto& p : h.test) {
        predicted.push_back(classify_pair(p.hyponym, p.hypernym, model, h.table) ? 1 : 0);
        truth.push_back(p.label);
    }
    auto scores = score_predictions(predicted, truth);
    auto clustering = cluster_offsets(train, 2, seed);
    double accuracy = cluster_accuracy(clustering.assignment, h.train_types, 2);
    seconds = elapsed_seconds(start);
    report.checks.push_back({"synthetic hierarchy F1 >= 0.95", scores.f1 >= 0.95, "F1 " + fmt(scores.f1)});
    report.checks.push_back({"cluster assignment accuracy >= 0.95", accuracy >= 0.95, "accuracy " + fmt(accuracy)});
    report.metrics["f1"] = scores.f1;
    report.metrics["cluster_accuracy"] = accuracy;
    report.metrics["delta"] = model.delta;
    report.metrics["recovery_seconds"] = seconds;
    return report;
}

SuiteReport run_taxonomy_suite(std::uint64_t seed) {
    SuiteReport report{"taxonomy", {}, json::object()};
    std::size_t acyclic = 0;
    const std::size_t trials = 1000;
    for (std::uint64_t s = seed; s < seed + trials; ++s)
        if (topologically_sortable(resolve_cycles(make_random_edges(12, 0.3, s)))) ++acyclic;
    report.checks.push_back({"random edge sets resolve to acyclic graphs", acyclic == trials,
                             std::to_string(acyclic) + "/" + std::to_string(trials) + " acyclic"});
    report.metrics["acyclic"] = acyclic;
    report.metrics["trials"] = trials;

    std::vector<Edge> two{{"A", "B", 0.9}, {"B", "A", 0.4}};
    std::vector<Edge> two_expected{{"A", "B", 0.9}};
    report.checks.push_back({"two-node cycle loses its weakest link", resolve_cycles(two) == two_expected, ""});

    std::vector<Edge> three{{"A", "B", 0.9}, {"B", "C", 0.8}, {"C", "A", 0.2}};
    std::vector<Edge> three_expected{{"A", "B", 0.9}, {"B", "C", 0.8}};
    CycleReport cr;
    bool ok = resolve_cycles(three, &cr) == three_expected && cr.reversed == 1 && cr.pruned == 1;
    report.checks.push_back({"three-node cycle reversed then pruned", ok, ""});
    return report;
}

SuiteReport run_ranking_suite(std::uint64_t seed) {
    SuiteReport report{"ranking", {}, json::object()};
    auto start = std::chrono::steady_clock::now();
    auto data = make_separable_features(500, 500, seed);
    std::mt19937_64 rng(mix64(seed));
    std::shuffle(data.begin(), data.end(), rng);
    const std::size_t split = data.size() * 7 / 10;
    std::vector<LabeledExample> train(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(split));
    std::vector<LabeledExample> test(data.begin() + static_cast<std::ptrdiff_t>(split), data.end());

    RankerConfig config;
    config.seed = seed;
    auto ensemble = train_rankers(train, config);
    std::array<std::vector<double>, 4> scores;
    std::vector<int> labels;
    for (const auto& e : test) {
        auto sub = ensemble.sub_scores(e.features);
        for (std::size_t i = 0; i < 3; ++i) scores[i].push_back(sub[i]);
        scores[3].push_back(ensemble.score(e.features));
        labels.push_back(e.label);
    }
    const char* names[] = {"linear_svm", "rbf_svm", "logistic", "ensemble"};
    for (std::size_t i = 0; i < 4; ++i) {
        double auc = roc_auc(scores[i], labels);
        report.metrics[std::string("auc_") + names[i]] = auc;
        report.checks.push_back({std::string(names[i]) + " held-out AUC >= 0.95", auc >= 0.95, "AUC " + fmt(auc)});
    }
    report.metrics["seconds"] = elapsed_seconds(start);
    return report;
}

SuiteReport run_disambiguation_suite(std::uint64_t seed) {
    SuiteReport report{"disambiguation", {}, json::object()};

    // One-hot toy vocabulary; relation words and multi-character values outside it
    // fall back to characters that are also absent, so they drop out.
    const std::vector<std::string> vocab{"苹果", "水果", "食品", "植物", "物", "生物", "手机", "电子产品"};
    EmbeddingTable table(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        Vector v(vocab.size(), 0.0);
        v[i] = 1.0;
        table.insert(vocab[i], v);
    }
    std::vector<SenseDescriptor> senses{
        {"苹果", "fruit", {"类别/水果", "用途/食品", "来源/植物", "性味/微甜", "科/蔷薇科"}},
        {"苹果", "phone", {"品牌/苹果公司", "类别/手机", "类别/电子产品"}}};
    std::vector<HypernymPath> paths{{"苹果", {"水果", "食品", "物"}},
                                    {"苹果", {"水果", "植物", "生物", "物"}},
                                    {"苹果", {"手机", "电子产品", "物"}}};
    // Expected in-vocabulary token bags.
    const std::vector<std::set<std::string>> sense_bags{{"水果", "食品", "植物"}, {"手机", "电子产品"}};
    const std::vector<std::set<std::string>> path_bags{{"苹果", "水果", "食品", "物"},
                                                       {"苹果", "水果", "植物", "生物", "物"},
                                                       {"苹果", "手机", "电子产品", "物"}};
    AveragingEncoder encoder(table);
    auto assignments = assign_paths(senses, paths, encoder, 0.5);
    double worst = 0.0;
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (std::size_t s = 0; s < senses.size(); ++s) {
            std::size_t common = 0;
            for (const auto& t : sense_bags[s]) common += path_bags[p].count(t);
            double oracle = static_cast<double>(common) /
                            std::sqrt(static_cast<double>(sense_bags[s].size() * path_bags[p].size()));
            worst = std::max(worst, std::abs(score_pair(senses[s], paths[p], encoder) - oracle));
        }
    bool mapped = assignments[0].sense_id == "fruit" && assignments[1].sense_id == "fruit" &&
                  assignments[2].sense_id == "phone";
    report.checks.push_back({"fruit paths map to the fruit sense, phone path to the phone sense", mapped, ""});
    report.checks.push_back({"scores match bag-of-tokens oracle within 1e-9", worst <= 1e-9, "max error " + fmt(worst)});
    report.metrics["max_score_error"] = worst;

    std::mt19937_64 rng(mix64(seed));
    const std::vector<std::string> pool{"类别/水果", "用途/食品", "来源/植物", "性味/微甜", "科/蔷薇科",
                                        "品牌/苹果公司", "a/b", "颜色/红", "Z/z", "产地/山东"};
    std::size_t stable = 0;
    const std::size_t trials = 1000;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<std::string> multiset;
        std::size_t n = 1 + rng() % 8;
        for (std::size_t i = 0; i < n; ++i) multiset.push_back(pool[rng() % pool.size()]);
        std::vector<std::string> shuffled = multiset;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::set<std::string> unique(multiset.begin(), multiset.end());
        std::string expected = join(std::vector<std::string>(unique.begin(), unique.end()), " ");
        if (sense_string({"e", "s", multiset}) == expected && sense_string({"e", "s", shuffled}) == expected) ++stable;
    }
    report.checks.push_back({"sense strings are permutation invariant", stable == trials,
                             std::to_string(stable) + "/" + std::to_string(trials)});
    report.metrics["permutation_trials"] = trials;
    return report;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"projection", "taxonomy", "ranking", "disambiguation"};
    return names;
}

SuiteReport run_suite(const std::string& name, std::uint64_t seed) {
    if (name == "projection") return run_projection_suite(seed);
    if (name == "taxonomy") return run_taxonomy_suite(seed);
    if (name == "ranking") return run_ranking_suite(seed);
    if (name == "disambiguation") return run_disambiguation_suite(seed);
    throw ParameterError("unknown suite '" + name + "' (expected one of: projection, taxonomy, ranking, disambiguation)");
}

} // namespace cilin::eval
