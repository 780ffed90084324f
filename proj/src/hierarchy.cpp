#include "cilin/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <random>

#include "cilin/errors.hpp"
#include "cilin/text.hpp"

namespace cilin {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "cilin-projection";
constexpr std::size_t kMaxKmeansRounds = 100;
constexpr std::size_t kDeltaGrid = 50;

std::vector<Eigen::VectorXd> offsets_of(std::span<const TrainingPair> pairs) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.y - p.x);
    return out;
}

std::size_t nearest(const std::vector<Eigen::VectorXd>& centroids, const Eigen::VectorXd& point) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        double d = (centroids[c] - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from(const json& j, std::size_t d) {
    auto values = j.get<std::vector<double>>();
    if (values.size() != d) throw LoadError("projection model: vector length " + std::to_string(values.size()) +
                                            " does not match dimension " + std::to_string(d));
    return to_eigen(values);
}

} // namespace

std::vector<LabeledPair> load_labeled_pairs(std::istream& in) {
    std::vector<LabeledPair> out;
    for_each_line(in, [&](std::size_t line_no, std::string_view line) {
        auto fields = split(line, "\t");
        if (fields.size() != 3)
            throw LoadError("expected 3 tab-separated fields, got " + std::to_string(fields.size()), line_no);
        LabeledPair p{std::string(trim(fields[0])), std::string(trim(fields[1])), 0};
        if (p.hyponym.empty() || p.hypernym.empty()) throw LoadError("empty term", line_no);
        if (contains_separator(p.hyponym) || contains_separator(p.hypernym))
            throw LoadError("term contains the reserved path separator", line_no);
        auto label = trim(fields[2]);
        if (label == "1")
            p.label = 1;
        else if (label != "0")
            throw LoadError("label must be 0 or 1, got '" + std::string(label) + "'", line_no);
        out.push_back(std::move(p));
    });
    return out;
}

Eigen::VectorXd to_eigen(std::span<const double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

std::vector<TrainingPair> make_training_pairs(std::span<const LabeledPair> pairs, const EmbeddingTable& table) {
    std::vector<TrainingPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.hyponym == p.hypernym) throw ParameterError("training pair with identical terms: " + p.hyponym);
        out.push_back({p.hyponym, p.hypernym, to_eigen(table.lookup(p.hyponym)), to_eigen(table.lookup(p.hypernym))});
    }
    return out;
}

Clustering cluster_offsets(std::span<const TrainingPair> pairs, std::size_t k, std::uint64_t seed) {
    if (pairs.empty()) throw ParameterError("cannot cluster an empty pair set");
    if (k == 0) throw ParameterError("cluster count must be positive");
    if (k > pairs.size())
        throw ParameterError("cluster count " + std::to_string(k) + " exceeds pair count " +
                             std::to_string(pairs.size()));
    const auto points = offsets_of(pairs);
    const std::size_t n = points.size();

    // K distinct members by a seeded partial Fisher-Yates shuffle
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t r = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(order[i], order[r]);
    }
    std::vector<Eigen::VectorXd> centroids;
    for (std::size_t i = 0; i < k; ++i) centroids.push_back(points[order[i]]);

    Clustering result;
    std::vector<std::size_t> assignment(n, k);
    for (std::size_t round = 1; round <= kMaxKmeansRounds; ++round) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t c = nearest(centroids, points[i]);
            if (c != assignment[i]) {
                assignment[i] = c;
                changed = true;
            }
        }
        std::vector<std::size_t> counts(k, 0);
        for (auto c : assignment) ++counts[c];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assignment[i]] < 2) continue;
                double d = (points[i] - centroids[assignment[i]]).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[assignment[far]];
            assignment[far] = c;
            counts[c] = 1;
            changed = true;
        }
        for (std::size_t c = 0; c < k; ++c) centroids[c].setZero(points[0].size());
        for (std::size_t i = 0; i < n; ++i) centroids[assignment[i]] += points[i];
        for (std::size_t c = 0; c < k; ++c) centroids[c] /= static_cast<double>(counts[c]);
        result.rounds = round;
        if (!changed) break;
    }

    result.assignment = assignment;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t count = static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), c));
        result.clusters.push_back({c, centroids[c], count});
    }
    return result;
}

Eigen::MatrixXd fit_projection(std::span<const TrainingPair> pairs) {
    if (pairs.empty()) throw ParameterError("cannot fit a projection on zero pairs");
    const auto d = pairs.front().x.size();
    const auto n = static_cast<Eigen::Index>(pairs.size());
    Eigen::MatrixXd x(d, n);
    Eigen::MatrixXd y(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        if (p.x.size() != d || p.y.size() != d) throw ParameterError("training pairs differ in dimension");
        x.col(i) = p.x;
        y.col(i) = p.y;
    }
    // Phi (X X^T + N lambda I) = Y X^T
    Eigen::MatrixXd gram = x * x.transpose();
    gram.diagonal().array() += static_cast<double>(n) * kProjectionRidge;
    const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    Eigen::MatrixXd phi = solver.solve(x * y.transpose()).transpose();
    for (int iter = 0; iter < 50; ++iter) {
        Eigen::MatrixXd residual = y - phi * x;
        Eigen::MatrixXd update = solver.solve(x * residual.transpose()).transpose();
        phi += update;
        if (update.norm() <= 1e-15 * (1.0 + phi.norm())) break;
    }
    return phi;
}

double projection_objective(const Eigen::MatrixXd& phi, std::span<const TrainingPair> pairs) {
    double s = 0.0;
    for (const auto& p : pairs) s += (phi * p.x - p.y).squaredNorm();
    return s / static_cast<double>(pairs.size());
}

Eigen::MatrixXd projection_gradient(const Eigen::MatrixXd& phi, std::span<const TrainingPair> pairs) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(phi.rows(), phi.cols());
    for (const auto& p : pairs) g += (phi * p.x - p.y) * p.x.transpose();
    return g * (2.0 / static_cast<double>(pairs.size()));
}

std::size_t ProjectionModel::nearest_cluster(const Eigen::VectorXd& offset) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        double dist = (clusters[c].centroid - offset).squaredNorm();
        if (dist < best_d) {
            best_d = dist;
            best = c;
        }
    }
    return best;
}

double ProjectionModel::residual(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return (matrices[nearest_cluster(y - x)] * x - y).norm();
}

json ProjectionModel::to_json() const {
    json centroids = json::array();
    json counts = json::array();
    json mats = json::array();
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        centroids.push_back(vector_json(clusters[c].centroid));
        counts.push_back(clusters[c].member_count);
        std::vector<double> flat;
        flat.reserve(dimension * dimension);
        for (Eigen::Index r = 0; r < matrices[c].rows(); ++r)
            for (Eigen::Index col = 0; col < matrices[c].cols(); ++col) flat.push_back(matrices[c](r, col));
        mats.push_back(flat);
    }
    return {
        {"format", kFormatName},
        {"version", kFormatVersion},
        {"dimension", dimension},
        {"clusters", clusters.size()},
        {"centroids", centroids},
        {"member_counts", counts},
        {"matrices_row_major", mats},
        {"delta", delta},
        {"ridge", kProjectionRidge},
        {"seed", seed},
        {"provenance", provenance},
    };
}

ProjectionModel ProjectionModel::from_json(const json& doc) {
    try {
        if (doc.at("format").get<std::string>() != kFormatName) throw LoadError("not a projection model file");
        int version = doc.at("version").get<int>();
        if (version != kFormatVersion)
            throw LoadError("unsupported projection model version " + std::to_string(version) + " (expected " +
                            std::to_string(kFormatVersion) + ")");
        ProjectionModel m;
        m.dimension = doc.at("dimension").get<std::size_t>();
        const auto k = doc.at("clusters").get<std::size_t>();
        const auto& centroids = doc.at("centroids");
        const auto& counts = doc.at("member_counts");
        const auto& mats = doc.at("matrices_row_major");
        if (centroids.size() != k || counts.size() != k || mats.size() != k)
            throw LoadError("projection model: cluster arrays disagree with clusters=" + std::to_string(k));
        const auto d = static_cast<Eigen::Index>(m.dimension);
        for (std::size_t c = 0; c < k; ++c) {
            m.clusters.push_back({c, vector_from(centroids[c], m.dimension), counts[c].get<std::size_t>()});
            auto flat = mats[c].get<std::vector<double>>();
            if (flat.size() != m.dimension * m.dimension) throw LoadError("projection model: matrix size mismatch");
            Eigen::MatrixXd phi(d, d);
            for (Eigen::Index r = 0; r < d; ++r)
                for (Eigen::Index col = 0; col < d; ++col) {
                    double v = flat[static_cast<std::size_t>(r * d + col)];
                    if (!std::isfinite(v)) throw LoadError("projection model: non-finite matrix entry");
                    phi(r, col) = v;
                }
            m.matrices.push_back(std::move(phi));
        }
        m.delta = doc.at("delta").get<double>();
        m.seed = doc.at("seed").get<std::uint64_t>();
        m.provenance = doc.at("provenance").get<std::map<std::string, std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw LoadError(std::string("projection model: ") + e.what());
    }
}

void ProjectionModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json().dump(1) << '\n';
}

ProjectionModel ProjectionModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open projection model " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    return from_json(doc);
}

ProjectionModel train_projection(std::span<const TrainingPair> pairs, std::size_t k, std::uint64_t seed) {
    auto clustering = cluster_offsets(pairs, k, seed);
    ProjectionModel model;
    model.dimension = static_cast<std::size_t>(pairs.front().x.size());
    model.seed = seed;
    model.clusters = clustering.clusters;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<TrainingPair> members;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (clustering.assignment[i] == c) members.push_back(pairs[i]);
        model.matrices.push_back(fit_projection(members));
    }
    model.provenance["training_pairs"] = std::to_string(pairs.size());
    model.provenance["kmeans_rounds"] = std::to_string(clustering.rounds);
    return model;
}

DeltaFit fit_delta(const ProjectionModel& model, std::span<const LabeledPair> held_out, const EmbeddingTable& table) {
    std::vector<std::pair<double, int>> scored;
    std::size_t positives = 0;
    for (const auto& p : held_out) {
        auto x = to_eigen(table.lookup(p.hyponym));
        auto y = to_eigen(table.lookup(p.hypernym));
        scored.emplace_back(model.residual(x, y), p.label);
        positives += static_cast<std::size_t>(p.label);
    }
    if (positives == 0 || positives == scored.size())
        throw ParameterError("delta fitting needs both positive and negative held-out pairs");
    std::sort(scored.begin(), scored.end());
    const std::size_t n = scored.size();

    std::vector<double> thresholds;
    for (std::size_t j = 1; j <= kDeltaGrid; ++j) {
        // nearest-rank quantile j/50, then halfway to the next larger residual
        std::size_t rank = static_cast<std::size_t>(std::ceil(static_cast<double>(j) * n / kDeltaGrid));
        rank = std::clamp<std::size_t>(rank, 1, n);
        double v = scored[rank - 1].first;
        auto next = std::upper_bound(scored.begin(), scored.end(), std::make_pair(v, 2));
        double t = next == scored.end() ? v + std::max(1e-12, std::abs(v) * 1e-6) : (v + next->first) / 2.0;
        thresholds.push_back(t);
    }

    std::vector<double> f1s;
    for (double t : thresholds) {
        double tp = 0, fp = 0, fn = 0;
        for (const auto& [r, label] : scored) {
            bool predicted = r < t;
            if (predicted && label) ++tp;
            else if (predicted) ++fp;
            else if (label) ++fn;
        }
        f1s.push_back(tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn));
    }
    double best = *std::max_element(f1s.begin(), f1s.end());
    std::size_t first = 0;
    while (f1s[first] < best) ++first;
    std::size_t last = first;
    while (last + 1 < f1s.size() && f1s[last + 1] == best) ++last;
    return {(thresholds[first] + thresholds[last]) / 2.0, best};
}

std::size_t select_cluster_count(std::span<const TrainingPair> train, std::span<const TrainingPair> validation,
                                 std::size_t max_k, std::uint64_t seed) {
    max_k = std::min(max_k, train.size());
    if (max_k == 0) throw ParameterError("no training pairs for cluster-count selection");
    if (validation.empty()) return max_k;
    std::size_t best_k = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= max_k; ++k) {
        auto model = train_projection(train, k, seed);
        double err = 0.0;
        for (const auto& p : validation) err += std::pow(model.residual(p.x, p.y), 2);
        err /= static_cast<double>(validation.size());
        if (err < best) {
            best = err;
            best_k = k;
        }
    }
    return best_k;
}

std::optional<ScoredEdge> classify_pair(const std::string& hyponym, const std::string& hypernym,
                                        const ProjectionModel& model, const EmbeddingTable& table) {
    auto x = to_eigen(table.lookup(hyponym));
    auto y = to_eigen(table.lookup(hypernym));
    if (static_cast<std::size_t>(x.size()) != model.dimension)
        throw ParameterError("embedding dimension " + std::to_string(x.size()) + " does not match model dimension " +
                             std::to_string(model.dimension));
    double r = model.residual(x, y);
    if (!(r < model.delta)) return std::nullopt;
    return ScoredEdge{hyponym, hypernym, r, model.delta - r};
}

std::vector<ScoredEdge> build_edge_set(const std::set<std::string>& terms, const ProjectionModel& model,
                                       const EmbeddingTable& table, std::size_t* oov_count) {
    std::vector<std::string> known;
    std::size_t oov = 0;
    for (const auto& t : terms) {
        if (table.contains(t))
            known.push_back(t);
        else
            ++oov;
    }
    if (oov_count) *oov_count = oov;
    std::vector<ScoredEdge> out;
    for (const auto& a : known)
        for (const auto& b : known) {
            if (a == b) continue;
            if (auto e = classify_pair(a, b, model, table)) out.push_back(std::move(*e));
        }
    return out;
}

} // namespace cilin
