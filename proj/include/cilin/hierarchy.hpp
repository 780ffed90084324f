#ifndef CILIN_HIERARCHY_HPP
#define CILIN_HIERARCHY_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cilin/embedding.hpp"
#include "cilin/taxonomy.hpp"

namespace cilin {

// Ridge weight that keeps the least-squares fit solvable for rank-deficient inputs.
inline constexpr double kProjectionRidge = 1e-6;

struct LabeledPair {
    std::string hyponym;
    std::string hypernym;
    int label = 0;
};

// hyponym<TAB>hypernym<TAB>{0,1} per line.
std::vector<LabeledPair> load_labeled_pairs(std::istream& in);

struct TrainingPair {
    std::string hyponym;
    std::string hypernym;
    Eigen::VectorXd x;  // hyponym vector
    Eigen::VectorXd y;  // hypernym vector
};

Eigen::VectorXd to_eigen(std::span<const double> v);

// Looks up both vectors of every pair; throws OovError rather than skipping.
std::vector<TrainingPair> make_training_pairs(std::span<const LabeledPair> pairs, const EmbeddingTable& table);

struct OffsetCluster {
    std::size_t index = 0;
    Eigen::VectorXd centroid;  // mean of member offsets y - x
    std::size_t member_count = 0;
};

struct Clustering {
    std::vector<OffsetCluster> clusters;
    std::vector<std::size_t> assignment;  // cluster index per pair
    std::size_t rounds = 0;
};

// Seeded k-means over offsets y - x. Stops at an assignment fixpoint or after 100
// rounds; an emptied cluster is re-seeded with the point farthest from its centroid.
Clustering cluster_offsets(std::span<const TrainingPair> pairs, std::size_t k, std::uint64_t seed);

// argmin over Phi of (1/N) sum ||Phi x - y||^2. Solved through ridge-damped normal
// equations followed by iterative refinement, which converges to the exact
// least-squares solution (minimum-norm when the x vectors are rank-deficient).
Eigen::MatrixXd fit_projection(std::span<const TrainingPair> pairs);

// (1/N) sum ||Phi x - y||^2
double projection_objective(const Eigen::MatrixXd& phi, std::span<const TrainingPair> pairs);
// Gradient of projection_objective with respect to Phi.
Eigen::MatrixXd projection_gradient(const Eigen::MatrixXd& phi, std::span<const TrainingPair> pairs);

struct ProjectionModel {
    std::size_t dimension = 0;
    std::vector<OffsetCluster> clusters;
    std::vector<Eigen::MatrixXd> matrices;
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> provenance;

    std::size_t cluster_count() const { return clusters.size(); }
    // Cluster whose centroid is nearest to the offset; ties go to the lower index.
    std::size_t nearest_cluster(const Eigen::VectorXd& offset) const;
    double residual(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    nlohmann::json to_json() const;
    static ProjectionModel from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path) const;
    static ProjectionModel load(const std::filesystem::path& path);
};

// Clusters and fits one matrix per cluster. delta is left at 0 for fit_delta.
ProjectionModel train_projection(std::span<const TrainingPair> pairs, std::size_t k, std::uint64_t seed);

struct DeltaFit {
    double delta = 0.0;
    double f1 = 0.0;
};

// Picks delta from 50 residual quantiles of the held-out pairs, maximizing F1 of
// "residual < delta". Thresholds sit halfway between neighbouring residuals and the
// centre of the best-scoring run of quantiles wins.
DeltaFit fit_delta(const ProjectionModel& model, std::span<const LabeledPair> held_out, const EmbeddingTable& table);

// K in [1, max_k] minimizing the mean squared residual on validation positives.
std::size_t select_cluster_count(std::span<const TrainingPair> train, std::span<const TrainingPair> validation,
                                 std::size_t max_k, std::uint64_t seed);

struct ScoredEdge {
    std::string hyponym;
    std::string hypernym;
    double residual = 0.0;
    double strength = 0.0;  // delta - residual

    Edge edge() const { return {hyponym, hypernym, strength}; }
};

// Edge iff ||Phi_k x - y|| < delta for the cluster nearest to y - x.
std::optional<ScoredEdge> classify_pair(const std::string& hyponym, const std::string& hypernym,
                                        const ProjectionModel& model, const EmbeddingTable& table);

// classify_pair over every ordered pair of distinct in-vocabulary terms, in
// (hyponym, hypernym) order. Out-of-vocabulary terms are counted and skipped.
std::vector<ScoredEdge> build_edge_set(const std::set<std::string>& terms, const ProjectionModel& model,
                                       const EmbeddingTable& table, std::size_t* oov_count = nullptr);

} // namespace cilin

#endif
