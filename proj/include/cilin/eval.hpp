#ifndef CILIN_EVAL_HPP
#define CILIN_EVAL_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cilin/discovery.hpp"
#include "cilin/embedding.hpp"
#include "cilin/hierarchy.hpp"
#include "cilin/taxonomy.hpp"

namespace cilin::eval {

// Synthetic data generators and the self-checking suites run by `cilin eval`.

struct RegressionInstance {
    std::vector<TrainingPair> pairs;
    Eigen::MatrixXd truth;
};

// d-dimensional x ~ N(0, I), y = A x + N(0, noise^2) with a random A.
RegressionInstance make_regression_instance(std::size_t d, std::size_t n, double noise, std::uint64_t seed);

// Plain gradient descent on the mean squared residual from Phi = 0, step 1/L.
Eigen::MatrixXd gradient_descent_projection(const std::vector<TrainingPair>& pairs, std::size_t steps);

struct SyntheticHierarchy {
    EmbeddingTable table{1};
    std::vector<Eigen::MatrixXd> matrices;   // ground truth, one per relation type
    std::vector<LabeledPair> train;          // positives only
    std::vector<std::size_t> train_types;    // ground-truth type per training pair
    std::vector<LabeledPair> validation;     // positives and negatives, for delta
    std::vector<LabeledPair> test;           // positives and negatives
};

// K relation types, each a random orthogonal matrix times a scale. Hyponyms of one
// type sit around a shared centre, so offsets y - x cluster by type. Negatives pair a
// hyponym with the image of a different hyponym of the same type.
SyntheticHierarchy make_synthetic_hierarchy(std::size_t d, std::size_t k, std::size_t train, std::size_t held_out,
                                            double noise, std::uint64_t seed);

// Fraction of pairs whose cluster matches the ground truth under the best relabeling.
double cluster_accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth, std::size_t k);

// Up to max_nodes nodes, each ordered pair linked with probability `density`.
std::vector<Edge> make_random_edges(std::size_t max_nodes, double density, std::uint64_t seed);

// Linearly separable labeled features with a margin, half positive.
std::vector<LabeledExample> make_separable_features(std::size_t positives, std::size_t negatives, std::uint64_t seed);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<Check> checks;
    nlohmann::json metrics = nlohmann::json::object();

    bool passed() const;
    nlohmann::json to_json() const;
};

SuiteReport run_projection_suite(std::uint64_t seed);
SuiteReport run_taxonomy_suite(std::uint64_t seed);
SuiteReport run_ranking_suite(std::uint64_t seed);
SuiteReport run_disambiguation_suite(std::uint64_t seed);

const std::vector<std::string>& suite_names();
// Throws ParameterError for an unknown suite.
SuiteReport run_suite(const std::string& name, std::uint64_t seed);

} // namespace cilin::eval

#endif
