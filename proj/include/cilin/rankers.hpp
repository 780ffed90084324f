#ifndef CILIN_RANKERS_HPP
#define CILIN_RANKERS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cilin/discovery.hpp"

namespace cilin {

// Per-feature affine map to zero mean, unit variance (constant features keep scale 1).
struct Standardizer {
    Features mean{};
    Features scale{};

    static Standardizer fit(std::span<const LabeledExample> data);
    Features apply(const Features& f) const;
};

// p = 1 / (1 + exp(a*f + b)); a <= 0 keeps p non-decreasing in f.
struct PlattCalibration {
    double a = 0.0;
    double b = 0.0;

    double operator()(double decision) const;
    // Newton fit with Platt's smoothed targets.
    static PlattCalibration fit(std::span<const double> decisions, std::span<const int> labels);
};

struct LinearModel {
    Features weights{};
    double bias = 0.0;

    double decision(const Features& f) const;
};

struct RbfModel {
    Standardizer standardizer;
    std::vector<Features> support;  // standardized support vectors
    std::vector<double> coef;       // alpha_i * y_i
    double bias = 0.0;
    double gamma = 1.0 / static_cast<double>(kFeatureCount);

    double decision(const Features& f) const;
};

struct RankerConfig {
    double linear_c = 1.0;
    double rbf_c = 1.0;
    double gamma = 1.0 / static_cast<double>(kFeatureCount);
    double logistic_l2 = 1.0;
    double tolerance = 1e-3;
    std::size_t max_iterations = 100000;
    // Above this many examples the kernel SVM trains on a seeded subsample.
    std::size_t max_kernel_examples = 4000;
    std::uint64_t seed = 0;
};

// Linear SVM, RBF SVM and logistic regression, each squashed to [0,1] by its own
// calibration; the ensemble score is the mean of the three.
struct RankerEnsemble {
    LinearModel linear_svm;
    RbfModel rbf_svm;
    LinearModel logistic;
    std::array<PlattCalibration, 3> calibration{};
    std::uint64_t seed = 0;
    std::string labeling_rule = kHeuristicLabelRule;

    std::array<double, 3> decisions(const Features& f) const;
    std::array<double, 3> sub_scores(const Features& f) const;
    double score(const Features& f) const;

    nlohmann::json to_json() const;
    static RankerEnsemble from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path) const;
    static RankerEnsemble load(const std::filesystem::path& path);
};

// Throws TrainingError on empty or single-class data.
RankerEnsemble train_rankers(std::span<const LabeledExample> data, const RankerConfig& config = {});

using SubScorer = std::function<std::array<double, 3>(const Features&)>;

// Scores every candidate with the mean of three calibrated sub-scores, drops those
// under keep_threshold, and sorts by score descending then term.
CandidateSet rank_candidates(CandidateSet candidates, const SubScorer& scorer, double keep_threshold);
CandidateSet rank_candidates(CandidateSet candidates, const RankerEnsemble& ensemble, double keep_threshold);

// Area under the ROC curve with ties counted half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

} // namespace cilin

#endif
