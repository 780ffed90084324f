#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cilin/errors.hpp"
#include "cilin/hierarchy.hpp"
#include "oracles.hpp"

using namespace cilin;

namespace {

Eigen::VectorXd gaussian(std::size_t d, std::mt19937_64& rng, double sigma = 1.0) {
    std::normal_distribution<double> g(0, sigma);
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (auto& x : v) x = g(rng);
    return v;
}

std::vector<TrainingPair> mapped(const Eigen::MatrixXd& a, std::size_t n, std::mt19937_64& rng, double noise = 0.0) {
    std::vector<TrainingPair> out;
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd x = gaussian(static_cast<std::size_t>(a.cols()), rng);
        Eigen::VectorXd y = a * x;
        if (noise > 0) y += gaussian(static_cast<std::size_t>(a.rows()), rng, noise);
        out.push_back({"x" + std::to_string(i), "y" + std::to_string(i), x, y});
    }
    return out;
}

} // namespace

TEST(Hierarchy, IdentityAndScalingAreRecovered) {
    std::mt19937_64 rng(1);
    auto id = mapped(Eigen::MatrixXd::Identity(5, 5), 30, rng);
    EXPECT_LT((fit_projection(id) - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-9);
    auto twice = mapped(2.0 * Eigen::MatrixXd::Identity(5, 5), 30, rng);
    EXPECT_LT((fit_projection(twice) - 2.0 * Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-9);
}

TEST(Hierarchy, FitIsAStationaryPointAndBeatsPerturbations) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 6);
        auto pairs = mapped(a, 40, rng, 0.05);
        Eigen::MatrixXd phi = fit_projection(pairs);
        EXPECT_LT(projection_gradient(phi, pairs).norm(), 1e-8);
        double best = oracle::mean_squared_residual(phi, pairs);
        EXPECT_NEAR(projection_objective(phi, pairs), best, 1e-12);
        for (int k = 0; k < 20; ++k) {
            Eigen::MatrixXd bump = 1e-3 * Eigen::MatrixXd::Random(6, 6);
            EXPECT_GE(oracle::mean_squared_residual(phi + bump, pairs), best);
        }
    }
}

TEST(Hierarchy, RankDeficientInputsStillSolve) {
    std::mt19937_64 rng(3);
    auto pairs = mapped(Eigen::MatrixXd::Random(6, 6), 3, rng);
    Eigen::MatrixXd phi = fit_projection(pairs);
    EXPECT_TRUE(phi.allFinite());
    EXPECT_LT(oracle::mean_squared_residual(phi, pairs), 1e-8);
}

TEST(Hierarchy, MatchesGradientDescentOracle) {
    std::mt19937_64 rng(4);
    auto pairs = mapped(Eigen::MatrixXd::Random(4, 4), 30, rng, 0.01);
    EXPECT_LE(oracle::mean_squared_residual(fit_projection(pairs), pairs),
              oracle::mean_squared_residual(oracle::descend(pairs, 5000), pairs) + 1e-9);
}

TEST(Hierarchy, KMeansSeparatesOffsetGroups) {
    std::mt19937_64 rng(5);
    std::vector<TrainingPair> pairs;
    for (int i = 0; i < 40; ++i) {
        Eigen::VectorXd x = gaussian(3, rng);
        Eigen::VectorXd shift = Eigen::VectorXd::Zero(3);
        shift[i % 2 ? 0 : 2] = 10.0;
        pairs.push_back({"a", "b", x, x + shift + gaussian(3, rng, 0.1)});
    }
    auto c = cluster_offsets(pairs, 2, 0);
    ASSERT_EQ(c.clusters.size(), 2u);
    for (std::size_t i = 2; i < pairs.size(); ++i) EXPECT_EQ(c.assignment[i], c.assignment[i % 2]);
    EXPECT_NE(c.assignment[0], c.assignment[1]);
    EXPECT_EQ(cluster_offsets(pairs, 2, 0).assignment, c.assignment);
}

TEST(Hierarchy, ClassifierUsesNearestClusterAndDelta) {
    EmbeddingTable t(2);
    t.insert("x", {1, 0});
    t.insert("y", {2, 0});
    t.insert("z", {0, 5});
    ProjectionModel m;
    m.dimension = 2;
    m.clusters = {{0, Eigen::Vector2d(1, 0), 1}};
    m.matrices = {2.0 * Eigen::MatrixXd::Identity(2, 2)};
    m.delta = 0.5;
    auto hit = classify_pair("x", "y", m, t);
    ASSERT_TRUE(hit);
    EXPECT_NEAR(hit->residual, 0.0, 1e-15);
    EXPECT_NEAR(hit->strength, 0.5, 1e-15);
    EXPECT_FALSE(classify_pair("x", "z", m, t));
    std::size_t oov = 0;
    auto edges = build_edge_set({"x", "y", "z", "missing"}, m, t, &oov);
    EXPECT_EQ(oov, 1u);
    for (const auto& e : edges) EXPECT_LT(e.residual, m.delta);
}

TEST(Hierarchy, TrainingPairsRequireVocabulary) {
    EmbeddingTable t(1);
    t.insert("a", {1});
    std::vector<LabeledPair> pairs{{"a", "b", 1}};
    EXPECT_THROW(make_training_pairs(pairs, t), OovError);
}

TEST(Hierarchy, DeltaFitSeparatesResiduals) {
    EmbeddingTable t(1);
    t.insert("p", {1});
    t.insert("q", {2});
    t.insert("r", {9});
    ProjectionModel m;
    m.dimension = 1;
    m.clusters = {{0, Eigen::VectorXd::Constant(1, 1.0), 1}};
    m.matrices = {Eigen::MatrixXd::Constant(1, 1, 2.0)};
    std::vector<LabeledPair> held{{"p", "q", 1}, {"p", "r", 0}};
    auto fit = fit_delta(m, held, t);
    EXPECT_EQ(fit.f1, 1.0);
    EXPECT_GT(fit.delta, 0.0);
    EXPECT_LT(fit.delta, 7.0);
}

TEST(Hierarchy, ModelRoundTripsAndLabeledPairsLoad) {
    std::mt19937_64 rng(6);
    auto pairs = mapped(Eigen::MatrixXd::Random(3, 3), 20, rng);
    auto model = train_projection(pairs, 2, 1);
    model.delta = 0.25;
    auto back = ProjectionModel::from_json(model.to_json());
    EXPECT_EQ(back.to_json(), model.to_json());
    EXPECT_EQ(back.residual(pairs[0].x, pairs[0].y), model.residual(pairs[0].x, pairs[0].y));
    std::istringstream in("a\tb\t1\nc\td\t0\n");
    auto loaded = load_labeled_pairs(in);
    ASSERT_EQ(loaded.size(), 2u);
    EXPECT_EQ(loaded[1].label, 0);
    std::istringstream bad("a\tb\t2\n");
    EXPECT_THROW(load_labeled_pairs(bad), LoadError);
}
