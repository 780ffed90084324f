#include <random>

#include <gtest/gtest.h>

#include "cilin/errors.hpp"
#include "cilin/rankers.hpp"
#include "oracles.hpp"

using namespace cilin;

namespace {

std::vector<LabeledExample> separable(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<LabeledExample> out;
    while (out.size() < n) {
        LabeledExample e;
        for (auto& f : e.features) f = g(rng);
        double m = e.features[0] + 0.5 * e.features[3] - 0.25 * e.features[5];
        if (std::abs(m) < 0.3) continue;
        e.label = m > 0;
        out.push_back(e);
    }
    return out;
}

double mann_whitney(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1;
                wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return wins / pairs;
}

} // namespace

TEST(Rankers, RocAucMatchesPairCounting) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> coarse(0, 4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s;
        std::vector<int> y;
        for (int i = 0; i < 40; ++i) {
            s.push_back(coarse(rng));
            y.push_back(i % 3 == 0);
        }
        EXPECT_NEAR(roc_auc(s, y), mann_whitney(s, y), 1e-12);
    }
}

TEST(Rankers, SubModelsSeparateHeldOutData) {
    auto data = separable(600, 11);
    std::vector<LabeledExample> train(data.begin(), data.begin() + 400), test(data.begin() + 400, data.end());
    auto ens = train_rankers(train);
    std::array<std::vector<double>, 4> s;
    std::vector<int> y;
    for (const auto& e : test) {
        auto sub = ens.sub_scores(e.features);
        for (int i = 0; i < 3; ++i) {
            EXPECT_GE(sub[i], 0.0);
            EXPECT_LE(sub[i], 1.0);
            s[i].push_back(sub[i]);
        }
        s[3].push_back(ens.score(e.features));
        EXPECT_NEAR(s[3].back(), (sub[0] + sub[1] + sub[2]) / 3, 1e-15);
        y.push_back(e.label);
    }
    for (int i = 0; i < 4; ++i) EXPECT_GE(mann_whitney(s[i], y), 0.95) << "model " << i;
}

TEST(Rankers, CalibrationIsMonotone) {
    std::vector<double> d{-3, -2, -1, 0, 1, 2, 3, 0.5, -0.5};
    std::vector<int> y{0, 0, 0, 1, 1, 1, 1, 0, 1};
    auto p = PlattCalibration::fit(d, y);
    EXPECT_LE(p.a, 0.0);
    for (double x = -5; x < 5; x += 0.25) EXPECT_LE(p(x), p(x + 0.25));
}

TEST(Rankers, TrainingRejectsDegenerateData) {
    std::vector<LabeledExample> none;
    EXPECT_THROW(train_rankers(none), TrainingError);
    std::vector<LabeledExample> one_class(5);
    for (auto& e : one_class) e.label = 1;
    EXPECT_THROW(train_rankers(one_class), TrainingError);
}

TEST(Rankers, ModelRoundTripsThroughJson) {
    auto data = separable(120, 4);
    auto ens = train_rankers(data);
    auto back = RankerEnsemble::from_json(ens.to_json());
    for (const auto& e : data) EXPECT_EQ(back.score(e.features), ens.score(e.features));
    fixture::TempDir tmp;
    ens.save(tmp / "r.json");
    EXPECT_EQ(RankerEnsemble::load(tmp / "r.json").to_json(), ens.to_json());
}

TEST(Rankers, TrainingIsDeterministic) {
    auto data = separable(200, 9);
    EXPECT_EQ(train_rankers(data).to_json().dump(), train_rankers(data).to_json().dump());
}

TEST(Rankers, RankCandidatesFiltersAndSorts) {
    CandidateSet cs{{"a", {}, 0, {0.9, 0, 0, 0, 0, 0}, {}},
                    {"b", {}, 0, {0.2, 0, 0, 0, 0, 0}, {}},
                    {"c", {}, 0, {0.9, 0, 0, 0, 0, 0}, {}},
                    {"d", {}, 0, {0.6, 0, 0, 0, 0, 0}, {}}};
    SubScorer scorer = [](const Features& f) { return std::array<double, 3>{f[0], f[0], f[0]}; };
    auto ranked = rank_candidates(cs, scorer, 0.5);
    ASSERT_EQ(ranked.size(), 3u);
    EXPECT_EQ(ranked[0].term, "a");
    EXPECT_EQ(ranked[1].term, "c");
    EXPECT_EQ(ranked[2].term, "d");
    EXPECT_NEAR(*ranked[2].score, 0.6, 1e-15);
}
