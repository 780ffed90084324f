#include "cilin/rankers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "cilin/errors.hpp"
#include "cilin/text.hpp"

namespace cilin {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "cilin-rankers";

double dot6(const Features& a, const Features& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) s += a[i] * b[i];
    return s;
}

double rbf_kernel(const Features& a, const Features& b, double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

struct DualSolution {
    std::vector<double> coef;  // alpha_i * y_i
    double bias = 0.0;
};

// C-SVC dual by SMO with second-order working-set selection. `kernel` is the
// full n x n Gram matrix, `y` holds +1/-1.
DualSolution solve_svm_dual(const Eigen::MatrixXd& kernel, const std::vector<double>& y, double c, double eps,
                            std::size_t max_iterations) {
    const std::size_t n = y.size();
    constexpr double kTau = 1e-12;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * kernel(i, j); };
    auto upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i_sel = -1;
        std::ptrdiff_t j_sel = -1;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (!upper(t) && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i_sel = static_cast<std::ptrdiff_t>(t);
                }
            } else if (!lower(t) && grad[t] >= gmax) {
                gmax = grad[t];
                i_sel = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (i_sel < 0) break;
        const auto i = static_cast<std::size_t>(i_sel);
        double obj_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            double grad_diff = 0.0;
            double quad = 0.0;
            if (y[t] > 0) {
                if (lower(t)) continue;
                gmax2 = std::max(gmax2, grad[t]);
                grad_diff = gmax + grad[t];
                quad = kernel(i, i) + kernel(t, t) - 2.0 * y[i] * q(i, t);
            } else {
                if (upper(t)) continue;
                gmax2 = std::max(gmax2, -grad[t]);
                grad_diff = gmax - grad[t];
                quad = kernel(i, i) + kernel(t, t) + 2.0 * y[i] * q(i, t);
            }
            if (grad_diff > 0.0) {
                double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
                if (obj <= obj_min) {
                    obj_min = obj;
                    j_sel = static_cast<std::ptrdiff_t>(t);
                }
            }
        }
        if (gmax + gmax2 < eps || j_sel < 0) break;
        const auto j = static_cast<std::size_t>(j_sel);

        double old_i = alpha[i];
        double old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = kernel(i, i) + kernel(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) quad = kTau;
            double delta = (-grad[i] - grad[j]) / quad;
            double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) quad = kTau;
            double delta = (grad[i] - grad[j]) / quad;
            double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        double di = alpha[i] - old_i;
        double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
    }

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    DualSolution out;
    out.coef.resize(n);
    for (std::size_t t = 0; t < n; ++t) out.coef[t] = alpha[t] * y[t];
    out.bias = -rho;
    return out;
}

// Folds standardization into a linear model so it applies to raw features.
LinearModel fold(const Features& w_std, double b_std, const Standardizer& s) {
    LinearModel m;
    m.bias = b_std;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        m.weights[k] = w_std[k] / s.scale[k];
        m.bias -= w_std[k] * s.mean[k] / s.scale[k];
    }
    return m;
}

LinearModel train_logistic(const std::vector<Features>& x, const std::vector<int>& labels, double l2,
                           const Standardizer& s) {
    constexpr int p = static_cast<int>(kFeatureCount) + 1;
    const std::size_t n = x.size();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    auto objective = [&](const Eigen::VectorXd& th) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = th[p - 1];
            for (int k = 0; k < p - 1; ++k) z += th[k] * x[i][static_cast<std::size_t>(k)];
            // log(1 + e^z) - t z, computed stably
            f += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - labels[i] * z;
        }
        return f + 0.5 * l2 * th.head(p - 1).squaredNorm();
    };
    double fval = objective(theta);
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::VectorXd xi(p);
            for (int k = 0; k < p - 1; ++k) xi[k] = x[i][static_cast<std::size_t>(k)];
            xi[p - 1] = 1.0;
            double z = theta.dot(xi);
            double prob = 1.0 / (1.0 + std::exp(-z));
            g += (prob - labels[i]) * xi;
            h += prob * (1.0 - prob) * xi * xi.transpose();
        }
        g.head(p - 1) += l2 * theta.head(p - 1);
        for (int k = 0; k < p - 1; ++k) h(k, k) += l2;
        h(p - 1, p - 1) += 1e-10;
        Eigen::VectorXd step = h.ldlt().solve(g);
        double t = 1.0;
        double gd = g.dot(step);
        bool accepted = false;
        while (t >= 1e-10) {
            Eigen::VectorXd cand = theta - t * step;
            double fc = objective(cand);
            if (fc <= fval - 1e-4 * t * gd) {
                theta = cand;
                fval = fc;
                accepted = true;
                break;
            }
            t /= 2.0;
        }
        if (!accepted || (t * step).norm() < 1e-12) break;
    }
    Features w{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) w[k] = theta[static_cast<int>(k)];
    return fold(w, theta[p - 1], s);
}

json features_json(const Features& f) { return json(std::vector<double>(f.begin(), f.end())); }

Features features_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != kFeatureCount)
        throw LoadError(std::string("ranker model: '") + what + "' must have " + std::to_string(kFeatureCount) +
                        " components");
    Features f{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) f[k] = j[k].get<double>();
    return f;
}

json linear_json(const LinearModel& m) { return {{"weights", features_json(m.weights)}, {"bias", m.bias}}; }

LinearModel linear_from(const json& j) {
    LinearModel m;
    m.weights = features_from(j.at("weights"), "weights");
    m.bias = j.at("bias").get<double>();
    return m;
}

} // namespace

Standardizer Standardizer::fit(std::span<const LabeledExample> data) {
    Standardizer s;
    s.scale.fill(1.0);
    if (data.empty()) return s;
    const double n = static_cast<double>(data.size());
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        double mean = 0.0;
        for (const auto& ex : data) mean += ex.features[k];
        mean /= n;
        double var = 0.0;
        for (const auto& ex : data) var += (ex.features[k] - mean) * (ex.features[k] - mean);
        var /= n;
        s.mean[k] = mean;
        s.scale[k] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Features Standardizer::apply(const Features& f) const {
    Features out{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) out[k] = (f[k] - mean[k]) / scale[k];
    return out;
}

double PlattCalibration::operator()(double decision) const {
    double z = a * decision + b;
    return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

PlattCalibration PlattCalibration::fit(std::span<const double> decisions, std::span<const int> labels) {
    double prior1 = 0.0;
    double prior0 = 0.0;
    for (int l : labels) (l > 0 ? prior1 : prior0) += 1.0;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    const std::size_t n = decisions.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi : lo;

    auto objective = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = decisions[i] * a + b;
            f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };

    PlattCalibration cal{0.0, std::log((prior0 + 1.0) / (prior1 + 1.0))};
    const double prior_b = cal.b;
    double fval = objective(cal.a, cal.b);
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = decisions[i] * cal.a + cal.b;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            double d2 = p * q;
            h11 += decisions[i] * decisions[i] * d2;
            h22 += d2;
            h21 += decisions[i] * d2;
            double d1 = t[i] - p;
            g1 += decisions[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
        double det = h11 * h22 - h21 * h21;
        double da = -(h22 * g1 - h21 * g2) / det;
        double db = -(-h21 * g1 + h11 * g2) / det;
        double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= 1e-10) {
            double na = cal.a + step * da;
            double nb = cal.b + step * db;
            double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                cal = {na, nb};
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < 1e-10) break;
    }
    if (!(cal.a <= 0.0) || !std::isfinite(cal.b)) cal = {0.0, prior_b};
    return cal;
}

double LinearModel::decision(const Features& f) const { return dot6(weights, f) + bias; }

double RbfModel::decision(const Features& f) const {
    Features z = standardizer.apply(f);
    double s = bias;
    for (std::size_t i = 0; i < support.size(); ++i) s += coef[i] * rbf_kernel(support[i], z, gamma);
    return s;
}

std::array<double, 3> RankerEnsemble::decisions(const Features& f) const {
    return {linear_svm.decision(f), rbf_svm.decision(f), logistic.decision(f)};
}

std::array<double, 3> RankerEnsemble::sub_scores(const Features& f) const {
    auto d = decisions(f);
    return {calibration[0](d[0]), calibration[1](d[1]), calibration[2](d[2])};
}

double RankerEnsemble::score(const Features& f) const {
    auto s = sub_scores(f);
    return (s[0] + s[1] + s[2]) / 3.0;
}

RankerEnsemble train_rankers(std::span<const LabeledExample> data, const RankerConfig& config) {
    if (data.empty()) throw TrainingError("ranker training data is empty");
    std::size_t positives = 0;
    for (const auto& ex : data) {
        if (ex.label != 0 && ex.label != 1) throw TrainingError("labels must be 0 or 1");
        positives += static_cast<std::size_t>(ex.label);
    }
    if (positives == 0 || positives == data.size())
        throw TrainingError("ranker training data has a single class (" + std::to_string(positives) + " positive of " +
                            std::to_string(data.size()) + ")");

    RankerEnsemble ens;
    ens.seed = config.seed;
    const Standardizer s = Standardizer::fit(data);

    std::vector<Features> x;
    std::vector<int> labels;
    x.reserve(data.size());
    for (const auto& ex : data) {
        x.push_back(s.apply(ex.features));
        labels.push_back(ex.label);
    }

    // Kernel machines train on a seeded subsample once the Gram matrix gets large.
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (idx.size() > config.max_kernel_examples) {
        std::mt19937_64 rng(config.seed);
        for (std::size_t k = 0; k < config.max_kernel_examples; ++k) {
            std::size_t r = k + static_cast<std::size_t>(rng() % (idx.size() - k));
            std::swap(idx[k], idx[r]);
        }
        idx.resize(config.max_kernel_examples);
        std::sort(idx.begin(), idx.end());
        bool pos = false, neg = false;
        for (auto i : idx) (labels[i] ? pos : neg) = true;
        if (!pos || !neg) throw TrainingError("kernel subsample lost a class; raise max_kernel_examples");
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    std::vector<double> y(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) y[k] = labels[idx[k]] ? 1.0 : -1.0;

    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b <= a; ++b)
            gram(a, b) = gram(b, a) = dot6(x[idx[static_cast<std::size_t>(a)]], x[idx[static_cast<std::size_t>(b)]]);
    auto lin = solve_svm_dual(gram, y, config.linear_c, config.tolerance, config.max_iterations);
    Features w{};
    for (std::size_t k = 0; k < idx.size(); ++k)
        for (std::size_t f = 0; f < kFeatureCount; ++f) w[f] += lin.coef[k] * x[idx[k]][f];
    ens.linear_svm = fold(w, lin.bias, s);

    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b <= a; ++b)
            gram(a, b) = gram(b, a) =
                rbf_kernel(x[idx[static_cast<std::size_t>(a)]], x[idx[static_cast<std::size_t>(b)]], config.gamma);
    auto rbf = solve_svm_dual(gram, y, config.rbf_c, config.tolerance, config.max_iterations);
    ens.rbf_svm.standardizer = s;
    ens.rbf_svm.gamma = config.gamma;
    ens.rbf_svm.bias = rbf.bias;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (rbf.coef[k] == 0.0) continue;
        ens.rbf_svm.support.push_back(x[idx[k]]);
        ens.rbf_svm.coef.push_back(rbf.coef[k]);
    }

    ens.logistic = train_logistic(x, labels, config.logistic_l2, s);

    for (int r = 0; r < 3; ++r) {
        std::vector<double> dec;
        dec.reserve(data.size());
        for (const auto& ex : data) dec.push_back(ens.decisions(ex.features)[static_cast<std::size_t>(r)]);
        ens.calibration[static_cast<std::size_t>(r)] = PlattCalibration::fit(dec, labels);
    }
    return ens;
}

json RankerEnsemble::to_json() const {
    json support = json::array();
    for (const auto& sv : rbf_svm.support) support.push_back(features_json(sv));
    json cal = json::array();
    for (const auto& c : calibration) cal.push_back({{"a", c.a}, {"b", c.b}});
    return {
        {"format", kFormatName},
        {"version", kFormatVersion},
        {"feature_count", kFeatureCount},
        {"feature_order",
         {"log1p_cooccurrence", "is_tag", "is_head", "entity_cosine", "log1p_corpus_frequency", "length_ratio"}},
        {"labeling_rule", labeling_rule},
        {"seed", seed},
        {"linear_svm", linear_json(linear_svm)},
        {"logistic", linear_json(logistic)},
        {"rbf_svm",
         {{"gamma", rbf_svm.gamma},
          {"bias", rbf_svm.bias},
          {"mean", features_json(rbf_svm.standardizer.mean)},
          {"scale", features_json(rbf_svm.standardizer.scale)},
          {"support", support},
          {"coef", rbf_svm.coef}}},
        {"calibration", cal},
    };
}

RankerEnsemble RankerEnsemble::from_json(const json& doc) {
    try {
        if (doc.at("format").get<std::string>() != kFormatName) throw LoadError("not a ranker model file");
        int version = doc.at("version").get<int>();
        if (version != kFormatVersion)
            throw LoadError("unsupported ranker model version " + std::to_string(version) + " (expected " +
                            std::to_string(kFormatVersion) + ")");
        if (doc.at("feature_count").get<std::size_t>() != kFeatureCount)
            throw LoadError("ranker model feature count mismatch");
        RankerEnsemble ens;
        ens.labeling_rule = doc.at("labeling_rule").get<std::string>();
        ens.seed = doc.at("seed").get<std::uint64_t>();
        ens.linear_svm = linear_from(doc.at("linear_svm"));
        ens.logistic = linear_from(doc.at("logistic"));
        const auto& r = doc.at("rbf_svm");
        ens.rbf_svm.gamma = r.at("gamma").get<double>();
        ens.rbf_svm.bias = r.at("bias").get<double>();
        ens.rbf_svm.standardizer.mean = features_from(r.at("mean"), "mean");
        ens.rbf_svm.standardizer.scale = features_from(r.at("scale"), "scale");
        for (const auto& sv : r.at("support")) ens.rbf_svm.support.push_back(features_from(sv, "support"));
        ens.rbf_svm.coef = r.at("coef").get<std::vector<double>>();
        if (ens.rbf_svm.coef.size() != ens.rbf_svm.support.size())
            throw LoadError("ranker model: support/coef length mismatch");
        const auto& cal = doc.at("calibration");
        if (!cal.is_array() || cal.size() != 3) throw LoadError("ranker model: calibration needs 3 entries");
        for (std::size_t k = 0; k < 3; ++k)
            ens.calibration[k] = {cal[k].at("a").get<double>(), cal[k].at("b").get<double>()};
        return ens;
    } catch (const json::exception& e) {
        throw LoadError(std::string("ranker model: ") + e.what());
    }
}

void RankerEnsemble::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json().dump(1) << '\n';
}

RankerEnsemble RankerEnsemble::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open ranker model " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    return from_json(doc);
}

CandidateSet rank_candidates(CandidateSet candidates, const SubScorer& scorer, double keep_threshold) {
    CandidateSet kept;
    for (auto& c : candidates) {
        auto s = scorer(c.features);
        c.score = (s[0] + s[1] + s[2]) / 3.0;
        if (*c.score >= keep_threshold) kept.push_back(std::move(c));
    }
    std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
        if (*a.score != *b.score) return *a.score > *b.score;
        return a.term < b.term;
    });
    return kept;
}

CandidateSet rank_candidates(CandidateSet candidates, const RankerEnsemble& ensemble, double keep_threshold) {
    return rank_candidates(
        std::move(candidates), [&](const Features& f) { return ensemble.sub_scores(f); }, keep_threshold);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    double pos = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = (static_cast<double>(i) + static_cast<double>(j) + 1.0) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) {
                rank_sum += avg_rank;
                pos += 1.0;
            }
        i = j;
    }
    double neg = static_cast<double>(n) - pos;
    if (pos == 0.0 || neg == 0.0) throw ParameterError("AUC needs both classes");
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

} // namespace cilin
