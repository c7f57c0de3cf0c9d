#include "ugbdt/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "ugbdt/errors.hpp"
#include "ugbdt/rng.hpp"

namespace ugbdt {

const char* to_string(LossKind kind) {
    return kind == LossKind::normal_nll ? "normal_nll" : "logistic";
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "normal_nll") return LossKind::normal_nll;
    if (s == "logistic") return LossKind::logistic;
    throw ValidationError("unknown loss kind '" + s + "'");
}

const char* to_string(TrainMode mode) { return mode == TrainMode::sgb ? "sgb" : "sglb"; }

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "sgb") return TrainMode::sgb;
    if (s == "sglb") return TrainMode::sglb;
    throw ValidationError("unknown train mode '" + s + "'");
}

TrainConfig TrainConfig::resolved(std::size_t n) const {
    TrainConfig r = *this;
    if (r.mode == TrainMode::sglb) {
        if (r.beta == 0.0) r.beta = static_cast<double>(n);
        if (r.gamma < 0.0) r.gamma = 1.0 / (2.0 * static_cast<double>(n));
    } else {
        if (r.gamma < 0.0) r.gamma = 0.0;
    }
    return r;
}

void TrainConfig::validate() const {
    if (epsilon <= 0.0 || !std::isfinite(epsilon)) {
        throw ValidationError("learning rate must be positive and finite");
    }
    tree.validate();
    if (log_sigma.lo >= log_sigma.hi) {
        throw ValidationError("log-sigma bounds must satisfy lo < hi");
    }
    if (mode == TrainMode::sgb) {
        if (!(sample_rate > 0.0 && sample_rate <= 1.0)) {
            throw ValidationError("sgb requires 0 < sample_rate <= 1");
        }
        if (gamma != 0.0) throw ValidationError("sgb requires gamma = 0");
    } else {
        if (sample_rate != 1.0) throw ValidationError("sglb requires sample_rate = 1");
        if (!(beta > 0.0)) throw ValidationError("sglb requires beta > 0");
        const double shrink = gamma * epsilon;
        if (!(shrink >= 0.0 && shrink < 1.0)) {
            throw ValidationError("sglb requires 0 <= gamma*epsilon < 1");
        }
    }
}

std::array<double, 2> natural_gradient_normal(std::array<double, 2> pred, double y) {
    if (!std::isfinite(pred[0]) || !std::isfinite(pred[1]) || !std::isfinite(y)) {
        throw NumericError("non-finite input to the normal-loss gradient");
    }
    const double sigma = std::exp(pred[1]);
    const double z = (y - pred[0]) / sigma;
    return {pred[0] - y, 0.5 - 0.5 * z * z};
}

std::array<double, 2> ordinary_gradient_normal(std::array<double, 2> pred, double y) {
    if (!std::isfinite(pred[0]) || !std::isfinite(pred[1]) || !std::isfinite(y)) {
        throw NumericError("non-finite input to the normal-loss gradient");
    }
    const double sigma = std::exp(pred[1]);
    const double z = (y - pred[0]) / sigma;
    return {(pred[0] - y) / (sigma * sigma), 1.0 - z * z};
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double gradient_logistic(double logit, double y) {
    if (!std::isfinite(logit)) throw NumericError("non-finite logit in the logistic gradient");
    return sigmoid(logit) - y;
}

namespace {

constexpr double kProbabilityFloor = 1e-12;

double clamp_probability(double p) {
    return p < kProbabilityFloor ? kProbabilityFloor
                                 : (p > 1.0 - kProbabilityFloor ? 1.0 - kProbabilityFloor : p);
}

} // namespace

double nll_normal(double mu, double sigma, double y) {
    const double z = (y - mu) / sigma;
    return 0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) + 0.5 * z * z;
}

double nll_bernoulli(double p, double y) {
    const double q = clamp_probability(p);
    return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double nll(const Distribution& dist, double y) {
    if (dist.kind == LossKind::normal_nll) return nll_normal(dist.mu, dist.sigma, y);
    return nll_bernoulli(dist.p, y);
}

void GBMModel::rebuild_weights() {
    const std::size_t T = trees.size();
    const double rho = 1.0 - gamma * epsilon;
    tree_weights.assign(T, 0.0);
    double w = epsilon;
    for (std::size_t i = T; i-- > 0;) {
        tree_weights[i] = w;
        w *= rho;
    }
    f0_scale = std::pow(rho, static_cast<double>(T));
}

void GBMModel::predict_raw_into(std::span<const double> row, double* out) const {
    if (row.size() != input_width) {
        throw ValidationError("prediction row has " + std::to_string(row.size()) +
                              " features, model expects " + std::to_string(input_width));
    }
    const std::size_t d = loss.d_out();
    for (std::size_t k = 0; k < d; ++k) out[k] = f0_scale * f0[k];
    for (std::size_t i = 0; i < trees.size(); ++i) {
        const double* leaf = trees[i].leaf_for(row.data());
        const double w = tree_weights[i];
        for (std::size_t k = 0; k < d; ++k) out[k] += w * leaf[k];
    }
    add_tree_evaluations(trees.size());
}

std::vector<double> GBMModel::predict_raw(std::span<const double> row) const {
    std::vector<double> out(loss.d_out());
    predict_raw_into(row, out.data());
    return out;
}

std::vector<double> GBMModel::predict_raw_at(std::span<const double> row,
                                             std::span<const std::size_t> checkpoints) const {
    if (row.size() != input_width) {
        throw ValidationError("prediction row has " + std::to_string(row.size()) +
                              " features, model expects " + std::to_string(input_width));
    }
    if (checkpoints.empty()) throw ValidationError("checkpoint list must be nonempty");
    const std::size_t T = trees.size();
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] > T) throw ValidationError("checkpoint beyond trained iterations");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
            throw ValidationError("checkpoints must be strictly ascending");
        }
    }

    const std::size_t d = loss.d_out();
    const double rho = 1.0 - gamma * epsilon;
    std::vector<double> out(checkpoints.size() * d);
    // Running sum in the t=T frame: f0·(1-γε)^T + Σ_{i<=t} ε(1-γε)^(T-i)·φ_i;
    // the truncated model F^(t) is this sum divided by (1-γε)^(T-t).
    std::vector<double> partial(d);
    for (std::size_t k = 0; k < d; ++k) partial[k] = f0_scale * f0[k];

    std::size_t ci = 0;
    std::size_t evaluated = 0;
    for (std::size_t t = 0; t <= T && ci < checkpoints.size(); ++t) {
        if (t > 0) {
            const double* leaf = trees[t - 1].leaf_for(row.data());
            const double w = tree_weights[t - 1];
            for (std::size_t k = 0; k < d; ++k) partial[k] += w * leaf[k];
            ++evaluated;
        }
        if (checkpoints[ci] == t) {
            const double scale = std::pow(rho, static_cast<double>(T - t));
            for (std::size_t k = 0; k < d; ++k) {
                out[ci * d + k] = partial[k] / scale;
            }
            ++ci;
        }
    }
    add_tree_evaluations(evaluated);
    return out;
}

Distribution GBMModel::distribution_from_raw(const double* raw) const {
    Distribution dist;
    dist.kind = loss.kind;
    if (loss.kind == LossKind::normal_nll) {
        dist.mu = raw[0];
        dist.sigma = std::exp(log_sigma.clamp(raw[1]));
    } else {
        dist.p = sigmoid(raw[0]);
        dist.mu = dist.p;
    }
    return dist;
}

Distribution GBMModel::predict_distribution(std::span<const double> row) const {
    const auto raw = predict_raw(row);
    return distribution_from_raw(raw.data());
}

namespace {

std::vector<double> initial_scores(const LossSpec& loss, std::span<const double> y) {
    const auto n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    if (loss.kind == LossKind::normal_nll) {
        double ss = 0.0;
        for (const double v : y) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / n);
        return {mean, std::log(sd + 1e-8)};
    }
    const double logit = std::log(mean / (1.0 - mean));
    return {std::clamp(logit, -10.0, 10.0)};
}

} // namespace

GBMModel train(const EncodedMatrix& X, std::span<const double> y, const TrainConfig& raw_config,
               LossSpec loss, const IterationHook& hook) {
    if (X.n < 1) throw DataError("training requires at least one row");
    if (y.size() != X.n) throw DataError("target count does not match matrix rows");
    for (const double v : y) {
        if (!std::isfinite(v)) throw NumericError("non-finite training target");
    }
    if (loss.kind == LossKind::logistic) {
        for (const double v : y) {
            if (v != 0.0 && v != 1.0) {
                throw DataError("binary classification targets must be 0 or 1");
            }
        }
    }
    const TrainConfig config = raw_config.resolved(X.n);
    config.validate();

    const std::size_t n = X.n;
    const std::size_t d = loss.d_out();
    const std::size_t T = config.iterations;
    const double rho = 1.0 - config.gamma * config.epsilon;

    GBMModel model;
    model.loss = loss;
    model.mode = config.mode;
    model.epsilon = config.epsilon;
    model.gamma = config.gamma;
    model.log_sigma = config.log_sigma;
    model.input_width = X.p;
    model.f0 = initial_scores(loss, y);
    model.trees.reserve(T);

    const BinnedMatrix binned = BinnedMatrix::build(X, config.tree.max_bins);

    // Cached raw predictions F^(t) for every training row.
    std::vector<double> scores(n * d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < d; ++k) scores[r * d + k] = model.f0[k];
    }

    std::vector<double> fit_targets(n * d);
    std::vector<std::uint32_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0u);
    std::vector<std::uint32_t> pool(n);
    std::vector<std::uint32_t> sampled;

    const bool subsampled = config.mode == TrainMode::sgb && config.sample_rate < 1.0;
    const std::size_t sample_size =
        subsampled ? std::min<std::size_t>(
                         n, static_cast<std::size_t>(std::ceil(
                                config.sample_rate * static_cast<double>(n))))
                   : n;
    if (sample_size == 0) throw ValidationError("sample_rate leaves an empty subsample");

    for (std::size_t t = 1; t <= T; ++t) {
        Rng rng = Rng::stream(config.seed, t);

        // Negative gradients at the current predictions.
        if (loss.kind == LossKind::normal_nll) {
            for (std::size_t r = 0; r < n; ++r) {
                const double mu = scores[r * 2];
                const double ls = config.log_sigma.clamp(scores[r * 2 + 1]);
                const auto g = natural_gradient_normal({mu, ls}, y[r]);
                if (!std::isfinite(g[0]) || !std::isfinite(g[1])) {
                    throw NumericError("non-finite gradient at iteration " + std::to_string(t));
                }
                fit_targets[r * 2] = -g[0];
                fit_targets[r * 2 + 1] = -g[1];
            }
        } else {
            for (std::size_t r = 0; r < n; ++r) {
                const double g = gradient_logistic(scores[r], y[r]);
                fit_targets[r] = -g;
            }
        }

        if (config.mode == TrainMode::sglb) {
            const double noise_sd = std::sqrt(2.0 / (config.beta * config.epsilon));
            for (std::size_t i = 0; i < n * d; ++i) {
                fit_targets[i] += noise_sd * rng.next_normal();
            }
        }

        std::span<const std::uint32_t> rows(all_rows);
        if (subsampled) {
            // Partial Fisher-Yates: the first sample_size entries are a
            // uniform draw without replacement; sorted for determinism of
            // the downstream partition order.
            std::iota(pool.begin(), pool.end(), 0u);
            for (std::size_t i = 0; i < sample_size; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
                std::swap(pool[i], pool[j]);
            }
            sampled.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(sample_size));
            std::sort(sampled.begin(), sampled.end());
            rows = sampled;
        }

        DecisionTree tree = fit_tree(binned, fit_targets, d, rows, config.tree);

        for (std::size_t r = 0; r < n; ++r) {
            const double* leaf = tree.leaf_for(X.row(r));
            for (std::size_t k = 0; k < d; ++k) {
                scores[r * d + k] = rho * scores[r * d + k] + config.epsilon * leaf[k];
            }
        }
        model.trees.push_back(std::move(tree));

        if (hook) hook(t, rows, scores);
    }

    model.rebuild_weights();
    return model;
}

} // namespace ugbdt
