#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ugbdt/data.hpp"
#include "ugbdt/tree.hpp"

namespace ugbdt {

enum class LossKind { normal_nll, logistic };

struct LossSpec {
    LossKind kind = LossKind::normal_nll;

    std::size_t d_out() const { return kind == LossKind::normal_nll ? 2 : 1; }

    // regression <-> normal_nll, binary_classification <-> logistic
    static LossSpec for_task(Task task) {
        return {task == Task::regression ? LossKind::normal_nll : LossKind::logistic};
    }
};

// Guard for sigma = exp(log_sigma): applied when converting raw scores to a
// distribution and when evaluating gradients during training.
struct LogSigmaBounds {
    double lo = -15.0;
    double hi = 15.0;

    double clamp(double log_sigma) const {
        return log_sigma < lo ? lo : (log_sigma > hi ? hi : log_sigma);
    }
};

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& s);

enum class TrainMode { sgb, sglb };

const char* to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
    TrainMode mode = TrainMode::sgb;
    std::size_t iterations = 1000; // T
    double epsilon = 0.1;
    double sample_rate = 0.5; // sgb only; sglb trains on every row
    double beta = 0.0;        // sglb inverse diffusion temperature; 0 resolves to n
    double gamma = -1.0;      // sglb shrinkage; negative resolves to 1/(2n)
    std::uint64_t seed = 0;
    TreeParams tree{.max_depth = 6, .min_rows_per_leaf = 1, .max_bins = 255};
    LogSigmaBounds log_sigma;

    // Fills the data-size-dependent sglb defaults beta = n, gamma = 1/(2n).
    TrainConfig resolved(std::size_t n) const;

    // Requires resolved values. sgb: 0 < sample_rate <= 1, gamma = 0.
    // sglb: sample_rate = 1, beta > 0, 0 <= gamma*epsilon < 1 (gamma = 0 is
    // the no-shrinkage degenerate limit).
    void validate() const;
};

// Natural (Fisher-preconditioned) gradient of the Normal negative
// log-likelihood in (mu, log sigma): (mu - y, 1/2 - ((y - mu)/sigma)^2 / 2).
std::array<double, 2> natural_gradient_normal(std::array<double, 2> pred, double y);

// Ordinary gradient of the same loss: ((mu - y)/sigma^2, 1 - ((y-mu)/sigma)^2).
// The natural gradient equals diag(sigma^2, 1/2) times this.
std::array<double, 2> ordinary_gradient_normal(std::array<double, 2> pred, double y);

double sigmoid(double x);

// d/df of the logistic loss at logit f: p - y with p = sigmoid(f).
double gradient_logistic(double logit, double y);

struct Distribution {
    LossKind kind = LossKind::normal_nll;
    double mu = 0.0;
    double sigma = 1.0; // normal_nll
    double p = 0.5;     // logistic
};

double nll_normal(double mu, double sigma, double y);
double nll_bernoulli(double p, double y); // clamps p to [1e-12, 1 - 1e-12]
double nll(const Distribution& dist, double y);

// A single boosted model: F(x) = f0·(1-γε)^T + Σ_i ε·(1-γε)^(T-i)·tree_i(x).
// With γ=0 this is the plain additive ensemble f0 + ε·Σ tree_i(x).
struct GBMModel {
    LossSpec loss;
    TrainMode mode = TrainMode::sgb;
    std::vector<DecisionTree> trees;
    double epsilon = 0.1;
    double gamma = 0.0;
    std::vector<double> f0;
    LogSigmaBounds log_sigma;
    std::size_t input_width = 0;

    // Derived weights; call rebuild_weights() after deserialization or after
    // mutating trees/epsilon/gamma.
    std::vector<double> tree_weights; // tree i (0-based): ε·(1-γε)^(T-1-i)
    double f0_scale = 1.0;            // (1-γε)^T

    std::size_t iterations() const { return trees.size(); }
    void rebuild_weights();

    void predict_raw_into(std::span<const double> row, double* out) const;
    std::vector<double> predict_raw(std::span<const double> row) const;

    // Raw predictions of every truncated model F^(t), t in `checkpoints`
    // (strictly ascending, each in [0, T]), from one pass over the trees.
    // The entry for t = T is bit-identical to predict_raw.
    std::vector<double> predict_raw_at(std::span<const double> row,
                                       std::span<const std::size_t> checkpoints) const;

    Distribution distribution_from_raw(const double* raw) const;
    Distribution predict_distribution(std::span<const double> row) const;
};

// Optional per-iteration observer: (iteration t, rows the tree was fit on,
// cached raw predictions for all n rows, row-major n×d_out).
using IterationHook = std::function<void(std::size_t, std::span<const std::uint32_t>,
                                         std::span<const double>)>;

// SGB: per-iteration uniform subsample without replacement of
// ceil(sample_rate·n) rows, plain additive update.
// SGLB: Gaussian noise N(0, 2/(βε)) added independently to every per-row
// negative-gradient component, trees fit on all rows, update
// F^(t) = (1-γε)·F^(t-1) + ε·h^(t).
// Per-iteration randomness comes from the stream seed XOR mix64(t).
GBMModel train(const EncodedMatrix& X, std::span<const double> y, const TrainConfig& config,
               LossSpec loss, const IterationHook& hook = {});

} // namespace ugbdt
