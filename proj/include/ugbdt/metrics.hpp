#pragma once

#include <span>
#include <vector>

#include "ugbdt/data.hpp"
#include "ugbdt/ensemble.hpp"

namespace ugbdt {

double rmse(std::span<const double> predictions, std::span<const double> targets);

// Mean of 1{(p >= 0.5) != y}: the tie p = 0.5 predicts class 1.
double error_rate(std::span<const double> probabilities, std::span<const double> labels);

// Mann–Whitney AUC: (#{score_pos > score_neg} + #ties/2) / (n_pos * n_neg),
// computed with midranks. Exact for integer pair counts.
double auc_roc(std::span<const double> scores, std::span<const double> labels);

// Mean retained error after rejecting the j highest-uncertainty points
// (ties by ascending index), on the grid r_j = j/n. The empty retained set at
// r = 1 scores 0.
struct RejectionCurve {
    std::vector<double> fractions;
    std::vector<double> retained_error;

    double area() const; // trapezoidal over [0, 1]
};

RejectionCurve rejection_curve(std::span<const double> uncertainties,
                               std::span<const double> errors);

// Prediction-rejection ratio in percent: 100 when rejecting by uncertainty
// matches rejecting by true error, 0 for the constant-mean(e) baseline.
// All-equal errors return 0 by convention.
double prr(std::span<const double> uncertainties, std::span<const double> errors);

struct EvalReport {
    Task task = Task::regression;
    std::size_t rows = 0;
    double nll = 0.0;
    double rmse = 0.0;       // regression
    double error_rate = 0.0; // classification
};

// Test-set quality of the ensemble's predictive posterior. Classification
// scores the mean member probability; regression scores the mixture density
// -log[(1/M) Σ N(y | μ_m, σ_m)] via log-sum-exp, and RMSE of the mean μ.
EvalReport evaluate_split(const Ensemble& ensemble, const EncodedMatrix& X,
                          std::span<const double> y);

} // namespace ugbdt
