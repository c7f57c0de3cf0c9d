#include "ugbdt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ugbdt/errors.hpp"

namespace ugbdt {

double rmse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.empty() || predictions.size() != targets.size()) {
        throw ValidationError("rmse needs equal-length nonempty inputs");
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(predictions.size()));
}

double error_rate(std::span<const double> probabilities, std::span<const double> labels) {
    if (probabilities.empty() || probabilities.size() != labels.size()) {
        throw ValidationError("error_rate needs equal-length nonempty inputs");
    }
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double predicted = probabilities[i] >= 0.5 ? 1.0 : 0.0;
        if (predicted != labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(probabilities.size());
}

double auc_roc(std::span<const double> scores, std::span<const double> labels) {
    if (scores.empty() || scores.size() != labels.size()) {
        throw ValidationError("auc_roc needs equal-length nonempty inputs");
    }
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0.0 && labels[i] != 1.0) {
            throw DataError("auc_roc labels must be 0 or 1");
        }
        if (labels[i] == 1.0) ++n_pos;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("auc_roc needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks: tied scores share the average of their rank range, so the
    // rank-sum statistic counts each cross-class tie as half a win.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1.0) pos_rank_sum += midrank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double RejectionCurve::area() const {
    double area = 0.0;
    for (std::size_t j = 0; j + 1 < fractions.size(); ++j) {
        area += (retained_error[j] + retained_error[j + 1]) / 2.0 *
                (fractions[j + 1] - fractions[j]);
    }
    return area;
}

RejectionCurve rejection_curve(std::span<const double> uncertainties,
                               std::span<const double> errors) {
    if (uncertainties.size() != errors.size()) {
        throw ValidationError("rejection curve needs equal-length inputs");
    }
    const std::size_t n = uncertainties.size();
    if (n < 2) throw ValidationError("rejection curve needs at least 2 points");
    for (const double e : errors) {
        if (!(e >= 0.0)) throw ValidationError("errors must be nonnegative");
    }

    // Rejection order: highest uncertainty first, ties by ascending index.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return uncertainties[a] > uncertainties[b];
    });

    RejectionCurve curve;
    curve.fractions.resize(n + 1);
    curve.retained_error.resize(n + 1);
    double remaining = std::accumulate(errors.begin(), errors.end(), 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
        curve.fractions[j] = static_cast<double>(j) / static_cast<double>(n);
        curve.retained_error[j] =
            j == n ? 0.0 : remaining / static_cast<double>(n - j);
        if (j < n) remaining -= errors[order[j]];
    }
    return curve;
}

double prr(std::span<const double> uncertainties, std::span<const double> errors) {
    const auto by_uncertainty = rejection_curve(uncertainties, errors);
    // With all errors equal the oracle and random baselines coincide and the
    // ratio is undefined; every ranking is equally good, so report 0.
    const bool all_equal = std::all_of(errors.begin(), errors.end(),
                                       [&](double e) { return e == errors.front(); });
    if (all_equal) return 0.0;

    const auto by_error = rejection_curve(errors, errors);
    const double mean_error =
        std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());

    // The random baseline retains mean(e) at every fraction below 1 and shares
    // the empty-set convention at r=1, so a random ranking scores 0 on average.
    RejectionCurve random_baseline;
    random_baseline.fractions = by_error.fractions;
    random_baseline.retained_error.assign(errors.size(), mean_error);
    random_baseline.retained_error.push_back(0.0);

    const double ar_uncertainty = by_uncertainty.area();
    const double ar_oracle = by_error.area();
    const double ar_random = random_baseline.area();
    if (ar_random == ar_oracle) return 0.0;
    return 100.0 * (ar_random - ar_uncertainty) / (ar_random - ar_oracle);
}

EvalReport evaluate_split(const Ensemble& ensemble, const EncodedMatrix& X,
                          std::span<const double> y) {
    if (X.n != y.size()) throw DataError("evaluation targets do not match matrix rows");
    if (X.n == 0) throw DataError("evaluation needs at least one row");

    EvalReport report;
    report.rows = X.n;
    report.task = ensemble.loss.kind == LossKind::normal_nll ? Task::regression
                                                             : Task::binary_classification;

    double nll_sum = 0.0;
    if (report.task == Task::binary_classification) {
        std::size_t wrong = 0;
        for (std::size_t r = 0; r < X.n; ++r) {
            if (y[r] != 0.0 && y[r] != 1.0) {
                throw DataError("classification targets must be 0 or 1");
            }
            const double p = ensemble.predictive_posterior_class(
                std::span<const double>(X.row(r), X.p));
            nll_sum += nll_bernoulli(p, y[r]);
            const double predicted = p >= 0.5 ? 1.0 : 0.0;
            if (predicted != y[r]) ++wrong;
        }
        report.error_rate = static_cast<double>(wrong) / static_cast<double>(X.n);
    } else {
        double ss = 0.0;
        std::vector<double> log_pdfs;
        for (std::size_t r = 0; r < X.n; ++r) {
            const auto members =
                ensemble.member_predictions(std::span<const double>(X.row(r), X.p));
            log_pdfs.clear();
            double mean_mu = 0.0;
            for (const auto& dist : members) {
                log_pdfs.push_back(-nll_normal(dist.mu, dist.sigma, y[r]));
                mean_mu += dist.mu;
            }
            mean_mu /= static_cast<double>(members.size());

            const double max_lp = *std::max_element(log_pdfs.begin(), log_pdfs.end());
            double acc = 0.0;
            for (const double lp : log_pdfs) acc += std::exp(lp - max_lp);
            const double mixture_log_pdf =
                max_lp + std::log(acc) - std::log(static_cast<double>(log_pdfs.size()));
            nll_sum += -mixture_log_pdf;

            const double d = mean_mu - y[r];
            ss += d * d;
        }
        report.rmse = std::sqrt(ss / static_cast<double>(X.n));
    }
    report.nll = nll_sum / static_cast<double>(X.n);
    return report;
}

} // namespace ugbdt
