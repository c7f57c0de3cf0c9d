#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "ugbdt/metrics.hpp"
#include "ugbdt/rng.hpp"

using namespace ugbdt;

namespace {

// O(n^2) pair counting with explicit half-credit for ties.
double auc_pair_oracle(std::span<const double> scores, std::span<const double> labels) {
    double wins = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1.0) continue;
        ++n_pos;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0.0) continue;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (labels[j] == 0.0) ++n_neg;
    }
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

} // namespace

TEST_CASE("rmse") {
    CHECK(rmse(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}) == 0.0);
    CHECK(rmse(std::vector<double>{0.0}, std::vector<double>{3.0}) == 3.0);
    CHECK(rmse(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, -1.0}) == 1.0);
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST_CASE("error rate with the p = 0.5 tie predicting class 1") {
    CHECK(error_rate(std::vector<double>{0.9, 0.1}, std::vector<double>{1.0, 0.0}) == 0.0);
    CHECK(error_rate(std::vector<double>{0.5, 0.5}, std::vector<double>{0.0, 0.0}) == 1.0);
    CHECK(error_rate(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 1.0}) == 0.0);
    CHECK(error_rate(std::vector<double>{0.9, 0.2, 0.6}, std::vector<double>{1.0, 1.0, 0.0}) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("auc_roc reference points") {
    CHECK(auc_roc(std::vector<double>{0.1, 0.2, 0.8, 0.9},
                  std::vector<double>{0.0, 0.0, 1.0, 1.0}) == 1.0);
    CHECK(auc_roc(std::vector<double>{0.4, 0.4, 0.4, 0.4},
                  std::vector<double>{0.0, 1.0, 0.0, 1.0}) == 0.5);
    CHECK(auc_roc(std::vector<double>{0.1, 0.4, 0.35, 0.8},
                  std::vector<double>{0.0, 0.0, 1.0, 1.0}) == 0.75);
    CHECK_THROWS_AS(auc_roc(std::vector<double>{0.1, 0.2}, std::vector<double>{1.0, 1.0}),
                    DataError);
}

TEST_CASE("auc_roc equals the pair-counting oracle bit for bit") {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.next_below(199));
        std::vector<double> scores(n), labels(n);
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse grid forces plenty of exact ties.
            scores[i] = static_cast<double>(rng.next_below(12)) / 4.0;
            labels[i] = rng.next_unit() < 0.5 ? 0.0 : 1.0;
            (labels[i] == 1.0 ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        CHECK(auc_roc(scores, labels) == auc_pair_oracle(scores, labels));
    }
}

TEST_CASE("auc_roc rank invariances") {
    Rng rng(18);
    std::vector<double> scores(60), labels(60), transformed(60), negated(60);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = rng.next_normal();
        labels[i] = i % 3 == 0 ? 1.0 : 0.0;
        transformed[i] = std::exp(3.0 * scores[i]) + 7.0; // strictly increasing map
        negated[i] = -scores[i];
    }
    const double base = auc_roc(scores, labels);
    CHECK(auc_roc(transformed, labels) == doctest::Approx(base).epsilon(1e-12));
    // Continuous draws: no ties, so reversing scores complements the AUC.
    CHECK(auc_roc(negated, labels) == doctest::Approx(1.0 - base).epsilon(1e-12));
}

TEST_CASE("rejection curve endpoints and oracle monotonicity") {
    Rng rng(19);
    std::vector<double> errors(50);
    for (auto& e : errors) e = rng.next_unit() < 0.4 ? 1.0 : 0.0;
    const double mean_e =
        std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());

    const auto oracle = rejection_curve(errors, errors);
    CHECK(oracle.retained_error.front() == doctest::Approx(mean_e).epsilon(1e-15));
    CHECK(oracle.retained_error.back() == 0.0);
    CHECK(oracle.fractions.front() == 0.0);
    CHECK(oracle.fractions.back() == 1.0);
    for (std::size_t j = 0; j + 1 < oracle.retained_error.size(); ++j) {
        CHECK(oracle.retained_error[j + 1] <= oracle.retained_error[j] + 1e-12);
    }
}

TEST_CASE("prr endpoints") {
    Rng rng(20);
    std::vector<double> errors(80);
    for (auto& e : errors) e = rng.next_unit() < 0.3 ? 1.0 : 0.0;

    CHECK(prr(errors, errors) == 100.0);

    std::vector<double> anti(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) anti[i] = -errors[i];
    CHECK(prr(anti, errors) <= 0.0);

    const std::vector<double> flat(10, 0.25);
    std::vector<double> any_u(10);
    for (auto& u : any_u) u = rng.next_unit();
    CHECK(prr(any_u, flat) == 0.0);

    CHECK_THROWS_AS(prr(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    ValidationError);
    CHECK_THROWS_AS(prr(std::vector<double>{1.0, 2.0}, std::vector<double>{-1.0, 2.0}),
                    ValidationError);
}

TEST_CASE("prr of random rankings is centered near zero") {
    Rng rng(21);
    const std::size_t n = 100;
    std::vector<double> errors(n);
    for (auto& e : errors) e = rng.next_unit() < 0.3 ? 1.0 : 0.0;

    std::vector<double> u(n);
    std::iota(u.begin(), u.end(), 0.0);
    double total = 0.0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        rng.shuffle(u);
        total += prr(u, errors);
    }
    const double mean_prr = total / trials;
    CHECK(mean_prr >= -2.0);
    CHECK(mean_prr <= 2.0);
}

TEST_CASE("prr is invariant under strictly increasing transforms of u") {
    Rng rng(22);
    const std::size_t n = 60;
    std::vector<double> u(n), e(n), mapped(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = rng.next_normal();
        e[i] = rng.next_unit();
        mapped[i] = std::atan(u[i]) * 5.0 + 11.0;
    }
    CHECK(prr(mapped, e) == doctest::Approx(prr(u, e)).epsilon(1e-12));
}

namespace {

GBMModel constant_member(double mu, double log_sigma) {
    GBMModel m;
    m.loss = {LossKind::normal_nll};
    m.f0 = {mu, log_sigma};
    m.input_width = 1;
    m.rebuild_weights();
    return m;
}

EncodedMatrix single_feature_rows(std::size_t n) {
    EncodedMatrix m;
    m.n = n;
    m.p = 1;
    m.values.assign(n, 0.0);
    m.column_origin = {0};
    m.column_names = {"f0"};
    return m;
}

} // namespace

TEST_CASE("evaluate_split mixture NLL") {
    const auto X = single_feature_rows(1);
    const std::vector<double> y = {1.0};

    SUBCASE("one member equals the single-model NLL") {
        Ensemble one;
        one.kind = EnsembleKind::independent_sglb;
        one.loss = {LossKind::normal_nll};
        one.models.push_back(constant_member(0.3, 0.1));
        const auto report = evaluate_split(one, X, y);
        const double expected = nll_normal(0.3, std::exp(0.1), 1.0);
        CHECK(report.nll == expected);
        CHECK(report.rmse == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("duplicate members equal the single-model NLL") {
        Ensemble twin;
        twin.kind = EnsembleKind::independent_sglb;
        twin.loss = {LossKind::normal_nll};
        twin.models.push_back(constant_member(0.3, 0.1));
        twin.models.push_back(constant_member(0.3, 0.1));
        const auto report = evaluate_split(twin, X, y);
        CHECK(report.nll ==
              doctest::Approx(nll_normal(0.3, std::exp(0.1), 1.0)).epsilon(1e-12));
    }
    SUBCASE("two-member mixture, hand-evaluated") {
        Ensemble pair;
        pair.kind = EnsembleKind::independent_sglb;
        pair.loss = {LossKind::normal_nll};
        pair.models.push_back(constant_member(0.0, 0.0));
        pair.models.push_back(constant_member(2.0, 0.0));
        const auto report = evaluate_split(pair, X, y);
        // -log(1/2 (N(1|0,1) + N(1|2,1))) = 1/2 + 1/2 log(2π)
        const double expected = 0.5 + 0.5 * std::log(2.0 * std::numbers::pi);
        CHECK(report.nll == doctest::Approx(expected).epsilon(1e-12));
        CHECK(report.nll == doctest::Approx(1.4189).epsilon(1e-4));
        CHECK(report.rmse == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("evaluate_split classification path") {
    GBMModel clf;
    clf.loss = {LossKind::logistic};
    clf.f0 = {std::log(0.8 / 0.2)};
    clf.input_width = 1;
    clf.rebuild_weights();

    Ensemble ensemble;
    ensemble.kind = EnsembleKind::independent_sgb;
    ensemble.loss = {LossKind::logistic};
    ensemble.models.push_back(std::move(clf));

    const auto X = single_feature_rows(2);
    const std::vector<double> y = {1.0, 0.0};
    const auto report = evaluate_split(ensemble, X, y);
    CHECK(report.task == Task::binary_classification);
    CHECK(report.error_rate == 0.5);
    const double expected = (nll_bernoulli(0.8, 1.0) + nll_bernoulli(0.8, 0.0)) / 2.0;
    CHECK(report.nll == doctest::Approx(expected).epsilon(1e-12));

    const std::vector<double> bad = {2.0, 0.0};
    CHECK_THROWS_AS(evaluate_split(ensemble, X, bad), DataError);
}
