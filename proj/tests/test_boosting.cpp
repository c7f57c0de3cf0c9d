#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ugbdt/boosting.hpp"
#include "ugbdt/rng.hpp"

using namespace ugbdt;

namespace {

EncodedMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    EncodedMatrix m;
    m.n = rows.size();
    m.p = rows.empty() ? 0 : rows[0].size();
    for (const auto& row : rows) {
        for (const double v : row) m.values.push_back(v);
    }
    m.column_origin.resize(m.p, 0);
    for (std::size_t f = 0; f < m.p; ++f) m.column_names.push_back("f" + std::to_string(f));
    return m;
}

// y = 2*x0 - x1 + N(0, 0.1)
void make_regression(std::size_t n, std::uint64_t seed, std::vector<std::vector<double>>& rows,
                     std::vector<double>& y) {
    Rng rng(seed);
    rows.clear();
    y.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = rng.next_unit();
        const double x1 = rng.next_unit();
        rows.push_back({x0, x1});
        y.push_back(2.0 * x0 - x1 + 0.1 * rng.next_normal());
    }
}

DecisionTree unit_leaf_tree() {
    DecisionTree t;
    t.nodes.resize(1);
    t.nodes[0].value_offset = 0;
    t.leaf_values = {1.0};
    t.d_out = 1;
    t.input_width = 1;
    return t;
}

double normal_nll_of(double y, std::array<double, 2> pred, LogSigmaBounds bounds) {
    return nll_normal(pred[0], std::exp(bounds.clamp(pred[1])), y);
}

} // namespace

TEST_CASE("natural gradient of the normal loss") {
    // mu = y zeroes the location component.
    CHECK(natural_gradient_normal({3.0, 0.7}, 3.0)[0] == 0.0);
    // y = mu +/- sigma zeroes the scale component.
    const double sigma = std::exp(0.4);
    CHECK(natural_gradient_normal({1.0, 0.4}, 1.0 + sigma)[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(natural_gradient_normal({1.0, 0.4}, 1.0 - sigma)[1] == doctest::Approx(0.0).epsilon(1e-12));
    // Hand-evaluated point.
    const auto g = natural_gradient_normal({0.0, 0.0}, 2.0);
    CHECK(g[0] == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("logistic gradient") {
    CHECK(gradient_logistic(0.0, 1.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(gradient_logistic(0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(gradient_logistic(20.0, 1.0)) < 1e-6);
}

TEST_CASE("ordinary normal gradient matches finite differences; natural = diag(sigma^2, 1/2) * ordinary") {
    Rng rng(123);
    const double h = 1e-5;
    for (int i = 0; i < 200; ++i) {
        const double mu = 4.0 * rng.next_unit() - 2.0;
        const double ls = 6.0 * rng.next_unit() - 3.0;
        const double y = 4.0 * rng.next_unit() - 2.0;

        auto loss_at = [&](double m, double l) {
            return nll_normal(m, std::exp(l), y);
        };
        const double d_mu = (loss_at(mu + h, ls) - loss_at(mu - h, ls)) / (2.0 * h);
        const double d_ls = (loss_at(mu, ls + h) - loss_at(mu, ls - h)) / (2.0 * h);

        const auto ord = ordinary_gradient_normal({mu, ls}, y);
        CHECK(ord[0] == doctest::Approx(d_mu).epsilon(1e-4));
        CHECK(ord[1] == doctest::Approx(d_ls).epsilon(1e-4));

        const auto nat = natural_gradient_normal({mu, ls}, y);
        const double sigma2 = std::exp(2.0 * ls);
        CHECK(nat[0] == doctest::Approx(sigma2 * ord[0]).epsilon(1e-9));
        CHECK(nat[1] == doctest::Approx(0.5 * ord[1]).epsilon(1e-9));
    }
}

TEST_CASE("gradients reject non-finite inputs") {
    CHECK_THROWS_AS(natural_gradient_normal({std::nan(""), 0.0}, 1.0), NumericError);
    CHECK_THROWS_AS(gradient_logistic(std::nan(""), 1.0), NumericError);
}

TEST_CASE("negative log-likelihood closed forms") {
    CHECK(nll_normal(0.0, 1.0, 0.0) ==
          doctest::Approx(0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(nll_bernoulli(0.5, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(nll_bernoulli(0.5, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    const double sigma = 2.5;
    CHECK(nll_normal(1.2, sigma, 1.2) ==
          doctest::Approx(0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma)).epsilon(1e-12));
    // Clamping keeps the loss finite at p = 0 and 1.
    CHECK(std::isfinite(nll_bernoulli(0.0, 1.0)));
    CHECK(std::isfinite(nll_bernoulli(1.0, 0.0)));
}

TEST_CASE("predict_distribution maps raw scores") {
    GBMModel model;
    model.loss = {LossKind::normal_nll};
    model.f0 = {0.0, 0.0};
    model.input_width = 1;
    model.rebuild_weights();
    const auto d0 = model.predict_distribution(std::vector<double>{0.0});
    CHECK(d0.mu == 0.0);
    CHECK(d0.sigma == 1.0);

    model.f0 = {1.2, std::log(2.0)};
    const auto d1 = model.predict_distribution(std::vector<double>{0.0});
    CHECK(d1.mu == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(d1.sigma == doctest::Approx(2.0).epsilon(1e-12));

    GBMModel clf;
    clf.loss = {LossKind::logistic};
    clf.f0 = {0.0};
    clf.input_width = 1;
    clf.rebuild_weights();
    CHECK(clf.predict_distribution(std::vector<double>{0.0}).p == doctest::Approx(0.5));
}

TEST_CASE("predict_raw weighting") {
    GBMModel model;
    model.loss = {LossKind::logistic};
    model.f0 = {0.0};
    model.input_width = 1;
    model.epsilon = 0.1;

    SUBCASE("gamma = 0 sums trees") {
        model.gamma = 0.0;
        model.trees.push_back(unit_leaf_tree());
        model.trees.push_back(unit_leaf_tree());
        model.rebuild_weights();
        CHECK(model.predict_raw(std::vector<double>{0.0})[0] ==
              doctest::Approx(0.2).epsilon(1e-15));
    }
    SUBCASE("gamma*epsilon = 0.5, one tree") {
        model.gamma = 5.0;
        model.trees.push_back(unit_leaf_tree());
        model.rebuild_weights();
        CHECK(model.predict_raw(std::vector<double>{0.0})[0] ==
              doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("gamma*epsilon = 0.5, two trees") {
        model.gamma = 5.0;
        model.trees.push_back(unit_leaf_tree());
        model.trees.push_back(unit_leaf_tree());
        model.rebuild_weights();
        CHECK(model.predict_raw(std::vector<double>{0.0})[0] ==
              doctest::Approx(0.15).epsilon(1e-15));
    }
}

TEST_CASE("T=0 predicts f0 everywhere") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    make_regression(50, 9, rows, y);
    const auto X = matrix_from_rows(rows);
    TrainConfig config;
    config.iterations = 0;
    config.seed = 1;
    const auto model = train(X, y, config, {LossKind::normal_nll});
    const auto raw = model.predict_raw(std::span<const double>(X.row(0), X.p));
    CHECK(raw[0] == model.f0[0]);
    CHECK(raw[1] == model.f0[1]);
}

TEST_CASE("constant targets keep mu at the constant") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    make_regression(100, 10, rows, y);
    for (auto& v : y) v = 5.0;
    const auto X = matrix_from_rows(rows);
    TrainConfig config;
    config.mode = TrainMode::sgb;
    config.iterations = 200;
    config.epsilon = 0.1;
    config.sample_rate = 0.5;
    config.seed = 2;
    const auto model = train(X, y, config, {LossKind::normal_nll});
    for (std::size_t r = 0; r < X.n; ++r) {
        const auto raw = model.predict_raw(std::span<const double>(X.row(r), X.p));
        CHECK(std::abs(raw[0] - 5.0) <= 5.0 * 1e-3 + 1e-3);
    }
}

TEST_CASE("sglb with huge beta and gamma 0 matches sgb at sample_rate 1") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    make_regression(150, 21, rows, y);
    const auto X = matrix_from_rows(rows);

    TrainConfig sgb;
    sgb.mode = TrainMode::sgb;
    sgb.iterations = 50;
    sgb.epsilon = 0.1;
    sgb.sample_rate = 1.0;
    sgb.gamma = 0.0;
    sgb.seed = 5;
    sgb.tree.max_depth = 3;

    TrainConfig sglb = sgb;
    sglb.mode = TrainMode::sglb;
    sglb.sample_rate = 1.0;
    sglb.beta = 1e30;
    sglb.gamma = 0.0;

    const auto a = train(X, y, sgb, {LossKind::normal_nll});
    const auto b = train(X, y, sglb, {LossKind::normal_nll});
    for (std::size_t r = 0; r < X.n; ++r) {
        const auto pa = a.predict_raw(std::span<const double>(X.row(r), X.p));
        const auto pb = b.predict_raw(std::span<const double>(X.row(r), X.p));
        CHECK(std::abs(pa[0] - pb[0]) <= 1e-9);
        CHECK(std::abs(pa[1] - pb[1]) <= 1e-9);
    }
}

TEST_CASE("training NLL is non-increasing for full-sample sgb") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    make_regression(200, 33, rows, y);
    const auto X = matrix_from_rows(rows);

    TrainConfig config;
    config.mode = TrainMode::sgb;
    config.iterations = 120;
    config.epsilon = 0.1;
    config.sample_rate = 1.0;
    config.seed = 3;
    config.tree.max_depth = 3;

    std::vector<double> losses;
    const auto hook = [&](std::size_t, std::span<const std::uint32_t>,
                          std::span<const double> scores) {
        double total = 0.0;
        for (std::size_t r = 0; r < y.size(); ++r) {
            total += normal_nll_of(y[r], {scores[r * 2], scores[r * 2 + 1]}, config.log_sigma);
        }
        losses.push_back(total / static_cast<double>(y.size()));
    };
    train(X, y, config, {LossKind::normal_nll}, hook);
    REQUIRE(losses.size() == 120);
    for (std::size_t i = 0; i + 1 < losses.size(); ++i) {
        CHECK(losses[i + 1] <= losses[i] + 1e-9);
    }
}

TEST_CASE("training NLL is non-increasing for logistic loss") {
    Rng rng(44);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (std::size_t i = 0; i < 200; ++i) {
        const double x0 = rng.next_unit();
        const double x1 = rng.next_unit();
        rows.push_back({x0, x1});
        y.push_back(x0 + 0.3 * rng.next_normal() > 0.5 ? 1.0 : 0.0);
    }
    const auto X = matrix_from_rows(rows);

    TrainConfig config;
    config.mode = TrainMode::sgb;
    config.iterations = 100;
    config.epsilon = 0.1;
    config.sample_rate = 1.0;
    config.seed = 7;
    config.tree.max_depth = 3;

    std::vector<double> losses;
    const auto hook = [&](std::size_t, std::span<const std::uint32_t>,
                          std::span<const double> scores) {
        double total = 0.0;
        for (std::size_t r = 0; r < y.size(); ++r) {
            total += nll_bernoulli(sigmoid(scores[r]), y[r]);
        }
        losses.push_back(total / static_cast<double>(y.size()));
    };
    train(X, y, config, {LossKind::logistic}, hook);
    for (std::size_t i = 0; i + 1 < losses.size(); ++i) {
        CHECK(losses[i + 1] <= losses[i] + 1e-9);
    }
}

TEST_CASE("sgb subsample size is ceil(sample_rate * n) every iteration") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    make_regression(101, 55, rows, y); // odd n
    const auto X = matrix_from_rows(rows);

    for (const double rate : {0.25, 0.5, 0.77, 1.0}) {
        TrainConfig config;
        config.mode = TrainMode::sgb;
        config.iterations = 10;
        config.sample_rate = rate;
        config.seed = 8;
        const auto expected =
            static_cast<std::size_t>(std::ceil(rate * static_cast<double>(X.n)));
        const auto hook = [&](std::size_t, std::span<const std::uint32_t> fit_rows,
                              std::span<const double>) {
            CHECK(fit_rows.size() == expected);
            // Without replacement: indices strictly increase after sorting.
            for (std::size_t i = 0; i + 1 < fit_rows.size(); ++i) {
                CHECK(fit_rows[i] < fit_rows[i + 1]);
            }
        };
        train(X, y, config, {LossKind::normal_nll}, hook);
    }
}

TEST_CASE("training is deterministic in (data, config, seed)") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    make_regression(120, 66, rows, y);
    const auto X = matrix_from_rows(rows);

    TrainConfig config;
    config.mode = TrainMode::sglb;
    config.iterations = 30;
    config.epsilon = 0.1;
    config.sample_rate = 1.0;
    config.seed = 11;
    config.tree.max_depth = 4;

    const auto a = train(X, y, config, {LossKind::normal_nll});
    const auto b = train(X, y, config, {LossKind::normal_nll});
    REQUIRE(a.trees.size() == b.trees.size());
    CHECK(a.f0 == b.f0);
    for (std::size_t i = 0; i < a.trees.size(); ++i) {
        CHECK(a.trees[i].leaf_values == b.trees[i].leaf_values);
        REQUIRE(a.trees[i].nodes.size() == b.trees[i].nodes.size());
        for (std::size_t j = 0; j < a.trees[i].nodes.size(); ++j) {
            CHECK(a.trees[i].nodes[j].feature == b.trees[i].nodes[j].feature);
            CHECK(a.trees[i].nodes[j].threshold == b.trees[i].nodes[j].threshold);
        }
    }

    TrainConfig other = config;
    other.seed = 12;
    const auto c = train(X, y, other, {LossKind::normal_nll});
    bool any_diff = false;
    for (std::size_t i = 0; i < c.trees.size() && !any_diff; ++i) {
        any_diff = c.trees[i].leaf_values != a.trees[i].leaf_values;
    }
    CHECK(any_diff);
}

TEST_CASE("truncated checkpoint predictions match the rescaled partial sums") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    make_regression(80, 77, rows, y);
    const auto X = matrix_from_rows(rows);

    TrainConfig config;
    config.mode = TrainMode::sglb;
    config.iterations = 20;
    config.epsilon = 0.1;
    config.sample_rate = 1.0;
    config.seed = 13;
    config.tree.max_depth = 3;
    const auto model = train(X, y, config, {LossKind::normal_nll});
    const double rho = 1.0 - model.gamma * model.epsilon;

    const std::vector<std::size_t> checkpoints = {2, 5, 7, 20};
    for (std::size_t r = 0; r < 10; ++r) {
        const std::span<const double> row(X.row(r), X.p);
        const auto got = model.predict_raw_at(row, checkpoints);
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            const std::size_t t = checkpoints[c];
            // Oracle: truncate to t trees with weights in the t-frame.
            for (std::size_t k = 0; k < 2; ++k) {
                double expected = model.f0[k] * std::pow(rho, static_cast<double>(t));
                for (std::size_t i = 1; i <= t; ++i) {
                    const double* leaf = model.trees[i - 1].leaf_for(row.data());
                    expected += model.epsilon * std::pow(rho, static_cast<double>(t - i)) *
                                leaf[k];
                }
                CHECK(got[c * 2 + k] == doctest::Approx(expected).epsilon(1e-10));
            }
        }
        // The t = T entry is the full model, bit for bit.
        const auto full = model.predict_raw(row);
        CHECK(got[3 * 2] == full[0]);
        CHECK(got[3 * 2 + 1] == full[1]);
    }
}

TEST_CASE("config validation") {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    make_regression(10, 88, rows, y);
    const auto X = matrix_from_rows(rows);

    TrainConfig bad_rate;
    bad_rate.mode = TrainMode::sglb;
    bad_rate.sample_rate = 0.5;
    CHECK_THROWS_AS(train(X, y, bad_rate, {LossKind::normal_nll}), ValidationError);

    TrainConfig bad_gamma;
    bad_gamma.mode = TrainMode::sgb;
    bad_gamma.sample_rate = 0.5;
    bad_gamma.gamma = 0.1;
    CHECK_THROWS_AS(train(X, y, bad_gamma, {LossKind::normal_nll}), ValidationError);

    TrainConfig bad_shrink;
    bad_shrink.mode = TrainMode::sglb;
    bad_shrink.sample_rate = 1.0;
    bad_shrink.epsilon = 0.5;
    bad_shrink.gamma = 3.0; // gamma*epsilon = 1.5
    CHECK_THROWS_AS(train(X, y, bad_shrink, {LossKind::normal_nll}), ValidationError);

    std::vector<double> bad_labels = y;
    TrainConfig clf;
    clf.sample_rate = 0.5;
    CHECK_THROWS_AS(train(X, bad_labels, clf, {LossKind::logistic}), DataError);
}
