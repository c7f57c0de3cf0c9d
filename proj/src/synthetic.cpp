#include "ugbdt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "ugbdt/rng.hpp"
#include "ugbdt/text.hpp"

namespace ugbdt {

namespace {

// Substream ids so the a-value draws never shift the noise sequence.
constexpr std::uint64_t kHeartMeanStream = 1;
constexpr std::uint64_t kHeartNoiseStream = 2;

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace

HeartSpec::Grid HeartSpec::default_b_values() {
    Grid b{};
    for (std::size_t i = 0; i < grid_size; ++i) {
        for (std::size_t j = 0; j < grid_size; ++j) {
            b[i][j] = 0.05 + 0.70 * static_cast<double>(i + j) / 16.0;
        }
    }
    return b;
}

HeartSpec::Mask HeartSpec::default_heart_mask() {
    Mask mask{};
    const auto fill = [&](std::size_t row, std::initializer_list<std::size_t> cols) {
        for (const auto c : cols) mask[row][c] = true;
    };
    fill(1, {2, 3, 5, 6});
    fill(2, {2, 3, 4, 5, 6});
    fill(3, {3, 4, 5});
    fill(4, {3, 4});
    fill(5, {4});
    fill(6, {4});
    fill(7, {4});
    return mask;
}

std::size_t HeartSpec::masked_count() const {
    std::size_t count = 0;
    for (const auto& row : heart_mask) {
        count += static_cast<std::size_t>(std::count(row.begin(), row.end(), true));
    }
    return count;
}

void HeartSpec::validate() const {
    if (per_cell == 0) throw ValidationError("per_cell must be at least 1");
    for (const auto& row : b_values) {
        for (const auto b : row) {
            if (!std::isfinite(b) || b < 0.0) {
                throw ValidationError("b_values must be finite and non-negative");
            }
        }
    }
    if (a_values) {
        for (const auto& row : *a_values) {
            for (const auto a : row) {
                if (!std::isfinite(a)) throw ValidationError("a_values must be finite");
            }
        }
    }
}

HeartData generate_heart(const HeartSpec& spec, std::uint64_t seed) {
    spec.validate();
    constexpr std::size_t g = HeartSpec::grid_size;

    HeartSpec::Grid a{};
    if (spec.a_values) {
        a = *spec.a_values;
    } else {
        Rng mean_rng = Rng::stream(seed, kHeartMeanStream);
        for (std::size_t i = 0; i < g; ++i) {
            for (std::size_t j = 0; j < g; ++j) a[i][j] = mean_rng.next_unit();
        }
    }

    Schema train_schema;
    train_schema.task = Task::regression;
    train_schema.columns = {{"x1", ColumnKind::categorical},
                            {"x2", ColumnKind::categorical},
                            {"y", ColumnKind::target}};

    const std::size_t unmasked = g * g - spec.masked_count();
    HeartData out;
    out.train = Dataset::with_capacity(train_schema, unmasked * spec.per_cell);

    Rng noise_rng = Rng::stream(seed, kHeartNoiseStream);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            if (spec.heart_mask[i][j]) continue;
            const double sd = std::sqrt(spec.b_values[i][j]);
            const std::string x1 = std::to_string(i);
            const std::string x2 = std::to_string(j);
            for (std::size_t r = 0; r < spec.per_cell; ++r) {
                out.train.strings[0].push_back(x1);
                out.train.strings[1].push_back(x2);
                out.train.numeric[2].push_back(a[i][j] + sd * noise_rng.next_normal());
            }
        }
    }
    out.train.n = unmasked * spec.per_cell;

    Schema eval_schema;
    eval_schema.task = Task::regression;
    eval_schema.columns = {{"x1", ColumnKind::categorical},
                           {"x2", ColumnKind::categorical},
                           {"y", ColumnKind::target},
                           {"mask", ColumnKind::ignored},
                           {"b", ColumnKind::ignored}};
    out.grid_eval = Dataset::with_capacity(eval_schema, g * g);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            out.grid_eval.strings[0].push_back(std::to_string(i));
            out.grid_eval.strings[1].push_back(std::to_string(j));
            out.grid_eval.numeric[2].push_back(a[i][j]);
            out.grid_eval.strings[3].push_back(spec.heart_mask[i][j] ? "1" : "0");
            out.grid_eval.strings[4].push_back(format_double(spec.b_values[i][j]));
        }
    }
    out.grid_eval.n = g * g;
    return out;
}

void SpiralSpec::validate() const {
    if (n_per_class == 0) throw ValidationError("n_per_class must be at least 1");
    if (!std::isfinite(noise_sd) || noise_sd < 0.0) {
        throw ValidationError("noise_sd must be finite and non-negative");
    }
    if (!std::isfinite(rotation_turns)) throw ValidationError("rotation_turns must be finite");
}

Dataset generate_spiral(const SpiralSpec& spec, std::uint64_t seed) {
    spec.validate();

    Schema schema;
    schema.task = Task::binary_classification;
    schema.columns = {{"x1", ColumnKind::numeric}, {"x2", ColumnKind::numeric}};
    if (spec.derived_features) {
        schema.columns.push_back({"rot1", ColumnKind::numeric});
        schema.columns.push_back({"rot2", ColumnKind::numeric});
        schema.columns.push_back({"radius", ColumnKind::numeric});
    }
    schema.columns.push_back({"label", ColumnKind::target});

    const std::size_t n = SpiralSpec::classes * spec.n_per_class;
    Dataset out = Dataset::with_capacity(schema, n);
    const std::size_t target = schema.columns.size() - 1;

    constexpr double cos45 = std::numbers::sqrt2 / 2.0;
    constexpr double sin45 = cos45;
    const double t_step = spec.n_per_class > 1 ? static_cast<double>(spec.n_per_class - 1) : 1.0;

    Rng rng(seed);
    for (std::size_t k = 0; k < SpiralSpec::classes; ++k) {
        const double arm_offset = 2.0 * std::numbers::pi * static_cast<double>(k) / 3.0;
        for (std::size_t i = 0; i < spec.n_per_class; ++i) {
            const double t = static_cast<double>(i) / t_step;
            const double phi = 2.0 * std::numbers::pi * spec.rotation_turns * t + arm_offset;
            const double x = t * std::cos(phi) + spec.noise_sd * rng.next_normal();
            const double y = t * std::sin(phi) + spec.noise_sd * rng.next_normal();
            out.numeric[0].push_back(x);
            out.numeric[1].push_back(y);
            if (spec.derived_features) {
                out.numeric[2].push_back(x * cos45 + y * sin45);
                out.numeric[3].push_back(-x * sin45 + y * cos45);
                out.numeric[4].push_back(std::sqrt(x * x + y * y));
            }
            out.numeric[target].push_back(static_cast<double>(k));
        }
    }
    out.n = n;
    return out;
}

Dataset build_ood_set(const OodSpec& spec) {
    spec.in_domain_schema.validate();
    const auto& columns = spec.in_domain_schema.columns;
    if (spec.in_domain_stats.columns.size() != columns.size()) {
        throw ValidationError("in-domain stats do not match the in-domain schema");
    }
    if (spec.size == 0) throw ValidationError("ood set size must be at least 1");
    if (spec.source.n < spec.size) {
        throw DataError("ood pool has " + std::to_string(spec.source.n) + " rows but " +
                        std::to_string(spec.size) + " are requested");
    }

    // Numeric in-domain features pull from the source's numeric features in
    // order; categorical content is redrawn, so the source side is ignored.
    std::vector<std::size_t> source_numeric;
    for (std::size_t c = 0; c < spec.source.schema.columns.size(); ++c) {
        if (spec.source.schema.columns[c].kind == ColumnKind::numeric) {
            source_numeric.push_back(c);
        }
    }

    Rng rng(spec.seed);
    const auto indices = sample_without_replacement(rng, spec.source.n, spec.size);

    Dataset out = Dataset::with_capacity(spec.in_domain_schema, spec.size);
    std::size_t next_source = 0;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto& stats = spec.in_domain_stats.columns[c];
        switch (columns[c].kind) {
        case ColumnKind::numeric: {
            if (next_source >= source_numeric.size()) {
                throw DataError("ood pool lacks a numeric column for '" + columns[c].name + "'");
            }
            if (!(stats.variance > 0.0)) {
                throw ValidationError("in-domain column '" + columns[c].name +
                                      "' has zero variance");
            }
            const auto& pool = spec.source.numeric[source_numeric[next_source++]];
            const double sd = std::sqrt(stats.variance);
            for (const auto row : indices) {
                out.numeric[c].push_back((pool[row] - stats.mean) / sd);
            }
            break;
        }
        case ColumnKind::categorical: {
            if (stats.categories.empty()) {
                throw ValidationError("in-domain column '" + columns[c].name +
                                      "' has no categories");
            }
            for (std::size_t r = 0; r < spec.size; ++r) {
                const auto pick = static_cast<std::size_t>(rng.next_below(stats.categories.size()));
                out.strings[c].push_back(stats.categories[pick]);
            }
            break;
        }
        case ColumnKind::target:
            out.numeric[c].assign(spec.size, 0.0);
            break;
        case ColumnKind::ignored:
            out.strings[c].assign(spec.size, "");
            break;
        }
    }
    out.n = spec.size;
    return out;
}

} // namespace ugbdt
