#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "ugbdt/data.hpp"

namespace ugbdt {

// 9x9 grid over two categorical features. Each cell (x1, x2) carries a mean
// a(x1,x2) and a noise variance b(x1,x2); targets are y ~ Normal(a, b).
// Cells inside the heart mask contribute no training rows.
struct HeartSpec {
    static constexpr std::size_t grid_size = 9;
    using Grid = std::array<std::array<double, grid_size>, grid_size>;
    using Mask = std::array<std::array<bool, grid_size>, grid_size>;

    std::optional<Grid> a_values; // drawn U[0,1] per cell when absent
    Grid b_values = default_b_values();
    Mask heart_mask = default_heart_mask();
    std::size_t per_cell = 1000;

    // Smooth gradient 0.05 + 0.70*(i+j)/16, so noise grows across the grid.
    static Grid default_b_values();
    // 17 masked cells: two lobes on rows 1-2 tapering to a point on row 7.
    static Mask default_heart_mask();

    std::size_t masked_count() const;
    // b_values must be finite and >= 0 (zero is the exact noise-free limit),
    // supplied a_values finite, per_cell >= 1.
    void validate() const;
};

struct HeartData {
    // Features x1, x2 hold the cell indices as categories; target y.
    Dataset train;
    // All 81 cells once: target y is the realized cell mean a(x1,x2); the
    // mask bit and b(x1,x2) ride along as ignored columns "mask" and "b".
    Dataset grid_eval;
};

// Noise draws come from a stream independent of the a-value draws, so
// supplying the realized a_values with the same seed reproduces the targets.
HeartData generate_heart(const HeartSpec& spec, std::uint64_t seed);

// Three spiral arms. Arm k's point at parameter t in [0,1] sits at radius t
// and angle 2*pi*rotation_turns*t + 2*pi*k/3, with Normal(0, noise_sd^2)
// jitter added to both coordinates.
struct SpiralSpec {
    static constexpr std::size_t classes = 3;

    std::size_t n_per_class = 2000;
    double noise_sd = 0.02;
    double rotation_turns = 1.75;
    bool derived_features = true; // append 45-degree rotated axes and radius

    void validate() const;
};

// Columns x1, x2 (+ rot1, rot2, radius when derived_features) and target
// label in {0, 1, 2}. Derived features are computed from the jittered point.
Dataset generate_spiral(const SpiralSpec& spec, std::uint64_t seed);

// Out-of-domain set recipe: sample `size` rows from `source` without
// replacement, normalize numeric features by the in-domain TRAINING stats,
// redraw categorical cells uniformly from the in-domain category sets, and
// rewrite the schema to the in-domain one (targets become placeholder zeros).
struct OodSpec {
    Dataset source;
    Schema in_domain_schema;
    ColumnStats in_domain_stats; // parallel to in_domain_schema.columns
    std::size_t size = 0;
    std::uint64_t seed = 0;
};

Dataset build_ood_set(const OodSpec& spec);

} // namespace ugbdt
