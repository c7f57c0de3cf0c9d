#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ugbdt/errors.hpp"

namespace ugbdt {

enum class ColumnKind { numeric, categorical, target, ignored };
enum class Task { regression, binary_classification };

const char* to_string(ColumnKind kind);
const char* to_string(Task task);
ColumnKind column_kind_from_string(const std::string& s);
Task task_from_string(const std::string& s);

struct SchemaColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;

    bool operator==(const SchemaColumn&) const = default;
};

// Column layout plus task. Supplied as a sidecar text file next to each CSV:
//   task=regression
//   column=x1:categorical
//   column=y:target
struct Schema {
    Task task = Task::regression;
    std::vector<SchemaColumn> columns;

    bool operator==(const Schema&) const = default;

    // Throws ValidationError unless there is exactly one target column and at
    // least one numeric or categorical feature column.
    void validate() const;

    std::size_t target_index() const;

    static Schema load(const std::string& path);
    void save(const std::string& path) const;
};

// Column-major table. Numeric and target columns live in `numeric`,
// categorical and ignored columns in `strings`; the unused side of each pair
// stays empty. Immutable by convention once filled.
struct Dataset {
    Schema schema;
    std::vector<std::vector<double>> numeric;
    std::vector<std::vector<std::string>> strings;
    std::size_t n = 0;

    const std::vector<double>& targets() const { return numeric[schema.target_index()]; }
    std::vector<double>& targets() { return numeric[schema.target_index()]; }

    // Allocates per-column storage for `rows` rows matching `schema`.
    static Dataset with_capacity(Schema schema, std::size_t rows);
};

Dataset load_csv(const std::string& path, const Schema& schema);
void save_csv(const Dataset& dataset, const std::string& path);

// Per-column summary of a dataset: mean/variance for numeric columns and the
// sorted distinct-value set for categorical ones. Captured from the training
// split and persisted with models so OOD pools can be normalized later.
struct ColumnStats {
    struct Entry {
        double mean = 0.0;
        double variance = 0.0; // population variance
        std::vector<std::string> categories;
    };
    std::vector<Entry> columns; // parallel to schema.columns

    static ColumnStats compute(const Dataset& dataset);
};

enum class EncodeMode { one_hot, target_mean };

struct CategoryStat {
    double sum = 0.0;
    std::size_t count = 0;
};

struct ColumnEncoder {
    std::size_t source_column = 0;
    EncodeMode mode = EncodeMode::one_hot;
    std::vector<std::string> vocabulary;            // one_hot: sorted category list
    std::map<std::string, CategoryStat> stats;      // target_mean: per-category sums
    double prior = 0.0;                             // target_mean: global target mean
    double smoothing = 1.0;

    double target_mean_value(const std::string& category) const;
};

struct Encoder {
    Schema schema; // schema the encoder was fitted on
    std::vector<ColumnEncoder> categorical;

    std::size_t encoded_width() const;
};

struct EncodedMatrix {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> values;              // row-major n×p
    std::vector<std::size_t> column_origin;  // encoded column -> schema column
    std::vector<std::string> column_names;   // e.g. "x1", "x2=3"

    double at(std::size_t row, std::size_t col) const { return values[row * p + col]; }
    const double* row(std::size_t r) const { return values.data() + r * p; }
};

Encoder fit_encoder(const Dataset& dataset, std::size_t one_hot_max_cardinality = 16,
                    double smoothing = 1.0);

EncodedMatrix encode(const Dataset& dataset, const Encoder& encoder);

struct SplitFractions {
    double train = 0.65;
    double valid = 0.15;
    double test = 0.20;
};

struct DatasetSplit {
    Dataset train;
    Dataset valid;
    Dataset test;
};

// Disjoint partition by a seeded uniform shuffle. Validation and test sizes
// are floor(fraction·n); the remainder goes to train. Row order within each
// part follows the original dataset.
DatasetSplit split_dataset(const Dataset& dataset, SplitFractions fractions, std::uint64_t seed);

// Row subset in the given index order.
Dataset take_rows(const Dataset& dataset, const std::vector<std::size_t>& indices);

} // namespace ugbdt
