#include "ugbdt/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ugbdt/rng.hpp"
#include "ugbdt/text.hpp"

namespace ugbdt {

const char* to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::categorical: return "categorical";
        case ColumnKind::target: return "target";
        case ColumnKind::ignored: return "ignored";
    }
    return "numeric";
}

const char* to_string(Task task) {
    return task == Task::regression ? "regression" : "binary_classification";
}

ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::numeric;
    if (s == "categorical") return ColumnKind::categorical;
    if (s == "target") return ColumnKind::target;
    if (s == "ignored") return ColumnKind::ignored;
    throw ValidationError("unknown column kind '" + s + "'");
}

Task task_from_string(const std::string& s) {
    if (s == "regression") return Task::regression;
    if (s == "binary_classification") return Task::binary_classification;
    throw ValidationError("unknown task '" + s + "'");
}

void Schema::validate() const {
    std::size_t targets = 0;
    std::size_t features = 0;
    for (const auto& col : columns) {
        if (col.kind == ColumnKind::target) ++targets;
        if (col.kind == ColumnKind::numeric || col.kind == ColumnKind::categorical) ++features;
    }
    if (targets != 1) {
        throw ValidationError("schema must have exactly one target column, found " +
                              std::to_string(targets));
    }
    if (features == 0) {
        throw ValidationError("schema must have at least one feature column");
    }
}

std::size_t Schema::target_index() const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].kind == ColumnKind::target) return i;
    }
    throw ValidationError("schema has no target column");
}

Schema Schema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file '" + path + "'");
    Schema schema;
    bool saw_task = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (key == "task") {
            schema.task = task_from_string(std::string(value));
            saw_task = true;
        } else if (key == "column") {
            const auto colon = value.rfind(':');
            if (colon == std::string_view::npos) {
                throw DataError(path + ":" + std::to_string(line_no) +
                                ": expected column=name:kind");
            }
            SchemaColumn col;
            col.name = std::string(trim(value.substr(0, colon)));
            col.kind = column_kind_from_string(std::string(trim(value.substr(colon + 1))));
            schema.columns.push_back(std::move(col));
        } else {
            throw DataError(path + ":" + std::to_string(line_no) + ": unknown key '" +
                            std::string(key) + "'");
        }
    }
    if (!saw_task) throw DataError(path + ": missing task=... line");
    schema.validate();
    return schema;
}

void Schema::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write schema file '" + path + "'");
    out << "task=" << to_string(task) << "\n";
    for (const auto& col : columns) {
        out << "column=" << col.name << ":" << to_string(col.kind) << "\n";
    }
}

Dataset Dataset::with_capacity(Schema schema, std::size_t rows) {
    Dataset d;
    d.schema = std::move(schema);
    d.numeric.resize(d.schema.columns.size());
    d.strings.resize(d.schema.columns.size());
    for (std::size_t c = 0; c < d.schema.columns.size(); ++c) {
        const auto kind = d.schema.columns[c].kind;
        if (kind == ColumnKind::numeric || kind == ColumnKind::target) {
            d.numeric[c].reserve(rows);
        } else {
            d.strings[c].reserve(rows);
        }
    }
    return d;
}

namespace {

bool is_numeric_cell(ColumnKind kind) {
    return kind == ColumnKind::numeric || kind == ColumnKind::target;
}

std::string cell_location(const std::string& path, std::size_t line_no, const std::string& col) {
    return path + ":" + std::to_string(line_no) + ": column '" + col + "'";
}

} // namespace

Dataset load_csv(const std::string& path, const Schema& schema) {
    schema.validate();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file, expected header row");
    const auto header = split(trim(line), ',');
    if (header.size() != schema.columns.size()) {
        throw DataError(path + ": header has " + std::to_string(header.size()) +
                        " columns, schema expects " + std::to_string(schema.columns.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (trim(header[c]) != schema.columns[c].name) {
            throw DataError(path + ": header column " + std::to_string(c + 1) + " is '" +
                            std::string(trim(header[c])) + "', schema expects '" +
                            schema.columns[c].name + "'");
        }
    }

    Dataset dataset = Dataset::with_capacity(schema, 0);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row_text = trim(line);
        if (row_text.empty()) continue;
        const auto cells = split(row_text, ',');
        if (cells.size() != schema.columns.size()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": row has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(schema.columns.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto cell = trim(cells[c]);
            const auto& col = schema.columns[c];
            if (cell.empty()) {
                throw DataError(cell_location(path, line_no, col.name) + ": missing value");
            }
            if (is_numeric_cell(col.kind)) {
                double value = 0.0;
                if (!try_parse_double(cell, value) || !std::isfinite(value)) {
                    throw DataError(cell_location(path, line_no, col.name) +
                                    ": cannot parse '" + std::string(cell) +
                                    "' as a finite number");
                }
                dataset.numeric[c].push_back(value);
            } else {
                dataset.strings[c].emplace_back(cell);
            }
        }
        ++dataset.n;
    }
    return dataset;
}

void save_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write data file '" + path + "'");
    const auto& cols = dataset.schema.columns;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out << ',';
        out << cols[c].name;
    }
    out << '\n';
    for (std::size_t r = 0; r < dataset.n; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out << ',';
            if (is_numeric_cell(cols[c].kind)) {
                out << format_double(dataset.numeric[c][r]);
            } else {
                out << dataset.strings[c][r];
            }
        }
        out << '\n';
    }
}

ColumnStats ColumnStats::compute(const Dataset& dataset) {
    if (dataset.n == 0) throw DataError("cannot compute column stats of an empty dataset");
    ColumnStats stats;
    stats.columns.resize(dataset.schema.columns.size());
    for (std::size_t c = 0; c < dataset.schema.columns.size(); ++c) {
        const auto kind = dataset.schema.columns[c].kind;
        auto& entry = stats.columns[c];
        if (kind == ColumnKind::numeric || kind == ColumnKind::target) {
            const auto& vals = dataset.numeric[c];
            const double mean =
                std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(dataset.n);
            double ss = 0.0;
            for (const double v : vals) ss += (v - mean) * (v - mean);
            entry.mean = mean;
            entry.variance = ss / static_cast<double>(dataset.n);
        } else if (kind == ColumnKind::categorical) {
            std::set<std::string> distinct(dataset.strings[c].begin(), dataset.strings[c].end());
            entry.categories.assign(distinct.begin(), distinct.end());
        }
    }
    return stats;
}

double ColumnEncoder::target_mean_value(const std::string& category) const {
    const auto it = stats.find(category);
    if (it == stats.end()) return prior;
    return (it->second.sum + smoothing * prior) /
           (static_cast<double>(it->second.count) + smoothing);
}

std::size_t Encoder::encoded_width() const {
    std::size_t width = 0;
    std::size_t cat = 0;
    for (const auto& col : schema.columns) {
        if (col.kind == ColumnKind::numeric) {
            ++width;
        } else if (col.kind == ColumnKind::categorical) {
            const auto& enc = categorical[cat++];
            width += enc.mode == EncodeMode::one_hot ? enc.vocabulary.size() : 1;
        }
    }
    return width;
}

Encoder fit_encoder(const Dataset& dataset, std::size_t one_hot_max_cardinality,
                    double smoothing) {
    if (dataset.n == 0) throw DataError("cannot fit encoder on an empty dataset");
    Encoder encoder;
    encoder.schema = dataset.schema;
    const auto& y = dataset.targets();
    const double prior =
        std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(dataset.n);

    for (std::size_t c = 0; c < dataset.schema.columns.size(); ++c) {
        if (dataset.schema.columns[c].kind != ColumnKind::categorical) continue;
        ColumnEncoder enc;
        enc.source_column = c;
        enc.prior = prior;
        enc.smoothing = smoothing;
        std::map<std::string, CategoryStat> stats;
        for (std::size_t r = 0; r < dataset.n; ++r) {
            auto& s = stats[dataset.strings[c][r]];
            s.sum += y[r];
            s.count += 1;
        }
        if (stats.size() <= one_hot_max_cardinality) {
            enc.mode = EncodeMode::one_hot;
            enc.vocabulary.reserve(stats.size());
            for (const auto& [category, _] : stats) enc.vocabulary.push_back(category);
        } else {
            enc.mode = EncodeMode::target_mean;
            enc.stats = std::move(stats);
        }
        encoder.categorical.push_back(std::move(enc));
    }
    return encoder;
}

EncodedMatrix encode(const Dataset& dataset, const Encoder& encoder) {
    if (dataset.schema != encoder.schema) {
        throw ValidationError("dataset schema does not match the encoder's schema");
    }
    EncodedMatrix m;
    m.n = dataset.n;
    m.p = encoder.encoded_width();
    m.values.assign(m.n * m.p, 0.0);
    m.column_origin.reserve(m.p);
    m.column_names.reserve(m.p);

    // Column layout: schema order, one-hot columns expanded in vocabulary order.
    struct Writer {
        std::size_t source = 0;
        std::size_t first = 0; // first encoded column
        const ColumnEncoder* enc = nullptr; // null for numeric
    };
    std::vector<Writer> writers;
    std::size_t next = 0;
    std::size_t cat = 0;
    for (std::size_t c = 0; c < dataset.schema.columns.size(); ++c) {
        const auto& col = dataset.schema.columns[c];
        if (col.kind == ColumnKind::numeric) {
            writers.push_back({c, next, nullptr});
            m.column_origin.push_back(c);
            m.column_names.push_back(col.name);
            ++next;
        } else if (col.kind == ColumnKind::categorical) {
            const auto& enc = encoder.categorical[cat++];
            writers.push_back({c, next, &enc});
            if (enc.mode == EncodeMode::one_hot) {
                for (const auto& category : enc.vocabulary) {
                    m.column_origin.push_back(c);
                    m.column_names.push_back(col.name + "=" + category);
                    ++next;
                }
            } else {
                m.column_origin.push_back(c);
                m.column_names.push_back(col.name);
                ++next;
            }
        }
    }

    for (std::size_t r = 0; r < m.n; ++r) {
        double* row = m.values.data() + r * m.p;
        for (const auto& w : writers) {
            if (!w.enc) {
                row[w.first] = dataset.numeric[w.source][r];
            } else if (w.enc->mode == EncodeMode::one_hot) {
                const auto& value = dataset.strings[w.source][r];
                const auto it = std::lower_bound(w.enc->vocabulary.begin(),
                                                 w.enc->vocabulary.end(), value);
                if (it != w.enc->vocabulary.end() && *it == value) {
                    row[w.first + static_cast<std::size_t>(it - w.enc->vocabulary.begin())] = 1.0;
                }
                // unseen category: indicator block stays all zero
            } else {
                row[w.first] = w.enc->target_mean_value(dataset.strings[w.source][r]);
            }
        }
    }
    return m;
}

Dataset take_rows(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    Dataset out = Dataset::with_capacity(dataset.schema, indices.size());
    out.n = indices.size();
    for (std::size_t c = 0; c < dataset.schema.columns.size(); ++c) {
        if (!dataset.numeric[c].empty()) {
            for (const auto r : indices) out.numeric[c].push_back(dataset.numeric[c][r]);
        }
        if (!dataset.strings[c].empty()) {
            for (const auto r : indices) out.strings[c].push_back(dataset.strings[c][r]);
        }
    }
    return out;
}

DatasetSplit split_dataset(const Dataset& dataset, SplitFractions fractions, std::uint64_t seed) {
    if (fractions.train <= 0.0 || fractions.valid <= 0.0 || fractions.test <= 0.0) {
        throw ValidationError("split fractions must be positive");
    }
    const double sum = fractions.train + fractions.valid + fractions.test;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("split fractions must sum to 1, got " + format_double(sum));
    }
    if (dataset.n < 3) {
        throw DataError("need at least 3 rows to split, got " + std::to_string(dataset.n));
    }

    const auto n_valid = static_cast<std::size_t>(fractions.valid * static_cast<double>(dataset.n));
    const auto n_test = static_cast<std::size_t>(fractions.test * static_cast<double>(dataset.n));
    const std::size_t n_train = dataset.n - n_valid - n_test;

    std::vector<std::size_t> order(dataset.n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    auto sorted_slice = [&](std::size_t begin, std::size_t count) {
        std::vector<std::size_t> part(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                      order.begin() + static_cast<std::ptrdiff_t>(begin + count));
        std::sort(part.begin(), part.end());
        return part;
    };

    DatasetSplit split;
    split.train = take_rows(dataset, sorted_slice(0, n_train));
    split.valid = take_rows(dataset, sorted_slice(n_train, n_valid));
    split.test = take_rows(dataset, sorted_slice(n_train + n_valid, n_test));
    return split;
}

} // namespace ugbdt
