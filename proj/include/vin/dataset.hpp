#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vin {

/// Column-oriented table of named real-valued series. Row order is time order
/// and is preserved by every operation. Column data is immutable once added
/// and shared between dataset copies, so copying a dataset is cheap.
///
/// Columns can be flagged hidden: they stay in the table (and in CSV output)
/// but are excluded from model inputs and targets downstream.
class Dataset {
  public:
    Dataset() = default;

    /// Appends a column. Throws DataError on duplicate or empty names, or
    /// when the length does not match the existing row count.
    void add_column(std::string name, std::vector<double> values, bool hidden = false);

    std::size_t row_count() const { return rows_; }
    std::size_t column_count() const { return columns_.size(); }
    bool has_column(std::string_view name) const;

    /// Column values in row order. Throws DataError on unknown names.
    std::span<const double> column(std::string_view name) const;
    const std::string& name_at(std::size_t i) const { return columns_[i].name; }

    bool hidden(std::string_view name) const;
    void set_hidden(std::string_view name, bool hidden);

    std::vector<std::string> names() const;
    /// Names of all non-hidden columns, in table order.
    std::vector<std::string> visible_names() const;

    /// Subset / reorder columns by name; hidden flags carry over.
    Dataset select(std::span<const std::string> names) const;

    /// Rows [start, start+count), all columns.
    Dataset slice(std::size_t start, std::size_t count) const;

    /// Copy of the dataset with one column's values replaced.
    Dataset with_column(std::string_view name, std::vector<double> values) const;

  private:
    struct Column {
        std::string name;
        std::shared_ptr<const std::vector<double>> values;
        bool hidden = false;
    };

    std::vector<Column> columns_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::size_t rows_ = 0;

    const Column& find(std::string_view name) const;
};

/// Strict CSV reader: one header row of unique names, comma separation,
/// '.' decimal point, every cell a finite real. Parse errors report
/// row and column (1-based).
Dataset load_csv(const std::filesystem::path& path);

/// Writes all columns (hidden ones included) with shortest round-trip
/// number formatting. Output is byte-deterministic.
void save_csv(const Dataset& ds, const std::filesystem::path& path);

/// Chronological split: first floor(ratio*rows) rows and the remainder.
/// ratio must lie strictly inside (0,1).
std::pair<Dataset, Dataset> split(const Dataset& ds, double ratio);

/// Copy with exactly one column shuffled by a seeded uniform permutation.
Dataset permute_column(const Dataset& ds, std::string_view var, std::uint64_t seed);

/// Appends d1_<var> and d2_<var> for each named variable: central differences
/// on interior rows, first-order one-sided differences on the boundary rows.
Dataset add_derivatives(const Dataset& ds, std::span<const std::string> vars, double dt);

struct WindowSpec {
    std::size_t size = 100;
    std::size_t step = 50;
};

/// All windows [start, start+size) for start = 0, step, 2*step, ... that fit
/// entirely inside the dataset, paired with their start row.
std::vector<std::pair<std::size_t, Dataset>> windows(const Dataset& ds, const WindowSpec& spec);

} // namespace vin
