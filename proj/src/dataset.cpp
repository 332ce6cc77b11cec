#include "vin/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vin/errors.hpp"
#include "vin/rng.hpp"

namespace vin {

void Dataset::add_column(std::string name, std::vector<double> values, bool hidden) {
    if (name.empty()) {
        throw DataError("column name must be non-empty");
    }
    if (index_.contains(name)) {
        throw DataError("duplicate column name: " + name);
    }
    if (!columns_.empty() && values.size() != rows_) {
        throw DataError("column " + name + " has " + std::to_string(values.size()) +
                        " rows, expected " + std::to_string(rows_));
    }
    rows_ = values.size();
    index_.emplace(name, columns_.size());
    columns_.push_back({std::move(name),
                        std::make_shared<const std::vector<double>>(std::move(values)),
                        hidden});
}

bool Dataset::has_column(std::string_view name) const { return index_.contains(name); }

const Dataset::Column& Dataset::find(std::string_view name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) {
        throw DataError("unknown column: " + std::string(name));
    }
    return columns_[it->second];
}

std::span<const double> Dataset::column(std::string_view name) const {
    return *find(name).values;
}

bool Dataset::hidden(std::string_view name) const { return find(name).hidden; }

void Dataset::set_hidden(std::string_view name, bool hidden) {
    const auto it = index_.find(name);
    if (it == index_.end()) {
        throw DataError("unknown column: " + std::string(name));
    }
    columns_[it->second].hidden = hidden;
}

std::vector<std::string> Dataset::names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const Column& c : columns_) {
        out.push_back(c.name);
    }
    return out;
}

std::vector<std::string> Dataset::visible_names() const {
    std::vector<std::string> out;
    for (const Column& c : columns_) {
        if (!c.hidden) {
            out.push_back(c.name);
        }
    }
    return out;
}

Dataset Dataset::select(std::span<const std::string> names) const {
    Dataset out;
    for (const std::string& n : names) {
        const Column& c = find(n);
        out.rows_ = rows_;
        out.index_.emplace(c.name, out.columns_.size());
        out.columns_.push_back(c);
    }
    return out;
}

Dataset Dataset::slice(std::size_t start, std::size_t count) const {
    if (start + count > rows_) {
        throw DataError("slice out of range");
    }
    Dataset out;
    for (const Column& c : columns_) {
        std::vector<double> values(c.values->begin() + static_cast<std::ptrdiff_t>(start),
                                   c.values->begin() + static_cast<std::ptrdiff_t>(start + count));
        out.add_column(c.name, std::move(values), c.hidden);
    }
    out.rows_ = count;
    return out;
}

Dataset Dataset::with_column(std::string_view name, std::vector<double> values) const {
    const auto it = index_.find(name);
    if (it == index_.end()) {
        throw DataError("unknown column: " + std::string(name));
    }
    if (values.size() != rows_) {
        throw DataError("replacement column size mismatch");
    }
    Dataset out = *this;
    out.columns_[it->second].values =
        std::make_shared<const std::vector<double>>(std::move(values));
    return out;
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(begin));
            return cells;
        }
        cells.push_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

void format_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

} // namespace

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ": empty file");
    }
    // Strip a UTF-8 BOM if present.
    if (line.starts_with("\xEF\xBB\xBF")) {
        line.erase(0, 3);
    }
    std::vector<std::string> header;
    for (std::string_view cell : split_line(line)) {
        header.emplace_back(trim(cell));
    }
    const std::size_t ncols = header.size();
    std::vector<std::vector<double>> data(ncols);

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view trimmed_line = trim(line);
        if (trimmed_line.empty()) {
            continue;
        }
        const auto cells = split_line(trimmed_line);
        if (cells.size() != ncols) {
            throw DataError(path.string() + ":" + std::to_string(row) + ": expected " +
                            std::to_string(ncols) + " cells, got " +
                            std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < ncols; ++c) {
            const std::string_view cell = trim(cells[c]);
            double value = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
                throw DataError(path.string() + ":" + std::to_string(row) + ": column " +
                                std::to_string(c + 1) + ": cannot parse '" +
                                std::string(cell) + "' as a real number");
            }
            if (!std::isfinite(value)) {
                throw DataError(path.string() + ":" + std::to_string(row) + ": column " +
                                std::to_string(c + 1) + ": non-finite value");
            }
            data[c].push_back(value);
        }
    }

    Dataset ds;
    for (std::size_t c = 0; c < ncols; ++c) {
        ds.add_column(header[c], std::move(data[c]));
    }
    return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::string out;
    const auto names = ds.names();
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (c > 0) {
            out += ',';
        }
        out += names[c];
    }
    out += '\n';

    std::vector<std::span<const double>> cols;
    cols.reserve(names.size());
    for (const std::string& n : names) {
        cols.push_back(ds.column(n));
    }
    for (std::size_t r = 0; r < ds.row_count(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c > 0) {
                out += ',';
            }
            format_double(out, cols[c][r]);
        }
        out += '\n';
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw DataError("cannot write " + path.string());
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw DataError("write failed: " + path.string());
    }
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw DataError("split ratio must lie in (0,1)");
    }
    if (ds.row_count() == 0) {
        throw DataError("cannot split an empty dataset");
    }
    const auto head = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(ds.row_count())));
    return {ds.slice(0, head), ds.slice(head, ds.row_count() - head)};
}

Dataset permute_column(const Dataset& ds, std::string_view var, std::uint64_t seed) {
    std::vector<double> values(ds.column(var).begin(), ds.column(var).end());
    Rng rng(seed);
    rng.shuffle(std::span<double>(values));
    return ds.with_column(var, std::move(values));
}

Dataset add_derivatives(const Dataset& ds, std::span<const std::string> vars, double dt) {
    if (dt <= 0.0) {
        throw DataError("derivative step dt must be positive");
    }
    const std::size_t n = ds.row_count();
    if (n < 3) {
        throw DataError("add_derivatives needs at least 3 rows");
    }
    Dataset out = ds;
    for (const std::string& var : vars) {
        const auto x = ds.column(var);
        std::vector<double> d1(n);
        std::vector<double> d2(n);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            d1[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
            d2[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (dt * dt);
        }
        d1[0] = (x[1] - x[0]) / dt;
        d1[n - 1] = (x[n - 1] - x[n - 2]) / dt;
        d2[0] = (x[2] - 2.0 * x[1] + x[0]) / (dt * dt);
        d2[n - 1] = (x[n - 1] - 2.0 * x[n - 2] + x[n - 3]) / (dt * dt);
        out.add_column("d1_" + var, std::move(d1));
        out.add_column("d2_" + var, std::move(d2));
    }
    return out;
}

std::vector<std::pair<std::size_t, Dataset>> windows(const Dataset& ds,
                                                     const WindowSpec& spec) {
    if (spec.size < 2) {
        throw DataError("window size must be at least 2");
    }
    if (spec.step < 1 || spec.step > spec.size) {
        throw DataError("window step must lie in [1, size]");
    }
    if (spec.size > ds.row_count()) {
        throw DataError("window larger than dataset");
    }
    std::vector<std::pair<std::size_t, Dataset>> out;
    for (std::size_t start = 0; start + spec.size <= ds.row_count(); start += spec.step) {
        out.emplace_back(start, ds.slice(start, spec.size));
    }
    return out;
}

} // namespace vin
