#include "postcls/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace postcls::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& cell, const std::string& path, std::size_t line) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw Error(path + ":" + std::to_string(line) + ": cannot parse '" + cell + "' as a number");
    }
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

DatasetTable read_dataset_table(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty file");
    const auto header = split_line(line);

    int y_col = -1;
    DatasetTable table;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") {
            if (y_col >= 0) throw Error(path + ": duplicate 'y' column");
            y_col = static_cast<int>(c);
        } else {
            table.columns.push_back(header[c]);
        }
    }
    const Index p = static_cast<Index>(table.columns.size());
    if (p == 0) throw Error(path + ": no covariate columns");

    std::vector<std::vector<double>> values;
    std::vector<std::vector<bool>> observed;
    std::vector<double> ys;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw Error(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(cells.size()));
        }
        std::vector<double> row;
        std::vector<bool> obs;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (static_cast<int>(c) == y_col) {
                if (cells[c] == "NA") throw Error(path + ":" + std::to_string(line_no) + ": response is NA");
                ys.push_back(parse_number(cells[c], path, line_no));
            } else if (cells[c] == "NA") {
                row.push_back(0.0);
                obs.push_back(false);
                table.any_missing = true;
            } else {
                row.push_back(parse_number(cells[c], path, line_no));
                obs.push_back(true);
            }
        }
        values.push_back(std::move(row));
        observed.push_back(std::move(obs));
    }
    const Index n = static_cast<Index>(values.size());
    if (n == 0) throw Error(path + ": no data rows");

    table.z.resize(n, p);
    table.mask.resize(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            table.z(i, j) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            table.mask(i, j) = observed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    if (y_col >= 0) table.y = Eigen::Map<const Vector>(ys.data(), n);
    return table;
}

SurrogateDataset to_missing_dataset(const DatasetTable& table) {
    SurrogateDataset data;
    data.z = table.z;
    data.mask = table.mask;
    data.y = table.y;
    data.noise = MissingNoise{estimate_missing_rates(table.mask)};
    data.validate(false);
    return data;
}

SurrogateDataset to_additive_dataset(const DatasetTable& table, Matrix sigma_w) {
    if (table.any_missing) throw Error("additive noise model cannot be used with NA entries");
    SurrogateDataset data;
    data.z = table.z;
    data.y = table.y;
    data.noise = AdditiveNoise{std::move(sigma_w)};
    data.validate(false);
    return data;
}

void write_dataset(const SurrogateDataset& data, const std::string& path) {
    auto out = open_out(path);
    const bool with_y = data.y.size() == data.n() && data.y.size() > 0;
    if (with_y) out << "y";
    for (Index j = 0; j < data.p(); ++j) out << ((with_y || j > 0) ? "," : "") << "x" << j + 1;
    out << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        if (with_y) out << format_double(data.y[i]);
        for (Index j = 0; j < data.p(); ++j) {
            if (with_y || j > 0) out << ',';
            if (data.mask && !(*data.mask)(i, j)) out << "NA";
            else out << format_double(data.z(i, j));
        }
        out << '\n';
    }
    if (!out) throw Error("write to '" + path + "' failed");
}

Matrix read_matrix(const std::string& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        std::vector<double> row;
        for (const auto& cell : split_line(line)) row.push_back(parse_number(cell, path, line_no));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw Error(path + ":" + std::to_string(line_no) + ": ragged matrix row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(path + ": empty matrix");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

void write_matrix(const Matrix& m, const std::string& path) {
    auto out = open_out(path);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
        out << '\n';
    }
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace postcls::io
