#pragma once

#include <string>

#include "postcls/corrected_moments.hpp"
#include "postcls/types.hpp"

namespace postcls::io {

/// Raw table read from a dataset file: every column except "y" becomes a column
/// of Z, and "NA" cells are unobserved.
struct DatasetTable {
    Matrix z;           // NA cells zero-filled
    BoolMatrix mask;    // true = observed
    Vector y;           // empty when the file has no "y" column
    std::vector<std::string> columns;
    bool any_missing = false;
};

DatasetTable read_dataset_table(const std::string& path);

/// Missing-data dataset with rates estimated from the observed-entry frequencies.
SurrogateDataset to_missing_dataset(const DatasetTable& table);

/// Additive-noise dataset; the table must not contain NA cells.
SurrogateDataset to_additive_dataset(const DatasetTable& table, Matrix sigma_w);

/// Writes y (if present) followed by Z columns x1..xp, with NA for unobserved cells.
void write_dataset(const SurrogateDataset& data, const std::string& path);

/// Headerless comma-separated numeric matrix.
Matrix read_matrix(const std::string& path);
void write_matrix(const Matrix& m, const std::string& path);

/// Shortest decimal form that round-trips (17 significant digits).
std::string format_double(double v);

}  // namespace postcls::io
