#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace fgwc {

// "FGM1" dense matrix container: magic, u64 rows, u64 cols, float32 row-major,
// little-endian throughout.
void write_fgm(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_fgm(const std::string& path);

// One node per row, comma-separated values.
Eigen::MatrixXd read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);

// Sniffs the FGM1 magic; falls back to CSV.
Eigen::MatrixXd read_matrix_auto(const std::string& path);

// One integer per line.
std::vector<int> read_label_file(const std::string& path);
void write_label_file(const std::string& path, const std::vector<int>& labels);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fgwc
