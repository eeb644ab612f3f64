#include "fgwc/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fgwc {

namespace {

constexpr char kMagic[4] = {'F', 'G', 'M', '1'};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

}  // namespace

void write_fgm(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open for writing");
  f.write(kMagic, 4);
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  f.write(reinterpret_cast<const char*>(&rows), 8);
  f.write(reinterpret_cast<const char*>(&cols), 8);
  std::vector<float> row(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = static_cast<float>(m(i, j));
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!f) fail(path, "write error");
}

Eigen::MatrixXd read_fgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open");
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) fail(path, "bad FGM1 magic");
  std::uint64_t rows = 0, cols = 0;
  f.read(reinterpret_cast<char*>(&rows), 8);
  f.read(reinterpret_cast<char*>(&cols), 8);
  if (!f) fail(path, "truncated FGM1 header");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::vector<float> row(cols);
  for (std::uint64_t i = 0; i < rows; ++i) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(cols * 4));
    if (!f) fail(path, "truncated FGM1 payload");
    for (std::uint64_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(path, "cannot open");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(path, "unparseable value at line " + std::to_string(lineno));
      }
    }
    if (!rows.empty() && vals.size() != rows.front().size())
      fail(path, "ragged row at line " + std::to_string(lineno));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) fail(path, "empty matrix file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream f(path);
  if (!f) fail(path, "cannot open for writing");
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      f << buf;
      if (j + 1 < m.cols()) f << ',';
    }
    f << '\n';
  }
}

Eigen::MatrixXd read_matrix_auto(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open");
  char magic[4] = {0, 0, 0, 0};
  f.read(magic, 4);
  f.close();
  if (std::memcmp(magic, kMagic, 4) == 0) return read_fgm(path);
  return read_csv_matrix(path);
}

std::vector<int> read_label_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(path, "cannot open");
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(line, &pos);
      labels.push_back(v);
    } catch (const std::exception&) {
      fail(path, "unparseable label at line " + std::to_string(lineno));
    }
  }
  return labels;
}

void write_label_file(const std::string& path, const std::vector<int>& labels) {
  std::ofstream f(path);
  if (!f) fail(path, "cannot open for writing");
  for (int v : labels) f << v << '\n';
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open for writing");
  f << content;
}

}  // namespace fgwc
