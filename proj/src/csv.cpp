#include "mixreg/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixreg::csv {

std::string format(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format(m(i, j));
    }
    out << '\n';
  }
}

void write_vector(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format(v[i]) << '\n';
}

static std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& tok : split(line)) row.push_back(std::stod(tok));
    if (!rows.empty() && rows.front().size() != row.size())
      throw std::runtime_error("ragged csv: " + path);
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Vector read_vector(const std::string& path) {
  Matrix m = read_matrix(path);
  if (m.cols() != 1) throw std::runtime_error("expected single column: " + path);
  return m.col(0);
}

struct Writer::Impl {
  std::ofstream out;
  bool row_started = false;
};

Writer::Writer(const std::string& path) : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out) {
    delete impl_;
    throw std::runtime_error("cannot open for write: " + path);
  }
}

Writer::~Writer() { delete impl_; }

void Writer::raw_line(const std::string& line) { impl_->out << line << '\n'; }

void Writer::field(const std::string& s) {
  if (impl_->row_started) impl_->out << ',';
  impl_->out << s;
  impl_->row_started = true;
}

void Writer::field(double x) { field(format(x)); }

void Writer::field(long long x) { field(std::to_string(x)); }

void Writer::end_row() {
  impl_->out << '\n';
  impl_->row_started = false;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split(line));
  }
  return rows;
}

}  // namespace mixreg::csv
