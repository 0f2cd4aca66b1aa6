#pragma once

#include <string>
#include <vector>

#include "mixreg/types.hpp"

namespace mixreg::csv {

// Shortest representation that round-trips a double exactly (17 significant
// digits).
std::string format(double x);

void write_matrix(const std::string& path, const Matrix& m);
void write_vector(const std::string& path, const Vector& v);
Matrix read_matrix(const std::string& path);
Vector read_vector(const std::string& path);

// Generic row-oriented writer for report files.
class Writer {
 public:
  explicit Writer(const std::string& path);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void raw_line(const std::string& line);
  void field(const std::string& s);
  void field(double x);
  void field(long long x);
  void end_row();

 private:
  struct Impl;
  Impl* impl_;
};

std::vector<std::vector<std::string>> read_rows(const std::string& path);

}  // namespace mixreg::csv
