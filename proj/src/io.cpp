#include "qratio/io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace qratio::io {
namespace {

long long read_count(std::istream& in, const char* what) {
  long long n = 0;
  if (!(in >> n) || n < 1) {
    throw InvalidArgument(std::string("malformed header: expected positive ") + what);
  }
  return n;
}

double read_entry(std::istream& in) {
  double v = 0.0;
  if (!(in >> v)) throw InvalidArgument("malformed or truncated numeric data");
  return v;
}

void expect_end(std::istream& in) {
  std::string extra;
  if (in >> extra) throw InvalidArgument("trailing data after expected entries: '" + extra + "'");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  const auto m = read_count(in, "row count");
  const auto n = read_count(in, "column count");
  Matrix a(m, n);
  for (long long i = 0; i < m; ++i)
    for (long long j = 0; j < n; ++j) a(i, j) = read_entry(in);
  expect_end(in);
  require_finite(a, "matrix file");
  return a;
}

Vector read_vector(std::istream& in) {
  const auto n = read_count(in, "length");
  Vector v(n);
  for (long long i = 0; i < n; ++i) v[i] = read_entry(in);
  expect_end(in);
  require_finite(v, "vector file");
  return v;
}

Matrix read_matrix_file(const std::string& path) {
  auto in = open_in(path);
  return read_matrix(in);
}

Vector read_vector_file(const std::string& path) {
  auto in = open_in(path);
  return read_vector(in);
}

void write_matrix(std::ostream& out, const Matrix& a) {
  out << a.rows() << ' ' << a.cols() << '\n' << std::setprecision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ' ';
      out << a(i, j);
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  out << v.size() << '\n' << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out << ' ';
    out << v[i];
  }
  out << '\n';
}

void write_matrix_file(const std::string& path, const Matrix& a) {
  auto out = open_out(path);
  write_matrix(out, a);
}

void write_vector_file(const std::string& path, const Vector& v) {
  auto out = open_out(path);
  write_vector(out, v);
}

}  // namespace qratio::io
