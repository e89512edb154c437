// Plain-text matrix and vector files.
//
// Matrix: first line "m N", then m lines of N whitespace-separated decimals.
// Vector: first line "N", then one line of N decimals.
#pragma once

#include "qratio/model.hpp"

#include <iosfwd>
#include <string>

namespace qratio::io {

Matrix read_matrix(std::istream& in);
Vector read_vector(std::istream& in);
Matrix read_matrix_file(const std::string& path);
Vector read_vector_file(const std::string& path);

// Values are written with 17 significant digits so a write/read cycle is exact.
void write_matrix(std::ostream& out, const Matrix& a);
void write_vector(std::ostream& out, const Vector& v);
void write_matrix_file(const std::string& path, const Matrix& a);
void write_vector_file(const std::string& path, const Vector& v);

}  // namespace qratio::io
