// Measurement matrices and ground-truth signals for recovery experiments.
#pragma once

#include "qratio/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qratio {

enum class EnsembleKind { gaussian, oversampled_dct };

std::string to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(const std::string& text);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::gaussian;
  Index m = 64;
  Index n = 256;
  // Oversampling factor; larger values give more coherent columns.
  double oversampling = 1.0;
  std::uint64_t seed = 0;
};

// Throws for invalid sizes or F <= 0 on DCT specs. Returns human-readable
// warnings for legal but unusual settings (m > N).
std::vector<std::string> validate(const EnsembleSpec& spec);

// (1/sqrt(m)) G with G_ij i.i.d. standard normal, drawn column by column.
Matrix gaussian_matrix(const EnsembleSpec& spec);

// Column j (0-based) is cos(2 pi w j / F) / sqrt(m) entrywise, with w drawn
// once per matrix uniformly from [0,1]^m.
Matrix dct_matrix(const EnsembleSpec& spec);

Matrix make_matrix(const EnsembleSpec& spec);

struct GroundTruth {
  Vector signal;
  // Sorted ascending.
  std::vector<Index> support;
  Index sparsity = 0;
};

// Uniform random k-subset support with i.i.d. standard normal values.
GroundTruth sparse_signal(Index n, Index k, std::uint64_t seed);

// x_i = i^(-p), i = 1..N.
Vector compressible_signal(Index n, double decay);

// i.i.d. N(0, sigma^2) noise vector.
Vector gaussian_noise(Index m, double sigma, std::uint64_t seed);

// max_{i != j} |<a_i, a_j>| / (||a_i|| ||a_j||); zero columns are skipped.
double mutual_coherence(const Matrix& a);

}  // namespace qratio
