// Dense two-phase tableau simplex for standard-form linear programs
//   minimize c^T x  subject to  A x = b,  x >= 0.
// Sized for the subproblems of this library (tens of rows, a few hundred
// columns). Phase one runs once per constraint set; each objective is then
// solved from a warm or phase-one basis with periodic reinversion.
#pragma once

#include "qratio/model.hpp"

#include <memory>
#include <vector>

namespace qratio::conic::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SimplexOptions {
  double pivot_tolerance = 1e-7;
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  // Consecutive non-improving pivots before switching to Bland's rule.
  int stall_limit = 50;
  int max_pivots = 0;  // 0 selects 50 * (rows + cols)
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

// B^-1 [A | b] for a basis, kept between solves on the same constraints so a
// new cost vector only needs fresh reduced costs.
struct SimplexTableau {
  RowMatrix t;
  std::vector<Index> basis;
  std::vector<char> basic;
  int pivots_since_refactor = 0;
};

struct LpOutcome {
  LpStatus status = LpStatus::iteration_limit;
  Vector x;
  double objective = 0.0;
  std::vector<Index> basis;
  // Final tableau; null when the solve did not finish at a basis.
  std::shared_ptr<const SimplexTableau> tableau;
  // Unbounded direction (x + s * ray stays feasible for s >= 0).
  Vector ray;
  int pivots = 0;
};

class DenseSimplex {
 public:
  DenseSimplex(Matrix a, Vector b, SimplexOptions options = {});

  bool feasible() const { return feasible_; }
  Index cols() const { return a_.cols(); }

  // warm may be null or come from another instance; unusable state falls
  // back to the phase-one tableau.
  LpOutcome minimize(const Eigen::Ref<const Vector>& c, const SimplexTableau* warm = nullptr) const;

 private:
  Matrix a_;
  Vector b_;
  SimplexOptions options_;
  SimplexTableau initial_;
  bool feasible_ = false;
};

}  // namespace qratio::conic::detail
