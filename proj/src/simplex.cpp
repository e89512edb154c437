#include "simplex.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace qratio::conic::detail {
namespace {

// Reinvert after this many rank-one updates.
constexpr int kRefactorInterval = 200;

struct Work {
  SimplexTableau tab;
  // Reduced costs; the last entry is minus the objective value.
  Eigen::RowVectorXd d;

  Index rows() const { return tab.t.rows(); }
  Index cols() const { return tab.t.cols() - 1; }
  double objective() const { return -d[cols()]; }
};

enum class StepResult { optimal, unbounded, limit };

void pivot(Work& w, Index r, Index j) {
  auto& t = w.tab.t;
  const Eigen::RowVectorXd prow = t.row(r) / t(r, j);
  Vector col = t.col(j);
  col[r] = 0.0;
  t.noalias() -= col * prow;
  t.row(r) = prow;
  w.d.noalias() -= w.d[j] * prow;
  // Exact zeros in the pivot column keep the basis columns clean.
  for (Index i = 0; i < w.rows(); ++i) t(i, j) = (i == r) ? 1.0 : 0.0;
  w.d[j] = 0.0;
  w.tab.basic[w.tab.basis[r]] = 0;
  w.tab.basis[r] = j;
  w.tab.basic[j] = 1;
  ++w.tab.pivots_since_refactor;
}

void price(Work& w, const Vector& c) {
  const Index m = w.rows();
  const Index n = w.cols();
  Vector cb(m);
  for (Index r = 0; r < m; ++r) cb[r] = c[w.tab.basis[r]];
  w.d.resize(n + 1);
  w.d.head(n) = c.transpose() - cb.transpose() * w.tab.t.leftCols(n);
  w.d[n] = -cb.dot(w.tab.t.col(n));
  for (Index r = 0; r < m; ++r) w.d[w.tab.basis[r]] = 0.0;
}

// Recomputes B^-1 [A | b] from scratch for the given basis.
bool refactor(SimplexTableau& tab, const Matrix& a, const Vector& b,
              const std::vector<Index>& basis, double feas_tol) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (static_cast<Index>(basis.size()) != m) return false;
  std::vector<char> seen(n, 0);
  Matrix bmat(m, m);
  for (Index r = 0; r < m; ++r) {
    const Index j = basis[r];
    if (j < 0 || j >= n || seen[j]) return false;
    seen[j] = 1;
    bmat.col(r) = a.col(j);
  }
  Eigen::FullPivLU<Matrix> lu(bmat);
  if (lu.rank() < m) return false;
  Matrix rhs(m, n + 1);
  rhs.leftCols(n) = a;
  rhs.col(n) = b;
  RowMatrix t = lu.solve(rhs);
  for (Index r = 0; r < m; ++r) {
    if (t(r, n) < -feas_tol) return false;
  }
  for (Index r = 0; r < m; ++r) {
    for (Index i = 0; i < m; ++i) t(i, basis[r]) = (i == r) ? 1.0 : 0.0;
  }
  tab.t = std::move(t);
  tab.basis = basis;
  tab.basic.assign(n, 0);
  for (Index j : basis) tab.basic[j] = 1;
  tab.pivots_since_refactor = 0;
  return true;
}

using Reinvert = std::function<void(Work&)>;

// Primal simplex on a feasible tableau. `reinvert` rebuilds the tableau and
// reduced costs from the current basis every kRefactorInterval pivots.
StepResult run(Work& w, const SimplexOptions& o, double opt_tol, double feas_tol, int max_pivots, int& pivots,
               Index& unbounded_col, const Reinvert& reinvert) {
  const Index m = w.rows();
  const Index n = w.cols();
  const auto& t = w.tab.t;
  int stall = 0;
  double best_obj = w.objective();
  while (true) {
    const bool bland = stall >= o.stall_limit;
    Index enter = -1;
    double most_negative = -opt_tol;
    for (Index j = 0; j < n; ++j) {
      if (w.tab.basic[j]) continue;
      if (w.d[j] < most_negative) {
        enter = j;
        if (bland) break;
        most_negative = w.d[j];
      }
    }
    if (enter < 0) return StepResult::optimal;
    if (pivots >= max_pivots) return StepResult::limit;

    // Harris ratio test: bound the step with every basic value relaxed by
    // the feasibility tolerance, then take the largest pivot within it.
    double bound = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < m; ++r) {
      const double a = t(r, enter);
      if (a > o.pivot_tolerance) bound = std::min(bound, (std::max(t(r, n), 0.0) + feas_tol) / a);
    }
    Index leave = -1;
    double best_pivot = 0.0;
    for (Index r = 0; r < m; ++r) {
      const double a = t(r, enter);
      if (a <= o.pivot_tolerance || std::max(t(r, n), 0.0) / a > bound) continue;
      const bool take = leave < 0 || (bland ? w.tab.basis[r] < w.tab.basis[leave] : a > best_pivot);
      if (take) {
        leave = r;
        best_pivot = a;
      }
    }
    if (leave < 0) {
      unbounded_col = enter;
      return StepResult::unbounded;
    }
    pivot(w, leave, enter);
    ++pivots;
    if (w.tab.pivots_since_refactor >= kRefactorInterval) reinvert(w);
    const double obj = w.objective();
    if (obj < best_obj - 1e-12 * (1.0 + std::abs(best_obj))) {
      best_obj = obj;
      stall = 0;
    } else {
      ++stall;
    }
  }
}

Vector extract(const Work& w) {
  Vector x = Vector::Zero(w.cols());
  for (Index r = 0; r < w.rows(); ++r) x[w.tab.basis[r]] = std::max(w.tab.t(r, w.cols()), 0.0);
  return x;
}

}  // namespace

DenseSimplex::DenseSimplex(Matrix a, Vector b, SimplexOptions options)
    : a_(std::move(a)), b_(std::move(b)), options_(options) {
  const Index m = a_.rows();
  const Index n = a_.cols();
  if (b_.size() != m) throw InvalidArgument("simplex: rhs length mismatch");
  if (options_.max_pivots <= 0) options_.max_pivots = static_cast<int>(50 * (m + n) + 1000);
  for (Index r = 0; r < m; ++r) {
    if (b_[r] < 0.0) {
      a_.row(r) *= -1.0;
      b_[r] = -b_[r];
    }
  }
  if (m == 0) {
    initial_.t = RowMatrix::Zero(0, n + 1);
    initial_.basic.assign(n, 0);
    feasible_ = true;
    return;
  }

  // Phase one: minimize the sum of artificial variables.
  Work w;
  w.tab.t = RowMatrix::Zero(m, n + m + 1);
  w.tab.t.leftCols(n) = a_;
  w.tab.t.block(0, n, m, m).setIdentity();
  w.tab.t.col(n + m) = b_;
  w.tab.basis.resize(m);
  w.tab.basic.assign(n + m, 0);
  for (Index r = 0; r < m; ++r) {
    w.tab.basis[r] = n + r;
    w.tab.basic[n + r] = 1;
  }
  w.d = Eigen::RowVectorXd::Zero(n + m + 1);
  w.d.head(n) = -a_.colwise().sum();
  w.d[n + m] = -b_.sum();

  int pivots = 0;
  Index unused = -1;
  const double scale = 1.0 + b_.lpNorm<1>();
  Matrix a_phase(m, n + m);
  a_phase << a_, Matrix::Identity(m, m);
  Vector c_phase = Vector::Zero(n + m);
  c_phase.tail(m).setOnes();
  const Reinvert phase_reinvert = [&](Work& x) {
    SimplexTableau fresh;
    if (refactor(fresh, a_phase, b_, x.tab.basis, std::numeric_limits<double>::infinity())) {
      x.tab = std::move(fresh);
      price(x, c_phase);
    } else {
      x.tab.pivots_since_refactor = 0;
    }
  };
  run(w, options_, options_.optimality_tolerance, options_.feasibility_tolerance * scale, options_.max_pivots, pivots,
      unused, phase_reinvert);
  if (w.objective() > 1e-9 * scale) {
    feasible_ = false;
    return;
  }

  // Drive artificials out of the basis; rows where that is impossible are
  // linear combinations of the others and are dropped.
  std::vector<char> redundant(m, 0);
  for (Index r = 0; r < m; ++r) {
    if (w.tab.basis[r] < n) continue;
    Index best = -1;
    double best_abs = 1e-7;
    for (Index j = 0; j < n; ++j) {
      if (w.tab.basic[j]) continue;
      if (std::abs(w.tab.t(r, j)) > best_abs) {
        best_abs = std::abs(w.tab.t(r, j));
        best = j;
      }
    }
    if (best >= 0) {
      pivot(w, r, best);
    } else {
      redundant[r] = 1;
    }
  }
  std::vector<Index> kept;
  for (Index r = 0; r < m; ++r) {
    if (!redundant[r]) kept.push_back(r);
  }
  const Index mk = static_cast<Index>(kept.size());
  Matrix a_kept(mk, n);
  Vector b_kept(mk);
  initial_.t.resize(mk, n + 1);
  initial_.basis.resize(mk);
  for (Index i = 0; i < mk; ++i) {
    a_kept.row(i) = a_.row(kept[i]);
    b_kept[i] = b_[kept[i]];
    initial_.t.row(i).head(n) = w.tab.t.row(kept[i]).head(n);
    initial_.t(i, n) = w.tab.t(kept[i], n + m);
    initial_.basis[i] = w.tab.basis[kept[i]];
  }
  a_ = std::move(a_kept);
  b_ = std::move(b_kept);
  initial_.basic.assign(n, 0);
  for (Index j : initial_.basis) initial_.basic[j] = 1;
  // Start every solve from a freshly inverted basis.
  refactor(initial_, a_, b_, initial_.basis, 1e-6 * scale);
  feasible_ = true;
}

LpOutcome DenseSimplex::minimize(const Eigen::Ref<const Vector>& c, const SimplexTableau* warm) const {
  LpOutcome out;
  const Index n = a_.cols();
  if (c.size() != n) throw InvalidArgument("simplex: cost length mismatch");
  if (!feasible_) {
    out.status = LpStatus::infeasible;
    return out;
  }
  const Vector cost = c;
  if (a_.rows() == 0) {
    // No equality rows: x = 0 is optimal unless some cost is negative.
    out.x = Vector::Zero(n);
    for (Index j = 0; j < n; ++j) {
      if (cost[j] < 0.0) {
        out.status = LpStatus::unbounded;
        out.ray = Vector::Unit(n, j);
        return out;
      }
    }
    out.status = LpStatus::optimal;
    return out;
  }

  const double feas_tol = options_.feasibility_tolerance * (1.0 + b_.lpNorm<Eigen::Infinity>());
  const double opt_tol = options_.optimality_tolerance * (1.0 + cost.lpNorm<Eigen::Infinity>());
  Work w;
  const bool usable = warm && warm->t.rows() == a_.rows() && warm->t.cols() == n + 1 &&
                      static_cast<Index>(warm->basic.size()) == n;
  w.tab = usable ? *warm : initial_;
  price(w, cost);

  const Reinvert reinvert = [&](Work& x) {
    SimplexTableau fresh;
    if (refactor(fresh, a_, b_, x.tab.basis, std::numeric_limits<double>::infinity())) {
      x.tab = std::move(fresh);
      price(x, cost);
    } else {
      x.tab.pivots_since_refactor = 0;
    }
  };
  int pivots = 0;
  for (int round = 0; round < 6; ++round) {
    Index unbounded_col = -1;
    const StepResult step = run(w, options_, opt_tol, feas_tol, options_.max_pivots, pivots, unbounded_col, reinvert);
    out.pivots = pivots;
    if (step == StepResult::limit) {
      out.status = LpStatus::iteration_limit;
      break;
    }
    // Both verdicts are confirmed on a freshly inverted basis; rank-one
    // updates drift badly on coherent matrices.
    if (w.tab.pivots_since_refactor > 0) {
      SimplexTableau fresh;
      if (refactor(fresh, a_, b_, w.tab.basis, 1e3 * feas_tol)) {
        w.tab = std::move(fresh);
        price(w, cost);
        continue;
      }
    }
    if (step == StepResult::unbounded) {
      out.status = LpStatus::unbounded;
      out.x = extract(w);
      out.ray = Vector::Zero(n);
      out.ray[unbounded_col] = 1.0;
      for (Index r = 0; r < w.rows(); ++r) out.ray[w.tab.basis[r]] = -w.tab.t(r, unbounded_col);
      out.basis = w.tab.basis;
      out.objective = cost.dot(out.x);
      return out;
    }
    out.status = LpStatus::optimal;
    break;
  }
  out.x = extract(w);
  out.basis = w.tab.basis;
  out.objective = cost.dot(out.x);
  if (out.status == LpStatus::optimal) out.tableau = std::make_shared<const SimplexTableau>(std::move(w.tab));
  return out;
}

}  // namespace qratio::conic::detail
