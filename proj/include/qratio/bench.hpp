// Experiment harness: the toy-instance scans, method agreement runs,
// success-rate sweeps over (method, q, k) and the constrained-vs-kernel
// ratio table. Every row carries the seed that regenerates it.
#pragma once

#include "qratio/analysis.hpp"
#include "qratio/ensembles.hpp"
#include "qratio/model.hpp"
#include "qratio/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qratio::bench {

// The 5 x 6 toy system whose solutions are
// z(t) = (t, t, t, 20 - 2t, 40 - 4t, 2(t - 9)).
Matrix toy_matrix();
Vector toy_measurements();
Vector toy_family(double t);
// Sparsest member, z(0).
Vector toy_solution();
RecoveryProblem toy_problem(const NormOrder& q, double eta = 0.0);

enum class Method { pm, ccp, lp_inf, bpdn, l1l2 };
std::string to_string(Method m);
Method parse_method(const std::string& text);
// True for methods whose result depends on q.
bool uses_q(Method m);

// comparison is a phase transition with the method-comparison defaults.
enum class Experiment { phase_transition, comparison, agreement, ratio_comparison, toy };
std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& text);

struct ExperimentSpec {
  std::string name = "phase_transition";
  Experiment experiment = Experiment::phase_transition;
  EnsembleSpec ensemble;
  // ratio_comparison iterates over these instead of ensemble.oversampling.
  std::vector<double> oversampling_grid{2.0, 5.0};
  std::vector<Index> sparsity_grid;
  std::vector<NormOrder> q_grid;
  std::vector<Method> methods;
  int replications = 20;
  double success_threshold = 1e-3;
  double noise_sigma = 0.0;
  std::uint64_t master_seed = 2021;
  // Kernel-perturbation restarts for pm and ccp.
  int restarts = 4;
  double cap_factor = 100.0;
  double delta = 1e-5;
  int kernel_starts = 50;
  // 0 means all cores.
  int threads = 0;
  bool full = false;
};

// Desk-scale defaults for each experiment; full = true restores the
// published sizes (100 replications, 64 x 1024 for method comparisons).
ExperimentSpec default_spec(Experiment e, bool full = false);

// Flat "key = value" file; '#' starts a comment. Lists are comma separated
// and integer lists also accept "first:last:step". Unknown keys throw.
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec load_spec(const std::string& path);
// Canonical key/value echo of a spec; parse_spec accepts it back.
std::map<std::string, std::string> spec_entries(const ExperimentSpec& spec);
void validate(const ExperimentSpec& spec);

// Experiments set eta to the norm of the realized noise. This is the
// fallback when the draw is unknown: sigma * sqrt(m).
double noise_bound_for(double sigma, Index m);

struct ResultRow {
  Method method = Method::ccp;
  std::optional<NormOrder> q;
  Index k = 0;
  int replication = 0;
  std::uint64_t seed = 0;
  double relative_error = 0.0;
  bool success = false;
  double wall_time = 0.0;
  std::string termination;
};

struct SummaryRow {
  Method method = Method::ccp;
  std::optional<NormOrder> q;
  Index k = 0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
};

struct PhaseTransition {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
};

// One row from its coordinates; rerunning with the same arguments
// reproduces relative_error exactly.
ResultRow run_row(const ExperimentSpec& spec, Method method, const std::optional<NormOrder>& q, Index k,
                  int replication);
std::uint64_t row_seed(const ExperimentSpec& spec, Index k, int replication);

// Rows ordered by method, q, k, replication. Methods that ignore q run once
// per (k, replication) with q unset.
PhaseTransition run_phase_transition(const ExperimentSpec& spec);
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
// Summary entry for (method, q, k); throws if absent.
const SummaryRow& find_summary(const std::vector<SummaryRow>& summary, Method method,
                               const std::optional<NormOrder>& q, Index k);

struct AgreementCase {
  std::string label;
  NormOrder q = NormOrder::infinity();
  Index k = 0;
  double sigma = 0.0;
  std::vector<Method> methods;
};

struct AgreementRow {
  std::string label;
  Method method = Method::pm;
  std::uint64_t seed = 0;
  double relative_error = 0.0;
  double wall_time = 0.0;
  std::string termination;
  Vector solution;
};

struct AgreementPair {
  std::string label;
  Method first = Method::pm;
  Method second = Method::ccp;
  // ||x_first - x_second||_2 / ||x_second||_2.
  double relative_difference = 0.0;
};

struct Agreement {
  std::vector<AgreementRow> rows;
  std::vector<AgreementPair> pairs;
};

// PM vs CCP at q = 2 (k = 30 noiseless, k = 15 with sigma = 0.1) and
// PM vs CCP vs LP at q = inf (k = 10, noiseless and sigma = 0.01).
std::vector<AgreementCase> default_agreement_cases();
Agreement run_agreement(const ExperimentSpec& spec, const std::vector<AgreementCase>& cases);
Agreement run_agreement(const ExperimentSpec& spec);

struct RatioRow {
  double oversampling = 0.0;
  int matrix = 0;
  Index s = 0;
  std::uint64_t seed = 0;
  double constrained_inf = 0.0;
  double kernel_inf = 0.0;
  bool kernel_exact = false;
};

// DCT matrices over oversampling_grid, `replications` matrices each, x with
// sparsity from sparsity_grid, q = q_grid.front().
std::vector<RatioRow> run_ratio_table(const ExperimentSpec& spec);

struct ToyCurve {
  std::string label;
  std::vector<double> values;
  // Grid points strictly below both neighbours.
  std::vector<double> local_minimizers;
};

struct ToyScan {
  std::vector<double> t;
  // s_q(z(t)) for q = 0, 0.5, 1.5, 2, inf.
  std::vector<ToyCurve> sparsity;
  double lambda_bar = 0.0;
  // lambda ||z(t)||_1 - ||z(t)||_2 for lambda = 0.5, lambda_bar, 1.
  std::vector<ToyCurve> parametric;
};

// Grid t = -5, -4.99, ..., 15.
ToyScan run_toy_scan();
std::vector<double> local_minimizers(const std::vector<double>& t, const std::vector<double>& values);

// CSV writers. rows.csv omits wall_time so reruns compare byte for byte;
// timings go to their own file.
void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_timings_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);
void write_agreement_csv(std::ostream& out, const Agreement& a);
void write_agreement_pairs_csv(std::ostream& out, const Agreement& a);
void write_ratio_csv(std::ostream& out, const std::vector<RatioRow>& rows);
void write_toy_sparsity_csv(std::ostream& out, const ToyScan& scan);
void write_toy_parametric_csv(std::ostream& out, const ToyScan& scan);
void write_toy_minimizers_csv(std::ostream& out, const ToyScan& scan);
void write_toy_files(const std::string& dir, const ToyScan& scan);

// Config echo plus version, RNG algorithm and master seed.
std::string meta_json(const ExperimentSpec& spec, std::size_t row_count);

// Runs the spec's experiment and writes its files (plus meta.json) into dir.
// Returns the list of files written.
std::vector<std::string> run_experiment(const ExperimentSpec& spec, const std::string& dir);

}  // namespace qratio::bench
