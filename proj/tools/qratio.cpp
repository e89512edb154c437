// qratio command-line entry point.
//
// Exit codes: 0 success, 1 solver reported infeasible or degenerate (or
// failed at run time), 2 usage error.
#include "qratio/analysis.hpp"
#include "qratio/bench.hpp"
#include "qratio/ensembles.hpp"
#include "qratio/io.hpp"
#include "qratio/solvers.hpp"
#include "qratio/sparsity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace qratio;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kUsage = 2;

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json q_json(const NormOrder& q) {
  if (q.is_infinite()) return "inf";
  return q.value();
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump(2) << "\n";
}

NormOrder parse_q(const std::string& text) {
  const NormOrder q = NormOrder::parse(text);
  return q;
}

json report_json(const SolveReport& r, const NormOrder& q) {
  json j;
  j["method"] = r.method;
  j["q"] = q_json(q);
  j["termination"] = to_string(r.termination);
  j["objective_value"] = number(r.objective_value);
  j["residual_norm"] = number(r.residual_norm);
  j["outer_iterations"] = r.outer_iterations;
  j["inner_iterations"] = r.inner_iterations;
  j["wall_time"] = r.wall_time;
  j["solution"] = vec_json(r.solution);
  json trace = json::array();
  for (double v : r.objective_trace) trace.push_back(number(v));
  j["objective_trace"] = trace;
  json hist = json::array();
  for (const auto& [lambda, f] : r.lambda_history) hist.push_back({{"lambda", number(lambda)}, {"f", number(f)}});
  j["lambda_history"] = hist;
  j["notes"] = r.notes;
  return j;
}

json certificate_json(const CertificateReport& c) {
  json j;
  j["q"] = q_json(c.q);
  j["k"] = c.k;
  j["eta"] = number(c.eta);
  j["kernel_ratio_inf"] = number(c.kernel_ratio_inf);
  j["kernel_ratio_exact"] = c.kernel_ratio_exact;
  j["sufficient_k"] = number(c.sufficient_k);
  j["cmsv_estimate"] = number(c.cmsv_estimate);
  j["cmsv_level"] = number(c.cmsv_level);
  j["cmsv_exact"] = c.cmsv_exact;
  j["error_q"] = number(c.error_q);
  j["error_1"] = number(c.error_1);
  j["theorem1_bound_q"] = number(c.theorem1_bound_q);
  j["theorem1_bound_1"] = number(c.theorem1_bound_1);
  j["C_q"] = number(c.c_q);
  j["sigma_k1"] = number(c.sigma_k1);
  j["theorem2_components"] = {number(c.theorem2_components.first), number(c.theorem2_components.second)};
  j["theorem2_bound_q"] = number(c.theorem2_bound_q);
  j["theorem2_bound_1"] = number(c.theorem2_bound_1);
  j["notes"] = c.notes;
  return j;
}

bool solver_failed(Termination t) { return t == Termination::infeasible || t == Termination::degenerate_zero; }

struct Globals {
  int threads = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery by q-ratio sparsity minimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       std::string("qratio ") + QRATIO_VERSION + " (Eigen " + std::to_string(EIGEN_WORLD_VERSION) +
                           "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION) +
                           ", " + __VERSION__ + ", rng " + std::string(Rng::kAlgorithm) + ")");
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads for bench and analysis (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a measurement matrix (and optionally a signal)");
  std::string gen_kind = "gaussian", gen_out, gen_x, gen_y;
  Index gen_m = 64, gen_n = 256, gen_k = 0;
  double gen_f = 1.0, gen_sigma = 0.0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--kind", gen_kind, "gaussian or dct")->check(CLI::IsMember({"gaussian", "dct"}));
  gen->add_option("--m", gen_m, "Rows")->check(CLI::PositiveNumber);
  gen->add_option("--N", gen_n, "Columns")->check(CLI::PositiveNumber);
  gen->add_option("--F", gen_f, "DCT oversampling factor")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Matrix file")->required();
  gen->add_option("--k", gen_k, "Sparsity of a generated signal")->check(CLI::NonNegativeNumber);
  gen->add_option("--sigma", gen_sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  gen->add_option("--x-out", gen_x, "Signal file (needs --k)");
  gen->add_option("--y-out", gen_y, "Measurement file (needs --k)");

  // sparsity
  auto* sp = app.add_subcommand("sparsity", "q-ratio sparsity of a vector");
  std::string sp_q, sp_vec;
  sp->add_option("--q", sp_q, "Order in [0, inf]")->required();
  sp->add_option("--vector", sp_vec, "Vector file")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Recover a signal");
  std::string so_method = "ccp", so_q = "2", so_matrix, so_y, so_out;
  double so_eta = 0.0, so_cap = 100.0, so_delta = 1e-5;
  int so_restarts = 16;
  std::uint64_t so_seed = 0x5eed;
  solve->add_option("--method", so_method, "pm, ccp, lp-inf, bpdn or l1l2")
      ->check(CLI::IsMember({"pm", "ccp", "lp-inf", "bpdn", "l1l2"}));
  solve->add_option("--q", so_q, "Ratio order (decimal > 1 or inf)");
  solve->add_option("--matrix", so_matrix, "Matrix file")->required();
  solve->add_option("--y", so_y, "Measurement file")->required();
  solve->add_option("--eta", so_eta, "Noise bound")->check(CLI::NonNegativeNumber);
  solve->add_option("--a-cap", so_cap, "Cap factor kappa for t0 = 1 / (kappa ||x_bpdn||_1)")
      ->check(CLI::PositiveNumber);
  solve->add_option("--delta", so_delta, "Parametric stopping tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--restarts", so_restarts, "Kernel-perturbation restarts")->check(CLI::NonNegativeNumber);
  solve->add_option("--seed", so_seed, "Restart seed");
  solve->add_option("--out", so_out, "JSON report (default: standard output)");

  // fvalue
  auto* fv = app.add_subcommand("fvalue", "Evaluate F(lambda) = min lambda ||z||_1 - ||z||_q");
  std::string fv_q = "2", fv_matrix, fv_y, fv_out;
  double fv_lambda = 0.0, fv_eta = 0.0;
  int fv_restarts = 16;
  std::uint64_t fv_seed = 0x5eed;
  fv->add_option("--lambda", fv_lambda, "lambda")->required()->check(CLI::NonNegativeNumber);
  fv->add_option("--q", fv_q, "Ratio order");
  fv->add_option("--matrix", fv_matrix, "Matrix file")->required();
  fv->add_option("--y", fv_y, "Measurement file")->required();
  fv->add_option("--eta", fv_eta, "Noise bound")->check(CLI::NonNegativeNumber);
  fv->add_option("--restarts", fv_restarts, "Kernel-perturbation restarts")->check(CLI::NonNegativeNumber);
  fv->add_option("--seed", fv_seed, "Restart seed");
  fv->add_option("--out", fv_out, "JSON output (default: standard output)");

  // kernel-ratio
  auto* kr = app.add_subcommand("kernel-ratio", "Kernel ratio infimum and sufficient sparsity threshold");
  std::string kr_q = "inf", kr_matrix, kr_out;
  Index kr_k = 0;
  int kr_starts = 50;
  std::uint64_t kr_seed = 0x6b72;
  kr->add_option("--q", kr_q, "Ratio order");
  kr->add_option("--matrix", kr_matrix, "Matrix file")->required();
  kr->add_option("--k", kr_k, "Sparsity to test against the threshold")->check(CLI::NonNegativeNumber);
  kr->add_option("--starts", kr_starts, "CCP starts for finite q")->check(CLI::PositiveNumber);
  kr->add_option("--seed", kr_seed, "Master seed");
  kr->add_option("--out", kr_out, "JSON output (default: standard output)");

  // cmsv
  auto* cm = app.add_subcommand("cmsv", "q-ratio constrained minimal singular value estimate");
  std::string cm_q = "2", cm_matrix, cm_out;
  double cm_s = 1.0;
  int cm_starts = 100, cm_iters = 500;
  std::uint64_t cm_seed = 0x636d;
  cm->add_option("--q", cm_q, "Ratio order");
  cm->add_option("--s", cm_s, "Sparsity level s")->required();
  cm->add_option("--matrix", cm_matrix, "Matrix file")->required();
  cm->add_option("--starts", cm_starts, "Random starts")->check(CLI::PositiveNumber);
  cm->add_option("--iterations", cm_iters, "Gradient iterations per start")->check(CLI::PositiveNumber);
  cm->add_option("--seed", cm_seed, "Master seed");
  cm->add_option("--out", cm_out, "JSON output (default: standard output)");

  // toy
  auto* toy = app.add_subcommand("toy", "Objective scans on the 5 x 6 toy system");
  std::string toy_out = "toy";
  toy->add_option("--out", toy_out, "Output directory");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run an experiment");
  std::string be_spec, be_out, be_experiment;
  bool be_full = false;
  bench_cmd->add_option("--spec", be_spec, "key = value config file");
  bench_cmd->add_option("--experiment", be_experiment,
                        "Preset: phase_transition, comparison, agreement, ratio_comparison or toy");
  bench_cmd->add_option("--out", be_out, "Output directory")->required();
  bench_cmd->add_flag("--full", be_full, "Published sizes (100 replications, 64 x 1024 comparisons)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      EnsembleSpec es;
      es.kind = parse_ensemble_kind(gen_kind);
      es.m = gen_m;
      es.n = gen_n;
      es.oversampling = gen_f;
      es.seed = gen_seed;
      for (const auto& w : validate(es)) std::cerr << "warning: " << w << "\n";
      if ((!gen_x.empty() || !gen_y.empty()) && gen_k < 1) {
        throw InvalidArgument("--x-out / --y-out need --k >= 1");
      }
      const Matrix a = make_matrix(es);
      io::write_matrix_file(gen_out, a);
      if (gen_k >= 1) {
        const GroundTruth x = sparse_signal(gen_n, gen_k, derive_seed(gen_seed, {1}));
        Vector y = a * x.signal;
        if (gen_sigma > 0.0) {
          const Vector noise = gaussian_noise(gen_m, gen_sigma, derive_seed(gen_seed, {2}));
          y += noise;
          std::cerr << "noise norm (use as --eta): " << noise.norm() << "\n";
        }
        if (!gen_x.empty()) io::write_vector_file(gen_x, x.signal);
        if (!gen_y.empty()) io::write_vector_file(gen_y, y);
      }
      return kOk;
    }

    if (*sp) {
      const NormOrder q = parse_q(sp_q);
      const Vector v = io::read_vector_file(sp_vec);
      const SparsityValue s = q_ratio_sparsity(v, q);
      std::cout.precision(17);
      std::cout << "q,value,entropy\n" << q.to_string() << "," << s.value << "," << s.entropy << "\n";
      std::cout << "index,pi\n";
      for (Index i = 0; i < s.normalized_profile.size(); ++i) {
        std::cout << i << "," << s.normalized_profile[i] << "\n";
      }
      return kOk;
    }

    if (*solve) {
      const NormOrder q = parse_q(so_q);
      const RecoveryProblem p(io::read_matrix_file(so_matrix), io::read_vector_file(so_y), so_eta, q);
      const bench::Method method = bench::parse_method(so_method);
      SolveReport rep;
      switch (method) {
        case bench::Method::pm: {
          PmOptions o;
          o.delta = so_delta;
          o.dca.restarts = so_restarts;
          o.dca.seed = so_seed;
          rep = pm_solve(p, o);
          break;
        }
        case bench::Method::ccp: {
          CcpOptions o;
          o.cap_factor = so_cap;
          o.restarts = so_restarts;
          o.seed = so_seed;
          rep = ccp_solve(p, o);
          break;
        }
        case bench::Method::lp_inf: {
          LpOptions o;
          o.cap_factor = so_cap;
          rep = lp_solve_linf(p, o);
          break;
        }
        case bench::Method::bpdn: rep = bpdn_solve(p); break;
        case bench::Method::l1l2: {
          DcaOptions o;
          o.restarts = 0;
          rep = l1_minus_l2_solve(p, o);
          break;
        }
      }
      json j = report_json(rep, q);
      j["config"] = {{"method", so_method}, {"q", q_json(q)},          {"matrix", so_matrix},
                     {"y", so_y},           {"eta", so_eta},           {"a_cap", so_cap},
                     {"delta", so_delta},   {"restarts", so_restarts}, {"seed", so_seed}};
      emit(j, so_out);
      if (solver_failed(rep.termination)) {
        std::cerr << "solve: " << to_string(rep.termination) << "\n";
        return kSolverFailure;
      }
      return kOk;
    }

    if (*fv) {
      const NormOrder q = parse_q(fv_q);
      const RecoveryProblem p(io::read_matrix_file(fv_matrix), io::read_vector_file(fv_y), fv_eta, q);
      DcaOptions o;
      o.restarts = fv_restarts;
      o.seed = fv_seed;
      const QSolution s = dca_solve_Q(p, fv_lambda, o);
      json j;
      j["lambda"] = fv_lambda;
      j["q"] = q_json(q);
      j["f_value"] = s.ray ? json("-inf") : number(s.f_value);
      j["termination"] = to_string(s.termination);
      j["iterations"] = s.iterations;
      j["x"] = vec_json(s.x);
      emit(j, fv_out);
      return solver_failed(s.termination) ? kSolverFailure : kOk;
    }

    if (*kr) {
      const NormOrder q = parse_q(kr_q);
      require_ratio_order(q);
      const Matrix a = io::read_matrix_file(kr_matrix);
      KernelOptions o;
      o.starts = kr_starts;
      o.seed = kr_seed;
      o.threads = g.threads;
      const SufficientCondition sc = sufficient_condition_check(a, q, kr_k, o);
      CertificateReport c;
      c.q = q;
      c.k = kr_k;
      c.kernel_ratio_inf = sc.kernel.value;
      c.kernel_ratio_exact = sc.kernel.exact;
      c.sufficient_k = sc.threshold;
      if (!sc.kernel.exact) c.notes.push_back("finite q: kernel ratio is a multi-start upper bound");
      json j = certificate_json(c);
      j["sufficient_condition_holds"] = sc.holds;
      j["linear_programs"] = sc.kernel.linear_programs;
      emit(j, kr_out);
      return kOk;
    }

    if (*cm) {
      const NormOrder q = parse_q(cm_q);
      const Matrix a = io::read_matrix_file(cm_matrix);
      CmsvOptions o;
      o.starts = cm_starts;
      o.iterations = cm_iters;
      o.seed = cm_seed;
      o.threads = g.threads;
      const CmsvEstimate est = cmsv_estimate(a, q, cm_s, o);
      CertificateReport c;
      c.q = q;
      c.cmsv_estimate = est.value;
      c.cmsv_level = est.level;
      c.cmsv_exact = est.exact;
      c.notes.push_back("cmsv is the best value found by a multi-start search: an upper bound");
      json j = certificate_json(c);
      j["minimizer"] = vec_json(est.minimizer);
      emit(j, cm_out);
      return kOk;
    }

    if (*toy) {
      const bench::ToyScan scan = bench::run_toy_scan();
      bench::write_toy_files(toy_out, scan);
      for (const auto& c : scan.sparsity) {
        std::cerr << c.label << " local minimizers:";
        for (double t : c.local_minimizers) std::cerr << " " << t;
        std::cerr << "\n";
      }
      return kOk;
    }

    if (*bench_cmd) {
      if (!be_spec.empty() && !be_experiment.empty()) throw InvalidArgument("use either --spec or --experiment");
      bench::ExperimentSpec spec;
      if (!be_spec.empty()) {
        std::ifstream in(be_spec);
        if (!in) throw InvalidArgument("cannot open config file " + be_spec);
        std::stringstream text;
        text << in.rdbuf();
        if (be_full) text << "\nfull = true\n";
        spec = bench::parse_spec(text);
      } else {
        spec = bench::default_spec(
            be_experiment.empty() ? bench::Experiment::phase_transition : bench::parse_experiment(be_experiment),
            be_full);
      }
      if (app.get_option("--threads")->count()) spec.threads = g.threads;
      const auto files = bench::run_experiment(spec, be_out);
      for (const auto& f : files) std::cerr << "wrote " << f << "\n";
      return kOk;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
