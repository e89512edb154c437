#include "qratio/bench.hpp"

#include "parallel.hpp"
#include "qratio/sparsity.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace qratio::bench {
namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::string q_text(const std::optional<NormOrder>& q) { return q ? q->to_string() : "-"; }

double q_key(const std::optional<NormOrder>& q) {
  if (!q) return -1.0;
  return q->is_infinite() ? std::numeric_limits<double>::infinity() : q->value();
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidArgument("config: " + key + " expects an integer, got '" + v + "'");
  }
}

std::uint64_t parse_seed(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long d = std::stoull(v, &used, 0);
    if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidArgument("config: " + key + " expects a nonnegative integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("config: " + key + " expects true or false, got '" + v + "'");
}

std::vector<Index> parse_index_list(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  for (const std::string& item : split_list(v)) {
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(static_cast<Index>(parse_int(key, item)));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    const long long first = parse_int(key, trim(item.substr(0, c1)));
    const long long last = parse_int(key, trim(item.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1)));
    const long long step = c2 == std::string::npos ? 1 : parse_int(key, trim(item.substr(c2 + 1)));
    if (step <= 0) throw InvalidArgument("config: " + key + " range step must be positive");
    for (long long i = first; i <= last; i += step) out.push_back(static_cast<Index>(i));
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& fmt_item) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += fmt_item(items[i]);
  }
  return out;
}

std::vector<Method> sorted_methods(std::vector<Method> m) {
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

std::vector<NormOrder> sorted_orders(std::vector<NormOrder> q) {
  std::sort(q.begin(), q.end(), [](const NormOrder& a, const NormOrder& b) { return q_key(a) < q_key(b); });
  q.erase(std::unique(q.begin(), q.end()), q.end());
  return q;
}

struct Instance {
  Matrix a;
  GroundTruth truth;
  RecoveryProblem problem;
};

Instance make_instance(const EnsembleSpec& base, Index k, double sigma, std::uint64_t seed, const NormOrder& q) {
  EnsembleSpec es = base;
  es.seed = derive_seed(seed, {0});
  Matrix a = make_matrix(es);
  GroundTruth truth = sparse_signal(es.n, k, derive_seed(seed, {1}));
  Vector y = a * truth.signal;
  double eta = 0.0;
  if (sigma > 0.0) {
    const Vector noise = gaussian_noise(es.m, sigma, derive_seed(seed, {2}));
    y += noise;
    // The realized noise norm keeps the truth feasible.
    eta = noise.norm();
  }
  RecoveryProblem problem(a, y, eta, q);
  return Instance{std::move(a), std::move(truth), std::move(problem)};
}

SolveReport solve_with(const ExperimentSpec& spec, Method method, const RecoveryProblem& p, std::uint64_t seed) {
  const std::uint64_t solver_seed = derive_seed(seed, {3});
  switch (method) {
    case Method::pm: {
      PmOptions o;
      o.delta = spec.delta;
      o.dca.restarts = spec.restarts;
      o.dca.seed = solver_seed;
      return pm_solve(p, o);
    }
    case Method::ccp: {
      CcpOptions o;
      o.cap_factor = spec.cap_factor;
      o.restarts = spec.restarts;
      o.seed = solver_seed;
      return ccp_solve(p, o);
    }
    case Method::lp_inf: {
      LpOptions o;
      o.cap_factor = spec.cap_factor;
      return lp_solve_linf(p, o);
    }
    case Method::bpdn: return bpdn_solve(p);
    case Method::l1l2: {
      DcaOptions o;
      o.restarts = 0;
      return l1_minus_l2_solve(p.with_order(NormOrder::finite(2.0)), o);
    }
  }
  throw InvalidArgument("unknown method");
}

double relative_error(const Vector& x_hat, const Vector& x) {
  const double n = x.norm();
  return n > 0.0 ? (x_hat - x).norm() / n : x_hat.norm();
}

void write_file(const std::filesystem::path& path, const std::string& content, std::vector<std::string>& written) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  written.push_back(path.string());
}

template <class F>
std::string to_text(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

}  // namespace

Matrix toy_matrix() {
  Matrix a(5, 6);
  a << 1, -1, 0, 0, 0, 0,
       1, 0, -1, 0, 0, 0,
       0, 1, 1, 1, 0, 0,
       2, 2, 0, 0, 1, 0,
       1, 1, 0, 0, 0, -1;
  return a;
}

Vector toy_measurements() {
  Vector y(5);
  y << 0, 0, 20, 40, 18;
  return y;
}

Vector toy_family(double t) {
  Vector z(6);
  z << t, t, t, 20 - 2 * t, 40 - 4 * t, 2 * (t - 9);
  return z;
}

Vector toy_solution() { return toy_family(0.0); }

RecoveryProblem toy_problem(const NormOrder& q, double eta) {
  return RecoveryProblem(toy_matrix(), toy_measurements(), eta, q);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::pm: return "pm";
    case Method::ccp: return "ccp";
    case Method::lp_inf: return "lp-inf";
    case Method::bpdn: return "bpdn";
    case Method::l1l2: return "l1l2";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "pm") return Method::pm;
  if (text == "ccp") return Method::ccp;
  if (text == "lp-inf" || text == "lp") return Method::lp_inf;
  if (text == "bpdn") return Method::bpdn;
  if (text == "l1l2") return Method::l1l2;
  throw InvalidArgument("unknown method '" + text + "' (expected pm, ccp, lp-inf, bpdn or l1l2)");
}

bool uses_q(Method m) { return m == Method::pm || m == Method::ccp || m == Method::lp_inf; }

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::phase_transition: return "phase_transition";
    case Experiment::comparison: return "comparison";
    case Experiment::agreement: return "agreement";
    case Experiment::ratio_comparison: return "ratio_comparison";
    case Experiment::toy: return "toy";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& text) {
  for (Experiment e : {Experiment::phase_transition, Experiment::comparison, Experiment::agreement,
                       Experiment::ratio_comparison, Experiment::toy}) {
    if (text == to_string(e)) return e;
  }
  throw InvalidArgument("unknown experiment '" + text + "'");
}

ExperimentSpec default_spec(Experiment e, bool full) {
  ExperimentSpec s;
  s.name = to_string(e);
  s.experiment = e;
  s.full = full;
  s.ensemble.m = 64;
  s.ensemble.n = 256;
  s.replications = full ? 100 : 20;
  switch (e) {
    case Experiment::phase_transition:
      s.q_grid = {NormOrder::finite(1.1), NormOrder::finite(1.5), NormOrder::finite(2.0), NormOrder::finite(5.0),
                  NormOrder::infinity()};
      s.sparsity_grid = parse_index_list("sparsity", "6:32:2");
      s.methods = {Method::ccp, Method::bpdn};
      break;
    case Experiment::comparison:
      s.q_grid = {NormOrder::finite(1.5)};
      s.sparsity_grid = parse_index_list("sparsity", "2:24:2");
      s.methods = {Method::ccp, Method::bpdn, Method::l1l2};
      if (full) s.ensemble.n = 1024;
      break;
    case Experiment::agreement:
      s.replications = 1;
      s.q_grid = {NormOrder::finite(2.0), NormOrder::infinity()};
      s.methods = {Method::pm, Method::ccp, Method::lp_inf};
      break;
    case Experiment::ratio_comparison:
      s.ensemble.kind = EnsembleKind::oversampled_dct;
      s.oversampling_grid = {2.0, 5.0};
      s.q_grid = {NormOrder::finite(1.5)};
      s.sparsity_grid = parse_index_list("sparsity", "2:24:2");
      s.methods = {Method::pm};
      s.replications = 20;
      break;
    case Experiment::toy:
      s.replications = 1;
      s.methods.clear();
      break;
  }
  return s;
}

double noise_bound_for(double sigma, Index m) {
  if (!(sigma > 0.0)) return 0.0;
  return sigma * std::sqrt(static_cast<double>(m));
}

ExperimentSpec parse_spec(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(fmt::format("config line {}: expected key = value", line_no));
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  Experiment experiment = Experiment::phase_transition;
  bool full = false;
  for (const auto& [k, v] : entries) {
    if (k == "experiment") experiment = parse_experiment(v);
    if (k == "full") full = parse_bool(k, v);
  }
  ExperimentSpec s = default_spec(experiment, full);
  for (const auto& [k, v] : entries) {
    if (k == "experiment" || k == "full") continue;
    if (k == "name") {
      s.name = v;
    } else if (k == "ensemble") {
      s.ensemble.kind = parse_ensemble_kind(v);
    } else if (k == "m") {
      s.ensemble.m = static_cast<Index>(parse_int(k, v));
    } else if (k == "n") {
      s.ensemble.n = static_cast<Index>(parse_int(k, v));
    } else if (k == "oversampling") {
      s.ensemble.oversampling = parse_double(k, v);
    } else if (k == "oversampling_grid") {
      s.oversampling_grid.clear();
      for (const auto& item : split_list(v)) s.oversampling_grid.push_back(parse_double(k, item));
    } else if (k == "sparsity") {
      s.sparsity_grid = parse_index_list(k, v);
    } else if (k == "q") {
      s.q_grid.clear();
      for (const auto& item : split_list(v)) s.q_grid.push_back(NormOrder::parse(item));
    } else if (k == "methods") {
      s.methods.clear();
      for (const auto& item : split_list(v)) s.methods.push_back(parse_method(item));
    } else if (k == "replications") {
      s.replications = static_cast<int>(parse_int(k, v));
    } else if (k == "success_threshold") {
      s.success_threshold = parse_double(k, v);
    } else if (k == "noise_sigma") {
      s.noise_sigma = parse_double(k, v);
    } else if (k == "master_seed") {
      s.master_seed = parse_seed(k, v);
    } else if (k == "restarts") {
      s.restarts = static_cast<int>(parse_int(k, v));
    } else if (k == "cap_factor") {
      s.cap_factor = parse_double(k, v);
    } else if (k == "delta") {
      s.delta = parse_double(k, v);
    } else if (k == "kernel_starts") {
      s.kernel_starts = static_cast<int>(parse_int(k, v));
    } else if (k == "threads") {
      s.threads = static_cast<int>(parse_int(k, v));
    } else {
      throw InvalidArgument("config: unknown key '" + k + "'");
    }
  }
  validate(s);
  return s;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path);
  return parse_spec(in);
}

std::map<std::string, std::string> spec_entries(const ExperimentSpec& s) {
  std::map<std::string, std::string> e;
  e["name"] = s.name;
  e["experiment"] = to_string(s.experiment);
  e["full"] = s.full ? "true" : "false";
  e["ensemble"] = to_string(s.ensemble.kind);
  e["m"] = std::to_string(s.ensemble.m);
  e["n"] = std::to_string(s.ensemble.n);
  e["oversampling"] = num(s.ensemble.oversampling);
  e["oversampling_grid"] = join(s.oversampling_grid, [](double d) { return num(d); });
  e["sparsity"] = join(s.sparsity_grid, [](Index k) { return std::to_string(k); });
  e["q"] = join(s.q_grid, [](const NormOrder& q) { return q.to_string(); });
  e["methods"] = join(s.methods, [](Method m) { return to_string(m); });
  e["replications"] = std::to_string(s.replications);
  e["success_threshold"] = num(s.success_threshold);
  e["noise_sigma"] = num(s.noise_sigma);
  e["master_seed"] = std::to_string(s.master_seed);
  e["restarts"] = std::to_string(s.restarts);
  e["cap_factor"] = num(s.cap_factor);
  e["delta"] = num(s.delta);
  e["kernel_starts"] = std::to_string(s.kernel_starts);
  e["threads"] = std::to_string(s.threads);
  return e;
}

void validate(const ExperimentSpec& s) {
  if (s.replications < 1) throw InvalidArgument("spec: replications must be >= 1");
  if (!(s.success_threshold > 0.0)) throw InvalidArgument("spec: success_threshold must be > 0");
  if (!(s.noise_sigma >= 0.0)) throw InvalidArgument("spec: noise_sigma must be >= 0");
  if (s.restarts < 0) throw InvalidArgument("spec: restarts must be >= 0");
  if (s.kernel_starts < 1) throw InvalidArgument("spec: kernel_starts must be >= 1");
  if (s.threads < 0) throw InvalidArgument("spec: threads must be >= 0");
  validate(s.ensemble);
  for (const NormOrder& q : s.q_grid) require_ratio_order(q);
  for (Index k : s.sparsity_grid) {
    if (k < 1 || k > s.ensemble.n) throw InvalidArgument("spec: sparsity levels must lie in [1, n]");
  }
  for (double f : s.oversampling_grid) {
    if (!(f > 0.0)) throw InvalidArgument("spec: oversampling factors must be positive");
  }
  const bool sweep = s.experiment == Experiment::phase_transition || s.experiment == Experiment::comparison;
  if (sweep) {
    if (s.methods.empty()) throw InvalidArgument("spec: methods must not be empty");
    if (s.sparsity_grid.empty()) throw InvalidArgument("spec: sparsity grid must not be empty");
    const bool needs_q = std::any_of(s.methods.begin(), s.methods.end(), uses_q);
    if (needs_q && s.q_grid.empty()) throw InvalidArgument("spec: q grid must not be empty");
  }
  if (s.experiment == Experiment::ratio_comparison && (s.q_grid.empty() || s.sparsity_grid.empty())) {
    throw InvalidArgument("spec: ratio_comparison needs q and sparsity");
  }
}

std::uint64_t row_seed(const ExperimentSpec& spec, Index k, int replication) {
  return derive_seed(spec.master_seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(replication)});
}

ResultRow run_row(const ExperimentSpec& spec, Method method, const std::optional<NormOrder>& q, Index k,
                  int replication) {
  ResultRow row;
  row.method = method;
  row.q = uses_q(method) ? q : std::nullopt;
  row.k = k;
  row.replication = replication;
  row.seed = row_seed(spec, k, replication);
  const auto start = Clock::now();
  try {
    const NormOrder order = row.q ? *row.q : NormOrder::finite(2.0);
    if (method == Method::lp_inf && !order.is_infinite()) throw InvalidArgument("lp-inf requires q = inf");
    const Instance inst = make_instance(spec.ensemble, k, spec.noise_sigma, row.seed, order);
    const SolveReport rep = solve_with(spec, method, inst.problem, row.seed);
    row.relative_error = relative_error(rep.solution, inst.truth.signal);
    row.termination = to_string(rep.termination);
  } catch (const std::exception& e) {
    row.relative_error = std::numeric_limits<double>::quiet_NaN();
    row.termination = std::string("error: ") + e.what();
  }
  row.success = row.relative_error <= spec.success_threshold;
  row.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return row;
}

PhaseTransition run_phase_transition(const ExperimentSpec& spec) {
  validate(spec);
  struct Cell {
    Method method;
    std::optional<NormOrder> q;
    Index k;
    int rep;
  };
  std::vector<Index> ks = spec.sparsity_grid;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<Cell> cells;
  for (Method m : sorted_methods(spec.methods)) {
    std::vector<std::optional<NormOrder>> qs;
    if (uses_q(m)) {
      for (const NormOrder& q : sorted_orders(spec.q_grid)) {
        if (m == Method::lp_inf && !q.is_infinite()) continue;
        qs.emplace_back(q);
      }
    } else {
      qs.emplace_back(std::nullopt);
    }
    for (const auto& q : qs) {
      for (Index k : ks) {
        for (int r = 0; r < spec.replications; ++r) cells.push_back({m, q, k, r});
      }
    }
  }
  PhaseTransition out;
  out.rows.resize(cells.size());
  detail::parallel_for(cells.size(), spec.threads, [&](std::size_t i) {
    const Cell& c = cells[i];
    out.rows[i] = run_row(spec, c.method, c.q, c.k, c.rep);
  });
  out.summary = summarize(out.rows);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  for (const ResultRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
      return s.method == r.method && s.q == r.q && s.k == r.k;
    });
    if (it == out.end()) {
      out.push_back(SummaryRow{r.method, r.q, r.k, 0, 0, 0.0});
      it = out.end() - 1;
    }
    ++it->trials;
    if (r.success) ++it->successes;
  }
  for (SummaryRow& s : out) s.success_rate = static_cast<double>(s.successes) / s.trials;
  std::stable_sort(out.begin(), out.end(), [](const SummaryRow& a, const SummaryRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (q_key(a.q) != q_key(b.q)) return q_key(a.q) < q_key(b.q);
    return a.k < b.k;
  });
  return out;
}

const SummaryRow& find_summary(const std::vector<SummaryRow>& summary, Method method,
                               const std::optional<NormOrder>& q, Index k) {
  for (const SummaryRow& s : summary) {
    if (s.method == method && s.q == q && s.k == k) return s;
  }
  throw InvalidArgument(fmt::format("no summary entry for {} q={} k={}", to_string(method), q_text(q), k));
}

std::vector<AgreementCase> default_agreement_cases() {
  const NormOrder two = NormOrder::finite(2.0);
  const NormOrder inf = NormOrder::infinity();
  return {
      {"q2_k30_noiseless", two, 30, 0.0, {Method::pm, Method::ccp}},
      {"q2_k15_sigma0.1", two, 15, 0.1, {Method::pm, Method::ccp}},
      {"qinf_k10_noiseless", inf, 10, 0.0, {Method::pm, Method::ccp, Method::lp_inf}},
      {"qinf_k10_sigma0.01", inf, 10, 0.01, {Method::pm, Method::ccp, Method::lp_inf}},
  };
}

Agreement run_agreement(const ExperimentSpec& spec, const std::vector<AgreementCase>& cases) {
  struct Job {
    std::size_t c;
    Method m;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    for (Method m : cases[c].methods) jobs.push_back({c, m});
  }
  Agreement out;
  out.rows.resize(jobs.size());
  detail::parallel_for(jobs.size(), spec.threads, [&](std::size_t i) {
    const AgreementCase& ac = cases[jobs[i].c];
    AgreementRow& row = out.rows[i];
    row.label = ac.label;
    row.method = jobs[i].m;
    // Keyed on k so the noiseless and noisy cases share matrix and signal.
    row.seed = derive_seed(spec.master_seed, {static_cast<std::uint64_t>(ac.k)});
    const auto start = Clock::now();
    try {
      const Instance inst = make_instance(spec.ensemble, ac.k, ac.sigma, row.seed, ac.q);
      const SolveReport rep = solve_with(spec, row.method, inst.problem, row.seed);
      row.solution = rep.solution;
      row.relative_error = relative_error(rep.solution, inst.truth.signal);
      row.termination = to_string(rep.termination);
    } catch (const std::exception& e) {
      row.relative_error = std::numeric_limits<double>::quiet_NaN();
      row.termination = std::string("error: ") + e.what();
    }
    row.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  });
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    for (std::size_t j = i + 1; j < out.rows.size(); ++j) {
      const AgreementRow& a = out.rows[i];
      const AgreementRow& b = out.rows[j];
      if (a.label != b.label) continue;
      AgreementPair p{a.label, a.method, b.method, std::numeric_limits<double>::quiet_NaN()};
      if (a.solution.size() && a.solution.size() == b.solution.size()) {
        p.relative_difference = relative_error(a.solution, b.solution);
      }
      out.pairs.push_back(p);
    }
  }
  return out;
}

Agreement run_agreement(const ExperimentSpec& spec) { return run_agreement(spec, default_agreement_cases()); }

std::vector<RatioRow> run_ratio_table(const ExperimentSpec& spec) {
  validate(spec);
  const NormOrder q = spec.q_grid.front();
  struct MatrixJob {
    double f;
    std::size_t fi;
    int j;
  };
  std::vector<MatrixJob> mats;
  for (std::size_t fi = 0; fi < spec.oversampling_grid.size(); ++fi) {
    for (int j = 0; j < spec.replications; ++j) mats.push_back({spec.oversampling_grid[fi], fi, j});
  }
  const std::size_t per = spec.sparsity_grid.size();
  std::vector<RatioRow> rows(mats.size() * per);
  // One task per matrix: the kernel value is shared by every sparsity level.
  detail::parallel_for(mats.size(), spec.threads, [&](std::size_t i) {
    const MatrixJob& mj = mats[i];
    EnsembleSpec es = spec.ensemble;
    es.kind = EnsembleKind::oversampled_dct;
    es.oversampling = mj.f;
    es.seed = derive_seed(spec.master_seed, {mj.fi, static_cast<std::uint64_t>(mj.j)});
    const Matrix a = make_matrix(es);
    KernelOptions ko;
    ko.starts = spec.kernel_starts;
    ko.seed = derive_seed(es.seed, {1});
    ko.threads = 1;
    const KernelRatio kernel = kernel_ratio_inf(a, q, ko);
    for (std::size_t si = 0; si < per; ++si) {
      RatioRow& r = rows[i * per + si];
      r.oversampling = mj.f;
      r.matrix = mj.j;
      r.s = spec.sparsity_grid[si];
      r.seed = derive_seed(es.seed, {2, static_cast<std::uint64_t>(r.s)});
      const GroundTruth x = sparse_signal(es.n, r.s, r.seed);
      PmOptions pm;
      pm.delta = spec.delta;
      pm.dca.restarts = spec.restarts;
      pm.dca.seed = derive_seed(r.seed, {3});
      const RatioComparison rc = ratio_comparison(a, x.signal, q, kernel, pm);
      r.constrained_inf = rc.constrained_inf;
      r.kernel_inf = rc.kernel_inf;
      r.kernel_exact = rc.kernel_exact;
    }
  });
  return rows;
}

std::vector<double> local_minimizers(const std::vector<double>& t, const std::vector<double>& values) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] < values[i - 1] && values[i] < values[i + 1]) out.push_back(t[i]);
  }
  return out;
}

ToyScan run_toy_scan() {
  ToyScan scan;
  for (int i = -500; i <= 1500; ++i) scan.t.push_back(i / 100.0);
  const std::vector<std::pair<std::string, NormOrder>> orders = {
      {"s_0", NormOrder::finite(0.0)},       {"s_0.5", NormOrder::finite(0.5)}, {"s_1.5", NormOrder::finite(1.5)},
      {"s_2", NormOrder::finite(2.0)},       {"s_inf", NormOrder::infinity()},
  };
  for (const auto& [label, q] : orders) {
    ToyCurve c;
    c.label = label;
    for (double t : scan.t) c.values.push_back(q_ratio_sparsity(toy_family(t), q).value);
    c.local_minimizers = local_minimizers(scan.t, c.values);
    scan.sparsity.push_back(std::move(c));
  }
  const Vector xbar = toy_solution();
  scan.lambda_bar = xbar.norm() / l1_norm(xbar);
  const std::vector<std::pair<std::string, double>> lambdas = {
      {"lambda_0.5", 0.5}, {"lambda_bar", scan.lambda_bar}, {"lambda_1", 1.0}};
  for (const auto& [label, lambda] : lambdas) {
    ToyCurve c;
    c.label = label;
    for (double t : scan.t) {
      const Vector z = toy_family(t);
      c.values.push_back(lambda * l1_norm(z) - z.norm());
    }
    c.local_minimizers = local_minimizers(scan.t, c.values);
    scan.parametric.push_back(std::move(c));
  }
  return scan;
}

void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "method,q,k,replication,seed,relative_error,success,termination\n";
  for (const ResultRow& r : rows) {
    out << to_string(r.method) << ',' << q_text(r.q) << ',' << r.k << ',' << r.replication << ',' << r.seed << ','
        << num(r.relative_error) << ',' << (r.success ? 1 : 0) << ',' << '"' << r.termination << '"' << '\n';
  }
}

void write_timings_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "method,q,k,replication,wall_time\n";
  for (const ResultRow& r : rows) {
    out << to_string(r.method) << ',' << q_text(r.q) << ',' << r.k << ',' << r.replication << ','
        << fmt::format("{:.6f}", r.wall_time) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "method,q,k,trials,successes,success_rate\n";
  for (const SummaryRow& s : summary) {
    out << to_string(s.method) << ',' << q_text(s.q) << ',' << s.k << ',' << s.trials << ',' << s.successes << ','
        << num(s.success_rate) << '\n';
  }
}

void write_agreement_csv(std::ostream& out, const Agreement& a) {
  out << "case,method,seed,relative_error,wall_time,termination\n";
  for (const AgreementRow& r : a.rows) {
    out << r.label << ',' << to_string(r.method) << ',' << r.seed << ',' << num(r.relative_error) << ','
        << fmt::format("{:.6f}", r.wall_time) << ",\"" << r.termination << "\"\n";
  }
}

void write_agreement_pairs_csv(std::ostream& out, const Agreement& a) {
  out << "case,first,second,relative_difference\n";
  for (const AgreementPair& p : a.pairs) {
    out << p.label << ',' << to_string(p.first) << ',' << to_string(p.second) << ',' << num(p.relative_difference)
        << '\n';
  }
}

void write_ratio_csv(std::ostream& out, const std::vector<RatioRow>& rows) {
  out << "oversampling,matrix,s,seed,constrained_inf,kernel_inf,kernel_exact\n";
  for (const RatioRow& r : rows) {
    out << num(r.oversampling) << ',' << r.matrix << ',' << r.s << ',' << r.seed << ',' << num(r.constrained_inf)
        << ',' << num(r.kernel_inf) << ',' << (r.kernel_exact ? 1 : 0) << '\n';
  }
}

namespace {
void write_curves(std::ostream& out, const std::vector<double>& t, const std::vector<ToyCurve>& curves) {
  out << 't';
  for (const ToyCurve& c : curves) out << ',' << c.label;
  out << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << fmt::format("{:.2f}", t[i]);
    for (const ToyCurve& c : curves) out << ',' << num(c.values[i]);
    out << '\n';
  }
}
}  // namespace

void write_toy_sparsity_csv(std::ostream& out, const ToyScan& scan) { write_curves(out, scan.t, scan.sparsity); }

void write_toy_parametric_csv(std::ostream& out, const ToyScan& scan) {
  write_curves(out, scan.t, scan.parametric);
}

void write_toy_minimizers_csv(std::ostream& out, const ToyScan& scan) {
  out << "curve,t,value\n";
  auto emit = [&](const std::vector<ToyCurve>& curves) {
    for (const ToyCurve& c : curves) {
      for (double t : c.local_minimizers) {
        const auto idx = static_cast<std::size_t>(std::lround((t - scan.t.front()) * 100.0));
        out << c.label << ',' << fmt::format("{:.2f}", t) << ',' << num(c.values[idx]) << '\n';
      }
    }
  };
  emit(scan.sparsity);
  emit(scan.parametric);
}

void write_toy_files(const std::string& dir, const ToyScan& scan) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const std::filesystem::path d(dir);
  write_file(d / "toy_sparsity.csv", to_text([&](std::ostream& o) { write_toy_sparsity_csv(o, scan); }), written);
  write_file(d / "toy_parametric.csv", to_text([&](std::ostream& o) { write_toy_parametric_csv(o, scan); }),
             written);
  write_file(d / "toy_minimizers.csv", to_text([&](std::ostream& o) { write_toy_minimizers_csv(o, scan); }),
             written);
}

std::string meta_json(const ExperimentSpec& spec, std::size_t row_count) {
  nlohmann::ordered_json j;
  j["name"] = spec.name;
  j["experiment"] = to_string(spec.experiment);
  j["master_seed"] = spec.master_seed;
  j["rows"] = row_count;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : spec_entries(spec)) cfg[k] = v;
  j["config"] = cfg;
  j["noise_bound_rule"] = "eta = ||e||_2 of the realized noise draw; eta = 0 when noise_sigma = 0";
  switch (spec.experiment) {
    case Experiment::agreement:
      j["seed_rule"] = "case seed = derive_seed(master_seed, {k}); matrix, signal, noise and solver seeds derive "
                       "from it with paths {0}, {1}, {2}, {3}";
      break;
    case Experiment::ratio_comparison:
      j["seed_rule"] = "matrix seed = derive_seed(master_seed, {oversampling index, matrix}); kernel search "
                       "{1}; signal seed = derive_seed(matrix seed, {2, s}); solver {3} below the signal seed";
      break;
    default:
      j["seed_rule"] = "row seed = derive_seed(master_seed, {k, replication}); matrix, signal, noise and solver "
                       "seeds derive from it with paths {0}, {1}, {2}, {3}";
  }
  j["versions"] = {{"qratio", QRATIO_VERSION},
                   {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__},
                   {"rng", std::string(Rng::kAlgorithm)}};
  return j.dump(2) + "\n";
}

std::vector<std::string> run_experiment(const ExperimentSpec& spec, const std::string& dir) {
  validate(spec);
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  std::vector<std::string> written;
  std::size_t count = 0;
  switch (spec.experiment) {
    case Experiment::phase_transition:
    case Experiment::comparison: {
      const PhaseTransition pt = run_phase_transition(spec);
      count = pt.rows.size();
      write_file(d / "rows.csv", to_text([&](std::ostream& o) { write_rows_csv(o, pt.rows); }), written);
      write_file(d / "summary.csv", to_text([&](std::ostream& o) { write_summary_csv(o, pt.summary); }), written);
      write_file(d / "timings.csv", to_text([&](std::ostream& o) { write_timings_csv(o, pt.rows); }), written);
      break;
    }
    case Experiment::agreement: {
      const Agreement a = run_agreement(spec);
      count = a.rows.size();
      write_file(d / "agreement.csv", to_text([&](std::ostream& o) { write_agreement_csv(o, a); }), written);
      write_file(d / "agreement_pairs.csv", to_text([&](std::ostream& o) { write_agreement_pairs_csv(o, a); }),
                 written);
      break;
    }
    case Experiment::ratio_comparison: {
      const std::vector<RatioRow> rows = run_ratio_table(spec);
      count = rows.size();
      write_file(d / "ratios.csv", to_text([&](std::ostream& o) { write_ratio_csv(o, rows); }), written);
      break;
    }
    case Experiment::toy: {
      const ToyScan scan = run_toy_scan();
      count = scan.t.size();
      write_toy_files(dir, scan);
      for (const char* f : {"toy_sparsity.csv", "toy_parametric.csv", "toy_minimizers.csv"}) {
        written.push_back((d / f).string());
      }
      break;
    }
  }
  write_file(d / "meta.json", meta_json(spec, count), written);
  return written;
}

}  // namespace qratio::bench
