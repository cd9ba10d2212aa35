#include "dsm/suite.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "dsm/format.hpp"
#include "dsm/harness.hpp"

namespace dsm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json algorithm_block(const std::string& label) {
  if (label == "dsgdm" || label == "dsignsgd") return {{"variant", label}, {"tau_eta0", 0.1}};
  return {{"variant", label}};
}

}  // namespace

ExperimentConfig median_benchmark_config(const std::string& label, std::int64_t iterations, std::uint64_t seed) {
  return ExperimentConfig::from_json({
      {"problem", {{"kind", "median"}, {"anchors", {0.0, 1.0, 2.0, 3.0}}}},
      {"topology", {{"kind", "ring"}, {"d", 4}}},
      {"mixing", {{"kind", "metropolis"}}},
      {"algorithm", algorithm_block(label)},
      {"schedule", {{"schedule", "polynomial"}, {"eta0", 0.2}, {"p", 0.6}}},
      {"iterations", iterations},
      {"seed", seed},
      {"record_stride", 10},
      {"output_dir", "runs/median_" + label},
  });
}

ExperimentConfig mlp_benchmark_config(const std::string& label, std::uint64_t seed) {
  // Sign steps move every coordinate by the full step, so they take a
  // smaller base rate.
  const double eta0 = label == "dsignsgd" ? 0.01 : 0.1;
  return ExperimentConfig::from_json({
      {"problem",
       {{"kind", "relu_mlp"},
        {"input", 8},
        {"hidden", 16},
        {"samples", 512},
        {"batch_size", 16},
        {"teacher_hidden", 4},
        {"label_noise", 0.05},
        {"data_seed", 7},
        {"loss", "mse"}}},
      {"topology", {{"kind", "ring"}, {"d", 4}}},
      {"mixing", {{"kind", "metropolis"}}},
      {"algorithm", algorithm_block(label)},
      {"schedule",
       {{"schedule", "staircase"},
        {"eta0", eta0},
        {"factor", 0.2},
        {"boundaries", {60, 120, 160}},
        {"boundary_unit", "epoch"}}},
      {"iterations", 1600},
      {"seed", seed},
      {"record_stride", 10},
      {"output_dir", "runs/mlp_" + label},
  });
}

namespace {

const std::vector<std::string> kLabels = {"dsgd", "dsgdm", "dsignsgd", "dsgd_t"};
constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << "FAILED " << what << "; ";
    }
  }
  void note(const std::string& what) { detail << what << "; "; }
};

// Shared runs, computed on first use.
struct SuiteContext {
  SuiteOptions options;
  fs::path scratch;

  struct TimedRun {
    RunResult result;
    double seconds = 0.0;
  };
  std::map<std::string, TimedRun> median_runs;
  std::map<std::string, double> median_run_error;

  struct MlpSweep {
    std::vector<RunTrace> traces;
    double seconds = 0.0;
  };
  std::map<std::string, MlpSweep> mlp_runs;

  const TimedRun& median(const std::string& label) {
    auto it = median_runs.find(label);
    if (it != median_runs.end()) return it->second;
    const Experiment exp = build_experiment(median_benchmark_config(label));
    const auto t0 = Clock::now();
    RunResult r = run(exp.objective, exp.mixing, exp.algorithm, exp.schedule, exp.initial_point(exp.config.seed),
                      exp.config.seed, exp.options);
    return median_runs.emplace(label, TimedRun{std::move(r), seconds_since(t0)}).first->second;
  }

  const MlpSweep& mlp(const std::string& label) {
    auto it = mlp_runs.find(label);
    if (it != mlp_runs.end()) return it->second;
    MlpSweep sweep;
    const auto t0 = Clock::now();
    const Experiment exp = build_experiment(mlp_benchmark_config(label));
    for (std::uint64_t seed : kSeeds) {
      RunOutcome o = execute_and_write(exp, seed, scratch / "mlp_a" / label / ("seed_" + std::to_string(seed)));
      sweep.traces.push_back(std::move(o.result.trace));
    }
    sweep.seconds = seconds_since(t0);
    return mlp_runs.emplace(label, std::move(sweep)).first->second;
  }
};

// 1 ------------------------------------------------------------------------
void mixing_invariants(SuiteContext& ctx, Outcome& out) {
  std::vector<Topology> graphs;
  for (int d = 2; d <= 32; ++d) {
    graphs.push_back(build_ring(d));
    graphs.push_back(build_complete(d));
  }
  CounterRng pick(2024, 99);
  for (int g = 0; g < 50; ++g) {
    const int d = 2 + static_cast<int>(pick.uniform_index(31));
    const double p = pick.uniform(0.0, 0.5);
    graphs.push_back(build_random_connected(d, p, 1000 + g));
  }

  int checked = 0, failed = 0;
  double worst_contraction = 0.0;
  for (const auto& t : graphs) {
    if (!is_connected(t)) {
      ++failed;
      continue;
    }
    std::vector<Eigen::MatrixXd> candidates = {metropolis(t).matrix(),
                                               laplacian_weights(t, 1.0 / (1.0 + t.max_degree())).matrix()};
    for (auto& w : candidates) {
      if (ctx.options.corrupt_mixing) w(0, 0) += 1e-3;
      const MixingReport r = validate(w, t);
      ++checked;
      if (!r.all_passed()) {
        if (failed == 0) {
          for (const auto& c : r.checks)
            if (!c.passed) out.note("d=" + std::to_string(t.num_agents()) + " " + c.name + ": " + c.detail);
        }
        ++failed;
      }
      worst_contraction = std::max(worst_contraction, r.contraction);
    }
  }
  out.note(std::to_string(checked) + " matrices checked, worst contraction " + format_double(worst_contraction));
  out.require(failed == 0, std::to_string(failed) + " matrices failed the mixing-matrix checks");
  out.require(worst_contraction < 1.0, "contraction_factor < 1");
}

// 2 ------------------------------------------------------------------------
void spectral_spot_checks(SuiteContext&, Outcome& out) {
  const double c4 = contraction_factor(metropolis(build_ring(4)));
  const double c8 = contraction_factor(metropolis(build_ring(8)));
  // Circulant spectrum of the Metropolis ring: 1/3 + (2/3) cos(2 pi k / d).
  const double want8 = (1.0 + 2.0 * std::cos(std::numbers::pi / 4.0)) / 3.0;
  out.note("ring(4) " + format_double(c4) + ", ring(8) " + format_double(c8) + " vs " + format_double(want8));
  out.require(std::abs(c4 - 1.0 / 3.0) <= 1e-10, "ring(4) contraction = 1/3");
  out.require(std::abs(c8 - want8) <= 1e-10, "ring(8) contraction = (1 + 2 cos(pi/4))/3");
}

// 3 ------------------------------------------------------------------------
struct FdStats {
  int points = 0;
  int rejected = 0;
  double worst = 0.0;
};

FdStats fd_sweep(const GlobalObjective& g, CounterRng& rng, const std::function<Eigen::VectorXd()>& draw_point,
                 int points) {
  FdStats s;
  const int n = g.dimension();
  while (s.points < points) {
    const int i = static_cast<int>(rng.uniform_index(g.num_agents()));
    const AgentObjective& a = g.agent(i);
    const int j = static_cast<int>(rng.uniform_index(a.num_components()));
    const Eigen::VectorXd x = draw_point();
    const Eigen::VectorXd h = 1e-6 * (Eigen::VectorXd::Ones(n) + x.cwiseAbs());
    if (a.stencil_kink_margin(j, x, h) < 1e-7) {
      ++s.rejected;
      continue;
    }
    const Eigen::VectorXd sel = subgrad(a, j, x).g;
    Eigen::VectorXd fd(n);
    for (int c = 0; c < n; ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp(c) += h(c);
      xm(c) -= h(c);
      fd(c) = (a.component_value(j, xp) - a.component_value(j, xm)) / (xp(c) - xm(c));
    }
    const double rel = (sel - fd).cwiseAbs().maxCoeff() / std::max(1.0, sel.cwiseAbs().maxCoeff());
    s.worst = std::max(s.worst, rel);
    ++s.points;
  }
  return s;
}

void oracle_finite_differences(SuiteContext&, Outcome& out) {
  const auto t0 = Clock::now();
  CounterRng rng(31337, 3);

  const auto median = build_experiment(median_benchmark_config("dsgd")).objective;
  const auto l1 = build_experiment(ExperimentConfig::from_json({
                                       {"problem", {{"kind", "l1_quadratic"}, {"dimension", 5}, {"components", 4}, {"lambda", 0.5}}},
                                       {"topology", {{"kind", "ring"}, {"d", 4}}},
                                       {"algorithm", {{"variant", "dsgd"}}},
                                       {"schedule", {{"schedule", "polynomial"}, {"eta0", 0.1}, {"p", 0.6}}},
                                       {"iterations", 1},
                                       {"seed", 1},
                                   }))
                      .objective;
  const auto mlp = build_experiment(mlp_benchmark_config("dsgd")).objective;

  const std::vector<std::tuple<std::string, const GlobalObjective*, std::function<Eigen::VectorXd()>>> corpus = {
      {"median", median.get(), [&] { return Eigen::VectorXd::Constant(1, rng.uniform(-5.0, 10.0)); }},
      {"l1_quadratic", l1.get(),
       [&] {
         Eigen::VectorXd x(5);
         for (auto& v : x) v = 2.0 * rng.normal();
         return x;
       }},
      {"relu_mlp", mlp.get(),
       [&] {
         Eigen::VectorXd x(mlp->dimension());
         for (auto& v : x) v = 0.5 * rng.normal();
         return x;
       }},
  };
  for (const auto& [name, g, draw] : corpus) {
    const FdStats s = fd_sweep(*g, rng, draw, 1000);
    out.note(name + ": worst rel err " + format_double(s.worst) + " over " + std::to_string(s.points) +
             " points (" + std::to_string(s.rejected) + " near kinks skipped)");
    out.require(s.worst <= 1e-5, name + " finite-difference agreement within 1e-5");
  }
  const double secs = seconds_since(t0);
  out.require(secs < 30.0, "runtime < 30 s (took " + format_double(secs) + " s)");
}

// 4 ------------------------------------------------------------------------
// Scalar single-agent recursions written from the update formulas, with the
// component index drawn from the same per-agent stream the engine uses.
struct ScalarProblem {
  std::string name;
  std::vector<double> points;  // anchors or centers
  double lambda = 0.0;
  bool is_median = true;

  double subgradient(int j, double x) const {
    const double s = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    if (is_median) {
      const double r = x - points[j];
      return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    }
    return (x - points[j]) + lambda * s;
  }
};

std::vector<std::vector<double>> reference_trajectory(const ScalarProblem& p, const std::string& label, double x0,
                                                      double eta0, double expo, double tau_eta0,
                                                      std::uint64_t seed, std::int64_t iters) {
  CounterRng rng(seed, 0);
  auto draw = [&](double x) {
    const int j = static_cast<int>(rng.uniform_index(p.points.size()));
    return p.subgradient(j, x);
  };
  auto eta = [&](std::int64_t k) { return eta0 / std::pow(1.0 + static_cast<double>(k), expo); };
  auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };

  std::vector<std::vector<double>> traj;
  double x = x0;
  if (label == "dsgd") {
    for (std::int64_t k = 0; k < iters; ++k) {
      traj.push_back({x});
      const double d = draw(x);
      x = x * 1.0 - eta(k) * d;
    }
    traj.push_back({x});
  } else if (label == "dsgd_t") {
    double d = draw(x);
    double v = d;
    for (std::int64_t k = 0; k < iters; ++k) {
      traj.push_back({x});
      x = x * 1.0 - eta(k) * v;
      const double dn = draw(x);
      v = ((v + dn) - d) * 1.0;
      d = dn;
    }
    traj.push_back({x});
  } else {
    const bool sign = label == "dsignsgd";
    const double tau = tau_eta0 / eta0;
    const double d0 = draw(x);
    const double te0 = tau * eta0;
    double y = (1.0 - te0) * (d0 * 1.0) + te0 * d0;
    for (std::int64_t k = 0; k < iters; ++k) {
      traj.push_back({x, y});
      const double e = eta(k);
      const double te = tau * e;
      x = x * 1.0 - e * (sign ? sgn(y) : y);
      const double d = draw(x);
      y = (1.0 - te) * (y * 1.0) + te * d;
    }
    traj.push_back({x, y});
  }
  return traj;
}

void framework_reduction(SuiteContext&, Outcome& out) {
  const std::vector<ScalarProblem> problems = {
      {"median", {-1.0, 0.5, 3.0}, 0.0, true},
      {"l1_quadratic", {-1.0, 2.0, 0.3}, 0.5, false},
  };
  const std::int64_t iters = 2000;
  const std::uint64_t seed = 42;
  const double x0 = 2.5, eta0 = 0.1, expo = 0.6;
  int compared = 0;
  for (const auto& p : problems) {
    json problem = p.is_median
                       ? json{{"kind", "median"}, {"anchors", {p.points}}}
                       : json{{"kind", "l1_quadratic"}, {"lambda", p.lambda},
                              {"centers", {{{p.points[0]}, {p.points[1]}, {p.points[2]}}}}};
    problem["init"] = {{"mode", "point"}, {"x0", {x0}}};
    for (const auto& label : kLabels) {
      ExperimentConfig cfg = ExperimentConfig::from_json({
          {"problem", problem},
          {"topology", {{"kind", "edges"}, {"d", 1}, {"edges", json::array()}}},
          {"algorithm", algorithm_block(label)},
          {"schedule", {{"schedule", "polynomial"}, {"eta0", eta0}, {"p", expo}}},
          {"iterations", iters},
          {"seed", seed},
          {"record_stride", 1},
          {"history_capacity", iters + 1},
      });
      const Experiment exp = build_experiment(cfg);
      const RunResult r = run(exp.objective, exp.mixing, exp.algorithm, exp.schedule, exp.initial_point(seed), seed,
                              exp.options);
      const auto ref = reference_trajectory(p, label, x0, eta0, expo, 0.1, seed, iters);
      bool equal = r.history.size() == ref.size();
      std::int64_t first_bad = -1;
      for (std::int64_t k = 0; equal && k <= iters; ++k) {
        const Eigen::VectorXd& z = r.history.at(k);
        for (std::size_t c = 0; c < ref[k].size(); ++c) {
          if (std::memcmp(&z(static_cast<Eigen::Index>(c)), &ref[k][c], sizeof(double)) != 0) {
            equal = false;
            first_bad = k;
          }
        }
      }
      ++compared;
      out.require(equal, p.name + "/" + label + " bitwise equal to the scalar recursion (first mismatch at k=" +
                             std::to_string(first_bad) + ")");
    }
  }
  out.note(std::to_string(compared) + " trajectories of " + std::to_string(iters) + " steps compared bitwise");
}

// 5 ------------------------------------------------------------------------
void tracking_identity(SuiteContext&, Outcome& out) {
  std::vector<std::pair<std::string, ExperimentConfig>> runs;
  runs.emplace_back("median", median_benchmark_config("dsgd_t", 10'000));
  runs.emplace_back("l1_quadratic",
                    ExperimentConfig::from_json({
                        {"problem", {{"kind", "l1_quadratic"}, {"dimension", 5}, {"components", 4}, {"lambda", 0.5}}},
                        {"topology", {{"kind", "ring"}, {"d", 4}}},
                        {"algorithm", {{"variant", "dsgd_t"}}},
                        {"schedule", {{"schedule", "polynomial"}, {"eta0", 0.2}, {"p", 0.6}}},
                        {"iterations", 10'000},
                        {"seed", 1},
                    }));
  ExperimentConfig mlp = mlp_benchmark_config("dsgd_t");
  mlp.iterations = 10'000;
  runs.emplace_back("relu_mlp", mlp);
  for (const auto& [name, cfg] : runs) {
    const Experiment exp = build_experiment(cfg);
    try {
      const RunResult r = run(exp.objective, exp.mixing, exp.algorithm, exp.schedule,
                              exp.initial_point(cfg.seed), cfg.seed, exp.options);
      out.note(name + ": max |V1 - D1| = " + format_double(r.trace.max_tracking_deviation) + " over " +
               std::to_string(r.trace.iterations_completed) + " steps");
      out.require(!r.trace.diverged, name + " run completed");
      out.require(r.trace.max_tracking_deviation < 1e-9, name + " tracking deviation < 1e-9");
    } catch (const InternalConsistencyError& e) {
      out.require(false, name + ": " + e.what());
    }
  }
}

// 6 ------------------------------------------------------------------------
void consensus(SuiteContext& ctx, Outcome& out) {
  for (const auto& label : kLabels) {
    const auto& tr = ctx.median(label);
    const ConsensusDecayReport rep = consensus_decay_check(tr.result.trace, 1e-9, 100);
    out.note(label + ": tail-100 consensus " + format_double(rep.tail_mean_consensus_error) + ", " +
             std::to_string(rep.violations) + "/" + std::to_string(rep.records_checked) +
             " recorded bound violations (max excess " + format_double(rep.max_excess) + "), " +
             format_double(tr.seconds) + " s");
    out.require(!tr.result.trace.diverged, label + " did not diverge");
    out.require(rep.tail_mean_consensus_error < 1e-3, label + " tail-100 consensus error < 1e-3");
    out.require(rep.violations == 0, label + " contraction bound holds at every recorded iteration");
    out.require(tr.result.trace.bound_violations == 0,
                label + " contraction bound holds at every step (" +
                    std::to_string(tr.result.trace.bound_violations) + " of " +
                    std::to_string(tr.result.trace.bound_checks) + " violated)");
    out.require(tr.seconds < 60.0, label + " runtime < 60 s");
  }
}

// 7 ------------------------------------------------------------------------
// Independent brute-force oracle: minimisers of the mean absolute deviation
// on a 1e-3 grid over [-5, 10].
std::pair<double, double> grid_critical_interval(const std::vector<double>& anchors) {
  auto f = [&](double x) {
    double s = 0.0;
    for (double a : anchors) s += std::abs(x - a);
    return s / static_cast<double>(anchors.size());
  };
  const int steps = 15'000;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) best = std::min(best, f(-5.0 + 1e-3 * i));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i <= steps; ++i) {
    const double x = -5.0 + 1e-3 * i;
    if (f(x) <= best + 1e-12) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  return {lo, hi};
}

void critical_points(SuiteContext& ctx, Outcome& out) {
  const auto [lo, hi] = grid_critical_interval({0.0, 1.0, 2.0, 3.0});
  out.note("grid critical interval [" + format_double(lo) + ", " + format_double(hi) + "]");
  out.require(std::abs(lo - 1.0) <= 1e-3 && std::abs(hi - 2.0) <= 1e-3, "grid oracle finds [1, 2]");
  for (const auto& label : kLabels) {
    const Eigen::MatrixXd& x = ctx.median(label).result.trace.final_x;
    const double mn = x.minCoeff(), mx = x.maxCoeff();
    out.note(label + ": final iterates in [" + format_double(mn) + ", " + format_double(mx) + "]");
    out.require(mn >= lo - 0.05 && mx <= hi + 0.05, label + " final iterates within the critical interval +/- 0.05");
  }
}

// 8 ------------------------------------------------------------------------
void dsignsgd_steps(SuiteContext& ctx, Outcome& out) {
  const auto& median = ctx.median("dsignsgd").result.trace;
  out.note("median: max deviation " + format_double(median.max_sign_step_deviation) + " over " +
           std::to_string(median.iterations_completed) + " steps");
  out.require(median.iterations_completed == median.iterations_requested, "median run complete");
  out.require(median.max_sign_step_deviation <= 1e-12, "median steps in {-eta, 0, +eta}");

  ExperimentConfig cfg = mlp_benchmark_config("dsignsgd");
  const Experiment exp = build_experiment(cfg);
  const RunResult r = run(exp.objective, exp.mixing, exp.algorithm, exp.schedule, exp.initial_point(cfg.seed),
                          cfg.seed, exp.options);
  out.note("relu_mlp: max deviation " + format_double(r.trace.max_sign_step_deviation));
  out.require(r.trace.max_sign_step_deviation <= 1e-12, "relu_mlp steps in {-eta, 0, +eta}");
}

// 9 ------------------------------------------------------------------------
void mlp_training(SuiteContext& ctx, Outcome& out) {
  double total = 0.0;
  for (const auto& label : kLabels) {
    const auto& sweep = ctx.mlp(label);
    total += sweep.seconds;
    double initial = 0.0, final = 0.0, worst_consensus = 0.0;
    bool diverged = false;
    for (const auto& t : sweep.traces) {
      initial += t.records.front().f_avg;
      final += t.records.back().f_avg;
      worst_consensus = std::max(worst_consensus, t.records.back().consensus_error);
      diverged = diverged || t.diverged;
    }
    initial /= static_cast<double>(sweep.traces.size());
    final /= static_cast<double>(sweep.traces.size());
    const double reduction = 1.0 - final / initial;
    out.note(label + ": mean loss " + format_double(initial) + " -> " + format_double(final) + " (" +
             format_double(100.0 * reduction) + "% down), worst final consensus " + format_double(worst_consensus));
    out.require(!diverged, label + " no divergence");
    out.require(reduction >= 0.9, label + " mean train loss down >= 90%");
    out.require(worst_consensus < 1e-2, label + " final consensus error < 1e-2");
  }
  out.require(total < 300.0, "runtime < 5 min (took " + format_double(total) + " s)");
}

// 10 -----------------------------------------------------------------------
std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism(SuiteContext& ctx, Outcome& out) {
  int identical = 0, total = 0;
  for (const auto& label : kLabels) {
    ctx.mlp(label);
    const Experiment exp = build_experiment(mlp_benchmark_config(label));
    for (std::uint64_t seed : kSeeds) {
      const std::string leaf = "seed_" + std::to_string(seed);
      execute_and_write(exp, seed, ctx.scratch / "mlp_b" / label / leaf);
      const std::string a = read_file(ctx.scratch / "mlp_a" / label / leaf / "trace.csv");
      const std::string b = read_file(ctx.scratch / "mlp_b" / label / leaf / "trace.csv");
      ++total;
      if (!a.empty() && a == b) ++identical;
    }
  }
  out.note(std::to_string(identical) + "/" + std::to_string(total) + " trace files byte-identical");
  out.require(identical == total, "repeated runs produce byte-identical traces");
}

// 11 -----------------------------------------------------------------------
void lyapunov(SuiteContext& ctx, Outcome& out) {
  for (const std::string label : {"dsgdm", "dsignsgd"}) {
    std::vector<double> psi;
    for (const auto& r : ctx.median(label).result.trace.records)
      if (r.lyapunov) psi.push_back(*r.lyapunov);
    const double osc = windowed_oscillation(psi, 0.25);
    out.note(label + ": last-quarter oscillation of Psi " + format_double(osc) + " over " +
             std::to_string(psi.size()) + " records");
    out.require(!psi.empty() && osc < 1e-3, label + " Lyapunov oscillation < 1e-3");
  }
}

struct Criterion {
  int id;
  std::string name;
  std::vector<std::string> tags;
  std::function<void(SuiteContext&, Outcome&)> body;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "mixing-invariants", {"mixing", "doubly-stochastic"}, mixing_invariants},
      {2, "spectral-spot-checks", {"mixing", "spectral"}, spectral_spot_checks},
      {3, "oracle-finite-differences", {"oracle"}, oracle_finite_differences},
      {4, "framework-reduction", {"engine", "determinism"}, framework_reduction},
      {5, "tracking-identity", {"engine", "tracking"}, tracking_identity},
      {6, "consensus-decay", {"consensus"}, consensus},
      {7, "critical-point-convergence", {"consensus", "convergence"}, critical_points},
      {8, "dsignsgd-step-structure", {"engine", "sign"}, dsignsgd_steps},
      {9, "mlp-training", {"training"}, mlp_training},
      {10, "trace-determinism", {"training", "determinism"}, determinism},
      {11, "lyapunov-stability", {"consensus", "lyapunov"}, lyapunov},
  };
  return all;
}

bool selected(const Criterion& c, const std::string& filter) {
  if (filter.empty()) return true;
  if (c.name.find(filter) != std::string::npos || std::to_string(c.id) == filter) return true;
  for (const auto& t : c.tags)
    if (t.find(filter) != std::string::npos) return true;
  return false;
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& options, std::ostream& log) {
  SuiteContext ctx;
  ctx.options = options;
  ctx.scratch = options.scratch_dir;
  const bool own_scratch = ctx.scratch.empty();
  if (own_scratch) {
    ctx.scratch = fs::temp_directory_path() / ("dsm_suite_" + std::to_string(Clock::now().time_since_epoch().count()));
  }
  fs::create_directories(ctx.scratch);

  std::vector<CriterionResult> results;
  for (const auto& c : criteria()) {
    if (!selected(c, options.filter)) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      c.body(ctx, o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    CriterionResult r{c.id, c.name, c.tags, o.passed, o.detail.str(), seconds_since(t0)};
    log << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name << "  (" << format_double(std::round(r.seconds * 100) / 100)
        << " s)  " << r.detail << "\n";
    log.flush();
    results.push_back(std::move(r));
  }
  if (own_scratch) {
    std::error_code ec;
    fs::remove_all(ctx.scratch, ec);
  }
  return results;
}

int cli_suite(const SuiteOptions& options, std::ostream& out) {
  const auto results = run_acceptance_suite(options, out);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  out << results.size() - failed << "/" << results.size() << " criteria passed\n";
  if (results.empty()) out << "no criterion matches the filter\n";
  return failed == 0 ? kExitSuccess : kExitAcceptance;
}

}  // namespace dsm
