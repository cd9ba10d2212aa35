#include "dsm/engine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dsm/error.hpp"
#include "dsm/format.hpp"

namespace dsm {

OracleSet::OracleSet(std::shared_ptr<const GlobalObjective> objective, std::uint64_t seed, NoiseConfig noise)
    : objective_(std::move(objective)), noise_(noise) {
  if (!objective_) throw InvalidInput("oracle set needs an objective");
  streams_.reserve(objective_->num_agents());
  for (int i = 0; i < objective_->num_agents(); ++i) streams_.emplace_back(seed, static_cast<std::uint64_t>(i));
}

Eigen::MatrixXd OracleSet::sample(const Eigen::MatrixXd& x) {
  if (x.rows() != dimension() || x.cols() != num_agents()) {
    throw InvalidInput("oracle sample: expected " + std::to_string(dimension()) + "x" +
                       std::to_string(num_agents()) + " iterate");
  }
  Eigen::MatrixXd d(x.rows(), x.cols());
  for (int i = 0; i < num_agents(); ++i) {
    const AgentObjective& agent = objective_->agent(i);
    CounterRng& rng = streams_[i];
    const int j = sample_component(agent, rng);
    d.col(i) = subgrad(agent, j, x.col(i)).g;
    switch (noise_.kind) {
      case NoiseConfig::Kind::None:
        break;
      case NoiseConfig::Kind::Uniform:
        for (Eigen::Index c = 0; c < d.rows(); ++c) d(c, i) += rng.uniform(-noise_.scale, noise_.scale);
        break;
      case NoiseConfig::Kind::Gaussian:
        for (Eigen::Index c = 0; c < d.rows(); ++c) d(c, i) += noise_.scale * rng.normal();
        break;
    }
  }
  return d;
}

namespace {

void require_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                       ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_finite(const Eigen::MatrixXd& m, std::int64_t k) {
  if (!m.allFinite()) throw DivergenceError("non-finite iterate", k);
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd z(top.rows() + bottom.rows(), top.cols());
  z.topRows(top.rows()) = top;
  z.bottomRows(bottom.rows()) = bottom;
  return z;
}

}  // namespace

Eigen::MatrixXd dsm_step(const Eigen::MatrixXd& z, const MixingMatrix& w, const Eigen::MatrixXd& h,
                         const Eigen::MatrixXd& xi, double eta, std::int64_t k) {
  require_shape(z, z.rows(), w.size(), "dsm_step iterate");
  require_shape(h, z.rows(), z.cols(), "dsm_step H");
  require_shape(xi, z.rows(), z.cols(), "dsm_step Xi");
  Eigen::MatrixXd out = z * w.matrix();
  out -= eta * (h + xi);
  require_finite(out, k);
  return out;
}

DsgdStep dsgd_step(const Eigen::MatrixXd& x, const MixingMatrix& w, OracleSet& oracles,
                   const StepSchedule& schedule, std::int64_t k) {
  require_shape(x, oracles.dimension(), w.size(), "dsgd_step X");
  const double eta = schedule.eta(k);
  Eigen::MatrixXd d = oracles.sample(x);
  Eigen::MatrixXd next = x * w.matrix();
  next -= eta * d;
  require_finite(next, k);
  return {std::move(next), std::move(d)};
}

Eigen::MatrixXd initial_momentum(const Eigen::MatrixXd& d0, const MixingMatrix& w, double tau, double eta0) {
  const double te = tau * eta0;
  return (1.0 - te) * (d0 * w.matrix()) + te * d0;
}

DgsgdmStep dgsgdm_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const MixingMatrix& w,
                       const AlgorithmConfig& config, OracleSet& oracles, const StepSchedule& schedule,
                       std::int64_t k) {
  require_shape(x, oracles.dimension(), w.size(), "dgsgdm_step X");
  require_shape(y, x.rows(), x.cols(), "dgsgdm_step Y");
  const double eta = schedule.eta(k);
  const double te = config.tau * eta;

  DgsgdmStep out;
  out.left_convex_regime = te > 1.0;
  out.x = x * w.matrix();
  out.x -= eta * phi_select(config.phi, y);
  require_finite(out.x, k);

  out.d = oracles.sample(out.x);
  out.y = (1.0 - te) * (y * w.matrix()) + te * out.d;
  require_finite(out.y, k);
  return out;
}

DsgdTStep dsgd_t_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& v, const Eigen::MatrixXd& d_prev,
                      const MixingMatrix& w, OracleSet& oracles, const StepSchedule& schedule, std::int64_t k) {
  require_shape(x, oracles.dimension(), w.size(), "dsgd_t_step X");
  require_shape(v, x.rows(), x.cols(), "dsgd_t_step V");
  require_shape(d_prev, x.rows(), x.cols(), "dsgd_t_step D_prev");
  const double eta = schedule.eta(k);

  DsgdTStep out;
  out.x = x * w.matrix();
  out.x -= eta * v;
  require_finite(out.x, k);

  out.d = oracles.sample(out.x);
  out.v = (v + out.d - d_prev) * w.matrix();
  require_finite(out.v, k);

  // Only meaningful when the inputs satisfy V 1 = D_prev 1.
  const double input_gap = (v.rowwise().sum() - d_prev.rowwise().sum()).cwiseAbs().maxCoeff();
  const double gap = (out.v.rowwise().sum() - out.d.rowwise().sum()).cwiseAbs().maxCoeff();
  if (input_gap <= kTrackingTol && gap > kTrackingTol) {
    throw InternalConsistencyError("tracking identity violated by " + format_double(gap) + " at iteration " +
                                   std::to_string(k));
  }
  return out;
}

namespace {

double sign_step_deviation(const Eigen::MatrixXd& delta, double eta) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    const double v = delta.data()[i];
    const double dev = std::min({std::abs(v + eta), std::abs(v), std::abs(v - eta)});
    worst = std::max(worst, dev);
  }
  return worst;
}

}  // namespace

RunResult run(std::shared_ptr<const GlobalObjective> objective, const MixingMatrix& w,
              const AlgorithmConfig& config, const StepSchedule& schedule, const Eigen::MatrixXd& x0,
              std::uint64_t seed, const RunOptions& options) {
  if (!objective) throw InvalidInput("run needs an objective");
  if (objective->num_agents() != w.size()) throw InvalidInput("objective and mixing matrix disagree on agent count");
  require_shape(x0, objective->dimension(), w.size(), "initial iterate");
  if (!x0.allFinite()) throw InvalidInput("initial iterate must be finite");
  if (options.iterations < 0) throw InvalidParameter("iterations must be nonnegative");
  if (options.record_stride < 1) throw InvalidParameter("record_stride must be positive");
  config.validate(schedule.eta0());

  const GlobalObjective& f = *objective;
  OracleSet oracles(objective, seed, options.noise);
  const bool momentum = config.variant == Variant::DGSGDm;
  const bool tracking = config.variant == Variant::DSGD_T;
  const bool sign_steps = momentum && config.phi == Phi::L1Norm;
  const bool want_stationarity = f.stationarity_exact() || options.surrogate_stationarity;

  RunResult result;
  result.history = IterateHistory(options.history_capacity);
  RunTrace& trace = result.trace;
  trace.algorithm = config;
  trace.contraction = w.contraction();
  trace.iterations_requested = options.iterations;

  Eigen::MatrixXd x = x0;
  Eigen::MatrixXd aux;     // Y or V
  Eigen::MatrixXd d_prev;  // DSGD-T
  if (momentum || tracking) {
    const Eigen::MatrixXd d0 = oracles.sample(x);
    if (tracking) {
      aux = d0;
      d_prev = d0;
    } else {
      switch (options.momentum_init) {
        case RunOptions::MomentumInit::Mixed: aux = initial_momentum(d0, w, config.tau, schedule.eta0()); break;
        case RunOptions::MomentumInit::Zero: aux = Eigen::MatrixXd::Zero(x.rows(), x.cols()); break;
        case RunOptions::MomentumInit::Subgradient: aux = d0; break;
      }
    }
  }

  auto stacked = [&](const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys) {
    return momentum ? stack(xs, ys) : xs;
  };

  auto make_record = [&](std::int64_t k, const Eigen::MatrixXd& z) {
    TraceRecord rec;
    rec.k = k;
    rec.eta = schedule.eta(k);
    rec.lambda = schedule.lambda_of(k);
    const Eigen::VectorXd xbar = average_column(x);
    rec.f_avg = f.value(xbar);
    rec.consensus_error = consensus_error(x);
    if (momentum) rec.lyapunov = lyapunov_dgsgdm(xbar, average_column(aux), config.tau, config.phi, f);
    if (want_stationarity) rec.stationarity = f.stationarity(xbar, options.stationarity_samples);
    rec.z_norm = z.norm();
    rec.zperp_norm = disagreement(z).norm();
    rec.zperp_next = std::numeric_limits<double>::quiet_NaN();
    rec.step_norm = std::numeric_limits<double>::quiet_NaN();
    if (options.record_agent_values) {
      for (Eigen::Index i = 0; i < x.cols(); ++i) rec.agent_values.push_back(f.value(x.col(i)));
    }
    return rec;
  };

  std::int64_t k = 0;
  for (; k < options.iterations; ++k) {
    const double eta = schedule.eta(k);
    const Eigen::MatrixXd z = stacked(x, aux);
    const Eigen::VectorXd zbar = average_column(z);
    const double zperp = disagreement(z).norm();
    result.history.push(k, zbar);

    const bool recording = k % options.record_stride == 0;
    TraceRecord rec;
    if (recording) rec = make_record(k, z);

    Eigen::MatrixXd x_next, aux_next, direction;
    try {
      switch (config.variant) {
        case Variant::DSGD: {
          DsgdStep s = dsgd_step(x, w, oracles, schedule, k);
          x_next = std::move(s.x);
          direction = std::move(s.d);
          break;
        }
        case Variant::DGSGDm: {
          DgsgdmStep s = dgsgdm_step(x, aux, w, config, oracles, schedule, k);
          if (s.left_convex_regime) ++trace.convex_regime_warnings;
          if (sign_steps) {
            trace.max_sign_step_deviation =
                std::max(trace.max_sign_step_deviation, sign_step_deviation(s.x - x * w.matrix(), eta));
          }
          direction = stack(phi_select(config.phi, aux), config.tau * (aux * w.matrix()) - config.tau * s.d);
          x_next = std::move(s.x);
          aux_next = std::move(s.y);
          break;
        }
        case Variant::DSGD_T: {
          DsgdTStep s = dsgd_t_step(x, aux, d_prev, w, oracles, schedule, k);
          const double dev = (s.v.rowwise().sum() - s.d.rowwise().sum()).cwiseAbs().maxCoeff();
          trace.max_tracking_deviation = std::max(trace.max_tracking_deviation, dev);
          direction = aux;
          x_next = std::move(s.x);
          aux_next = std::move(s.v);
          d_prev = std::move(s.d);
          break;
        }
      }
    } catch (const DivergenceError& e) {
      trace.diverged = true;
      trace.diverged_at = k;
      trace.divergence_message = e.what();
      if (recording) trace.records.push_back(std::move(rec));
      break;
    }

    const Eigen::MatrixXd z_next = stacked(x_next, aux_next);
    const double z_next_norm = z_next.norm();
    if (!(z_next_norm <= options.divergence_bound)) {
      trace.diverged = true;
      trace.diverged_at = k;
      trace.divergence_message = "||Z||_F = " + format_double(z_next_norm) + " exceeds bound " +
                                 format_double(options.divergence_bound) + " (iteration " + std::to_string(k) + ")";
      if (recording) trace.records.push_back(std::move(rec));
      break;
    }

    const double zperp_next = disagreement(z_next).norm();
    const double step_norm = eta * direction.norm();
    const double excess = zperp_next - (trace.contraction * zperp + step_norm);
    ++trace.bound_checks;
    if (excess > options.bound_slack) ++trace.bound_violations;
    trace.max_bound_excess = std::max(trace.max_bound_excess, excess);

    const Eigen::VectorXd predicted = zbar - eta * average_column(direction);
    trace.max_average_recursion_error =
        std::max(trace.max_average_recursion_error, (average_column(z_next) - predicted).cwiseAbs().maxCoeff());

    if (recording) {
      rec.zperp_next = zperp_next;
      rec.step_norm = step_norm;
      trace.records.push_back(std::move(rec));
    }
    x = std::move(x_next);
    if (momentum || tracking) aux = std::move(aux_next);
  }

  trace.iterations_completed = k;
  if (!trace.diverged) {
    const Eigen::MatrixXd z = stacked(x, aux);
    result.history.push(k, average_column(z));
    trace.records.push_back(make_record(k, z));
  }
  if (trace.convex_regime_warnings > 0) {
    trace.warnings.push_back("tau * eta_k exceeded 1 on " + std::to_string(trace.convex_regime_warnings) +
                             " iterations");
  }
  trace.final_x = x;
  trace.final_aux = aux;
  return result;
}

}  // namespace dsm
