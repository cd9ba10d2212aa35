#include "dsm/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsm/error.hpp"
#include "dsm/format.hpp"

namespace dsm {

namespace {

struct MlpView {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::VectorXd> w2;
  double b2;

  MlpView(const MlpShape& s, const Eigen::VectorXd& p)
      : w1(p.data(), s.hidden, s.input),
        b1(p.data() + s.hidden * s.input, s.hidden),
        w2(p.data() + s.hidden * s.input + s.hidden, s.hidden),
        b2(p(s.param_count() - 1)) {}
};

void check_shapes(const MlpShape& shape, const Eigen::VectorXd& params, const LabeledBatch& batch) {
  if (params.size() != shape.param_count()) {
    throw InvalidInput("mlp: expected " + std::to_string(shape.param_count()) + " parameters, got " +
                       std::to_string(params.size()));
  }
  if (batch.size() == 0) throw InvalidInput("mlp: empty batch");
  if (batch.inputs.rows() != shape.input || batch.inputs.cols() != batch.size()) {
    throw InvalidInput("mlp: batch inputs must be input_dim x batch_size");
  }
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::pair<double, Eigen::VectorXd> relu_mlp_loss_and_subgrad(const MlpShape& shape,
                                                             const Eigen::VectorXd& params,
                                                             const LabeledBatch& batch, MlpLoss loss) {
  check_shapes(shape, params, batch);
  const MlpView net(shape, params);
  const Eigen::Index n = batch.size();

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(shape.param_count());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw1(grad.data(), shape.hidden,
                                                                                        shape.input);
  Eigen::Map<Eigen::VectorXd> gb1(grad.data() + shape.hidden * shape.input, shape.hidden);
  Eigen::Map<Eigen::VectorXd> gw2(grad.data() + shape.hidden * shape.input + shape.hidden, shape.hidden);
  double& gb2 = grad(shape.param_count() - 1);

  double total = 0.0;
  Eigen::VectorXd pre(shape.hidden), act(shape.hidden), back(shape.hidden);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto x = batch.inputs.col(s);
    pre.noalias() = net.w1 * x;
    pre += net.b1;
    act = pre.cwiseMax(0.0);
    const double out = net.w2.dot(act) + net.b2;
    const double y = batch.targets(s);

    double delta = 0.0;
    if (loss == MlpLoss::SquaredError) {
      const double r = out - y;
      total += 0.5 * r * r;
      delta = r;
    } else {
      total += softplus(out) - y * out;
      delta = sigmoid(out) - y;
    }

    gb2 += delta;
    gw2 += delta * act;
    for (int u = 0; u < shape.hidden; ++u) back(u) = pre(u) > 0.0 ? delta * net.w2(u) : 0.0;
    gb1 += back;
    gw1.noalias() += back * x.transpose();
  }
  const double inv = 1.0 / static_cast<double>(n);
  grad *= inv;
  return {total * inv, std::move(grad)};
}

double relu_mlp_loss(const MlpShape& shape, const Eigen::VectorXd& params, const LabeledBatch& batch,
                     MlpLoss loss) {
  check_shapes(shape, params, batch);
  const MlpView net(shape, params);
  double total = 0.0;
  Eigen::VectorXd pre(shape.hidden);
  for (Eigen::Index s = 0; s < batch.size(); ++s) {
    pre.noalias() = net.w1 * batch.inputs.col(s);
    pre += net.b1;
    const double out = net.w2.dot(pre.cwiseMax(0.0)) + net.b2;
    const double y = batch.targets(s);
    if (loss == MlpLoss::SquaredError) {
      total += 0.5 * (out - y) * (out - y);
    } else {
      total += softplus(out) - y * out;
    }
  }
  return total / static_cast<double>(batch.size());
}

LabeledBatch make_synthetic_dataset(const MlpProblemSpec& spec) {
  if (spec.samples < 1 || spec.shape.input < 1 || spec.teacher_hidden < 1) {
    throw InvalidParameter("synthetic dataset needs positive sizes");
  }
  CounterRng rng(spec.data_seed, kDataStream);
  const int in = spec.shape.input;
  const int th = spec.teacher_hidden;

  Eigen::MatrixXd tw1(th, in);
  Eigen::VectorXd tb1(th), tw2(th);
  for (Eigen::Index i = 0; i < tw1.size(); ++i) tw1.data()[i] = rng.normal() / std::sqrt(static_cast<double>(in));
  for (int u = 0; u < th; ++u) tb1(u) = 0.1 * rng.normal();
  for (int u = 0; u < th; ++u) tw2(u) = rng.normal();

  LabeledBatch data{Eigen::MatrixXd(in, spec.samples), Eigen::VectorXd(spec.samples)};
  for (int s = 0; s < spec.samples; ++s) {
    for (int c = 0; c < in; ++c) data.inputs(c, s) = rng.normal();
    const Eigen::VectorXd hidden = (tw1 * data.inputs.col(s) + tb1).cwiseMax(0.0);
    data.targets(s) = tw2.dot(hidden) + spec.label_noise * rng.normal();
  }
  if (spec.loss == MlpLoss::Logistic) {
    Eigen::VectorXd sorted = data.targets;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted(sorted.size() / 2);
    for (Eigen::Index s = 0; s < data.targets.size(); ++s) data.targets(s) = data.targets(s) > median ? 1.0 : 0.0;
  }
  return data;
}

std::string dataset_to_csv(const LabeledBatch& data) {
  std::string out;
  for (Eigen::Index c = 0; c < data.inputs.rows(); ++c) out += "x" + std::to_string(c) + ",";
  out += "y\n";
  for (Eigen::Index s = 0; s < data.size(); ++s) {
    for (Eigen::Index c = 0; c < data.inputs.rows(); ++c) out += format_double(data.inputs(c, s)) + ",";
    out += format_double(data.targets(s)) + "\n";
  }
  return out;
}

ReluMlpAgent::ReluMlpAgent(MlpShape shape, LabeledBatch shard, int batch_size, MlpLoss loss)
    : shape_(shape), loss_(loss) {
  if (batch_size < 1) throw InvalidParameter("batch_size must be positive");
  if (shard.size() == 0) throw InvalidInput("agent shard is empty");
  for (Eigen::Index start = 0; start < shard.size(); start += batch_size) {
    const Eigen::Index len = std::min<Eigen::Index>(batch_size, shard.size() - start);
    batches_.push_back({shard.inputs.middleCols(start, len), shard.targets.segment(start, len)});
  }
}

double ReluMlpAgent::component_value(int j, const Eigen::VectorXd& x) const {
  return relu_mlp_loss(shape_, x, batches_[j], loss_);
}

Eigen::VectorXd ReluMlpAgent::component_subgrad(int j, const Eigen::VectorXd& x) const {
  return relu_mlp_loss_and_subgrad(shape_, x, batches_[j], loss_).second;
}

double ReluMlpAgent::stencil_kink_margin(int j, const Eigen::VectorXd& x, const Eigen::VectorXd& h) const {
  // Kinks are the hyperplanes pre(s, u) = 0 in the (W1 row u, b1_u)
  // coordinates, with normal (x_s, 1). A stencil along one of those
  // coordinates moves pre by at most h_c |coef_c|.
  const MlpView net(shape_, x);
  const auto& batch = batches_[j];
  const int in = shape_.input;
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < batch.size(); ++s) {
    const auto xs = batch.inputs.col(s);
    const double normal = std::sqrt(xs.squaredNorm() + 1.0);
    for (int u = 0; u < shape_.hidden; ++u) {
      const double pre = net.w1.row(u).dot(xs) + net.b1(u);
      double reach = h(in * shape_.hidden + u);
      for (int c = 0; c < in; ++c) reach = std::max(reach, h(u * in + c) * std::abs(xs(c)));
      margin = std::min(margin, (std::abs(pre) - reach) / normal);
    }
  }
  return margin;
}

std::shared_ptr<GlobalObjective> make_relu_mlp_problem(const MlpProblemSpec& spec, int num_agents) {
  if (num_agents < 1) throw InvalidParameter("need at least one agent");
  if (spec.samples < num_agents) throw InvalidParameter("fewer samples than agents");
  const LabeledBatch data = make_synthetic_dataset(spec);
  std::vector<std::shared_ptr<const AgentObjective>> agents;
  const int per = spec.samples / num_agents;
  const int rem = spec.samples % num_agents;
  int start = 0;
  for (int i = 0; i < num_agents; ++i) {
    const int len = per + (i < rem ? 1 : 0);
    LabeledBatch shard{data.inputs.middleCols(start, len), data.targets.segment(start, len)};
    agents.push_back(std::make_shared<ReluMlpAgent>(spec.shape, std::move(shard), spec.batch_size, spec.loss));
    start += len;
  }
  return std::make_shared<GlobalObjective>(std::move(agents));
}

Eigen::VectorXd init_mlp_params(const MlpShape& shape, CounterRng& rng) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(shape.param_count());
  const double s1 = std::sqrt(2.0 / shape.input);
  const double s2 = std::sqrt(1.0 / shape.hidden);
  for (int i = 0; i < shape.hidden * shape.input; ++i) p(i) = s1 * rng.normal();
  const int w2_off = shape.hidden * shape.input + shape.hidden;
  for (int u = 0; u < shape.hidden; ++u) p(w2_off + u) = s2 * rng.normal();
  return p;
}

}  // namespace dsm
