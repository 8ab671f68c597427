#include "activeuwb/sac.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "activeuwb/errors.hpp"

namespace activeuwb {

void SacConfig::validate() const {
  if (obs_dim <= 0 || critic_obs_dim <= 0 || action_dim <= 0) throw std::invalid_argument("SacConfig: bad dims");
  if (hidden_width <= 0 || hidden_layers <= 0) throw std::invalid_argument("SacConfig: bad hidden layout");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("SacConfig: learning_rate must be > 0");
  if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("SacConfig: discount must be in (0, 1)");
  if (!(polyak_tau > 0.0 && polyak_tau <= 1.0)) throw std::invalid_argument("SacConfig: polyak_tau must be in (0, 1]");
  if (!(init_temperature > 0.0)) throw std::invalid_argument("SacConfig: init_temperature must be > 0");
  if (!(log_std_min < log_std_max)) throw std::invalid_argument("SacConfig: empty log-std range");
}

namespace {

std::vector<int> hidden_stack(int in, int width, int layers, int out) {
  std::vector<int> w{in};
  w.insert(w.end(), static_cast<std::size_t>(layers), width);
  w.push_back(out);
  return w;
}

// log(1 + exp(x)) without overflow
template <typename S>
S softplus(S x) {
  return x > S(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

template <typename Scalar>
SacAgent<Scalar>::SacAgent(SacConfig cfg, Rng& init_rng) : cfg_(cfg) {
  cfg_.validate();
  actor_ = Net(hidden_stack(cfg_.obs_dim, cfg_.hidden_width, cfg_.hidden_layers, 2 * cfg_.action_dim));
  actor_.init_uniform(init_rng);
  const int critic_in = cfg_.critic_obs_dim + cfg_.action_dim;
  for (int i = 0; i < 2; ++i) {
    critics_[i] = Net(hidden_stack(critic_in, cfg_.hidden_width, cfg_.hidden_layers, 1));
    critics_[i].init_uniform(init_rng);
    targets_[i] = critics_[i];
    critic_opt_[i] = Adam<Scalar>(critics_[i].num_parameters(), cfg_.learning_rate);
  }
  actor_opt_ = Adam<Scalar>(actor_.num_parameters(), cfg_.learning_rate);
  log_temp_ = Vector::Constant(1, static_cast<Scalar>(std::log(cfg_.init_temperature)));
  temp_opt_ = Adam<Scalar>(1, cfg_.learning_rate);
}

template <typename Scalar>
double SacAgent<Scalar>::temperature() const {
  return std::exp(static_cast<double>(log_temp_[0]));
}

template <typename Scalar>
typename SacAgent<Scalar>::Matrix SacAgent<Scalar>::standard_normal(Eigen::Index rows, Eigen::Index cols,
                                                                    Rng& rng) const {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix m(rows, cols);
  // column-major fill: sample by sample
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(n01(rng));
  return m;
}

template <typename Scalar>
typename SacAgent<Scalar>::PolicyOutput SacAgent<Scalar>::evaluate_policy(const Matrix& obs,
                                                                          const Matrix& noise) const {
  const int a = cfg_.action_dim;
  if (noise.rows() != a || noise.cols() != obs.cols()) throw ShapeMismatch("evaluate_policy: noise shape");
  PolicyOutput po;
  const Matrix out = actor_.forward(obs, po.cache);
  po.mean = out.topRows(a);
  const Matrix raw = out.bottomRows(a);
  const auto lo = static_cast<Scalar>(cfg_.log_std_min), hi = static_cast<Scalar>(cfg_.log_std_max);
  po.log_std = raw.cwiseMax(lo).cwiseMin(hi);
  po.std_mask = ((raw.array() >= lo) && (raw.array() <= hi)).template cast<Scalar>().matrix();
  po.pre_tanh = po.mean + (po.log_std.array().exp() * noise.array()).matrix();
  po.action = po.pre_tanh.array().tanh().matrix();

  const Scalar half_log_2pi = static_cast<Scalar>(0.5 * std::log(2.0 * std::numbers::pi));
  const Scalar log2 = static_cast<Scalar>(std::numbers::ln2);
  po.log_prob.resize(1, obs.cols());
  for (Eigen::Index b = 0; b < obs.cols(); ++b) {
    Scalar lp = 0;
    for (int j = 0; j < a; ++j) {
      const Scalar e = noise(j, b), u = po.pre_tanh(j, b);
      // Gaussian density of u, then log|d tanh/du| = 2 (log 2 - u - softplus(-2u))
      lp += -Scalar(0.5) * e * e - po.log_std(j, b) - half_log_2pi;
      lp -= Scalar(2) * (log2 - u - softplus(Scalar(-2) * u));
    }
    po.log_prob(0, b) = lp;
  }
  return po;
}

template <typename Scalar>
typename SacAgent<Scalar>::Matrix SacAgent<Scalar>::deterministic_action(const Matrix& obs) const {
  return actor_.forward(obs).topRows(cfg_.action_dim).array().tanh().matrix();
}

template <typename Scalar>
typename SacAgent<Scalar>::Matrix SacAgent<Scalar>::sample_action(const Matrix& obs, Rng& rng) const {
  return evaluate_policy(obs, standard_normal(cfg_.action_dim, obs.cols(), rng)).action;
}

template <typename Scalar>
typename SacAgent<Scalar>::Matrix SacAgent<Scalar>::critic_input(const Matrix& critic_obs,
                                                                 const Matrix& action) const {
  if (critic_obs.rows() != cfg_.critic_obs_dim || action.rows() != cfg_.action_dim ||
      critic_obs.cols() != action.cols()) {
    throw ShapeMismatch("critic_input: shape mismatch");
  }
  Matrix x(critic_obs.rows() + action.rows(), critic_obs.cols());
  x << critic_obs, action;
  return x;
}

template <typename Scalar>
typename SacAgent<Scalar>::ActorLoss SacAgent<Scalar>::actor_loss(const Matrix& obs, const Matrix& critic_obs,
                                                                  const Matrix& noise, double temperature,
                                                                  bool with_grad) const {
  const auto po = evaluate_policy(obs, noise);
  const Matrix x = critic_input(critic_obs, po.action);
  std::array<typename Net::Cache, 2> caches;
  const Matrix q1 = critics_[0].forward(x, caches[0]);
  const Matrix q2 = critics_[1].forward(x, caches[1]);
  const Matrix qmin = q1.cwiseMin(q2);
  const Scalar alpha = static_cast<Scalar>(temperature);
  const auto bsz = static_cast<Scalar>(obs.cols());

  ActorLoss res;
  res.loss = static_cast<double>((alpha * po.log_prob - qmin).sum() / bsz);
  res.mean_log_prob = static_cast<double>(po.log_prob.sum() / bsz);
  if (!with_grad) return res;

  // d loss / d action through whichever critic attains the minimum
  const int a = cfg_.action_dim;
  Matrix dq_da = Matrix::Zero(a, obs.cols());
  for (int i = 0; i < 2; ++i) {
    Matrix up(1, obs.cols());
    for (Eigen::Index b = 0; b < obs.cols(); ++b) {
      const bool pick = i == 0 ? q1(0, b) <= q2(0, b) : q1(0, b) > q2(0, b);
      up(0, b) = pick ? Scalar(-1) / bsz : Scalar(0);
    }
    Matrix in_grad;
    critics_[i].backward(caches[i], up, nullptr, &in_grad);
    dq_da += in_grad.bottomRows(a);
  }
  const Matrix one_minus_a2 = (Scalar(1) - po.action.array().square()).matrix();
  const Matrix d_u = dq_da.cwiseProduct(one_minus_a2) + (Scalar(2) * alpha / bsz) * po.action;
  const Matrix d_ls =
      ((d_u.array() * po.log_std.array().exp() * noise.array() - alpha / bsz) * po.std_mask.array()).matrix();
  Matrix upstream(2 * a, obs.cols());
  upstream << d_u, d_ls;
  res.grad = actor_.parameter_gradient(po.cache, upstream);
  return res;
}

template <typename Scalar>
typename SacAgent<Scalar>::CriticLoss SacAgent<Scalar>::critic_loss(const Batch& batch, const Matrix& next_noise,
                                                                    double temperature, bool with_grad) const {
  const auto bsz = static_cast<Scalar>(batch.size());
  const Scalar alpha = static_cast<Scalar>(temperature);
  const Scalar gamma = static_cast<Scalar>(cfg_.discount);

  const auto next = evaluate_policy(batch.next_obs, next_noise);
  const Matrix xn = critic_input(batch.next_critic_obs, next.action);
  const Matrix tq = targets_[0].forward(xn).cwiseMin(targets_[1].forward(xn));
  const Matrix y = batch.rewards + (gamma * (Scalar(1) - batch.dones.array()) *
                                    (tq - alpha * next.log_prob).array()).matrix();

  const Matrix x = critic_input(batch.critic_obs, batch.actions);
  CriticLoss res;
  double total = 0.0, qsum = 0.0;
  for (int i = 0; i < 2; ++i) {
    typename Net::Cache cache;
    const Matrix q = critics_[i].forward(x, cache);
    const Matrix diff = q - y;
    total += static_cast<double>(diff.squaredNorm() / bsz);
    qsum += static_cast<double>(q.sum() / bsz);
    if (with_grad) res.grad[i] = critics_[i].parameter_gradient(cache, diff / bsz);
  }
  res.loss = 0.5 * total;
  res.mean_q = 0.5 * qsum;
  res.mean_target = static_cast<double>(y.sum() / bsz);
  return res;
}

template <typename Scalar>
typename SacAgent<Scalar>::Diagnostics SacAgent<Scalar>::update(const Batch& batch, Rng& rng) {
  const auto n = batch.size();
  const Matrix noise = standard_normal(cfg_.action_dim, n, rng);
  const Matrix next_noise = standard_normal(cfg_.action_dim, n, rng);
  const long step = updates_ + 1;
  auto check = [step](double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalDivergence(std::string("non-finite ") + what, step);
  };

  Diagnostics d;
  // temperature first; the rest of the step uses its pre-update value
  const double alpha = temperature();
  {
    const auto po = evaluate_policy(batch.obs, noise);
    const double mean_lp = static_cast<double>(po.log_prob.sum()) / static_cast<double>(n);
    d.temperature_loss = -log_temperature() * (mean_lp + cfg_.target_entropy);
    check(d.temperature_loss, "temperature loss");
    Vector g(1);
    g[0] = static_cast<Scalar>(-(mean_lp + cfg_.target_entropy));
    temp_opt_.step(log_temp_, g);
  }

  const auto cl = critic_loss(batch, next_noise, alpha);
  check(cl.loss, "critic loss");
  for (int i = 0; i < 2; ++i) critic_opt_[i].step(critics_[i].parameters(), cl.grad[i]);

  const auto al = actor_loss(batch.obs, batch.critic_obs, noise, alpha);
  check(al.loss, "actor loss");
  actor_opt_.step(actor_.parameters(), al.grad);

  for (int i = 0; i < 2; ++i) polyak_update(targets_[i], critics_[i], cfg_.polyak_tau);
  ++updates_;

  d.critic_loss = cl.loss;
  d.actor_loss = al.loss;
  d.temperature = temperature();
  d.mean_log_prob = al.mean_log_prob;
  d.mean_q = cl.mean_q;
  return d;
}

template class SacAgent<float>;
template class SacAgent<double>;

// ---------------------------------------------------------------------------

SacPolicy::SacPolicy(Mlp<float> actor, ActuatorLimits limits, int history, std::array<Vec2, 3> layout_anchors)
    : actor_(std::move(actor)), limits_(limits), history_(history), anchors_(layout_anchors) {
  if (actor_.input_size() != 3 * history_) throw ShapeMismatch("SacPolicy: actor input must be 3H");
  if (actor_.output_size() != 4) throw ShapeMismatch("SacPolicy: actor head must be mean + log-std of 2 actions");
}

ControlCommand SacPolicy::act(std::span<const double> observation) {
  if (static_cast<int>(observation.size()) != actor_.input_size()) {
    throw ShapeMismatch("SacPolicy::act: observation length " + std::to_string(observation.size()));
  }
  Mlp<float>::Matrix x(actor_.input_size(), 1);
  for (std::size_t i = 0; i < observation.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = static_cast<float>(observation[i]);
  const auto out = actor_.forward(x);
  const double v = std::tanh(static_cast<double>(out(0, 0))) * limits_.v_max;
  const double w = std::tanh(static_cast<double>(out(1, 0))) * limits_.omega_max;
  return limits_.saturate({v, w});
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'A', 'U', 'W', 'B', 'P', 'O', 'L', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kFloat32 = 4;
constexpr std::uint8_t kRelu = 1;
constexpr std::uint8_t kSquashedGaussian = 2;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw CheckpointError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void save_policy(const SacPolicy& policy, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open for writing: " + path);
  const auto& net = policy.actor();
  os.write(kMagic, sizeof kMagic);
  put<std::uint8_t>(os, kVersion);
  put<std::uint8_t>(os, kFloat32);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(policy.history()));
  put<double>(os, policy.limits().v_max);
  put<double>(os, policy.limits().omega_max);
  for (const auto& p : policy.layout_anchors()) {
    put<double>(os, p.x());
    put<double>(os, p.y());
  }
  put<std::uint32_t>(os, static_cast<std::uint32_t>(net.widths().size()));
  for (int w : net.widths()) put<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  for (int l = 0; l + 1 < net.num_layers(); ++l) put<std::uint8_t>(os, kRelu);
  put<std::uint8_t>(os, kSquashedGaussian);
  put<std::uint64_t>(os, net.num_parameters());
  os.write(reinterpret_cast<const char*>(net.parameters().data()),
           static_cast<std::streamsize>(net.num_parameters() * sizeof(float)));
  if (!os) throw CheckpointError("write failed: " + path);
}

SacPolicy load_policy(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw CheckpointError("not a policy checkpoint: " + path);
  }
  if (get<std::uint8_t>(is, path) != kVersion) throw CheckpointError("unsupported checkpoint version: " + path);
  if (get<std::uint8_t>(is, path) != kFloat32) throw CheckpointError("unsupported scalar type: " + path);
  const int history = static_cast<int>(get<std::uint32_t>(is, path));
  ActuatorLimits limits;
  limits.v_max = get<double>(is, path);
  limits.omega_max = get<double>(is, path);
  std::array<Vec2, 3> anchors;
  for (auto& p : anchors) {
    const double x = get<double>(is, path);
    const double y = get<double>(is, path);
    p = Vec2(x, y);
  }
  const auto n_widths = get<std::uint32_t>(is, path);
  if (n_widths < 2 || n_widths > 64) throw CheckpointError("implausible layer count: " + path);
  std::vector<int> widths(n_widths);
  for (auto& w : widths) w = static_cast<int>(get<std::uint32_t>(is, path));
  for (std::uint32_t l = 0; l + 2 < n_widths; ++l) {
    if (get<std::uint8_t>(is, path) != kRelu) throw CheckpointError("unsupported activation tag: " + path);
  }
  if (get<std::uint8_t>(is, path) != kSquashedGaussian) throw CheckpointError("unsupported head tag: " + path);
  Mlp<float> net(widths);
  const auto n_params = get<std::uint64_t>(is, path);
  if (n_params != net.num_parameters()) throw CheckpointError("parameter count does not match widths: " + path);
  if (!is.read(reinterpret_cast<char*>(net.parameters().data()),
               static_cast<std::streamsize>(n_params * sizeof(float)))) {
    throw CheckpointError("truncated parameters: " + path);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes in checkpoint: " + path);
  if (!net.parameters().allFinite()) throw CheckpointError("non-finite parameters: " + path);
  return SacPolicy(std::move(net), limits, history, anchors);
}

}  // namespace activeuwb
