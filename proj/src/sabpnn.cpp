#include "tbm/sabpnn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tbm/error.hpp"

namespace tbm {

NetworkParams NetworkParams::zeros(std::size_t input_dim, std::size_t hidden_nodes) {
  NetworkParams net;
  net.input_dim = input_dim;
  net.hidden_nodes = hidden_nodes;
  net.weights_ih.assign(input_dim * hidden_nodes, 0.0);
  net.bias_h.assign(hidden_nodes, 0.0);
  net.weights_ho.assign(hidden_nodes, 0.0);
  return net;
}

std::vector<double> NetworkParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), weights_ih.begin(), weights_ih.end());
  flat.insert(flat.end(), bias_h.begin(), bias_h.end());
  flat.insert(flat.end(), weights_ho.begin(), weights_ho.end());
  flat.push_back(bias_o);
  return flat;
}

void NetworkParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw InvalidInput("network", "flat parameter vector has wrong length");
  auto it = flat.begin();
  std::copy_n(it, weights_ih.size(), weights_ih.begin());
  it += static_cast<std::ptrdiff_t>(weights_ih.size());
  std::copy_n(it, bias_h.size(), bias_h.begin());
  it += static_cast<std::ptrdiff_t>(bias_h.size());
  std::copy_n(it, weights_ho.size(), weights_ho.begin());
  it += static_cast<std::ptrdiff_t>(weights_ho.size());
  bias_o = *it;
}

void validate(const NetworkParams& net) {
  if (net.input_dim == 0 || net.hidden_nodes == 0)
    throw InvalidInput("network", "input_dim and hidden_nodes must be >= 1");
  if (net.weights_ih.size() != net.input_dim * net.hidden_nodes)
    throw InvalidInput("weights_ih", "weights_ih shape does not match hidden x input");
  if (net.bias_h.size() != net.hidden_nodes)
    throw InvalidInput("bias_h", "bias_h length does not match hidden_nodes");
  if (net.weights_ho.size() != net.hidden_nodes)
    throw InvalidInput("weights_ho", "weights_ho length does not match hidden_nodes");
  if (net.hidden_activation != "tanh")
    throw InvalidInput("hidden_activation", "only tanh hidden units are supported");
  if (net.output_activation != "linear")
    throw InvalidInput("output_activation", "only a linear output unit is supported");
  for (double v : net.flatten())
    if (!std::isfinite(v)) throw InvalidInput("network", "network parameters must be finite");
}

TrainConfig TrainConfig::prcr() {
  TrainConfig c;
  c.learn_rate = 0.1;
  c.gd_iterations = 2000;
  c.sa_initial_temp = 100.0;
  c.sa_drop_ratio = 0.99;
  c.sa_inner_loops = 50;
  c.sa_iterations = 1000;
  c.sa_final_temp = 0.0;
  return c;
}

TrainConfig TrainConfig::ccr() {
  TrainConfig c;
  c.learn_rate = 0.15;
  c.gd_iterations = 1000;
  c.sa_initial_temp = 80.0;
  c.sa_drop_ratio = 0.99;
  c.sa_inner_loops = 30;
  c.sa_iterations = 1000;
  c.sa_final_temp = 0.0;
  return c;
}

void validate(const TrainConfig& c) {
  if (!(c.learn_rate > 0) || !std::isfinite(c.learn_rate))
    throw InvalidInput("learn_rate", "learn_rate must be > 0");
  if (!(c.sa_drop_ratio > 0 && c.sa_drop_ratio < 1))
    throw InvalidInput("sa_drop_ratio", "sa_drop_ratio must be within (0, 1)");
  if (!(c.sa_initial_temp > 0)) throw InvalidInput("sa_initial_temp", "must be > 0");
  if (!(c.sa_final_temp >= 0)) throw InvalidInput("sa_final_temp", "must be >= 0");
  if (c.sa_inner_loops < 1) throw InvalidInput("sa_inner_loops", "must be >= 1");
  if (c.sa_iterations < 1) throw InvalidInput("sa_iterations", "must be >= 1");
}

void Samples::push(std::span<const double> features, double target) {
  if (features.size() != dim) throw InvalidInput("x", "sample has wrong dimension");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(target);
}

namespace {

// Both helpers fix the summation order so cached and uncached evaluations
// agree bit for bit.
inline double hidden_unit(const NetworkParams& net, std::size_t j, const double* x) {
  const double* w = net.weights_ih.data() + j * net.input_dim;
  double acc = 0.0;
  for (std::size_t i = 0; i < net.input_dim; ++i) acc += w[i] * x[i];
  return std::tanh(acc + net.bias_h[j]);
}

inline double output_unit(const NetworkParams& net, const double* h) {
  double acc = 0.0;
  for (std::size_t j = 0; j < net.hidden_nodes; ++j) acc += net.weights_ho[j] * h[j];
  return acc + net.bias_o;
}

double mean_squared(std::span<const double> out, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t s = 0; s < y.size(); ++s) {
    const double e = out[s] - y[s];
    acc += e * e;
  }
  return acc / static_cast<double>(y.size());
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double forward(const NetworkParams& net, std::span<const double> x) {
  if (x.size() != net.input_dim)
    throw InvalidInput("x", "input has " + std::to_string(x.size()) + " features, network expects " +
                                std::to_string(net.input_dim));
  std::vector<double> h(net.hidden_nodes);
  for (std::size_t j = 0; j < net.hidden_nodes; ++j) h[j] = hidden_unit(net, j, x.data());
  return output_unit(net, h.data());
}

double mse(const NetworkParams& net, const Samples& data) {
  if (data.empty()) throw InvalidInput("data", "empty sample set");
  if (data.dim != net.input_dim) throw InvalidInput("x", "sample dimension mismatch");
  std::vector<double> out(data.size());
  for (std::size_t s = 0; s < data.size(); ++s) out[s] = forward(net, data.row(s));
  return mean_squared(out, data.y);
}

double loss_and_gradient(const NetworkParams& net, const Samples& data, std::vector<double>& grad) {
  if (data.empty()) throw InvalidInput("data", "empty sample set");
  if (data.dim != net.input_dim) throw InvalidInput("x", "sample dimension mismatch");
  const std::size_t in = net.input_dim;
  const std::size_t hid = net.hidden_nodes;
  grad.assign(net.parameter_count(), 0.0);
  double* g_wih = grad.data();
  double* g_bh = g_wih + hid * in;
  double* g_who = g_bh + hid;
  double& g_bo = grad.back();

  const double inv_n = 1.0 / static_cast<double>(data.size());
  std::vector<double> h(hid);
  double loss = 0.0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const double* x = data.x.data() + s * in;
    for (std::size_t j = 0; j < hid; ++j) h[j] = hidden_unit(net, j, x);
    const double err = output_unit(net, h.data()) - data.y[s];
    loss += err * err;
    const double d_out = 2.0 * err * inv_n;
    g_bo += d_out;
    for (std::size_t j = 0; j < hid; ++j) {
      g_who[j] += d_out * h[j];
      const double d_pre = d_out * net.weights_ho[j] * (1.0 - h[j] * h[j]);
      g_bh[j] += d_pre;
      double* row = g_wih + j * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += d_pre * x[i];
    }
  }
  return loss * inv_n;
}

NetworkParams random_init(const Architecture& arch, std::uint64_t seed) {
  if (arch.input_dim == 0 || arch.hidden_nodes == 0)
    throw InvalidInput("arch", "input_dim and hidden_nodes must be >= 1");
  NetworkParams net = NetworkParams::zeros(arch.input_dim, arch.hidden_nodes);
  std::mt19937_64 rng(seed);
  // Glorot-uniform weights, zero biases.
  const double lim_ih = std::sqrt(6.0 / static_cast<double>(arch.input_dim + arch.hidden_nodes));
  const double lim_ho = std::sqrt(6.0 / static_cast<double>(arch.hidden_nodes + 1));
  std::uniform_real_distribution<double> u_ih(-lim_ih, lim_ih);
  std::uniform_real_distribution<double> u_ho(-lim_ho, lim_ho);
  for (auto& w : net.weights_ih) w = u_ih(rng);
  for (auto& w : net.weights_ho) w = u_ho(rng);
  return net;
}

GdResult gd_train(const NetworkParams& start, const Samples& data, const TrainConfig& cfg) {
  validate(cfg);
  validate(start);
  GdResult res;
  res.net = start;
  double lr = cfg.learn_rate;
  constexpr double kMinLearnRate = 1e-4;

  std::vector<double> grad;
  double loss = loss_and_gradient(res.net, data, grad);
  if (!std::isfinite(loss)) throw TrainingDiverged(0);
  res.loss_trace.reserve(cfg.gd_iterations + 1);
  res.loss_trace.push_back(loss);

  std::vector<double> params = res.net.flatten();
  std::vector<double> cand_params(params.size());
  std::vector<double> cand_grad;
  NetworkParams cand = res.net;
  for (std::size_t it = 1; it <= cfg.gd_iterations; ++it) {
    for (std::size_t p = 0; p < params.size(); ++p) cand_params[p] = params[p] - lr * grad[p];
    cand.assign(cand_params);
    const double cand_loss = loss_and_gradient(cand, data, cand_grad);
    if (!std::isfinite(cand_loss)) throw TrainingDiverged(it);
    if (cand_loss <= loss) {
      params.swap(cand_params);
      grad.swap(cand_grad);
      loss = cand_loss;
    } else {
      lr = std::max(lr * 0.5, kMinLearnRate);
    }
    res.loss_trace.push_back(loss);
  }
  res.net.assign(params);
  res.final_learn_rate = lr;
  return res;
}

namespace {

// Hidden activations and outputs for every sample, updated one parameter at
// a time during annealing.
class EnergyCache {
 public:
  EnergyCache(const NetworkParams& net, const Samples& data)
      : net_(net), data_(data), h_(data.size() * net.hidden_nodes), out_(data.size()) {
    for (std::size_t s = 0; s < data.size(); ++s) {
      double* h = h_.data() + s * net_.hidden_nodes;
      for (std::size_t j = 0; j < net_.hidden_nodes; ++j) h[j] = hidden_unit(net_, j, sample(s));
      out_[s] = output_unit(net_, h);
    }
    energy_ = mean_squared(out_, data_.y);
    col_.resize(data.size());
    cand_out_.resize(data.size());
    scratch_.resize(net.hidden_nodes);
  }

  const NetworkParams& net() const { return net_; }
  double energy() const { return energy_; }

  // Energy with parameter `idx` (flatten order) moved by `delta`; the move is
  // staged until commit().
  double propose(std::size_t idx, double delta) {
    const std::size_t in = net_.input_dim;
    const std::size_t hid = net_.hidden_nodes;
    staged_idx_ = idx;
    staged_old_ = value(idx);
    value(idx) = staged_old_ + delta;

    if (idx < hid * in + hid) {
      unit_ = idx < hid * in ? idx / in : idx - hid * in;
      for (std::size_t s = 0; s < data_.size(); ++s) {
        col_[s] = hidden_unit(net_, unit_, sample(s));
        const double* h = h_.data() + s * hid;
        std::copy(h, h + hid, scratch_.begin());
        scratch_[unit_] = col_[s];
        cand_out_[s] = output_unit(net_, scratch_.data());
      }
      hidden_changed_ = true;
    } else {
      for (std::size_t s = 0; s < data_.size(); ++s)
        cand_out_[s] = output_unit(net_, h_.data() + s * hid);
      hidden_changed_ = false;
    }
    cand_energy_ = mean_squared(cand_out_, data_.y);
    return cand_energy_;
  }

  void commit() {
    if (hidden_changed_) {
      for (std::size_t s = 0; s < data_.size(); ++s)
        h_[s * net_.hidden_nodes + unit_] = col_[s];
    }
    out_.swap(cand_out_);
    energy_ = cand_energy_;
  }

  void reject() { value(staged_idx_) = staged_old_; }

 private:
  const double* sample(std::size_t s) const { return data_.x.data() + s * data_.dim; }

  double& value(std::size_t idx) {
    const std::size_t n_wih = net_.weights_ih.size();
    const std::size_t hid = net_.hidden_nodes;
    if (idx < n_wih) return net_.weights_ih[idx];
    idx -= n_wih;
    if (idx < hid) return net_.bias_h[idx];
    idx -= hid;
    if (idx < hid) return net_.weights_ho[idx];
    return net_.bias_o;
  }

  NetworkParams net_;
  const Samples& data_;
  std::vector<double> h_;
  std::vector<double> out_;
  double energy_ = 0.0;

  std::vector<double> col_;
  std::vector<double> cand_out_;
  std::vector<double> scratch_;
  std::size_t staged_idx_ = 0;
  double staged_old_ = 0.0;
  std::size_t unit_ = 0;
  bool hidden_changed_ = false;
  double cand_energy_ = 0.0;
};

}  // namespace

SaResult sa_anneal(const Samples& data, const TrainConfig& cfg, const NetworkParams& start) {
  validate(cfg);
  validate(start);
  if (data.empty()) throw InvalidInput("data", "empty sample set");
  if (data.dim != start.input_dim) throw InvalidInput("x", "sample dimension mismatch");

  EnergyCache cache(start, data);
  SaResult res;
  res.net = start;
  res.initial_energy = cache.energy();
  res.best_energy = cache.energy();
  res.best_energy_trace.reserve(cfg.sa_iterations);

  std::mt19937_64 rng(splitmix64(cfg.seed ^ 0x5a5a5a5a5a5a5a5aULL));
  std::uniform_int_distribution<std::size_t> pick(0, start.parameter_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double stop_temp = std::max(cfg.sa_final_temp, 1e-8);
  double t = cfg.sa_initial_temp;
  for (std::size_t step = 0; step < cfg.sa_iterations && !(t < stop_temp); ++step) {
    const double sigma = 0.5 * (t / cfg.sa_initial_temp) + 0.01;
    for (std::size_t inner = 0; inner < cfg.sa_inner_loops; ++inner) {
      const std::size_t idx = pick(rng);
      const double delta = sigma * gauss(rng);
      const double current = cache.energy();
      const double proposed = cache.propose(idx, delta);
      const double u = unit(rng);
      const bool accept = std::isfinite(proposed) &&
                          (proposed <= current || u < std::exp(-(proposed - current) / t));
      if (accept) {
        cache.commit();
        ++res.accepted;
        if (proposed < res.best_energy) {
          res.best_energy = proposed;
          res.net = cache.net();
        }
      } else {
        cache.reject();
      }
    }
    res.best_energy_trace.push_back(res.best_energy);
    t *= cfg.sa_drop_ratio;
  }
  return res;
}

NetworkParams sa_init(const Samples& data, const TrainConfig& cfg, const Architecture& arch) {
  return sa_anneal(data, cfg, random_init(arch, cfg.seed)).net;
}

TargetScaler TargetScaler::fit(std::span<const double> y, bool enabled) {
  TargetScaler s;
  if (!enabled || y.empty()) return s;
  const double n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.std = y.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return s;
}

EvalReport evaluate(std::span<const double> pred, std::span<const double> truth, bool ordered) {
  if (pred.size() != truth.size())
    throw InvalidInput("pred", "prediction and truth lengths differ");
  if (pred.empty()) throw InvalidInput("pred", "evaluation needs at least one sample");
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] == 0.0) zeros.push_back(i);
  if (!zeros.empty()) throw MapeUndefined(std::move(zeros));

  EvalReport r;
  r.n = pred.size();
  double abs_sum = 0.0;
  double pct_sum = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const double e = std::abs(pred[i] - truth[i]);
    abs_sum += e;
    pct_sum += e / std::abs(truth[i]);
  }
  r.mae = abs_sum / static_cast<double>(r.n);
  r.mape = 100.0 * pct_sum / static_cast<double>(r.n);

  if (ordered && r.n >= 2) {
    auto sign = [](double v) { return (v > 0) - (v < 0); };
    std::size_t same = 0;
    for (std::size_t i = 0; i + 1 < r.n; ++i)
      if (sign(pred[i + 1] - pred[i]) == sign(truth[i + 1] - truth[i])) ++same;
    r.trend_accuracy = 100.0 * static_cast<double>(same) / static_cast<double>(r.n - 1);
  }
  return r;
}

TrainOutcome train_sa_bpnn(const Samples& train, const Samples& validation, const TrainConfig& cfg,
                           const Architecture& arch) {
  validate(cfg);
  if (train.empty()) throw InvalidInput("train", "training set is empty");
  if (train.dim != arch.input_dim) throw InvalidInput("x", "training dimension mismatch");

  TrainOutcome out;
  out.surrogate.scaler = TargetScaler::fit(train.y, cfg.target_normalization);
  Samples z(train.dim);
  z.x = train.x;
  z.y.reserve(train.size());
  for (double v : train.y) z.y.push_back(out.surrogate.scaler.to_z(v));

  NetworkParams start = random_init(arch, cfg.seed);
  if (cfg.simulated_annealing) {
    SaResult sa = sa_anneal(z, cfg, start);
    start = std::move(sa.net);
    out.sa_energy = sa.best_energy;
  } else {
    out.sa_energy = mse(start, z);
  }
  GdResult gd = gd_train(start, z, cfg);
  out.surrogate.net = std::move(gd.net);
  out.train_mse = gd.loss_trace.back();

  if (!validation.empty()) {
    std::vector<double> pred(validation.size());
    for (std::size_t i = 0; i < validation.size(); ++i)
      pred[i] = out.surrogate.predict(validation.row(i));
    out.validation = evaluate(pred, validation.y, true);
  }
  return out;
}

}  // namespace tbm
