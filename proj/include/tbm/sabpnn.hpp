#pragma once

// Single-hidden-layer regression network (tanh hidden units, linear output)
// trained by full-batch gradient descent from a simulated-annealing start.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tbm {

struct NetworkParams {
  std::size_t input_dim = 0;
  std::size_t hidden_nodes = 0;
  std::vector<double> weights_ih;  // hidden_nodes x input_dim, row-major
  std::vector<double> bias_h;      // hidden_nodes
  std::vector<double> weights_ho;  // hidden_nodes (single output)
  double bias_o = 0.0;
  std::string hidden_activation = "tanh";
  std::string output_activation = "linear";

  static NetworkParams zeros(std::size_t input_dim, std::size_t hidden_nodes);

  std::size_t parameter_count() const { return hidden_nodes * (input_dim + 2) + 1; }
  // Order: weights_ih, bias_h, weights_ho, bias_o.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  bool operator==(const NetworkParams&) const = default;
};

// Throws InvalidInput on inconsistent shapes, unknown activations or
// non-finite entries.
void validate(const NetworkParams& net);

struct Architecture {
  std::size_t input_dim = 11;
  std::size_t hidden_nodes = 11;

  static Architecture prcr() { return {11, 11}; }
  static Architecture ccr() { return {11, 12}; }
  bool operator==(const Architecture&) const = default;
};

struct TrainConfig {
  double learn_rate = 0.1;
  std::size_t gd_iterations = 2000;
  double sa_initial_temp = 100.0;
  double sa_drop_ratio = 0.99;
  std::size_t sa_inner_loops = 50;
  std::size_t sa_iterations = 1000;
  double sa_final_temp = 0.0;
  std::uint64_t seed = 0;
  bool target_normalization = true;
  // false trains from the plain random initialisation (the BPNN baseline).
  bool simulated_annealing = true;

  // Penetration-rate model hyperparameters.
  static TrainConfig prcr();
  // Cutter-life model hyperparameters.
  static TrainConfig ccr();
  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& cfg);

// Row-major design matrix with one scalar target per row.
struct Samples {
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<double> y;

  explicit Samples(std::size_t dim_ = 0) : dim(dim_) {}
  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }
  void push(std::span<const double> features, double target);
};

double forward(const NetworkParams& net, std::span<const double> x);

// Mean squared error over the samples.
double mse(const NetworkParams& net, const Samples& data);

// MSE and its gradient, flattened in NetworkParams::flatten order.
double loss_and_gradient(const NetworkParams& net, const Samples& data, std::vector<double>& grad);

NetworkParams random_init(const Architecture& arch, std::uint64_t seed);

struct GdResult {
  NetworkParams net;
  std::vector<double> loss_trace;  // initial loss followed by one entry per iteration
  double final_learn_rate = 0.0;
};

// Full-batch gradient descent. A step that would raise the loss is rejected
// and the learning rate halved (floor 1e-4), so the trace never increases.
GdResult gd_train(const NetworkParams& net, const Samples& data, const TrainConfig& cfg);

struct SaResult {
  NetworkParams net;  // best parameters seen
  double initial_energy = 0.0;
  double best_energy = 0.0;
  std::vector<double> best_energy_trace;  // after each temperature step
  std::size_t accepted = 0;
};

// Metropolis annealing over the flattened parameters with energy = training MSE.
SaResult sa_anneal(const Samples& data, const TrainConfig& cfg, const NetworkParams& start);

NetworkParams sa_init(const Samples& data, const TrainConfig& cfg, const Architecture& arch);

struct TargetScaler {
  double mean = 0.0;
  double std = 1.0;

  // A constant target yields std = 0: every prediction collapses to the mean.
  static TargetScaler fit(std::span<const double> y, bool enabled);
  double to_z(double y) const { return std == 0.0 ? 0.0 : (y - mean) / std; }
  double from_z(double z) const { return mean + std * z; }
  bool operator==(const TargetScaler&) const = default;
};

struct Surrogate {
  NetworkParams net;
  TargetScaler scaler;

  double predict(std::span<const double> x) const { return scaler.from_z(forward(net, x)); }
  bool operator==(const Surrogate&) const = default;
};

struct EvalReport {
  double mae = 0.0;
  double mape = 0.0;                     // percent
  std::optional<double> trend_accuracy;  // percent; set only for ordered data with n >= 2
  std::size_t n = 0;

  bool operator==(const EvalReport&) const = default;
};

EvalReport evaluate(std::span<const double> pred, std::span<const double> truth, bool ordered);

struct TrainOutcome {
  Surrogate surrogate;
  EvalReport validation;
  double train_mse = 0.0;  // final loss in normalised target units
  double sa_energy = 0.0;  // energy handed from annealing to descent
};

// Annealed (or random) start, then gradient descent. Targets are in physical
// units; validation rows are assumed to be in tunnel order.
TrainOutcome train_sa_bpnn(const Samples& train, const Samples& validation, const TrainConfig& cfg,
                           const Architecture& arch);

}  // namespace tbm
