#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsam/dataset.hpp"
#include "lsam/model.hpp"

namespace lsam {

enum class OptimizerKind { kAdam, kAdaBelief, kSgd };

OptimizerKind parse_optimizer(const std::string& name);
std::string optimizer_name(OptimizerKind k);

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  std::int64_t batch_size = 128;
  std::int64_t max_steps = 5000;
  std::int64_t patience = 20;    // validation checks without improvement
  std::int64_t eval_every = 50;  // steps between validation checks
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  struct Check {
    std::int64_t step = 0;
    double train_loss = 0.0;
    double val_nll = 0.0;
  };
  std::vector<Check> curve;
  std::int64_t stop_step = 0;
  double best_val_nll = 0.0;
  std::vector<double> drop_probs;  // sigmoid(rho); empty for models without rho
};

// First/second moment state, one slot per parameter entry.
struct OptState {
  std::vector<std::vector<double>> m, v;
  std::int64_t step = 0;

  void init(const ParamStore& params);
};

// One optimizer update. Adam/AdaBelief use beta1=0.9, beta2=0.999, eps=1e-8
// with bias correction; weight decay is decoupled and applied only to
// entries flagged decay (rho is excluded).
void optimizer_step(ParamStore& params, const std::vector<std::vector<double>>& grads,
                    OptState& state, const TrainConfig& cfg);

// Mean negative log-likelihood and accuracy under evaluation-mode
// predictions; argmax ties break toward the lowest class index.
std::pair<double, double> nll_and_accuracy(const std::vector<double>& log_probs,
                                           const std::vector<std::int32_t>& labels,
                                           std::int64_t n_classes);

template <class Model>
std::pair<double, double> nll_and_accuracy(const Model& model, const TabularDataset& data) {
  std::vector<std::int64_t> rows(static_cast<std::size_t>(data.n_rows));
  for (std::int64_t i = 0; i < data.n_rows; ++i) rows[static_cast<std::size_t>(i)] = i;
  return nll_and_accuracy(model.eval_log_probs(data, rows), data.targets, data.n_classes());
}

// The optimization loop: shuffled mini-batches, one stochastic feature-mask
// draw per step (inside the model's batch_loss), cross-entropy gradient,
// optimizer update, periodic validation with early stopping that restores
// the best-validation parameters. Models provide params() / bind() /
// batch_loss() / eval_log_probs() / drop_probabilities().
template <class Model>
TrainReport fit(Model& model, const Splits& splits, const TrainConfig& cfg);

extern template TrainReport fit<LsamModel>(LsamModel&, const Splits&, const TrainConfig&);

class EnsembleModel;
extern template TrainReport fit<EnsembleModel>(EnsembleModel&, const Splits&, const TrainConfig&);

}  // namespace lsam
