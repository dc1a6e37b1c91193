#include "lsam/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lsam/ensemble.hpp"
#include "lsam/rng.hpp"

namespace lsam {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "adabelief") return OptimizerKind::kAdaBelief;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + name + "' (adam|adabelief|sgd)");
}

std::string optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kAdaBelief: return "adabelief";
    case OptimizerKind::kSgd: return "sgd";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (learning_rate <= 0 || batch_size <= 0 || max_steps <= 0 || patience <= 0 ||
      eval_every <= 0 || weight_decay < 0) {
    throw ConfigError("train config: rates, sizes and periods must be positive");
  }
}

void OptState::init(const ParamStore& params) {
  m.clear();
  v.clear();
  step = 0;
  for (const auto& e : params.entries) {
    m.emplace_back(e.value.size(), 0.0);
    v.emplace_back(e.value.size(), 0.0);
  }
}

void optimizer_step(ParamStore& params, const std::vector<std::vector<double>>& grads,
                    OptState& state, const TrainConfig& cfg) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  state.step += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    auto& p = params.entries[i].value;
    const auto& g = grads[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    switch (cfg.optimizer) {
      case OptimizerKind::kSgd:
        for (std::size_t k = 0; k < p.size(); ++k) p[k] -= cfg.learning_rate * g[k];
        break;
      case OptimizerKind::kAdam:
        for (std::size_t k = 0; k < p.size(); ++k) {
          m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * g[k];
          v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * g[k] * g[k];
          p[k] -= cfg.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + kEps);
        }
        break;
      case OptimizerKind::kAdaBelief:
        for (std::size_t k = 0; k < p.size(); ++k) {
          m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * g[k];
          const double diff = g[k] - m[k];
          v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * diff * diff + kEps;
          p[k] -= cfg.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + kEps);
        }
        break;
    }
    if (params.entries[i].decay && cfg.weight_decay > 0.0) {
      const double shrink = cfg.learning_rate * cfg.weight_decay;
      for (auto& x : p) x -= shrink * x;
    }
  }
}

std::pair<double, double> nll_and_accuracy(const std::vector<double>& log_probs,
                                           const std::vector<std::int32_t>& labels,
                                           std::int64_t n_classes) {
  const std::int64_t n = static_cast<std::int64_t>(labels.size());
  if (n == 0) throw TrainingError("nll_and_accuracy: empty evaluation set");
  double nll = 0.0;
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double* row = log_probs.data() + i * n_classes;
    nll -= row[labels[static_cast<std::size_t>(i)]];
    std::int64_t arg = 0;
    for (std::int64_t c = 1; c < n_classes; ++c) {
      if (row[c] > row[arg]) arg = c;  // strict: ties keep the lowest index
    }
    hits += arg == labels[static_cast<std::size_t>(i)];
  }
  return {nll / static_cast<double>(n), static_cast<double>(hits) / static_cast<double>(n)};
}

namespace {

std::vector<std::vector<double>> snapshot(const ParamStore& params) {
  std::vector<std::vector<double>> s;
  s.reserve(params.entries.size());
  for (const auto& e : params.entries) s.push_back(e.value);
  return s;
}

void restore(ParamStore& params, const std::vector<std::vector<double>>& s) {
  for (std::size_t i = 0; i < params.entries.size(); ++i) params.entries[i].value = s[i];
}

}  // namespace

template <class Model>
TrainReport fit(Model& model, const Splits& splits, const TrainConfig& cfg) {
  cfg.validate();
  if (splits.train.n_rows == 0) throw TrainingError("fit: empty training split");
  const bool has_valid = splits.valid.n_rows > 0;

  Rng rng(cfg.seed);
  OptState opt;
  opt.init(model.params());

  std::vector<std::int64_t> perm(static_cast<std::size_t>(splits.train.n_rows));
  std::iota(perm.begin(), perm.end(), 0);
  std::int64_t cursor = splits.train.n_rows;  // force an initial shuffle

  TrainReport report;
  double best_nll = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params;
  std::int64_t patience_left = cfg.patience;
  std::vector<std::vector<double>> grads(model.params().entries.size());

  Tape tape;
  std::int64_t step = 0;
  for (step = 1; step <= cfg.max_steps; ++step) {
    if (cursor >= splits.train.n_rows) {
      for (std::int64_t i = splits.train.n_rows - 1; i > 0; --i) {
        const std::int64_t j =
            static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
      }
      cursor = 0;
    }
    const std::int64_t take = std::min(cfg.batch_size, splits.train.n_rows - cursor);
    std::span<const std::int64_t> rows(perm.data() + cursor, static_cast<std::size_t>(take));
    cursor += take;

    tape.reset();
    BoundParams bound = model.bind(tape);
    double train_loss = 0.0;
    try {
      Value loss = model.batch_loss(tape, bound, splits.train, rows, rng);
      train_loss = loss.scalar();
      tape.backward(loss);
    } catch (const NumericError& e) {
      throw TrainingError("fit: diverged at step " + std::to_string(step) + " (" + e.what() + ")");
    }
    if (!std::isfinite(train_loss)) {
      throw TrainingError("fit: loss not finite at step " + std::to_string(step));
    }

    for (std::size_t i = 0; i < bound.leaves.size(); ++i) {
      auto g = bound.leaves[i].grad();
      grads[i].assign(g.begin(), g.end());
    }
    optimizer_step(model.params(), grads, opt, cfg);

    if (step % cfg.eval_every == 0) {
      double val_nll = train_loss;
      if (has_valid) {
        val_nll = nll_and_accuracy(model, splits.valid).first;
      }
      report.curve.push_back({step, train_loss, val_nll});
      if (val_nll < best_nll) {
        best_nll = val_nll;
        best_params = snapshot(model.params());
        patience_left = cfg.patience;
      } else {
        if (--patience_left == 0) break;
      }
    }
  }
  report.stop_step = std::min(step, cfg.max_steps);
  if (!best_params.empty()) restore(model.params(), best_params);
  report.best_val_nll = best_nll;
  report.drop_probs = model.drop_probabilities();
  return report;
}

template TrainReport fit<LsamModel>(LsamModel&, const Splits&, const TrainConfig&);
template TrainReport fit<EnsembleModel>(EnsembleModel&, const Splits&, const TrainConfig&);

}  // namespace lsam
