#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsam/dataset.hpp"
#include "lsam/rng.hpp"
#include "lsam/subset.hpp"
#include "lsam/tape.hpp"

namespace lsam {

struct LsamConfig {
  std::int64_t embed_dim = 32;
  std::int32_t attn_layers = 2;
  std::int32_t attn_heads = 4;
  std::int64_t hidden_dim = 0;  // 0 -> 2 * embed_dim
  double concrete_temperature = 0.1;
  std::int32_t out_dim = 2;

  std::int64_t hidden() const { return hidden_dim > 0 ? hidden_dim : 2 * embed_dim; }
  void validate() const;
};

// Named flat parameter arrays. `decay` marks membership in the weight-decay
// group (everything except the dropout logits rho).
struct ParamStore {
  struct Entry {
    std::string name;
    Shape shape;
    std::vector<double> value;
    bool decay = true;
  };
  std::vector<Entry> entries;

  std::size_t add(const std::string& name, const Shape& shape, bool decay);
  const Entry& at(const std::string& name) const;
  Entry& at(const std::string& name);
  std::int64_t total_size() const;
};

// Parameter leaves bound onto one tape, parallel to ParamStore::entries.
struct BoundParams {
  std::vector<Value> leaves;
};

// A dataset batch prepared for the graph: masked cells are substituted with
// a neutral constant before any value enters the tape, so the NaN sentinel
// is never read. The observed indicator carries the real missingness.
struct Batch {
  std::int64_t n = 0;
  std::vector<double> observed;                  // n x d, 1.0 observed / 0.0 missing
  std::vector<std::vector<double>> numeric_cols; // per feature: n x 1 (empty if categorical)
  std::vector<std::vector<std::int32_t>> cat_codes;
  std::vector<std::int32_t> labels;
};

Batch make_batch(const TabularDataset& data, std::span<const std::int64_t> rows);

// Concrete relaxation of per-feature Bernoulli keep-gates:
//   gate_i = sigmoid((-rho_i + L_i) / temperature),  L_i = Gumbel - Gumbel,
// which is sigmoid((logit(1 - p_i) + noise) / T) with p_i = sigmoid(rho_i).
// Differentiable w.r.t. rho; training mode only.
Value sample_concrete_mask(Tape& tape, Value rho, double temperature, Rng& rng);

// The latent space attention model: per-feature embedding networks, a
// learned aggregation token attending over participating feature embeddings
// (pre-norm residual layers), and an output head on the token's final state.
// The participation mask (missingness x feature gates) enters every layer's
// attention as a multiplicative softmax gate; when nothing participates the
// attention context is the zero vector and the latent is a constant of the
// parameters.
class LsamModel {
 public:
  LsamModel(const LsamConfig& cfg, std::vector<FeatureSchema> schema, Rng& rng);
  LsamModel(const LsamConfig& cfg, std::vector<FeatureSchema> schema, ParamStore params);

  const LsamConfig& config() const { return cfg_; }
  const std::vector<FeatureSchema>& schema() const { return schema_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  BoundParams bind(Tape& tape) const;

  struct Forward {
    Value latent;     // [n, embed]
    Value logits;     // [n, out]
    Value log_probs;  // [n, out]
  };

  // gates: rank-1 [d] feature mask (soft during training); an invalid Value
  // means all-ones (evaluation). Participation = observed * gates.
  Forward forward(Tape& tape, const BoundParams& bound, const Batch& batch,
                  Value gates = {}) const;

  // Training objective for one batch: concrete mask sampled from rho, then
  // mean cross-entropy. One mask draw per batch.
  Value batch_loss(Tape& tape, const BoundParams& bound, const TabularDataset& data,
                   std::span<const std::int64_t> rows, Rng& rng) const;

  // Evaluation-mode log-probabilities (concrete dropout disabled).
  std::vector<double> eval_log_probs(const TabularDataset& data,
                                     const std::vector<std::int64_t>& rows) const;

  // Evaluation-mode latents (participation = observed features).
  std::vector<double> eval_latents(const TabularDataset& data,
                                   const std::vector<std::int64_t>& rows) const;

  // Latents with a hard feature mask = indicator of `subset`. Every listed
  // row must have the whole subset observed. Returns rows x embed.
  std::vector<double> latents(const TabularDataset& data,
                              const std::vector<std::int64_t>& rows,
                              const SubsetSpec& subset) const;

  // Single-row form of the above.
  std::vector<double> latent(const TabularDataset& data, std::int64_t row,
                             const SubsetSpec& subset) const;

  // Class probabilities assigned to the empty feature set (constant across
  // rows by construction).
  std::vector<double> empty_set_probs() const;

  // sigmoid(rho): learned per-feature drop probabilities.
  std::vector<double> drop_probabilities() const;

 private:
  void build_params(Rng& rng);
  void check_params() const;

  LsamConfig cfg_;
  std::vector<FeatureSchema> schema_;
  ParamStore params_;
};

}  // namespace lsam
