#pragma once

#include <cstdint>
#include <vector>

#include "lsam/dataset.hpp"
#include "lsam/model.hpp"
#include "lsam/rng.hpp"
#include "lsam/subset.hpp"
#include "lsam/tape.hpp"

namespace lsam {

struct EnsembleConfig {
  std::int64_t embed_dim = 32;
  std::int64_t hidden_dim = 0;  // 0 -> 2 * embed_dim
  std::int32_t out_dim = 2;

  std::int64_t hidden() const { return hidden_dim > 0 ? hidden_dim : 2 * embed_dim; }
  void validate() const;
};

// Compositional power-set ensemble: one encoder f_k per feature subset U_k
// mapping into a shared latent space, plus one output head g shared by all
// members. At each step every member whose subset is fully observed in the
// batch contributes a cross-entropy term; rows with a missing subset cell
// never reach that member. Inference picks the member for the full set of
// observed features. The empty-set member is a learned constant vector.
class EnsembleModel {
 public:
  // Power set over d features; guarded at d <= 10 (2^d members).
  EnsembleModel(const EnsembleConfig& cfg, std::vector<FeatureSchema> schema, Rng& rng);
  // Explicit member list (used by equivalence tests and checkpoints).
  EnsembleModel(const EnsembleConfig& cfg, std::vector<FeatureSchema> schema,
                std::vector<SubsetSpec> subsets, Rng& rng);
  EnsembleModel(const EnsembleConfig& cfg, std::vector<FeatureSchema> schema,
                std::vector<SubsetSpec> subsets, ParamStore params,
                std::vector<std::uint8_t> trained);

  const EnsembleConfig& config() const { return cfg_; }
  const std::vector<FeatureSchema>& schema() const { return schema_; }
  const std::vector<SubsetSpec>& subsets() const { return subsets_; }
  const std::vector<std::uint8_t>& trained_flags() const { return trained_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  BoundParams bind(Tape& tape) const;

  // Mean over contributing members of the member's mean cross-entropy.
  Value batch_loss(Tape& tape, const BoundParams& bound, const TabularDataset& data,
                   std::span<const std::int64_t> rows, Rng& rng);

  // Per row: the member whose subset equals the observed feature set.
  std::vector<double> eval_log_probs(const TabularDataset& data,
                                     const std::vector<std::int64_t>& rows) const;

  // f_k latents for the requested subset; the subset must be a member and
  // must have been trained, and every row must observe it fully.
  std::vector<double> latents(const TabularDataset& data,
                              const std::vector<std::int64_t>& rows,
                              const SubsetSpec& subset) const;

  std::vector<double> latent(const TabularDataset& data, std::int64_t row,
                             const SubsetSpec& subset) const;

  std::vector<double> drop_probabilities() const { return {}; }

  std::int64_t member_index(const SubsetSpec& subset) const;  // -1 if absent

 private:
  void build_params(Rng& rng);
  Value member_latent(Tape& tape, const BoundParams& bound, std::int64_t k,
                      const std::vector<double>& inputs, std::int64_t n_rows) const;
  Value head(Tape& tape, const BoundParams& bound, Value latent) const;
  std::vector<double> gather_member_inputs(const TabularDataset& data,
                                           const std::vector<std::int64_t>& rows,
                                           const SubsetSpec& subset) const;

  EnsembleConfig cfg_;
  std::vector<FeatureSchema> schema_;
  std::vector<SubsetSpec> subsets_;
  ParamStore params_;
  std::vector<std::uint8_t> trained_;
};

// All feature subsets of [0, d); guarded at d <= 10.
std::vector<SubsetSpec> power_set(std::int64_t d);

// Simple imputation statistics fit on the training split: numeric features
// fill with the observed mean, categorical with the observed mode (ties
// break toward the lowest code). apply() clears the mask.
struct Imputer {
  std::vector<double> fill;

  static Imputer fit(const TabularDataset& train);
  TabularDataset apply(const TabularDataset& data) const;
};

}  // namespace lsam
