#include "lsam/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lsam {

void EnsembleConfig::validate() const {
  if (embed_dim <= 0 || out_dim < 2) {
    throw ConfigError("ensemble config: embed_dim must be positive and out_dim >= 2");
  }
}

std::vector<SubsetSpec> power_set(std::int64_t d) {
  if (d > 10) {
    throw ConfigError("power set over " + std::to_string(d) +
                      " features needs 2^" + std::to_string(d) +
                      " ensemble members; use the attention model instead");
  }
  std::vector<SubsetSpec> out;
  out.reserve(static_cast<std::size_t>(1) << d);
  for (std::uint32_t b = 0; b < (1u << d); ++b) out.push_back(SubsetSpec::from_bits(b));
  return out;
}

EnsembleModel::EnsembleModel(const EnsembleConfig& cfg, std::vector<FeatureSchema> schema, Rng& rng)
    : EnsembleModel(cfg, schema, power_set(static_cast<std::int64_t>(schema.size())), rng) {}

EnsembleModel::EnsembleModel(const EnsembleConfig& cfg, std::vector<FeatureSchema> schema,
                             std::vector<SubsetSpec> subsets, Rng& rng)
    : cfg_(cfg), schema_(std::move(schema)), subsets_(std::move(subsets)) {
  cfg_.validate();
  for (const auto& s : subsets_) s.check_bounds(static_cast<std::int64_t>(schema_.size()));
  trained_.assign(subsets_.size(), 0);
  build_params(rng);
}

EnsembleModel::EnsembleModel(const EnsembleConfig& cfg, std::vector<FeatureSchema> schema,
                             std::vector<SubsetSpec> subsets, ParamStore params,
                             std::vector<std::uint8_t> trained)
    : cfg_(cfg),
      schema_(std::move(schema)),
      subsets_(std::move(subsets)),
      trained_(std::move(trained)) {
  cfg_.validate();
  params_ = std::move(params);
  if (trained_.size() != subsets_.size()) {
    throw ConfigError("ensemble: trained flags do not match member count");
  }
}

namespace {

void fill_normal(std::vector<double>& v, double std, Rng& rng) {
  for (auto& x : v) x = std * rng.normal();
}

double glorot_std(std::int64_t fan_in, std::int64_t fan_out) {
  return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

void EnsembleModel::build_params(Rng& rng) {
  const std::int64_t e = cfg_.embed_dim;
  const std::int64_t h = cfg_.hidden();
  for (std::size_t k = 0; k < subsets_.size(); ++k) {
    const std::string base = "member." + std::to_string(k);
    const std::int64_t in = static_cast<std::int64_t>(subsets_[k].cardinality());
    if (in == 0) {
      auto i = params_.add(base + ".const", Shape::vec(e), true);
      fill_normal(params_.entries[i].value, 1.0, rng);
    } else {
      auto w1 = params_.add(base + ".w1", Shape::mat(in, h), true);
      fill_normal(params_.entries[w1].value, glorot_std(in, h), rng);
      params_.add(base + ".b1", Shape::vec(h), true);
      auto w2 = params_.add(base + ".w2", Shape::mat(h, e), true);
      fill_normal(params_.entries[w2].value, glorot_std(h, e), rng);
      params_.add(base + ".b2", Shape::vec(e), true);
    }
  }
  auto w1 = params_.add("head.w1", Shape::mat(e, h), true);
  fill_normal(params_.entries[w1].value, glorot_std(e, h), rng);
  params_.add("head.b1", Shape::vec(h), true);
  auto w2 = params_.add("head.w2", Shape::mat(h, cfg_.out_dim), true);
  fill_normal(params_.entries[w2].value, glorot_std(h, cfg_.out_dim), rng);
  params_.add("head.b2", Shape::vec(cfg_.out_dim), true);
}

BoundParams EnsembleModel::bind(Tape& tape) const {
  BoundParams b;
  b.leaves.reserve(params_.entries.size());
  for (const auto& e : params_.entries) b.leaves.push_back(tape.leaf(e.shape, e.value));
  return b;
}

std::int64_t EnsembleModel::member_index(const SubsetSpec& subset) const {
  for (std::size_t k = 0; k < subsets_.size(); ++k) {
    if (subsets_[k] == subset) return static_cast<std::int64_t>(k);
  }
  return -1;
}

namespace {

Value leaf_by_name(const ParamStore& params, const BoundParams& bound, const std::string& name) {
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    if (params.entries[i].name == name) return bound.leaves[i];
  }
  throw Error("parameter '" + name + "' not bound");
}

}  // namespace

Value EnsembleModel::member_latent(Tape& tape, const BoundParams& bound, std::int64_t k,
                                   const std::vector<double>& inputs, std::int64_t n_rows) const {
  const std::string base = "member." + std::to_string(k);
  const std::int64_t in = static_cast<std::int64_t>(subsets_[static_cast<std::size_t>(k)].cardinality());
  if (in == 0) {
    return tape.broadcast_row(leaf_by_name(params_, bound, base + ".const"), n_rows);
  }
  Value x = tape.leaf(Shape::mat(n_rows, in), inputs);
  Value h = tape.gelu(tape.add_bias(tape.matmul(x, leaf_by_name(params_, bound, base + ".w1")),
                                    leaf_by_name(params_, bound, base + ".b1")));
  return tape.add_bias(tape.matmul(h, leaf_by_name(params_, bound, base + ".w2")),
                       leaf_by_name(params_, bound, base + ".b2"));
}

Value EnsembleModel::head(Tape& tape, const BoundParams& bound, Value latent) const {
  Value h = tape.gelu(tape.add_bias(tape.matmul(latent, leaf_by_name(params_, bound, "head.w1")),
                                    leaf_by_name(params_, bound, "head.b1")));
  return tape.add_bias(tape.matmul(h, leaf_by_name(params_, bound, "head.w2")),
                       leaf_by_name(params_, bound, "head.b2"));
}

std::vector<double> EnsembleModel::gather_member_inputs(const TabularDataset& data,
                                                        const std::vector<std::int64_t>& rows,
                                                        const SubsetSpec& subset) const {
  std::vector<double> x;
  x.reserve(rows.size() * subset.cardinality());
  for (std::int64_t r : rows) {
    for (std::int32_t f : subset.indices) x.push_back(data.value(r, f));
  }
  return x;
}

Value EnsembleModel::batch_loss(Tape& tape, const BoundParams& bound, const TabularDataset& data,
                                std::span<const std::int64_t> rows, Rng&) {
  std::vector<Value> member_losses;
  std::vector<std::int64_t> member_rows;
  std::vector<std::int32_t> member_labels;
  for (std::size_t k = 0; k < subsets_.size(); ++k) {
    member_rows.clear();
    member_labels.clear();
    for (std::int64_t r : rows) {
      bool complete = true;
      for (std::int32_t f : subsets_[k].indices) {
        if (data.missing(r, f)) {
          complete = false;
          break;
        }
      }
      if (complete) {
        member_rows.push_back(r);
        member_labels.push_back(data.targets[static_cast<std::size_t>(r)]);
      }
    }
    if (member_rows.empty()) continue;  // this member sees nothing this step
    trained_[k] = 1;
    const std::vector<double> inputs = gather_member_inputs(data, member_rows, subsets_[k]);
    Value z = member_latent(tape, bound, static_cast<std::int64_t>(k), inputs,
                            static_cast<std::int64_t>(member_rows.size()));
    Value logits = head(tape, bound, z);
    member_losses.push_back(tape.nll_mean(tape.log_softmax_rows(logits), member_labels));
  }
  if (member_losses.empty()) {
    throw TrainingError("ensemble: no member receives any row in this batch");
  }
  Value total = member_losses[0];
  for (std::size_t i = 1; i < member_losses.size(); ++i) {
    total = tape.add(total, member_losses[i]);
  }
  return tape.scale(total, 1.0 / static_cast<double>(member_losses.size()));
}

std::vector<double> EnsembleModel::eval_log_probs(const TabularDataset& data,
                                                  const std::vector<std::int64_t>& rows) const {
  const std::int64_t d = data.n_features();
  if (d > 31) throw ConfigError("ensemble: too many features");
  // Group rows by observed pattern; each group is served by the member for
  // exactly that subset (the unique maximal observed subset).
  std::map<std::uint32_t, std::vector<std::int64_t>> groups;  // pattern -> positions
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::uint32_t bits = 0;
    for (std::int64_t j = 0; j < d; ++j) {
      if (!data.missing(rows[i], j)) bits |= (1u << j);
    }
    groups[bits].push_back(static_cast<std::int64_t>(i));
  }
  std::vector<double> out(rows.size() * static_cast<std::size_t>(cfg_.out_dim), 0.0);
  Tape tape;
  BoundParams bound = bind(tape);
  for (const auto& [bits, positions] : groups) {
    const SubsetSpec subset = SubsetSpec::from_bits(bits);
    const std::int64_t k = member_index(subset);
    if (k < 0) {
      throw DataError("ensemble: no member for observed set " + subset.str());
    }
    std::vector<std::int64_t> grow;
    grow.reserve(positions.size());
    for (std::int64_t p : positions) grow.push_back(rows[static_cast<std::size_t>(p)]);
    const std::vector<double> inputs = gather_member_inputs(data, grow, subset);
    Value z = member_latent(tape, bound, k, inputs, static_cast<std::int64_t>(grow.size()));
    Value logp = tape.log_softmax_rows(head(tape, bound, z));
    auto lp = logp.data();
    for (std::size_t i = 0; i < positions.size(); ++i) {
      for (std::int32_t c = 0; c < cfg_.out_dim; ++c) {
        out[static_cast<std::size_t>(positions[i]) * cfg_.out_dim + c] =
            lp[i * static_cast<std::size_t>(cfg_.out_dim) + static_cast<std::size_t>(c)];
      }
    }
  }
  return out;
}

std::vector<double> EnsembleModel::latents(const TabularDataset& data,
                                           const std::vector<std::int64_t>& rows,
                                           const SubsetSpec& subset) const {
  subset.check_bounds(static_cast<std::int64_t>(schema_.size()));
  const std::int64_t k = member_index(subset);
  if (k < 0) throw DataError("ensemble: subset " + subset.str() + " is not a member");
  if (!trained_[static_cast<std::size_t>(k)]) {
    throw TrainingError("ensemble: member for subset " + subset.str() +
                        " was never trained (subset never fully observed)");
  }
  for (std::int64_t r : rows) {
    for (std::int32_t f : subset.indices) {
      if (data.missing(r, f)) {
        throw DataError("ensemble latent: subset " + subset.str() +
                        " requests missing cell at row " + std::to_string(r));
      }
    }
  }
  Tape tape;
  BoundParams bound = bind(tape);
  const std::vector<double> inputs = gather_member_inputs(data, rows, subset);
  Value z = member_latent(tape, bound, k, inputs, static_cast<std::int64_t>(rows.size()));
  return std::vector<double>(z.data().begin(), z.data().end());
}

std::vector<double> EnsembleModel::latent(const TabularDataset& data, std::int64_t row,
                                          const SubsetSpec& subset) const {
  return latents(data, {row}, subset);
}

Imputer Imputer::fit(const TabularDataset& train) {
  Imputer imp;
  const std::int64_t d = train.n_features();
  imp.fill.resize(static_cast<std::size_t>(d), 0.0);
  for (std::int64_t j = 0; j < d; ++j) {
    const auto& fs = train.schema[static_cast<std::size_t>(j)];
    if (fs.kind == FeatureKind::kNumeric) {
      double sum = 0.0;
      std::int64_t cnt = 0;
      for (std::int64_t r = 0; r < train.n_rows; ++r) {
        if (train.missing(r, j)) continue;
        sum += train.value(r, j);
        ++cnt;
      }
      if (cnt == 0) {
        throw DataError("impute: feature '" + fs.name + "' has no observed training cells");
      }
      imp.fill[static_cast<std::size_t>(j)] = sum / static_cast<double>(cnt);
    } else {
      std::vector<std::int64_t> counts(static_cast<std::size_t>(fs.cardinality()), 0);
      std::int64_t cnt = 0;
      for (std::int64_t r = 0; r < train.n_rows; ++r) {
        if (train.missing(r, j)) continue;
        counts[static_cast<std::size_t>(train.value(r, j))] += 1;
        ++cnt;
      }
      if (cnt == 0) {
        throw DataError("impute: feature '" + fs.name + "' has no observed training cells");
      }
      std::int64_t mode = 0;
      for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[static_cast<std::size_t>(mode)]) mode = static_cast<std::int64_t>(c);
      }
      imp.fill[static_cast<std::size_t>(j)] = static_cast<double>(mode);
    }
  }
  return imp;
}

TabularDataset Imputer::apply(const TabularDataset& data) const {
  if (fill.size() != static_cast<std::size_t>(data.n_features())) {
    throw DataError("impute: statistics were fit on a different feature count");
  }
  TabularDataset out = data;
  const std::int64_t d = data.n_features();
  for (std::int64_t r = 0; r < data.n_rows; ++r) {
    for (std::int64_t j = 0; j < d; ++j) {
      if (out.missing(r, j)) {
        out.values[r * d + j] = fill[static_cast<std::size_t>(j)];
        out.mask[r * d + j] = 0;
      }
    }
  }
  return out;
}

}  // namespace lsam
