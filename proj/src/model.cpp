#include "lsam/model.hpp"

#include <cmath>

namespace lsam {

void LsamConfig::validate() const {
  if (embed_dim <= 0 || attn_layers <= 0 || attn_heads <= 0 || out_dim < 2) {
    throw ConfigError("lsam config: dimensions must be positive and out_dim >= 2");
  }
  if (embed_dim % attn_heads != 0) {
    throw ConfigError("lsam config: embed_dim " + std::to_string(embed_dim) +
                      " not divisible by attn_heads " + std::to_string(attn_heads));
  }
  if (concrete_temperature <= 0.0) {
    throw ConfigError("lsam config: concrete_temperature must be positive");
  }
}

std::size_t ParamStore::add(const std::string& name, const Shape& shape, bool decay) {
  Entry e;
  e.name = name;
  e.shape = shape;
  e.value.assign(static_cast<std::size_t>(shape.numel()), 0.0);
  e.decay = decay;
  entries.push_back(std::move(e));
  return entries.size() - 1;
}

const ParamStore::Entry& ParamStore::at(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw Error("parameter '" + name + "' not found");
}

ParamStore::Entry& ParamStore::at(const std::string& name) {
  for (auto& e : entries) {
    if (e.name == name) return e;
  }
  throw Error("parameter '" + name + "' not found");
}

std::int64_t ParamStore::total_size() const {
  std::int64_t n = 0;
  for (const auto& e : entries) n += e.shape.numel();
  return n;
}

Batch make_batch(const TabularDataset& data, std::span<const std::int64_t> rows) {
  const std::int64_t d = data.n_features();
  Batch b;
  b.n = static_cast<std::int64_t>(rows.size());
  b.observed.assign(static_cast<std::size_t>(b.n * d), 0.0);
  b.numeric_cols.resize(static_cast<std::size_t>(d));
  b.cat_codes.resize(static_cast<std::size_t>(d));
  b.labels.resize(static_cast<std::size_t>(b.n));
  for (std::int64_t j = 0; j < d; ++j) {
    if (data.schema[static_cast<std::size_t>(j)].kind == FeatureKind::kNumeric) {
      b.numeric_cols[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(b.n), 0.0);
    } else {
      b.cat_codes[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(b.n), 0);
    }
  }
  for (std::int64_t i = 0; i < b.n; ++i) {
    const std::int64_t r = rows[static_cast<std::size_t>(i)];
    b.labels[static_cast<std::size_t>(i)] = data.targets[static_cast<std::size_t>(r)];
    for (std::int64_t j = 0; j < d; ++j) {
      if (data.missing(r, j)) continue;  // substituted value stays 0, gate stays 0
      b.observed[static_cast<std::size_t>(i * d + j)] = 1.0;
      if (data.schema[static_cast<std::size_t>(j)].kind == FeatureKind::kNumeric) {
        b.numeric_cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = data.value(r, j);
      } else {
        b.cat_codes[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
            static_cast<std::int32_t>(data.value(r, j));
      }
    }
  }
  return b;
}

Value sample_concrete_mask(Tape& tape, Value rho, double temperature, Rng& rng) {
  if (temperature <= 0.0) throw ConfigError("concrete mask: temperature must be positive");
  const std::int64_t d = rho.shape().numel();
  std::vector<double> noise(static_cast<std::size_t>(d));
  for (auto& x : noise) x = rng.gumbel() - rng.gumbel();
  Value nz = tape.leaf(Shape::vec(d), noise);
  return tape.sigmoid(tape.scale(tape.add(tape.scale(rho, -1.0), nz), 1.0 / temperature));
}

LsamModel::LsamModel(const LsamConfig& cfg, std::vector<FeatureSchema> schema, Rng& rng)
    : cfg_(cfg), schema_(std::move(schema)) {
  cfg_.validate();
  if (schema_.empty()) throw ConfigError("lsam: empty feature schema");
  build_params(rng);
}

LsamModel::LsamModel(const LsamConfig& cfg, std::vector<FeatureSchema> schema, ParamStore params)
    : cfg_(cfg), schema_(std::move(schema)), params_(std::move(params)) {
  cfg_.validate();
  if (schema_.empty()) throw ConfigError("lsam: empty feature schema");
  check_params();
}

namespace {

void fill_normal(std::vector<double>& v, double std, Rng& rng) {
  for (auto& x : v) x = std * rng.normal();
}

double glorot_std(std::int64_t fan_in, std::int64_t fan_out) {
  return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

void LsamModel::build_params(Rng& rng) {
  const std::int64_t d = static_cast<std::int64_t>(schema_.size());
  const std::int64_t e = cfg_.embed_dim;
  const std::int64_t h = cfg_.hidden();
  const std::int64_t f = 2 * e;  // attention feed-forward width

  params_.add("rho", Shape::vec(d), /*decay=*/false);  // zeros: drop prob 1/2

  auto mat = [&](const std::string& name, std::int64_t r, std::int64_t c) {
    auto i = params_.add(name, Shape::mat(r, c), true);
    fill_normal(params_.entries[i].value, glorot_std(r, c), rng);
  };
  auto vec0 = [&](const std::string& name, std::int64_t n) {
    params_.add(name, Shape::vec(n), true);
  };
  auto ones = [&](const std::string& name, std::int64_t n) {
    auto i = params_.add(name, Shape::vec(n), true);
    for (auto& x : params_.entries[i].value) x = 1.0;
  };

  for (std::int64_t j = 0; j < d; ++j) {
    const std::string base = "psi." + std::to_string(j);
    const auto& fs = schema_[static_cast<std::size_t>(j)];
    if (fs.kind == FeatureKind::kNumeric) {
      mat(base + ".w1", 1, h);
      vec0(base + ".b1", h);
      mat(base + ".w2", h, e);
      vec0(base + ".b2", e);
    } else {
      if (fs.cardinality() <= 0) {
        throw ConfigError("lsam: categorical feature '" + fs.name + "' has no levels");
      }
      mat(base + ".table", fs.cardinality(), e);
    }
  }

  {
    auto i = params_.add("token", Shape::vec(e), true);
    fill_normal(params_.entries[i].value, 1.0, rng);
  }

  for (std::int32_t l = 0; l < cfg_.attn_layers; ++l) {
    const std::string base = "attn." + std::to_string(l);
    ones(base + ".ln_kv.gain", e);
    vec0(base + ".ln_kv.bias", e);
    ones(base + ".ln_q.gain", e);
    vec0(base + ".ln_q.bias", e);
    mat(base + ".wq", e, e);
    vec0(base + ".bq", e);
    mat(base + ".wk", e, e);
    vec0(base + ".bk", e);
    mat(base + ".wv", e, e);
    vec0(base + ".bv", e);
    mat(base + ".wo", e, e);
    vec0(base + ".bo", e);
    ones(base + ".ln_ffn.gain", e);
    vec0(base + ".ln_ffn.bias", e);
    mat(base + ".ffn_w1", e, f);
    vec0(base + ".ffn_b1", f);
    mat(base + ".ffn_w2", f, e);
    vec0(base + ".ffn_b2", e);
  }

  mat("phi.w1", e, h);
  vec0("phi.b1", h);
  mat("phi.w2", h, cfg_.out_dim);
  vec0("phi.b2", cfg_.out_dim);
}

void LsamModel::check_params() const {
  // A parameter store loaded from a checkpoint must match the layout a fresh
  // model of the same config would build.
  Rng probe(0);
  LsamModel fresh(cfg_, schema_, probe);
  if (fresh.params_.entries.size() != params_.entries.size()) {
    throw ConfigError("lsam: checkpoint has wrong parameter count");
  }
  for (std::size_t i = 0; i < params_.entries.size(); ++i) {
    const auto& a = fresh.params_.entries[i];
    const auto& b = params_.entries[i];
    if (a.name != b.name || !(a.shape == b.shape)) {
      throw ConfigError("lsam: checkpoint parameter '" + b.name +
                        "' does not match expected layout");
    }
  }
}

BoundParams LsamModel::bind(Tape& tape) const {
  BoundParams b;
  b.leaves.reserve(params_.entries.size());
  for (const auto& e : params_.entries) b.leaves.push_back(tape.leaf(e.shape, e.value));
  return b;
}

LsamModel::Forward LsamModel::forward(Tape& tape, const BoundParams& bound,
                                      const Batch& batch, Value gates) const {
  const std::int64_t d = static_cast<std::int64_t>(schema_.size());
  const std::int64_t e = cfg_.embed_dim;
  const std::int64_t heads = cfg_.attn_heads;
  const std::int64_t eh = e / heads;
  const std::int64_t n = batch.n;

  auto leaf_of = [&](const std::string& name) -> Value {
    for (std::size_t i = 0; i < params_.entries.size(); ++i) {
      if (params_.entries[i].name == name) return bound.leaves[i];
    }
    throw Error("parameter '" + name + "' not bound");
  };

  if (!gates.valid()) gates = tape.full(Shape::vec(d), 1.0);

  Value obs = tape.leaf(Shape::mat(n, d), batch.observed);
  Value participation = tape.colwise_mul(obs, gates);  // [n, d]

  // Per-feature embeddings; masked cells were substituted before the tape,
  // their features are gated out of every attention layer below.
  std::vector<Value> feats;
  feats.reserve(static_cast<std::size_t>(d));
  for (std::int64_t j = 0; j < d; ++j) {
    const std::string base = "psi." + std::to_string(j);
    if (schema_[static_cast<std::size_t>(j)].kind == FeatureKind::kNumeric) {
      Value col = tape.leaf(Shape::mat(n, 1), batch.numeric_cols[static_cast<std::size_t>(j)]);
      Value hcol = tape.gelu(tape.add_bias(tape.matmul(col, leaf_of(base + ".w1")),
                                           leaf_of(base + ".b1")));
      feats.push_back(tape.add_bias(tape.matmul(hcol, leaf_of(base + ".w2")),
                                    leaf_of(base + ".b2")));
    } else {
      feats.push_back(tape.rows_lookup(leaf_of(base + ".table"),
                                       batch.cat_codes[static_cast<std::size_t>(j)]));
    }
  }
  Value e3 = tape.stack_feats(feats);  // [n, d, e]

  Value state = tape.broadcast_row(leaf_of("token"), n);  // [n, e]

  const double score_scale = 1.0 / std::sqrt(static_cast<double>(eh));
  for (std::int32_t l = 0; l < cfg_.attn_layers; ++l) {
    const std::string base = "attn." + std::to_string(l);
    Value kvn = tape.layer_norm(e3, leaf_of(base + ".ln_kv.gain"), leaf_of(base + ".ln_kv.bias"));
    Value keys = tape.add_bias(tape.matmul(kvn, leaf_of(base + ".wk")), leaf_of(base + ".bk"));
    Value vals = tape.add_bias(tape.matmul(kvn, leaf_of(base + ".wv")), leaf_of(base + ".bv"));
    Value qn = tape.layer_norm(state, leaf_of(base + ".ln_q.gain"), leaf_of(base + ".ln_q.bias"));
    Value q = tape.add_bias(tape.matmul(qn, leaf_of(base + ".wq")), leaf_of(base + ".bq"));

    std::vector<Value> head_ctx;
    head_ctx.reserve(static_cast<std::size_t>(heads));
    for (std::int64_t hh = 0; hh < heads; ++hh) {
      Value qh = tape.slice_last(q, hh * eh, eh);
      Value kh = tape.slice_last(keys, hh * eh, eh);
      Value vh = tape.slice_last(vals, hh * eh, eh);
      Value scores = tape.attn_scores(qh, kh, score_scale);
      Value weights = tape.masked_softmax(scores, participation);
      head_ctx.push_back(tape.attn_context(weights, vh));
    }
    Value ctx = heads == 1 ? head_ctx[0] : tape.concat_cols(head_ctx);
    Value attn_out = tape.add_bias(tape.matmul(ctx, leaf_of(base + ".wo")), leaf_of(base + ".bo"));
    state = tape.add(state, attn_out);

    Value fn = tape.layer_norm(state, leaf_of(base + ".ln_ffn.gain"), leaf_of(base + ".ln_ffn.bias"));
    Value fh = tape.gelu(tape.add_bias(tape.matmul(fn, leaf_of(base + ".ffn_w1")),
                                       leaf_of(base + ".ffn_b1")));
    Value ffn_out = tape.add_bias(tape.matmul(fh, leaf_of(base + ".ffn_w2")),
                                  leaf_of(base + ".ffn_b2"));
    state = tape.add(state, ffn_out);
  }

  Forward out;
  out.latent = state;
  Value ph = tape.gelu(tape.add_bias(tape.matmul(state, leaf_of("phi.w1")), leaf_of("phi.b1")));
  out.logits = tape.add_bias(tape.matmul(ph, leaf_of("phi.w2")), leaf_of("phi.b2"));
  out.log_probs = tape.log_softmax_rows(out.logits);
  return out;
}

Value LsamModel::batch_loss(Tape& tape, const BoundParams& bound, const TabularDataset& data,
                            std::span<const std::int64_t> rows, Rng& rng) const {
  Batch batch = make_batch(data, rows);
  Value rho;
  for (std::size_t i = 0; i < params_.entries.size(); ++i) {
    if (params_.entries[i].name == "rho") rho = bound.leaves[i];
  }
  Value gates = sample_concrete_mask(tape, rho, cfg_.concrete_temperature, rng);
  Forward fwd = forward(tape, bound, batch, gates);
  return tape.nll_mean(fwd.log_probs, batch.labels);
}

std::vector<double> LsamModel::eval_log_probs(const TabularDataset& data,
                                              const std::vector<std::int64_t>& rows) const {
  Tape tape;
  BoundParams bound = bind(tape);
  Batch batch = make_batch(data, rows);
  Forward fwd = forward(tape, bound, batch);
  return std::vector<double>(fwd.log_probs.data().begin(), fwd.log_probs.data().end());
}

std::vector<double> LsamModel::eval_latents(const TabularDataset& data,
                                            const std::vector<std::int64_t>& rows) const {
  Tape tape;
  BoundParams bound = bind(tape);
  Batch batch = make_batch(data, rows);
  Forward fwd = forward(tape, bound, batch);
  return std::vector<double>(fwd.latent.data().begin(), fwd.latent.data().end());
}

std::vector<double> LsamModel::latents(const TabularDataset& data,
                                       const std::vector<std::int64_t>& rows,
                                       const SubsetSpec& subset) const {
  const std::int64_t d = static_cast<std::int64_t>(schema_.size());
  subset.check_bounds(d);
  for (std::int64_t r : rows) {
    for (std::int32_t f : subset.indices) {
      if (data.missing(r, f)) {
        throw DataError("latent: subset " + subset.str() + " requests missing cell at row " +
                        std::to_string(r) + ", feature " + std::to_string(f));
      }
    }
  }
  std::vector<double> indicator(static_cast<std::size_t>(d), 0.0);
  for (std::int32_t f : subset.indices) indicator[static_cast<std::size_t>(f)] = 1.0;

  Tape tape;
  BoundParams bound = bind(tape);
  Batch batch = make_batch(data, rows);
  // Hard mask = subset indicator; verified above to touch observed cells only.
  Value gates = tape.leaf(Shape::vec(d), indicator);
  Forward fwd = forward(tape, bound, batch, gates);
  return std::vector<double>(fwd.latent.data().begin(), fwd.latent.data().end());
}

std::vector<double> LsamModel::latent(const TabularDataset& data, std::int64_t row,
                                      const SubsetSpec& subset) const {
  return latents(data, {row}, subset);
}

std::vector<double> LsamModel::empty_set_probs() const {
  const std::int64_t d = static_cast<std::int64_t>(schema_.size());
  Batch batch;
  batch.n = 1;
  batch.observed.assign(static_cast<std::size_t>(d), 0.0);
  batch.numeric_cols.resize(static_cast<std::size_t>(d));
  batch.cat_codes.resize(static_cast<std::size_t>(d));
  for (std::int64_t j = 0; j < d; ++j) {
    if (schema_[static_cast<std::size_t>(j)].kind == FeatureKind::kNumeric) {
      batch.numeric_cols[static_cast<std::size_t>(j)].assign(1, 0.0);
    } else {
      batch.cat_codes[static_cast<std::size_t>(j)].assign(1, 0);
    }
  }
  batch.labels.assign(1, 0);
  Tape tape;
  BoundParams bound = bind(tape);
  Forward fwd = forward(tape, bound, batch);
  std::vector<double> probs(static_cast<std::size_t>(cfg_.out_dim));
  for (std::size_t c = 0; c < probs.size(); ++c) probs[c] = std::exp(fwd.log_probs.data()[c]);
  return probs;
}

std::vector<double> LsamModel::drop_probabilities() const {
  const auto& rho = params_.at("rho").value;
  std::vector<double> p(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-rho[i]));
  return p;
}

}  // namespace lsam
