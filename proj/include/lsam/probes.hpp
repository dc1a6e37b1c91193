#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lsam/corruption.hpp"
#include "lsam/dataset.hpp"
#include "lsam/ensemble.hpp"
#include "lsam/model.hpp"
#include "lsam/stats.hpp"
#include "lsam/subset.hpp"
#include "lsam/training.hpp"

namespace lsam {

// Two interleaved spiral arms (one per class) plus a pure-noise feature
// x3 ~ N(0,1) and an informative feature x4 = y + U[0,1).
struct SpiralConfig {
  std::int64_t n = 2000;  // must be even: classes are exactly balanced
  double turns = 2.0;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
};

TabularDataset gen_spiral(const SpiralConfig& cfg);

// MCAR within a single column: ceil(fraction * n) uniformly chosen cells of
// the feature are masked. fraction in [0, 1).
TabularDataset missingness_inject(const TabularDataset& data, std::int32_t feature,
                                  double fraction, std::uint64_t seed);

// (data, rows, subset) -> latents, rows x embed.
using LatentFn = std::function<std::vector<double>(
    const TabularDataset&, const std::vector<std::int64_t>&, const SubsetSpec&)>;

// Mean over eligible rows of the Euclidean distance between the two subset
// latents; rows missing any cell of either subset are skipped, and all rows
// skipped is an error.
double subset_distance(const LatentFn& latent, const TabularDataset& data,
                       const SubsetSpec& a, const SubsetSpec& b, std::int64_t embed_dim);

// Named bootstrap samples (one value per repeat).
struct SampleSet {
  std::vector<std::string> keys;
  std::vector<std::vector<double>> values;

  void add_key(const std::string& key, int repeats);
  std::vector<double>& at(const std::string& key);
  const std::vector<double>& at(const std::string& key) const;
  double mean(const std::string& key) const;
  TTest compare(const std::string& a, const std::string& b) const;
};

struct ProbeOptions {
  int repeats = 30;
  int jobs = 1;
  std::uint64_t seed = 7;
  SpiralConfig spiral;
  LsamConfig model;
  TrainConfig train;
  SplitSpec split;
  bool with_ensemble = true;

  ProbeOptions() {
    model.embed_dim = 16;
    model.attn_heads = 4;
    model.out_dim = 2;
    train.max_steps = 2000;
    train.eval_every = 50;
    train.patience = 8;
  }
};

// Subset-distance experiments on the spiral: distances of every probe subset
// to the empty set (table1 keys "{x1}".."{x4}") and unions with the noise or
// signal variable (table2 keys "{x1}+noise" / "{x1}+signal", ...). Each of
// the `repeats` runs trains fresh models on a fresh spiral.
struct Table12Result {
  SampleSet lsam;
  std::optional<SampleSet> ensemble;
  std::vector<double> empty_class1_prob;  // trained LSAM's p(class 1 | empty set)
};

Table12Result run_table12(const ProbeOptions& opts);

// Missingness sweep on x4 (tables 3 and 4 share the same trained runs):
// distances d(u, u + {x4}) and learned drop probabilities per level.
struct SweepResult {
  std::vector<double> levels;              // missing fractions
  std::vector<std::string> subset_keys;    // "{x1}", "{x2}", "{x1,x2}", "{}"
  // dist[subset][level] -> one distance per repeat
  std::vector<std::vector<std::vector<double>>> dist;
  std::vector<std::string> var_names;      // feature names
  // drop[var][level] -> one drop probability per repeat
  std::vector<std::vector<std::vector<double>>> drop;
};

SweepResult run_missingness_sweep(const ProbeOptions& opts);

// Corrupt-then-train comparison against the complete-data baseline.
// nll_delta = baseline_nll - nll (bigger is better); acc_delta = acc -
// baseline_acc.
struct BenchmarkOptions {
  CorruptionSpec corruption;
  SplitSpec split;
  LsamConfig model;
  TrainConfig train;
  bool run_lsam = true;
  bool run_ensemble = true;
  bool strategy_none = true;
  bool strategy_impute = true;
};

struct BenchmarkRow {
  std::string model;
  std::string strategy;  // "none" | "simple-impute"
  double baseline_nll = 0.0, baseline_acc = 0.0;
  double nll = 0.0, acc = 0.0;
  double nll_delta = 0.0, acc_delta = 0.0;
};

std::vector<BenchmarkRow> benchmark_run(const TabularDataset& complete,
                                        const BenchmarkOptions& opts);

std::string subset_label(const std::vector<FeatureSchema>& schema, const SubsetSpec& s);

}  // namespace lsam
