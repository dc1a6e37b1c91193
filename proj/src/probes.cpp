#include "lsam/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "lsam/rng.hpp"

namespace lsam {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TabularDataset gen_spiral(const SpiralConfig& cfg) {
  if (cfg.n <= 0 || cfg.n % 2 != 0) {
    throw ConfigError("spiral: n must be positive and even for balanced classes");
  }
  if (cfg.turns <= 0 || cfg.noise_std < 0) {
    throw ConfigError("spiral: turns must be positive and noise_std nonnegative");
  }
  TabularDataset out;
  out.schema = {{"x1", FeatureKind::kNumeric, {}},
                {"x2", FeatureKind::kNumeric, {}},
                {"x3", FeatureKind::kNumeric, {}},
                {"x4", FeatureKind::kNumeric, {}}};
  out.target_name = "y";
  out.class_labels = {"0", "1"};
  out.n_rows = cfg.n;
  out.values.resize(static_cast<std::size_t>(cfg.n) * 4);
  out.mask.assign(static_cast<std::size_t>(cfg.n) * 4, 0);
  out.targets.resize(static_cast<std::size_t>(cfg.n));

  Rng rng(cfg.seed);
  const std::int64_t per_class = cfg.n / 2;
  for (std::int64_t r = 0; r < cfg.n; ++r) {
    const std::int32_t y = static_cast<std::int32_t>(r % 2);
    const std::int64_t i = r / 2;
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(per_class);
    const double angle = cfg.turns * 2.0 * kPi * t + static_cast<double>(y) * kPi;
    const double radius = t;
    double* row = out.values.data() + r * 4;
    row[0] = radius * std::cos(angle) + cfg.noise_std * rng.normal();
    row[1] = radius * std::sin(angle) + cfg.noise_std * rng.normal();
    row[2] = rng.normal();
    row[3] = static_cast<double>(y) + rng.uniform();
    out.targets[static_cast<std::size_t>(r)] = y;
  }
  return out;
}

TabularDataset missingness_inject(const TabularDataset& data, std::int32_t feature,
                                  double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw ConfigError("missingness_inject: fraction must lie in [0, 1)");
  }
  if (feature < 0 || feature >= data.n_features()) {
    throw DataError("missingness_inject: feature index out of range");
  }
  TabularDataset out = data;
  const std::int64_t k =
      static_cast<std::int64_t>(std::ceil(fraction * static_cast<double>(data.n_rows)));
  if (k == 0) return out;
  Rng rng(seed);
  std::vector<std::int64_t> rows(static_cast<std::size_t>(data.n_rows));
  std::iota(rows.begin(), rows.end(), 0);
  for (std::int64_t i = 0; i < k; ++i) {
    const std::int64_t j =
        i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(data.n_rows - i)));
    std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
  }
  for (std::int64_t i = 0; i < k; ++i) out.set_missing(rows[static_cast<std::size_t>(i)], feature);
  return out;
}

double subset_distance(const LatentFn& latent, const TabularDataset& data,
                       const SubsetSpec& a, const SubsetSpec& b, std::int64_t embed_dim) {
  std::vector<std::int64_t> rows;
  for (std::int64_t r = 0; r < data.n_rows; ++r) {
    bool ok = true;
    for (std::int32_t f : a.indices) ok = ok && !data.missing(r, f);
    for (std::int32_t f : b.indices) ok = ok && !data.missing(r, f);
    if (ok) rows.push_back(r);
  }
  if (rows.empty()) {
    throw DataError("subset_distance: no row observes both " + a.str() + " and " + b.str());
  }
  const std::vector<double> za = latent(data, rows, a);
  const std::vector<double> zb = latent(data, rows, b);
  double acc = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double ss = 0.0;
    for (std::int64_t j = 0; j < embed_dim; ++j) {
      const double diff = za[r * static_cast<std::size_t>(embed_dim) + static_cast<std::size_t>(j)] -
                          zb[r * static_cast<std::size_t>(embed_dim) + static_cast<std::size_t>(j)];
      ss += diff * diff;
    }
    acc += std::sqrt(ss);
  }
  return acc / static_cast<double>(rows.size());
}

void SampleSet::add_key(const std::string& key, int repeats) {
  keys.push_back(key);
  values.emplace_back(static_cast<std::size_t>(repeats), 0.0);
}

std::vector<double>& SampleSet::at(const std::string& key) {
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] == key) return values[i];
  }
  throw Error("sample key '" + key + "' not found");
}

const std::vector<double>& SampleSet::at(const std::string& key) const {
  return const_cast<SampleSet*>(this)->at(key);
}

double SampleSet::mean(const std::string& key) const { return mean_of(at(key)); }

TTest SampleSet::compare(const std::string& a, const std::string& b) const {
  return two_sample_t_test(at(a), at(b));
}

std::string subset_label(const std::vector<FeatureSchema>& schema, const SubsetSpec& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.indices.size(); ++i) {
    if (i) out += ",";
    out += schema[static_cast<std::size_t>(s.indices[i])].name;
  }
  return out + "}";
}

namespace {

std::uint64_t repeat_seed(std::uint64_t base, int repeat) {
  return base * 1000003ULL + static_cast<std::uint64_t>(repeat);
}

struct TrainedRun {
  TabularDataset full_std;  // whole dataset after standardization
  LsamModel lsam;
  std::optional<EnsembleModel> ensemble;
};

// One bootstrap repeat: fresh spiral (optionally with injected missingness
// in one feature), split, standardize, train. A diverged run is re-seeded
// once before the error propagates.
TrainedRun train_run(const ProbeOptions& opts, std::uint64_t seed, bool with_ensemble,
                     std::int32_t inject_feature = -1, double inject_fraction = 0.0) {
  for (int attempt = 0;; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : seed ^ 0x5DEECE66DULL;
    try {
      SpiralConfig scfg = opts.spiral;
      scfg.seed = s;
      TabularDataset data = gen_spiral(scfg);
      if (inject_feature >= 0) {
        data = missingness_inject(data, inject_feature, inject_fraction, s ^ 0xA5A5A5A5ULL);
      }
      SplitSpec sp = opts.split;
      sp.seed = s;
      Splits splits = split(data, sp);
      const Standardizer stdz = Standardizer::fit(splits.train);
      splits.train = stdz.apply(splits.train);
      splits.valid = stdz.apply(splits.valid);
      splits.test = stdz.apply(splits.test);

      LsamConfig mcfg = opts.model;
      mcfg.out_dim = data.n_classes();
      Rng init(s ^ 0xC0FFEEULL);
      TrainConfig tcfg = opts.train;
      tcfg.seed = s ^ 0xBEEFULL;

      TrainedRun run{stdz.apply(data),
                     LsamModel(mcfg, data.schema, init),
                     std::nullopt};
      fit(run.lsam, splits, tcfg);

      if (with_ensemble) {
        EnsembleConfig ecfg;
        ecfg.embed_dim = mcfg.embed_dim;
        ecfg.hidden_dim = mcfg.hidden();
        ecfg.out_dim = mcfg.out_dim;
        Rng einit(s ^ 0xE17ULL);
        run.ensemble.emplace(ecfg, data.schema, einit);
        TrainConfig etcfg = tcfg;
        etcfg.seed = s ^ 0xE5EEDULL;
        fit(*run.ensemble, splits, etcfg);
      }
      return run;
    } catch (const TrainingError&) {
      if (attempt >= 1) throw;
    }
  }
}

template <class Fn>
void parallel_repeats(int repeats, int jobs, Fn&& body) {
  std::exception_ptr failure = nullptr;
#pragma omp parallel for num_threads(std::max(1, jobs)) schedule(dynamic, 1)
  for (int r = 0; r < repeats; ++r) {
    try {
      body(r);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Table12Result run_table12(const ProbeOptions& opts) {
  if (opts.repeats < 2) throw ConfigError("probe: needs at least 2 repeats for t-tests");
  const std::vector<SubsetSpec> singles = {SubsetSpec{0}, SubsetSpec{1}, SubsetSpec{0, 1},
                                           SubsetSpec{2}, SubsetSpec{3}};
  const std::vector<SubsetSpec> bases = {SubsetSpec{0}, SubsetSpec{1}, SubsetSpec{0, 1},
                                         SubsetSpec{}};
  const SubsetSpec empty;
  const std::int32_t noise_feat = 2, signal_feat = 3;

  // Key layout is fixed up front so repeats can write into their slots.
  TabularDataset proto = gen_spiral(SpiralConfig{.n = 2, .seed = 0});
  Table12Result result;
  for (const auto& u : singles) {
    result.lsam.add_key("t1:" + subset_label(proto.schema, u), opts.repeats);
  }
  for (const auto& u : bases) {
    result.lsam.add_key("t2:" + subset_label(proto.schema, u) + "+noise", opts.repeats);
    result.lsam.add_key("t2:" + subset_label(proto.schema, u) + "+signal", opts.repeats);
  }
  if (opts.with_ensemble) result.ensemble = result.lsam;  // same keys, fresh slots
  result.empty_class1_prob.assign(static_cast<std::size_t>(opts.repeats), 0.0);

  parallel_repeats(opts.repeats, opts.jobs, [&](int r) {
    TrainedRun run = train_run(opts, repeat_seed(opts.seed, r), opts.with_ensemble);
    const std::int64_t e = run.lsam.config().embed_dim;
    LatentFn lsam_fn = [&](const TabularDataset& d, const std::vector<std::int64_t>& rows,
                           const SubsetSpec& s) { return run.lsam.latents(d, rows, s); };
    std::size_t slot = static_cast<std::size_t>(r);
    std::size_t key = 0;
    for (const auto& u : singles) {
      result.lsam.values[key++][slot] =
          subset_distance(lsam_fn, run.full_std, empty, u, e);
    }
    for (const auto& u : bases) {
      result.lsam.values[key++][slot] =
          subset_distance(lsam_fn, run.full_std, u, u.plus(noise_feat), e);
      result.lsam.values[key++][slot] =
          subset_distance(lsam_fn, run.full_std, u, u.plus(signal_feat), e);
    }
    result.empty_class1_prob[slot] = run.lsam.empty_set_probs()[1];

    if (run.ensemble) {
      LatentFn ens_fn = [&](const TabularDataset& d, const std::vector<std::int64_t>& rows,
                            const SubsetSpec& s) { return run.ensemble->latents(d, rows, s); };
      key = 0;
      for (const auto& u : singles) {
        result.ensemble->values[key++][slot] =
            subset_distance(ens_fn, run.full_std, empty, u, e);
      }
      for (const auto& u : bases) {
        result.ensemble->values[key++][slot] =
            subset_distance(ens_fn, run.full_std, u, u.plus(noise_feat), e);
        result.ensemble->values[key++][slot] =
            subset_distance(ens_fn, run.full_std, u, u.plus(signal_feat), e);
      }
    }
  });
  return result;
}

SweepResult run_missingness_sweep(const ProbeOptions& opts) {
  if (opts.repeats < 2) throw ConfigError("probe: needs at least 2 repeats for t-tests");
  SweepResult result;
  result.levels = {0.0, 0.2, 0.4, 0.6, 0.8, 0.99};
  const std::vector<SubsetSpec> bases = {SubsetSpec{0}, SubsetSpec{1}, SubsetSpec{0, 1},
                                         SubsetSpec{}};
  const std::int32_t signal_feat = 3;
  TabularDataset proto = gen_spiral(SpiralConfig{.n = 2, .seed = 0});
  for (const auto& u : bases) result.subset_keys.push_back(subset_label(proto.schema, u));
  for (const auto& fs : proto.schema) result.var_names.push_back(fs.name);

  const std::size_t n_levels = result.levels.size();
  result.dist.assign(bases.size(),
                     std::vector<std::vector<double>>(
                         n_levels, std::vector<double>(static_cast<std::size_t>(opts.repeats))));
  result.drop.assign(result.var_names.size(),
                     std::vector<std::vector<double>>(
                         n_levels, std::vector<double>(static_cast<std::size_t>(opts.repeats))));

  const int total = opts.repeats * static_cast<int>(n_levels);
  parallel_repeats(total, opts.jobs, [&](int idx) {
    const int r = idx / static_cast<int>(n_levels);
    const std::size_t li = static_cast<std::size_t>(idx % static_cast<int>(n_levels));
    const double level = result.levels[li];
    TrainedRun run = train_run(opts, repeat_seed(opts.seed, idx), /*with_ensemble=*/false,
                               signal_feat, level);
    const std::int64_t e = run.lsam.config().embed_dim;
    LatentFn lsam_fn = [&](const TabularDataset& d, const std::vector<std::int64_t>& rows,
                           const SubsetSpec& s) { return run.lsam.latents(d, rows, s); };
    for (std::size_t b = 0; b < bases.size(); ++b) {
      result.dist[b][li][static_cast<std::size_t>(r)] = subset_distance(
          lsam_fn, run.full_std, bases[b], bases[b].plus(signal_feat), e);
    }
    const std::vector<double> probs = run.lsam.drop_probabilities();
    for (std::size_t v = 0; v < probs.size(); ++v) {
      result.drop[v][li][static_cast<std::size_t>(r)] = probs[v];
    }
  });
  return result;
}

namespace {

struct EvalMetrics {
  double nll = 0.0, acc = 0.0;
};

EvalMetrics train_eval(const TabularDataset& data, bool use_lsam, bool impute,
                       const BenchmarkOptions& opts) {
  Splits splits = split(data, opts.split);
  if (impute) {
    const Imputer imp = Imputer::fit(splits.train);
    splits.train = imp.apply(splits.train);
    splits.valid = imp.apply(splits.valid);
    splits.test = imp.apply(splits.test);
  }
  const Standardizer stdz = Standardizer::fit(splits.train);
  splits.train = stdz.apply(splits.train);
  splits.valid = stdz.apply(splits.valid);
  splits.test = stdz.apply(splits.test);

  EvalMetrics out;
  if (use_lsam) {
    LsamConfig mcfg = opts.model;
    mcfg.out_dim = data.n_classes();
    Rng init(opts.train.seed ^ 0xC0FFEEULL);
    LsamModel model(mcfg, data.schema, init);
    fit(model, splits, opts.train);
    std::tie(out.nll, out.acc) = nll_and_accuracy(model, splits.test);
  } else {
    EnsembleConfig ecfg;
    ecfg.embed_dim = opts.model.embed_dim;
    ecfg.hidden_dim = opts.model.hidden();
    ecfg.out_dim = data.n_classes();
    Rng init(opts.train.seed ^ 0xE17ULL);
    EnsembleModel model(ecfg, data.schema, init);
    fit(model, splits, opts.train);
    std::tie(out.nll, out.acc) = nll_and_accuracy(model, splits.test);
  }
  return out;
}

}  // namespace

std::vector<BenchmarkRow> benchmark_run(const TabularDataset& complete,
                                        const BenchmarkOptions& opts) {
  if (complete.missing_count() != 0) {
    throw DataError("benchmark: the baseline dataset must be complete");
  }
  const TabularDataset corrupted = corrupt(complete, opts.corruption);

  std::vector<BenchmarkRow> rows;
  for (int m = 0; m < 2; ++m) {
    const bool use_lsam = m == 0;
    if (use_lsam && !opts.run_lsam) continue;
    if (!use_lsam && !opts.run_ensemble) continue;
    const EvalMetrics base = train_eval(complete, use_lsam, /*impute=*/false, opts);
    for (int s = 0; s < 2; ++s) {
      const bool impute = s == 1;
      if (!impute && !opts.strategy_none) continue;
      if (impute && !opts.strategy_impute) continue;
      const EvalMetrics got = train_eval(corrupted, use_lsam, impute, opts);
      BenchmarkRow row;
      row.model = use_lsam ? "lsam" : "ensemble";
      row.strategy = impute ? "simple-impute" : "none";
      row.baseline_nll = base.nll;
      row.baseline_acc = base.acc;
      row.nll = got.nll;
      row.acc = got.acc;
      row.nll_delta = base.nll - got.nll;
      row.acc_delta = got.acc - base.acc;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace lsam
