#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsam/checkpoint.hpp"
#include "lsam/corruption.hpp"
#include "lsam/dataset.hpp"
#include "lsam/ensemble.hpp"
#include "lsam/probes.hpp"
#include "lsam/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsam;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t env_seed_default() {
  if (const char* env = std::getenv("LSAM_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 7;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

json model_config_json(const LsamConfig& m) {
  return {{"embed_dim", m.embed_dim},
          {"attn_layers", m.attn_layers},
          {"attn_heads", m.attn_heads},
          {"hidden_dim", m.hidden()},
          {"concrete_temperature", m.concrete_temperature},
          {"out_dim", m.out_dim}};
}

json train_config_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"weight_decay", t.weight_decay},
          {"batch_size", t.batch_size},
          {"max_steps", t.max_steps},
          {"patience", t.patience},
          {"eval_every", t.eval_every},
          {"optimizer", optimizer_name(t.optimizer)},
          {"seed", t.seed}};
}

json split_config_json(const SplitSpec& s) {
  return {{"train_fraction", s.train_fraction},
          {"valid_fraction", s.valid_fraction},
          {"test_fraction", s.test_fraction},
          {"seed", s.seed}};
}

// Shared flag groups.
struct ModelFlags {
  LsamConfig cfg;
  void attach(CLI::App* app) {
    app->add_option("--embed-dim", cfg.embed_dim, "Latent/embedding width");
    app->add_option("--attn-layers", cfg.attn_layers, "Attention layers");
    app->add_option("--attn-heads", cfg.attn_heads, "Attention heads");
    app->add_option("--hidden-dim", cfg.hidden_dim, "Hidden width of embedding/output nets (0 = 2x embed)");
    app->add_option("--temperature", cfg.concrete_temperature, "Concrete relaxation temperature");
  }
};

struct TrainFlags {
  TrainConfig cfg;
  std::string optimizer = "adam";
  void attach(CLI::App* app) {
    app->add_option("--learning-rate", cfg.learning_rate, "Learning rate");
    app->add_option("--weight-decay", cfg.weight_decay, "Decoupled weight decay");
    app->add_option("--batch-size", cfg.batch_size, "Mini-batch size");
    app->add_option("--max-steps", cfg.max_steps, "Maximum optimization steps");
    app->add_option("--patience", cfg.patience, "Validation checks without improvement before stopping");
    app->add_option("--eval-every", cfg.eval_every, "Steps between validation checks");
    app->add_option("--optimizer", optimizer, "adam|adabelief|sgd");
  }
  TrainConfig resolve(std::uint64_t seed) {
    cfg.optimizer = parse_optimizer(optimizer);
    cfg.seed = seed;
    return cfg;
  }
};

struct SplitFlags {
  SplitSpec spec;
  void attach(CLI::App* app) {
    app->add_option("--train-fraction", spec.train_fraction, "Training fraction");
    app->add_option("--valid-fraction", spec.valid_fraction, "Validation fraction");
    app->add_option("--test-fraction", spec.test_fraction, "Test fraction");
  }
};

Splits standardized(const TabularDataset& data, const SplitSpec& spec, Standardizer* out_stdz,
                    bool impute) {
  Splits splits = split(data, spec);
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
  if (out_stdz) *out_stdz = stdz;
  return splits;
}

int cmd_spiral_gen(std::int64_t n, double turns, double noise_std, std::uint64_t seed,
                   const std::string& out_dir) {
  SpiralConfig cfg{n, turns, noise_std, seed};
  const TabularDataset data = gen_spiral(cfg);
  fs::create_directories(out_dir);
  const fs::path out = fs::path(out_dir) / "spiral.csv";
  write_csv(data, out.string());
  std::cout << "wrote " << out.string() << " (" << data.n_rows << " rows, "
            << data.n_features() + 1 << " columns)\n";
  return 0;
}

int cmd_corrupt(const std::string& input, const std::string& pattern, double column_fraction,
                double cell_fraction, std::uint64_t seed, const std::string& target,
                std::string out_file) {
  const TabularDataset data = load_csv(input, target);
  CorruptionSpec spec;
  spec.pattern = parse_pattern(pattern);
  spec.column_fraction = column_fraction;
  spec.cell_fraction = cell_fraction;
  spec.seed = seed;
  const TabularDataset out = corrupt(data, spec);
  if (out_file.empty()) {
    out_file = (fs::path(input).stem().string() + "_" + pattern + ".csv");
  }
  if (fs::path(out_file).has_parent_path()) {
    fs::create_directories(fs::path(out_file).parent_path());
  }
  write_csv(out, out_file);
  std::cout << "wrote " << out_file << " (" << out.missing_count() << " missing cells)\n";
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& target, const std::string& model_kind,
              const std::string& impute, ModelFlags& model_flags, TrainFlags& train_flags,
              SplitFlags& split_flags, std::uint64_t seed, const std::string& out_dir) {
  const TabularDataset data = load_csv(data_path, target);
  split_flags.spec.seed = seed;
  const TrainConfig tcfg = train_flags.resolve(seed);
  const bool do_impute = impute == "simple";
  if (!do_impute && impute != "none") throw ConfigError("--impute must be none|simple");

  Standardizer stdz;
  const Splits splits = standardized(data, split_flags.spec, &stdz, do_impute);

  fs::create_directories(out_dir);
  TrainReport report;
  double test_nll = 0.0, test_acc = 0.0;
  json cfg_json;
  if (model_kind == "lsam") {
    LsamConfig mcfg = model_flags.cfg;
    mcfg.out_dim = data.n_classes();
    Rng init(seed ^ 0xC0FFEEULL);
    LsamModel model(mcfg, data.schema, init);
    report = fit(model, splits, tcfg);
    std::tie(test_nll, test_acc) = nll_and_accuracy(model, splits.test);
    save_checkpoint(checkpoint_of(model, target, data.class_labels, stdz),
                    (fs::path(out_dir) / "checkpoint.json").string());
    cfg_json = model_config_json(mcfg);
  } else if (model_kind == "ensemble") {
    EnsembleConfig ecfg;
    ecfg.embed_dim = model_flags.cfg.embed_dim;
    ecfg.hidden_dim = model_flags.cfg.hidden();
    ecfg.out_dim = data.n_classes();
    Rng init(seed ^ 0xE17ULL);
    EnsembleModel model(ecfg, data.schema, init);
    report = fit(model, splits, tcfg);
    std::tie(test_nll, test_acc) = nll_and_accuracy(model, splits.test);
    save_checkpoint(checkpoint_of(model, target, data.class_labels, stdz),
                    (fs::path(out_dir) / "checkpoint.json").string());
    cfg_json = {{"embed_dim", ecfg.embed_dim}, {"hidden_dim", ecfg.hidden()},
                {"out_dim", ecfg.out_dim}};
  } else {
    throw ConfigError("--model must be lsam|ensemble");
  }

  json jrep;
  jrep["version"] = kVersion;
  jrep["config"] = {{"command", "train"},       {"data", data_path},
                    {"target", target},          {"model", model_kind},
                    {"impute", impute},          {"seed", seed},
                    {"model_config", cfg_json},  {"train_config", train_config_json(tcfg)},
                    {"split", split_config_json(split_flags.spec)}};
  jrep["stop_step"] = report.stop_step;
  jrep["best_val_nll"] = report.best_val_nll;
  jrep["test_nll"] = test_nll;
  jrep["test_accuracy"] = test_acc;
  jrep["drop_probabilities"] = report.drop_probs;
  json curve = json::array();
  for (const auto& c : report.curve) {
    curve.push_back({{"step", c.step}, {"train_loss", c.train_loss}, {"val_nll", c.val_nll}});
  }
  jrep["curve"] = curve;
  write_text(fs::path(out_dir) / "train_report.json", jrep.dump(2));

  std::string curve_csv = "step,train_loss,val_nll\n";
  for (const auto& c : report.curve) {
    curve_csv += std::to_string(c.step) + "," + fmt(c.train_loss) + "," + fmt(c.val_nll) + "\n";
  }
  write_text(fs::path(out_dir) / "loss_curve.csv", curve_csv);

  std::cout << "model " << model_kind << ": stopped at step " << report.stop_step
            << ", best validation NLL " << report.best_val_nll << "\n"
            << "test NLL " << test_nll << ", test accuracy " << test_acc << "\n"
            << "checkpoint and reports in " << out_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& out_dir) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  TabularDataset data = load_csv(data_path, ck.target_name, &ck.schema);
  data = ck.standardizer.apply(data);
  double nll = 0.0, acc = 0.0;
  if (ck.kind == "lsam") {
    const LsamModel model = ck.make_lsam();
    std::tie(nll, acc) = nll_and_accuracy(model, data);
  } else {
    const EnsembleModel model = ck.make_ensemble();
    std::tie(nll, acc) = nll_and_accuracy(model, data);
  }
  std::cout << "NLL " << nll << ", accuracy " << acc << " over " << data.n_rows << " rows\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    json j;
    j["version"] = kVersion;
    j["config"] = {{"command", "eval"}, {"checkpoint", checkpoint_path}, {"data", data_path}};
    j["nll"] = nll;
    j["accuracy"] = acc;
    j["rows"] = data.n_rows;
    write_text(fs::path(out_dir) / "eval.json", j.dump(2));
  }
  return 0;
}

json probe_config_json(const ProbeOptions& opts, const std::string& experiment) {
  return {{"command", "probe"},
          {"experiment", experiment},
          {"repeats", opts.repeats},
          {"jobs", opts.jobs},
          {"seed", opts.seed},
          {"spiral", {{"n", opts.spiral.n}, {"turns", opts.spiral.turns},
                      {"noise_std", opts.spiral.noise_std}}},
          {"model_config", model_config_json(opts.model)},
          {"train_config", train_config_json(opts.train)},
          {"split", split_config_json(opts.split)}};
}

json sampleset_json(const SampleSet& s) {
  json j = json::object();
  for (std::size_t i = 0; i < s.keys.size(); ++i) j[s.keys[i]] = s.values[i];
  return j;
}

int cmd_probe(const std::string& experiment, ProbeOptions opts, const std::string& out_dir) {
  fs::create_directories(out_dir);
  json jrep;
  jrep["version"] = kVersion;
  jrep["config"] = probe_config_json(opts, experiment);
  std::string csv;

  if (experiment == "table1" || experiment == "table2") {
    const Table12Result result = run_table12(opts);
    const std::vector<double> zeros(static_cast<std::size_t>(opts.repeats), 0.0);
    if (experiment == "table1") {
      csv = "model,subset,mean_distance,p_value\n";
      for (const auto* pair : {&result.lsam, result.ensemble ? &*result.ensemble : nullptr}) {
        if (!pair) continue;
        const std::string name = pair == &result.lsam ? "lsam" : "ensemble";
        for (std::size_t i = 0; i < pair->keys.size(); ++i) {
          if (pair->keys[i].rfind("t1:", 0) != 0) continue;
          const std::string subset = pair->keys[i].substr(3);
          // Distributional difference of the distance sample against the
          // all-zero d(empty,empty) sample.
          const TTest t = two_sample_t_test(pair->values[i], zeros);
          csv += name + "," + subset + "," + fmt(mean_of(pair->values[i])) + "," +
                 fmt(t.p_value) + "\n";
        }
      }
    } else {
      csv = "model,subset,mean_plus_noise,mean_plus_signal,p_value\n";
      for (const auto* pair : {&result.lsam, result.ensemble ? &*result.ensemble : nullptr}) {
        if (!pair) continue;
        const std::string name = pair == &result.lsam ? "lsam" : "ensemble";
        for (const std::string base : {"{x1}", "{x2}", "{x1,x2}", "{}"}) {
          const auto& noise = pair->at("t2:" + base + "+noise");
          const auto& signal = pair->at("t2:" + base + "+signal");
          const TTest t = two_sample_t_test(noise, signal);
          csv += name + "," + base + "," + fmt(mean_of(noise)) + "," + fmt(mean_of(signal)) +
                 "," + fmt(t.p_value) + "\n";
        }
      }
    }
    jrep["samples"] = {{"lsam", sampleset_json(result.lsam)}};
    if (result.ensemble) jrep["samples"]["ensemble"] = sampleset_json(*result.ensemble);
    jrep["empty_set_class1_probability"] = result.empty_class1_prob;
  } else if (experiment == "table3" || experiment == "table4") {
    const SweepResult sweep = run_missingness_sweep(opts);
    json samples = json::object();
    if (experiment == "table3") {
      csv = "subset,level,mean_distance\n";
      for (std::size_t s = 0; s < sweep.subset_keys.size(); ++s) {
        for (std::size_t l = 0; l < sweep.levels.size(); ++l) {
          csv += sweep.subset_keys[s] + "," + fmt(sweep.levels[l]) + "," +
                 fmt(mean_of(sweep.dist[s][l])) + "\n";
          samples[sweep.subset_keys[s]][std::to_string(sweep.levels[l])] = sweep.dist[s][l];
        }
      }
    } else {
      csv = "variable,level,mean_drop_probability\n";
      for (std::size_t v = 0; v < sweep.var_names.size(); ++v) {
        for (std::size_t l = 0; l < sweep.levels.size(); ++l) {
          csv += sweep.var_names[v] + "," + fmt(sweep.levels[l]) + "," +
                 fmt(mean_of(sweep.drop[v][l])) + "\n";
          samples[sweep.var_names[v]][std::to_string(sweep.levels[l])] = sweep.drop[v][l];
        }
      }
    }
    jrep["samples"] = samples;
  } else {
    throw ConfigError("--experiment must be table1|table2|table3|table4");
  }

  write_text(fs::path(out_dir) / ("report_" + experiment + ".csv"), csv);
  write_text(fs::path(out_dir) / ("report_" + experiment + ".json"), jrep.dump(2));
  std::cout << csv;
  std::cout << "reports in " << out_dir << "\n";
  return 0;
}

int cmd_benchmark(const std::string& data_path, std::int64_t spiral_n, const std::string& pattern,
                  double column_fraction, double cell_fraction, int repeats, int jobs,
                  ModelFlags& model_flags, TrainFlags& train_flags, SplitFlags& split_flags,
                  std::uint64_t seed, const std::string& out_dir) {
  TabularDataset data;
  if (data_path.empty()) {
    data = gen_spiral(SpiralConfig{spiral_n, 2.0, 0.1, seed});
  } else {
    data = load_csv(data_path, "y");
  }

  BenchmarkOptions opts;
  opts.corruption.pattern = parse_pattern(pattern);
  opts.corruption.column_fraction = column_fraction;
  opts.corruption.cell_fraction = cell_fraction;
  opts.model = model_flags.cfg;
  opts.split = split_flags.spec;

  std::string csv =
      "seed,model,strategy,baseline_nll,nll,nll_delta,baseline_acc,acc,acc_delta\n";
  json jrows = json::array();
  std::vector<std::vector<BenchmarkRow>> all(static_cast<std::size_t>(repeats));
  std::exception_ptr failure = nullptr;
#pragma omp parallel for num_threads(std::max(1, jobs)) schedule(dynamic, 1)
  for (int rep = 0; rep < repeats; ++rep) {
    try {
      BenchmarkOptions o = opts;
      const std::uint64_t s = seed + static_cast<std::uint64_t>(rep);
      o.corruption.seed = s ^ 0xC0DEULL;
      o.split.seed = s;
      o.train = train_flags.cfg;
      o.train.seed = s ^ 0xBEEFULL;
      all[static_cast<std::size_t>(rep)] = benchmark_run(data, o);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (int rep = 0; rep < repeats; ++rep) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(rep);
    for (const auto& r : all[static_cast<std::size_t>(rep)]) {
      csv += std::to_string(s) + "," + r.model + "," + r.strategy + "," + fmt(r.baseline_nll) +
             "," + fmt(r.nll) + "," + fmt(r.nll_delta) + "," + fmt(r.baseline_acc) + "," +
             fmt(r.acc) + "," + fmt(r.acc_delta) + "\n";
      jrows.push_back({{"seed", s},
                       {"model", r.model},
                       {"strategy", r.strategy},
                       {"baseline_nll", r.baseline_nll},
                       {"nll", r.nll},
                       {"nll_delta", r.nll_delta},
                       {"baseline_acc", r.baseline_acc},
                       {"acc", r.acc},
                       {"acc_delta", r.acc_delta}});
    }
  }

  fs::create_directories(out_dir);
  json jrep;
  jrep["version"] = kVersion;
  train_flags.resolve(seed);
  jrep["config"] = {{"command", "benchmark"},
                    {"data", data_path.empty() ? "spiral" : data_path},
                    {"spiral_n", spiral_n},
                    {"pattern", pattern},
                    {"column_fraction", column_fraction},
                    {"cell_fraction", cell_fraction},
                    {"repeats", repeats},
                    {"jobs", jobs},
                    {"seed", seed},
                    {"model_config", model_config_json(opts.model)},
                    {"train_config", train_config_json(train_flags.cfg)},
                    {"split", split_config_json(opts.split)}};
  jrep["rows"] = jrows;
  write_text(fs::path(out_dir) / "benchmark.csv", csv);
  write_text(fs::path(out_dir) / "benchmark.json", jrep.dump(2));
  std::cout << csv << "reports in " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent space attention model for tabular data with missing values"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read option defaults from a TOML config file");
  app.require_subcommand(1);

  const std::uint64_t default_seed = env_seed_default();

  // spiral-gen
  auto* sg = app.add_subcommand("spiral-gen", "Generate the synthetic spiral dataset");
  std::int64_t sg_n = 2000;
  double sg_turns = 2.0, sg_noise = 0.1;
  std::uint64_t sg_seed = default_seed;
  std::string sg_out = ".";
  sg->add_option("--n", sg_n, "Rows (even; classes balanced)");
  sg->add_option("--turns", sg_turns, "Spiral turns");
  sg->add_option("--noise-std", sg_noise, "Coordinate jitter");
  sg->add_option("--seed", sg_seed, "Random seed");
  sg->add_option("--out", sg_out, "Output directory");

  // corrupt
  auto* co = app.add_subcommand("corrupt", "Delete cells following a missingness pattern");
  std::string co_input, co_pattern = "mcar", co_target = "y", co_out;
  double co_colfrac = 0.4, co_cellfrac = 0.4;
  std::uint64_t co_seed = default_seed;
  co->add_option("input", co_input, "Complete input CSV")->required();
  co->add_option("--pattern", co_pattern, "mcar|mar|mnar");
  co->add_option("--column-fraction", co_colfrac, "Fraction of columns corrupted");
  co->add_option("--cell-fraction", co_cellfrac, "Fraction of cells deleted per column");
  co->add_option("--seed", co_seed, "Random seed");
  co->add_option("--target", co_target, "Target column name (never corrupted)");
  co->add_option("--out", co_out, "Output CSV (default: <input>_<pattern>.csv)");

  // train
  auto* tr = app.add_subcommand("train", "Train a model on a CSV dataset");
  std::string tr_data, tr_target = "y", tr_model = "lsam", tr_impute = "none", tr_out = "run";
  std::uint64_t tr_seed = default_seed;
  ModelFlags tr_mf;
  TrainFlags tr_tf;
  SplitFlags tr_sf;
  tr->add_option("--data", tr_data, "Input CSV")->required();
  tr->add_option("--target", tr_target, "Target column name");
  tr->add_option("--model", tr_model, "lsam|ensemble");
  tr->add_option("--impute", tr_impute, "none|simple (training-split statistics)");
  tr->add_option("--seed", tr_seed, "Random seed");
  tr->add_option("--out", tr_out, "Output directory");
  tr_mf.attach(tr);
  tr_tf.attach(tr);
  tr_sf.attach(tr);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a CSV dataset");
  std::string ev_ck, ev_data, ev_out;
  ev->add_option("--checkpoint", ev_ck, "checkpoint.json from train")->required();
  ev->add_option("--data", ev_data, "Input CSV")->required();
  ev->add_option("--out", ev_out, "Optional output directory for eval.json");

  // probe
  auto* pr = app.add_subcommand("probe", "Latent-space probe experiments on the spiral");
  std::string pr_experiment, pr_out = "probe_out";
  ProbeOptions pr_opts;
  pr_opts.seed = default_seed;
  pr->add_option("--experiment", pr_experiment, "table1|table2|table3|table4")->required();
  pr->add_option("--out", pr_out, "Output directory");
  pr->add_option("--repeats", pr_opts.repeats, "Bootstrap repeats");
  pr->add_option("--jobs", pr_opts.jobs, "Parallel training runs");
  pr->add_option("--seed", pr_opts.seed, "Base seed");
  pr->add_option("--n", pr_opts.spiral.n, "Spiral rows");
  pr->add_option("--turns", pr_opts.spiral.turns, "Spiral turns");
  pr->add_option("--noise-std", pr_opts.spiral.noise_std, "Spiral jitter");
  pr->add_flag("--no-ensemble", [&pr_opts](std::int64_t) { pr_opts.with_ensemble = false; },
               "Skip the power-set ensemble");
  ModelFlags pr_mf;
  pr_mf.cfg = pr_opts.model;
  TrainFlags pr_tf;
  pr_tf.cfg = pr_opts.train;
  pr_mf.attach(pr);
  pr_tf.attach(pr);

  // benchmark
  auto* be = app.add_subcommand("benchmark", "Corruption benchmark against the complete-data baseline");
  std::string be_data, be_pattern = "mcar", be_out = "benchmark_out";
  std::int64_t be_spiral_n = 2000;
  double be_colfrac = 0.4, be_cellfrac = 0.4;
  int be_repeats = 1, be_jobs = 1;
  std::uint64_t be_seed = default_seed;
  ModelFlags be_mf;
  TrainFlags be_tf;
  SplitFlags be_sf;
  be->add_option("--data", be_data, "Complete input CSV (default: generated spiral)");
  be->add_option("--n", be_spiral_n, "Spiral rows when no CSV is given");
  be->add_option("--pattern", be_pattern, "mcar|mar|mnar");
  be->add_option("--column-fraction", be_colfrac, "Fraction of columns corrupted");
  be->add_option("--cell-fraction", be_cellfrac, "Fraction of cells deleted per column");
  be->add_option("--repeats", be_repeats, "Seeds to run");
  be->add_option("--jobs", be_jobs, "Parallel runs");
  be->add_option("--seed", be_seed, "Base seed");
  be->add_option("--out", be_out, "Output directory");
  be_mf.attach(be);
  be_tf.attach(be);
  be_sf.attach(be);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (sg->parsed()) return cmd_spiral_gen(sg_n, sg_turns, sg_noise, sg_seed, sg_out);
    if (co->parsed()) {
      return cmd_corrupt(co_input, co_pattern, co_colfrac, co_cellfrac, co_seed, co_target, co_out);
    }
    if (tr->parsed()) {
      return cmd_train(tr_data, tr_target, tr_model, tr_impute, tr_mf, tr_tf, tr_sf, tr_seed,
                       tr_out);
    }
    if (ev->parsed()) return cmd_eval(ev_ck, ev_data, ev_out);
    if (pr->parsed()) {
      pr_opts.model = pr_mf.cfg;
      pr_opts.train = pr_tf.resolve(pr_opts.seed);
      return cmd_probe(pr_experiment, pr_opts, pr_out);
    }
    if (be->parsed()) {
      return cmd_benchmark(be_data, be_spiral_n, be_pattern, be_colfrac, be_cellfrac, be_repeats,
                           be_jobs, be_mf, be_tf, be_sf, be_seed, be_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
