#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lsam/dataset.hpp"
#include "lsam/probes.hpp"
#include "lsam/rng.hpp"

using namespace lsam;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name) {
    path = std::filesystem::temp_directory_path() / name;
  }
  ~TempFile() { std::filesystem::remove(path); }
  void write(const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
};

}  // namespace

TEST_CASE("load_csv: one empty cell yields exactly one masked entry") {
  TempFile f("lsam_test_basic.csv");
  f.write("a,b,y\n1.0,2.0,0\n,3.0,1\n4.0,5.0,0\n");
  TabularDataset d = load_csv(f.path.string(), "y");
  CHECK(d.n_rows == 3);
  CHECK(d.n_features() == 2);
  CHECK(d.missing_count() == 1);
  CHECK(d.missing(1, 0));
  CHECK(std::isnan(d.value(1, 0)));
  CHECK(d.value(1, 1) == 3.0);
  CHECK(d.targets == std::vector<std::int32_t>{0, 1, 0});
}

TEST_CASE("load_csv: NA token and categorical inference") {
  TempFile f("lsam_test_cat.csv");
  f.write("color,v,y\nred,1,a\nblue,NA,b\nNA,3,a\nblue,4,b\n");
  TabularDataset d = load_csv(f.path.string(), "y");
  CHECK(d.schema[0].kind == FeatureKind::kCategorical);
  CHECK(d.schema[0].levels == std::vector<std::string>{"blue", "red"});  // lexicographic
  CHECK(d.schema[1].kind == FeatureKind::kNumeric);
  CHECK(d.value(0, 0) == 1.0);  // "red" -> code 1
  CHECK(d.missing(1, 1));
  CHECK(d.missing(2, 0));
  CHECK(d.class_labels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_csv: ragged rows, bad numerics and missing targets are typed errors") {
  TempFile f("lsam_test_bad.csv");

  f.write("a,y\n1.0,0\n2.0\n");
  CHECK_THROWS_AS(load_csv(f.path.string(), "y"), DataError);

  f.write("a,y\n1.0,0\nNA,1\n");
  std::vector<FeatureSchema> schema = {{"a", FeatureKind::kNumeric, {}}};
  CHECK_NOTHROW(load_csv(f.path.string(), "y", &schema));
  f.write("a,y\n1.0,0\noops,1\n");
  CHECK_THROWS_AS(load_csv(f.path.string(), "y", &schema), DataError);

  f.write("a,b\n1.0,2.0\n");
  CHECK_THROWS_AS(load_csv(f.path.string(), "y"), DataError);

  f.write("a,y\n1.0,NA\n");
  CHECK_THROWS_AS(load_csv(f.path.string(), "y"), DataError);
}

TEST_CASE("csv round-trip preserves values, mask and schema") {
  Rng rng(99);
  TabularDataset d;
  d.schema = {{"n0", FeatureKind::kNumeric, {}},
              {"n1", FeatureKind::kNumeric, {}},
              {"c0", FeatureKind::kCategorical, {"a", "b", "c"}},
              {"n2", FeatureKind::kNumeric, {}},
              {"n3", FeatureKind::kNumeric, {}}};
  d.target_name = "label";
  d.class_labels = {"0", "1", "2"};
  d.n_rows = 100;
  d.values.resize(500);
  d.mask.assign(500, 0);
  d.targets.resize(100);
  for (std::int64_t r = 0; r < 100; ++r) {
    for (std::int64_t c = 0; c < 5; ++c) {
      d.values[r * 5 + c] = c == 2 ? static_cast<double>(rng.below(3)) : rng.normal() * 13.7;
    }
    d.targets[static_cast<std::size_t>(r)] = static_cast<std::int32_t>(rng.below(3));
    if (rng.uniform() < 0.2) d.set_missing(r, static_cast<std::int64_t>(rng.below(5)));
  }

  TempFile f("lsam_test_roundtrip.csv");
  write_csv(d, f.path.string());
  TabularDataset back = load_csv(f.path.string(), "label");

  CHECK(back.n_rows == d.n_rows);
  REQUIRE(back.schema.size() == d.schema.size());
  for (std::size_t j = 0; j < d.schema.size(); ++j) {
    CHECK(back.schema[j].name == d.schema[j].name);
    CHECK(back.schema[j].kind == d.schema[j].kind);
  }
  CHECK(back.mask == d.mask);
  CHECK(back.targets == d.targets);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (d.mask[i]) continue;
    CHECK(back.values[i] == d.values[i]);  // exact: printed with round-trip digits
  }
}

TEST_CASE("standardize: hand-computed column and degenerate cases") {
  TabularDataset d;
  d.schema = {{"a", FeatureKind::kNumeric, {}},
              {"b", FeatureKind::kNumeric, {}},
              {"c", FeatureKind::kNumeric, {}}};
  d.class_labels = {"0", "1"};
  d.n_rows = 4;
  // column a: observed {1,2,3} + one missing; column b: constant; column c:
  // half missing, observed {10, 30}.
  d.values = {1, 5, 10, 2, 5, std::nan(""), 3, 5, std::nan(""), std::nan(""), 5, 30};
  d.mask = {0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0};
  d.targets = {0, 1, 0, 1};

  const Standardizer s = Standardizer::fit(d);
  // population std of {1,2,3} is sqrt(2/3).
  CHECK(s.stats[0].mean == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.stats[0].scale == doctest::Approx(0.816496580927726).epsilon(1e-12));
  CHECK(s.stats[1].constant);
  CHECK(s.stats[1].scale == 1.0);
  CHECK(s.stats[2].mean == doctest::Approx(20.0).epsilon(1e-12));  // observed half only

  const TabularDataset z = s.apply(d);
  CHECK(z.value(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-9));
  CHECK(z.value(1, 0) == doctest::Approx(0.0));
  CHECK(z.value(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-9));
  CHECK(z.value(0, 1) == 5.0);  // constant column untouched
  CHECK(std::isnan(z.values[5]));

  // Observed training mean 0 / variance 1 afterwards.
  const Standardizer s2 = Standardizer::fit(z);
  CHECK(std::abs(s2.stats[0].mean) < 1e-12);
  CHECK(std::abs(s2.stats[0].scale - 1.0) < 1e-12);

  // Idempotence on observed cells.
  const TabularDataset z2 = s2.apply(z);
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    if (z.mask[i]) continue;
    CHECK(std::abs(z2.values[i] - z.values[i]) < 1e-12);
  }
}

TEST_CASE("split: sizes, determinism, stratification") {
  SpiralConfig cfg;
  cfg.n = 100;
  cfg.seed = 5;
  TabularDataset d = gen_spiral(cfg);

  SplitSpec spec;
  spec.seed = 13;
  const Splits s = split(d, spec);
  CHECK(s.train.n_rows == 80);
  CHECK(s.valid.n_rows == 10);
  CHECK(s.test.n_rows == 10);

  const Splits s2 = split(d, spec);
  CHECK(s.train.values == s2.train.values);
  CHECK(s.valid.values == s2.valid.values);
  CHECK(s.test.values == s2.test.values);

  SplitSpec other = spec;
  other.seed = 14;
  const Splits s3 = split(d, other);
  CHECK(s.train.values != s3.train.values);
}

TEST_CASE("split: 70/30 class ratio preserved within one row per split") {
  TabularDataset d;
  d.schema = {{"a", FeatureKind::kNumeric, {}}};
  d.class_labels = {"0", "1"};
  d.n_rows = 100;
  d.values.resize(100);
  d.mask.assign(100, 0);
  d.targets.resize(100);
  for (std::int64_t r = 0; r < 100; ++r) {
    d.values[static_cast<std::size_t>(r)] = static_cast<double>(r);
    d.targets[static_cast<std::size_t>(r)] = r < 70 ? 0 : 1;
  }
  SplitSpec spec;
  spec.seed = 3;
  const Splits s = split(d, spec);
  auto count1 = [](const TabularDataset& t) {
    std::int64_t c = 0;
    for (auto y : t.targets) c += y == 1;
    return c;
  };
  CHECK(std::abs(count1(s.train) - 24) <= 1);
  CHECK(std::abs(count1(s.valid) - 3) <= 1);
  CHECK(std::abs(count1(s.test) - 3) <= 1);
  CHECK(s.train.n_rows + s.valid.n_rows + s.test.n_rows == 100);
}

TEST_CASE("split: class smaller than the number of splits is a typed error") {
  TabularDataset d;
  d.schema = {{"a", FeatureKind::kNumeric, {}}};
  d.class_labels = {"0", "1"};
  d.n_rows = 12;
  d.values.resize(12);
  d.mask.assign(12, 0);
  d.targets.assign(12, 0);
  d.targets[0] = 1;
  d.targets[1] = 1;  // class 1 has 2 rows < 3 splits
  CHECK_THROWS_AS(split(d, SplitSpec{}), DataError);
}
