#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lsam/corruption.hpp"
#include "lsam/rng.hpp"
#include "lsam/stats.hpp"

using namespace lsam;

namespace {

TabularDataset gaussian_data(std::int64_t n, std::int64_t d, std::uint64_t seed) {
  TabularDataset out;
  out.schema.resize(static_cast<std::size_t>(d));
  for (std::int64_t j = 0; j < d; ++j) {
    out.schema[static_cast<std::size_t>(j)] = {"f" + std::to_string(j), FeatureKind::kNumeric, {}};
  }
  out.class_labels = {"0", "1"};
  out.n_rows = n;
  out.values.resize(static_cast<std::size_t>(n * d));
  out.mask.assign(static_cast<std::size_t>(n * d), 0);
  out.targets.resize(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (auto& v : out.values) v = rng.normal();
  for (auto& y : out.targets) y = static_cast<std::int32_t>(rng.below(2));
  return out;
}

std::vector<std::int64_t> per_column_missing(const TabularDataset& d) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(d.n_features()), 0);
  for (std::int64_t r = 0; r < d.n_rows; ++r) {
    for (std::int64_t c = 0; c < d.n_features(); ++c) counts[static_cast<std::size_t>(c)] += d.missing(r, c);
  }
  return counts;
}

}  // namespace

TEST_CASE("mcar: exact counts - 4 columns x 400 cells on 1000x10 defaults") {
  TabularDataset data = gaussian_data(1000, 10, 1);
  CorruptionSpec spec;
  spec.seed = 42;
  TabularDataset out = corrupt_mcar(data, spec);
  const auto counts = per_column_missing(out);
  std::int64_t corrupted_cols = 0, total = 0;
  for (auto c : counts) {
    if (c > 0) {
      ++corrupted_cols;
      CHECK(c == 400);
    }
    total += c;
  }
  CHECK(corrupted_cols == 4);
  CHECK(total == 1600);  // overall fraction 0.16
  // targets untouched
  for (std::size_t i = 0; i < out.targets.size(); ++i) CHECK(out.targets[i] == data.targets[i]);
}

TEST_CASE("corruption is deterministic under the seed") {
  TabularDataset data = gaussian_data(200, 6, 2);
  CorruptionSpec spec;
  spec.seed = 9;
  for (auto pattern : {MissingPattern::kMcar, MissingPattern::kMar, MissingPattern::kMnar}) {
    spec.pattern = pattern;
    TabularDataset a = corrupt(data, spec);
    TabularDataset b = corrupt(data, spec);
    CHECK(a.mask == b.mask);
  }
}

TEST_CASE("corrupting an already-incomplete dataset is a typed error") {
  TabularDataset data = gaussian_data(50, 4, 3);
  data.set_missing(0, 0);
  CHECK_THROWS_AS(corrupt_mcar(data, CorruptionSpec{}), DataError);
}

TEST_CASE("mcar: deletion independent of cell value (chi-square not rejected)") {
  TabularDataset data = gaussian_data(1000, 10, 4);
  CorruptionSpec spec;
  spec.seed = 7;
  TabularDataset out = corrupt_mcar(data, spec);
  for (std::int64_t j = 0; j < 10; ++j) {
    std::int64_t miss = 0;
    for (std::int64_t r = 0; r < 1000; ++r) miss += out.missing(r, j);
    if (miss == 0) continue;
    // Quartile bins of the original values vs the deletion flag.
    std::vector<double> col(1000);
    for (std::int64_t r = 0; r < 1000; ++r) col[static_cast<std::size_t>(r)] = data.value(r, j);
    std::vector<double> sorted = col;
    std::sort(sorted.begin(), sorted.end());
    auto bin_of = [&](double v) {
      int b = 0;
      for (int q = 1; q < 4; ++q) {
        if (v >= sorted[static_cast<std::size_t>(250 * q)]) b = q;
      }
      return b;
    };
    std::vector<int> flags(1000), bins(1000);
    for (std::int64_t r = 0; r < 1000; ++r) {
      flags[static_cast<std::size_t>(r)] = out.missing(r, j) ? 1 : 0;
      bins[static_cast<std::size_t>(r)] = bin_of(col[static_cast<std::size_t>(r)]);
    }
    const double p = chi_square_independence(flags, bins, 4);
    CHECK(p > 0.01);
  }
}

TEST_CASE("mar: top-40% of the left neighbor determines the deletions") {
  // Column 0 holds 1..10; with cell_fraction 0.4 the rows holding values
  // 7,8,9,10 lose their column-1 cell.
  TabularDataset data = gaussian_data(10, 2, 5);
  for (std::int64_t r = 0; r < 10; ++r) data.values[r * 2] = static_cast<double>(r + 1);
  CorruptionSpec spec;
  spec.pattern = MissingPattern::kMar;
  spec.column_fraction = 0.5;  // ceil(0.5*2)=1 but capped to d-1=1 -> column 1
  spec.seed = 11;
  TabularDataset out = corrupt_mar(data, spec);
  for (std::int64_t r = 0; r < 10; ++r) {
    CHECK(out.missing(r, 1) == (data.value(r, 0) >= 7.0));
    CHECK(!out.missing(r, 0));
  }
}

TEST_CASE("mar: permuting rows permutes the mask identically") {
  TabularDataset data = gaussian_data(100, 5, 6);
  CorruptionSpec spec;
  spec.pattern = MissingPattern::kMar;
  spec.seed = 21;
  TabularDataset base = corrupt_mar(data, spec);

  std::vector<std::int64_t> perm(100);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(77);
  for (std::int64_t i = 99; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  }
  TabularDataset permuted = data.take_rows(perm);
  TabularDataset out = corrupt_mar(permuted, spec);
  for (std::int64_t i = 0; i < 100; ++i) {
    for (std::int64_t j = 0; j < 5; ++j) {
      CHECK(out.missing(i, j) == base.missing(perm[static_cast<std::size_t>(i)], j));
    }
  }
}

TEST_CASE("mar: deletion flag strongly correlates with the left neighbor") {
  TabularDataset data = gaussian_data(1000, 4, 8);
  Rng rng(12);
  for (auto& v : data.values) v = rng.uniform();
  CorruptionSpec spec;
  spec.pattern = MissingPattern::kMar;
  spec.seed = 3;
  TabularDataset out = corrupt_mar(data, spec);
  bool any = false;
  for (std::int64_t j = 1; j < 4; ++j) {
    std::int64_t miss = 0;
    for (std::int64_t r = 0; r < 1000; ++r) miss += out.missing(r, j);
    if (miss == 0) continue;
    any = true;
    // Point-biserial correlation between the deletion flag and the
    // pre-corruption left-neighbor value.
    double m1 = 0, m0 = 0, n1 = 0, n0 = 0, all = 0, all2 = 0;
    for (std::int64_t r = 0; r < 1000; ++r) {
      const double v = data.value(r, j - 1);
      all += v;
      all2 += v * v;
      if (out.missing(r, j)) {
        m1 += v;
        ++n1;
      } else {
        m0 += v;
        ++n0;
      }
    }
    m1 /= n1;
    m0 /= n0;
    const double n = n1 + n0;
    const double sd = std::sqrt(all2 / n - (all / n) * (all / n));
    const double r_pb = (m1 - m0) * std::sqrt((n1 / n) * (n0 / n)) / sd;
    CHECK(std::abs(r_pb) > 0.5);
  }
  CHECK(any);
}

TEST_CASE("mar: fewer than two columns is a typed error") {
  TabularDataset data = gaussian_data(20, 1, 9);
  CorruptionSpec spec;
  spec.pattern = MissingPattern::kMar;
  CHECK_THROWS_AS(corrupt_mar(data, spec), DataError);
}

TEST_CASE("mnar: top values of the column itself are deleted") {
  TabularDataset data = gaussian_data(10, 1, 10);
  for (std::int64_t r = 0; r < 10; ++r) data.values[static_cast<std::size_t>(r)] = static_cast<double>(r + 1);
  CorruptionSpec spec;
  spec.pattern = MissingPattern::kMnar;
  spec.column_fraction = 1.0;
  spec.seed = 1;
  TabularDataset out = corrupt_mnar(data, spec);
  for (std::int64_t r = 0; r < 10; ++r) {
    CHECK(out.missing(r, 0) == (data.value(r, 0) >= 7.0));
  }
}

TEST_CASE("mnar: deleted-cell mean exceeds observed-cell mean in every corrupted column") {
  TabularDataset data = gaussian_data(500, 8, 13);
  CorruptionSpec spec;
  spec.pattern = MissingPattern::kMnar;
  spec.seed = 19;
  TabularDataset out = corrupt_mnar(data, spec);
  std::int64_t corrupted = 0;
  for (std::int64_t j = 0; j < 8; ++j) {
    double del = 0, obs = 0;
    std::int64_t nd = 0, no = 0;
    for (std::int64_t r = 0; r < 500; ++r) {
      if (out.missing(r, j)) {
        del += data.value(r, j);
        ++nd;
      } else {
        obs += data.value(r, j);
        ++no;
      }
    }
    if (nd == 0) continue;
    ++corrupted;
    CHECK(nd == 200);  // ceil(0.4 * 500)
    CHECK(del / static_cast<double>(nd) > obs / static_cast<double>(no));
  }
  CHECK(corrupted == 4);  // ceil(0.4 * 8) columns, exactly
}

TEST_CASE("unselected columns and targets stay untouched across generators") {
  TabularDataset data = gaussian_data(300, 6, 14);
  for (auto pattern : {MissingPattern::kMcar, MissingPattern::kMar, MissingPattern::kMnar}) {
    CorruptionSpec spec;
    spec.pattern = pattern;
    spec.seed = 101;
    TabularDataset out = corrupt(data, spec);
    const auto counts = per_column_missing(out);
    const std::int64_t expect = static_cast<std::int64_t>(std::ceil(0.4 * 300));
    for (auto c : counts) CHECK((c == 0 || c == expect));
    for (std::int64_t r = 0; r < 300; ++r) {
      for (std::int64_t j = 0; j < 6; ++j) {
        if (!out.missing(r, j)) CHECK(out.value(r, j) == data.value(r, j));
      }
    }
    CHECK(out.targets == data.targets);
  }
}
