#include "lsam/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lsam/rng.hpp"

namespace lsam {

namespace {

void check_spec(const CorruptionSpec& spec) {
  if (spec.column_fraction <= 0.0 || spec.column_fraction > 1.0 ||
      spec.cell_fraction <= 0.0 || spec.cell_fraction > 1.0) {
    throw ConfigError("corrupt: fractions must lie in (0, 1]");
  }
}

void check_complete(const TabularDataset& data) {
  if (data.missing_count() != 0) {
    throw DataError("corrupt: input dataset already has missing values");
  }
}

std::int64_t ceil_frac(double f, std::int64_t n) {
  return static_cast<std::int64_t>(std::ceil(f * static_cast<double>(n)));
}

// k distinct values from [lo, hi) by partial Fisher-Yates, sorted.
std::vector<std::int64_t> choose(std::int64_t lo, std::int64_t hi, std::int64_t k, Rng& rng) {
  std::vector<std::int64_t> pool(static_cast<std::size_t>(hi - lo));
  std::iota(pool.begin(), pool.end(), lo);
  for (std::int64_t i = 0; i < k; ++i) {
    const std::int64_t j =
        i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(pool.size() - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Row indices of the k largest values of `col`, ties broken by row index.
std::vector<std::int64_t> top_rows(const std::vector<double>& col, std::int64_t k) {
  std::vector<std::int64_t> order(col.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return col[static_cast<std::size_t>(a)] > col[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  return order;
}

std::vector<double> column_copy(const TabularDataset& data, std::int64_t j) {
  std::vector<double> col(static_cast<std::size_t>(data.n_rows));
  for (std::int64_t r = 0; r < data.n_rows; ++r) col[static_cast<std::size_t>(r)] = data.value(r, j);
  return col;
}

}  // namespace

MissingPattern parse_pattern(const std::string& name) {
  if (name == "mcar") return MissingPattern::kMcar;
  if (name == "mar") return MissingPattern::kMar;
  if (name == "mnar") return MissingPattern::kMnar;
  throw ConfigError("unknown missingness pattern '" + name + "' (mcar|mar|mnar)");
}

std::string pattern_name(MissingPattern p) {
  switch (p) {
    case MissingPattern::kMcar: return "mcar";
    case MissingPattern::kMar: return "mar";
    case MissingPattern::kMnar: return "mnar";
  }
  return "?";
}

TabularDataset corrupt_mcar(const TabularDataset& data, const CorruptionSpec& spec) {
  check_spec(spec);
  check_complete(data);
  const std::int64_t d = data.n_features();
  const std::int64_t n = data.n_rows;
  Rng rng(spec.seed);
  TabularDataset out = data;
  const std::int64_t n_cols = ceil_frac(spec.column_fraction, d);
  const std::int64_t n_cells = ceil_frac(spec.cell_fraction, n);
  for (std::int64_t j : choose(0, d, n_cols, rng)) {
    for (std::int64_t r : choose(0, n, n_cells, rng)) out.set_missing(r, j);
  }
  return out;
}

TabularDataset corrupt_mar(const TabularDataset& data, const CorruptionSpec& spec) {
  check_spec(spec);
  check_complete(data);
  const std::int64_t d = data.n_features();
  const std::int64_t n = data.n_rows;
  if (d < 2) throw DataError("corrupt_mar: needs at least 2 feature columns");
  Rng rng(spec.seed);
  TabularDataset out = data;
  // Every target column needs a left neighbor, so candidates start at 1.
  const std::int64_t n_cols = std::min(ceil_frac(spec.column_fraction, d), d - 1);
  const std::int64_t n_cells = ceil_frac(spec.cell_fraction, n);
  for (std::int64_t j : choose(1, d, n_cols, rng)) {
    const std::vector<double> neighbor = column_copy(data, j - 1);  // pre-corruption snapshot
    for (std::int64_t r : top_rows(neighbor, n_cells)) out.set_missing(r, j);
  }
  return out;
}

TabularDataset corrupt_mnar(const TabularDataset& data, const CorruptionSpec& spec) {
  check_spec(spec);
  check_complete(data);
  const std::int64_t d = data.n_features();
  const std::int64_t n = data.n_rows;
  Rng rng(spec.seed);
  TabularDataset out = data;
  const std::int64_t n_cols = ceil_frac(spec.column_fraction, d);
  const std::int64_t n_cells = ceil_frac(spec.cell_fraction, n);
  for (std::int64_t j : choose(0, d, n_cols, rng)) {
    const std::vector<double> own = column_copy(data, j);
    for (std::int64_t r : top_rows(own, n_cells)) out.set_missing(r, j);
  }
  return out;
}

TabularDataset corrupt(const TabularDataset& data, const CorruptionSpec& spec) {
  switch (spec.pattern) {
    case MissingPattern::kMcar: return corrupt_mcar(data, spec);
    case MissingPattern::kMar: return corrupt_mar(data, spec);
    case MissingPattern::kMnar: return corrupt_mnar(data, spec);
  }
  throw ConfigError("corrupt: bad pattern");
}

}  // namespace lsam
