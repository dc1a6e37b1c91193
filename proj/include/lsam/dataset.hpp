#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsam/error.hpp"

namespace lsam {

enum class FeatureKind { kNumeric, kCategorical };

struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  // Categorical level names in code order (lexicographic at inference time);
  // empty for numeric features.
  std::vector<std::string> levels;

  std::int64_t cardinality() const { return static_cast<std::int64_t>(levels.size()); }
};

// n x d value matrix with a missingness mask. Missing cells hold a quiet NaN
// sentinel; the mask is authoritative and no model path may read a masked
// cell. Categorical values are stored as integer codes. Targets are class
// labels in [0, n_classes) and are never missing.
struct TabularDataset {
  std::vector<FeatureSchema> schema;
  std::string target_name = "y";
  std::vector<std::string> class_labels;
  std::int64_t n_rows = 0;
  std::vector<double> values;        // n_rows * d, row-major
  std::vector<std::uint8_t> mask;    // n_rows * d, 1 = missing
  std::vector<std::int32_t> targets; // n_rows

  std::int64_t n_features() const { return static_cast<std::int64_t>(schema.size()); }
  std::int32_t n_classes() const { return static_cast<std::int32_t>(class_labels.size()); }

  double value(std::int64_t r, std::int64_t c) const { return values[r * n_features() + c]; }
  bool missing(std::int64_t r, std::int64_t c) const { return mask[r * n_features() + c] != 0; }
  std::int64_t missing_count() const;

  void set_missing(std::int64_t r, std::int64_t c);

  // Subset of rows, in the given order.
  TabularDataset take_rows(const std::vector<std::int64_t>& rows) const;

  // Internal consistency (buffer sizes, codes in range, NaN iff masked).
  void validate() const;
};

// CSV ingestion (RFC-4180 style, header required). An empty cell or the
// literal "NA" marks a missing value. Without a schema, a column is numeric
// when every observed cell parses as a double, otherwise categorical with
// levels coded in lexicographic order.
TabularDataset load_csv(const std::string& path, const std::string& target_name,
                        const std::vector<FeatureSchema>* schema = nullptr);

void write_csv(const TabularDataset& data, const std::string& path);

// Per-feature standardization statistics, fit on the training split over
// observed cells only. Numeric features get observed mean 0 / population
// variance 1; categorical and masked cells are untouched. A zero-variance
// feature is flagged constant and its scale left at 1.
struct FeatureStats {
  double mean = 0.0;
  double scale = 1.0;
  bool constant = false;
};

struct Standardizer {
  std::vector<FeatureStats> stats;

  static Standardizer fit(const TabularDataset& train);
  TabularDataset apply(const TabularDataset& data) const;
};

struct SplitSpec {
  double train_fraction = 0.8;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct Splits {
  TabularDataset train, valid, test;
};

// Stratified by class label, deterministic under the seed. Partitions are
// disjoint and exhaustive; every class must have at least as many rows as
// there are nonzero-fraction splits.
Splits split(const TabularDataset& data, const SplitSpec& spec);

}  // namespace lsam
