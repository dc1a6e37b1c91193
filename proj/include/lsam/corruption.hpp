#pragma once

#include <cstdint>
#include <string>

#include "lsam/dataset.hpp"

namespace lsam {

enum class MissingPattern { kMcar, kMar, kMnar };

MissingPattern parse_pattern(const std::string& name);
std::string pattern_name(MissingPattern p);

// ceil(column_fraction * d) columns are selected; within each, exactly
// ceil(cell_fraction * n) cells are deleted. Targets are never touched and
// the input must be complete.
struct CorruptionSpec {
  MissingPattern pattern = MissingPattern::kMcar;
  double column_fraction = 0.4;
  double cell_fraction = 0.4;
  std::uint64_t seed = 0;
};

// MCAR: cells within each selected column deleted uniformly at random.
TabularDataset corrupt_mcar(const TabularDataset& data, const CorruptionSpec& spec);

// MAR: columns selected from indices >= 1; in column j the rows whose
// pre-corruption column j-1 value is largest are deleted (ties by row
// index). Conditioning always uses the uncorrupted snapshot.
TabularDataset corrupt_mar(const TabularDataset& data, const CorruptionSpec& spec);

// MNAR: in each selected column the rows with the largest own value are
// deleted (ties by row index).
TabularDataset corrupt_mnar(const TabularDataset& data, const CorruptionSpec& spec);

TabularDataset corrupt(const TabularDataset& data, const CorruptionSpec& spec);

}  // namespace lsam
