#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "lsam/error.hpp"

namespace lsam {

// One element of the feature power set: distinct, sorted indices in [0, d).
struct SubsetSpec {
  std::vector<std::int32_t> indices;

  SubsetSpec() = default;
  SubsetSpec(std::initializer_list<std::int32_t> idx) : indices(idx) { normalize(); }
  explicit SubsetSpec(std::vector<std::int32_t> idx) : indices(std::move(idx)) { normalize(); }

  std::size_t cardinality() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  bool contains(std::int32_t f) const;

  SubsetSpec plus(std::int32_t f) const;

  void check_bounds(std::int64_t d) const;

  // Bitmask form; valid for d <= 10 features.
  std::uint32_t bits() const;
  static SubsetSpec from_bits(std::uint32_t b);

  bool operator==(const SubsetSpec&) const = default;

  std::string str() const;

 private:
  void normalize();
};

}  // namespace lsam
