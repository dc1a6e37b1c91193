#include "lsam/subset.hpp"

#include <algorithm>

namespace lsam {

void SubsetSpec::normalize() {
  std::sort(indices.begin(), indices.end());
  const auto last = std::unique(indices.begin(), indices.end());
  if (last != indices.end()) throw DataError("subset: duplicate feature index");
  for (std::int32_t i : indices) {
    if (i < 0) throw DataError("subset: negative feature index");
  }
}

bool SubsetSpec::contains(std::int32_t f) const {
  return std::binary_search(indices.begin(), indices.end(), f);
}

SubsetSpec SubsetSpec::plus(std::int32_t f) const {
  SubsetSpec out = *this;
  out.indices.push_back(f);
  out.normalize();
  return out;
}

void SubsetSpec::check_bounds(std::int64_t d) const {
  for (std::int32_t i : indices) {
    if (i >= d) {
      throw DataError("subset: feature index " + std::to_string(i) +
                      " outside [0," + std::to_string(d) + ")");
    }
  }
}

std::uint32_t SubsetSpec::bits() const {
  std::uint32_t b = 0;
  for (std::int32_t i : indices) b |= (1u << i);
  return b;
}

SubsetSpec SubsetSpec::from_bits(std::uint32_t b) {
  SubsetSpec s;
  for (std::int32_t i = 0; i < 32; ++i) {
    if (b & (1u << i)) s.indices.push_back(i);
  }
  return s;
}

std::string SubsetSpec::str() const {
  std::string out = "{";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(indices[i]);
  }
  return out + "}";
}

}  // namespace lsam
