#pragma once

#include <cstddef>
#include <vector>

namespace provkit {

// Fixed-dimension dense document representation.
struct FeatureVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

}  // namespace provkit
