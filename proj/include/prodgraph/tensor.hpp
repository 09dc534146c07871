#pragma once

#include <vector>

#include "prodgraph/linalg.hpp"

namespace prodgraph {

// Dense tensor stored column-major: axis 0 varies fastest. A signal x on a product of
// factors P_1..P_n is held with shape {P_n, ..., P_1}, so x = vec(tensor) and the last
// factor varies fastest, matching V_1 (x) ... (x) V_n.
struct Tensor {
  std::vector<Index> shape;
  std::vector<double> data;

  Index size() const;
  Index axes() const { return static_cast<Index>(shape.size()); }
  // Product of extents of the axes strictly before `axis`.
  Index stride(Index axis) const;
};

}  // namespace prodgraph
