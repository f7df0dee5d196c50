#pragma once

#include <cstdint>

#include "latticeflow/distribution.hpp"
#include "latticeflow/lattice.hpp"

namespace latticeflow {

// Coupled capacity environment: capacity(e) = quantile(G, U(seed, e)) with a
// per-edge uniform keyed by the absolute canonical edge coordinates.  Two
// fields sharing a seed share the uniforms, so stochastically ordered laws
// give pointwise ordered capacities on every edge.
class CapacityField {
 public:
  CapacityField(Distribution dist, std::uint64_t seed, int dim)
      : dist_(std::move(dist)), seed_(seed), dim_(dim) {
    if (dim < 2 || dim > kMaxDim) throw std::domain_error("dimension must be in [2,6]");
  }

  ExtTicks capacity(const Edge& e) const {
    Edge k = e;
    for (int i = 0; i < dim_; ++i) k.lower.c[i] += offset_[i];
    return dist_.quantile_u64(edge_uniform(seed_, k, dim_));
  }

  const Distribution& distribution() const { return dist_; }
  std::uint64_t seed() const { return seed_; }
  int dimension() const { return dim_; }
  std::int64_t quantum() const { return dist_.quantum(); }

  // Same environment read through translated coordinates: capacity'(e) equals
  // capacity(e + delta).
  CapacityField translated(const std::array<Coord, kMaxDim>& delta) const {
    CapacityField f = *this;
    for (int i = 0; i < dim_; ++i) f.offset_[i] += delta[i];
    return f;
  }

  // Same uniforms, different law; the backbone of every coupled comparison.
  CapacityField with_distribution(Distribution d) const {
    CapacityField f = *this;
    f.dist_ = std::move(d);
    return f;
  }

 private:
  Distribution dist_;
  std::uint64_t seed_;
  int dim_;
  std::array<Coord, kMaxDim> offset_{};
};

}  // namespace latticeflow
