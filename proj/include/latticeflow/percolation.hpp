#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "latticeflow/distribution.hpp"
#include "latticeflow/field.hpp"
#include "latticeflow/lattice.hpp"

namespace latticeflow {

inline constexpr std::size_t kDefaultClusterBudget = 1000000;

using RegionPred = std::function<bool(const Point&)>;

// Connected component of the anchor(s) in the percolation (t(e) > K), as a
// vertex set.  Exploration can be restricted to a region (anchors are always
// admitted) and halts with complete=false when the vertex budget is hit.
struct Cluster {
  std::vector<Point> vertices;  // sorted
  bool complete = true;

  bool contains(const Point& p) const {
    return std::binary_search(vertices.begin(), vertices.end(), p);
  }
};

namespace detail {

template <class FieldT>
Cluster explore(const FieldT& field, ExtTicks level, const std::vector<Point>& anchors,
                const RegionPred& region, std::size_t budget) {
  Cluster c;
  std::unordered_set<Point, PointHash> seen;
  std::vector<Point> queue;
  for (const Point& a : anchors)
    if (seen.insert(a).second) queue.push_back(a);
  int dim = field.dimension();
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    Point x = queue[qi];
    if (seen.size() > budget) {
      c.complete = false;
      break;
    }
    for (int axis = 0; axis < dim; ++axis) {
      for (int dir = -1; dir <= 1; dir += 2) {
        Point y = neighbor(x, axis, dir);
        if (seen.count(y)) continue;
        if (region && !region(y)) continue;
        Edge e = dir > 0 ? Edge{x, axis} : Edge{y, axis};
        if (field.capacity(e) > level) {
          seen.insert(y);
          queue.push_back(y);
        }
      }
    }
  }
  c.vertices.assign(seen.begin(), seen.end());
  std::sort(c.vertices.begin(), c.vertices.end());
  return c;
}

}  // namespace detail

template <class FieldT>
Cluster cluster(const FieldT& field, ExtTicks level, const Point& anchor,
                const RegionPred& region = nullptr,
                std::size_t budget = kDefaultClusterBudget) {
  return detail::explore(field, level, std::vector<Point>{anchor}, region, budget);
}

// Union of the connected components of the two endpoints of f.
template <class FieldT>
Cluster edge_cluster(const FieldT& field, ExtTicks level, const Edge& f,
                     const RegionPred& region = nullptr,
                     std::size_t budget = kDefaultClusterBudget) {
  return detail::explore(field, level, {f.lower, edge_upper(f)}, region, budget);
}

// Exact squared Euclidean diameter.  For an incomplete cluster the value is
// only a lower bound and the flag says so.
struct DiamSq {
  std::int64_t sq = 0;
  bool exact = true;
};

namespace detail {
inline std::int64_t pair_dist_sq(const Point& a, const Point& b, int dim) {
  std::int64_t s = 0;
  for (int i = 0; i < dim; ++i) {
    std::int64_t d = static_cast<std::int64_t>(a.c[i]) - b.c[i];
    s += d * d;
  }
  return s;
}

inline std::int64_t diam_sq_exact(const std::vector<Point>& v, int dim) {
  std::int64_t best = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      best = std::max(best, pair_dist_sq(v[i], v[j], dim));
  return best;
}
}  // namespace detail

inline DiamSq diam_sq(const Cluster& c, int dim) {
  return {detail::diam_sq_exact(c.vertices, dim), c.complete};
}

// diam(C) < h, decided exactly; axis extents give cheap two-sided bounds
// before the pairwise scan.
inline bool diam_lt(const Cluster& c, int dim, const Frac& h) {
  if (c.vertices.empty()) return !h.is_zero();
  std::int64_t loSq = 0;   // max per-axis extent^2 <= diam^2
  std::int64_t hiSq = 0;   // diam^2 <= sum of extents^2
  for (int i = 0; i < dim; ++i) {
    Coord mn = c.vertices[0].c[i], mx = mn;
    for (const Point& p : c.vertices) {
      mn = std::min(mn, p.c[i]);
      mx = std::max(mx, p.c[i]);
    }
    std::int64_t ext = static_cast<std::int64_t>(mx) - mn;
    loSq = std::max(loSq, ext * ext);
    hiSq += ext * ext;
  }
  auto lt = [&](std::int64_t sq) {
    return static_cast<i128>(sq) * h.den() * h.den() <
           static_cast<i128>(h.num()) * h.num();
  };
  if (lt(hiSq)) return true;
  if (!lt(loSq)) return false;
  return lt(detail::diam_sq_exact(c.vertices, dim));
}

// Exterior edge boundary: edges <x,y> with x in C and y joined to infinity
// outside C.  "Infinity" is the outer shell of the cluster's bounding box
// grown by a margin of 2; edges facing interior holes are excluded.
inline std::vector<Edge> ext_boundary(const Cluster& c, int dim) {
  if (!c.complete) throw std::domain_error("ext_boundary: incomplete cluster");
  if (c.vertices.empty()) return {};
  Box box;
  box.dim = dim;
  for (int i = 0; i < dim; ++i) {
    Coord mn = c.vertices[0].c[i], mx = mn;
    for (const Point& p : c.vertices) {
      mn = std::min(mn, p.c[i]);
      mx = std::max(mx, p.c[i]);
    }
    box.lo[i] = mn - 2;
    box.hi[i] = mx + 2;
  }
  std::unordered_set<Point, PointHash> inC(c.vertices.begin(), c.vertices.end());
  std::unordered_set<Point, PointHash> reached;
  std::vector<Point> queue;
  box.for_each([&](const Point& p) {
    bool shell = false;
    for (int i = 0; i < dim; ++i)
      if (p.c[i] == box.lo[i] || p.c[i] == box.hi[i]) shell = true;
    if (shell && !inC.count(p) && reached.insert(p).second) queue.push_back(p);
  });
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    Point x = queue[qi];
    for (int axis = 0; axis < dim; ++axis)
      for (int dir = -1; dir <= 1; dir += 2) {
        Point y = neighbor(x, axis, dir);
        if (!box.contains(y) || inC.count(y)) continue;
        if (reached.insert(y).second) queue.push_back(y);
      }
  }
  std::vector<Edge> out;
  for (const Point& x : c.vertices)
    for (int axis = 0; axis < dim; ++axis)
      for (int dir = -1; dir <= 1; dir += 2) {
        Point y = neighbor(x, axis, dir);
        if (inC.count(y)) continue;
        if (reached.count(y)) out.push_back(dir > 0 ? Edge{x, axis} : Edge{y, axis});
      }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Regularity events: every anchor's full-space cluster has diameter < h.
// Memoizes cluster membership across anchors and exits on first violation.
// ---------------------------------------------------------------------------

template <class FieldT>
class ClusterCache {
 public:
  ClusterCache(const FieldT& field, ExtTicks level, std::size_t budget = kDefaultClusterBudget)
      : field_(field), level_(level), budget_(budget) {}

  const Cluster& of(const Point& x) {
    auto it = owner_.find(x);
    if (it != owner_.end()) return clusters_[it->second];
    Cluster c = cluster(field_, level_, x, nullptr, budget_);
    clusters_.push_back(std::move(c));
    std::size_t id = clusters_.size() - 1;
    for (const Point& p : clusters_[id].vertices) owner_.emplace(p, id);
    return clusters_[id];
  }
  std::size_t id_of(const Point& x) {
    of(x);
    return owner_.at(x);
  }

 private:
  const FieldT& field_;
  ExtTicks level_;
  std::size_t budget_;
  std::vector<Cluster> clusters_;
  std::unordered_map<Point, std::size_t, PointHash> owner_;
};

template <class FieldT>
bool event_E(const FieldT& field, ExtTicks level, const std::vector<Point>& anchors,
             const Frac& h, std::size_t budget = kDefaultClusterBudget) {
  ClusterCache<FieldT> cache(field, level, budget);
  for (const Point& x : anchors) {
    const Cluster& c = cache.of(x);
    if (!c.complete || !diam_lt(c, field.dimension(), h)) return false;
  }
  return true;
}

template <class FieldT>
bool event_E_prime(const FieldT& field, ExtTicks level, const std::vector<Edge>& anchors,
                   const Frac& h, std::size_t budget = kDefaultClusterBudget) {
  ClusterCache<FieldT> cache(field, level, budget);
  int dim = field.dimension();
  for (const Edge& f : anchors) {
    std::size_t ia = cache.id_of(f.lower);
    std::size_t ib = cache.id_of(edge_upper(f));
    const Cluster& ca = cache.of(f.lower);
    const Cluster& cb = cache.of(edge_upper(f));
    if (!ca.complete || !cb.complete) return false;
    if (ia == ib) {
      if (!diam_lt(ca, dim, h)) return false;
      continue;
    }
    Cluster joint;
    joint.vertices.reserve(ca.vertices.size() + cb.vertices.size());
    std::merge(ca.vertices.begin(), ca.vertices.end(), cb.vertices.begin(), cb.vertices.end(),
               std::back_inserter(joint.vertices));
    if (!diam_lt(joint, dim, h)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Fontes-Newman style domination check: explored cluster sizes with the
// zeroing rule against i.i.d. copies, compared through empirical tails.
// ---------------------------------------------------------------------------

struct DominationReport {
  std::vector<std::int64_t> thresholds;
  std::vector<double> freq_y, freq_x, band;
  std::size_t replicates = 0;
  std::size_t budget_hits = 0;
  int violations = 0;  // freq_y - freq_x > band
};

inline DominationReport domination_experiment(const Distribution& dist, ExtTicks level, int dim,
                                              const std::vector<Point>& anchors,
                                              std::size_t replicates, std::uint64_t seed_base,
                                              const Frac& pc,
                                              std::size_t budget = kDefaultClusterBudget) {
  // open-edge probability P(t > level) must be subcritical
  Frac open = level.is_infinite()
                  ? Frac()
                  : dist.survival(ExtTicks::finite(level.ticks() + 1));
  if (open >= pc)
    throw std::domain_error("domination_experiment: open probability " + open.str() +
                            " is not below p_c = " + pc.str());
  const std::size_t n = anchors.size();
  DominationReport rep;
  rep.replicates = replicates;
  std::vector<std::int64_t> sumY(replicates), sumX(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    CapacityField fy(dist, derive_seed(seed_base, 1, r), dim);
    std::unordered_set<Point, PointHash> explored;
    std::int64_t sy = 0;
    for (const Point& a : anchors) {
      if (explored.count(a)) continue;  // the zeroing rule
      Cluster c = cluster(fy, level, a, nullptr, budget);
      if (!c.complete) ++rep.budget_hits;
      sy += static_cast<std::int64_t>(c.vertices.size());
      explored.insert(c.vertices.begin(), c.vertices.end());
    }
    std::int64_t sx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CapacityField fx(dist, derive_seed(seed_base, 2, r * n + i), dim);
      Cluster c = cluster(fx, level, anchors[i], nullptr, budget);
      if (!c.complete) ++rep.budget_hits;
      sx += static_cast<std::int64_t>(c.vertices.size());
    }
    sumY[r] = sy;
    sumX[r] = sx;
  }
  std::int64_t amax = 0;
  for (std::size_t r = 0; r < replicates; ++r) amax = std::max({amax, sumY[r], sumX[r]});
  for (std::int64_t a = 0; a <= amax + 1; ++a) {
    double py = 0, px = 0;
    for (std::size_t r = 0; r < replicates; ++r) {
      if (sumY[r] >= a) ++py;
      if (sumX[r] >= a) ++px;
    }
    py /= static_cast<double>(replicates);
    px /= static_cast<double>(replicates);
    double sigma = std::sqrt((py * (1 - py) + px * (1 - px)) / static_cast<double>(replicates));
    rep.thresholds.push_back(a);
    rep.freq_y.push_back(py);
    rep.freq_x.push_back(px);
    rep.band.push_back(3.0 * sigma);
    if (py - px > 3.0 * sigma) ++rep.violations;
  }
  return rep;
}

}  // namespace latticeflow
