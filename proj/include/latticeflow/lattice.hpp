#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "latticeflow/numeric.hpp"
#include "latticeflow/rng.hpp"

namespace latticeflow {

inline constexpr int kMaxDim = 6;
using Coord = std::int32_t;

struct Point {
  std::array<Coord, kMaxDim> c{};

  friend bool operator==(const Point& a, const Point& b) { return a.c == b.c; }
  friend bool operator!=(const Point& a, const Point& b) { return a.c != b.c; }
  friend bool operator<(const Point& a, const Point& b) { return a.c < b.c; }
};

inline Point make_point(std::initializer_list<Coord> cs) {
  Point p;
  int i = 0;
  for (Coord v : cs) p.c[i++] = v;
  return p;
}

inline Point neighbor(const Point& p, int axis, int dir) {
  Point q = p;
  q.c[axis] += dir;
  return q;
}

struct PointHash {
  std::size_t operator()(const Point& p) const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (Coord v : p.c) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
    return static_cast<std::size_t>(h);
  }
};

// Canonical lattice edge: lower endpoint plus axis index.
struct Edge {
  Point lower;
  std::int32_t axis = 0;

  friend bool operator==(const Edge& a, const Edge& b) {
    return a.axis == b.axis && a.lower == b.lower;
  }
  friend bool operator!=(const Edge& a, const Edge& b) { return !(a == b); }
  friend bool operator<(const Edge& a, const Edge& b) {
    if (a.lower != b.lower) return a.lower < b.lower;
    return a.axis < b.axis;
  }
};

inline Point edge_upper(const Edge& e) { return neighbor(e.lower, e.axis, +1); }

inline Edge make_edge(const Point& a, const Point& b) {
  int axis = -1;
  int diff = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    if (a.c[i] != b.c[i]) {
      axis = i;
      diff = b.c[i] - a.c[i];
    }
  }
  if (axis < 0 || (diff != 1 && diff != -1)) throw std::invalid_argument("not a lattice edge");
  return diff == 1 ? Edge{a, axis} : Edge{b, axis};
}

struct EdgeHash {
  std::size_t operator()(const Edge& e) const {
    return PointHash{}(e.lower) ^ (static_cast<std::size_t>(e.axis) * 0x9e3779b97f4a7c15ULL);
  }
};

using EdgeSet = std::unordered_set<Edge, EdgeHash>;

// Per-edge uniform counter, keyed by absolute canonical coordinates.
inline std::uint64_t edge_uniform(std::uint64_t seed, const Edge& e, int dim) {
  KeyedRng r(seed);
  for (int i = 0; i < dim; ++i) r.absorb_i64(e.lower.c[i]);
  r.absorb(static_cast<std::uint64_t>(e.axis));
  return r.digest();
}

// ---------------------------------------------------------------------------
// Directions and hyperrectangles
// ---------------------------------------------------------------------------

// A rational direction: nonzero primitive integer vector w; the unit vector is
// w / ||w||_2 and is never materialized, all predicates compare against
// norm2() = w.w exactly.
struct Direction {
  int dim = 0;
  std::array<std::int64_t, kMaxDim> w{};

  static Direction of(std::vector<std::int64_t> v) {
    Direction d;
    d.dim = static_cast<int>(v.size());
    if (d.dim < 2 || d.dim > kMaxDim) throw std::domain_error("dimension must be in [2,6]");
    std::int64_t g = 0;
    for (int i = 0; i < d.dim; ++i) {
      d.w[i] = v[i];
      g = std::gcd(g, std::abs(v[i]));
    }
    if (g == 0) throw std::domain_error("direction must be nonzero");
    for (int i = 0; i < d.dim; ++i) d.w[i] /= g;
    return d;
  }

  std::int64_t norm2() const {
    std::int64_t s = 0;
    for (int i = 0; i < dim; ++i) s += w[i] * w[i];
    return s;
  }
};

inline std::int64_t dot(const std::array<std::int64_t, kMaxDim>& a, const Point& p, int dim,
                        const std::array<std::int64_t, kMaxDim>& origin) {
  i128 s = 0;
  for (int i = 0; i < dim; ++i) s += static_cast<i128>(a[i]) * (p.c[i] - origin[i]);
  return checked_cast64(s, "lattice dot product");
}

inline std::int64_t dot_vec(const std::array<std::int64_t, kMaxDim>& a,
                            const std::array<std::int64_t, kMaxDim>& b, int dim) {
  i128 s = 0;
  for (int i = 0; i < dim; ++i) s += static_cast<i128>(a[i]) * b[i];
  return checked_cast64(s, "lattice dot product");
}

// Hyperrectangle normal to a rational direction: origin plus an orthogonal
// integer basis f_1..f_{d-1}, extent[i] cells along f_i.  The spec's uniform
// scale p is the case where all extents agree; per-axis extents are what
// tilings into half-rectangles need.
struct Hyperrect {
  int dim = 0;
  Direction normal;
  std::array<std::int64_t, kMaxDim> origin{};
  std::vector<std::array<std::int64_t, kMaxDim>> basis;
  std::vector<std::int64_t> extent;

  static Hyperrect make(Direction normal, std::array<std::int64_t, kMaxDim> origin,
                        std::vector<std::array<std::int64_t, kMaxDim>> basis,
                        std::vector<std::int64_t> extent) {
    Hyperrect h;
    h.dim = normal.dim;
    h.normal = normal;
    h.origin = origin;
    h.basis = std::move(basis);
    h.extent = std::move(extent);
    if (static_cast<int>(h.basis.size()) != h.dim - 1 || h.extent.size() != h.basis.size())
      throw std::domain_error("hyperrect needs d-1 basis vectors and extents");
    for (std::size_t i = 0; i < h.basis.size(); ++i) {
      if (dot_vec(h.basis[i], h.basis[i], h.dim) == 0)
        throw std::domain_error("zero basis vector");
      if (h.extent[i] <= 0) throw std::domain_error("extent must be positive");
      if (dot_vec(h.basis[i], normal.w, h.dim) != 0)
        throw std::domain_error("basis not orthogonal to the normal");
      for (std::size_t j = i + 1; j < h.basis.size(); ++j)
        if (dot_vec(h.basis[i], h.basis[j], h.dim) != 0)
          throw std::domain_error("basis vectors not pairwise orthogonal");
    }
    return h;
  }

  std::int64_t basis_norm2(std::size_t i) const { return dot_vec(basis[i], basis[i], dim); }

  // Squared (d-1)-area: prod extent_i^2 * ||f_i||^2, exact.
  std::uint64_t area2() const {
    u128 a = 1;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      a *= static_cast<u128>(extent[i]) * extent[i];
      a *= static_cast<u128>(basis_norm2(i));
      if (a > static_cast<u128>(std::numeric_limits<std::uint64_t>::max()))
        throw OverflowError("hyperrect area");
    }
    return static_cast<std::uint64_t>(a);
  }
  double area() const { return std::sqrt(static_cast<double>(area2())); }

  Hyperrect scaled(std::int64_t p) const {
    Hyperrect h = *this;
    for (auto& e : h.extent) e *= p;
    return h;
  }
};

// Hyperrect on the canonical integer orthogonal basis of a direction, rooted
// at the origin, all extents p.
inline Hyperrect canonical_hyperrect(const Direction& v, std::int64_t p);

enum class CylKind { Symmetric, Directed, Slab };

// cyl(A,h), cyl^v(A,h) or slab(A,h,v); membership is exact.
struct CylinderSpec {
  Hyperrect rect;
  Frac height;
  CylKind kind = CylKind::Symmetric;
};

namespace geo {

// sign of p + q*sqrt(W), exact
inline int sign_quad(i128 p, i128 q, i128 W) {
  auto sgn = [](i128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
  if (q == 0) return sgn(p);
  if (p == 0) return sgn(q);
  if (p > 0 && q > 0) return 1;
  if (p < 0 && q < 0) return -1;
  constexpr i128 kLim = static_cast<i128>(1) << 62;
  constexpr i128 kMax = ~(static_cast<i128>(1) << 127);
  if (p > kLim || -p > kLim || q > kLim || -q > kLim) throw OverflowError("sign_quad");
  i128 lhs = p * p;
  i128 qq = q * q;
  if (W != 0 && qq > kMax / W) throw OverflowError("sign_quad");
  i128 rhs = qq * W;
  if (p > 0) return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
  return lhs < rhs ? 1 : (lhs > rhs ? -1 : 0);
}

struct Frame {
  const Hyperrect& rect;
  std::int64_t W;  // ||w||^2

  explicit Frame(const Hyperrect& r) : rect(r), W(r.normal.norm2()) {}

  std::int64_t normal_dot(const Point& x) const {
    return dot(rect.normal.w, x, rect.dim, rect.origin);
  }
  std::int64_t basis_dot(const Point& x, std::size_t i) const {
    return dot(rect.basis[i], x, rect.dim, rect.origin);
  }

  // lambda_i(x) in [lo_i, hi_i] (basis units), exact
  bool lateral_in(const Point& x, std::int64_t lo, std::int64_t hi_pad) const {
    for (std::size_t i = 0; i < rect.basis.size(); ++i) {
      std::int64_t n = basis_dot(x, i);
      std::int64_t nf = rect.basis_norm2(i);
      if (n < lo * nf) return false;
      if (n > (rect.extent[i] + hi_pad) * nf) return false;
    }
    return true;
  }

  // t(x) <=> tau for tau = num/den (den > 0): sign of (D*den - num*sqrt(W))
  int cmp_t(const Point& x, std::int64_t num, std::int64_t den) const {
    std::int64_t D = normal_dot(x);
    return sign_quad(static_cast<i128>(D) * den, -static_cast<i128>(num), W);
  }
};

// Does the closed segment [a,b] (a lattice edge) meet the closed face of the
// hyperrect translated to normal offset tau = num/den?
inline bool edge_meets_face(const Frame& fr, const Point& a, const Point& b, std::int64_t num,
                            std::int64_t den) {
  const Hyperrect& R = fr.rect;
  std::int64_t Da = fr.normal_dot(a);
  std::int64_t Db = fr.normal_dot(b);
  std::int64_t dD = Db - Da;
  // A0 = num*sqrt(W) - Da*den, A1 likewise for b
  i128 pa = -static_cast<i128>(Da) * den;
  i128 pb = -static_cast<i128>(Db) * den;
  int sa = sign_quad(pa, num, fr.W);
  int sb = sign_quad(pb, num, fr.W);
  if (dD == 0) {
    if (sa != 0) return false;  // parallel, off the hyperplane
    // segment inside the hyperplane: lateral ranges must meet the face box
    for (std::size_t i = 0; i < R.basis.size(); ++i) {
      std::int64_t na = fr.basis_dot(a, i);
      std::int64_t nb = fr.basis_dot(b, i);
      std::int64_t nf = R.basis_norm2(i);
      if (std::max(na, nb) < 0) return false;
      if (std::min(na, nb) > R.extent[i] * nf) return false;
    }
    return true;
  }
  // crossing parameter s* = A0 / (den*dD) must lie in [0,1]
  if (sa * (dD > 0 ? 1 : -1) < 0) return false;                 // s* < 0
  i128 p1 = pa - static_cast<i128>(den) * dD;                   // A0 - den*dD
  if (sign_quad(p1, num, fr.W) * (dD > 0 ? 1 : -1) > 0) return false;  // s* > 1
  // lambda_i at the crossing point, cleared of denominators:
  //   nf*lambda_i*(den*dD) = N_ia*den*dD + A0*dN_i
  int sden = dD > 0 ? 1 : -1;  // den > 0
  for (std::size_t i = 0; i < R.basis.size(); ++i) {
    std::int64_t na = fr.basis_dot(a, i);
    std::int64_t nb = fr.basis_dot(b, i);
    std::int64_t dN = nb - na;
    std::int64_t nf = R.basis_norm2(i);
    i128 base = static_cast<i128>(na) * den * dD;
    i128 pl = base + pa * dN;
    i128 ql = static_cast<i128>(num) * dN;
    if (sign_quad(pl, ql, fr.W) * sden < 0) return false;  // lambda_i < 0
    i128 pu = pl - static_cast<i128>(R.extent[i]) * nf * den * dD;
    if (sign_quad(pu, ql, fr.W) * sden > 0) return false;  // lambda_i > extent
  }
  return true;
}

}  // namespace geo

// Exact membership predicate for all three cylinder kinds.
inline bool member(const CylinderSpec& spec, const Point& x) {
  geo::Frame fr(spec.rect);
  if (!fr.lateral_in(x, 0, 0)) return false;
  std::int64_t hn = spec.height.num();
  std::int64_t hd = spec.height.den();
  switch (spec.kind) {
    case CylKind::Symmetric:
      return fr.cmp_t(x, -hn, hd) >= 0 && fr.cmp_t(x, hn, hd) <= 0;
    case CylKind::Directed:
    case CylKind::Slab:
      return fr.normal_dot(x) >= 0 && fr.cmp_t(x, hn, hd) <= 0;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Region scans
// ---------------------------------------------------------------------------

struct Box {
  int dim = 0;
  std::array<Coord, kMaxDim> lo{};
  std::array<Coord, kMaxDim> hi{};

  bool contains(const Point& p) const {
    for (int i = 0; i < dim; ++i)
      if (p.c[i] < lo[i] || p.c[i] > hi[i]) return false;
    return true;
  }
  template <class F>
  void for_each(F&& f) const {
    Point p;
    for (int i = 0; i < dim; ++i) p.c[i] = lo[i];
    while (true) {
      f(const_cast<const Point&>(p));
      int i = 0;
      while (i < dim) {
        if (p.c[i] < hi[i]) {
          ++p.c[i];
          break;
        }
        p.c[i] = lo[i];
        ++i;
      }
      if (i == dim) return;
    }
  }
};

// Conservative integer bounding box for a cylinder spec (pad covers the
// normal extent in every coordinate).
inline Box bounding_box(const CylinderSpec& spec, std::int64_t lateral_pad = 0) {
  const Hyperrect& R = spec.rect;
  Box b;
  b.dim = R.dim;
  std::array<std::int64_t, kMaxDim> mn = R.origin, mx = R.origin;
  std::size_t corners = std::size_t(1) << R.basis.size();
  for (std::size_t mask = 0; mask < corners; ++mask) {
    std::array<std::int64_t, kMaxDim> c = R.origin;
    for (std::size_t i = 0; i < R.basis.size(); ++i) {
      std::int64_t lo = -lateral_pad, hi = R.extent[i] + lateral_pad;
      std::int64_t lam = (mask >> i) & 1 ? hi : lo;
      for (int k = 0; k < R.dim; ++k) c[k] += lam * R.basis[i][k];
    }
    for (int k = 0; k < R.dim; ++k) {
      mn[k] = std::min(mn[k], c[k]);
      mx[k] = std::max(mx[k], c[k]);
    }
  }
  std::int64_t hpad =
      spec.height.num() / spec.height.den() + 2;  // |t| <= h implies |x_k - corner| <= h+1
  for (int k = 0; k < R.dim; ++k) {
    std::int64_t lo = mn[k] - hpad, hi = mx[k] + hpad;
    if (lo < std::numeric_limits<Coord>::min() || hi > std::numeric_limits<Coord>::max())
      throw OverflowError("bounding box exceeds coordinate range");
    b.lo[k] = static_cast<Coord>(lo);
    b.hi[k] = static_cast<Coord>(hi);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Terminal sets
// ---------------------------------------------------------------------------

namespace detail {
template <class Pred>
std::vector<Point> scan(const Box& box, Pred&& pred) {
  std::vector<Point> out;
  box.for_each([&](const Point& p) {
    if (pred(p)) out.push_back(p);
  });
  return out;
}
}  // namespace detail

struct TerminalSets {
  std::vector<Point> first;   // B1 / C'1 / V(A)
  std::vector<Point> second;  // B2 / C'2 / W(A,h,v)
};

// B1/B2: members with an outside neighbor whose joining edge meets the
// translated face A + hv (resp. A - hv, or A itself for the directed base).
inline TerminalSets top_bottom(const CylinderSpec& spec) {
  if (spec.kind == CylKind::Slab) throw std::domain_error("top_bottom: wrong cylinder kind");
  geo::Frame fr(spec.rect);
  Box box = bounding_box(spec);
  TerminalSets t;
  std::int64_t hn = spec.height.num(), hd = spec.height.den();
  std::int64_t bn = spec.kind == CylKind::Symmetric ? -hn : 0;
  box.for_each([&](const Point& x) {
    if (!member(spec, x)) return;
    bool b1 = false, b2 = false;
    for (int a = 0; a < spec.rect.dim && !(b1 && b2); ++a) {
      for (int dir = -1; dir <= 1; dir += 2) {
        Point y = neighbor(x, a, dir);
        if (member(spec, y)) continue;
        if (!b1 && geo::edge_meets_face(fr, x, y, hn, hd)) b1 = true;
        if (!b2 && geo::edge_meets_face(fr, x, y, bn, hd)) b2 = true;
      }
    }
    if (b1) t.first.push_back(x);
    if (b2) t.second.push_back(x);
  });
  if (t.first.empty() || t.second.empty())
    throw std::domain_error("degenerate cylinder: empty top or bottom terminal set");
  std::unordered_set<Point, PointHash> top(t.first.begin(), t.first.end());
  for (const Point& x : t.second)
    if (top.count(x)) throw std::domain_error("degenerate cylinder: top meets bottom");
  return t;
}

// C'1/C'2: members of the upper/lower half (t > 0 / t < 0) with any lattice
// neighbor outside the cylinder.
inline TerminalSets half_boundaries(const CylinderSpec& spec) {
  if (spec.kind != CylKind::Symmetric)
    throw std::domain_error("half_boundaries: symmetric cylinders only");
  if (spec.height.is_zero()) throw std::domain_error("degenerate cylinder: h = 0");
  geo::Frame fr(spec.rect);
  Box box = bounding_box(spec);
  TerminalSets t;
  box.for_each([&](const Point& x) {
    if (!member(spec, x)) return;
    std::int64_t D = fr.normal_dot(x);
    if (D == 0) return;  // on hyp(A): belongs to A, not to either half
    bool boundary = false;
    for (int a = 0; a < spec.rect.dim && !boundary; ++a)
      for (int dir = -1; dir <= 1 && !boundary; dir += 2)
        if (!member(spec, neighbor(x, a, dir))) boundary = true;
    if (!boundary) return;
    (D > 0 ? t.first : t.second).push_back(x);
  });
  if (t.first.empty() || t.second.empty())
    throw std::domain_error("degenerate cylinder: empty half boundary");
  return t;
}

// V(A): vertices strictly on the -v side of hyp(A) with a neighbor inside the
// slab joined by an edge that meets A.  W(A,h,v): slab members with a
// neighbor past height h above A.
inline TerminalSets slab_sets(const CylinderSpec& spec) {
  if (spec.kind != CylKind::Slab) throw std::domain_error("slab_sets: wrong cylinder kind");
  geo::Frame fr(spec.rect);
  Box box = bounding_box(spec, 1);
  TerminalSets t;
  std::int64_t hn = spec.height.num(), hd = spec.height.den();
  box.for_each([&](const Point& x) {
    std::int64_t D = fr.normal_dot(x);
    if (D < 0) {
      for (int a = 0; a < spec.rect.dim; ++a) {
        for (int dir = -1; dir <= 1; dir += 2) {
          Point y = neighbor(x, a, dir);
          if (fr.normal_dot(y) < 0) continue;
          if (geo::edge_meets_face(fr, x, y, 0, 1)) {
            t.first.push_back(x);
            a = spec.rect.dim;
            break;
          }
        }
      }
    } else if (member(spec, x)) {
      for (int a = 0; a < spec.rect.dim; ++a) {
        for (int dir = -1; dir <= 1; dir += 2) {
          Point y = neighbor(x, a, dir);
          if (fr.normal_dot(y) >= 0 && fr.cmp_t(y, hn, hd) > 0 && fr.lateral_in(y, 0, 0)) {
            t.second.push_back(x);
            a = spec.rect.dim;
            break;
          }
        }
      }
    }
  });
  if (t.first.empty()) throw std::domain_error("degenerate slab: empty V(A)");
  return t;
}

// ---------------------------------------------------------------------------
// L-boxes
// ---------------------------------------------------------------------------

struct LBoxes {
  std::int64_t L;
  std::array<std::int64_t, kMaxDim> index{};
  int dim;

  // Lambda_L(i) = L*i + [-L/2, L/2]^d
  bool contains(const Point& p) const {
    for (int k = 0; k < dim; ++k) {
      std::int64_t r = 2 * (p.c[k] - L * index[k]);
      if (r < -L || r > L) return false;
    }
    return true;
  }
  // Lambda'_L(i): the 3^d enlarged box
  bool contains_enlarged(const Point& p) const {
    for (int k = 0; k < dim; ++k) {
      std::int64_t r = 2 * (p.c[k] - L * index[k]);
      if (r < -3 * L || r > 3 * L) return false;
    }
    return true;
  }
};

inline LBoxes boxes(std::int64_t L, std::array<std::int64_t, kMaxDim> i, int dim) {
  if (L < 2 || L % 2 != 0) throw std::domain_error("L must be even and >= 2");
  return LBoxes{L, i, dim};
}

// Smallest index i with x in Lambda_L(i): ties on the box boundary go to the
// smaller index.
inline std::array<std::int64_t, kMaxDim> box_of(std::int64_t L, const Point& x, int dim) {
  std::array<std::int64_t, kMaxDim> idx{};
  for (int k = 0; k < dim; ++k) {
    std::int64_t a = 2 * static_cast<std::int64_t>(x.c[k]) - L;  // need 2*L*i >= a
    std::int64_t q = a / (2 * L);
    if (2 * L * q < a) ++q;
    idx[k] = q;
  }
  return idx;
}

// All box indices whose closed box contains x (1 or 2 choices per axis).
inline std::vector<std::array<std::int64_t, kMaxDim>> boxes_containing(std::int64_t L,
                                                                       const Point& x, int dim) {
  std::array<std::int64_t, kMaxDim> base = box_of(L, x, dim);
  std::array<bool, kMaxDim> dual{};
  for (int k = 0; k < dim; ++k) {
    // on the upper face of box base[k]?
    dual[k] = (2 * (static_cast<std::int64_t>(x.c[k]) - L * base[k]) == L);
  }
  std::vector<std::array<std::int64_t, kMaxDim>> out;
  std::size_t n = std::size_t(1) << dim;
  for (std::size_t mask = 0; mask < n; ++mask) {
    std::array<std::int64_t, kMaxDim> idx = base;
    bool ok = true;
    for (int k = 0; k < dim; ++k) {
      if ((mask >> k) & 1) {
        if (!dual[k]) {
          ok = false;
          break;
        }
        idx[k] += 1;
      }
    }
    if (ok) out.push_back(idx);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Integer orthogonal basis of w-perp (exact Gram-Schmidt on a kernel basis,
// rescaled to primitive integer vectors).
// ---------------------------------------------------------------------------
inline std::vector<std::array<std::int64_t, kMaxDim>> integer_orthogonal_basis(
    const Direction& v) {
  int d = v.dim;
  int pivot = 0;
  while (v.w[pivot] == 0) ++pivot;
  std::vector<std::array<i128, kMaxDim>> g;
  for (int i = 0; i < d; ++i) {
    if (i == pivot) continue;
    std::array<i128, kMaxDim> cand{};
    cand[i] = v.w[pivot];
    cand[pivot] -= v.w[i];
    for (const auto& prev : g) {
      i128 pp = 0, cp = 0;
      for (int k = 0; k < d; ++k) {
        pp += prev[k] * prev[k];
        cp += cand[k] * prev[k];
      }
      for (int k = 0; k < d; ++k) cand[k] = cand[k] * pp - cp * prev[k];
      i128 gg = 0;
      for (int k = 0; k < d; ++k) {
        i128 a = cand[k] < 0 ? -cand[k] : cand[k];
        while (a != 0) {
          i128 t = gg % a;
          gg = a;
          a = t;
        }
      }
      if (gg > 1)
        for (int k = 0; k < d; ++k) cand[k] /= gg;
      constexpr i128 kLim = static_cast<i128>(1) << 55;
      for (int k = 0; k < d; ++k)
        if (cand[k] > kLim || -cand[k] > kLim) throw OverflowError("orthogonal basis entries");
    }
    g.push_back(cand);
  }
  std::vector<std::array<std::int64_t, kMaxDim>> out;
  for (const auto& vec : g) {
    std::array<std::int64_t, kMaxDim> o{};
    for (int k = 0; k < d; ++k) o[k] = checked_cast64(vec[k], "orthogonal basis");
    out.push_back(o);
  }
  return out;
}

inline Hyperrect canonical_hyperrect(const Direction& v, std::int64_t p) {
  auto basis = integer_orthogonal_basis(v);
  std::vector<std::int64_t> ext(basis.size(), p);
  return Hyperrect::make(v, {}, std::move(basis), std::move(ext));
}

// ---------------------------------------------------------------------------
// Finite flow problems
// ---------------------------------------------------------------------------

struct FlowProblem {
  int dim = 0;
  std::vector<Point> vertices;  // sorted
  std::vector<Edge> edges;      // canonical, sorted
  std::vector<std::uint32_t> sources;
  std::vector<std::uint32_t> sinks;
  std::unordered_map<Point, std::uint32_t, PointHash> index;

  std::uint32_t vertex_id(const Point& p) const {
    auto it = index.find(p);
    if (it == index.end()) throw std::out_of_range("vertex not in problem");
    return it->second;
  }
  bool has_vertex(const Point& p) const { return index.count(p) != 0; }
};

enum class TerminalChoice { TopBottom, HalfBoundaries, Slab };

namespace detail {
inline FlowProblem assemble_problem(int dim, std::vector<Point> verts,
                                    const std::vector<Point>& sources,
                                    const std::vector<Point>& sinks) {
  FlowProblem pb;
  pb.dim = dim;
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  pb.vertices = std::move(verts);
  pb.index.reserve(pb.vertices.size() * 2);
  for (std::uint32_t i = 0; i < pb.vertices.size(); ++i) pb.index.emplace(pb.vertices[i], i);
  for (const Point& x : pb.vertices) {
    for (int a = 0; a < dim; ++a) {
      Point y = neighbor(x, a, +1);
      if (pb.index.count(y)) pb.edges.push_back(Edge{x, a});
    }
  }
  std::sort(pb.edges.begin(), pb.edges.end());
  std::unordered_set<std::uint32_t> mark;
  for (const Point& s : sources) {
    auto it = pb.index.find(s);
    if (it != pb.index.end() && mark.insert(it->second).second) pb.sources.push_back(it->second);
  }
  mark.clear();
  for (const Point& s : sinks) {
    auto it = pb.index.find(s);
    if (it != pb.index.end() && mark.insert(it->second).second) pb.sinks.push_back(it->second);
  }
  std::sort(pb.sources.begin(), pb.sources.end());
  std::sort(pb.sinks.begin(), pb.sinks.end());
  if (pb.sources.empty() || pb.sinks.empty())
    throw std::domain_error("degenerate problem: empty terminal set");
  std::vector<std::uint32_t> inter;
  std::set_intersection(pb.sources.begin(), pb.sources.end(), pb.sinks.begin(), pb.sinks.end(),
                        std::back_inserter(inter));
  if (!inter.empty()) throw std::domain_error("degenerate problem: sources meet sinks");
  return pb;
}
}  // namespace detail

// Enumerates member vertices by bounding-box scan, keeps edges with both
// endpoints inside, attaches the requested terminal sets.  Slab problems also
// carry the V(A) source vertices, which sit just outside the slab.
inline FlowProblem build_problem(const CylinderSpec& spec, TerminalChoice terminals) {
  Box box = bounding_box(spec);
  std::vector<Point> verts = detail::scan(box, [&](const Point& p) { return member(spec, p); });
  if (verts.empty()) throw std::domain_error("empty region");
  switch (terminals) {
    case TerminalChoice::TopBottom: {
      TerminalSets t = top_bottom(spec);
      return detail::assemble_problem(spec.rect.dim, std::move(verts), t.first, t.second);
    }
    case TerminalChoice::HalfBoundaries: {
      TerminalSets t = half_boundaries(spec);
      return detail::assemble_problem(spec.rect.dim, std::move(verts), t.first, t.second);
    }
    case TerminalChoice::Slab: {
      TerminalSets t = slab_sets(spec);
      verts.insert(verts.end(), t.first.begin(), t.first.end());
      return detail::assemble_problem(spec.rect.dim, std::move(verts), t.first, t.second);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace latticeflow
