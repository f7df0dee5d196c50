#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "latticeflow/field.hpp"
#include "latticeflow/lattice.hpp"
#include "latticeflow/maxflow.hpp"
#include "latticeflow/percolation.hpp"

namespace latticeflow {

inline CylinderSpec symmetric_cylinder(const Hyperrect& A, const Frac& h) {
  return CylinderSpec{A, h, CylKind::Symmetric};
}
inline CylinderSpec directed_cylinder(const Hyperrect& A, const Frac& h) {
  return CylinderSpec{A, h, CylKind::Directed};
}
inline CylinderSpec slab_cylinder(const Hyperrect& A, const Frac& h) {
  return CylinderSpec{A, h, CylKind::Slab};
}

// phi(A,h): maximal flow from the top to the bottom of cyl(A,h).
template <class FieldT>
CutResult phi(const Hyperrect& A, const Frac& h, const FieldT& field) {
  return max_flow(build_problem(symmetric_cylinder(A, h), TerminalChoice::TopBottom), field);
}

// tau(A,h): maximal flow between the two half boundaries of cyl(A,h).
template <class FieldT>
CutResult tau(const Hyperrect& A, const Frac& h, const FieldT& field) {
  return max_flow(build_problem(symmetric_cylinder(A, h), TerminalChoice::HalfBoundaries),
                  field);
}

// phi^v(A,h): maximal flow through the one-sided cylinder cyl^v(A,h).
template <class FieldT>
CutResult phi_directed(const Hyperrect& A, const Frac& h, const FieldT& field) {
  return max_flow(build_problem(directed_cylinder(A, h), TerminalChoice::TopBottom), field);
}

// ---------------------------------------------------------------------------
// Slab height H_{F,K0}(A) and the alternative flow through the slab.
// ---------------------------------------------------------------------------

// V(A): the discretized hyperrectangle on the -v side (sources of every slab
// problem).  Independent of any height.
inline std::vector<Point> slab_base_vertices(const Hyperrect& A) {
  CylinderSpec probe = slab_cylinder(A, Frac(1, 1));
  return slab_sets(probe).first;
}

struct SlabHeight {
  Frac value;
  Frac threshold;        // t0 = area^(1/(2(d-1))), grid-ceiled
  bool thresholded;      // value == threshold
  bool budget_exceeded;  // cluster exploration hit its budget
};

// H_{F,K0}(A): one slab-restricted cluster sweep from V(A) through edges with
// t_F > K0; the height is one lattice step above the deepest normal reach,
// floored at the area threshold t0.
template <class FieldT>
SlabHeight slab_height(const Hyperrect& A, const FieldT& field_F, const Frac& K0,
                       std::size_t budget = kDefaultClusterBudget) {
  const int d = A.dim;
  geo::Frame fr(A);
  std::int64_t quantum = field_F.quantum();
  std::int64_t t0num = ceil_root_scaled(A.area2(), static_cast<std::uint64_t>(quantum),
                                        4 * static_cast<unsigned>(d - 1));
  Frac t0(t0num, quantum);

  ExtTicks level = ExtTicks::finite(
      checked_cast64(static_cast<i128>(K0.num()) * quantum / K0.den(), "K0 ticks"));
  if (static_cast<i128>(K0.num()) * quantum % K0.den() != 0)
    throw std::domain_error("K0 is not on the capacity grid");

  std::vector<Point> base = slab_base_vertices(A);
  RegionPred slab_region = [fr](const Point& p) { return fr.normal_dot(p) >= 0; };
  Cluster reach = detail::explore(field_F, level, base, slab_region, budget);

  SlabHeight out;
  out.threshold = t0;
  out.budget_exceeded = !reach.complete;
  std::int64_t dmax = -1;
  for (const Point& p : reach.vertices) dmax = std::max(dmax, fr.normal_dot(p));
  if (dmax < 0) {
    out.value = t0;
    out.thresholded = true;
    return out;
  }
  // smallest grid value >= dmax/sqrt(W) + 1:  (k - Q)^2 W >= (Q dmax)^2
  i128 target = static_cast<i128>(quantum) * dmax;
  target *= target;
  std::int64_t W = fr.W;
  long double est = sqrtl(static_cast<long double>(target) / W);
  std::int64_t m = static_cast<std::int64_t>(est) - 2;
  if (m < 0) m = 0;
  while (static_cast<i128>(m) * m * W < target) ++m;
  Frac bumped(quantum + m, quantum);
  out.value = std::max(t0, bumped);
  out.thresholded = out.value == t0;
  return out;
}

// One windowed slab flow problem: sources V(A), region t in [0,H] clipped to
// the window's lateral box grown by `margin`.  The closed variant sinks only
// at the top layer; the open variant adds the lateral shell, so
//     closed <= flow through the laterally unbounded slab <= open,
// and equality of the two certifies the unbounded value.
struct SlabProblems {
  FlowProblem closed;
  FlowProblem open;
};

inline SlabProblems build_slab_problems(const Hyperrect& A, const Hyperrect& window,
                                        std::int64_t margin, const Frac& H) {
  geo::Frame frA(A);
  geo::Frame frW(window);
  std::int64_t hn = H.num(), hd = H.den();
  auto in_slab = [&](const Point& p) {
    return frA.normal_dot(p) >= 0 && frA.cmp_t(p, hn, hd) <= 0;
  };
  auto in_window = [&](const Point& p) { return frW.lateral_in(p, -margin, margin); };

  CylinderSpec scanSpec = slab_cylinder(window, H);
  Box box = bounding_box(scanSpec, margin + 1);
  std::vector<Point> verts;
  std::vector<Point> top, shell;
  box.for_each([&](const Point& p) {
    if (!in_slab(p) || !in_window(p)) return;
    verts.push_back(p);
    bool isTop = false, isShell = false;
    for (int a = 0; a < window.dim; ++a) {
      for (int dir = -1; dir <= 1; dir += 2) {
        Point y = neighbor(p, a, dir);
        if (frA.normal_dot(y) >= 0 && frA.cmp_t(y, hn, hd) > 0) isTop = true;
        if (in_slab(y) && !in_window(y)) isShell = true;
      }
    }
    if (isTop) top.push_back(p);
    if (isShell) shell.push_back(p);
  });
  std::vector<Point> base = slab_base_vertices(A);
  std::vector<Point> all = verts;
  all.insert(all.end(), base.begin(), base.end());
  SlabProblems out;
  out.closed = detail::assemble_problem(A.dim, all, base, top);
  std::vector<Point> open_sinks = top;
  open_sinks.insert(open_sinks.end(), shell.begin(), shell.end());
  out.open = detail::assemble_problem(A.dim, all, base, open_sinks);
  return out;
}

struct SlabFlowSample {
  Frac height;
  bool height_thresholded = false;
  ExtTicks value = ExtTicks::finite(0);  // certified value when certified
  ExtTicks open_value = ExtTicks::finite(0);
  ExtTicks closed_value = ExtTicks::finite(0);
  bool certified = false;
  std::size_t cut_cardinality = 0;
  std::int64_t margin = 0;
  bool budget_flag = false;
};

template <class FieldT>
SlabFlowSample slab_flow_windowed(const Hyperrect& A, const Hyperrect& window,
                                  std::int64_t margin, const Frac& H, const FieldT& field_G) {
  SlabProblems pbs = build_slab_problems(A, window, margin, H);
  CutResult open = max_flow(pbs.open, field_G);
  CutResult closed = max_flow(pbs.closed, field_G);
  SlabFlowSample s;
  s.height = H;
  s.margin = margin;
  s.open_value = open.value;
  s.closed_value = closed.value;
  s.certified = open.value == closed.value;
  s.value = open.value;
  s.cut_cardinality = open.cardinality;
  return s;
}

// tilde-phi(A): flow from V(A) to the layer at the random height H_{F,K0}(A)
// in the laterally unbounded slab, under the G-capacities.  The window grows
// until the open/closed pair certifies the unbounded value.
template <class FieldG, class FieldF>
SlabFlowSample tilde_phi(const Hyperrect& A, const FieldG& field_G, const FieldF& field_F,
                         const Frac& K0, std::int64_t margin_budget = 64,
                         std::size_t budget = kDefaultClusterBudget) {
  SlabHeight H = slab_height(A, field_F, K0, budget);
  std::int64_t m = std::max<std::int64_t>(2, H.value.num() / H.value.den() + 2);
  SlabFlowSample best;
  while (true) {
    best = slab_flow_windowed(A, A, m, H.value, field_G);
    best.height_thresholded = H.thresholded;
    best.budget_flag = H.budget_exceeded;
    if (best.certified || m > margin_budget) break;
    m *= 2;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Subadditivity of the slab flows, evaluated under one shared lateral window.
// ---------------------------------------------------------------------------

struct SubadditivityReport {
  SlabFlowSample whole;
  std::vector<SlabFlowSample> tiles;
  bool holds = false;           // whole.value <= sum of tile values
  bool all_certified = false;
  std::int64_t margin = 0;
};

// Splits B into `parts` equal tiles along basis axis `axis`.
inline std::vector<Hyperrect> split_hyperrect(const Hyperrect& B, std::size_t axis,
                                              std::int64_t parts) {
  if (axis >= B.basis.size() || parts <= 0 || B.extent[axis] % parts != 0)
    throw std::domain_error("split_hyperrect: invalid tiling");
  std::int64_t step = B.extent[axis] / parts;
  std::vector<Hyperrect> tiles;
  for (std::int64_t k = 0; k < parts; ++k) {
    Hyperrect t = B;
    t.extent[axis] = step;
    for (int i = 0; i < B.dim; ++i) t.origin[i] += k * step * B.basis[axis][i];
    tiles.push_back(t);
  }
  return tiles;
}

namespace detail {
inline void check_tiling(const Hyperrect& B, const std::vector<Hyperrect>& tiles) {
  if (tiles.empty()) throw std::domain_error("tiling: no tiles");
  // same orientation, exact offsets in basis units, tiles partition B's box
  std::vector<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>> cells;
  i128 vol = 0, bvol = 1;
  for (std::size_t i = 0; i < B.basis.size(); ++i) bvol *= B.extent[i];
  for (const Hyperrect& t : tiles) {
    if (t.dim != B.dim || t.basis != B.basis || !(t.normal.w == B.normal.w))
      throw std::domain_error("tiling: tiles must share B's orientation and basis");
    std::vector<std::int64_t> lo, hi;
    i128 tvol = 1;
    for (std::size_t i = 0; i < B.basis.size(); ++i) {
      std::int64_t nf = dot_vec(B.basis[i], B.basis[i], B.dim);
      std::array<std::int64_t, kMaxDim> diff{};
      for (int k = 0; k < B.dim; ++k) diff[k] = t.origin[k] - B.origin[k];
      std::int64_t num = dot_vec(B.basis[i], diff, B.dim);
      if (num % nf != 0) throw std::domain_error("tiling: tile offset not on the basis grid");
      std::int64_t off = num / nf;
      if (off < 0 || off + t.extent[i] > B.extent[i])
        throw std::domain_error("tiling: tile escapes B");
      lo.push_back(off);
      hi.push_back(off + t.extent[i]);
      tvol *= t.extent[i];
    }
    // tiles must sit exactly in the lattice spanned by the basis
    std::array<std::int64_t, kMaxDim> recon = B.origin;
    for (std::size_t i = 0; i < B.basis.size(); ++i)
      for (int k = 0; k < B.dim; ++k) recon[k] += lo[i] * B.basis[i][k];
    if (!(recon == t.origin)) throw std::domain_error("tiling: tile origin off the basis grid");
    for (const auto& [plo, phi] : cells) {
      bool disjoint = false;
      for (std::size_t i = 0; i < lo.size(); ++i)
        if (hi[i] <= plo[i] || phi[i] <= lo[i]) disjoint = true;
      if (!disjoint) throw std::domain_error("tiling: tiles overlap");
    }
    cells.emplace_back(lo, hi);
    vol += tvol;
  }
  if (vol != bvol) throw std::domain_error("tiling: tiles do not cover B");
}
}  // namespace detail

template <class FieldG, class FieldF>
SubadditivityReport subadditive_split(const Hyperrect& B, const std::vector<Hyperrect>& tiles,
                                      const FieldG& field_G, const FieldF& field_F,
                                      const Frac& K0, std::int64_t margin_budget = 64) {
  detail::check_tiling(B, tiles);
  SlabHeight HB = slab_height(B, field_F, K0);
  std::vector<SlabHeight> Ht;
  Frac hmax = HB.value;
  for (const Hyperrect& t : tiles) {
    Ht.push_back(slab_height(t, field_F, K0));
    hmax = std::max(hmax, Ht.back().value);
  }
  std::int64_t m = std::max<std::int64_t>(2, hmax.num() / hmax.den() + 2);
  SubadditivityReport rep;
  while (true) {
    rep.margin = m;
    rep.whole = slab_flow_windowed(B, B, m, HB.value, field_G);
    rep.whole.height_thresholded = HB.thresholded;
    rep.tiles.clear();
    rep.all_certified = rep.whole.certified;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      rep.tiles.push_back(slab_flow_windowed(tiles[i], B, m, Ht[i].value, field_G));
      rep.tiles.back().height_thresholded = Ht[i].thresholded;
      rep.all_certified = rep.all_certified && rep.tiles.back().certified;
    }
    if (rep.all_certified || m > margin_budget) break;
    m *= 2;
  }
  ExtSum rhs;
  for (const SlabFlowSample& t : rep.tiles) rhs.add(t.value);
  rep.holds = rhs.is_infinite() || !(rhs.to_ext() < rep.whole.value);
  return rep;
}

// ---------------------------------------------------------------------------
// Cutset surgery around heavy edges (the truncation comparison construction).
// ---------------------------------------------------------------------------

struct SurgeryResult {
  std::vector<Edge> eprime;      // (E \ F) united with the clipped boundaries
  std::vector<Edge> removed;     // F = heavy edges of E
  std::size_t boundary_edges = 0;  // sum of carde(S_i) before clipping
  std::size_t cluster_count = 0;   // r: distinct clusters
  bool budget_flag = false;
};

template <class FieldT>
SurgeryResult cutset_surgery(const std::vector<Edge>& E, const FieldT& field_G, const Frac& K,
                             const Frac& K0, const CylinderSpec& region,
                             std::size_t budget = kDefaultClusterBudget) {
  if (!(K0 < K)) throw std::domain_error("cutset_surgery: needs K0 < K");
  std::int64_t quantum = field_G.quantum();
  auto ticks_of = [&](const Frac& v) {
    if (static_cast<i128>(v.num()) * quantum % v.den() != 0)
      throw std::domain_error("threshold not on the capacity grid");
    return ExtTicks::finite(
        checked_cast64(static_cast<i128>(v.num()) * quantum / v.den(), "threshold"));
  };
  ExtTicks kTicks = ticks_of(K);
  ExtTicks k0Ticks = ticks_of(K0);

  SurgeryResult out;
  std::vector<Edge> keep;
  for (const Edge& e : E) {
    if (field_G.capacity(e) >= kTicks)
      out.removed.push_back(e);
    else
      keep.push_back(e);
  }
  std::set<Point> seen_reps;
  EdgeSet eprime(keep.begin(), keep.end());
  for (const Edge& f : out.removed) {
    Cluster c = edge_cluster(field_G, k0Ticks, f, nullptr, budget);
    if (!c.complete) {
      out.budget_flag = true;
      continue;
    }
    if (!seen_reps.insert(c.vertices.front()).second) continue;  // one copy per cluster
    ++out.cluster_count;
    std::vector<Edge> bd = ext_boundary(c, field_G.dimension());
    out.boundary_edges += bd.size();
    for (const Edge& b : bd)
      if (member(region, b.lower) && member(region, edge_upper(b))) eprime.insert(b);
  }
  out.eprime.assign(eprime.begin(), eprime.end());
  std::sort(out.eprime.begin(), out.eprime.end());
  return out;
}

// ---------------------------------------------------------------------------
// The zero-regime cutset E'(A, l) in a straight one-sided cylinder.
// ---------------------------------------------------------------------------

struct ZeroSite {
  Point x;
  bool reaches_top = false;       // F_{x,l}
  std::size_t cluster_size = 0;   // cardv of the chosen cluster
};

struct ZeroCutsetResult {
  std::vector<Edge> eprime;
  std::vector<ZeroSite> sites;
  std::size_t heavy_sites = 0;    // sites with F_{x,l}
  std::size_t sum_r = 0;          // sum over F-sites of cardv(C_{G,K0}(x))
  bool budget_flag = false;
};

// For each x in A: decide whether a positive-capacity path climbs from x to
// level l inside the upper half-space, then take the exterior boundary of the
// level-0 cluster (if not) or of the level-K0 cluster (if so), clipped to the
// cylinder.
template <class FieldT>
ZeroCutsetResult zero_cutset(const Hyperrect& A, std::int64_t ell, const FieldT& field_G,
                             const Frac& K0, std::size_t budget = kDefaultClusterBudget) {
  const int d = A.dim;
  int axis = -1;
  for (int i = 0; i < d; ++i) {
    if (A.normal.w[i] != 0) {
      if (axis >= 0 || std::abs(A.normal.w[i]) != 1)
        throw std::domain_error("zero_cutset: straight cylinders only");
      axis = i;
    }
  }
  if (A.normal.w[axis] != 1) throw std::domain_error("zero_cutset: normal must be +e_axis");
  const Coord base_level = static_cast<Coord>(A.origin[axis]);
  CylinderSpec cyl = directed_cylinder(A, Frac(ell, 1));

  std::int64_t quantum = field_G.quantum();
  if (static_cast<i128>(K0.num()) * quantum % K0.den() != 0)
    throw std::domain_error("K0 is not on the capacity grid");
  ExtTicks k0Ticks = ExtTicks::finite(
      checked_cast64(static_cast<i128>(K0.num()) * quantum / K0.den(), "K0"));
  ExtTicks zero = ExtTicks::finite(0);

  // the base grid A cap Z^d
  geo::Frame fr(A);
  std::vector<Point> anchors;
  Box abox = bounding_box(directed_cylinder(A, Frac(0, 1)));
  abox.for_each([&](const Point& p) {
    if (fr.normal_dot(p) == 0 && fr.lateral_in(p, 0, 0)) anchors.push_back(p);
  });

  RegionPred half_slab = [axis, base_level, ell](const Point& p) {
    std::int64_t t = static_cast<std::int64_t>(p.c[axis]) - base_level;
    return t >= 0 && t <= ell;
  };

  ZeroCutsetResult out;
  EdgeSet eprime;
  std::set<std::pair<bool, Point>> reps;
  for (const Point& x : anchors) {
    Cluster half = cluster(field_G, zero, x, half_slab, budget);
    if (!half.complete) out.budget_flag = true;
    bool reaches = false;
    for (const Point& p : half.vertices)
      if (p.c[axis] - base_level == ell) reaches = true;
    ZeroSite site;
    site.x = x;
    site.reaches_top = reaches;
    Cluster full = cluster(field_G, reaches ? k0Ticks : zero, x, nullptr, budget);
    if (!full.complete) {
      out.budget_flag = true;
      continue;
    }
    site.cluster_size = full.vertices.size();
    if (reaches) {
      ++out.heavy_sites;
      out.sum_r += full.vertices.size();
    }
    out.sites.push_back(site);
    if (!reps.insert({reaches, full.vertices.front()}).second) continue;
    for (const Edge& b : ext_boundary(full, d))
      if (member(cyl, b.lower) && member(cyl, edge_upper(b))) eprime.insert(b);
  }
  out.eprime.assign(eprime.begin(), eprime.end());
  std::sort(out.eprime.begin(), out.eprime.end());
  return out;
}

// ---------------------------------------------------------------------------
// Annulus flows and the box decomposition of phi.
// ---------------------------------------------------------------------------

inline FlowProblem annulus_problem(std::int64_t L, const std::array<std::int64_t, kMaxDim>& i,
                                   int dim) {
  if (L < 2 || L % 2 != 0) throw std::domain_error("annulus: L must be even");
  std::vector<Point> verts, src, snk;
  Box box;
  box.dim = dim;
  for (int k = 0; k < dim; ++k) {
    box.lo[k] = static_cast<Coord>(L * i[k] - 3 * L / 2);
    box.hi[k] = static_cast<Coord>(L * i[k] + 3 * L / 2);
  }
  box.for_each([&](const Point& p) {
    std::int64_t norm = 0;
    for (int k = 0; k < dim; ++k)
      norm = std::max(norm, std::abs(static_cast<std::int64_t>(p.c[k]) - L * i[k]));
    if (norm < L / 2) return;
    verts.push_back(p);
    if (norm == L / 2) src.push_back(p);
    if (norm == 3 * L / 2) snk.push_back(p);
  });
  return detail::assemble_problem(dim, std::move(verts), src, snk);
}

template <class FieldT>
CutResult annulus_flow(std::int64_t L, const std::array<std::int64_t, kMaxDim>& i,
                       const FieldT& field) {
  return max_flow(annulus_problem(L, i, field.dimension()), field);
}

// Box indices whose L-box meets the continuous hyperrectangle A.  Exact for
// d = 2 and for axis-aligned rectangles in any dimension; a conservative
// bounding-box superset otherwise (a superset only adds annulus terms).
inline std::vector<std::array<std::int64_t, kMaxDim>> boxes_meeting(const Hyperrect& A,
                                                                    std::int64_t L) {
  const int d = A.dim;
  std::array<std::int64_t, kMaxDim> clo{}, chi{};
  std::size_t corners = std::size_t(1) << A.basis.size();
  for (std::size_t mask = 0; mask < corners; ++mask) {
    std::array<std::int64_t, kMaxDim> c = A.origin;
    for (std::size_t b = 0; b < A.basis.size(); ++b)
      if ((mask >> b) & 1)
        for (int k = 0; k < d; ++k) c[k] += A.extent[b] * A.basis[b][k];
    for (int k = 0; k < d; ++k) {
      clo[k] = mask == 0 ? c[k] : std::min(clo[k], c[k]);
      chi[k] = mask == 0 ? c[k] : std::max(chi[k], c[k]);
    }
  }
  bool axis_aligned = true;
  for (const auto& f : A.basis) {
    int nz = 0;
    for (int k = 0; k < d; ++k)
      if (f[k] != 0) ++nz;
    if (nz != 1) axis_aligned = false;
  }
  std::vector<std::array<std::int64_t, kMaxDim>> out;
  std::array<std::int64_t, kMaxDim> lo{}, hi{};
  for (int k = 0; k < d; ++k) {
    // boxes whose closed box [L j - L/2, L j + L/2] meets [clo, chi]:
    // j >= (clo - L/2)/L and j <= (chi + L/2)/L
    auto floor_div = [](std::int64_t a, std::int64_t b) {
      std::int64_t q = a / b;
      return q * b > a ? q - 1 : q;
    };
    lo[k] = -floor_div(L / 2 - clo[k], L);
    hi[k] = floor_div(chi[k] + L / 2, L);
  }
  std::array<std::int64_t, kMaxDim> idx = lo;
  while (true) {
    bool keep = true;
    if (axis_aligned || d > 2) {
      // bbox test (exact when axis-aligned)
      keep = true;
    } else {
      // d = 2 tilted: exact segment/box intersection by interval clipping
      // segment P(t) = origin + t * ext * f, t in [0,1]
      std::int64_t fx = A.basis[0][0] * A.extent[0];
      std::int64_t fy = A.basis[0][1] * A.extent[0];
      std::int64_t px = A.origin[0], py = A.origin[1];
      // clip t-interval per axis: L*idx - L/2 <= p + t*f <= L*idx + L/2
      i128 tlo_n = 0, tlo_d = 1, thi_n = 1, thi_d = 1;  // t in [tlo, thi]
      bool empty = false;
      auto clip = [&](std::int64_t p0, std::int64_t fv, std::int64_t lob, std::int64_t hib) {
        if (fv == 0) {
          if (p0 < lob || p0 > hib) empty = true;
          return;
        }
        i128 anum = lob - p0, bnum = hib - p0;
        i128 den = fv;
        if (den < 0) {
          std::swap(anum, bnum);
          anum = -anum;
          bnum = -bnum;
          den = -den;
        }
        // t >= anum/den, t <= bnum/den
        if (anum * tlo_d > tlo_n * den) {
          tlo_n = anum;
          tlo_d = den;
        }
        if (bnum * thi_d < thi_n * den) {
          thi_n = bnum;
          thi_d = den;
        }
      };
      clip(px, fx, L * idx[0] - L / 2, L * idx[0] + L / 2);
      clip(py, fy, L * idx[1] - L / 2, L * idx[1] + L / 2);
      keep = !empty && tlo_n * thi_d <= thi_n * tlo_d;
    }
    if (keep) out.push_back(idx);
    int k = 0;
    while (k < d) {
      if (idx[k] < hi[k]) {
        ++idx[k];
        break;
      }
      idx[k] = lo[k];
      ++k;
    }
    if (k == d) break;
  }
  return out;
}

struct AnnulusDecomposition {
  ExtTicks lhs = ExtTicks::finite(0);      // phi(A, h)
  ExtTicks rhs = ExtTicks::finite(0);      // sum of annulus flows over J
  std::vector<std::array<std::int64_t, kMaxDim>> box_indices;
  bool holds = false;
};

template <class FieldT>
AnnulusDecomposition annulus_decomposition(const Hyperrect& A, const Frac& h, std::int64_t L,
                                           const FieldT& field) {
  AnnulusDecomposition out;
  out.box_indices = boxes_meeting(A, L);
  // every enlarged box must stay at normal distance > 1 from both faces, so
  // top and bottom terminals lie strictly outside it and every top-to-bottom
  // path has to leave the annulus
  geo::Frame fr(A);
  std::int64_t sn = h.num() - h.den(), sd = h.den();  // h - 1
  if (sn <= 0) throw std::domain_error("annulus decomposition: cylinder too flat");
  for (const auto& i : out.box_indices) {
    for (std::size_t mask = 0; mask < (std::size_t(1) << A.dim); ++mask) {
      Point corner;
      for (int k = 0; k < A.dim; ++k)
        corner.c[k] = static_cast<Coord>(L * i[k] + ((mask >> k) & 1 ? 3 * L / 2 : -3 * L / 2));
      if (!(fr.cmp_t(corner, sn, sd) < 0) || !(fr.cmp_t(corner, -sn, sd) > 0))
        throw std::domain_error("annulus decomposition: boxes reach the cylinder faces");
    }
  }
  out.lhs = phi(A, h, field).value;
  ExtSum rhs;
  for (const auto& i : out.box_indices) rhs.add(annulus_flow(L, i, field).value);
  out.rhs = rhs.to_ext();
  out.holds = !(out.rhs < out.lhs);
  return out;
}

// ---------------------------------------------------------------------------
// Lattice-animal coarse graining of an edge set.
// ---------------------------------------------------------------------------

struct AnimalCoarsening {
  std::int64_t L = 0;
  std::set<std::array<std::int64_t, kMaxDim>> boxes;  // Gamma(E)
  bool connected = false;                             // Z^d-connected (nearest neighbor)
};

inline AnimalCoarsening animal(const std::vector<Edge>& E, std::int64_t L, int dim) {
  AnimalCoarsening out;
  out.L = L;
  for (const Edge& e : E) {
    for (const auto& i : boxes_containing(L, e.lower, dim)) out.boxes.insert(i);
    for (const auto& i : boxes_containing(L, edge_upper(e), dim)) out.boxes.insert(i);
  }
  if (out.boxes.empty()) {
    out.connected = true;
    return out;
  }
  std::set<std::array<std::int64_t, kMaxDim>> seen;
  std::vector<std::array<std::int64_t, kMaxDim>> stack{*out.boxes.begin()};
  seen.insert(stack[0]);
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    for (int k = 0; k < dim; ++k) {
      for (int dir = -1; dir <= 1; dir += 2) {
        auto j = i;
        j[k] += dir;
        if (out.boxes.count(j) && seen.insert(j).second) stack.push_back(j);
      }
    }
  }
  out.connected = seen.size() == out.boxes.size();
  return out;
}

}  // namespace latticeflow
