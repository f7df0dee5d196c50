#include <catch2/catch_amalgamated.hpp>

#include "latticeflow/flows.hpp"

using namespace latticeflow;

namespace {

constexpr std::int64_t Q = kDefaultQuantum;

struct TableField {
  std::unordered_map<Edge, ExtTicks, EdgeHash> cap;
  ExtTicks fallback = ExtTicks::finite(0);
  int dim = 2;
  std::int64_t quantum() const { return Q; }
  ExtTicks capacity(const Edge& e) const {
    auto it = cap.find(e);
    return it == cap.end() ? fallback : it->second;
  }
  int dimension() const { return dim; }
};

Hyperrect straightA(std::int64_t p) { return canonical_hyperrect(Direction::of({0, 1}), p); }

Distribution law(const std::string& lit) { return parse_distribution(lit); }

}  // namespace

TEST_CASE("phi: constant law counts disjoint columns") {
  CapacityField f2(law("2:1"), 1, 2);
  CutResult r4 = phi(straightA(4), Frac(2, 1), f2);
  CHECK(r4.value == ExtTicks::finite(5 * 2 * Q));
  CHECK(r4.cardinality == 5);
  // independent vertex-side oracle at p = 4
  FlowProblem pb = build_problem(symmetric_cylinder(straightA(4), Frac(2, 1)),
                                 TerminalChoice::TopBottom);
  CutResult oracle = brute_force_min_cut_vertex(pb, f2);
  CHECK(oracle.value == r4.value);
  CHECK(oracle.cardinality == r4.cardinality);
  CHECK(oracle.cutset == r4.cutset);
  // structural column count at p = 8
  CutResult r8 = phi(straightA(8), Frac(3, 1), f2);
  CHECK(r8.value == ExtTicks::finite(9 * 2 * Q));

  CapacityField zero(law("0:1"), 1, 2);
  CHECK(phi(straightA(4), Frac(2, 1), zero).value == ExtTicks::finite(0));
}

TEST_CASE("phi: truncation chain per sample") {
  Distribution g = law("0:1/4,1:1/4,4:1/4,16:1/4");
  Hyperrect A = straightA(6);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    CapacityField fg(g, seed, 2);
    ExtTicks v1 = phi(A, Frac(3, 1), fg.with_distribution(truncate(g, Frac(2, 1)))).value;
    ExtTicks v2 = phi(A, Frac(3, 1), fg.with_distribution(truncate(g, Frac(8, 1)))).value;
    ExtTicks v = phi(A, Frac(3, 1), fg).value;
    CHECK(v1 <= v2);
    CHECK(v2 <= v);
  }
}

TEST_CASE("phi is nonincreasing in the height, per sample") {
  Distribution g = law("0:1/4,1:1/2,3:1/4");
  Hyperrect A = straightA(6);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CapacityField f(g, seed, 2);
    ExtTicks shallow = phi(A, Frac(2, 1), f).value;
    ExtTicks deep = phi(A, Frac(4, 1), f).value;
    CHECK(deep <= shallow);
  }
  // tilted as well
  Hyperrect T = canonical_hyperrect(Direction::of({1, 1}), 4);
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    CapacityField f(g, seed, 2);
    CHECK(phi(T, Frac(5, 1), f).value <= phi(T, Frac(3, 1), f).value);
  }
}

TEST_CASE("tau equals phi for the constant law and cuts the phi problem") {
  CapacityField f(law("3:1"), 9, 2);
  Hyperrect A = straightA(4);
  CutResult t = tau(A, Frac(2, 1), f);
  CutResult p = phi(A, Frac(2, 1), f);
  CHECK(t.value == p.value);
  // vertex oracle for tau at p=4
  FlowProblem tpb = build_problem(symmetric_cylinder(A, Frac(2, 1)),
                                  TerminalChoice::HalfBoundaries);
  CutResult oracle = brute_force_min_cut_vertex(tpb, f);
  CHECK(oracle.value == t.value);

  // any tau cutset cuts the phi problem on straight cylinders
  Distribution g = law("0:1/4,1:1/2,3:1/4");
  FlowProblem ppb = build_problem(symmetric_cylinder(A, Frac(2, 1)),
                                  TerminalChoice::TopBottom);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CapacityField fs(g, seed, 2);
    CutResult ts = tau(A, Frac(2, 1), fs);
    CHECK(is_cutset(ts.cutset, ppb));
  }
  CapacityField zero(law("0:1"), 2, 2);
  CHECK(tau(A, Frac(2, 1), zero).value == ExtTicks::finite(0));
}

TEST_CASE("phi_directed: oracle value and translation replay") {
  CapacityField f(law("1:1"), 4, 2);
  Hyperrect A = straightA(3);
  CutResult r = phi_directed(A, Frac(3, 1), f);
  CHECK(r.value == ExtTicks::finite(4 * Q));
  FlowProblem pb = build_problem(directed_cylinder(A, Frac(3, 1)), TerminalChoice::TopBottom);
  CutResult oracle = brute_force_min_cut_vertex(pb, f);
  CHECK(oracle.value == r.value);
  CHECK(oracle.cutset == r.cutset);

  CapacityField zero(law("0:1"), 4, 2);
  CHECK(phi_directed(A, Frac(3, 1), zero).value == ExtTicks::finite(0));

  // one-sided cylinder of height 2k equals the symmetric one around A + k v,
  // read through a re-keyed field
  Distribution g = law("0:1/4,1:1/2,3:1/4");
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CapacityField fs(g, seed, 2);
    CutResult direct = phi_directed(A, Frac(4, 1), fs);
    CutResult shifted = phi(A, Frac(2, 1), fs.translated({0, 2}));
    CHECK(direct.value == shifted.value);
    CHECK(direct.cardinality == shifted.cardinality);
  }
}

TEST_CASE("slab_height: threshold, tall column, monotone in the level") {
  Hyperrect A = straightA(4);
  // no edge above K0: H = t0 = area^(1/2) exactly
  CapacityField ones(law("1:1"), 3, 2);
  SlabHeight h0 = slab_height(A, ones, Frac(1, 1));
  CHECK(h0.value == Frac(2, 1));
  CHECK(h0.thresholded);

  // single open column of height 5 rooted at V(A): one step above the reach
  TableField t;
  t.fallback = ExtTicks::finite(0);
  t.cap[Edge{make_point({2, -1}), 1}] = ExtTicks::finite(5 * Q);
  for (Coord y = 0; y < 5; ++y) t.cap[Edge{make_point({2, y}), 1}] = ExtTicks::finite(5 * Q);
  SlabHeight tall = slab_height(A, t, Frac(1, 1));
  CHECK(tall.value == Frac(6, 1));
  CHECK_FALSE(tall.thresholded);

  // raising K0 never increases the height
  Distribution g = law("0:1/4,1:1/4,2:1/4,3:1/4");
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CapacityField f(g, seed, 2);
    SlabHeight h1 = slab_height(A, f, Frac(2, 1));
    SlabHeight h2 = slab_height(A, f, Frac(3, 1));
    CHECK(!(h1.value < h2.value));
  }
}

TEST_CASE("tilde_phi: constant law is the certified flat cut") {
  Hyperrect A = straightA(4);
  CapacityField f3(law("3:1"), 5, 2);
  SlabFlowSample s = tilde_phi(A, f3, f3, Frac(3, 1));
  CHECK(s.certified);
  CHECK(s.height == Frac(2, 1));
  CHECK(s.height_thresholded);
  CHECK(s.value == ExtTicks::finite(5 * 3 * Q));
  CHECK(s.cut_cardinality == 5);

  CapacityField zero(law("0:1"), 5, 2);
  CapacityField f1 = zero.with_distribution(law("1:1"));
  SlabFlowSample z = tilde_phi(A, zero, f1, Frac(1, 1));
  CHECK(z.certified);
  CHECK(z.value == ExtTicks::finite(0));
}

TEST_CASE("tilde_phi dominates the cylinder flow when the height is the threshold") {
  // paths from the bottom of cyl(A,h) enter the slab through V(A), so every
  // slab cutset cuts the cylinder: phi(A,t0) <= tilde_phi(A) on {H = t0}
  Hyperrect A = straightA(4);
  Distribution g = law("0:1/4,1:1/2,2:1/4");
  int thresholded = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CapacityField f(g, seed, 2);
    SlabFlowSample s = tilde_phi(A, f, f, Frac(1, 1));
    REQUIRE(s.certified);
    if (!s.height_thresholded) continue;
    ++thresholded;
    CutResult sym = phi(A, s.height, f);
    CHECK(sym.value <= s.value);
  }
  CHECK(thresholded > 5);
}

TEST_CASE("subadditivity: single tile is equality, constant split exact") {
  Hyperrect B = straightA(4);
  CapacityField f(law("2:1"), 8, 2);
  SubadditivityReport one = subadditive_split(B, {B}, f, f, Frac(2, 1));
  CHECK(one.holds);
  CHECK(one.all_certified);
  CHECK(one.whole.value == one.tiles[0].value);

  Hyperrect B8 = straightA(8);
  SubadditivityReport halves =
      subadditive_split(B8, split_hyperrect(B8, 0, 2), f, f, Frac(2, 1));
  CHECK(halves.holds);
  CHECK(halves.all_certified);
}

TEST_CASE("subadditivity holds on every random sample") {
  Hyperrect B = straightA(8);
  std::vector<Hyperrect> tiles = split_hyperrect(B, 0, 2);
  Distribution g = law("0:1/4,1:1/2,4:1/4");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CapacityField f(g, seed, 2);
    SubadditivityReport rep = subadditive_split(B, tiles, f, f, Frac(4, 1));
    CHECK(rep.all_certified);
    CHECK(rep.holds);
  }
}

TEST_CASE("tiling validation") {
  Hyperrect B = straightA(8);
  std::vector<Hyperrect> tiles = split_hyperrect(B, 0, 2);
  CapacityField f(law("1:1"), 0, 2);
  tiles.pop_back();
  CHECK_THROWS_AS(subadditive_split(B, tiles, f, f, Frac(1, 1)), std::domain_error);
  CHECK_THROWS_AS(split_hyperrect(B, 0, 3), std::domain_error);
}

TEST_CASE("cutset surgery: no heavy edges leaves the cut unchanged") {
  Hyperrect A = straightA(4);
  CylinderSpec spec = symmetric_cylinder(A, Frac(2, 1));
  FlowProblem pb = build_problem(spec, TerminalChoice::TopBottom);
  CapacityField f(law("1:1"), 3, 2);
  CutResult r = max_flow(pb, f);
  SurgeryResult s = cutset_surgery(r.cutset, f, Frac(2, 1), Frac(1, 1), spec);
  CHECK(s.removed.empty());
  CHECK(s.eprime == r.cutset);
}

TEST_CASE("cutset surgery: one isolated heavy edge is replaced by its boundary") {
  Hyperrect A = straightA(4);
  CylinderSpec spec = symmetric_cylinder(A, Frac(2, 1));
  FlowProblem pb = build_problem(spec, TerminalChoice::TopBottom);
  TableField t;
  t.fallback = ExtTicks::finite(1 * Q);
  Edge heavy{make_point({2, 0}), 1};
  t.cap[heavy] = ExtTicks::finite(100 * Q);
  CutResult r = max_flow(pb, t);
  REQUIRE(std::find(r.cutset.begin(), r.cutset.end(), heavy) == r.cutset.end());
  // force the heavy edge into a cut: take the flat cut through level 0
  std::vector<Edge> flat;
  for (Coord x = 0; x <= 4; ++x) flat.push_back(Edge{make_point({x, 0}), 1});
  REQUIRE(is_cutset(flat, pb));
  SurgeryResult s = cutset_surgery(flat, t, Frac(50, 1), Frac(1, 1), spec);
  REQUIRE(s.removed == std::vector<Edge>{heavy});
  CHECK(s.cluster_count == 1);
  CHECK(s.boundary_edges <= 6);  // 2(2d-1) incident edges
  CHECK(is_cutset(s.eprime, pb));
  // added edges all sit at or below K0
  EdgeSet kept(flat.begin(), flat.end());
  for (const Edge& e : s.eprime)
    if (!kept.count(e)) CHECK(t.capacity(e) <= ExtTicks::finite(1 * Q));
}

TEST_CASE("cutset surgery satisfies the truncation bound on regular samples") {
  Hyperrect A = straightA(8);
  Frac h(3, 1);
  CylinderSpec spec = symmetric_cylinder(A, h);
  FlowProblem pb = build_problem(spec, TerminalChoice::TopBottom);
  Distribution g = law("1:0.05,8:0.9,64:0.05");
  Frac K(16, 1), K0(8, 1);
  Distribution gk = truncate(g, K);
  // the flat cut through level 0 keeps heavy edges at a healthy rate, unlike
  // the minimal cut, which detours around them
  std::vector<Edge> flat;
  for (Coord x = 0; x <= 8; ++x) flat.push_back(Edge{make_point({x, 0}), 1});
  REQUIRE(is_cutset(flat, pb));
  int regular = 0, surgeries = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    CapacityField fg(g, seed, 2);
    CapacityField fk = fg.with_distribution(gk);
    for (bool minimal : {true, false}) {
      std::vector<Edge> E = minimal ? max_flow(pb, fk).cutset : flat;
      SurgeryResult s = cutset_surgery(E, fg, K, K0, spec);
      if (!event_E_prime(fg, ExtTicks::finite(8 * Q), pb.edges, h)) continue;
      if (minimal) ++regular;
      if (!s.removed.empty()) ++surgeries;
      CHECK(is_cutset(s.eprime, pb));
      // exact arithmetic replay of the capacity bound against T_{G^K}(E)
      ExtSum tg, tk;
      for (const Edge& e : s.eprime) tg.add(fg.capacity(e));
      for (const Edge& e : E) tk.add(fk.capacity(e));
      i128 bound =
          tk.total() + static_cast<i128>(8 * Q) * static_cast<i128>(s.boundary_edges);
      CHECK(tg.total() <= bound);
      // every added edge has G-capacity at most K0; no kept edge is heavy
      EdgeSet original(E.begin(), E.end());
      for (const Edge& e : s.eprime) {
        if (original.count(e))
          CHECK(fg.capacity(e) < ExtTicks::finite(16 * Q));
        else
          CHECK(fg.capacity(e) <= ExtTicks::finite(8 * Q));
      }
    }
  }
  CHECK(regular > 10);
  CHECK(surgeries > 0);
}

TEST_CASE("zero cutset: all-zero and all-light fields") {
  Hyperrect A = straightA(4);
  FlowProblem pb = build_problem(directed_cylinder(A, Frac(4, 1)), TerminalChoice::TopBottom);
  CapacityField zero(law("0:1"), 2, 2);
  ZeroCutsetResult z = zero_cutset(A, 4, zero, Frac(1, 1));
  CHECK(z.heavy_sites == 0);
  ExtSum t0;
  for (const Edge& e : z.eprime) t0.add(zero.capacity(e));
  CHECK(t0.total() == 0);
  CHECK(is_cutset(z.eprime, pb));

  CapacityField ones(law("1:1"), 2, 2);
  ZeroCutsetResult o = zero_cutset(A, 4, ones, Frac(1, 1));
  CHECK(o.heavy_sites == o.sites.size());
  CHECK(is_cutset(o.eprime, pb));
}

TEST_CASE("zero cutset: Bernoulli samples cut on the regular event") {
  Hyperrect A = straightA(16);
  std::int64_t ell = 4;
  FlowProblem pb = build_problem(directed_cylinder(A, Frac(ell, 1)), TerminalChoice::TopBottom);
  Distribution g = law("0:0.7,1:0.3");
  Frac K0(1, 1);
  int regular = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CapacityField f(g, seed, 2);
    ZeroCutsetResult z = zero_cutset(A, ell, f, K0);
    for (const Edge& e : z.eprime) CHECK(f.capacity(e) <= ExtTicks::finite(Q));
    std::vector<Point> verts;
    for (const Point& p : pb.vertices) verts.push_back(p);
    if (!event_E(f, ExtTicks::finite(Q), verts, Frac(ell, 1))) continue;
    ++regular;
    CHECK(is_cutset(z.eprime, pb));
  }
  CHECK(regular > 5);
}

TEST_CASE("annulus flow and the box decomposition") {
  CapacityField zero(law("0:1"), 7, 2);
  CHECK(annulus_flow(4, {0, 0}, zero).value == ExtTicks::finite(0));

  // single box covering the whole base
  CapacityField one(law("1:1"), 7, 2);
  AnnulusDecomposition single = annulus_decomposition(straightA(2), Frac(14, 1), 8, one);
  CHECK(single.box_indices.size() == 1);
  CHECK(single.holds);
  CHECK(!(single.rhs < single.lhs));

  AnnulusDecomposition zd = annulus_decomposition(straightA(2), Frac(14, 1), 8, zero);
  CHECK(zd.lhs == ExtTicks::finite(0));
  CHECK(zd.rhs == ExtTicks::finite(0));

  // random fields: the inequality holds on every sample
  Distribution g = law("0:1/4,1:1/2,3:1/4");
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CapacityField f(g, seed, 2);
    AnnulusDecomposition dec = annulus_decomposition(straightA(16), Frac(8, 1), 4, f);
    CHECK(dec.holds);
  }

  // flat cylinders are rejected
  CHECK_THROWS_AS(annulus_decomposition(straightA(16), Frac(4, 1), 4, one), std::domain_error);
}

TEST_CASE("lattice animal coarsening") {
  CHECK(animal({}, 4, 2).boxes.empty());
  CHECK(animal({}, 4, 2).connected);
  AnimalCoarsening one = animal({Edge{make_point({0, 0}), 0}}, 4, 2);
  CHECK(one.boxes.size() == 1);
  CHECK(one.connected);
  // an edge on a box boundary contributes every box containing it
  AnimalCoarsening boundary = animal({Edge{make_point({2, 0}), 1}}, 4, 2);
  CHECK(boundary.boxes.size() == 2);
  CHECK(boundary.connected);

  // minimal cutsets of seeded cylinders are efficient and their animals connect
  Hyperrect A = straightA(16);
  FlowProblem pb = build_problem(symmetric_cylinder(A, Frac(4, 1)), TerminalChoice::TopBottom);
  Distribution g = law("0:1/4,1:1/2,3:1/4");
  double max_ratio = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CapacityField f(g, seed, 2);
    CutResult r = max_flow(pb, f);
    REQUIRE(efficient(r.cutset, pb));
    AnimalCoarsening a = animal(r.cutset, 4, 2);
    CHECK(a.connected);
    if (!r.cutset.empty())
      max_ratio = std::max(max_ratio, 4.0 * static_cast<double>(a.boxes.size()) /
                                          static_cast<double>(r.cutset.size()));
  }
  CHECK(max_ratio > 0);  // measured, not asserted against any constant
}

TEST_CASE("coupling monotonicity across all functionals") {
  Distribution g = law("0:1/4,1:1/2,2:1/4");
  Distribution hi = law("1:1/4,2:1/2,4:1/4");
  REQUIRE(dominates(hi, g));
  Hyperrect A = straightA(4);
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    CapacityField fg(g, seed, 2);
    CapacityField fh = fg.with_distribution(hi);
    CHECK(phi(A, Frac(2, 1), fg).value <= phi(A, Frac(2, 1), fh).value);
    CHECK(tau(A, Frac(2, 1), fg).value <= tau(A, Frac(2, 1), fh).value);
    CHECK(phi_directed(A, Frac(2, 1), fg).value <= phi_directed(A, Frac(2, 1), fh).value);
    SlabFlowSample sg = tilde_phi(A, fg, fh, Frac(4, 1));
    SlabFlowSample sh = tilde_phi(A, fh, fh, Frac(4, 1));
    REQUIRE(sg.certified);
    REQUIRE(sh.certified);
    CHECK(sg.value <= sh.value);
  }
}
