#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "latticeflow/lattice.hpp"
#include "latticeflow/numeric.hpp"

namespace latticeflow {

struct CapacityOverflowError : OverflowError {
  CapacityOverflowError() : OverflowError("lexicographic capacity range exceeded") {}
};

// Exact max-flow result.  The cutset is the minimum-capacity cutset of
// minimum cardinality, tie-broken as the residual source-side cut of the
// lexicographic problem; the stream is a feasible integer stream achieving
// the value (signed along each edge's +axis orientation, in ticks).
struct CutResult {
  ExtTicks value = ExtTicks::finite(0);
  std::vector<Edge> cutset;          // empty when value is infinite
  std::size_t cardinality = 0;
  bool has_stream = false;
  std::vector<std::int64_t> stream;  // aligned with problem.edges
};

namespace detail {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Dinic on an undirected graph given as arc pairs, i128 capacities.
class Dinic {
 public:
  explicit Dinic(std::size_t n) : head_(n, -1) {}

  int add_undirected(std::uint32_t u, std::uint32_t v, i128 cap) {
    int id = static_cast<int>(to_.size());
    push_arc(u, v, cap);
    push_arc(v, u, cap);
    return id;  // arcs id (u->v) and id+1 (v->u)
  }

  i128 run(std::uint32_t s, std::uint32_t t) {
    i128 total = 0;
    while (bfs(s, t)) {
      iter_ = head_;
      i128 f;
      while ((f = dfs(s, t, kInf128)) > 0) total += f;
    }
    return total;
  }

  // net flow u->v through arc pair id
  i128 net_flow(int id) const { return flow_[id]; }

  std::vector<char> residual_reachable(std::uint32_t s) const {
    std::vector<char> seen(head_.size(), 0);
    std::vector<std::uint32_t> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      std::uint32_t u = stack.back();
      stack.pop_back();
      for (int e = head_[u]; e != -1; e = next_[e]) {
        if (flow_[e] < cap_[e] && !seen[to_[e]]) {
          seen[to_[e]] = 1;
          stack.push_back(to_[e]);
        }
      }
    }
    return seen;
  }

 private:
  static constexpr i128 kInf128 = ~(static_cast<i128>(1) << 127);

  void push_arc(std::uint32_t u, std::uint32_t v, i128 cap) {
    to_.push_back(v);
    cap_.push_back(cap);
    flow_.push_back(0);
    next_.push_back(head_[u]);
    head_[u] = static_cast<int>(to_.size()) - 1;
  }

  bool bfs(std::uint32_t s, std::uint32_t t) {
    level_.assign(head_.size(), -1);
    std::vector<std::uint32_t> q{s};
    level_[s] = 0;
    for (std::size_t qi = 0; qi < q.size(); ++qi) {
      std::uint32_t u = q[qi];
      for (int e = head_[u]; e != -1; e = next_[e]) {
        if (flow_[e] < cap_[e] && level_[to_[e]] < 0) {
          level_[to_[e]] = level_[u] + 1;
          q.push_back(to_[e]);
        }
      }
    }
    return level_[t] >= 0;
  }

  i128 dfs(std::uint32_t u, std::uint32_t t, i128 pushed) {
    if (u == t) return pushed;
    for (int& e = iter_[u]; e != -1; e = next_[e]) {
      std::uint32_t v = to_[e];
      if (flow_[e] < cap_[e] && level_[v] == level_[u] + 1) {
        i128 f = dfs(v, t, std::min(pushed, cap_[e] - flow_[e]));
        if (f > 0) {
          flow_[e] += f;
          flow_[e ^ 1] -= f;
          return f;
        }
      }
    }
    level_[u] = -2;
    return 0;
  }

  std::vector<int> head_;
  std::vector<std::uint32_t> to_;
  std::vector<i128> cap_, flow_;
  std::vector<int> next_, iter_;
  std::vector<int> level_;
};

struct ContractedGraph {
  bool infinite = false;            // a source got merged with a sink
  std::uint32_t n = 0;              // contracted node count
  std::uint32_t s = 0, t = 0;       // contracted terminals
  std::vector<std::uint32_t> node;  // original vertex -> contracted node
  std::vector<std::size_t> finite_edges;  // indices into problem.edges
  std::vector<std::int64_t> ticks;        // capacity of those edges
  std::vector<std::size_t> inf_edges;     // contracted (infinite) edges
};

template <class FieldT>
ContractedGraph contract(const FlowProblem& pb, const FieldT& field) {
  ContractedGraph g;
  UnionFind uf(pb.vertices.size() + 2);
  std::uint32_t sRoot = static_cast<std::uint32_t>(pb.vertices.size());
  std::uint32_t tRoot = sRoot + 1;
  for (std::uint32_t v : pb.sources) uf.unite(sRoot, v);
  for (std::uint32_t v : pb.sinks) uf.unite(tRoot, v);
  for (std::size_t i = 0; i < pb.edges.size(); ++i) {
    ExtTicks c = field.capacity(pb.edges[i]);
    if (c.is_infinite()) {
      uf.unite(pb.vertex_id(pb.edges[i].lower), pb.vertex_id(edge_upper(pb.edges[i])));
      g.inf_edges.push_back(i);
    } else {
      g.finite_edges.push_back(i);
      g.ticks.push_back(c.ticks());
    }
  }
  if (uf.find(sRoot) == uf.find(tRoot)) {
    g.infinite = true;
    return g;
  }
  std::vector<std::uint32_t> remap(pb.vertices.size() + 2,
                                   std::numeric_limits<std::uint32_t>::max());
  auto id_of = [&](std::uint32_t v) {
    std::uint32_t r = uf.find(v);
    if (remap[r] == std::numeric_limits<std::uint32_t>::max()) remap[r] = g.n++;
    return remap[r];
  };
  g.s = id_of(sRoot);
  g.t = id_of(tRoot);
  g.node.resize(pb.vertices.size());
  for (std::uint32_t v = 0; v < pb.vertices.size(); ++v) g.node[v] = id_of(v);
  return g;
}

}  // namespace detail

// The exact maximal flow between the problem's terminal sets, plus the
// canonical minimal cutset.  Infinite-capacity edges are contracted before
// solving; minimal cardinality among minimum-capacity cutsets comes from
// solving with capacities c*(M+1)+1 and reading the source-side residual cut.
template <class FieldT>
CutResult max_flow(const FlowProblem& pb, const FieldT& field) {
  CutResult out;
  detail::ContractedGraph g = detail::contract(pb, field);
  if (g.infinite) {
    out.value = ExtTicks::infinity();
    return out;
  }
  const std::size_t m = pb.edges.size();
  std::int64_t tmax = 0;
  for (std::int64_t c : g.ticks) tmax = std::max(tmax, c);
  // Overflow guard: the worst-case cut value M*t_max must stay well inside
  // the 64-bit tick range, which also keeps the lexicographic totals
  // t_max*(M+1)*M far below the 128-bit accumulator range.
  if (static_cast<i128>(tmax) * static_cast<i128>(m) >= (static_cast<i128>(1) << 62))
    throw CapacityOverflowError();
  const i128 scale = static_cast<i128>(m) + 1;

  detail::Dinic lex(g.n);
  std::vector<int> arc(g.finite_edges.size(), -1);
  for (std::size_t k = 0; k < g.finite_edges.size(); ++k) {
    const Edge& e = pb.edges[g.finite_edges[k]];
    std::uint32_t u = g.node[pb.vertex_id(e.lower)];
    std::uint32_t v = g.node[pb.vertex_id(edge_upper(e))];
    if (u == v) continue;  // swallowed by a contraction
    arc[k] = lex.add_undirected(u, v, static_cast<i128>(g.ticks[k]) * scale + 1);
  }
  i128 lexval = lex.run(g.s, g.t);
  i128 ticks = lexval / scale;
  i128 card = lexval % scale;
  out.value = ExtTicks::finite(checked_cast64(ticks, "max-flow value"));
  out.cardinality = static_cast<std::size_t>(card);

  std::vector<char> side = lex.residual_reachable(g.s);
  i128 checkTicks = 0;
  for (std::size_t k = 0; k < g.finite_edges.size(); ++k) {
    if (arc[k] < 0) continue;
    const Edge& e = pb.edges[g.finite_edges[k]];
    std::uint32_t u = g.node[pb.vertex_id(e.lower)];
    std::uint32_t v = g.node[pb.vertex_id(edge_upper(e))];
    if (side[u] != side[v]) {
      out.cutset.push_back(e);
      checkTicks += g.ticks[k];
    }
  }
  if (out.cutset.size() != out.cardinality || checkTicks != ticks)
    throw std::logic_error("residual cut does not match the lexicographic value");

  // The lexicographic flow is not a feasible stream for the plain capacities;
  // solve once more with raw ticks for the stream certificate.
  detail::Dinic plain(g.n);
  for (std::size_t k = 0; k < g.finite_edges.size(); ++k) {
    if (arc[k] < 0) continue;
    const Edge& e = pb.edges[g.finite_edges[k]];
    std::uint32_t u = g.node[pb.vertex_id(e.lower)];
    std::uint32_t v = g.node[pb.vertex_id(edge_upper(e))];
    arc[k] = plain.add_undirected(u, v, g.ticks[k]);
  }
  i128 plainval = plain.run(g.s, g.t);
  if (plainval != ticks) throw std::logic_error("plain and lexicographic flow values differ");
  out.stream.assign(m, 0);
  for (std::size_t k = 0; k < g.finite_edges.size(); ++k)
    if (arc[k] >= 0)
      out.stream[g.finite_edges[k]] =
          checked_cast64(plain.net_flow(arc[k]), "stream flow");

  // Contracted components carried implicit flow on their infinite edges;
  // restore the node law by routing each component's imbalance through a
  // spanning tree of its contracted edges (terminals absorb their net).
  if (!g.inf_edges.empty()) {
    std::unordered_map<std::uint32_t, std::vector<std::pair<std::size_t, std::uint32_t>>> adj;
    for (std::size_t idx : g.inf_edges) {
      std::uint32_t a = pb.vertex_id(pb.edges[idx].lower);
      std::uint32_t b = pb.vertex_id(edge_upper(pb.edges[idx]));
      adj[a].push_back({idx, b});
      adj[b].push_back({idx, a});
    }
    std::vector<char> isTerminal(pb.vertices.size(), 0);
    for (std::uint32_t v : pb.sources) isTerminal[v] = 1;
    for (std::uint32_t v : pb.sinks) isTerminal[v] = 1;
    std::vector<i128> imbalance(pb.vertices.size(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (out.stream[i] == 0) continue;
      imbalance[pb.vertex_id(pb.edges[i].lower)] -= out.stream[i];
      imbalance[pb.vertex_id(edge_upper(pb.edges[i]))] += out.stream[i];
    }
    std::unordered_set<std::uint32_t> visited;
    for (const auto& [root, _] : adj) {
      if (visited.count(root)) continue;
      // BFS spanning tree of this contracted component
      std::vector<std::uint32_t> order{root};
      std::unordered_map<std::uint32_t, std::pair<std::size_t, std::uint32_t>> parent;
      visited.insert(root);
      for (std::size_t qi = 0; qi < order.size(); ++qi) {
        for (auto [eidx, nb] : adj[order[qi]]) {
          if (visited.insert(nb).second) {
            parent[nb] = {eidx, order[qi]};
            order.push_back(nb);
          }
        }
      }
      // prefer a terminal as the absorbing root
      std::uint32_t absorber = order[0];
      for (std::uint32_t v : order)
        if (isTerminal[v]) {
          absorber = v;
          break;
        }
      if (absorber != order[0]) {
        // re-root: rebuild parents from the absorber
        parent.clear();
        std::vector<std::uint32_t> ord2{absorber};
        std::unordered_set<std::uint32_t> vis2{absorber};
        for (std::size_t qi = 0; qi < ord2.size(); ++qi) {
          for (auto [eidx, nb] : adj[ord2[qi]]) {
            if (vis2.insert(nb).second) {
              parent[nb] = {eidx, ord2[qi]};
              ord2.push_back(nb);
            }
          }
        }
        order = std::move(ord2);
      }
      for (std::size_t qi = order.size(); qi-- > 1;) {
        std::uint32_t v = order[qi];
        if (isTerminal[v]) continue;  // terminals keep their imbalance
        auto [eidx, par] = parent[v];
        i128 need = imbalance[v];  // push the deficit toward the parent
        if (need == 0) continue;
        const Edge& e = pb.edges[eidx];
        bool vIsLower = pb.vertex_id(e.lower) == v;
        // positive stream flows lower -> upper
        out.stream[eidx] += checked_cast64(vIsLower ? need : -need, "stream rebalance");
        imbalance[par] += need;
        imbalance[v] = 0;
      }
    }
  }
  out.has_stream = true;
  return out;
}

// True iff no source-to-sink path avoids E inside the problem's edge set.
inline bool is_cutset(const EdgeSet& cut, const FlowProblem& pb) {
  std::vector<std::vector<std::uint32_t>> adj(pb.vertices.size());
  for (const Edge& e : pb.edges) {
    if (cut.count(e)) continue;
    std::uint32_t a = pb.vertex_id(e.lower);
    std::uint32_t b = pb.vertex_id(edge_upper(e));
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(pb.vertices.size(), 0);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s : pb.sources)
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    std::uint32_t u = stack.back();
    stack.pop_back();
    for (std::uint32_t v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
  }
  for (std::uint32_t t : pb.sinks)
    if (seen[t]) return false;
  return true;
}

inline bool is_cutset(const std::vector<Edge>& cut, const FlowProblem& pb) {
  return is_cutset(EdgeSet(cut.begin(), cut.end()), pb);
}

// A cutset cuts efficiently when no proper subset still cuts.
inline bool efficient(const std::vector<Edge>& cut, const FlowProblem& pb) {
  EdgeSet full(cut.begin(), cut.end());
  if (!is_cutset(full, pb)) throw std::domain_error("efficient: E is not a cutset");
  for (const Edge& e : cut) {
    EdgeSet reduced = full;
    reduced.erase(e);
    if (is_cutset(reduced, pb)) return false;
  }
  return true;
}

// Replays the node law, the capacity constraint and the strength of the
// stream carried by a finite CutResult.
template <class FieldT>
bool validate_stream(const CutResult& r, const FlowProblem& pb, const FieldT& field) {
  if (r.value.is_infinite() || !r.has_stream || r.stream.size() != pb.edges.size()) return false;
  std::vector<i128> net(pb.vertices.size(), 0);
  for (std::size_t i = 0; i < pb.edges.size(); ++i) {
    std::int64_t f = r.stream[i];
    ExtTicks cap = field.capacity(pb.edges[i]);
    if (!cap.is_infinite() && std::abs(f) > cap.ticks()) return false;
    net[pb.vertex_id(pb.edges[i].lower)] -= f;
    net[pb.vertex_id(edge_upper(pb.edges[i]))] += f;
  }
  std::vector<char> terminal(pb.vertices.size(), 0);
  for (std::uint32_t v : pb.sources) terminal[v] = 1;
  for (std::uint32_t v : pb.sinks) terminal[v] = 2;
  i128 outflow = 0;
  for (std::uint32_t v = 0; v < pb.vertices.size(); ++v) {
    if (terminal[v] == 0 && net[v] != 0) return false;
    if (terminal[v] == 1) outflow -= net[v];
  }
  return outflow == static_cast<i128>(r.value.ticks());
}

// ---------------------------------------------------------------------------
// Brute-force oracles (small instances only)
// ---------------------------------------------------------------------------

// Exhaustive subset oracle: enumerates all subsets of the finite-capacity
// edges, filters cutsets, and returns the lexicographic minimum of
// (capacity, cardinality, sorted edge encoding).
template <class FieldT>
CutResult brute_force_min_cut(const FlowProblem& pb, const FieldT& field) {
  const std::size_t m = pb.edges.size();
  if (m > 20) throw std::domain_error("brute_force_min_cut: more than 20 edges");
  std::vector<std::int64_t> ticks(m);
  std::vector<std::size_t> finite;
  EdgeSet infEdges;
  for (std::size_t i = 0; i < m; ++i) {
    ExtTicks c = field.capacity(pb.edges[i]);
    if (c.is_infinite())
      infEdges.insert(pb.edges[i]);
    else {
      ticks[i] = c.ticks();
      finite.push_back(i);
    }
  }
  bool found = false;
  i128 bestT = 0;
  std::size_t bestCard = 0;
  std::vector<Edge> bestSet;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << finite.size()); ++mask) {
    EdgeSet cut;
    i128 T = 0;
    for (std::size_t k = 0; k < finite.size(); ++k) {
      if ((mask >> k) & 1) {
        cut.insert(pb.edges[finite[k]]);
        T += ticks[finite[k]];
      }
    }
    if (found && (T > bestT || (T == bestT && cut.size() > bestCard))) continue;
    if (!is_cutset(cut, pb)) continue;
    std::vector<Edge> sorted(cut.begin(), cut.end());
    std::sort(sorted.begin(), sorted.end());
    bool better = !found || T < bestT || (T == bestT && cut.size() < bestCard) ||
                  (T == bestT && cut.size() == bestCard && sorted < bestSet);
    if (better) {
      found = true;
      bestT = T;
      bestCard = cut.size();
      bestSet = std::move(sorted);
    }
  }
  CutResult out;
  if (!found) {
    out.value = ExtTicks::infinity();
    return out;
  }
  out.value = ExtTicks::finite(checked_cast64(bestT, "oracle value"));
  out.cardinality = bestCard;
  out.cutset = std::move(bestSet);
  return out;
}

// Vertex-side oracle: enumerates source-side vertex sets of the contracted
// graph and minimizes the lexicographic cut weight; among all optimal sides
// it intersects them, which is exactly the residual source side the solver
// reports.  Independent of the augmenting-path machinery.
template <class FieldT>
CutResult brute_force_min_cut_vertex(const FlowProblem& pb, const FieldT& field) {
  detail::ContractedGraph g = detail::contract(pb, field);
  CutResult out;
  if (g.infinite) {
    out.value = ExtTicks::infinity();
    return out;
  }
  const i128 scale = static_cast<i128>(pb.edges.size()) + 1;
  std::vector<std::uint32_t> internal;
  for (std::uint32_t v = 0; v < g.n; ++v)
    if (v != g.s && v != g.t) internal.push_back(v);
  if (internal.size() > 20)
    throw std::domain_error("brute_force_min_cut_vertex: too many internal vertices");
  struct Arc {
    std::uint32_t u, v;
    i128 w;
    std::size_t k;  // finite edge slot
  };
  std::vector<Arc> arcs;
  for (std::size_t k = 0; k < g.finite_edges.size(); ++k) {
    const Edge& e = pb.edges[g.finite_edges[k]];
    std::uint32_t u = g.node[pb.vertex_id(e.lower)];
    std::uint32_t v = g.node[pb.vertex_id(edge_upper(e))];
    if (u != v) arcs.push_back({u, v, static_cast<i128>(g.ticks[k]) * scale + 1, k});
  }
  bool found = false;
  i128 best = 0;
  std::uint64_t bestSides = 0;  // intersection of optimal sides, as a bitmask
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << internal.size()); ++mask) {
    std::uint64_t sideBits = std::uint64_t(1) << g.s;
    for (std::size_t k = 0; k < internal.size(); ++k)
      if ((mask >> k) & 1) sideBits |= std::uint64_t(1) << internal[k];
    i128 w = 0;
    for (const Arc& a : arcs) {
      bool su = (sideBits >> a.u) & 1, sv = (sideBits >> a.v) & 1;
      if (su != sv) w += a.w;
    }
    if (!found || w < best) {
      found = true;
      best = w;
      bestSides = sideBits;
    } else if (w == best) {
      bestSides &= sideBits;
    }
  }
  out.value = ExtTicks::finite(checked_cast64(best / scale, "oracle value"));
  out.cardinality = static_cast<std::size_t>(best % scale);
  for (const Arc& a : arcs) {
    bool su = (bestSides >> a.u) & 1, sv = (bestSides >> a.v) & 1;
    if (su != sv) out.cutset.push_back(pb.edges[g.finite_edges[a.k]]);
  }
  std::sort(out.cutset.begin(), out.cutset.end());
  return out;
}

// ---------------------------------------------------------------------------
// Line-oriented debug dump for cross-implementation diffing.
// ---------------------------------------------------------------------------
template <class FieldT>
void dump_problem(std::ostream& os, const FlowProblem& pb, const FieldT& field,
                  const CutResult* result = nullptr) {
  EdgeSet cut;
  if (result) cut.insert(result->cutset.begin(), result->cutset.end());
  os << "dim " << pb.dim << "\n";
  os << "vertices " << pb.vertices.size() << "\n";
  std::vector<char> role(pb.vertices.size(), '.');
  for (std::uint32_t v : pb.sources) role[v] = 'S';
  for (std::uint32_t v : pb.sinks) role[v] = 'T';
  for (std::uint32_t v = 0; v < pb.vertices.size(); ++v) {
    os << "v";
    for (int i = 0; i < pb.dim; ++i) os << " " << pb.vertices[v].c[i];
    os << " " << role[v] << "\n";
  }
  os << "edges " << pb.edges.size() << "\n";
  for (const Edge& e : pb.edges) {
    ExtTicks c = field.capacity(e);
    os << "e";
    for (int i = 0; i < pb.dim; ++i) os << " " << e.lower.c[i];
    os << " " << e.axis << " ";
    if (c.is_infinite())
      os << "inf";
    else
      os << c.ticks();
    os << " " << (cut.count(e) ? 1 : 0) << "\n";
  }
  if (result) {
    os << "value ";
    if (result->value.is_infinite())
      os << "inf";
    else
      os << result->value.ticks();
    os << "\ncardinality " << result->cardinality << "\n";
  }
}

}  // namespace latticeflow
