#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "latticeflow/numeric.hpp"

namespace latticeflow {

inline constexpr std::int64_t kDefaultQuantum = std::int64_t(1) << 20;

// A capacity law on [0, +infinity].  Finite values live on the 1/Q grid; the
// mass at each value is an exact rational.  Continuous laws enter only
// through quantized quantile tables, which reduce to the same atom form.
class Distribution {
 public:
  struct Atom {
    ExtTicks value;
    Frac mass;
  };

  static Distribution from_atoms(std::vector<Atom> atoms, std::int64_t quantum = kDefaultQuantum) {
    Distribution d;
    d.quantum_ = quantum;
    if (quantum <= 0) throw std::domain_error("quantum must be positive");
    std::map<std::int64_t, Frac> merged;
    for (const auto& a : atoms) {
      if (a.mass.is_zero()) continue;
      auto [it, fresh] = merged.emplace(a.value.raw(), a.mass);
      if (!fresh) it->second = it->second + a.mass;
    }
    Frac total;
    for (auto& [v, m] : merged) {
      d.atoms_.push_back({ExtTicks::finite(v), m});
      total = total + m;
    }
    if (total != Frac(1, 1)) throw std::domain_error("atom masses must sum to 1 exactly");
    d.build_cdf();
    return d;
  }

  // Point mass at value/quantum ticks.
  static Distribution delta_ticks(std::int64_t ticks, std::int64_t quantum = kDefaultQuantum) {
    return from_atoms({{ExtTicks::finite(ticks), Frac(1, 1)}}, quantum);
  }
  static Distribution delta_int(std::int64_t value, std::int64_t quantum = kDefaultQuantum) {
    return delta_ticks(value * quantum, quantum);
  }

  std::int64_t quantum() const { return quantum_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  ExtTicks value_from_frac(const Frac& v) const {
    i128 scaled = static_cast<i128>(v.num()) * quantum_;
    if (scaled % v.den() != 0)
      throw std::domain_error("value " + v.str() + " is not on the 1/" +
                              std::to_string(quantum_) + " grid");
    return ExtTicks::finite(checked_cast64(scaled / v.den(), "value ticks"));
  }

  // P(X >= t)
  Frac survival(ExtTicks t) const {
    Frac s;
    for (const auto& a : atoms_)
      if (a.value >= t) s = s + a.mass;
    return s;
  }
  Frac infinite_mass() const { return survival(ExtTicks::infinity()); }

  // inf{ t : P(X <= t) >= u } for an exact rational u in (0,1).
  ExtTicks quantile(const Frac& u) const {
    if (u.is_zero() || u >= Frac(1, 1)) throw std::domain_error("quantile: u outside (0,1)");
    std::size_t lo = 0, hi = atoms_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cdf_[mid] >= u)
        hi = mid;
      else
        lo = mid + 1;
    }
    return atoms_[lo].value;
  }

  // Same pseudo-inverse for the counter-based uniform u = (2k+1)/2^65.
  ExtTicks quantile_u64(std::uint64_t k) const {
    std::size_t lo = 0, hi = atoms_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (uniform_le(k, cdf_[mid]))
        hi = mid;
      else
        lo = mid + 1;
    }
    return atoms_[lo].value;
  }

 private:
  void build_cdf() {
    if (atoms_.empty()) throw std::domain_error("distribution with no mass");
    cdf_.clear();
    Frac acc;
    for (const auto& a : atoms_) {
      acc = acc + a.mass;
      cdf_.push_back(acc);
    }
  }

  std::int64_t quantum_ = kDefaultQuantum;
  std::vector<Atom> atoms_;  // sorted by value, strictly positive masses
  std::vector<Frac> cdf_;

  friend Distribution truncate(const Distribution&, const Frac&);
  friend Distribution shift(const Distribution&, const Frac&);
};

// G^K: the law of min(t_G(e), K).  Mass of [K, +inf] collapses onto K.
inline Distribution truncate(const Distribution& dist, const Frac& K) {
  if (K.is_zero()) throw std::domain_error("truncate: K must be positive");
  ExtTicks kt = dist.value_from_frac(K);
  std::vector<Distribution::Atom> out;
  Frac tail;
  for (const auto& a : dist.atoms()) {
    if (a.value < kt)
      out.push_back(a);
    else
      tail = tail + a.mass;
  }
  if (!tail.is_zero()) out.push_back({kt, tail});
  return Distribution::from_atoms(std::move(out), dist.quantum());
}

// Law of t_G(e) + eps; the infinity atom is unchanged.
inline Distribution shift(const Distribution& dist, const Frac& eps) {
  if (eps.is_zero()) throw std::domain_error("shift: eps must be positive");
  ExtTicks et = dist.value_from_frac(eps);
  std::vector<Distribution::Atom> out;
  for (const auto& a : dist.atoms()) {
    if (a.value.is_infinite())
      out.push_back(a);
    else
      out.push_back({ExtTicks::finite(checked_cast64(
                         static_cast<i128>(a.value.ticks()) + et.ticks(), "shift")),
                     a.mass});
  }
  return Distribution::from_atoms(std::move(out), dist.quantum());
}

namespace detail {
inline std::vector<ExtTicks> union_values(const Distribution& a, const Distribution& b) {
  std::vector<ExtTicks> vals;
  for (const auto& x : a.atoms()) vals.push_back(x.value);
  for (const auto& x : b.atoms()) vals.push_back(x.value);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return vals;
}
inline void check_same_quantum(const Distribution& a, const Distribution& b) {
  if (a.quantum() != b.quantum()) throw std::domain_error("mismatched quantum");
}
}  // namespace detail

// g <= h in the stochastic order: survival of g pointwise at most survival of h.
inline bool dominates(const Distribution& h, const Distribution& g) {
  detail::check_same_quantum(h, g);
  for (ExtTicks v : detail::union_values(h, g))
    if (g.survival(v) > h.survival(v)) return false;
  return true;
}

struct EnvelopePair {
  Distribution lower;
  Distribution upper;
};

// lower/upper have survival min/max of the two inputs; lower <= d1,d2 <= upper.
inline EnvelopePair envelopes(const Distribution& d1, const Distribution& d2) {
  detail::check_same_quantum(d1, d2);
  std::vector<ExtTicks> vals = detail::union_values(d1, d2);
  auto build = [&](bool take_min) {
    std::vector<Distribution::Atom> atoms;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      Frac s1 = d1.survival(vals[i]);
      Frac s2 = d2.survival(vals[i]);
      Frac here = take_min ? std::min(s1, s2) : std::max(s1, s2);
      Frac next;  // survival just above vals[i] equals survival at next atom
      if (i + 1 < vals.size()) {
        Frac n1 = d1.survival(vals[i + 1]);
        Frac n2 = d2.survival(vals[i + 1]);
        next = take_min ? std::min(n1, n2) : std::max(n1, n2);
      }
      if (here > next) atoms.push_back({vals[i], here - next});
    }
    return Distribution::from_atoms(std::move(atoms), d1.quantum());
  };
  return {build(true), build(false)};
}

// ---------------------------------------------------------------------------
// Text forms.  An atom list reads "value:mass,value:mass,..." with values and
// masses as decimal or a/b rationals and infinity spelled "inf".  A quantile
// table file has two whitespace-separated columns (cumulative probability,
// value); consecutive differences become the masses.
// ---------------------------------------------------------------------------
inline ExtTicks parse_value_ticks(const std::string& s, std::int64_t quantum) {
  if (s == "inf" || s == "+inf" || s == "infinity") return ExtTicks::infinity();
  Frac v = parse_frac(s);
  i128 scaled = static_cast<i128>(v.num()) * quantum;
  if (scaled % v.den() != 0)
    throw std::domain_error("value " + s + " is not on the 1/" + std::to_string(quantum) +
                            " grid");
  return ExtTicks::finite(checked_cast64(scaled / v.den(), "value ticks"));
}

inline std::vector<Distribution::Atom> parse_atom_list(const std::string& text,
                                                       std::int64_t quantum) {
  std::vector<Distribution::Atom> atoms;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("atom literal needs value:mass, got '" + item + "'");
    auto strip = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    std::string vs = strip(item.substr(0, colon));
    std::string ms = strip(item.substr(colon + 1));
    atoms.push_back({parse_value_ticks(vs, quantum), parse_frac(ms)});
  }
  return atoms;
}

inline std::vector<Distribution::Atom> load_quantile_table(std::istream& in,
                                                           std::int64_t quantum) {
  std::vector<Distribution::Atom> atoms;
  Frac prev;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream ls(line);
    std::string us, vs;
    if (!(ls >> us >> vs)) continue;
    Frac u = parse_frac(us);
    if (u <= prev) throw std::domain_error("quantile table probabilities must increase");
    atoms.push_back({parse_value_ticks(vs, quantum), u - prev});
    prev = u;
  }
  return atoms;
}

inline Distribution parse_distribution(const std::string& atom_text,
                                       const std::string& table_path = {},
                                       std::int64_t quantum = kDefaultQuantum) {
  std::vector<Distribution::Atom> atoms;
  if (!atom_text.empty()) atoms = parse_atom_list(atom_text, quantum);
  if (!table_path.empty()) {
    std::ifstream f(table_path);
    if (!f) throw std::runtime_error("cannot open quantile table " + table_path);
    auto t = load_quantile_table(f, quantum);
    atoms.insert(atoms.end(), t.begin(), t.end());
  }
  return Distribution::from_atoms(std::move(atoms), quantum);
}

inline std::string distribution_literal(const Distribution& d) {
  std::string out;
  for (const auto& a : d.atoms()) {
    if (!out.empty()) out += ",";
    if (a.value.is_infinite()) {
      out += "inf";
    } else {
      Frac v(a.value.ticks(), d.quantum());
      out += v.str();
    }
    out += ":" + a.mass.str();
  }
  return out;
}

}  // namespace latticeflow
