#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace latticeflow {

using i128 = __int128;
using u128 = unsigned __int128;

// Thrown when an exact integer computation would leave its representable
// range. Nothing in this library is allowed to wrap around silently.
struct OverflowError : std::runtime_error {
  explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

inline std::int64_t checked_cast64(i128 v, const char* ctx) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw OverflowError(std::string("64-bit overflow in ") + ctx);
  }
  return static_cast<std::int64_t>(v);
}

// ---------------------------------------------------------------------------
// Frac: exact nonnegative rational, reduced, with int64 numerator/denominator.
// Used for probability masses and rational parameters (heights, thresholds).
// ---------------------------------------------------------------------------
class Frac {
 public:
  constexpr Frac() : num_(0), den_(1) {}
  Frac(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ <= 0) throw std::domain_error("Frac: nonpositive denominator");
    if (num_ < 0) throw std::domain_error("Frac: negative value");
    reduce();
  }
  static Frac from_int(std::int64_t v) { return Frac(v, 1); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend bool operator==(const Frac& a, const Frac& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Frac& a, const Frac& b) { return !(a == b); }
  friend bool operator<(const Frac& a, const Frac& b) {
    return static_cast<i128>(a.num_) * b.den_ < static_cast<i128>(b.num_) * a.den_;
  }
  friend bool operator<=(const Frac& a, const Frac& b) { return !(b < a); }
  friend bool operator>(const Frac& a, const Frac& b) { return b < a; }
  friend bool operator>=(const Frac& a, const Frac& b) { return !(a < b); }

  friend Frac operator+(const Frac& a, const Frac& b) {
    i128 n = static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_;
    i128 d = static_cast<i128>(a.den_) * b.den_;
    return make_reduced(n, d);
  }
  friend Frac operator-(const Frac& a, const Frac& b) {
    i128 n = static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_;
    if (n < 0) throw std::domain_error("Frac: negative difference");
    i128 d = static_cast<i128>(a.den_) * b.den_;
    return make_reduced(n, d);
  }
  friend Frac operator*(const Frac& a, const Frac& b) {
    i128 n = static_cast<i128>(a.num_) * b.num_;
    i128 d = static_cast<i128>(a.den_) * b.den_;
    return make_reduced(n, d);
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a < 0 ? -a : a;
  }
  static Frac make_reduced(i128 n, i128 d) {
    i128 g = gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    Frac f;
    f.num_ = checked_cast64(n, "Frac numerator");
    f.den_ = checked_cast64(d, "Frac denominator");
    f.check_bounds();
    return f;
  }
  void reduce() {
    std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    check_bounds();
  }
  void check_bounds() const {
    constexpr std::int64_t kMax = std::int64_t(1) << 62;
    if (num_ > kMax || den_ > kMax) throw OverflowError("Frac bounds");
  }

  std::int64_t num_;
  std::int64_t den_;
};

// Parses "3", "3/10" or a decimal literal like "0.25" exactly.
inline Frac parse_frac(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::int64_t n = std::stoll(s.substr(0, slash));
    std::int64_t d = std::stoll(s.substr(slash + 1));
    return Frac(n, d);
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Frac(std::stoll(s), 1);
  std::string whole = s.substr(0, dot);
  std::string fracpart = s.substr(dot + 1);
  if (fracpart.size() > 18) throw std::invalid_argument("decimal literal too long: " + s);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < fracpart.size(); ++i) den *= 10;
  std::int64_t n = (whole.empty() ? 0 : std::stoll(whole));
  i128 num = static_cast<i128>(n) * den + (fracpart.empty() ? 0 : std::stoll(fracpart));
  return Frac(checked_cast64(num, "parse_frac"), den);
}

// ---------------------------------------------------------------------------
// ExtTicks: extended nonnegative capacity value.  Finite values are integer
// counts of 1/Q for the distribution's quantum Q; +infinity is a sentinel
// ordered above every finite value.  Arithmetic on the sentinel is forbidden
// except comparison and infinity-absorbing sums.
// ---------------------------------------------------------------------------
class ExtTicks {
 public:
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

  constexpr ExtTicks() : t_(0) {}
  static constexpr ExtTicks finite(std::int64_t ticks) {
    ExtTicks v;
    v.t_ = ticks;
    return v;
  }
  static constexpr ExtTicks infinity() {
    ExtTicks v;
    v.t_ = kInf;
    return v;
  }

  bool is_infinite() const { return t_ == kInf; }
  std::int64_t ticks() const {
    if (is_infinite()) throw std::domain_error("ticks() on infinite value");
    return t_;
  }
  std::int64_t raw() const { return t_; }

  friend bool operator==(ExtTicks a, ExtTicks b) { return a.t_ == b.t_; }
  friend bool operator!=(ExtTicks a, ExtTicks b) { return a.t_ != b.t_; }
  friend bool operator<(ExtTicks a, ExtTicks b) { return a.t_ < b.t_; }
  friend bool operator<=(ExtTicks a, ExtTicks b) { return a.t_ <= b.t_; }
  friend bool operator>(ExtTicks a, ExtTicks b) { return a.t_ > b.t_; }
  friend bool operator>=(ExtTicks a, ExtTicks b) { return a.t_ >= b.t_; }

 private:
  std::int64_t t_;
};

// Infinity-absorbing sum of capacities, exact, guarded against overflow.
class ExtSum {
 public:
  ExtSum() : inf_(false), acc_(0) {}
  void add(ExtTicks v) {
    if (v.is_infinite()) {
      inf_ = true;
      return;
    }
    acc_ += v.ticks();
    if (acc_ < 0) throw OverflowError("capacity sum");
  }
  bool is_infinite() const { return inf_; }
  i128 total() const { return acc_; }
  ExtTicks to_ext() const {
    if (inf_) return ExtTicks::infinity();
    return ExtTicks::finite(checked_cast64(acc_, "capacity sum"));
  }

 private:
  bool inf_;
  i128 acc_;
};

// ---------------------------------------------------------------------------
// Minimal unsigned big integer: only what exact grid roots need.
// ---------------------------------------------------------------------------
class BigU {
 public:
  BigU() : limbs_{0} {}
  explicit BigU(std::uint64_t v) : limbs_{v} {}

  void mul_u64(std::uint64_t m) {
    u128 carry = 0;
    for (auto& limb : limbs_) {
      u128 p = static_cast<u128>(limb) * m + carry;
      limb = static_cast<std::uint64_t>(p);
      carry = p >> 64;
    }
    while (carry != 0) {
      limbs_.push_back(static_cast<std::uint64_t>(carry));
      carry >>= 64;
    }
  }

  static BigU pow(std::uint64_t base, unsigned exp) {
    BigU r(1);
    for (unsigned i = 0; i < exp; ++i) r.mul_u64(base);
    return r;
  }

  // -1, 0, 1 for <, ==, >
  int cmp(const BigU& o) const {
    std::size_t n = std::max(limbs_.size(), o.limbs_.size());
    for (std::size_t i = n; i-- > 0;) {
      std::uint64_t a = i < limbs_.size() ? limbs_[i] : 0;
      std::uint64_t b = i < o.limbs_.size() ? o.limbs_[i] : 0;
      if (a != b) return a < b ? -1 : 1;
    }
    return 0;
  }

 private:
  std::vector<std::uint64_t> limbs_;
};

// Smallest k >= 0 with k^r >= n * q^r; i.e. the numerator of the grid ceiling
// of n^(1/r) at quantum q.  Exact for any inputs.
inline std::int64_t ceil_root_scaled(std::uint64_t n, std::uint64_t q, unsigned r) {
  if (r == 0) throw std::domain_error("ceil_root_scaled: r == 0");
  if (n == 0) return 0;
  BigU target = BigU::pow(q, r);
  target.mul_u64(n);
  long double est = powl(static_cast<long double>(n), 1.0L / r) * q;
  std::int64_t k = static_cast<std::int64_t>(est) - 2;
  if (k < 0) k = 0;
  while (BigU::pow(static_cast<std::uint64_t>(k), r).cmp(target) < 0) ++k;
  return k;
}

// ---------------------------------------------------------------------------
// Uniform values carried as raw 64-bit counters.  The uniform represented by
// counter k is u = (2k+1) / 2^65, always strictly inside (0,1); comparisons
// against exact rationals are done in 128-bit integers.
// ---------------------------------------------------------------------------
// true iff u <= n/d
inline bool uniform_le(std::uint64_t k, const Frac& f) {
  u128 lhs = ((static_cast<u128>(k) << 1) | 1u) * static_cast<u128>(f.den());
  u128 rhs = static_cast<u128>(f.num()) << 65;
  return lhs <= rhs;
}

}  // namespace latticeflow
