#pragma once

#include <limits>

namespace lambdaband {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval over the extended reals. Endpoints may be -inf/+inf.
// An empty interval carries no meaningful endpoints.
struct ExtInterval {
  double lo = -kInf;
  double hi = kInf;
  bool empty = false;

  static ExtInterval whole() { return {}; }
  static ExtInterval none() { return {0.0, 0.0, true}; }
  // Returns none() when lo > hi.
  static ExtInterval between(double lo, double hi) {
    if (!(lo <= hi)) return none();
    return {lo, hi, false};
  }
  static ExtInterval below(double hi) { return between(-kInf, hi); }
  static ExtInterval above(double lo) { return between(lo, kInf); }

  bool contains(double x) const { return !empty && lo <= x && x <= hi; }
  bool bounded() const { return !empty && lo > -kInf && hi < kInf; }

  // +inf for unbounded intervals, 0 for empty ones.
  double width() const {
    if (empty) return 0.0;
    return hi - lo;
  }

  ExtInterval intersect(const ExtInterval& other) const {
    if (empty || other.empty) return none();
    return between(lo > other.lo ? lo : other.lo, hi < other.hi ? hi : other.hi);
  }

  friend bool operator==(const ExtInterval& a, const ExtInterval& b) {
    if (a.empty || b.empty) return a.empty == b.empty;
    return a.lo == b.lo && a.hi == b.hi;
  }
};

}  // namespace lambdaband
