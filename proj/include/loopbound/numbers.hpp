#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace loopbound {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int numerator(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int denominator(const Rat& r) { return boost::multiprecision::denominator(r); }

inline Int floorDiv(const Int& a, const Int& b) {
  Int q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

inline Int ratFloor(const Rat& r) { return floorDiv(numerator(r), denominator(r)); }
inline Int ratCeil(const Rat& r) { return -floorDiv(-numerator(r), denominator(r)); }
inline bool isIntegral(const Rat& r) { return denominator(r) == 1; }

}  // namespace loopbound
