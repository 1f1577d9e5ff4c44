#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>

#include "semikernel/errors.hpp"

namespace semikernel {

// Exact rational arithmetic for the weight vector gamma and all alpha.gamma
// comparisons. Index bookkeeping must never go through floating point.
using Rat = boost::rational<long long>;

inline double toDouble(const Rat& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// Accepts "3", "3/2" and plain decimals like "1.5" (parsed exactly).
Rat parseRational(const std::string& text);

std::string toString(const Rat& r);

} // namespace semikernel
