#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace parext {

/// Exact rational arithmetic for measure bookkeeping. Doubles are dyadic
/// rationals, so conversion in is exact.
using Rational = boost::multiprecision::cpp_rational;

Rational rational_of(double x);
double to_double(const Rational& r);
std::string to_string(const Rational& r);

}  // namespace parext
