#include "parext/rational.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace parext {

Rational rational_of(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_of: non-finite value");
  return Rational(x);  // exact: doubles are dyadic rationals
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

}  // namespace parext
