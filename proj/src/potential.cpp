#include "pfl/potential.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pfl {

namespace {
double w(double s) {
  const double q = s * s - 1.0;
  return 0.25 * q * q;
}
}  // namespace

double max_floor_delta() { return 0.5 * (1.0 - 1.0 / std::sqrt(3.0)); }

Potential Potential::modified_floor(double delta) {
  if (!(delta > 0.0) || !(delta < max_floor_delta()))
    throw std::invalid_argument("floor delta must lie in (0, " + std::to_string(max_floor_delta()) +
                                ") so that W'' > 0 at the floor");
  Potential p;
  p.floored_ = true;
  p.delta_ = delta;
  return p;
}

double Potential::value(double s) const {
  if (floored_ && s < floor_point()) return w(floor_point());
  return w(s);
}

double Potential::derivative(double s) const {
  if (floored_ && s < floor_point()) return 0.0;
  return s * s * s - s;
}

double Potential::second_derivative(double s) const {
  if (floored_ && s < floor_point()) return 0.0;
  return 3.0 * s * s - 1.0;
}

}  // namespace pfl
