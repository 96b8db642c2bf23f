#pragma once

namespace pfl {

// W(s) = (s^2 - 1)^2 / 4, optionally frozen at W(1 - 2 delta) below 1 - 2 delta.
class Potential {
 public:
  static Potential standard() { return Potential(); }
  // Requires 0 < delta < (1 - 1/sqrt(3)) / 2 so the floor sits where W is convex.
  static Potential modified_floor(double delta);

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;

  bool is_standard() const { return !floored_; }
  double delta() const { return delta_; }
  double floor_point() const { return 1.0 - 2.0 * delta_; }

 private:
  Potential() = default;
  bool floored_ = false;
  double delta_ = 0.0;
};

// Largest admissible delta for the floored potential.
double max_floor_delta();

}  // namespace pfl
