#pragma once

#include <vector>

namespace its {

/// Real roots of a x^2 + b x + c, ascending, duplicates merged.
/// A slightly negative discriminant (relative 1e-12) is read as a double root.
std::vector<double> solve_quadratic(double a, double b, double c);

/// Real roots of a x^3 + b x^2 + c x + d, ascending.
std::vector<double> solve_cubic(double a, double b, double c, double d);

struct QuarticResult {
  std::vector<double> roots;       ///< ascending, merged within 1e-9
  bool resolvent_converged = true; ///< false if the resolvent Newton hit its cap
  bool demoted = false;            ///< leading coefficient negligible; lower degree solved
};

/// g1 x^4 + g2 x^3 + g3 x^2 + g4 x + g5 = 0 through the depressed quartic,
/// its resolvent cubic (largest root by safeguarded Newton) and Ferrari's
/// factorization into two quadratics. Roots are polished on the original
/// polynomial; clustered roots are refined on its derivatives.
QuarticResult solve_quartic_ex(double g1, double g2, double g3, double g4, double g5);

inline std::vector<double> solve_quartic(double g1, double g2, double g3, double g4, double g5) {
  return solve_quartic_ex(g1, g2, g3, g4, g5).roots;
}

/// Horner evaluation, coefficients highest degree first.
double eval_poly(const std::vector<double>& coeffs, double x);

}  // namespace its
