#include "its/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace its {
namespace {

constexpr double kMergeTolerance = 1e-9;
constexpr double kNegligible = 1e-12;
constexpr int kResolventIterations = 64;
constexpr int kPolishSteps = 16;
constexpr double kEpsilon = 2.220446049250313e-16;

double derivative_eval(const std::vector<double>& p, int order, double x) {
  const int n = static_cast<int>(p.size()) - 1;
  double acc = 0.0;
  for (int i = 0; i <= n - order; ++i) {
    double c = p[i];
    const int power = n - i;
    for (int k = 0; k < order; ++k) c *= power - k;
    acc = acc * x + c;
  }
  return acc;
}

// Bound on |p(x)| rounding error, for accepting refined roots.
double magnitude_eval(const std::vector<double>& p, double x) {
  double acc = 0.0;
  for (double c : p) acc = acc * std::abs(x) + std::abs(c);
  return acc;
}

double newton_polish(const std::vector<double>& p, double x, int steps) {
  for (int i = 0; i < steps; ++i) {
    const double d = derivative_eval(p, 1, x);
    if (d == 0.0) break;
    const double next = x - derivative_eval(p, 0, x) / d;
    if (!std::isfinite(next)) break;
    x = next;
  }
  return x;
}

// Near a multiple root the simple-root Newton stalls at eps^(1/m); the
// multiple root is a simple root of p' or p''.
double refine_multiple(const std::vector<double>& p, double x) {
  const double scale = std::max(1.0, std::abs(x));
  for (int order = std::min<int>(2, static_cast<int>(p.size()) - 2); order >= 1; --order) {
    double y = x;
    bool ok = true;
    for (int i = 0; i < 40; ++i) {
      const double d = derivative_eval(p, order + 1, y);
      if (d == 0.0) {
        ok = false;
        break;
      }
      const double step = derivative_eval(p, order, y) / d;
      y -= step;
      if (!std::isfinite(y)) {
        ok = false;
        break;
      }
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(y))) break;
    }
    if (!ok || std::abs(y - x) > 1e-3 * scale) continue;
    if (std::abs(derivative_eval(p, 0, y)) <= 8.0 * kEpsilon * magnitude_eval(p, y)) return y;
  }
  return x;
}

std::vector<double> finish(const std::vector<double>& p, std::vector<double> roots,
                           const std::vector<bool>& tentative) {
  std::vector<double> kept;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    double r = newton_polish(p, roots[i], tentative[i] ? kPolishSteps : 2);
    r = refine_multiple(p, r);
    // Cancellation in the closed form can produce non-roots; keep only
    // candidates that polished into a genuine root.
    const double tol = tentative[i] ? 1e-12 : 1e-10;
    if (std::abs(derivative_eval(p, 0, r)) > tol * magnitude_eval(p, r)) {
      if (tentative[i]) continue;
      r = newton_polish(p, r, kPolishSteps);
      if (std::abs(derivative_eval(p, 0, r)) > tol * magnitude_eval(p, r)) continue;
    }
    kept.push_back(r);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<double> merged;
  for (double r : kept) {
    if (!merged.empty() && std::abs(r - merged.back()) <= kMergeTolerance * std::max(1.0, std::abs(r))) {
      // Keep whichever has the smaller residual.
      if (std::abs(derivative_eval(p, 0, r)) < std::abs(derivative_eval(p, 0, merged.back()))) merged.back() = r;
      continue;
    }
    merged.push_back(r);
  }
  return merged;
}

struct QuadRoots {
  std::vector<double> roots;
  bool tentative = false;
};

QuadRoots quadratic_raw(double a, double b, double c) {
  QuadRoots out;
  if (a == 0.0) {
    if (b != 0.0) out.roots.push_back(-c / b);
    return out;
  }
  const double disc = b * b - 4.0 * a * c;
  const double scale = b * b + std::abs(4.0 * a * c);
  if (disc < 0.0) {
    if (disc >= -kNegligible * scale) {
      out.roots.push_back(-b / (2.0 * a));
      out.tentative = true;
    }
    return out;
  }
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  if (q == 0.0) {
    out.roots.push_back(0.0);
    return out;
  }
  out.roots.push_back(q / a);
  out.roots.push_back(c / q);
  return out;
}

double max_abs(std::initializer_list<double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Fujiwara bound on the roots of x^3 + a x^2 + b x + c.
double cubic_root_bound(double a, double b, double c) {
  return 2.0 * std::max({std::abs(a), std::sqrt(std::abs(b)), std::cbrt(std::abs(0.5 * c))});
}

// Largest real root of the monic cubic x^3 + a x^2 + b x + c on [lo, hi]
// where p(lo) <= 0 < p(hi); Newton with bisection safeguard.
double bracketed_newton(double a, double b, double c, double lo, double hi, bool* converged) {
  const auto f = [&](double x) { return ((x + a) * x + b) * x + c; };
  const auto df = [&](double x) { return (3.0 * x + 2.0 * a) * x + b; };
  double x = hi;
  *converged = false;
  for (int i = 0; i < kResolventIterations; ++i) {
    const double fx = f(x);
    const double ax = std::abs(x);
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                         (((ax + std::abs(a)) * ax + std::abs(b)) * ax + std::abs(c));
    if (std::abs(fx) <= noise) {
      *converged = true;
      return x;
    }
    if (fx > 0.0) hi = x; else lo = x;
    const double d = df(x);
    double next = d != 0.0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) {
      *converged = true;
      return next;
    }
    x = next;
  }
  return x;
}

// Divides out (x - r). Small roots deflate from the leading coefficient,
// large ones from the constant term.
std::vector<double> deflate(const std::vector<double>& p, double r) {
  const std::size_t n = p.size() - 1;
  std::vector<double> q(n);
  if (std::abs(r) <= 1.0) {
    q[0] = p[0];
    for (std::size_t i = 1; i < n; ++i) q[i] = p[i] + r * q[i - 1];
  } else {
    q[n - 1] = -p[n] / r;
    for (std::size_t i = n - 1; i-- > 0;) q[i] = (q[i + 1] - p[i + 1]) / r;
  }
  return q;
}

}  // namespace

double eval_poly(const std::vector<double>& coeffs, double x) { return derivative_eval(coeffs, 0, x); }

std::vector<double> solve_quadratic(double a, double b, double c) {
  const double scale = max_abs({a, b, c});
  if (scale == 0.0) return {};
  if (std::abs(a) <= kNegligible * scale) {
    if (std::abs(b) <= kNegligible * scale) return {};
    return {-c / b};
  }
  const QuadRoots raw = quadratic_raw(a, b, c);
  return finish({a, b, c}, raw.roots, std::vector<bool>(raw.roots.size(), raw.tentative));
}

std::vector<double> solve_cubic(double a, double b, double c, double d) {
  const double scale = max_abs({a, b, c, d});
  if (scale == 0.0) return {};
  if (std::abs(a) <= kNegligible * scale) return solve_quadratic(b, c, d);
  const double p = b / a;
  const double q = c / a;
  const double r = d / a;
  const double bound = cubic_root_bound(p, q, r) + 1e-300;
  bool converged = false;
  const double x0 = bracketed_newton(p, q, r, -bound, bound, &converged);
  // Deflate: x^3 + p x^2 + q x + r = (x - x0)(x^2 + e x + f).
  const double e = p + x0;
  const double f = q + x0 * e;
  const QuadRoots rest = quadratic_raw(1.0, e, f);
  std::vector<double> roots{x0};
  std::vector<bool> tentative{false};
  for (double x : rest.roots) {
    roots.push_back(x);
    tentative.push_back(rest.tentative);
  }
  return finish({1.0, p, q, r}, roots, tentative);
}

namespace {

struct Candidates {
  std::vector<double> roots;
  std::vector<bool> tentative;
  bool converged = true;
};

// Ferrari on the monic quartic x^4 + b x^3 + c x^2 + d x + e.
Candidates ferrari(double b, double c, double d, double e) {
  Candidates out;
  // x = u - b/4 gives u^4 + w u^2 + m u + n.
  const double shift = b / 4.0;
  const double w = c - 6.0 * shift * shift;
  const double m = d - 2.0 * c * shift + 8.0 * shift * shift * shift;
  const double n = e - d * shift + c * shift * shift - 3.0 * shift * shift * shift * shift;

  const auto add = [&](const QuadRoots& q) {
    for (double u : q.roots) {
      out.roots.push_back(u - shift);
      out.tentative.push_back(q.tentative);
    }
  };
  const double depressed_scale = 1.0 + max_abs({w, std::sqrt(std::abs(n))});
  if (std::abs(m) <= kNegligible * depressed_scale * depressed_scale * depressed_scale) {
    // Biquadratic: z = u^2.
    const QuadRoots z = quadratic_raw(1.0, w, n);
    for (double zr : z.roots) {
      if (zr > 0.0) {
        add({{std::sqrt(zr), -std::sqrt(zr)}, z.tentative});
      } else if (zr >= -kNegligible * depressed_scale) {
        add({{0.0}, z.tentative || zr < 0.0});
      }
    }
    return out;
  }
  // Resolvent y^3 - (w/2) y^2 - n y + (w n / 2 - m^2 / 8); its value at
  // y = w/2 is -m^2/8 < 0, so a root with 2y - w > 0 exists above w/2.
  const double ra = -0.5 * w;
  const double rb = -n;
  const double rc = 0.5 * w * n - m * m / 8.0;
  const double lo = 0.5 * w;
  const double hi = std::max(lo, cubic_root_bound(ra, rb, rc)) * (1.0 + 1e-12) + 1e-300;
  const double y = bracketed_newton(ra, rb, rc, lo, hi, &out.converged);
  const double s2 = 2.0 * y - w;
  if (!(s2 > 0.0)) {
    out.converged = false;
    return out;
  }
  // (u^2 + y)^2 = s2 (u - m / (2 s2))^2
  const double s = std::sqrt(s2);
  const double k = m / (2.0 * s);
  add(quadratic_raw(1.0, -s, y + k));
  add(quadratic_raw(1.0, s, y - k));
  return out;
}

}  // namespace

QuarticResult solve_quartic_ex(double g1, double g2, double g3, double g4, double g5) {
  QuarticResult result;
  const double scale = max_abs({g1, g2, g3, g4, g5});
  if (scale == 0.0) return result;
  if (std::abs(g1) <= kNegligible * scale) {
    result.demoted = true;
    result.roots = solve_cubic(g2, g3, g4, g5);
    return result;
  }
  const std::vector<double> poly{1.0, g2 / g1, g3 / g1, g4 / g1, g5 / g1};
  Candidates all = ferrari(poly[1], poly[2], poly[3], poly[4]);
  result.resolvent_converged = all.converged;
  // The shift b/4 cancels small roots when roots are widely spread; the
  // reversed polynomial (x -> 1/x) recovers them.
  if (std::abs(g5) > kNegligible * scale) {
    const Candidates rev = ferrari(g4 / g5, g3 / g5, g2 / g5, g1 / g5);
    for (std::size_t i = 0; i < rev.roots.size(); ++i) {
      if (rev.roots[i] == 0.0) continue;
      all.roots.push_back(1.0 / rev.roots[i]);
      all.tentative.push_back(true);
    }
  } else {
    all.roots.push_back(0.0);
    all.tentative.push_back(true);
  }
  result.roots = finish(poly, all.roots, all.tentative);
  if (result.roots.size() < 4 && !result.roots.empty()) {
    // Deflate by the validated roots and solve what remains.
    std::vector<double> q = poly;
    for (double r : result.roots) q = deflate(q, r);
    std::vector<double> rest;
    if (q.size() == 4) rest = solve_cubic(q[0], q[1], q[2], q[3]);
    if (q.size() == 3) rest = solve_quadratic(q[0], q[1], q[2]);
    if (q.size() == 2 && q[0] != 0.0) rest = {-q[1] / q[0]};
    if (!rest.empty()) {
      std::vector<double> merged = result.roots;
      merged.insert(merged.end(), rest.begin(), rest.end());
      std::vector<bool> flags(result.roots.size(), false);
      flags.resize(merged.size(), true);
      result.roots = finish(poly, merged, flags);
    }
  }
  return result;
}

}  // namespace its
