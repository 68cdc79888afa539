#include "harqrate/special_math.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace harqrate {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require(bool ok, const char* message) {
  if (!ok) throw std::domain_error(message);
}

}  // namespace

double q_function(double x) {
  require(std::isfinite(x), "q_function: argument must be finite");
  return 0.5 * std::erfc(x / kSqrt2);
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

namespace {

// Acklam's rational approximation to the lower-tail normal quantile
// Phi^{-1}(p) for p in (0, 0.02425]; returns a negative value.
double acklam_lower_tail(double p) {
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.980658419828620e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double q = std::sqrt(-2.0 * std::log(p));
  return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double q_inverse(double p) {
  require(p > 0.0 && p < 1.0, "q_inverse: argument must be in (0,1)");

  // Acklam's rational approximation, branched on p directly so neither tail
  // loses precision to a 1-p subtraction, then two Newton refinements on
  // q_function itself.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};

  double x;
  if (p < 0.02425) {
    x = -acklam_lower_tail(p);
  } else if (p <= 0.97575) {
    // Q^{-1}(p) = Phi^{-1}(1-p), central rational form at q = 0.5 - p.
    const double q = 0.5 - p;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    x = acklam_lower_tail(1.0 - p);  // exact subtraction for p >= 0.5
  }

  // Newton on Q(x) = p; dQ/dx = -phi(x).
  for (int iter = 0; iter < 2; ++iter) {
    const double err = q_function(x) - p;
    x += err / normal_pdf(x);
  }
  return x;
}

double q_tail_integral(double q) {
  return normal_pdf(q) - q * q_function(q);
}

namespace {

// Series for E1, converges quickly for x <= 1.
double e1_series(double x) {
  double sum = 0.0;
  double term = 1.0;
  for (int n = 1; n < 64; ++n) {
    term *= -x / n;
    const double add = -term / n;
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return -kEulerGamma - std::log(x) + sum;
}

// Modified Lentz continued fraction for e^x E1(x), reliable for x > 1:
//   e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- 9/(x+7- ...))))
double e1_continued_fraction_scaled(double x) {
  const double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 200; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

double exp_scaled_e1(double x) {
  require(x > 0.0, "exp_scaled_e1: argument must be positive");
  if (x <= 1.0) return std::exp(x) * e1_series(x);
  return e1_continued_fraction_scaled(x);
}

double exp_integral_e1(double x) {
  require(x > 0.0, "exp_integral_e1: argument must be positive");
  if (x <= 1.0) return e1_series(x);
  return std::exp(-x) * e1_continued_fraction_scaled(x);
}

double erlang_cdf(double t, int k) {
  require(t >= 0.0 && std::isfinite(t), "erlang_cdf: t must be nonnegative");
  require(k >= 1, "erlang_cdf: k must be a positive integer");
  if (t == 0.0) return 0.0;
  // 1 - e^{-t} sum_{j=0}^{k-1} t^j/j!, with terms built by recurrence.
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < k; ++j) {
    term *= t / j;
    sum += term;
  }
  const double tail = std::exp(-t) * sum;
  return tail >= 1.0 ? 0.0 : 1.0 - tail;
}

double erlang_quantile(double p, int k) {
  require(p > 0.0 && p < 1.0, "erlang_quantile: argument must be in (0,1)");
  require(k >= 1, "erlang_quantile: k must be a positive integer");
  // Bracket then bisect to full argument resolution; the CDF is strictly
  // increasing on (0, inf).
  double lo = 0.0;
  double hi = k + 10.0 * std::sqrt(static_cast<double>(k)) + 10.0;
  while (erlang_cdf(hi, k) < p) hi *= 2.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-14 * std::max(1.0, lo);
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    (erlang_cdf(mid, k) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Laguerre functions l_j(x) = L_j(x) e^{-x/2} via the three-term recurrence;
// bounded by 1 on [0, inf), so no overflow at any order.  Returns
// (l_{n-1}(x), l_n(x)).
std::pair<double, double> scaled_laguerre(double x, int n) {
  double p0 = std::exp(-0.5 * x);
  if (n == 0) return {0.0, p0};
  double p1 = (1.0 - x) * p0;
  for (int j = 1; j < n; ++j) {
    const double next = ((2.0 * j + 1.0 - x) * p1 - j * p0) / (j + 1.0);
    p0 = p1;
    p1 = next;
  }
  return {p0, p1};
}

}  // namespace

QuadratureRule QuadratureRule::gauss_laguerre(int n) {
  if (n < 1) throw std::domain_error("gauss_laguerre: order must be >= 1");

  // Nodes are the eigenvalues of the Jacobi matrix (diag 2i+1, offdiag i).
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) diag[i] = 2.0 * i + 1.0;
  for (int i = 0; i + 1 < n; ++i) sub[i] = static_cast<double>(i + 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  Eigen::ArrayXd x = solver.eigenvalues().array();

  // Two Newton steps sharpen the eigenvalues to machine-accurate roots of
  // L_n; the e^{-x/2} scaling cancels in the Newton ratio.
  for (int step = 0; step < 2; ++step) {
    for (int i = 0; i < n; ++i) {
      const auto [lm, ln] = scaled_laguerre(x[i], n);
      const double dln = n * (ln - lm) / x[i];
      x[i] -= ln / dln;
    }
  }

  // w_i = x_i / ((n+1)^2 L_{n+1}(x_i)^2) = x_i e^{-x_i} / ((n+1)^2 l_{n+1}^2)
  // in terms of the scaled functions.
  Eigen::ArrayXd w(n);
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    const auto [ln, lnp1] = scaled_laguerre(x[i], n + 1);
    (void)ln;
    const double wi = x[i] * std::exp(-x[i]) /
                      (static_cast<double>(n + 1) * (n + 1) * lnp1 * lnp1);
    if (wi > 0.0) {
      x[kept] = x[i];
      w[kept] = wi;
      ++kept;
    }
  }

  QuadratureRule rule;
  rule.kind = QuadratureKind::gauss_laguerre;
  rule.nodes = x.head(kept);
  rule.weights = w.head(kept);
  // Enforce the exact zeroth moment, int e^{-x} dx = 1.
  rule.weights /= rule.weights.sum();
  return rule;
}

QuadratureRule QuadratureRule::adaptive_simpson(double tolerance,
                                                double upper_limit) {
  QuadratureRule rule;
  rule.kind = QuadratureKind::adaptive_simpson;
  rule.tolerance = tolerance;
  rule.upper_limit = upper_limit;
  return rule;
}

namespace detail {

namespace {

double simpson_step(const std::function<double(double)>& f, double a,
                    double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 60);
}

}  // namespace detail

double integrate_expweighted(const std::function<double(double)>& f,
                             const QuadratureRule& rule) {
  if (rule.kind == QuadratureKind::gauss_laguerre) {
    double sum = 0.0;
    for (int i = rule.size() - 1; i >= 0; --i) {  // small terms first
      const double fi = f(rule.nodes[i]);
      if (!std::isfinite(fi)) {
        throw EvaluationError("integrate_expweighted: non-finite integrand",
                              rule.nodes[i]);
      }
      sum += rule.weights[i] * fi;
    }
    return sum;
  }
  const auto weighted = [&f](double x) {
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      throw EvaluationError("integrate_expweighted: non-finite integrand", x);
    }
    return fx * std::exp(-x);
  };
  return detail::adaptive_simpson(weighted, 0.0, rule.upper_limit,
                                  rule.tolerance);
}

}  // namespace harqrate
