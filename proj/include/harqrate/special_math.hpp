// Scalar special functions and quadrature primitives: Gaussian tail
// probability Q and its inverse, the exponential integral E1, Erlang
// CDF/quantile, and Gauss-Laguerre / adaptive-Simpson rules for
// integrals of the form  int_0^inf f(x) e^{-x} dx.
//
// All functions are pure and safe to call concurrently.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace harqrate {

// Thrown by integrate_expweighted when the integrand returns a non-finite
// value; carries the offending abscissa.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& message, double node)
      : std::runtime_error(message), node_(node) {}
  double node() const { return node_; }

 private:
  double node_;
};

enum class QuadratureKind { gauss_laguerre, adaptive_simpson };

// A rule for evaluating int_0^inf f(x) e^{-x} dx.  Gauss-Laguerre rules
// carry explicit nodes/weights; the adaptive-Simpson kind integrates
// f(x) e^{-x} on [0, upper_limit] to the requested tolerance instead.
struct QuadratureRule {
  Eigen::ArrayXd nodes;    // strictly increasing (gauss_laguerre)
  Eigen::ArrayXd weights;  // positive, sum to 1 (gauss_laguerre)
  QuadratureKind kind = QuadratureKind::gauss_laguerre;
  double tolerance = 1e-12;   // adaptive_simpson
  double upper_limit = 60.0;  // adaptive_simpson; e^{-60} ~ 9e-27

  // Golub-Welsch nodes (Newton-polished) with weights evaluated through the
  // bounded recurrence for L_n(x) e^{-x/2}.  Nodes whose weights underflow
  // double precision are dropped, so size() can be slightly less than n for
  // very high orders.
  static QuadratureRule gauss_laguerre(int n);
  static QuadratureRule adaptive_simpson(double tolerance = 1e-12,
                                         double upper_limit = 60.0);

  int size() const { return static_cast<int>(nodes.size()); }
};

inline constexpr double kLog2E = 1.4426950408889634074;  // log2(e)
inline constexpr double kEulerGamma = 0.57721566490153286061;

// Tail probability of the standard normal, Q(x) = P[N(0,1) > x].
double q_function(double x);

// Inverse of q_function on (0,1).
double q_inverse(double p);

// Standard normal density.
double normal_pdf(double x);

// int_q^inf Q(x) dx = phi(q) - q Q(q).
double q_tail_integral(double q);

// Exponential integral E1(x) = int_1^inf t^{-1} e^{-xt} dt, x > 0.
double exp_integral_e1(double x);

// e^x E1(x), stable for large x where e^x alone overflows.
double exp_scaled_e1(double x);

// P[sum of k unit-mean exponentials <= t] = 1 - e^{-t} sum_{j<k} t^j/j!.
double erlang_cdf(double t, int k);

// Inverse of erlang_cdf in t; |cdf(result) - p| <= 1e-12.
double erlang_quantile(double p, int k);

// Approximates int_0^inf f(x) e^{-x} dx with the given rule.
double integrate_expweighted(const std::function<double(double)>& f,
                             const QuadratureRule& rule);

namespace detail {
// Recursive adaptive Simpson of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);
}  // namespace detail

}  // namespace harqrate
