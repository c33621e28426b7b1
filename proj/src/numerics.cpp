#include "seqepi/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqepi::num {

namespace {

// Bernoulli numbers B_2 .. B_14 for the asymptotic expansions.
constexpr double kB2 = 1.0 / 6.0;
constexpr double kB4 = -1.0 / 30.0;
constexpr double kB6 = 1.0 / 42.0;
constexpr double kB8 = -1.0 / 30.0;
constexpr double kB10 = 5.0 / 66.0;
constexpr double kB12 = -691.0 / 2730.0;
constexpr double kB14 = 7.0 / 6.0;

constexpr double kSqrt2 = 1.4142135623730951;

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: requires x > 0");
  }
  // Shift up until the asymptotic series converges fast.
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum_k B_2k / (2k x^2k)
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = kB2 / 2.0;
  double p = inv2;
  double sum = series * p;
  p *= inv2; sum += (kB4 / 4.0) * p;
  p *= inv2; sum += (kB6 / 6.0) * p;
  p *= inv2; sum += (kB8 / 8.0) * p;
  p *= inv2; sum += (kB10 / 10.0) * p;
  p *= inv2; sum += (kB12 / 12.0) * p;
  p *= inv2; sum += (kB14 / 14.0) * p;
  return acc + std::log(x) - 0.5 * inv - sum;
}

double trigamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("trigamma: requires x > 0");
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  // psi'(x) ~ 1/x + 1/(2x^2) + sum_k B_2k / x^(2k+1)
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double p = inv * inv2;
  double sum = kB2 * p;
  p *= inv2; sum += kB4 * p;
  p *= inv2; sum += kB6 * p;
  p *= inv2; sum += kB8 * p;
  p *= inv2; sum += kB10 * p;
  p *= inv2; sum += kB12 * p;
  p *= inv2; sum += kB14 * p;
  return acc + inv + 0.5 * inv2 + sum;
}

namespace {

// Lower regularized incomplete gamma by power series; valid for x < a + 1.
double gamma_p_series(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 100000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * eps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("gamma_cdf: series did not converge");
}

// Upper regularized incomplete gamma by Lentz continued fraction; x >= a + 1.
double gamma_q_contfrac(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= eps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw std::runtime_error("gamma_cdf: continued fraction did not converge");
}

}  // namespace

double gamma_cdf(double x, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::domain_error("gamma_cdf: requires shape > 0 and scale > 0");
  }
  if (x < 0.0) {
    throw std::domain_error("gamma_cdf: requires x >= 0");
  }
  const double z = x / scale;
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return 1.0;
  if (z < shape + 1.0) {
    return gamma_p_series(shape, z);
  }
  return 1.0 - gamma_q_contfrac(shape, z);
}

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / kSqrt2);
}

namespace {

double rat_eval(const double* a, int na, const double* b, int nb, double x) {
  double u = a[na - 1];
  for (int i = na - 1; i > 0; i--) u = x * u + a[i - 1];
  double v = b[nb - 1];
  for (int j = nb - 1; j > 0; j--) v = x * v + b[j - 1];
  return u / v;
}

// AS 241 (Wichura 1988), |p - 0.5| <= 0.425 branch.
double ppnd_central(double q) {
  static const double a[8] = {3.387132872796366608,  133.14166789178437745,
                              1971.5909503065514427, 13731.693765509461125,
                              45921.953931549871457, 67265.770927008700853,
                              33430.575583588128105, 2509.0809287301226727};
  static const double b[8] = {1.0,
                              42.313330701600911252,
                              687.1870074920579083,
                              5394.1960214247511077,
                              21213.794301586595867,
                              39307.89580009271061,
                              28729.085735721942674,
                              5226.495278852854561};
  const double r = 0.180625 - q * q;
  return q * rat_eval(a, 8, b, 8, r);
}

// Intermediate tail, r = sqrt(-log(min(p, 1-p))) <= 5.
double ppnd_intermediate(double r) {
  static const double a[8] = {1.42343711074968357734,    4.6303378461565452959,
                              5.7694972214606914055,     3.64784832476320460504,
                              1.27045825245236838258,    0.24178072517745061177,
                              0.0227238449892691845833,  7.7454501427834140764e-4};
  static const double b[8] = {1.0,
                              2.05319162663775882187,
                              1.6763848301838038494,
                              0.68976733498510000455,
                              0.14810397642748007459,
                              0.0151986665636164571966,
                              5.475938084995344946e-4,
                              1.05075007164441684324e-9};
  return rat_eval(a, 8, b, 8, r - 1.6);
}

// Far tail, r > 5.
double ppnd_tail(double r) {
  static const double a[8] = {6.6579046435011037772,     5.4637849111641143699,
                              1.7848265399172913358,     0.29656057182850489123,
                              0.026532189526576123093,   0.0012426609473880784386,
                              2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double b[8] = {1.0,
                              0.59983220655588793769,
                              0.13692988092273580531,
                              0.0148753612908506148525,
                              7.868691311456132591e-4,
                              1.8463183175100546818e-5,
                              1.4215117583164458887e-7,
                              2.04426310338993978564e-15};
  return rat_eval(a, 8, b, 8, r - 5.0);
}

}  // namespace

double std_normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("std_normal_quantile: requires 0 < p < 1");
  }
  const double dp = p - 0.5;
  double x;
  if (std::fabs(dp) <= 0.425) {
    x = ppnd_central(dp);
  } else {
    const double pp = (dp < 0.0) ? p : 1.0 - p;
    const double r = std::sqrt(-std::log(pp));
    x = (r <= 5.0) ? ppnd_intermediate(r) : ppnd_tail(r);
    if (dp < 0.0) x = -x;
  }
  // One Newton step against the erfc-based CDF tightens the tails.
  const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014327;
  if (pdf > 0.0) {
    x -= (std_normal_cdf(x) - p) / pdf;
  }
  return x;
}

double gaussian_copula_density(double u, double v, double rho) {
  if (!(std::fabs(rho) < 1.0)) {
    throw std::domain_error("gaussian_copula_density: requires |rho| < 1");
  }
  if (!(u > 0.0) || !(u < 1.0) || !(v > 0.0) || !(v < 1.0)) {
    throw std::domain_error("gaussian_copula_density: requires u, v in (0, 1)");
  }
  const double z1 = std_normal_quantile(u);
  const double z2 = std_normal_quantile(v);
  const double om = 1.0 - rho * rho;
  const double q = rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2;
  return std::exp(-q / (2.0 * om)) / std::sqrt(om);
}

}  // namespace seqepi::num
