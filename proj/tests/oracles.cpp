#include "oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracles {

namespace {

double stirling_log_gamma(double x) {
  // Valid for x >= 12.
  static const double coeff[] = {
      1.0 / 12.0,     -1.0 / 360.0,     1.0 / 1260.0,  -1.0 / 1680.0,
      1.0 / 1188.0,   -691.0 / 360360.0, 1.0 / 156.0,
  };
  const double half_log_two_pi = 0.9189385332046727;
  double series = 0.0;
  double xp = x;
  for (const double c : coeff) {
    series += c / xp;
    xp *= x * x;
  }
  return (x - 0.5) * std::log(x) - x + half_log_two_pi + series;
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("oracles::log_gamma: x must be > 0");
  double shift = 0.0;
  while (x < 12.0) {
    shift -= std::log(x);
    x += 1.0;
  }
  return stirling_log_gamma(x) + shift;
}

double digamma_fd(double x) {
  // ln Gamma is too curved below 1 for the finite difference; shift up with
  // the exact recurrence first.
  double acc = 0.0;
  while (x < 1.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double h = 1e-3 * std::max(1.0, x);
  return acc + (-log_gamma(x + 2.0 * h) + 8.0 * log_gamma(x + h) -
                8.0 * log_gamma(x - h) + log_gamma(x - 2.0 * h)) /
                   (12.0 * h);
}

double trigamma_series(double x) {
  const int n_terms = 200000;
  double sum = 0.0;
  for (int n = n_terms - 1; n >= 0; --n) {
    const double d = x + n;
    sum += 1.0 / (d * d);
  }
  const double y = x + n_terms;
  return sum + 1.0 / y + 1.0 / (2.0 * y * y) + 1.0 / (6.0 * y * y * y);
}

namespace {

double simpson(double a, double fa, double fm, double b, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double m, double fm, double whole, double tol,
                     int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, fa, flm, m, fm);
  const double right = simpson(m, fm, frm, b, fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  if (hi <= lo) return 0.0;
  const int panels = 8;
  const double w = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * w;
    const double b = (p + 1 == panels) ? hi : a + w;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    total += adaptive_step(f, a, fa, b, fb, m, fm, simpson(a, fa, fm, b, fb),
                           tol / panels, 48);
  }
  return total;
}

double gamma_cdf_quad(double x, double shape, double scale) {
  if (x <= 0.0) return 0.0;
  const double log_norm = log_gamma(shape) + shape * std::log(scale);
  if (shape < 1.0) {
    // integral of t^(shape-1) e^(-t/scale) dt = (1/shape) int e^(-u^(1/shape)/scale) du
    const double upper = std::pow(x, shape);
    const double inv_shape = 1.0 / shape;
    const auto g = [&](double u) {
      return std::exp(-std::pow(u, inv_shape) / scale - log_norm);
    };
    return inv_shape * integrate(g, 0.0, upper, 1e-13);
  }
  const auto density = [&](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp((shape - 1.0) * std::log(t) - t / scale - log_norm);
  };
  return integrate(density, 0.0, x, 1e-13);
}

double std_normal_cdf_quad(double x) {
  if (x < -12.0) return 0.0;
  if (x > 12.0) return 1.0;
  const auto density = [](double t) {
    return std::exp(-0.5 * t * t) * 0.3989422804014327;
  };
  if (x >= 0.0) return 0.5 + integrate(density, 0.0, x, 1e-14);
  return 0.5 - integrate(density, x, 0.0, 1e-14);
}

double std_normal_quantile_bisect(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("oracles::std_normal_quantile_bisect: p in (0,1)");
  }
  double lo = -12.0, hi = 12.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (std_normal_cdf_quad(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double loggamma_density(double y, double alpha, double beta_scale) {
  return std::exp(alpha * (y - std::log(beta_scale)) - std::exp(y) / beta_scale -
                  log_gamma(alpha));
}

double loggamma_trunc_cdf(double y, double alpha, double beta_scale, double lo,
                          double hi) {
  if (y <= lo) return 0.0;
  if (y >= hi) return 1.0;
  const auto f = [&](double t) { return loggamma_density(t, alpha, beta_scale); };
  const double z = integrate(f, lo, hi, 1e-13);
  return integrate(f, lo, y, 1e-13) / z;
}

double loggamma_trunc_quantile(double q, double alpha, double beta_scale, double lo,
                               double hi) {
  double a = lo, b = hi;
  for (int iter = 0; iter < 70; ++iter) {
    const double mid = 0.5 * (a + b);
    if (loggamma_trunc_cdf(mid, alpha, beta_scale, lo, hi) < q) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

double loggamma_trunc_mean(double alpha, double beta_scale, double lo, double hi) {
  const auto f = [&](double t) { return loggamma_density(t, alpha, beta_scale); };
  const auto tf = [&](double t) { return t * loggamma_density(t, alpha, beta_scale); };
  return integrate(tf, lo, hi, 1e-13) / integrate(f, lo, hi, 1e-13);
}

namespace {

// 32-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; mirror for
// the negative half). Abramowitz & Stegun table 25.4.
const double kGl32X[16] = {
    0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745,
    0.3318686022821276498, 0.4213512761306353454, 0.5068999089322293900,
    0.5877157572407623290, 0.6630442669302152009, 0.7321821187402896804,
    0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
    0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354,
    0.9972638618494815635};
const double kGl32W[16] = {
    0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654,
    0.0911738786957638847, 0.0876520930044038111, 0.0833119242269467552,
    0.0781938957870703065, 0.0723457941088485062, 0.0658222227763618468,
    0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
    0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706,
    0.0070186100094700966};

}  // namespace

double copula_unit_square_integral(
    const std::function<double(double, double)>& density) {
  // Substituting u = Phi(x), v = Phi(y) turns the unit-square integral into a
  // plane integral against the product of normal densities; [-8, 8]^2 carries
  // all mass to ~1e-15. Two panels per axis, 32 nodes per panel.
  const double bound = 8.0;
  std::vector<double> nodes, weights;
  for (int panel = 0; panel < 2; ++panel) {
    const double a = -bound + panel * bound;
    const double b = a + bound;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < 16; ++i) {
      nodes.push_back(mid - half * kGl32X[i]);
      weights.push_back(half * kGl32W[i]);
      nodes.push_back(mid + half * kGl32X[i]);
      weights.push_back(half * kGl32W[i]);
    }
  }
  const auto phi = [](double t) {
    return std::exp(-0.5 * t * t) * 0.3989422804014327;
  };
  std::vector<double> cdf(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) cdf[i] = std_normal_cdf_quad(nodes[i]);

  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      row += weights[j] * density(cdf[i], cdf[j]) * phi(nodes[j]);
    }
    total += weights[i] * phi(nodes[i]) * row;
  }
  return total;
}

}  // namespace oracles
