#include "seqepi/wp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqepi/numerics.hpp"

namespace seqepi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

std::vector<double> discretize_si(double shape, double scale_weeks, int k) {
  if (k < 1) {
    throw std::invalid_argument("discretize_si: k must be >= 1");
  }
  if (!(shape > 0.0) || !(scale_weeks > 0.0)) {
    throw std::domain_error("discretize_si: shape and scale must be > 0");
  }
  std::vector<double> p(k);
  double prev = 0.0;
  double total = 0.0;
  for (int j = 1; j <= k; ++j) {
    const double cur = num::gamma_cdf(static_cast<double>(j), shape, scale_weeks);
    p[j - 1] = cur - prev;
    total += p[j - 1];
    prev = cur;
  }
  if (k > 1 && num::gamma_cdf(1.0, shape, scale_weeks) >= 1.0 - 1e-12) {
    throw std::domain_error(
        "discretize_si: SI mass is entirely below one week; scale/shape "
        "inconsistent with weekly resolution");
  }
  if (!(total > 0.0)) {
    throw std::domain_error("discretize_si: no SI mass within k weeks");
  }
  for (double& v : p) v /= total;
  return p;
}

double wp_log_lik(const CaseSeries& series, double r0, std::span<const double> p) {
  const auto& counts = series.counts;
  if (counts.size() < 2) {
    throw std::invalid_argument("wp_log_lik: series must have >= 2 observations");
  }
  if (!(r0 > 0.0)) {
    throw std::domain_error("wp_log_lik: r0 must be > 0");
  }
  const int k = static_cast<int>(p.size());
  const int n = static_cast<int>(counts.size());
  double ll = 0.0;
  for (int t = 2; t <= n; ++t) {
    double conv = 0.0;
    const int j_max = std::min(k, t - 1);
    for (int j = 1; j <= j_max; ++j) {
      conv += p[j - 1] * static_cast<double>(counts[t - j - 1]);
    }
    const double mu = r0 * conv;
    const double n_t = static_cast<double>(counts[t - 1]);
    if (mu <= 0.0) {
      if (n_t > 0.0) return kNegInf;
      continue;
    }
    ll += n_t * std::log(mu) - mu - std::lgamma(n_t + 1.0);
  }
  return ll;
}

namespace {

// Nelder-Mead on an N=3 simplex; x is log(r0, shape, scale). Returns the best
// point found; ok is set when the simplex collapsed below tolerance.
template <typename F>
std::array<double, 3> nelder_mead(F&& f, std::array<double, 3> x0, int max_iter,
                                  bool& ok, double* f_best) {
  constexpr int n = 3;
  constexpr double alpha = 1.0, gamma_e = 2.0, rho_c = 0.5, sigma_s = 0.5;
  std::array<std::array<double, 3>, n + 1> pts;
  std::array<double, n + 1> fv;
  pts[0] = x0;
  for (int i = 1; i <= n; ++i) {
    pts[i] = x0;
    pts[i][i - 1] += 0.25;
  }
  for (int i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  auto order = [&] {
    std::array<int, n + 1> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&fv](int a, int b) { return fv[a] < fv[b]; });
    std::array<std::array<double, 3>, n + 1> ps;
    std::array<double, n + 1> fs;
    for (int i = 0; i <= n; ++i) {
      ps[i] = pts[idx[i]];
      fs[i] = fv[idx[i]];
    }
    pts = ps;
    fv = fs;
  };

  ok = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    order();
    if (std::fabs(fv[n] - fv[0]) < 1e-10 * (1.0 + std::fabs(fv[0]))) {
      ok = true;
      break;
    }
    std::array<double, 3> centroid{0, 0, 0};
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 3; ++d) centroid[d] += pts[i][d] / n;
    }
    auto blend = [&centroid](const std::array<double, 3>& p, double c) {
      std::array<double, 3> out;
      for (int d = 0; d < 3; ++d) out[d] = centroid[d] + c * (p[d] - centroid[d]);
      return out;
    };
    const auto refl = blend(pts[n], -alpha);
    const double f_refl = f(refl);
    if (f_refl < fv[0]) {
      const auto exp_pt = blend(pts[n], -gamma_e);
      const double f_exp = f(exp_pt);
      if (f_exp < f_refl) {
        pts[n] = exp_pt;
        fv[n] = f_exp;
      } else {
        pts[n] = refl;
        fv[n] = f_refl;
      }
      continue;
    }
    if (f_refl < fv[n - 1]) {
      pts[n] = refl;
      fv[n] = f_refl;
      continue;
    }
    const auto contr = blend(pts[n], rho_c);
    const double f_contr = f(contr);
    if (f_contr < fv[n]) {
      pts[n] = contr;
      fv[n] = f_contr;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      for (int d = 0; d < 3; ++d) {
        pts[i][d] = pts[0][d] + sigma_s * (pts[i][d] - pts[0][d]);
      }
      fv[i] = f(pts[i]);
    }
  }
  order();
  if (f_best != nullptr) *f_best = fv[0];
  return pts[0];
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v(n);
  const double llo = std::log(lo);
  const double step = (std::log(hi) - llo) / (n - 1);
  for (int i = 0; i < n; ++i) v[i] = std::exp(llo + i * step);
  return v;
}

}  // namespace

WpEstimate wp_fit(const CaseSeries& series, int k, const WpFitOptions& opts) {
  if (series.counts.size() < 3) {
    throw std::invalid_argument("wp_fit: series must have >= 3 observations");
  }

  // The convolution is identically zero before the first case.
  CaseSeries trimmed = series;
  while (!trimmed.counts.empty() && trimmed.counts.front() == 0) {
    trimmed.counts.erase(trimmed.counts.begin());
  }
  if (trimmed.counts.size() < 3) {
    throw std::invalid_argument("wp_fit: fewer than 3 observations after the first case");
  }

  auto eval = [&trimmed, k](double r0, double shape, double scale) {
    try {
      const std::vector<double> p = discretize_si(shape, scale, k);
      return wp_log_lik(trimmed, r0, p);
    } catch (const std::domain_error&) {
      return kNegInf;
    }
  };

  const std::vector<double> r0s = log_spaced(opts.r0_lo, opts.r0_hi, opts.grid_n);
  const std::vector<double> shapes = log_spaced(opts.shape_lo, opts.shape_hi, opts.grid_n);
  const std::vector<double> scales = log_spaced(opts.scale_lo, opts.scale_hi, opts.grid_n);

  struct GridPoint {
    double ll;
    double r0, shape, scale;
  };
  std::vector<GridPoint> top;
  top.reserve(static_cast<std::size_t>(opts.grid_n) * opts.grid_n);

  for (const double shape : shapes) {
    for (const double scale : scales) {
      std::vector<double> p;
      try {
        p = discretize_si(shape, scale, k);
      } catch (const std::domain_error&) {
        continue;
      }
      double best_ll = kNegInf;
      double best_r0 = r0s.front();
      for (const double r0 : r0s) {
        const double ll = wp_log_lik(trimmed, r0, p);
        if (ll > best_ll) {
          best_ll = ll;
          best_r0 = r0;
        }
      }
      if (best_ll > kNegInf) {
        top.push_back({best_ll, best_r0, shape, scale});
      }
    }
  }
  if (top.empty()) {
    throw std::runtime_error("wp_fit: likelihood is -inf over the whole search grid");
  }
  std::sort(top.begin(), top.end(), [](const GridPoint& a, const GridPoint& b) {
    if (a.ll != b.ll) return a.ll > b.ll;
    if (a.r0 != b.r0) return a.r0 < b.r0;
    if (a.shape != b.shape) return a.shape < b.shape;
    return a.scale < b.scale;
  });

  WpEstimate best;
  best.trunc_k = k;
  best.r0_hat = top[0].r0;
  best.si_shape = top[0].shape;
  best.si_scale = top[0].scale;
  best.loglik = top[0].ll;
  best.converged = false;

  auto neg = [&eval](const std::array<double, 3>& x) {
    const double v = eval(std::exp(x[0]), std::exp(x[1]), std::exp(x[2]));
    return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
  };

  const int n_starts = std::min<int>(opts.refine_from_best, static_cast<int>(top.size()));
  for (int s = 0; s < n_starts; ++s) {
    bool ok = false;
    double f_best = 0.0;
    const std::array<double, 3> x = nelder_mead(
        neg,
        {std::log(top[s].r0), std::log(top[s].shape), std::log(top[s].scale)},
        opts.nm_max_iter, ok, &f_best);
    const double ll = -f_best;
    if (ll > best.loglik) {
      best.r0_hat = std::exp(x[0]);
      best.si_shape = std::exp(x[1]);
      best.si_scale = std::exp(x[2]);
      best.loglik = ll;
      best.converged = ok;
    } else if (ok && ll == best.loglik) {
      best.converged = true;
    }
  }
  return best;
}

}  // namespace seqepi
