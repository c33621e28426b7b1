#ifndef SEQEPI_WP_HPP
#define SEQEPI_WP_HPP

#include <span>
#include <vector>

#include "seqepi/models.hpp"

namespace seqepi {

struct WpEstimate {
  double r0_hat = 0.0;
  double si_shape = 0.0;
  double si_scale = 0.0;  // weeks
  int trunc_k = 0;
  double loglik = 0.0;
  bool converged = false;

  double si_mean_days() const { return 7.0 * si_shape * si_scale; }
};

// Discretized gamma serial-interval law: p_j proportional to
// GammaCDF(j) - GammaCDF(j-1) for j = 1..k, renormalized to sum 1. Throws
// std::domain_error when essentially all mass sits below week 1 (the gamma
// law is inconsistent with weekly resolution).
std::vector<double> discretize_si(double shape, double scale_weeks, int k);

// Sum over t >= 2 of log PoissonPmf(N_t; mu_t) with
// mu_t = r0 * sum_{j=1..min(k, t-1)} p_j * N_{t-j}. Weeks with mu_t = 0
// contribute 0 when N_t = 0 and -inf otherwise.
double wp_log_lik(const CaseSeries& series, double r0, std::span<const double> p);

struct WpFitOptions {
  int grid_n = 32;  // per dimension, log-spaced
  double r0_lo = 0.2, r0_hi = 10.0;
  double shape_lo = 0.2, shape_hi = 20.0;
  double scale_lo = 0.05, scale_hi = 5.0;  // weeks
  int refine_from_best = 5;
  int nm_max_iter = 400;
};

// Joint MLE of (r0, shape, scale): coarse log-spaced grid search, then
// Nelder-Mead refinement in log-parameter space from the best grid points.
// Weeks before the first nonzero count are dropped. Deterministic.
WpEstimate wp_fit(const CaseSeries& series, int k = 5, const WpFitOptions& opts = {});

}  // namespace seqepi

#endif
