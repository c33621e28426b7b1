#include "seqepi/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace seqepi {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sufficient statistics of a batch of pairs: the likelihood product over
// pairs collapses to exp(S * theta - T * exp(theta)) times a theta-free
// constant, which cancels under renormalization.
struct PairSums {
  double s_next = 0.0;
  double t_curr = 0.0;
};

PairSums sums_of(std::span<const ObservedPair> pairs) {
  PairSums ps;
  for (const auto& p : pairs) {
    if (p.i_curr < 1) {
      throw std::domain_error("apply_likelihood: pair with zero current count");
    }
    if (p.i_next < 0) {
      throw std::domain_error("apply_likelihood: negative count");
    }
    ps.s_next += static_cast<double>(p.i_next);
    ps.t_curr += static_cast<double>(p.i_curr);
  }
  return ps;
}

}  // namespace

namespace detail {
double reduced_loglik(double s_next, double t_curr, double theta) {
  return s_next * theta - t_curr * std::exp(theta);
}
}  // namespace detail

double poisson_log_lik_theta(std::int64_t i_next, std::int64_t i_curr, double theta) {
  if (i_curr < 1) {
    throw std::domain_error("poisson_log_lik: i_curr = 0 marks a gap week");
  }
  if (i_next < 0) {
    throw std::domain_error("poisson_log_lik: i_next must be >= 0");
  }
  const double log_mean = std::log(static_cast<double>(i_curr)) + theta;
  const double mean = std::exp(log_mean);
  return static_cast<double>(i_next) * log_mean - mean -
         std::lgamma(static_cast<double>(i_next) + 1.0);
}

double poisson_log_lik(std::int64_t i_next, std::int64_t i_curr, double r0,
                       double gamma, double dt) {
  if (!(dt > 0.0)) {
    throw std::domain_error("poisson_log_lik: dt must be > 0");
  }
  return poisson_log_lik_theta(i_next, i_curr, dt * gamma * (r0 - 1.0));
}

namespace detail {

void apply_loglik_terms_serial(JointGrid& grid, std::span<const ObservedPair> pairs,
                               double dt) {
  if (pairs.empty()) return;
  const PairSums ps = sums_of(pairs);
  const int nr = grid.n_r0();
  const int ng = grid.n_gamma();

  std::vector<double> loglik(grid.size());
  double max_ll = kNegInf;
  for (int i = 0; i < nr; ++i) {
    const double scaled = dt * (grid.r0_axis[i] - 1.0);
    for (int j = 0; j < ng; ++j) {
      const std::size_t c = static_cast<std::size_t>(i) * ng + j;
      const double ll = reduced_loglik(ps.s_next, ps.t_curr, scaled * grid.gamma_axis[j]);
      loglik[c] = ll;
      const double cand = grid.mass[c] > 0.0 ? ll : kNegInf;
      if (cand > max_ll) max_ll = cand;
    }
  }
  if (max_ll == kNegInf) {
    throw std::runtime_error(
        "apply_likelihood: likelihood vanished on the prior support");
  }
  for (std::size_t c = 0; c < grid.size(); ++c) {
    grid.mass[c] = grid.mass[c] > 0.0 ? grid.mass[c] * std::exp(loglik[c] - max_ll) : 0.0;
  }
  grid.normalize();
}

void apply_loglik_terms_parallel(JointGrid& grid, std::span<const ObservedPair> pairs,
                                 double dt) {
  if (pairs.empty()) return;
  const PairSums ps = sums_of(pairs);
  const int nr = grid.n_r0();
  const int ng = grid.n_gamma();

  std::vector<double> loglik(grid.size());
  double max_ll = kNegInf;
#pragma omp parallel for schedule(static) reduction(max : max_ll)
  for (int i = 0; i < nr; ++i) {
    const double scaled = dt * (grid.r0_axis[i] - 1.0);
    for (int j = 0; j < ng; ++j) {
      const std::size_t c = static_cast<std::size_t>(i) * ng + j;
      const double ll = reduced_loglik(ps.s_next, ps.t_curr, scaled * grid.gamma_axis[j]);
      loglik[c] = ll;
      const double cand = grid.mass[c] > 0.0 ? ll : kNegInf;
      if (cand > max_ll) max_ll = cand;
    }
  }
  if (max_ll == kNegInf) {
    throw std::runtime_error(
        "apply_likelihood: likelihood vanished on the prior support");
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(grid.size()); ++c) {
    grid.mass[c] = grid.mass[c] > 0.0 ? grid.mass[c] * std::exp(loglik[c] - max_ll) : 0.0;
  }
  grid.normalize();
}

}  // namespace detail

void apply_likelihood(JointGrid& grid, std::span<const ObservedPair> pairs,
                      double dt, ExecMode mode) {
  if (!(dt > 0.0)) {
    throw std::domain_error("apply_likelihood: dt must be > 0");
  }
  if (mode == ExecMode::Serial) {
    detail::apply_loglik_terms_serial(grid, pairs, dt);
  } else {
    detail::apply_loglik_terms_parallel(grid, pairs, dt);
  }
}

std::vector<double> grid_marginal(const JointGrid& grid, GridAxis axis) {
  const int nr = grid.n_r0();
  const int ng = grid.n_gamma();
  if (axis == GridAxis::R0) {
    std::vector<double> m(nr, 0.0);
    for (int i = 0; i < nr; ++i) {
      double acc = 0.0;
      for (int j = 0; j < ng; ++j) acc += grid.at(i, j);
      m[i] = acc;
    }
    return m;
  }
  std::vector<double> m(ng, 0.0);
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < ng; ++j) m[j] += grid.at(i, j);
  }
  return m;
}

double marginal_median(const JointGrid& grid, GridAxis axis) {
  const std::vector<double>& centers =
      axis == GridAxis::R0 ? grid.r0_axis : grid.gamma_axis;
  const std::vector<double>& widths =
      axis == GridAxis::R0 ? grid.r0_width : grid.gamma_width;
  const std::vector<double> marg = grid_marginal(grid, axis);

  double cum = 0.0;
  for (std::size_t i = 0; i < marg.size(); ++i) {
    const double next = cum + marg[i];
    if (next >= 0.5) {
      return centers[i] - 0.5 * widths[i] + (0.5 - cum) / marg[i] * widths[i];
    }
    cum = next;
  }
  throw std::runtime_error("marginal_median: grid is not normalized");
}

std::vector<std::uint32_t> hdr_region(const JointGrid& grid, double level,
                                      double* mass_out) {
  if (!(level > 0.0) || !(level < 1.0)) {
    throw std::domain_error("hdr_region: level must lie in (0, 1)");
  }
  const int ng = grid.n_gamma();
  const std::size_t n = grid.size();
  std::vector<double> density(n);
  for (std::size_t c = 0; c < n; ++c) {
    const int i = static_cast<int>(c) / ng;
    const int j = static_cast<int>(c) % ng;
    density[c] = grid.mass[c] / grid.cell_area(i, j);
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&density](std::uint32_t a, std::uint32_t b) {
    if (density[a] != density[b]) return density[a] > density[b];
    return a < b;
  });

  std::vector<std::uint32_t> region;
  double acc = 0.0;
  for (const std::uint32_t c : order) {
    region.push_back(c);
    acc += grid.mass[c];
    if (acc >= level) break;
  }
  std::sort(region.begin(), region.end());
  if (mass_out != nullptr) *mass_out = acc;
  return region;
}

double theoretical_curve(double r0, double t_weeks, double gamma) {
  if (!(r0 > 0.0)) {
    throw std::domain_error("theoretical_curve: r0 must be > 0");
  }
  return std::exp(t_weeks * gamma * std::log(r0));
}

ThetaPosterior conjugate_theta_posterior(double alpha, double beta_scale,
                                         const CaseSeries& series) {
  if (!(alpha > 0.0) || !(beta_scale > 0.0)) {
    throw std::domain_error("conjugate_theta_posterior: alpha and beta must be > 0");
  }
  if (series.counts.size() < 2) {
    throw std::invalid_argument("conjugate_theta_posterior: needs >= 2 observations");
  }
  double s = 0.0, t = 0.0;
  for (std::size_t j = 0; j + 1 < series.counts.size(); ++j) {
    if (series.counts[j] < 1) continue;  // gap week
    s += static_cast<double>(series.counts[j + 1]);
    t += static_cast<double>(series.counts[j]);
  }
  return {alpha + s, 1.0 / (t + 1.0 / beta_scale)};
}

SequentialResult sequential_update(const JointGrid& prior, const CaseSeries& series,
                                   const SequentialOptions& opts) {
  if (series.counts.size() < 2) {
    throw std::invalid_argument("sequential_update: needs >= 2 observations");
  }
  if (!(series.step > 0.0)) {
    throw std::invalid_argument("sequential_update: step must be > 0");
  }

  const int n_weeks = static_cast<int>(series.counts.size());
  const int last_week = (opts.max_week > 0) ? std::min(opts.max_week, n_weeks) : n_weeks;

  SequentialResult result;
  JointGrid grid = prior;

  auto record_for = [&opts](const JointGrid& g, int week) {
    EstimateRecord rec;
    rec.week = week;
    rec.r0_median = marginal_median(g, GridAxis::R0);
    rec.si_median_days = 7.0 / marginal_median(g, GridAxis::Gamma);
    rec.hdr_level = opts.hdr_level;
    if (opts.compute_hdr) {
      rec.hdr_cells = hdr_region(g, opts.hdr_level, &rec.hdr_mass);
    }
    return rec;
  };

  if (opts.include_prior_record) {
    result.records.push_back(record_for(grid, 1));
    if (opts.keep_grids) result.posteriors.push_back(grid);
  }

  for (int week = 2; week <= last_week; ++week) {
    const std::int64_t i_curr = series.counts[week - 2];
    const std::int64_t i_next = series.counts[week - 1];
    if (i_curr < 1) {
      result.gap_weeks.push_back(week);
    } else {
      const ObservedPair pair{i_curr, i_next};
      apply_likelihood(grid, std::span<const ObservedPair>(&pair, 1), series.step,
                       opts.mode);
    }
    result.records.push_back(record_for(grid, week));
    if (opts.keep_grids) result.posteriors.push_back(grid);
  }
  return result;
}

}  // namespace seqepi
