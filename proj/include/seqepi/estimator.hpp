#ifndef SEQEPI_ESTIMATOR_HPP
#define SEQEPI_ESTIMATOR_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seqepi/grid.hpp"
#include "seqepi/models.hpp"

namespace seqepi {

enum class GridAxis { R0, Gamma };

struct EstimateRecord {
  int week = 0;                  // 1-based index of the latest week absorbed
  double r0_median = 0.0;
  double si_median_days = 0.0;   // 7 / gamma-median
  std::vector<std::uint32_t> hdr_cells;  // row-major indices, ascending
  double hdr_level = 0.95;
  double hdr_mass = 0.0;
};

struct ThetaPosterior {
  double alpha_star = 0.0;
  double beta_star = 0.0;
};

// Log pmf of I(t_{j+1}) given I(t_j) and theta, where the conditional mean is
// I(t_j) * exp(theta). Requires i_curr >= 1; i_curr = 0 raises
// std::domain_error (gap week, the conditional law is undefined there).
double poisson_log_lik_theta(std::int64_t i_next, std::int64_t i_curr, double theta);

// Same with theta = dt * gamma * (r0 - 1).
double poisson_log_lik(std::int64_t i_next, std::int64_t i_curr, double r0,
                       double gamma, double dt);

// One observed consecutive pair.
struct ObservedPair {
  std::int64_t i_curr = 0;
  std::int64_t i_next = 0;
};

// Multiplies every cell's mass by the product of the Poisson likelihood terms
// for the given pairs (evaluated at that cell's theta), then renormalizes.
// Accumulation happens in log space with max-subtraction. Throws
// std::runtime_error when the likelihood zeroes out every cell that carries
// prior mass. Serial and parallel modes are bit-identical.
void apply_likelihood(JointGrid& grid, std::span<const ObservedPair> pairs,
                      double dt, ExecMode mode = ExecMode::Parallel);

// Marginal cell masses along one axis.
std::vector<double> grid_marginal(const JointGrid& grid, GridAxis axis);

// Smallest axis value whose cumulative marginal mass reaches 0.5, linearly
// interpolated within the crossing cell. Grid must be normalized.
double marginal_median(const JointGrid& grid, GridAxis axis);

// Highest-density region: cells sorted by density (mass / area) descending,
// ties broken by row-major index, accumulated until the target mass is
// reached. Returns included indices in ascending order; *mass_out (optional)
// receives the accumulated mass.
std::vector<std::uint32_t> hdr_region(const JointGrid& grid, double level,
                                      double* mass_out = nullptr);

// Early-outbreak reference curve r0^(t * gamma); diagnostic overlay only.
double theoretical_curve(double r0, double t_weeks, double gamma);

// Conjugate update for theta ~ logGamma(alpha, beta): alpha* = alpha + S,
// beta* = 1 / (T + 1/beta) with S = sum of next counts and T = sum of
// current counts over consecutive pairs. Pairs with a zero current count are
// skipped, mirroring the grid engine's gap-week rule.
ThetaPosterior conjugate_theta_posterior(double alpha, double beta_scale,
                                         const CaseSeries& series);

struct SequentialOptions {
  double hdr_level = 0.95;
  bool compute_hdr = true;
  bool keep_grids = false;        // also return each week's posterior grid
  bool include_prior_record = false;  // emit a week-1 record from the prior
  int max_week = 0;               // stop after this week; 0 = whole series
  ExecMode mode = ExecMode::Parallel;
};

struct SequentialResult {
  std::vector<EstimateRecord> records;
  std::vector<JointGrid> posteriors;  // parallel to records if keep_grids
  std::vector<int> gap_weeks;         // weeks skipped because I(t_j) = 0
};

// Week-by-week updating: for each consecutive pair the posterior becomes the
// next prior. Requires >= 2 observations; dt is series.step. Pairs whose
// current count is zero (leading zeros included) absorb no data and land in
// gap_weeks.
SequentialResult sequential_update(const JointGrid& prior, const CaseSeries& series,
                                   const SequentialOptions& opts = {});

namespace detail {
void apply_loglik_terms_serial(JointGrid& grid, std::span<const ObservedPair> pairs,
                               double dt);
void apply_loglik_terms_parallel(JointGrid& grid, std::span<const ObservedPair> pairs,
                                 double dt);

// Reduced log-likelihood the grid kernels evaluate per cell: the product of
// Poisson terms over pairs equals exp(S theta - T e^theta) times a theta-free
// factor, with S the sum of next counts and T the sum of current counts.
double reduced_loglik(double s_next, double t_curr, double theta);
}  // namespace detail

}  // namespace seqepi

#endif
