#ifndef SEQEPI_PRIOR_HPP
#define SEQEPI_PRIOR_HPP

#include <string>

#include "seqepi/grid.hpp"

namespace seqepi {

// Defaults shared by the whole toolkit. Supports can be widened or narrowed
// per run; rho is only mildly negative by default (R0 and the recovery rate
// move in opposite directions for a fixed growth rate, but the data speak
// mostly to the product, so a strong copula mainly amplifies prior bias).
inline constexpr double kDefaultSupportLo = 0.001;
inline constexpr double kDefaultR0SupportHi = 10.0;   // kappa
inline constexpr double kDefaultGammaSupportHi = 5.0; // eta
inline constexpr double kDefaultAlpha = 2.0;
inline constexpr double kDefaultRho = -0.1;
inline constexpr int kDefaultGridCells = 400;

// Log-Gamma law truncated to [lower, upper]: if X ~ Gamma(alpha, beta) then
// Y = ln X has density (1/Gamma(alpha)) (e^y / beta)^alpha exp(-e^y / beta).
// The untruncated mean is psi(alpha) + ln beta, the variance psi'(alpha).
struct LogGammaMarginal {
  double alpha = kDefaultAlpha;
  double beta_scale = 1.0;
  double lower = kDefaultSupportLo;
  double upper = kDefaultR0SupportHi;

  void validate() const;  // throws std::invalid_argument

  // Density renormalized over [lower, upper]; 0 outside.
  double pdf(double y) const;

  // CDF of the truncated law; 0 below lower, 1 above upper.
  double cdf(double y) const;

  double untruncated_mean() const;
  double untruncated_var() const;
};

// Density of the untruncated log-Gamma law, Eq-style direct evaluation.
double loggamma_density(double y, double alpha, double beta_scale);

// Truncated-law density helper matching the LogGammaMarginal contract.
double loggamma_pdf(double y, const LogGammaMarginal& m);

// Inverts psi(alpha) + ln beta = target_mean for beta.
double solve_scale_for_mean(double target_mean, double alpha);

struct PriorSpec {
  LogGammaMarginal marginal_r0;
  LogGammaMarginal marginal_gamma;
  double rho = kDefaultRho;  // copula correlation, in (-1, 0]

  void validate() const;
};

// Solves both marginal scales from target means. r0_mean is on the R0 axis;
// si_mean_days is converted to a per-week recovery rate via gamma = 7 / SI.
// Throws std::invalid_argument when a target lies outside its support.
PriorSpec prior_from_targets(double r0_mean, double si_mean_days,
                             double alpha = kDefaultAlpha,
                             double rho = kDefaultRho,
                             double r0_hi = kDefaultR0SupportHi,
                             double gamma_hi = kDefaultGammaSupportHi,
                             double support_lo = kDefaultSupportLo);

// Discretizes the copula-coupled joint prior onto an n_r0 x n_gamma cell
// grid spanning the marginal supports. Cell mass is proportional to
//   c_rho(F_r0(r), F_gamma(g)) * f_r0(r) * f_gamma(g) * cell_area
// evaluated at cell centers under the truncated marginals, normalized to
// total mass 1. Requires n_r0, n_gamma >= 16.
JointGrid build_joint_prior(const PriorSpec& spec, int n_r0, int n_gamma,
                            ExecMode mode = ExecMode::Parallel);

// PriorSpec plus grid resolution; the unit the harness and CLI pass around.
struct PriorConfig {
  PriorSpec spec;
  int n_r0 = kDefaultGridCells;
  int n_gamma = kDefaultGridCells;
};

// Plain-text key = value block, round-trippable.
std::string prior_config_to_text(const PriorConfig& cfg);
PriorConfig prior_config_from_text(const std::string& text);

namespace detail {
// Reference and OpenMP cell-fill kernels; outputs are bit-identical.
void fill_prior_cells_serial(JointGrid& grid, const PriorSpec& spec);
void fill_prior_cells_parallel(JointGrid& grid, const PriorSpec& spec);
}  // namespace detail

}  // namespace seqepi

#endif
