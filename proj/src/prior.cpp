#include "seqepi/prior.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "seqepi/numerics.hpp"

namespace seqepi {

namespace {

// Keeps copula arguments strictly inside (0, 1); cell-center CDF values can
// round to exactly 1 near the upper support edge.
constexpr double kCdfClamp = 1e-15;

double clamp_unit(double u) {
  if (u < kCdfClamp) return kCdfClamp;
  if (u > 1.0 - kCdfClamp) return 1.0 - kCdfClamp;
  return u;
}

}  // namespace

void LogGammaMarginal::validate() const {
  if (!(alpha > 0.0) || !(beta_scale > 0.0)) {
    throw std::invalid_argument("LogGammaMarginal: alpha and beta_scale must be > 0");
  }
  // The log-Gamma variate lives on the whole real line, so a negative lower
  // bound is legitimate for the marginal itself; the joint prior narrows it
  // to the positive parameter supports.
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw std::invalid_argument("LogGammaMarginal: requires finite lower < upper");
  }
}

double loggamma_density(double y, double alpha, double beta_scale) {
  const double log_density = alpha * (y - std::log(beta_scale)) -
                             std::exp(y) / beta_scale - std::lgamma(alpha);
  return std::exp(log_density);
}

double LogGammaMarginal::pdf(double y) const {
  if (y < lower || y > upper) return 0.0;
  const double z = num::gamma_cdf(std::exp(upper), alpha, beta_scale) -
                   num::gamma_cdf(std::exp(lower), alpha, beta_scale);
  if (!(z > 0.0)) {
    throw std::runtime_error("LogGammaMarginal::pdf: no mass inside support");
  }
  return loggamma_density(y, alpha, beta_scale) / z;
}

double LogGammaMarginal::cdf(double y) const {
  if (y <= lower) return 0.0;
  if (y >= upper) return 1.0;
  const double f_lo = num::gamma_cdf(std::exp(lower), alpha, beta_scale);
  const double f_hi = num::gamma_cdf(std::exp(upper), alpha, beta_scale);
  const double z = f_hi - f_lo;
  if (!(z > 0.0)) {
    throw std::runtime_error("LogGammaMarginal::cdf: no mass inside support");
  }
  return (num::gamma_cdf(std::exp(y), alpha, beta_scale) - f_lo) / z;
}

double LogGammaMarginal::untruncated_mean() const {
  return num::digamma(alpha) + std::log(beta_scale);
}

double LogGammaMarginal::untruncated_var() const {
  return num::trigamma(alpha);
}

double loggamma_pdf(double y, const LogGammaMarginal& m) {
  m.validate();
  return m.pdf(y);
}

double solve_scale_for_mean(double target_mean, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("solve_scale_for_mean: alpha must be > 0");
  }
  if (!std::isfinite(target_mean)) {
    throw std::invalid_argument("solve_scale_for_mean: target_mean must be finite");
  }
  return std::exp(target_mean - num::digamma(alpha));
}

void PriorSpec::validate() const {
  marginal_r0.validate();
  marginal_gamma.validate();
  if (!(marginal_r0.lower > 0.0) || !(marginal_gamma.lower > 0.0)) {
    throw std::invalid_argument("PriorSpec: parameter supports must have lower > 0");
  }
  if (!(rho > -1.0) || rho > 0.0) {
    throw std::invalid_argument("PriorSpec: rho must lie in (-1, 0]");
  }
}

PriorSpec prior_from_targets(double r0_mean, double si_mean_days, double alpha,
                             double rho, double r0_hi, double gamma_hi,
                             double support_lo) {
  if (!(si_mean_days > 0.0)) {
    throw std::invalid_argument("prior_from_targets: si_mean_days must be > 0");
  }
  const double gamma_mean = 7.0 / si_mean_days;
  if (!(r0_mean > support_lo) || !(r0_mean < r0_hi)) {
    throw std::invalid_argument("prior_from_targets: r0_mean outside support");
  }
  if (!(gamma_mean > support_lo) || !(gamma_mean < gamma_hi)) {
    throw std::invalid_argument("prior_from_targets: 7/si_mean_days outside support");
  }
  PriorSpec spec;
  spec.marginal_r0 = {alpha, solve_scale_for_mean(r0_mean, alpha), support_lo, r0_hi};
  spec.marginal_gamma = {alpha, solve_scale_for_mean(gamma_mean, alpha), support_lo, gamma_hi};
  spec.rho = rho;
  spec.validate();
  return spec;
}

namespace detail {

// Per-axis quantities shared by both kernels.
struct AxisTables {
  std::vector<double> log_pdf;
  std::vector<double> z;  // Phi^-1 of the truncated CDF at cell centers
};

AxisTables tabulate_axis(const std::vector<double>& centers,
                         const LogGammaMarginal& m) {
  AxisTables t;
  const std::size_t n = centers.size();
  t.log_pdf.resize(n);
  t.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = m.pdf(centers[i]);
    t.log_pdf[i] = f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity();
    t.z[i] = num::std_normal_quantile(clamp_unit(m.cdf(centers[i])));
  }
  return t;
}

inline double cell_mass(const AxisTables& tr, const AxisTables& tg, int i, int j,
                        double rho, double inv_two_om, double log_norm,
                        double area) {
  const double z1 = tr.z[i];
  const double z2 = tg.z[j];
  const double q = rho * rho * (z1 * z1 + z2 * z2) - 2.0 * rho * z1 * z2;
  const double log_c = -q * inv_two_om + log_norm;
  return std::exp(tr.log_pdf[i] + tg.log_pdf[j] + log_c) * area;
}

void fill_prior_cells_serial(JointGrid& grid, const PriorSpec& spec) {
  const AxisTables tr = tabulate_axis(grid.r0_axis, spec.marginal_r0);
  const AxisTables tg = tabulate_axis(grid.gamma_axis, spec.marginal_gamma);
  const double om = 1.0 - spec.rho * spec.rho;
  const double inv_two_om = 1.0 / (2.0 * om);
  const double log_norm = -0.5 * std::log(om);
  const int nr = grid.n_r0();
  const int ng = grid.n_gamma();
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < ng; ++j) {
      grid.at(i, j) = cell_mass(tr, tg, i, j, spec.rho, inv_two_om, log_norm,
                                grid.cell_area(i, j));
    }
  }
}

void fill_prior_cells_parallel(JointGrid& grid, const PriorSpec& spec) {
  const AxisTables tr = tabulate_axis(grid.r0_axis, spec.marginal_r0);
  const AxisTables tg = tabulate_axis(grid.gamma_axis, spec.marginal_gamma);
  const double om = 1.0 - spec.rho * spec.rho;
  const double inv_two_om = 1.0 / (2.0 * om);
  const double log_norm = -0.5 * std::log(om);
  const int nr = grid.n_r0();
  const int ng = grid.n_gamma();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < ng; ++j) {
      grid.at(i, j) = cell_mass(tr, tg, i, j, spec.rho, inv_two_om, log_norm,
                                grid.cell_area(i, j));
    }
  }
}

}  // namespace detail

JointGrid build_joint_prior(const PriorSpec& spec, int n_r0, int n_gamma,
                            ExecMode mode) {
  spec.validate();
  if (n_r0 < 2 || n_gamma < 2) {
    throw std::invalid_argument("build_joint_prior: degenerate grid");
  }
  JointGrid grid = JointGrid::uniform(spec.marginal_r0.lower, spec.marginal_r0.upper,
                                      n_r0, spec.marginal_gamma.lower,
                                      spec.marginal_gamma.upper, n_gamma);
  if (mode == ExecMode::Serial) {
    detail::fill_prior_cells_serial(grid, spec);
  } else {
    detail::fill_prior_cells_parallel(grid, spec);
  }
  grid.normalize();
  return grid;
}

std::string prior_config_to_text(const PriorConfig& cfg) {
  std::ostringstream out;
  auto g17 = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "alpha = " << g17(cfg.spec.marginal_r0.alpha) << "\n";
  out << "r0_mean = " << g17(cfg.spec.marginal_r0.untruncated_mean()) << "\n";
  out << "gamma_mean = " << g17(cfg.spec.marginal_gamma.untruncated_mean()) << "\n";
  out << "rho = " << g17(cfg.spec.rho) << "\n";
  out << "r0_support = " << g17(cfg.spec.marginal_r0.lower) << " "
      << g17(cfg.spec.marginal_r0.upper) << "\n";
  out << "gamma_support = " << g17(cfg.spec.marginal_gamma.lower) << " "
      << g17(cfg.spec.marginal_gamma.upper) << "\n";
  out << "grid = " << cfg.n_r0 << " " << cfg.n_gamma << "\n";
  return out.str();
}

PriorConfig prior_config_from_text(const std::string& text) {
  double alpha = kDefaultAlpha;
  double r0_mean = 0.0, gamma_mean = 0.0;
  bool have_r0 = false, have_gamma = false;
  double rho = kDefaultRho;
  double r0_lo = kDefaultSupportLo, r0_hi = kDefaultR0SupportHi;
  double g_lo = kDefaultSupportLo, g_hi = kDefaultGammaSupportHi;
  int n_r0 = kDefaultGridCells, n_gamma = kDefaultGridCells;

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::istringstream key_stream(line.substr(0, eq));
    std::string key;
    key_stream >> key;
    std::istringstream val(line.substr(eq + 1));
    if (key == "alpha") {
      val >> alpha;
    } else if (key == "r0_mean") {
      val >> r0_mean;
      have_r0 = true;
    } else if (key == "gamma_mean") {
      val >> gamma_mean;
      have_gamma = true;
    } else if (key == "rho") {
      val >> rho;
    } else if (key == "r0_support") {
      val >> r0_lo >> r0_hi;
    } else if (key == "gamma_support") {
      val >> g_lo >> g_hi;
    } else if (key == "grid") {
      val >> n_r0 >> n_gamma;
    } else if (!key.empty()) {
      throw std::invalid_argument("prior_config_from_text: unknown key '" + key + "'");
    }
    if (val.fail()) {
      throw std::invalid_argument("prior_config_from_text: bad value for '" + key + "'");
    }
  }
  if (!have_r0 || !have_gamma) {
    throw std::invalid_argument("prior_config_from_text: r0_mean and gamma_mean are required");
  }
  PriorConfig cfg;
  cfg.spec.marginal_r0 = {alpha, solve_scale_for_mean(r0_mean, alpha), r0_lo, r0_hi};
  cfg.spec.marginal_gamma = {alpha, solve_scale_for_mean(gamma_mean, alpha), g_lo, g_hi};
  cfg.spec.rho = rho;
  cfg.spec.validate();
  cfg.n_r0 = n_r0;
  cfg.n_gamma = n_gamma;
  return cfg;
}

}  // namespace seqepi
