#ifndef SEQEPI_MODELS_HPP
#define SEQEPI_MODELS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace seqepi {

enum class ModelKind { Sir, Seir, Seair };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Compartmental model parameters. All rates are per week.
struct ModelSpec {
  ModelKind kind = ModelKind::Sir;
  double beta = 0.0;       // transmission rate
  double gamma = 0.0;      // recovery rate
  double sigma = 0.0;      // exposed -> next compartment (SEIR/SEAIR)
  double rho_a = 0.0;      // asymptomatic -> symptomatic (SEAIR)
  double population = 1e6; // N
  double i0 = 10.0;
  double e0 = 0.0;
  double a0 = 0.0;

  // beta/gamma for SIR and SEIR; beta/gamma + beta/rho_a for SEAIR.
  double r0() const;

  // 1/gamma for SIR; 1/gamma + 1/sigma for SEIR and SEAIR. In weeks.
  double si_weeks() const;
  double si_days() const { return 7.0 * si_weeks(); }

  void validate() const;  // throws std::invalid_argument

  // Solves rates from (R0, SI) targets. For SEIR/SEAIR the serial interval
  // is split between the latent and infectious stages by latent_fraction
  // (1/sigma = latent_fraction * SI). For SEAIR the asymptomatic stage is
  // given the same duration as the infectious stage (rho_a = gamma), and
  // beta is solved from R0 = beta/gamma + beta/rho_a.
  static ModelSpec from_targets(ModelKind kind, double r0, double si_days,
                                double population = 1e6, double i0 = 10.0,
                                double latent_fraction = 0.5);
};

struct CompartmentState {
  double t = 0.0;  // weeks
  double s = 0.0, e = 0.0, a = 0.0, i = 0.0, r = 0.0;
  double cum_onset = 0.0;  // cumulative inflow into the infectious compartment
};

struct CaseSeries {
  std::vector<std::int64_t> counts;
  double step = 1.0;  // weeks between observations
  std::string origin_label;
};

// Classic fixed-step RK4 over [0, horizon_weeks]. Requires horizon > 0 and
// 0 < h <= 0.05. States are emitted every keep_every-th step (t = 0 and the
// final state always included); integration itself always advances by h.
// Die-off below -1e-9 or a non-finite state raises std::runtime_error
// (stiffness or bad parameters); tiny negative values are clamped to 0.
std::vector<CompartmentState> integrate(const ModelSpec& spec,
                                        double horizon_weeks, double h,
                                        int keep_every = 1);

// Inflow into the infectious compartment summed per whole week, taken from
// the cum_onset channel (linear interpolation at week boundaries when the
// step does not divide the week). Requires the trajectory to span >= 1 week.
std::vector<double> weekly_incidence(const std::vector<CompartmentState>& traj);

// counts[w] ~ Poisson(mean_incidence[w]) independently per week and per
// trajectory. Trajectory k draws from a stream keyed by (seed, k), so the
// output is reproducible regardless of generation order.
std::vector<CaseSeries> sample_observations(const std::vector<double>& mean_incidence,
                                            int n_traj, std::uint64_t seed);

}  // namespace seqepi

#endif
