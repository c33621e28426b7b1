#include "seqepi/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqepi/rng.hpp"

namespace seqepi {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Sir: return "sir";
    case ModelKind::Seir: return "seir";
    case ModelKind::Seair: return "seair";
  }
  throw std::logic_error("to_string: bad ModelKind");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "sir" || name == "SIR") return ModelKind::Sir;
  if (name == "seir" || name == "SEIR") return ModelKind::Seir;
  if (name == "seair" || name == "SEAIR") return ModelKind::Seair;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

double ModelSpec::r0() const {
  if (kind == ModelKind::Seair) return beta / gamma + beta / rho_a;
  return beta / gamma;
}

double ModelSpec::si_weeks() const {
  if (kind == ModelKind::Sir) return 1.0 / gamma;
  return 1.0 / gamma + 1.0 / sigma;
}

void ModelSpec::validate() const {
  if (!(beta > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("ModelSpec: beta and gamma must be > 0");
  }
  if (kind != ModelKind::Sir && !(sigma > 0.0)) {
    throw std::invalid_argument("ModelSpec: sigma must be > 0 for SEIR/SEAIR");
  }
  if (kind == ModelKind::Seair && !(rho_a > 0.0)) {
    throw std::invalid_argument("ModelSpec: rho_a must be > 0 for SEAIR");
  }
  const double seeded = i0 + e0 + a0;
  if (!(seeded >= 1.0) || !(population >= seeded)) {
    throw std::invalid_argument("ModelSpec: requires N >= I0 + E0 + A0 >= 1");
  }
}

ModelSpec ModelSpec::from_targets(ModelKind kind, double r0, double si_days,
                                  double population, double i0,
                                  double latent_fraction) {
  if (!(r0 > 0.0) || !(si_days > 0.0)) {
    throw std::invalid_argument("ModelSpec::from_targets: r0 and si_days must be > 0");
  }
  const double si_weeks = si_days / 7.0;
  ModelSpec spec;
  spec.kind = kind;
  spec.population = population;
  spec.i0 = i0;
  if (kind == ModelKind::Sir) {
    spec.gamma = 1.0 / si_weeks;
    spec.beta = r0 * spec.gamma;
    return spec;
  }
  if (!(latent_fraction > 0.0) || !(latent_fraction < 1.0)) {
    throw std::invalid_argument("ModelSpec::from_targets: latent_fraction must be in (0, 1)");
  }
  spec.sigma = 1.0 / (latent_fraction * si_weeks);
  spec.gamma = 1.0 / ((1.0 - latent_fraction) * si_weeks);
  if (kind == ModelKind::Seir) {
    spec.beta = r0 * spec.gamma;
  } else {
    spec.rho_a = spec.gamma;
    spec.beta = r0 / (1.0 / spec.gamma + 1.0 / spec.rho_a);
  }
  return spec;
}

namespace {

struct Deriv {
  double s, e, a, i, r, cum;
};

Deriv derivatives(const ModelSpec& spec, const CompartmentState& y) {
  const double force = spec.beta * y.s * y.i / spec.population;
  Deriv d{};
  switch (spec.kind) {
    case ModelKind::Sir:
      d.s = -force;
      d.i = force - spec.gamma * y.i;
      d.r = spec.gamma * y.i;
      d.cum = force;
      break;
    case ModelKind::Seir:
      d.s = -force;
      d.e = force - spec.sigma * y.e;
      d.i = spec.sigma * y.e - spec.gamma * y.i;
      d.r = spec.gamma * y.i;
      d.cum = spec.sigma * y.e;
      break;
    case ModelKind::Seair:
      d.s = -force;
      d.e = force - spec.sigma * y.e;
      d.a = spec.sigma * y.e - spec.rho_a * y.a;
      d.i = spec.rho_a * y.a - spec.gamma * y.i;
      d.r = spec.gamma * y.i;
      d.cum = spec.rho_a * y.a;
      break;
  }
  return d;
}

CompartmentState axpy(const CompartmentState& y, double c, const Deriv& d) {
  CompartmentState out = y;
  out.s += c * d.s;
  out.e += c * d.e;
  out.a += c * d.a;
  out.i += c * d.i;
  out.r += c * d.r;
  out.cum_onset += c * d.cum;
  return out;
}

double clamp_compartment(double x) {
  if (x >= 0.0) return x;
  if (x >= -1e-9) return 0.0;
  throw std::runtime_error(
      "integrate: compartment went negative; step too large or parameters stiff");
}

void check_state(const ModelSpec& spec, CompartmentState& y) {
  y.s = clamp_compartment(y.s);
  y.e = clamp_compartment(y.e);
  y.a = clamp_compartment(y.a);
  y.i = clamp_compartment(y.i);
  y.r = clamp_compartment(y.r);
  const double total = y.s + y.e + y.a + y.i + y.r;
  if (!std::isfinite(total)) {
    throw std::runtime_error("integrate: state became non-finite");
  }
  if (std::fabs(total - spec.population) > 1e-6 * spec.population) {
    throw std::runtime_error("integrate: conservation violated");
  }
}

}  // namespace

std::vector<CompartmentState> integrate(const ModelSpec& spec,
                                        double horizon_weeks, double h,
                                        int keep_every) {
  spec.validate();
  if (!(horizon_weeks > 0.0)) {
    throw std::invalid_argument("integrate: horizon must be > 0");
  }
  if (!(h > 0.0) || h > 0.05) {
    throw std::invalid_argument("integrate: requires 0 < h <= 0.05");
  }
  if (keep_every < 1) {
    throw std::invalid_argument("integrate: keep_every must be >= 1");
  }

  CompartmentState y;
  y.t = 0.0;
  y.e = spec.e0;
  y.a = spec.a0;
  y.i = spec.i0;
  y.s = spec.population - spec.i0 - spec.e0 - spec.a0;

  const auto n_steps = static_cast<std::size_t>(std::ceil(horizon_weeks / h - 1e-12));
  std::vector<CompartmentState> traj;
  traj.reserve(n_steps / keep_every + 2);
  traj.push_back(y);

  for (std::size_t step = 0; step < n_steps; ++step) {
    const Deriv k1 = derivatives(spec, y);
    const Deriv k2 = derivatives(spec, axpy(y, 0.5 * h, k1));
    const Deriv k3 = derivatives(spec, axpy(y, 0.5 * h, k2));
    const Deriv k4 = derivatives(spec, axpy(y, h, k3));
    CompartmentState next = y;
    next.s += h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    next.e += h / 6.0 * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e);
    next.a += h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    next.i += h / 6.0 * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i);
    next.r += h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
    next.cum_onset += h / 6.0 * (k1.cum + 2.0 * k2.cum + 2.0 * k3.cum + k4.cum);
    next.t = (step + 1 == n_steps) ? horizon_weeks : y.t + h;
    check_state(spec, next);
    y = next;
    if ((step + 1) % static_cast<std::size_t>(keep_every) == 0 || step + 1 == n_steps) {
      traj.push_back(y);
    }
  }
  return traj;
}

std::vector<double> weekly_incidence(const std::vector<CompartmentState>& traj) {
  if (traj.size() < 2 || traj.back().t < 1.0) {
    throw std::invalid_argument("weekly_incidence: trajectory must span >= 1 week");
  }
  const int n_weeks = static_cast<int>(std::floor(traj.back().t + 1e-9));

  // cum_onset at integer weeks, interpolated between bracketing states.
  auto cum_at = [&traj](double t_target) {
    auto it = std::lower_bound(traj.begin(), traj.end(), t_target,
                               [](const CompartmentState& s, double t) { return s.t < t; });
    if (it == traj.begin()) return it->cum_onset;
    if (it == traj.end()) return traj.back().cum_onset;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (hi.t == lo.t) return hi.cum_onset;
    const double w = (t_target - lo.t) / (hi.t - lo.t);
    return lo.cum_onset + w * (hi.cum_onset - lo.cum_onset);
  };

  std::vector<double> incidence(n_weeks);
  double prev = cum_at(0.0);
  for (int w = 1; w <= n_weeks; ++w) {
    const double cur = cum_at(static_cast<double>(w));
    incidence[w - 1] = std::max(0.0, cur - prev);
    prev = cur;
  }
  return incidence;
}

std::vector<CaseSeries> sample_observations(const std::vector<double>& mean_incidence,
                                            int n_traj, std::uint64_t seed) {
  if (n_traj < 1) {
    throw std::invalid_argument("sample_observations: n_traj must be >= 1");
  }
  std::vector<CaseSeries> out(n_traj);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n_traj; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k));
    CaseSeries series;
    series.step = 1.0;
    series.origin_label = "sim/" + std::to_string(k);
    series.counts.resize(mean_incidence.size());
    for (std::size_t w = 0; w < mean_incidence.size(); ++w) {
      series.counts[w] = rng.next_poisson(mean_incidence[w]);
    }
    out[k] = std::move(series);
  }
  return out;
}

}  // namespace seqepi
