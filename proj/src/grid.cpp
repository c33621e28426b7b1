#include "seqepi/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace seqepi {

namespace {

constexpr std::size_t kSumBlock = 4096;

double neumaier_sum(const double* xs, std::size_t n) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = sum + xs[i];
    if (std::fabs(sum) >= std::fabs(xs[i])) {
      comp += (sum - t) + xs[i];
    } else {
      comp += (xs[i] - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace

double deterministic_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n <= kSumBlock) return neumaier_sum(xs.data(), n);

  const std::size_t n_blocks = (n + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(n_blocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kSumBlock;
    const std::size_t len = (lo + kSumBlock <= n) ? kSumBlock : n - lo;
    partial[b] = neumaier_sum(xs.data() + lo, len);
  }
  return neumaier_sum(partial.data(), n_blocks);
}

double JointGrid::total_mass() const {
  return deterministic_sum(mass);
}

void JointGrid::normalize() {
  const double total = total_mass();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::runtime_error("JointGrid::normalize: total mass is not positive");
  }
  const double inv = 1.0 / total;
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(mass.size()); ++c) {
    mass[c] *= inv;
  }
}

JointGrid JointGrid::uniform(double r0_lo, double r0_hi, int n_r0,
                             double gamma_lo, double gamma_hi, int n_gamma) {
  if (n_r0 < 2 || n_gamma < 2) {
    throw std::invalid_argument("JointGrid::uniform: each axis needs >= 2 cells");
  }
  if (!(r0_lo < r0_hi) || !(gamma_lo < gamma_hi)) {
    throw std::invalid_argument("JointGrid::uniform: empty axis range");
  }
  JointGrid g;
  const double dr = (r0_hi - r0_lo) / n_r0;
  const double dg = (gamma_hi - gamma_lo) / n_gamma;
  g.r0_axis.resize(n_r0);
  g.r0_width.assign(n_r0, dr);
  for (int i = 0; i < n_r0; ++i) g.r0_axis[i] = r0_lo + (i + 0.5) * dr;
  g.gamma_axis.resize(n_gamma);
  g.gamma_width.assign(n_gamma, dg);
  for (int j = 0; j < n_gamma; ++j) g.gamma_axis[j] = gamma_lo + (j + 0.5) * dg;
  g.mass.assign(static_cast<std::size_t>(n_r0) * n_gamma, 0.0);
  return g;
}

}  // namespace seqepi
