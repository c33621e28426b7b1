#ifndef SEQEPI_GRID_HPP
#define SEQEPI_GRID_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace seqepi {

// Selects between the plain loop and the OpenMP kernel. Both produce
// bit-identical results; reductions use a fixed block structure so the
// outcome does not depend on thread count or scheduling.
enum class ExecMode { Serial, Parallel };

// Blocked Neumaier summation. Deterministic for a given input regardless of
// threading, and accurate to a few ulps even for ~1e6 terms.
double deterministic_sum(std::span<const double> xs);

// Discretized joint distribution over (R0, gamma). Axes hold cell centers;
// widths are kept alongside so medians and HDRs can interpolate. mass is
// row-major with R0 as the slow index.
struct JointGrid {
  std::vector<double> r0_axis;
  std::vector<double> gamma_axis;
  std::vector<double> r0_width;
  std::vector<double> gamma_width;
  std::vector<double> mass;

  int n_r0() const { return static_cast<int>(r0_axis.size()); }
  int n_gamma() const { return static_cast<int>(gamma_axis.size()); }
  std::size_t size() const { return mass.size(); }

  double& at(int i, int j) { return mass[static_cast<std::size_t>(i) * gamma_axis.size() + j]; }
  double at(int i, int j) const { return mass[static_cast<std::size_t>(i) * gamma_axis.size() + j]; }

  double cell_area(int i, int j) const { return r0_width[i] * gamma_width[j]; }

  // Total mass via deterministic_sum.
  double total_mass() const;

  // Scales mass so it sums to 1. Throws std::runtime_error on nonpositive or
  // non-finite total.
  void normalize();

  // Uniform cell layout over [r0_lo, r0_hi] x [gamma_lo, gamma_hi] with all
  // mass zero. Throws std::invalid_argument if either axis has < 2 cells.
  static JointGrid uniform(double r0_lo, double r0_hi, int n_r0,
                           double gamma_lo, double gamma_hi, int n_gamma);
};

}  // namespace seqepi

#endif
