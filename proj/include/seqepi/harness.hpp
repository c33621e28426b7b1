#ifndef SEQEPI_HARNESS_HPP
#define SEQEPI_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqepi/io.hpp"
#include "seqepi/prior.hpp"

namespace seqepi {

// Integrates the model, samples Poisson observations around the deterministic
// weekly incidence, and writes CSV + metadata. Idempotent for a fixed seed.
Dataset generate_dataset(const ModelSpec& spec, int n_traj, int weeks,
                         std::uint64_t seed, double h = 0.01);
void generate_dataset_files(const ModelSpec& spec, int n_traj, int weeks,
                            std::uint64_t seed, const std::filesystem::path& out_csv,
                            double h = 0.01);

// Week index (1-based, labeling the left week of the steepest rise) where the
// first difference of the mean-across-trajectories weekly incidence peaks.
// Ties resolve to the latest such week.
int detect_inflection(std::span<const double> mean_incidence);
int detect_inflection(const Dataset& ds);

struct StudyMethodSpec {
  enum class Kind { SeqBayes, WhitePagano };
  Kind kind = Kind::SeqBayes;
  std::string name;        // label written into the output rows
  PriorConfig prior;       // used by SeqBayes only
};

struct StudyConfig {
  std::filesystem::path dataset;
  std::vector<StudyMethodSpec> methods;
  std::vector<int> weeks;          // evaluation weeks; empty = 1..inflection
  double hdr_level = 0.95;
  std::optional<int> inflection_override;
  std::uint64_t seed = 0;          // recorded in outputs; estimation is deterministic
  int wp_trunc_k = 5;
  std::filesystem::path out;
};

struct StudyRow {
  int trajectory = 0;
  std::string method;
  int week = 0;
  double r0_hat = 0.0;
  double si_hat_days = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;       // sorted by (trajectory, method order, week)
  std::vector<std::string> failures;
  std::vector<int> weeks_evaluated;
};

// Runs every method on weeks 1..w for each requested w of each trajectory.
// Per-trajectory failures are recorded and the study continues. Trajectories
// run in parallel; output order is deterministic.
StudyResult run_study(const StudyConfig& config, const Dataset& ds);

void write_study_csv(const std::filesystem::path& path, const StudyResult& result);
StudyResult read_study_csv(const std::filesystem::path& path);

struct Scenario {
  double r0_mean = 0.0;
  double si_mean_days = 0.0;
};

struct SensitivityRow {
  double r0_mean = 0.0;
  double si_mean_days = 0.0;
  double l1_r0 = 0.0;
  double l1_si = 0.0;
};

struct SensitivityOptions {
  std::vector<int> weeks = {4, 5, 6};
  double alpha = kDefaultAlpha;
  double rho = kDefaultRho;
  int n_r0 = kDefaultGridCells;
  int n_gamma = kDefaultGridCells;
};

// Mean-over-trajectories L1 error of the weekly medians against the dataset's
// true parameters, one row per prior scenario. Contour-ready.
std::vector<SensitivityRow> sensitivity_grid(const Dataset& ds,
                                             std::span<const Scenario> scenarios,
                                             const SensitivityOptions& opts = {});

void write_sensitivity_csv(const std::filesystem::path& path,
                           const std::vector<SensitivityRow>& rows);

// The five misspecified (SI days, R0) pairs studied alongside the
// well-specified case.
std::vector<Scenario> misspecification_scenarios();

// Boxplot-ready aggregation of a study: one row per (method, week, parameter)
// with quartiles and 1.5 IQR whisker bounds.
struct BoxRow {
  std::string method;
  int week = 0;
  std::string param;  // "r0" | "si"
  int n = 0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double whisker_lo = 0.0, whisker_hi = 0.0;
};
std::vector<BoxRow> summarize_study(const StudyResult& result);
void write_box_csv(const std::filesystem::path& path, const std::vector<BoxRow>& rows);

// Plain-text study configuration: `key = value` lines, '#' comments,
// `method = wp` / `method = seqb <name>` entries and
// `prior <name> = r0=..,si=..[,rho=..][,alpha=..]` definitions.
StudyConfig parse_study_config(const std::string& text);
StudyConfig load_study_config(const std::filesystem::path& path);

// Parses the CLI prior shorthand "r0=1.67,si=5,rho=-0.1,alpha=2".
PriorConfig parse_prior_shorthand(const std::string& text);

}  // namespace seqepi

#endif
