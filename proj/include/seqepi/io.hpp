#ifndef SEQEPI_IO_HPP
#define SEQEPI_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seqepi/estimator.hpp"
#include "seqepi/grid.hpp"
#include "seqepi/models.hpp"

namespace seqepi {

// Sidecar metadata written next to every generated dataset.
struct DatasetMeta {
  ModelSpec model;
  double h = 0.01;
  int weeks = 0;
  int n_traj = 0;
  std::uint64_t seed = 0;
  int inflection_week = 0;  // from the deterministic mean curve
  std::string generator;    // human-readable description of the noise model
};

struct Dataset {
  std::vector<CaseSeries> series;
  DatasetMeta meta;
};

// CSV layout: header week_1..week_W, one row per trajectory. The metadata
// sidecar lands at <path>.meta.json.
void write_dataset(const std::filesystem::path& csv_path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& csv_path);

// week,r0_median,si_median_days,hdr_level,hdr_mass. Rows without an HDR
// (hdr_cells empty and hdr_mass 0) leave the last two fields blank, which is
// how White-Pagano estimates are serialized through the same schema.
void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<EstimateRecord>& records);

// Matrix dump of a grid: first row gamma cell centers, first column R0 cell
// centers, body the cell masses.
void write_grid_csv(const std::filesystem::path& path, const JointGrid& grid);

// Single-series CSV with header "count" (optionally "week,count").
CaseSeries read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const CaseSeries& series);

// Daily-count CSV (header date,region,count; ISO-8601 dates) -> weekly
// CaseSeries. Rows not matching region_filter are dropped (empty filter
// keeps everything, summing regions per day). Missing dates inside the span
// count as zero. Unparseable rows or negative counts raise
// std::runtime_error naming the offending line numbers. Trailing days that
// do not fill a whole 7-day bin are dropped.
CaseSeries ingest_real(const std::filesystem::path& path,
                       const std::string& region_filter);

}  // namespace seqepi

#endif
