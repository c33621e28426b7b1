#include "seqepi/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace seqepi {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

json meta_to_json(const DatasetMeta& meta) {
  json j;
  j["model"] = to_string(meta.model.kind);
  j["beta"] = meta.model.beta;
  j["gamma"] = meta.model.gamma;
  j["sigma"] = meta.model.sigma;
  j["rho_a"] = meta.model.rho_a;
  j["N"] = meta.model.population;
  j["I0"] = meta.model.i0;
  j["E0"] = meta.model.e0;
  j["A0"] = meta.model.a0;
  j["true_r0"] = meta.model.r0();
  j["true_si_days"] = meta.model.si_days();
  j["h"] = meta.h;
  j["weeks"] = meta.weeks;
  j["n_traj"] = meta.n_traj;
  j["seed"] = meta.seed;
  j["inflection_week"] = meta.inflection_week;
  j["generator"] = meta.generator;
  return j;
}

DatasetMeta meta_from_json(const json& j) {
  DatasetMeta meta;
  meta.model.kind = model_kind_from_string(j.at("model").get<std::string>());
  meta.model.beta = j.at("beta").get<double>();
  meta.model.gamma = j.at("gamma").get<double>();
  meta.model.sigma = j.value("sigma", 0.0);
  meta.model.rho_a = j.value("rho_a", 0.0);
  meta.model.population = j.at("N").get<double>();
  meta.model.i0 = j.at("I0").get<double>();
  meta.model.e0 = j.value("E0", 0.0);
  meta.model.a0 = j.value("A0", 0.0);
  meta.h = j.at("h").get<double>();
  meta.weeks = j.at("weeks").get<int>();
  meta.n_traj = j.at("n_traj").get<int>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.inflection_week = j.value("inflection_week", 0);
  meta.generator = j.value("generator", "");
  return meta;
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p += ".meta.json";
  return p;
}

}  // namespace

void write_dataset(const std::filesystem::path& csv_path, const Dataset& ds) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_dataset: cannot open " + csv_path.string());
  }
  const int weeks = ds.meta.weeks;
  for (int w = 1; w <= weeks; ++w) {
    out << (w == 1 ? "" : ",") << "week_" << w;
  }
  out << "\n";
  for (const auto& series : ds.series) {
    if (static_cast<int>(series.counts.size()) != weeks) {
      throw std::runtime_error("write_dataset: trajectory length mismatch");
    }
    for (int w = 0; w < weeks; ++w) {
      if (w > 0) out << ',';
      out << series.counts[w];
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error("write_dataset: write failed for " + csv_path.string());
  }

  std::ofstream meta_out(meta_path_for(csv_path), std::ios::binary);
  if (!meta_out) {
    throw std::runtime_error("write_dataset: cannot open metadata sidecar");
  }
  meta_out << meta_to_json(ds.meta).dump(2) << "\n";
}

Dataset read_dataset(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) {
    throw std::runtime_error("read_dataset: cannot open " + csv_path.string());
  }
  Dataset ds;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_dataset: empty file " + csv_path.string());
  }
  int traj_index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    CaseSeries series;
    series.step = 1.0;
    series.origin_label = csv_path.filename().string() + "/" + std::to_string(traj_index);
    for (const std::string& field : split_csv_line(line)) {
      std::int64_t v = 0;
      const std::string t = trim(field);
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw std::runtime_error("read_dataset: bad count '" + field + "'");
      }
      series.counts.push_back(v);
    }
    ds.series.push_back(std::move(series));
    ++traj_index;
  }

  std::ifstream meta_in(meta_path_for(csv_path));
  if (!meta_in) {
    throw std::runtime_error("read_dataset: missing metadata sidecar for " +
                             csv_path.string());
  }
  json j;
  meta_in >> j;
  ds.meta = meta_from_json(j);
  return ds;
}

void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<EstimateRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_estimates_csv: cannot open " + path.string());
  }
  out << "week,r0_median,si_median_days,hdr_level,hdr_mass\n";
  for (const auto& rec : records) {
    out << rec.week << ',' << fmt_double(rec.r0_median) << ','
        << fmt_double(rec.si_median_days) << ',';
    if (rec.hdr_cells.empty() && rec.hdr_mass == 0.0) {
      out << ",";
    } else {
      out << fmt_double(rec.hdr_level) << ',' << fmt_double(rec.hdr_mass);
    }
    out << "\n";
  }
}

void write_grid_csv(const std::filesystem::path& path, const JointGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_grid_csv: cannot open " + path.string());
  }
  out << "r0\\gamma";
  for (const double g : grid.gamma_axis) out << ',' << fmt_double(g);
  out << "\n";
  for (int i = 0; i < grid.n_r0(); ++i) {
    out << fmt_double(grid.r0_axis[i]);
    for (int j = 0; j < grid.n_gamma(); ++j) {
      out << ',' << fmt_double(grid.at(i, j));
    }
    out << "\n";
  }
}

CaseSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_series_csv: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_series_csv: empty file");
  }
  const auto header = split_csv_line(line);
  int count_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == "count") count_col = static_cast<int>(c);
  }
  if (count_col < 0) {
    throw std::runtime_error("read_series_csv: no 'count' column in header");
  }
  CaseSeries series;
  series.step = 1.0;
  series.origin_label = path.filename().string();
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) <= count_col) {
      throw std::runtime_error("read_series_csv: short row '" + line + "'");
    }
    series.counts.push_back(std::stoll(trim(fields[count_col])));
  }
  return series;
}

void write_series_csv(const std::filesystem::path& path, const CaseSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_series_csv: cannot open " + path.string());
  }
  out << "week,count\n";
  for (std::size_t w = 0; w < series.counts.size(); ++w) {
    out << (w + 1) << ',' << series.counts[w] << "\n";
  }
}

namespace {

// Days since civil epoch 1970-01-01 (Howard Hinnant's algorithm).
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

bool parse_iso_date(const std::string& s, long& day_out) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3) return false;
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  day_out = days_from_civil(y, m, d);
  return true;
}

}  // namespace

CaseSeries ingest_real(const std::filesystem::path& path,
                       const std::string& region_filter) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("ingest_real: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("ingest_real: empty file");
  }

  std::map<long, std::int64_t> daily;  // day -> summed count
  std::vector<std::string> bad_rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 3) {
      bad_rows.push_back("line " + std::to_string(line_no) + ": expected date,region,count");
      continue;
    }
    const std::string date_str = trim(fields[0]);
    const std::string region = trim(fields[1]);
    const std::string count_str = trim(fields[2]);
    long day = 0;
    if (!parse_iso_date(date_str, day)) {
      bad_rows.push_back("line " + std::to_string(line_no) + ": bad date '" + date_str + "'");
      continue;
    }
    std::int64_t count = 0;
    const auto [ptr, ec] =
        std::from_chars(count_str.data(), count_str.data() + count_str.size(), count);
    if (ec != std::errc() || ptr != count_str.data() + count_str.size()) {
      bad_rows.push_back("line " + std::to_string(line_no) + ": bad count '" + count_str + "'");
      continue;
    }
    if (count < 0) {
      bad_rows.push_back("line " + std::to_string(line_no) + ": negative count");
      continue;
    }
    if (!region_filter.empty() && region != region_filter) continue;
    daily[day] += count;
  }
  if (!bad_rows.empty()) {
    std::string msg = "ingest_real: rejected rows:";
    for (const auto& r : bad_rows) msg += "\n  " + r;
    throw std::runtime_error(msg);
  }
  if (daily.empty()) {
    throw std::runtime_error("ingest_real: empty series (no rows match region '" +
                             region_filter + "')");
  }

  const long first = daily.begin()->first;
  const long last = daily.rbegin()->first;
  const long span_days = last - first + 1;
  const long n_weeks = span_days / 7;
  if (n_weeks < 1) {
    throw std::runtime_error("ingest_real: less than one whole week of data");
  }

  CaseSeries series;
  series.step = 1.0;
  series.origin_label = region_filter.empty() ? "all" : region_filter;
  series.counts.assign(n_weeks, 0);
  for (const auto& [day, count] : daily) {
    const long offset = day - first;
    const long week = offset / 7;
    if (week < n_weeks) series.counts[week] += count;
  }
  return series;
}

}  // namespace seqepi
