#include "seqepi/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "seqepi/estimator.hpp"
#include "seqepi/wp.hpp"

namespace seqepi {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> mean_incidence_of(const Dataset& ds) {
  if (ds.series.empty()) {
    throw std::invalid_argument("dataset has no trajectories");
  }
  const std::size_t weeks = ds.series.front().counts.size();
  std::vector<double> mean(weeks, 0.0);
  for (const auto& s : ds.series) {
    for (std::size_t w = 0; w < weeks && w < s.counts.size(); ++w) {
      mean[w] += static_cast<double>(s.counts[w]);
    }
  }
  for (double& v : mean) v /= static_cast<double>(ds.series.size());
  return mean;
}

}  // namespace

Dataset generate_dataset(const ModelSpec& spec, int n_traj, int weeks,
                         std::uint64_t seed, double h) {
  if (n_traj < 1) {
    throw std::invalid_argument("generate_dataset: n_traj must be >= 1");
  }
  if (weeks < 1) {
    throw std::invalid_argument("generate_dataset: weeks must be >= 1");
  }
  const auto traj = integrate(spec, static_cast<double>(weeks), h);
  const std::vector<double> mean_inc = weekly_incidence(traj);

  Dataset ds;
  ds.series = sample_observations(mean_inc, n_traj, seed);
  ds.meta.model = spec;
  ds.meta.h = h;
  ds.meta.weeks = weeks;
  ds.meta.n_traj = n_traj;
  ds.meta.seed = seed;
  ds.meta.inflection_week = detect_inflection(mean_inc);
  ds.meta.generator =
      "deterministic RK4 mean incidence with independent Poisson observation "
      "noise per week per trajectory";
  return ds;
}

void generate_dataset_files(const ModelSpec& spec, int n_traj, int weeks,
                            std::uint64_t seed, const std::filesystem::path& out_csv,
                            double h) {
  write_dataset(out_csv, generate_dataset(spec, n_traj, weeks, seed, h));
}

int detect_inflection(std::span<const double> mean_incidence) {
  if (mean_incidence.size() < 2) {
    throw std::invalid_argument("detect_inflection: needs >= 2 weeks");
  }
  int best_week = 1;
  double best_diff = mean_incidence[1] - mean_incidence[0];
  for (std::size_t w = 1; w + 1 < mean_incidence.size(); ++w) {
    const double diff = mean_incidence[w + 1] - mean_incidence[w];
    if (diff >= best_diff) {
      best_diff = diff;
      best_week = static_cast<int>(w) + 1;
    }
  }
  return best_week;
}

int detect_inflection(const Dataset& ds) {
  const std::vector<double> mean = mean_incidence_of(ds);
  return detect_inflection(std::span<const double>(mean));
}

StudyResult run_study(const StudyConfig& config, const Dataset& ds) {
  if (ds.series.empty()) {
    throw std::invalid_argument("run_study: dataset has no trajectories");
  }
  if (config.methods.empty()) {
    throw std::invalid_argument("run_study: no methods configured");
  }

  std::vector<int> weeks = config.weeks;
  if (weeks.empty()) {
    const int inflection = config.inflection_override
                               ? *config.inflection_override
                               : (ds.meta.inflection_week > 0 ? ds.meta.inflection_week
                                                              : detect_inflection(ds));
    for (int w = 1; w <= inflection; ++w) weeks.push_back(w);
  }
  if (weeks.empty()) {
    throw std::invalid_argument("run_study: empty week list");
  }
  for (std::size_t i = 1; i < weeks.size(); ++i) {
    if (weeks[i] <= weeks[i - 1]) {
      throw std::invalid_argument("run_study: weeks must be strictly increasing");
    }
  }
  const int max_week = weeks.back();

  // Priors are shared across trajectories; build each once.
  std::vector<JointGrid> priors(config.methods.size());
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const auto& method = config.methods[m];
    if (method.kind == StudyMethodSpec::Kind::SeqBayes) {
      priors[m] = build_joint_prior(method.prior.spec, method.prior.n_r0,
                                    method.prior.n_gamma);
    }
  }

  const int n_traj = static_cast<int>(ds.series.size());
  const std::size_t slots_per_traj = config.methods.size() * weeks.size();
  std::vector<StudyRow> rows(static_cast<std::size_t>(n_traj) * slots_per_traj);
  std::vector<std::uint8_t> row_ok(rows.size(), 0);
  std::vector<std::string> failures(static_cast<std::size_t>(n_traj));

#pragma omp parallel for schedule(dynamic)
  for (int traj = 0; traj < n_traj; ++traj) {
    const CaseSeries& series = ds.series[traj];
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const auto& method = config.methods[m];
      const std::size_t base = traj * slots_per_traj + m * weeks.size();
      try {
        if (method.kind == StudyMethodSpec::Kind::SeqBayes) {
          SequentialOptions opts;
          opts.compute_hdr = false;
          opts.include_prior_record = true;
          opts.max_week = max_week;
          opts.mode = ExecMode::Serial;  // trajectories already run in parallel
          const SequentialResult seq = sequential_update(priors[m], series, opts);
          for (std::size_t wi = 0; wi < weeks.size(); ++wi) {
            const int want = weeks[wi];
            const EstimateRecord* found = nullptr;
            for (const auto& rec : seq.records) {
              if (rec.week == want) {
                found = &rec;
                break;
              }
            }
            if (found == nullptr) {
              throw std::runtime_error("no estimate for week " + std::to_string(want));
            }
            rows[base + wi] = {traj, method.name, want, found->r0_median,
                               found->si_median_days};
            row_ok[base + wi] = 1;
          }
        } else {
          // Each window fits independently; a week with too little data
          // (the fit needs >= 3 observations) fails alone.
          for (std::size_t wi = 0; wi < weeks.size(); ++wi) {
            const int want = weeks[wi];
            try {
              if (want > static_cast<int>(series.counts.size())) {
                throw std::runtime_error("beyond series length");
              }
              CaseSeries window = series;
              window.counts.resize(want);
              const WpEstimate est = wp_fit(window, config.wp_trunc_k);
              rows[base + wi] = {traj, method.name, want, est.r0_hat,
                                 est.si_mean_days()};
              row_ok[base + wi] = 1;
            } catch (const std::exception& week_ex) {
              failures[traj] += std::string(failures[traj].empty() ? "" : "; ") +
                                method.name + " week " + std::to_string(want) +
                                ": " + week_ex.what();
            }
          }
        }
      } catch (const std::exception& ex) {
        failures[traj] += std::string(failures[traj].empty() ? "" : "; ") +
                          method.name + ": " + ex.what();
      }
    }
  }

  StudyResult result;
  result.weeks_evaluated = weeks;
  result.rows.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (row_ok[i]) result.rows.push_back(std::move(rows[i]));
  }
  for (int traj = 0; traj < n_traj; ++traj) {
    if (!failures[traj].empty()) {
      result.failures.push_back("trajectory " + std::to_string(traj) + ": " +
                                failures[traj]);
    }
  }
  return result;
}

void write_study_csv(const std::filesystem::path& path, const StudyResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_study_csv: cannot open " + path.string());
  }
  out << "trajectory,method,week,r0_hat,si_hat_days\n";
  for (const auto& row : result.rows) {
    out << row.trajectory << ',' << row.method << ',' << row.week << ','
        << fmt_double(row.r0_hat) << ',' << fmt_double(row.si_hat_days) << "\n";
  }
  for (const auto& failure : result.failures) {
    out << "# failure: " << failure << "\n";
  }
}

StudyResult read_study_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_study_csv: cannot open " + path.string());
  }
  StudyResult result;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_study_csv: empty file");
  }
  std::map<int, bool> weeks_seen;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# failure: ";
      if (line.rfind(tag, 0) == 0) result.failures.push_back(line.substr(tag.size()));
      continue;
    }
    std::istringstream ls(line);
    StudyRow row;
    std::string field;
    std::getline(ls, field, ',');
    row.trajectory = std::stoi(field);
    std::getline(ls, row.method, ',');
    std::getline(ls, field, ',');
    row.week = std::stoi(field);
    std::getline(ls, field, ',');
    row.r0_hat = std::stod(field);
    std::getline(ls, field, ',');
    row.si_hat_days = std::stod(field);
    weeks_seen[row.week] = true;
    result.rows.push_back(std::move(row));
  }
  for (const auto& [w, seen] : weeks_seen) result.weeks_evaluated.push_back(w);
  return result;
}

std::vector<Scenario> misspecification_scenarios() {
  return {{2.0, 4.0}, {1.33, 4.0}, {2.17, 6.5}, {3.0, 2.0}, {3.0, 8.0}};
}

std::vector<SensitivityRow> sensitivity_grid(const Dataset& ds,
                                             std::span<const Scenario> scenarios,
                                             const SensitivityOptions& opts) {
  if (scenarios.empty()) {
    throw std::invalid_argument("sensitivity_grid: no scenarios");
  }
  if (opts.weeks.empty()) {
    throw std::invalid_argument("sensitivity_grid: no evaluation weeks");
  }
  const double true_r0 = ds.meta.model.r0();
  const double true_si_days = ds.meta.model.si_days();
  const int max_week = *std::max_element(opts.weeks.begin(), opts.weeks.end());

  std::vector<SensitivityRow> rows(scenarios.size());
  const int n_traj = static_cast<int>(ds.series.size());

  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const Scenario& sc = scenarios[s];
    const PriorSpec prior_spec =
        prior_from_targets(sc.r0_mean, sc.si_mean_days, opts.alpha, opts.rho);
    const JointGrid prior = build_joint_prior(prior_spec, opts.n_r0, opts.n_gamma);

    std::vector<double> l1_r0(n_traj, 0.0), l1_si(n_traj, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int traj = 0; traj < n_traj; ++traj) {
      SequentialOptions seq_opts;
      seq_opts.compute_hdr = false;
      seq_opts.include_prior_record = true;
      seq_opts.max_week = max_week;
      seq_opts.mode = ExecMode::Serial;
      const SequentialResult seq = sequential_update(prior, ds.series[traj], seq_opts);
      for (const int want : opts.weeks) {
        for (const auto& rec : seq.records) {
          if (rec.week == want) {
            l1_r0[traj] += std::fabs(rec.r0_median - true_r0);
            l1_si[traj] += std::fabs(rec.si_median_days - true_si_days);
            break;
          }
        }
      }
    }
    rows[s].r0_mean = sc.r0_mean;
    rows[s].si_mean_days = sc.si_mean_days;
    rows[s].l1_r0 = deterministic_sum(l1_r0) / n_traj;
    rows[s].l1_si = deterministic_sum(l1_si) / n_traj;
  }
  return rows;
}

void write_sensitivity_csv(const std::filesystem::path& path,
                           const std::vector<SensitivityRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_sensitivity_csv: cannot open " + path.string());
  }
  out << "r0_mean,si_mean,L1_r0,L1_si\n";
  for (const auto& row : rows) {
    out << fmt_double(row.r0_mean) << ',' << fmt_double(row.si_mean_days) << ','
        << fmt_double(row.l1_r0) << ',' << fmt_double(row.l1_si) << "\n";
  }
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<BoxRow> summarize_study(const StudyResult& result) {
  // (method, week) -> samples, preserving first-seen method order.
  std::vector<std::string> method_order;
  std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const auto& row : result.rows) {
    if (std::find(method_order.begin(), method_order.end(), row.method) ==
        method_order.end()) {
      method_order.push_back(row.method);
    }
    auto& g = groups[{row.method, row.week}];
    g.first.push_back(row.r0_hat);
    g.second.push_back(row.si_hat_days);
  }

  std::vector<BoxRow> out;
  for (const auto& method : method_order) {
    for (auto& [key, g] : groups) {
      if (key.first != method) continue;
      for (int which = 0; which < 2; ++which) {
        std::vector<double>& vals = which == 0 ? g.first : g.second;
        std::sort(vals.begin(), vals.end());
        BoxRow box;
        box.method = method;
        box.week = key.second;
        box.param = which == 0 ? "r0" : "si";
        box.n = static_cast<int>(vals.size());
        box.q1 = quantile_sorted(vals, 0.25);
        box.median = quantile_sorted(vals, 0.5);
        box.q3 = quantile_sorted(vals, 0.75);
        const double iqr = box.q3 - box.q1;
        box.whisker_lo = box.q1 - 1.5 * iqr;
        box.whisker_hi = box.q3 + 1.5 * iqr;
        out.push_back(std::move(box));
      }
    }
  }
  return out;
}

void write_box_csv(const std::filesystem::path& path, const std::vector<BoxRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("write_box_csv: cannot open " + path.string());
  }
  out << "method,week,param,n,q1,median,q3,whisker_lo,whisker_hi\n";
  for (const auto& row : rows) {
    out << row.method << ',' << row.week << ',' << row.param << ',' << row.n << ','
        << fmt_double(row.q1) << ',' << fmt_double(row.median) << ','
        << fmt_double(row.q3) << ',' << fmt_double(row.whisker_lo) << ','
        << fmt_double(row.whisker_hi) << "\n";
  }
}

PriorConfig parse_prior_shorthand(const std::string& text) {
  double r0_mean = 0.0, si_days = 0.0;
  double rho = kDefaultRho, alpha = kDefaultAlpha;
  int n_r0 = kDefaultGridCells, n_gamma = kDefaultGridCells;
  bool have_r0 = false, have_si = false;

  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("parse_prior_shorthand: expected key=value in '" +
                                  item + "'");
    }
    const std::string key = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    double v = 0.0;
    try {
      v = std::stod(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_prior_shorthand: bad value '" + value + "'");
    }
    if (key == "r0") {
      r0_mean = v;
      have_r0 = true;
    } else if (key == "si") {
      si_days = v;
      have_si = true;
    } else if (key == "rho") {
      rho = v;
    } else if (key == "alpha") {
      alpha = v;
    } else if (key == "grid") {
      n_r0 = n_gamma = static_cast<int>(v);
    } else {
      throw std::invalid_argument("parse_prior_shorthand: unknown key '" + key + "'");
    }
  }
  if (!have_r0 || !have_si) {
    throw std::invalid_argument("parse_prior_shorthand: r0 and si are required");
  }
  PriorConfig cfg;
  cfg.spec = prior_from_targets(r0_mean, si_days, alpha, rho);
  cfg.n_r0 = n_r0;
  cfg.n_gamma = n_gamma;
  return cfg;
}

StudyConfig parse_study_config(const std::string& text) {
  StudyConfig cfg;
  std::map<std::string, PriorConfig> priors;
  std::vector<std::pair<std::string, std::string>> method_requests;  // kind, prior name

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("study config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key_part = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    std::istringstream key_stream(key_part);
    std::string key, qualifier;
    key_stream >> key >> qualifier;

    if (key == "dataset") {
      cfg.dataset = value;
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "hdr") {
      cfg.hdr_level = std::stod(value);
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "wp_k") {
      cfg.wp_trunc_k = std::stoi(value);
    } else if (key == "inflection") {
      cfg.inflection_override = std::stoi(value);
    } else if (key == "weeks") {
      cfg.weeks.clear();
      std::string spec_text = value;
      const auto dots = spec_text.find("..");
      if (dots != std::string::npos) {
        const int lo = std::stoi(spec_text.substr(0, dots));
        const int hi = std::stoi(spec_text.substr(dots + 2));
        for (int w = lo; w <= hi; ++w) cfg.weeks.push_back(w);
      } else {
        std::istringstream ws(spec_text);
        std::string tok;
        while (std::getline(ws, tok, ',')) {
          if (!trim(tok).empty()) cfg.weeks.push_back(std::stoi(trim(tok)));
        }
      }
    } else if (key == "prior") {
      if (qualifier.empty()) {
        throw std::invalid_argument("study config line " + std::to_string(line_no) +
                                    ": prior needs a name (prior <name> = ...)");
      }
      priors[qualifier] = parse_prior_shorthand(value);
    } else if (key == "method") {
      std::istringstream vs(value);
      std::string kind, prior_name;
      vs >> kind >> prior_name;
      method_requests.emplace_back(kind, prior_name);
    } else {
      throw std::invalid_argument("study config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }

  for (const auto& [kind, prior_name] : method_requests) {
    StudyMethodSpec method;
    if (kind == "wp") {
      method.kind = StudyMethodSpec::Kind::WhitePagano;
      method.name = "wp";
    } else if (kind == "seqb") {
      method.kind = StudyMethodSpec::Kind::SeqBayes;
      if (prior_name.empty()) {
        throw std::invalid_argument("study config: seqb method needs a prior name");
      }
      const auto it = priors.find(prior_name);
      if (it == priors.end()) {
        throw std::invalid_argument("study config: prior '" + prior_name +
                                    "' is not defined");
      }
      method.name = "seqb:" + prior_name;
      method.prior = it->second;
    } else {
      throw std::invalid_argument("study config: unknown method '" + kind + "'");
    }
    cfg.methods.push_back(std::move(method));
  }
  return cfg;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_study_config: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_study_config(buf.str());
}

}  // namespace seqepi
