#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqepi/estimator.hpp"
#include "seqepi/harness.hpp"
#include "seqepi/io.hpp"
#include "seqepi/prior.hpp"
#include "seqepi/wp.hpp"

namespace {

using namespace seqepi;

std::vector<int> parse_weeks(const std::string& text) {
  std::vector<int> weeks;
  if (text.empty()) return weeks;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    for (int w = lo; w <= hi; ++w) weeks.push_back(w);
    return weeks;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    weeks.push_back(std::stoi(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return weeks;
}

int cmd_simulate(const std::string& model, double r0, double si_days, double population,
                 double i0, double latent_fraction, int n_traj, int weeks,
                 std::uint64_t seed, double h, const std::string& out) {
  const ModelSpec spec = ModelSpec::from_targets(model_kind_from_string(model), r0,
                                                 si_days, population, i0, latent_fraction);
  generate_dataset_files(spec, n_traj, weeks, seed, out, h);
  std::cout << "wrote " << out << " (" << n_traj << " trajectories x " << weeks
            << " weeks) and " << out << ".meta.json\n";
  return 0;
}

int cmd_estimate(const std::string& dataset, int traj_index, const std::string& series_file,
                 const std::string& method, const std::string& prior_text, double hdr,
                 int wp_k, const std::string& dump_grids, const std::string& out) {
  CaseSeries series;
  if (!series_file.empty()) {
    series = read_series_csv(series_file);
  } else if (!dataset.empty()) {
    const Dataset ds = read_dataset(dataset);
    if (traj_index < 0 || traj_index >= static_cast<int>(ds.series.size())) {
      std::cerr << "trajectory index out of range\n";
      return 1;
    }
    series = ds.series[traj_index];
  } else {
    std::cerr << "estimate: need --series or --dataset\n";
    return 1;
  }

  std::vector<EstimateRecord> records;
  if (method == "seqb") {
    const PriorConfig prior = parse_prior_shorthand(prior_text);
    const JointGrid grid = build_joint_prior(prior.spec, prior.n_r0, prior.n_gamma);
    SequentialOptions opts;
    opts.hdr_level = hdr;
    opts.include_prior_record = true;
    opts.keep_grids = !dump_grids.empty();
    const SequentialResult result = sequential_update(grid, series, opts);
    records = result.records;
    for (const int w : result.gap_weeks) {
      std::cerr << "gap week " << w << ": zero current count, pair skipped\n";
    }
    if (!dump_grids.empty()) {
      std::filesystem::create_directories(dump_grids);
      for (std::size_t i = 0; i < result.posteriors.size(); ++i) {
        const std::string name =
            "grid_week_" + std::to_string(result.records[i].week) + ".csv";
        write_grid_csv(std::filesystem::path(dump_grids) / name, result.posteriors[i]);
      }
    }
  } else if (method == "wp") {
    for (int w = 3; w <= static_cast<int>(series.counts.size()); ++w) {
      CaseSeries window = series;
      window.counts.resize(w);
      const WpEstimate est = wp_fit(window, wp_k);
      EstimateRecord rec;
      rec.week = w;
      rec.r0_median = est.r0_hat;
      rec.si_median_days = est.si_mean_days();
      rec.hdr_level = 0.0;
      records.push_back(rec);
    }
  } else {
    std::cerr << "unknown method '" << method << "' (expected seqb or wp)\n";
    return 1;
  }
  write_estimates_csv(out, records);
  std::cout << "wrote " << out << " (" << records.size() << " rows)\n";
  return 0;
}

int cmd_study(const std::string& config_file, const std::string& dataset,
              const std::string& prior_text, const std::vector<std::string>& methods,
              const std::string& weeks_text, double hdr, std::optional<int> inflection,
              std::uint64_t seed, bool have_seed, const std::string& out) {
  StudyConfig cfg;
  if (!config_file.empty()) cfg = load_study_config(config_file);

  if (!dataset.empty()) cfg.dataset = dataset;
  if (!weeks_text.empty()) cfg.weeks = parse_weeks(weeks_text);
  if (hdr > 0.0) cfg.hdr_level = hdr;
  if (inflection) cfg.inflection_override = inflection;
  if (have_seed) cfg.seed = seed;
  if (!out.empty()) cfg.out = out;

  if (!methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : methods) {
      StudyMethodSpec method;
      if (m == "wp") {
        method.kind = StudyMethodSpec::Kind::WhitePagano;
        method.name = "wp";
      } else if (m == "seqb") {
        if (prior_text.empty()) {
          std::cerr << "--method seqb needs --prior\n";
          return 1;
        }
        method.kind = StudyMethodSpec::Kind::SeqBayes;
        method.name = "seqb:cli";
        method.prior = parse_prior_shorthand(prior_text);
      } else {
        std::cerr << "unknown method '" << m << "'\n";
        return 1;
      }
      cfg.methods.push_back(std::move(method));
    }
  }

  if (cfg.dataset.empty() || cfg.out.empty() || cfg.methods.empty()) {
    std::cerr << "study: dataset, out, and at least one method are required\n";
    return 1;
  }

  const Dataset ds = read_dataset(cfg.dataset);
  const StudyResult result = run_study(cfg, ds);
  write_study_csv(cfg.out, result);
  std::cout << "wrote " << cfg.out.string() << " (" << result.rows.size() << " rows, "
            << result.failures.size() << " failures)\n";
  return 0;
}

int cmd_sensitivity(const std::string& dataset, const std::string& scenarios_file,
                    const std::string& r0_means, const std::string& si_means,
                    const std::string& weeks_text, double rho, double alpha,
                    int grid_cells, const std::string& out) {
  const Dataset ds = read_dataset(dataset);

  std::vector<Scenario> scenarios;
  if (!scenarios_file.empty()) {
    std::ifstream in(scenarios_file);
    if (!in) {
      std::cerr << "cannot open " << scenarios_file << "\n";
      return 1;
    }
    std::string line;
    std::getline(in, line);  // header r0_mean,si_mean
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      scenarios.push_back(
          {std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    }
  } else if (!r0_means.empty() && !si_means.empty()) {
    std::vector<double> r0s, sis;
    std::istringstream rs(r0_means);
    std::string tok;
    while (std::getline(rs, tok, ',')) r0s.push_back(std::stod(tok));
    std::istringstream ss(si_means);
    while (std::getline(ss, tok, ',')) sis.push_back(std::stod(tok));
    for (const double r0 : r0s) {
      for (const double si : sis) scenarios.push_back({r0, si});
    }
  } else {
    // Default: the five misspecification pairs plus the dataset's truth.
    scenarios = misspecification_scenarios();
    scenarios.push_back({ds.meta.model.r0(), ds.meta.model.si_days()});
  }

  SensitivityOptions opts;
  if (!weeks_text.empty()) opts.weeks = parse_weeks(weeks_text);
  opts.rho = rho;
  opts.alpha = alpha;
  opts.n_r0 = opts.n_gamma = grid_cells;

  const auto rows = sensitivity_grid(ds, scenarios, opts);
  write_sensitivity_csv(out, rows);
  std::cout << "wrote " << out << " (" << rows.size() << " scenarios)\n";
  return 0;
}

int cmd_ingest(const std::string& in_file, const std::string& region,
               const std::string& out) {
  const CaseSeries series = ingest_real(in_file, region);
  write_series_csv(out, series);
  std::cout << "wrote " << out << " (" << series.counts.size() << " weekly bins, region '"
            << series.origin_label << "')\n";
  return 0;
}

int cmd_report(const std::string& study_file, const std::string& out) {
  const StudyResult result = read_study_csv(study_file);
  write_box_csv(out, summarize_study(result));
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqepi: joint estimation of R0 and the serial interval from weekly case counts"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate an epidemic dataset");
  std::string sim_model = "sir", sim_out;
  double sim_r0 = 5.0 / 3.0, sim_si = 5.0, sim_n = 1e6, sim_i0 = 10.0, sim_latent = 0.5,
         sim_h = 0.01;
  int sim_traj = 1000, sim_weeks = 15;
  std::uint64_t sim_seed = 1;
  sim->add_option("--model", sim_model, "sir | seir | seair");
  sim->add_option("--r0", sim_r0, "true basic reproduction number");
  sim->add_option("--si", sim_si, "true serial interval in days");
  sim->add_option("--pop", sim_n, "population size N");
  sim->add_option("--i0", sim_i0, "initial infectious count");
  sim->add_option("--latent-fraction", sim_latent,
                  "fraction of the SI spent in the exposed stage (SEIR/SEAIR)");
  sim->add_option("--traj", sim_traj, "number of trajectories");
  sim->add_option("--weeks", sim_weeks, "weeks per trajectory");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--step", sim_h, "RK4 step in weeks");
  sim->add_option("--out", sim_out, "output CSV path")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate R0 and SI for a single series");
  std::string est_dataset, est_series, est_method = "seqb", est_prior, est_dump, est_out;
  int est_traj = 0, est_wp_k = 5;
  double est_hdr = 0.95;
  est->add_option("--dataset", est_dataset, "dataset CSV (with sidecar)");
  est->add_option("--traj-index", est_traj, "row to estimate when using --dataset");
  est->add_option("--series", est_series, "single-series CSV (column 'count')");
  est->add_option("--method", est_method, "seqb | wp");
  est->add_option("--prior", est_prior, "r0=..,si=..[,rho=..][,alpha=..][,grid=..]");
  est->add_option("--hdr", est_hdr, "HDR credible level");
  est->add_option("--wp-k", est_wp_k, "White-Pagano SI truncation in weeks");
  est->add_option("--dump-grids", est_dump, "directory for per-week grid CSV dumps");
  est->add_option("--out", est_out, "output estimates CSV")->required();

  // study
  auto* study = app.add_subcommand("study", "run methods across a dataset");
  std::string study_config, study_dataset, study_prior, study_weeks, study_out;
  std::vector<std::string> study_methods;
  double study_hdr = 0.0;
  int study_inflection = 0;
  std::uint64_t study_seed = 0;
  study->add_option("--config", study_config, "study configuration file");
  study->add_option("--dataset", study_dataset, "dataset CSV (overrides config)");
  study->add_option("--method", study_methods, "seqb | wp (repeatable, overrides config)");
  study->add_option("--prior", study_prior, "prior for --method seqb");
  study->add_option("--weeks", study_weeks, "evaluation weeks, e.g. 1..7 or 5,6,7");
  study->add_option("--hdr", study_hdr, "HDR credible level");
  auto* study_inf_opt =
      study->add_option("--inflection", study_inflection, "inflection week override");
  auto* study_seed_opt = study->add_option("--seed", study_seed, "seed recorded in output");
  study->add_option("--out", study_out, "output study CSV");

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "L1 error across prior scenarios");
  std::string sens_dataset, sens_scenarios, sens_r0s, sens_sis, sens_weeks, sens_out;
  double sens_rho = kDefaultRho, sens_alpha = kDefaultAlpha;
  int sens_grid = kDefaultGridCells;
  sens->add_option("--dataset", sens_dataset)->required();
  sens->add_option("--scenarios", sens_scenarios, "CSV with header r0_mean,si_mean");
  sens->add_option("--r0-means", sens_r0s, "comma list; crossed with --si-means");
  sens->add_option("--si-means", sens_sis, "comma list (days)");
  sens->add_option("--weeks", sens_weeks, "evaluation weeks (default 4,5,6)");
  sens->add_option("--rho", sens_rho, "copula correlation");
  sens->add_option("--alpha", sens_alpha, "marginal shape hyperparameter");
  sens->add_option("--grid", sens_grid, "grid cells per axis");
  sens->add_option("--out", sens_out)->required();

  // ingest
  auto* ing = app.add_subcommand("ingest", "bin a daily-count CSV into weeks");
  std::string ing_in, ing_region, ing_out;
  ing->add_option("--in", ing_in, "daily CSV (date,region,count)")->required();
  ing->add_option("--region", ing_region, "region filter (empty = sum all)");
  ing->add_option("--out", ing_out, "weekly series CSV")->required();

  // report
  auto* rep = app.add_subcommand("report", "aggregate a study CSV into boxplot stats");
  std::string rep_study, rep_out;
  rep->add_option("--study", rep_study, "study CSV from the study subcommand")->required();
  rep->add_option("--out", rep_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_model, sim_r0, sim_si, sim_n, sim_i0, sim_latent, sim_traj,
                          sim_weeks, sim_seed, sim_h, sim_out);
    }
    if (est->parsed()) {
      return cmd_estimate(est_dataset, est_traj, est_series, est_method, est_prior,
                          est_hdr, est_wp_k, est_dump, est_out);
    }
    if (study->parsed()) {
      std::optional<int> inflection;
      if (study_inf_opt->count() > 0) inflection = study_inflection;
      return cmd_study(study_config, study_dataset, study_prior, study_methods,
                       study_weeks, study_hdr, inflection, study_seed,
                       study_seed_opt->count() > 0, study_out);
    }
    if (sens->parsed()) {
      return cmd_sensitivity(sens_dataset, sens_scenarios, sens_r0s, sens_sis, sens_weeks,
                             sens_rho, sens_alpha, sens_grid, sens_out);
    }
    if (ing->parsed()) {
      return cmd_ingest(ing_in, ing_region, ing_out);
    }
    if (rep->parsed()) {
      return cmd_report(rep_study, rep_out);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
