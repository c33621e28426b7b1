#include "seqepi/estimator.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "seqepi/prior.hpp"

using namespace seqepi;

namespace {

JointGrid tiny_grid(const std::vector<double>& r0_centers,
                    const std::vector<double>& gamma_centers) {
  JointGrid g;
  g.r0_axis = r0_centers;
  g.gamma_axis = gamma_centers;
  g.r0_width.assign(r0_centers.size(), 1.0);
  g.gamma_width.assign(gamma_centers.size(), 0.4);
  g.mass.assign(r0_centers.size() * gamma_centers.size(), 0.0);
  return g;
}

CaseSeries make_series(std::vector<std::int64_t> counts, double step = 1.0) {
  CaseSeries s;
  s.counts = std::move(counts);
  s.step = step;
  return s;
}

}  // namespace

TEST_CASE("poisson_log_lik mean structure") {
  // r0 = 1 makes the exponent vanish: the mean equals the current count.
  // log pmf at the mean k with mean k: k log k - k - lgamma(k+1).
  const std::int64_t k = 17;
  const double want = k * std::log(static_cast<double>(k)) - k - std::lgamma(k + 1.0);
  CHECK(poisson_log_lik(k, k, 1.0, 2.3, 1.0) == doctest::Approx(want).epsilon(1e-14));

  // lambda = 10 exp(14/15) = 25.429716378079545 for the Influenza 1 pair.
  const double theta = 1.0 * 1.4 * (5.0 / 3.0 - 1.0);
  const double lambda = 10.0 * std::exp(theta);
  CHECK(std::fabs(lambda - 25.429716378079545) <= 1e-9 * 25.429716378079545);
  const double ll = poisson_log_lik(20, 10, 5.0 / 3.0, 1.4, 1.0);
  const double direct = 20.0 * std::log(lambda) - lambda - std::lgamma(21.0);
  CHECK(ll == doctest::Approx(direct).epsilon(1e-12));

  // The log-likelihood over i_next peaks at floor(lambda).
  double best = -1e300;
  std::int64_t best_i = -1;
  for (std::int64_t i = 0; i <= 100; ++i) {
    const double v = poisson_log_lik(i, 10, 5.0 / 3.0, 1.4, 1.0);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  CHECK(best_i == static_cast<std::int64_t>(std::floor(lambda)));

  CHECK_THROWS_AS(poisson_log_lik(3, 0, 1.5, 1.4, 1.0), std::domain_error);
  CHECK_THROWS_AS(poisson_log_lik(3, 5, 1.5, 1.4, 0.0), std::domain_error);
}

TEST_CASE("reduced kernel equals the full pmf up to a theta-free shift") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> theta_d(-2.0, 3.0);
  std::uniform_int_distribution<std::int64_t> count_d(1, 500);
  for (int rep = 0; rep < 200; ++rep) {
    const std::int64_t i_curr = count_d(rng);
    const std::int64_t i_next = count_d(rng);
    const double t1 = theta_d(rng);
    const double t2 = theta_d(rng);
    const double full_diff = poisson_log_lik_theta(i_next, i_curr, t1) -
                             poisson_log_lik_theta(i_next, i_curr, t2);
    const double s = static_cast<double>(i_next);
    const double t = static_cast<double>(i_curr);
    const double reduced_diff =
        detail::reduced_loglik(s, t, t1) - detail::reduced_loglik(s, t, t2);
    CHECK(full_diff == doctest::Approx(reduced_diff).epsilon(1e-9));
  }
}

TEST_CASE("marginal_median interpolation") {
  // Uniform over [0.001, 10]: median at the midpoint of the support.
  PriorSpec spec = prior_from_targets(5.0 / 3.0, 5.0);
  JointGrid uniform = JointGrid::uniform(0.001, 10.0, 100, 0.001, 5.0, 80);
  uniform.mass.assign(uniform.mass.size(), 1.0);
  uniform.normalize();
  const double cell = uniform.r0_width[0];
  CHECK(std::fabs(marginal_median(uniform, GridAxis::R0) - 5.0005) <= cell);

  // Point mass at a cell center is recovered exactly.
  JointGrid point = tiny_grid({1.0, 2.0, 3.0}, {1.0, 1.4, 2.0});
  point.at(1, 1) = 1.0;
  CHECK(marginal_median(point, GridAxis::R0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(marginal_median(point, GridAxis::Gamma) == doctest::Approx(1.4).epsilon(1e-14));

  // A symmetric unimodal grid pins the median to within a cell of the mode.
  JointGrid bump = JointGrid::uniform(0.0, 8.0, 64, 0.0, 4.0, 32);
  for (int i = 0; i < bump.n_r0(); ++i) {
    const double zr = (bump.r0_axis[i] - 3.7) / 0.9;
    for (int j = 0; j < bump.n_gamma(); ++j) {
      const double zg = (bump.gamma_axis[j] - 1.9) / 0.5;
      bump.at(i, j) = std::exp(-0.5 * (zr * zr + zg * zg));
    }
  }
  bump.normalize();
  int mode_i = 0;
  double mode_mass = 0.0;
  const auto marg_r = grid_marginal(bump, GridAxis::R0);
  for (std::size_t i = 0; i < marg_r.size(); ++i) {
    if (marg_r[i] > mode_mass) {
      mode_mass = marg_r[i];
      mode_i = static_cast<int>(i);
    }
  }
  CHECK(std::fabs(marginal_median(bump, GridAxis::R0) - bump.r0_axis[mode_i]) <=
        bump.r0_width[0]);

  const JointGrid prior = build_joint_prior(spec, 128, 128);
  const double med = marginal_median(prior, GridAxis::R0);
  CHECK(med > prior.r0_axis.front());
  CHECK(med < prior.r0_axis.back());
}

TEST_CASE("hdr_region basics") {
  JointGrid uniform = JointGrid::uniform(0.0, 1.0, 10, 0.0, 1.0, 10);
  uniform.mass.assign(uniform.mass.size(), 1.0);
  uniform.normalize();
  double mass = 0.0;
  const auto cells = hdr_region(uniform, 0.95, &mass);
  CHECK(cells.size() == 95);  // ceil(0.95 * 100)
  CHECK(mass >= 0.95);

  // Nesting: the 50% region is contained in the 95% region.
  const PriorSpec spec = prior_from_targets(5.0 / 3.0, 5.0, 2.0, -0.5);
  const JointGrid prior = build_joint_prior(spec, 96, 96);
  const auto hdr50 = hdr_region(prior, 0.5);
  const auto hdr95 = hdr_region(prior, 0.95);
  CHECK(hdr50.size() < hdr95.size());
  for (const auto c : hdr50) {
    CHECK(std::find(hdr95.begin(), hdr95.end(), c) != hdr95.end());
  }

  // Point mass: one cell at any level.
  JointGrid point = tiny_grid({1.0, 2.0, 3.0}, {1.0, 1.4, 2.0});
  point.at(2, 0) = 1.0;
  CHECK(hdr_region(point, 0.5).size() == 1);
  CHECK(hdr_region(point, 0.95).size() == 1);
  CHECK(hdr_region(point, 0.95).front() == 2u * 3u + 0u);

  CHECK_THROWS_AS(hdr_region(point, 0.0), std::domain_error);
  CHECK_THROWS_AS(hdr_region(point, 1.0), std::domain_error);
}

TEST_CASE("hdr minimality on sorted densities") {
  const PriorSpec spec = prior_from_targets(2.0, 4.0);
  const JointGrid prior = build_joint_prior(spec, 64, 64);
  double mass = 0.0;
  const auto cells = hdr_region(prior, 0.9, &mass);
  CHECK(mass >= 0.9);
  // Dropping the least-dense member of the region must fall below the level;
  // that is exactly the minimal-count property for threshold sets.
  double min_density = 1e300;
  for (const auto c : cells) {
    const int i = static_cast<int>(c) / prior.n_gamma();
    const int j = static_cast<int>(c) % prior.n_gamma();
    min_density = std::min(min_density, prior.at(i, j) / prior.cell_area(i, j));
  }
  double dropped = mass;
  for (const auto c : cells) {
    const int i = static_cast<int>(c) / prior.n_gamma();
    const int j = static_cast<int>(c) % prior.n_gamma();
    if (prior.at(i, j) / prior.cell_area(i, j) == min_density) {
      dropped = mass - prior.at(i, j);
      break;
    }
  }
  CHECK(dropped < 0.9);
}

TEST_CASE("theoretical_curve") {
  CHECK(theoretical_curve(1.0, 7.3, 2.0) == 1.0);
  CHECK(theoretical_curve(4.2, 0.0, 1.1) == 1.0);
  // (5/3)^(3 * 1.4) = 8.546036599138040, frozen from direct evaluation.
  CHECK(theoretical_curve(5.0 / 3.0, 3.0, 1.4) ==
        doctest::Approx(8.546036599138040).epsilon(1e-12));
  CHECK_THROWS_AS(theoretical_curve(0.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("conjugate_theta_posterior bookkeeping") {
  // S = 30, T = 20 -> (alpha + 30, 1 / (20 + 1/beta))
  const auto post = conjugate_theta_posterior(2.0, 1.0, make_series({20, 30}));
  CHECK(post.alpha_star == doctest::Approx(32.0));
  CHECK(post.beta_star == doctest::Approx(1.0 / 21.0));

  const auto post2 = conjugate_theta_posterior(2.0, 0.5, make_series({10, 20, 40}));
  CHECK(post2.alpha_star == doctest::Approx(2.0 + 60.0));
  CHECK(post2.beta_star == doctest::Approx(1.0 / (30.0 + 2.0)));

  // Gap weeks contribute nothing.
  const auto post3 = conjugate_theta_posterior(2.0, 1.0, make_series({0, 5}));
  CHECK(post3.alpha_star == doctest::Approx(2.0));
  CHECK(post3.beta_star == doctest::Approx(1.0));

  CHECK_THROWS_AS(conjugate_theta_posterior(2.0, 1.0, make_series({4})),
                  std::invalid_argument);
}

TEST_CASE("1-D grid posterior matches the conjugate law") {
  // theta-grid prior = logGamma(alpha, beta); updating through the engine's
  // reduced kernel must land on logGamma(alpha + S, 1/(T + 1/beta)).
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> alpha_d(1.0, 6.0);
  std::uniform_real_distribution<double> beta_d(0.3, 3.0);
  std::uniform_int_distribution<std::int64_t> count_d(1, 40);
  std::uniform_int_distribution<int> len_d(3, 7);

  for (int rep = 0; rep < 5; ++rep) {
    const double alpha = alpha_d(rng);
    const double beta = beta_d(rng);
    CaseSeries series;
    const int len = len_d(rng);
    for (int w = 0; w < len; ++w) series.counts.push_back(count_d(rng));

    const ThetaPosterior post = conjugate_theta_posterior(alpha, beta, series);
    const double prior_mean = oracles::digamma_fd(alpha) + std::log(beta);
    const double prior_sd = std::sqrt(oracles::trigamma_series(alpha));
    const double post_mean =
        oracles::digamma_fd(post.alpha_star) + std::log(post.beta_star);
    const double post_sd = std::sqrt(oracles::trigamma_series(post.alpha_star));
    const double lo = std::min(prior_mean - 8.0 * prior_sd, post_mean - 12.0 * post_sd);
    const double hi = std::max(prior_mean + 8.0 * prior_sd, post_mean + 12.0 * post_sd);

    const int n = 4096;
    const double w = (hi - lo) / n;
    std::vector<double> theta(n), mass(n);
    for (int i = 0; i < n; ++i) {
      theta[i] = lo + (i + 0.5) * w;
      mass[i] = oracles::loggamma_density(theta[i], alpha, beta) * w;
    }
    double s_next = 0.0, t_curr = 0.0;
    for (std::size_t j = 0; j + 1 < series.counts.size(); ++j) {
      s_next += static_cast<double>(series.counts[j + 1]);
      t_curr += static_cast<double>(series.counts[j]);
    }
    double max_ll = -1e300;
    std::vector<double> ll(n);
    for (int i = 0; i < n; ++i) {
      ll[i] = detail::reduced_loglik(s_next, t_curr, theta[i]);
      max_ll = std::max(max_ll, ll[i]);
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      mass[i] *= std::exp(ll[i] - max_ll);
      total += mass[i];
    }
    double analytic_total = 0.0;
    std::vector<double> analytic(n);
    for (int i = 0; i < n; ++i) {
      analytic[i] =
          oracles::loggamma_density(theta[i], post.alpha_star, post.beta_star) * w;
      analytic_total += analytic[i];
    }
    double peak = 0.0;
    for (int i = 0; i < n; ++i) peak = std::max(peak, analytic[i] / analytic_total);
    for (int i = 0; i < n; ++i) {
      const double a = analytic[i] / analytic_total;
      if (a < 1e-10 * peak) continue;
      const double g = mass[i] / total;
      CHECK(std::fabs(g - a) <= 1e-3 * a);
    }
  }
}

TEST_CASE("sequential equals batch updating") {
  const PriorSpec spec = prior_from_targets(5.0 / 3.0, 5.0, 2.0, -0.5);
  const JointGrid prior = build_joint_prior(spec, 64, 64);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::int64_t> count_d(1, 300);
  std::uniform_int_distribution<int> len_d(3, 8);

  for (int rep = 0; rep < 20; ++rep) {
    const int len = len_d(rng);
    std::vector<ObservedPair> pairs;
    std::int64_t prev = count_d(rng);
    std::vector<std::int64_t> counts{prev};
    for (int w = 1; w < len; ++w) {
      const std::int64_t cur = count_d(rng);
      pairs.push_back({prev, cur});
      counts.push_back(cur);
      prev = cur;
    }

    JointGrid sequential = prior;
    for (const auto& p : pairs) {
      apply_likelihood(sequential, std::span<const ObservedPair>(&p, 1), 1.0);
    }
    JointGrid batch = prior;
    apply_likelihood(batch, pairs, 1.0);

    double max_dev = 0.0;
    for (std::size_t c = 0; c < batch.mass.size(); ++c) {
      max_dev = std::max(max_dev, std::fabs(batch.mass[c] - sequential.mass[c]));
    }
    CHECK(max_dev <= 1e-10);
    CHECK(std::fabs(sequential.total_mass() - 1.0) <= 1e-12);
  }
}

TEST_CASE("likelihood application is invariant to prior scaling") {
  const PriorSpec spec = prior_from_targets(2.0, 4.0);
  JointGrid a = build_joint_prior(spec, 48, 48);
  JointGrid b = a;
  for (double& m : b.mass) m *= 37.5;  // unnormalized prior

  const std::vector<ObservedPair> pairs{{12, 30}, {30, 71}};
  apply_likelihood(a, pairs, 1.0);
  apply_likelihood(b, pairs, 1.0);
  double max_dev = 0.0;
  for (std::size_t c = 0; c < a.mass.size(); ++c) {
    max_dev = std::max(max_dev, std::fabs(a.mass[c] - b.mass[c]));
  }
  CHECK(max_dev <= 1e-12);
  CHECK(marginal_median(a, GridAxis::R0) == marginal_median(b, GridAxis::R0));
  CHECK(hdr_region(a, 0.95) == hdr_region(b, 0.95));
}

TEST_CASE("serial and parallel likelihood kernels are bit-identical") {
  const PriorSpec spec = prior_from_targets(5.0 / 3.0, 5.0);
  const JointGrid prior = build_joint_prior(spec, 128, 96);
  const std::vector<ObservedPair> pairs{{25, 63}, {63, 161}};
  JointGrid a = prior;
  JointGrid b = prior;
  detail::apply_loglik_terms_serial(a, pairs, 1.0);
  detail::apply_loglik_terms_parallel(b, pairs, 1.0);
  CHECK(std::memcmp(a.mass.data(), b.mass.data(), a.mass.size() * sizeof(double)) == 0);
}

TEST_CASE("sequential_update contract") {
  const PriorSpec spec = prior_from_targets(5.0 / 3.0, 5.0);
  const JointGrid prior = build_joint_prior(spec, 64, 64);

  CHECK_THROWS_AS(sequential_update(prior, make_series({5})), std::invalid_argument);

  // A leading zero is a gap week: nothing is absorbed, the record repeats the
  // prior's point estimates.
  SequentialOptions lead_opts;
  lead_opts.compute_hdr = false;
  const auto lead = sequential_update(prior, make_series({0, 5}), lead_opts);
  REQUIRE(lead.records.size() == 1);
  CHECK(lead.gap_weeks == std::vector<int>{2});
  CHECK(lead.records[0].r0_median ==
        doctest::Approx(marginal_median(prior, GridAxis::R0)));

  SequentialOptions opts;
  opts.include_prior_record = true;
  opts.keep_grids = true;
  const auto result = sequential_update(prior, make_series({10, 25, 0, 40, 90}), opts);
  // weeks 1..5; the pair (0 -> 40) at week 4 is a gap.
  REQUIRE(result.records.size() == 5);
  CHECK(result.records[0].week == 1);
  CHECK(result.records.back().week == 5);
  REQUIRE(result.gap_weeks.size() == 1);
  CHECK(result.gap_weeks[0] == 4);
  // The gap week's posterior is identical to the previous week's.
  CHECK(result.posteriors[3].mass == result.posteriors[2].mass);
  // records carry HDRs that meet the level
  for (const auto& rec : result.records) {
    CHECK(rec.hdr_mass >= 0.95);
    CHECK(!rec.hdr_cells.empty());
  }

  // Prior record matches the prior's own medians.
  CHECK(result.records[0].r0_median ==
        doctest::Approx(marginal_median(prior, GridAxis::R0)));

  // A two-observation series with no usable pair returns the prior unchanged.
  SequentialOptions no_hdr;
  no_hdr.compute_hdr = false;
  const auto trivial = sequential_update(prior, make_series({7, 7}), no_hdr);
  REQUIRE(trivial.records.size() == 1);
  CHECK(trivial.records[0].week == 2);
}

TEST_CASE("posterior concentrates on an Influenza 1 mean trajectory") {
  // Counts = rounded deterministic weekly incidence for R0 = 5/3, SI = 5 d.
  const CaseSeries series =
      make_series({39, 98, 249, 633, 1603, 4036});  // weeks 1..6
  const PriorSpec spec = prior_from_targets(5.0 / 3.0, 5.0);
  const JointGrid prior = build_joint_prior(spec, 400, 400);
  SequentialOptions opts;
  opts.compute_hdr = false;
  const auto result = sequential_update(prior, series, opts);
  const auto& last = result.records.back();
  CHECK(last.week == 6);
  CHECK(std::fabs(last.r0_median - 5.0 / 3.0) <= 0.25);
  CHECK(last.si_median_days > 0.0);
}
