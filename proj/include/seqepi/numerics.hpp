#ifndef SEQEPI_NUMERICS_HPP
#define SEQEPI_NUMERICS_HPP

namespace seqepi::num {

// Digamma psi(x) = d/dx ln Gamma(x). Throws std::domain_error for x <= 0.
// Relative accuracy better than 1e-12 on [1e-3, 1e3].
double digamma(double x);

// Trigamma psi'(x). Throws std::domain_error for x <= 0.
double trigamma(double x);

// Regularized lower incomplete gamma P(shape, x/scale), i.e. the CDF of a
// Gamma(shape, scale) variate. Throws std::domain_error on nonpositive
// shape or scale, or negative x.
double gamma_cdf(double x, double shape, double scale);

// Standard normal CDF via erfc; accurate to full double precision.
double std_normal_cdf(double x);

// Inverse standard normal CDF. Wichura's AS 241 rational approximation
// followed by one Newton step against std_normal_cdf. Throws
// std::domain_error unless 0 < p < 1.
double std_normal_quantile(double p);

// Gaussian copula density
//   c_rho(u, v) = exp(-(rho^2 (z1^2 + z2^2) - 2 rho z1 z2) / (2 (1 - rho^2)))
//                 / sqrt(1 - rho^2),   z1 = Phi^-1(u), z2 = Phi^-1(v).
// Requires 0 < u < 1, 0 < v < 1, |rho| < 1; throws std::domain_error otherwise.
double gaussian_copula_density(double u, double v, double rho);

}  // namespace seqepi::num

#endif
