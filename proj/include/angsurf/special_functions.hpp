#pragma once

namespace angsurf {

// Shape pair of a beta distribution on (0,1).
struct BetaParams {
  double p = 1.0;
  double q = 1.0;

  bool valid() const noexcept;
};

/// log B(p,q) = lgamma(p) + lgamma(q) - lgamma(p+q).
double log_beta_function(double p, double q);

/// Beta density, evaluated in log space so that large shapes do not overflow.
/// Throws DomainError unless 0 < w < 1 and both shapes are positive and finite.
double beta_density(double w, BetaParams params);
double log_beta_density(double w, BetaParams params);

/// Regularized incomplete beta function I_w(p,q).
///
/// Evaluated with the modified Lentz continued fraction, using the symmetry
/// I_w(p,q) = 1 - I_{1-w}(q,p) when w > p/(p+q). The fraction is capped at
/// 300 iterations with relative tolerance 1e-14; failing to converge raises
/// NumericError rather than returning a clamped value.
double reg_inc_beta(double w, BetaParams params);

/// Gaussian kernel K_b(u) = phi(u/b)/b.
double gaussian_kernel(double u, double b);

double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;
double normal_quantile(double p);

/// Upper tail P(X > x) of a chi-square with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

}  // namespace angsurf
