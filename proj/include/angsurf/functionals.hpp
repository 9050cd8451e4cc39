#pragma once

#include <string_view>

#include "angsurf/angular_estimator.hpp"

namespace angsurf {

enum class FunctionalKind { pickands, extremal_coefficient, bev };

std::string_view to_string(FunctionalKind kind) noexcept;

struct FunctionalEstimate {
  double x = 0.0;
  FunctionalKind kind = FunctionalKind::pickands;
  double arg1 = 0.0;  // w for Pickands, y1 for BEV
  double arg2 = 0.0;  // y2 for BEV
  double value = 0.0;
  double quadrature_error = 0.0;
  // Set when the value leaves its admissible range by more than 1e-6
  // (possible with local-linear weights).
  bool flagged = false;
};

/// Plug-in Pickands function A_x(w) = 1 - w + 2 sum_i pi_i int_0^w B(u; p_i, q_i) du.
/// The inner integral uses int_0^w B(u;p,q) du = w B(w;p,q) - p/(p+q) B(w;p+1,q).
FunctionalEstimate pickands_hat(double w, const CrossSection& section);
FunctionalEstimate pickands_hat(double w, double x, const AngularSurface& surface);

/// C_x = 2 A_x(1/2).
FunctionalEstimate extremal_coeff_hat(const CrossSection& section);
FunctionalEstimate extremal_coeff_hat(double x, const AngularSurface& surface);

/// C_x = 1 + 4 int_0^{1/2} H_x(u) du by adaptive quadrature of the plug-in
/// distribution function; a second route to extremal_coeff_hat.
FunctionalEstimate extremal_coeff_by_quadrature(const CrossSection& section);

/// Plug-in bivariate extreme value distribution in Frechet margins,
/// G_x(y1,y2) = exp{-2 int max(u/y1, (1-u)/y2) h_x(u) du}. The integral is split
/// at u* = y1/(y1+y2); each piece is a partial first moment or partial mass of
/// the beta mixture, evaluated in closed form through incomplete beta functions.
FunctionalEstimate bev_hat(double y1, double y2, const CrossSection& section);
FunctionalEstimate bev_hat(double y1, double y2, double x, const AngularSurface& surface);

}  // namespace angsurf
