#pragma once

namespace transop {

/// Diagnostics attached to every solve. All entries are finite and >= 0.
struct SolveReport {
  double pde_residual_linf = 0.0;
  double boundary_residual_linf = 0.0;
  double interface_value_gap = 0.0;
  double interface_flux_gap = 0.0;
  double series_terms_used = 0.0;
  double truncation_proxy = 0.0;
  double quadrature_error = 0.0;

  bool operator==(const SolveReport&) const = default;
};

}  // namespace transop
