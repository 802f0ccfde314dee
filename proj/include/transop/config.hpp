#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "transop/basefield.hpp"
#include "transop/oracle.hpp"
#include "transop/transmute.hpp"

namespace transop::cli {

struct SolverConfig {
  ConventionMode mode = ConventionMode::Calibrated;
  double series_tol = 1e-10;
  int j_max = 64;
  double prune_tol = 1e-15;
  double quad_tol = 1e-9;
  double eps_max = 60.0;
  double fd_step = 1e-3;
  bool operator==(const SolverConfig&) const = default;
};

struct VerifyConfig {
  bool residuals = true;
  bool mode_match = true;
  bool fd = false;
  double fd_x_max = 8.0;
  int fd_nx = 129;
  int fd_ny = 32;
  FarField far_field = FarField::Decay;
  double far_tol = 1e-3;
  bool operator==(const VerifyConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool fields = true;
  bool report = true;
  bool operator==(const OutputConfig&) const = default;
};

struct Resolution {
  int nx = 0;
  int ny = 0;
  bool operator==(const Resolution&) const = default;
};

struct ConvergenceConfig {
  std::vector<Resolution> resolutions{{65, 16}, {129, 32}};
  int j_sweep = 6;
  bool operator==(const ConvergenceConfig&) const = default;
};

struct RunConfig {
  ProblemSpec problem;
  GridSpec grid;
  SolverConfig solver;
  VerifyConfig verify;
  OutputConfig output;
  ConvergenceConfig convergence;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Strict parse: unknown keys, wrong types and invalid problems raise
/// ValidationError naming the offending field; malformed JSON raises
/// ParseError with line and column.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& config);
std::string serialize_config(const RunConfig& config);

std::string_view to_string(FarField far);

}  // namespace transop::cli
