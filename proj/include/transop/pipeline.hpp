#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "transop/config.hpp"

namespace transop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

int exit_code_for(const Error& error);

struct RunOptions {
  std::optional<ConventionMode> mode;   ///< overrides solver.mode
  std::optional<std::string> out_dir;   ///< overrides output.dir
  bool verify = false;                  ///< also write verify.json
  bool timing = false;                  ///< add wall-clock timings to report.json
};

/// Apply command-line overrides; re-checks mode-dependent constraints.
RunConfig apply_overrides(RunConfig cfg, const RunOptions& options);

/// Field CSV: header x,y,u1..un, rows ordered by y then x, 17 significant digits.
void write_field_csv(const FieldGrid& field, const std::filesystem::path& path);

/// Solve, write field CSV(s) and report.json, print a summary. Returns the
/// process exit code; errors are reported on `err`.
int run_solve(const RunConfig& cfg, const RunOptions& options, std::ostream& out,
              std::ostream& err);

/// run_solve followed by the enabled oracles; writes verify.json.
int run_verify(const RunConfig& cfg, const RunOptions& options, std::ostream& out,
               std::ostream& err);

/// Error-versus-resolution table for the finite-difference oracle and
/// error-versus-order table for the image series.
int run_convergence(const RunConfig& cfg, const RunOptions& options, std::ostream& out,
                    std::ostream& err);

}  // namespace transop::cli
