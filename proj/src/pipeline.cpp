#include "transop/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace transop::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(const Error& error) {
  return error.is_validation() ? kExitValidation : kExitNumerical;
}

RunConfig apply_overrides(RunConfig cfg, const RunOptions& options) {
  if (options.mode) cfg.solver.mode = *options.mode;
  if (options.out_dir) cfg.output.dir = *options.out_dir;
  if (const auto* two = std::get_if<TwoLayerProblem>(&cfg.problem)) {
    if (cfg.solver.mode == ConventionMode::Calibrated) {
      try {
        shared_eigenbasis(two->a1, two->a2);
      } catch (const Error& e) {
        throw Error(ErrorKind::ValidationError,
                    std::string("problem: calibrated mode needs commuting a1, a2 (") + e.what() + ")");
      }
    }
  }
  return cfg;
}

void write_field_csv(const FieldGrid& field, const fs::path& path) {
  std::FILE* file = std::fopen(path.string().c_str(), "wb");
  if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  std::fputs("x,y", file);
  for (int c = 1; c <= field.dim(); ++c) std::fprintf(file, ",u%d", c);
  std::fputc('\n', file);
  for (int j = 0; j < field.ny(); ++j) {
    for (int i = 0; i < field.nx(); ++i) {
      std::fprintf(file, "%.17g,%.17g", field.x(i), field.y(j));
      const Vector v = field.at(i, j);
      for (int c = 0; c < field.dim(); ++c) std::fprintf(file, ",%.17g", v(c));
      std::fputc('\n', file);
    }
  }
  if (std::fclose(file) != 0) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RobinOptions robin_options(const SolverConfig& s) {
  RobinOptions o;
  o.mode = s.mode;
  o.eps_max = s.eps_max;
  o.quad_tol = s.quad_tol;
  o.fd_step = s.fd_step;
  o.base.quad_tol = s.quad_tol;
  return o;
}

TwoLayerOptions two_layer_options(const SolverConfig& s) {
  TwoLayerOptions o;
  o.mode = s.mode;
  o.series_tol = s.series_tol;
  o.j_max = s.j_max;
  o.prune_tol = s.prune_tol;
  o.fd_step = s.fd_step;
  o.base.quad_tol = s.quad_tol;
  return o;
}

struct Solved {
  SolveReport report;
  std::vector<std::pair<std::string, FieldGrid>> fields;
  std::optional<RobinSolution> robin;
  std::optional<TwoLayerSolution> two_layer;
  double seconds = 0.0;
};

Solved solve(const RunConfig& cfg) {
  const auto start = Clock::now();
  Solved out;
  if (const auto* r = std::get_if<RobinProblem>(&cfg.problem)) {
    const RobinOptions options = robin_options(cfg.solver);
    RobinResult result = robin_transform(*r, cfg.grid, options);
    out.report = result.report;
    out.fields.emplace_back("field.csv", std::move(result.field));
    out.robin.emplace(*r, options);
  } else {
    const auto& t = std::get<TwoLayerProblem>(cfg.problem);
    TwoLayerResult result = two_layer_transform(t, cfg.grid, two_layer_options(cfg.solver));
    out.report = result.report;
    out.fields.emplace_back("layer1.csv", std::move(result.layer1));
    out.fields.emplace_back("layer2.csv", std::move(result.layer2));
    out.two_layer.emplace(std::move(result.solution));
  }
  out.seconds = seconds_since(start);
  return out;
}

json report_json(const SolveReport& r) {
  return json{{"pde_residual_linf", r.pde_residual_linf},
              {"boundary_residual_linf", r.boundary_residual_linf},
              {"interface_value_gap", r.interface_value_gap},
              {"interface_flux_gap", r.interface_flux_gap},
              {"series_terms_used", r.series_terms_used},
              {"truncation_proxy", r.truncation_proxy},
              {"quadrature_error", r.quadrature_error}};
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  file << doc.dump(2) << '\n';
  if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
}

std::string identity_text(const RunConfig& cfg) {
  if (std::holds_alternative<RobinProblem>(cfg.problem)) {
    return cfg.solver.mode == ConventionMode::Calibrated ? "h u(0,y) + u_x(0,y) = +f(y)"
                                                         : "h u(0,y) + u_x(0,y) = -f(y)";
  }
  return "u1(0,y) = f(y), u1(l,y) = u2(l,y), lambda1 u1_x(l,y) = lambda2 u2_x(l,y)";
}

fs::path prepare_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::InvalidArgument, "cannot create " + dir.string());
  return dir;
}

void print_report(std::ostream& out, const SolveReport& r) {
  out << std::setprecision(6) << std::scientific;
  out << "  pde_residual_linf      " << r.pde_residual_linf << '\n'
      << "  boundary_residual_linf " << r.boundary_residual_linf << '\n'
      << "  interface_value_gap    " << r.interface_value_gap << '\n'
      << "  interface_flux_gap     " << r.interface_flux_gap << '\n'
      << "  series_terms_used      " << std::defaultfloat << r.series_terms_used << std::scientific
      << '\n'
      << "  truncation_proxy       " << r.truncation_proxy << '\n'
      << "  quadrature_error       " << r.quadrature_error << '\n';
  out << std::defaultfloat;
}

// Evaluates the computed solution on an arbitrary grid.
FieldGrid solution_on(const Solved& s, const GridSpec& spec, int dim) {
  if (s.robin) return fill_grid(spec, dim, [&](double x, double y) { return s.robin->value(x, y); });
  return fill_grid(spec, dim, [&](double x, double y) { return s.two_layer->value(x, y); });
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int solve_and_write(const RunConfig& cfg, const RunOptions& options, std::ostream& out,
                    Solved& solved) {
  solved = solve(cfg);
  const fs::path dir = prepare_dir(cfg);
  if (cfg.output.fields) {
    for (const auto& [name, field] : solved.fields) write_field_csv(field, dir / name);
  }
  if (cfg.output.report) {
    json doc = report_json(solved.report);
    doc["config"] = to_json(cfg);
    if (options.timing) doc["timing"] = {{"solve_seconds", solved.seconds}};
    write_json(doc, dir / "report.json");
  }
  out << "mode: " << to_string(cfg.solver.mode) << '\n';
  out << "identity checked: " << identity_text(cfg) << '\n';
  print_report(out, solved.report);
  if (options.timing) out << "solve time: " << solved.seconds << " s\n";
  out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

json verify_solved(const RunConfig& cfg, const Solved& solved, std::ostream& out) {
  json doc;
  doc["mode"] = std::string(to_string(cfg.solver.mode));
  doc["identity"] = identity_text(cfg);
  const bool modes = std::visit([](const auto& p) { return p.trace.mode_only(); }, cfg.problem);
  const double sign = cfg.solver.mode == ConventionMode::Literal &&
                              std::holds_alternative<RobinProblem>(cfg.problem)
                          ? -1.0
                          : 1.0;

  if (cfg.verify.residuals) {
    SolveReport r;
    if (const auto* robin = std::get_if<RobinProblem>(&cfg.problem)) {
      r = residual_report(solved.fields[0].second, *robin, cfg.solver.mode);
    } else {
      r = residual_report(solved.fields[0].second, solved.fields[1].second,
                          std::get<TwoLayerProblem>(cfg.problem));
    }
    doc["residuals"] = report_json(r);
    out << "grid residuals:\n";
    print_report(out, r);
  }

  std::function<Vector(double, double)> exact;
  if (modes) {
    if (const auto* robin = std::get_if<RobinProblem>(&cfg.problem)) {
      auto field = std::make_shared<RobinModeField>(*robin);
      exact = [field, sign](double x, double y) { return Vector(sign * field->value(x, y)); };
    } else {
      auto field = std::make_shared<TwoLayerModeField>(std::get<TwoLayerProblem>(cfg.problem));
      exact = [field](double x, double y) { return field->value(x, y); };
    }
  }

  if (cfg.verify.mode_match && exact) {
    double linf = 0.0, l2 = 0.0;
    for (const auto& [name, field] : solved.fields) {
      const CompareMetrics m = compare(field, fill_grid(field.spec(), field.dim(), exact));
      linf = std::max(linf, m.linf);
      l2 = std::hypot(l2, m.l2);
    }
    doc["mode_match"] = {{"linf", linf}, {"l2", l2}};
    out << "mode matching: linf " << linf << ", l2 " << l2 << '\n';
  }

  if (cfg.verify.fd && modes) {
    FdOptions fd;
    fd.x_max = cfg.verify.fd_x_max;
    fd.nx = cfg.verify.fd_nx;
    fd.ny = cfg.verify.fd_ny;
    fd.far_field = cfg.verify.far_field;
    fd.far_tol = cfg.verify.far_tol;
    FieldGrid grid = fd_solve(cfg.problem, fd);
    if (sign < 0.0) {
      FieldGrid flipped(grid.spec(), grid.dim());
      for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) flipped.set(i, j, -grid.at(i, j));
      grid = std::move(flipped);
    }
    const int dim = grid.dim();
    const CompareMetrics vs_solution = compare(grid, solution_on(solved, grid.spec(), dim));
    json entry = {{"nx", fd.nx},
                  {"ny", fd.ny},
                  {"x_max", fd.x_max},
                  {"far_field", std::string(to_string(fd.far_field))},
                  {"linf_vs_solution", vs_solution.linf}};
    out << "finite differences (" << fd.nx << "x" << fd.ny << "): linf vs solution "
        << vs_solution.linf;
    if (fd.far_field == FarField::Decay && exact) {
      const CompareMetrics vs_exact = compare(grid, fill_grid(grid.spec(), dim, exact));
      entry["linf_vs_mode_match"] = vs_exact.linf;
      out << ", vs mode matching " << vs_exact.linf;
    }
    out << '\n';
    doc["fd"] = std::move(entry);
  }
  return doc;
}

}  // namespace

int run_solve(const RunConfig& config, const RunOptions& options, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = apply_overrides(config, options);
    Solved solved;
    solve_and_write(cfg, options, out, solved);
    if (options.verify) {
      write_json(verify_solved(cfg, solved, out), prepare_dir(cfg) / "verify.json");
    }
    return kExitOk;
  });
}

int run_verify(const RunConfig& config, const RunOptions& options, std::ostream& out,
               std::ostream& err) {
  RunOptions o = options;
  o.verify = true;
  return run_solve(config, o, out, err);
}

int run_convergence(const RunConfig& config, const RunOptions& options, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = apply_overrides(config, options);
    if (cfg.convergence.resolutions.empty()) {
      throw Error(ErrorKind::ValidationError, "convergence.resolutions: must not be empty");
    }
    const fs::path dir = prepare_dir(cfg);
    const bool modes = std::visit([](const auto& p) { return p.trace.mode_only(); }, cfg.problem);
    if (!modes) {
      throw Error(ErrorKind::ValidationError,
                  "convergence study needs a mode-only trace (the oracles are mode based)");
    }
    const auto* robin = std::get_if<RobinProblem>(&cfg.problem);
    const auto* two = std::get_if<TwoLayerProblem>(&cfg.problem);
    const bool wall = cfg.verify.far_field == FarField::Dirichlet;

    // The finite-difference oracle solves the physical problem (+f identity).
    std::function<Vector(double, double)> exact;
    if (robin) {
      auto field = std::make_shared<RobinModeField>(*robin);
      exact = [field](double x, double y) { return field->value(x, y); };
    } else {
      std::optional<double> far;
      if (wall) far = cfg.verify.fd_x_max;
      auto field = std::make_shared<TwoLayerModeField>(*two, far);
      exact = [field](double x, double y) { return field->value(x, y); };
    }

    std::FILE* fd_csv = std::fopen((dir / "convergence_fd.csv").string().c_str(), "wb");
    if (!fd_csv) throw Error(ErrorKind::InvalidArgument, "cannot write convergence_fd.csv");
    std::fputs("nx,ny,hx,hy,error_linf,ratio\n", fd_csv);
    out << "finite-difference convergence vs mode matching"
        << (wall && robin ? " (far wall not modelled by the Robin oracle)" : "") << ":\n";
    double previous = 0.0;
    for (const auto& res : cfg.convergence.resolutions) {
      FdOptions fd;
      fd.x_max = cfg.verify.fd_x_max;
      fd.nx = res.nx;
      fd.ny = res.ny;
      fd.far_field = cfg.verify.far_field;
      fd.far_tol = cfg.verify.far_tol;
      const FieldGrid grid = fd_solve(cfg.problem, fd);
      const double error = compare(grid, fill_grid(grid.spec(), grid.dim(), exact)).linf;
      std::fprintf(fd_csv, "%d,%d,%.17g,%.17g,%.17g,", res.nx, res.ny, grid.spec().hx(),
                   grid.spec().hy(), error);
      if (previous > 0.0) std::fprintf(fd_csv, "%.17g", previous / error);
      std::fputc('\n', fd_csv);
      out << "  " << res.nx << "x" << res.ny << "  error " << error;
      if (previous > 0.0) out << "  ratio " << previous / error;
      out << '\n';
      previous = error;
    }
    std::fclose(fd_csv);

    if (two) {
      std::FILE* series_csv = std::fopen((dir / "convergence_series.csv").string().c_str(), "wb");
      if (!series_csv) throw Error(ErrorKind::InvalidArgument, "cannot write convergence_series.csv");
      std::fputs("j,terms,error_linf\n", series_csv);
      const Matrix chi = series_chi(*two, cfg.solver.mode);
      const TwoLayerModeField oracle(*two);
      out << "image-series truncation vs mode matching (" << to_string(cfg.solver.mode) << "):\n";
      for (int j = 0; j <= cfg.convergence.j_sweep; ++j) {
        ImageSeriesOptions o;
        o.j_max = j;
        o.prune_tol = cfg.solver.prune_tol;
        const ImageSeries series = image_series(two->a1, two->a2, chi, two->l, o);
        const TwoLayerSolution sol(*two, series.layer1, series.layer2);
        double error = 0.0;
        for (int jy = 0; jy < cfg.grid.ny; ++jy) {
          for (int ix = 0; ix < cfg.grid.nx; ++ix) {
            const double x = cfg.grid.x(ix), y = cfg.grid.y(jy);
            error = std::max(error, (sol.value(x, y) - oracle.value(x, y)).cwiseAbs().maxCoeff());
          }
        }
        const std::size_t terms = series.layer1.size() + series.layer2.size();
        std::fprintf(series_csv, "%d,%zu,%.17g\n", j, terms, error);
        out << "  j_max " << j << "  terms " << terms << "  error " << error << '\n';
      }
      std::fclose(series_csv);
    }
    out << "wrote " << dir.string() << '\n';
    return kExitOk;
  });
}

}  // namespace transop::cli
