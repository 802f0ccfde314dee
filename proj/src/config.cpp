#include "transop/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace transop::cli {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::ValidationError, path + ": " + message);
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void check_object(const json& obj, const std::string& path,
                  std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) invalid(path, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) invalid(join(path, key), "unknown key");
  }
}

const json& required(const json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) invalid(join(path, key), "is required");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) invalid(path, "must be a number");
  return v.get<double>();
}

double number_or(const json& obj, std::string_view key, const std::string& path, double fallback) {
  auto it = obj.find(std::string(key));
  return it == obj.end() ? fallback : as_number(*it, join(path, key));
}

int integer_or(const json& obj, std::string_view key, const std::string& path, int fallback) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) invalid(join(path, key), "must be an integer");
  return it->get<int>();
}

bool bool_or(const json& obj, std::string_view key, const std::string& path, bool fallback) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) invalid(join(path, key), "must be true or false");
  return it->get<bool>();
}

std::string string_or(const json& obj, std::string_view key, const std::string& path,
                      const std::string& fallback) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) return fallback;
  if (!it->is_string()) invalid(join(path, key), "must be a string");
  return it->get<std::string>();
}

Matrix parse_matrix(const json& v, const std::string& path) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) invalid(path, "must be a number or a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Matrix m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!row.is_array()) invalid(row_path, "must be an array");
    if (static_cast<Eigen::Index>(row.size()) != rows) invalid(path, "matrix must be square");
    for (Eigen::Index c = 0; c < rows; ++c) {
      m(r, c) = as_number(row[static_cast<std::size_t>(c)],
                          row_path + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

Vector parse_vector(const json& v, const std::string& path, int dim) {
  if (v.is_number()) {
    if (dim != 1) invalid(path, "scalar amplitude needs a 1-component problem");
    return Vector::Constant(1, v.get<double>());
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    invalid(path, "must be an array of " + std::to_string(dim) + " numbers");
  }
  Vector out(dim);
  for (int k = 0; k < dim; ++k) {
    out(k) = as_number(v[static_cast<std::size_t>(k)], path + "[" + std::to_string(k) + "]");
  }
  return out;
}

SpectralMatrix parse_coefficient(const json& obj, std::string_view key, const std::string& path) {
  const std::string p = join(path, key);
  const Matrix m = parse_matrix(required(obj, key, path), p);
  try {
    return eigendecompose(m);
  } catch (const Error& e) {
    invalid(p, e.what());
  }
}

BoundaryTrace parse_trace(const json& v, const std::string& path, int dim) {
  check_object(v, path, {"modes", "samples"});
  std::vector<TraceMode> modes;
  if (auto it = v.find("modes"); it != v.end()) {
    const std::string mp = join(path, "modes");
    if (!it->is_array()) invalid(mp, "must be an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const json& m = (*it)[k];
      const std::string p = mp + "[" + std::to_string(k) + "]";
      check_object(m, p, {"omega", "cos", "sin"});
      TraceMode mode;
      mode.omega = as_number(required(m, "omega", p), join(p, "omega"));
      mode.cos_amp = m.contains("cos") ? parse_vector(m["cos"], join(p, "cos"), dim)
                                       : Vector::Zero(dim);
      mode.sin_amp = m.contains("sin") ? parse_vector(m["sin"], join(p, "sin"), dim)
                                       : Vector::Zero(dim);
      modes.push_back(std::move(mode));
    }
  }
  std::optional<SampledTrace> samples;
  if (auto it = v.find("samples"); it != v.end()) {
    const std::string sp = join(path, "samples");
    check_object(*it, sp, {"y", "values"});
    const json& ys = required(*it, "y", sp);
    const json& vals = required(*it, "values", sp);
    if (!ys.is_array() || !vals.is_array() || ys.size() != vals.size()) {
      invalid(sp, "y and values must be arrays of equal length");
    }
    SampledTrace s;
    s.values.resize(dim, static_cast<Eigen::Index>(ys.size()));
    for (std::size_t k = 0; k < ys.size(); ++k) {
      s.y.push_back(as_number(ys[k], sp + ".y[" + std::to_string(k) + "]"));
      s.values.col(static_cast<Eigen::Index>(k)) =
          parse_vector(vals[k], sp + ".values[" + std::to_string(k) + "]", dim);
    }
    samples = std::move(s);
  }
  try {
    return BoundaryTrace(dim, std::move(modes), std::move(samples));
  } catch (const Error& e) {
    invalid(path, e.what());
  }
}

ProblemSpec parse_problem(const json& v) {
  const std::string path = "problem";
  if (!v.is_object()) invalid(path, "must be an object");
  const std::string kind = string_or(v, "kind", path, "");
  if (kind == "robin") {
    check_object(v, path, {"kind", "a", "h", "trace"});
    RobinProblem p;
    p.a = parse_coefficient(v, "a", path);
    p.h = parse_coefficient(v, "h", path);
    p.trace = parse_trace(required(v, "trace", path), join(path, "trace"), p.a.dim());
    try {
      validate(p);
    } catch (const Error& e) {
      invalid(path, e.what());
    }
    return p;
  }
  if (kind == "two_layer") {
    check_object(v, path, {"kind", "a1", "a2", "lambda1", "lambda2", "l", "trace"});
    TwoLayerProblem p;
    p.a1 = parse_coefficient(v, "a1", path);
    p.a2 = parse_coefficient(v, "a2", path);
    p.lambda1 = as_number(required(v, "lambda1", path), join(path, "lambda1"));
    p.lambda2 = as_number(required(v, "lambda2", path), join(path, "lambda2"));
    p.l = as_number(required(v, "l", path), join(path, "l"));
    if (!(p.lambda1 > 0.0)) invalid(join(path, "lambda1"), "lambda1 must be positive");
    if (!(p.lambda2 > 0.0)) invalid(join(path, "lambda2"), "lambda2 must be positive");
    if (!(p.l > 0.0)) invalid(join(path, "l"), "l must be positive");
    p.trace = parse_trace(required(v, "trace", path), join(path, "trace"), p.a1.dim());
    try {
      validate(p);
    } catch (const Error& e) {
      invalid(path, e.what());
    }
    return p;
  }
  invalid(join(path, "kind"), "must be \"robin\" or \"two_layer\"");
}

std::pair<double, double> parse_range(const json& obj, std::string_view key,
                                      const std::string& path) {
  const std::string p = join(path, key);
  const json& v = required(obj, key, path);
  if (!v.is_array() || v.size() != 2) invalid(p, "must be [lo, hi]");
  return {as_number(v[0], p + "[0]"), as_number(v[1], p + "[1]")};
}

GridSpec parse_grid(const json& v) {
  const std::string path = "grid";
  check_object(v, path, {"x", "y", "nx", "ny"});
  GridSpec g;
  std::tie(g.x0, g.x1) = parse_range(v, "x", path);
  std::tie(g.y0, g.y1) = parse_range(v, "y", path);
  if (!v.contains("nx") || !v.contains("ny")) invalid(path, "nx and ny are required");
  g.nx = integer_or(v, "nx", path, 0);
  g.ny = integer_or(v, "ny", path, 0);
  try {
    g.validate();
  } catch (const Error& e) {
    invalid(path, e.what());
  }
  return g;
}

FarField parse_far_field(const std::string& text, const std::string& path) {
  if (text == "decay") return FarField::Decay;
  if (text == "dirichlet") return FarField::Dirichlet;
  invalid(path, "must be \"decay\" or \"dirichlet\"");
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

json trace_json(const BoundaryTrace& t) {
  json out = json::object();
  if (!t.modes().empty()) {
    json modes = json::array();
    for (const auto& m : t.modes()) {
      modes.push_back({{"omega", m.omega}, {"cos", vector_json(m.cos_amp)},
                       {"sin", vector_json(m.sin_amp)}});
    }
    out["modes"] = std::move(modes);
  }
  if (const SampledTrace* s = t.samples()) {
    json values = json::array();
    for (Eigen::Index k = 0; k < s->values.cols(); ++k) {
      values.push_back(vector_json(s->values.col(k)));
    }
    out["samples"] = {{"y", s->y}, {"values", std::move(values)}};
  }
  return out;
}

bool same_trace(const BoundaryTrace& a, const BoundaryTrace& b) {
  if (a.dim() != b.dim() || a.modes().size() != b.modes().size()) return false;
  for (std::size_t k = 0; k < a.modes().size(); ++k) {
    const auto& ma = a.modes()[k];
    const auto& mb = b.modes()[k];
    if (ma.omega != mb.omega || ma.cos_amp != mb.cos_amp || ma.sin_amp != mb.sin_amp) return false;
  }
  const SampledTrace* sa = a.samples();
  const SampledTrace* sb = b.samples();
  if (!sa || !sb) return !sa && !sb;
  return sa->y == sb->y && sa->values == sb->values;
}

}  // namespace

std::string_view to_string(FarField far) {
  return far == FarField::Decay ? "decay" : "dirichlet";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  if (a.problem.index() != b.problem.index()) return false;
  bool same_problem = false;
  if (const auto* ra = std::get_if<RobinProblem>(&a.problem)) {
    const auto& rb = std::get<RobinProblem>(b.problem);
    same_problem = ra->a.entries() == rb.a.entries() && ra->h.entries() == rb.h.entries() &&
                   same_trace(ra->trace, rb.trace);
  } else {
    const auto& ta = std::get<TwoLayerProblem>(a.problem);
    const auto& tb = std::get<TwoLayerProblem>(b.problem);
    same_problem = ta.a1.entries() == tb.a1.entries() && ta.a2.entries() == tb.a2.entries() &&
                   ta.lambda1 == tb.lambda1 && ta.lambda2 == tb.lambda2 && ta.l == tb.l &&
                   same_trace(ta.trace, tb.trace);
  }
  return same_problem && a.grid == b.grid && a.solver == b.solver && a.verify == b.verify &&
         a.output == b.output && a.convergence == b.convergence;
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k < upto; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(column) + ": " + e.what());
  }
  check_object(root, "config", {"problem", "grid", "solver", "verify", "output", "convergence"});

  RunConfig cfg;
  cfg.problem = parse_problem(required(root, "problem", ""));
  cfg.grid = parse_grid(required(root, "grid", ""));

  if (auto it = root.find("solver"); it != root.end()) {
    const std::string p = "solver";
    check_object(*it, p,
                 {"mode", "series_tol", "j_max", "prune_tol", "quad_tol", "eps_max", "fd_step"});
    SolverConfig& s = cfg.solver;
    try {
      s.mode = parse_convention(string_or(*it, "mode", p, "calibrated"));
    } catch (const Error&) {
      invalid(join(p, "mode"), "must be \"literal\" or \"calibrated\"");
    }
    s.series_tol = number_or(*it, "series_tol", p, s.series_tol);
    s.j_max = integer_or(*it, "j_max", p, s.j_max);
    s.prune_tol = number_or(*it, "prune_tol", p, s.prune_tol);
    s.quad_tol = number_or(*it, "quad_tol", p, s.quad_tol);
    s.eps_max = number_or(*it, "eps_max", p, s.eps_max);
    s.fd_step = number_or(*it, "fd_step", p, s.fd_step);
    if (!(s.series_tol >= 0.0)) invalid(join(p, "series_tol"), "must be >= 0");
    if (s.j_max < 0) invalid(join(p, "j_max"), "must be >= 0");
    if (!(s.prune_tol >= 0.0)) invalid(join(p, "prune_tol"), "must be >= 0");
    if (!(s.quad_tol > 0.0)) invalid(join(p, "quad_tol"), "must be positive");
    if (!(s.eps_max > 0.0)) invalid(join(p, "eps_max"), "must be positive");
    if (!(s.fd_step > 0.0)) invalid(join(p, "fd_step"), "must be positive");
  }

  if (auto it = root.find("verify"); it != root.end()) {
    const std::string p = "verify";
    check_object(*it, p, {"residuals", "mode_match", "fd", "fd_x_max", "fd_nx", "fd_ny",
                          "far_field", "far_tol"});
    VerifyConfig& v = cfg.verify;
    v.residuals = bool_or(*it, "residuals", p, v.residuals);
    v.mode_match = bool_or(*it, "mode_match", p, v.mode_match);
    v.fd = bool_or(*it, "fd", p, v.fd);
    v.fd_x_max = number_or(*it, "fd_x_max", p, v.fd_x_max);
    v.fd_nx = integer_or(*it, "fd_nx", p, v.fd_nx);
    v.fd_ny = integer_or(*it, "fd_ny", p, v.fd_ny);
    v.far_field = parse_far_field(string_or(*it, "far_field", p, "decay"), join(p, "far_field"));
    v.far_tol = number_or(*it, "far_tol", p, v.far_tol);
    if (!(v.fd_x_max > 0.0)) invalid(join(p, "fd_x_max"), "must be positive");
    if (v.fd_nx < 5) invalid(join(p, "fd_nx"), "must be >= 5");
    if (v.fd_ny < 4) invalid(join(p, "fd_ny"), "must be >= 4");
    if (!(v.far_tol > 0.0)) invalid(join(p, "far_tol"), "must be positive");
  }

  if (auto it = root.find("output"); it != root.end()) {
    const std::string p = "output";
    check_object(*it, p, {"dir", "fields", "report"});
    cfg.output.dir = string_or(*it, "dir", p, cfg.output.dir);
    cfg.output.fields = bool_or(*it, "fields", p, cfg.output.fields);
    cfg.output.report = bool_or(*it, "report", p, cfg.output.report);
    if (cfg.output.dir.empty()) invalid(join(p, "dir"), "must not be empty");
  }

  if (auto it = root.find("convergence"); it != root.end()) {
    const std::string p = "convergence";
    check_object(*it, p, {"resolutions", "j_sweep"});
    if (auto r = it->find("resolutions"); r != it->end()) {
      const std::string rp = join(p, "resolutions");
      if (!r->is_array()) invalid(rp, "must be an array");
      if (r->empty()) invalid(rp, "must not be empty");
      cfg.convergence.resolutions.clear();
      for (std::size_t k = 0; k < r->size(); ++k) {
        const std::string ep = rp + "[" + std::to_string(k) + "]";
        check_object((*r)[k], ep, {"nx", "ny"});
        Resolution res{integer_or((*r)[k], "nx", ep, 0), integer_or((*r)[k], "ny", ep, 0)};
        if (res.nx < 5 || res.ny < 4) invalid(ep, "needs nx >= 5 and ny >= 4");
        cfg.convergence.resolutions.push_back(res);
      }
    }
    cfg.convergence.j_sweep = integer_or(*it, "j_sweep", p, cfg.convergence.j_sweep);
    if (cfg.convergence.j_sweep < 0) invalid(join(p, "j_sweep"), "must be >= 0");
  }

  if (const auto* two = std::get_if<TwoLayerProblem>(&cfg.problem)) {
    if (!(cfg.grid.x0 >= 0.0 && cfg.grid.x0 < two->l && two->l < cfg.grid.x1)) {
      invalid("grid.x", "must satisfy 0 <= x0 < l < x1");
    }
    if (cfg.solver.mode == ConventionMode::Calibrated) {
      try {
        shared_eigenbasis(two->a1, two->a2);
      } catch (const Error& e) {
        invalid("problem", std::string("calibrated mode needs commuting a1, a2 (") + e.what() + ")");
      }
    }
  } else if (cfg.grid.x0 < 0.0) {
    invalid("grid.x", "must satisfy x0 >= 0");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ValidationError, "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

json to_json(const RunConfig& cfg) {
  json problem;
  if (const auto* r = std::get_if<RobinProblem>(&cfg.problem)) {
    problem = {{"kind", "robin"}, {"a", matrix_json(r->a.entries())},
               {"h", matrix_json(r->h.entries())}, {"trace", trace_json(r->trace)}};
  } else {
    const auto& t = std::get<TwoLayerProblem>(cfg.problem);
    problem = {{"kind", "two_layer"},       {"a1", matrix_json(t.a1.entries())},
               {"a2", matrix_json(t.a2.entries())}, {"lambda1", t.lambda1},
               {"lambda2", t.lambda2},       {"l", t.l},
               {"trace", trace_json(t.trace)}};
  }
  json resolutions = json::array();
  for (const auto& r : cfg.convergence.resolutions) {
    resolutions.push_back({{"nx", r.nx}, {"ny", r.ny}});
  }
  const auto& s = cfg.solver;
  const auto& v = cfg.verify;
  return json{
      {"problem", std::move(problem)},
      {"grid",
       {{"x", {cfg.grid.x0, cfg.grid.x1}},
        {"y", {cfg.grid.y0, cfg.grid.y1}},
        {"nx", cfg.grid.nx},
        {"ny", cfg.grid.ny}}},
      {"solver",
       {{"mode", std::string(to_string(s.mode))},
        {"series_tol", s.series_tol},
        {"j_max", s.j_max},
        {"prune_tol", s.prune_tol},
        {"quad_tol", s.quad_tol},
        {"eps_max", s.eps_max},
        {"fd_step", s.fd_step}}},
      {"verify",
       {{"residuals", v.residuals},
        {"mode_match", v.mode_match},
        {"fd", v.fd},
        {"fd_x_max", v.fd_x_max},
        {"fd_nx", v.fd_nx},
        {"fd_ny", v.fd_ny},
        {"far_field", std::string(to_string(v.far_field))},
        {"far_tol", v.far_tol}}},
      {"output",
       {{"dir", cfg.output.dir}, {"fields", cfg.output.fields}, {"report", cfg.output.report}}},
      {"convergence", {{"resolutions", std::move(resolutions)}, {"j_sweep", cfg.convergence.j_sweep}}},
  };
}

std::string serialize_config(const RunConfig& cfg) { return to_json(cfg).dump(2); }

}  // namespace transop::cli
