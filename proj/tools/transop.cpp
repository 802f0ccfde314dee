// Command-line front end: solve, verify and convergence subcommands.
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "transop/config.hpp"
#include "transop/pipeline.hpp"

using namespace transop;
using namespace transop::cli;

namespace {

std::vector<Resolution> parse_resolutions(const std::string& text) {
  std::vector<Resolution> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto x = item.find('x');
    if (x == std::string::npos) {
      throw Error(ErrorKind::ValidationError, "--resolutions: expected NXxNY, got '" + item + "'");
    }
    try {
      Resolution r{std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1))};
      if (r.nx < 3 || r.ny < 3) throw std::invalid_argument("too small");
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::ValidationError, "--resolutions: bad entry '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::ValidationError, "--resolutions: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmutation-operator solver for layered elliptic systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string mode;
  std::string resolutions;
  bool verify = false;
  bool timing = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    sub->add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("-m,--mode", mode, "literal or calibrated (overrides solver.mode)")
        ->check(CLI::IsMember({"literal", "calibrated"}));
  };
  CLI::App* solve = app.add_subcommand("solve", "solve and write fields plus report.json");
  add_common(solve);
  solve->add_flag("--verify", verify, "also run the oracles and write verify.json");
  solve->add_flag("--timing", timing, "record wall-clock time in report.json");
  CLI::App* check = app.add_subcommand("verify", "solve, then compare against the oracles");
  add_common(check);
  check->add_flag("--timing", timing, "record wall-clock time in report.json");
  CLI::App* conv = app.add_subcommand("convergence", "error tables versus resolution and order");
  add_common(conv);
  conv->add_option("--resolutions", resolutions, "comma list such as 65x16,129x32");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  RunConfig cfg;
  RunOptions options;
  try {
    cfg = load_config(config_path);
    if (!mode.empty()) options.mode = parse_convention(mode);
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (!resolutions.empty()) cfg.convergence.resolutions = parse_resolutions(resolutions);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  options.verify = verify;
  options.timing = timing;

  if (*solve) return run_solve(cfg, options, std::cout, std::cerr);
  if (*check) return run_verify(cfg, options, std::cout, std::cerr);
  return run_convergence(cfg, options, std::cout, std::cerr);
}
