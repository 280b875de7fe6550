// lse: order checks, Monte Carlo curves, matrix cones and generator
// assumptions from the command line.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "lse/cli.hpp"

namespace {

using namespace lse;
using namespace lse::cli;

std::filesystem::path default_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LSE_OUT_DIR"); env && *env) return env;
  return ".";
}

void print_summary(const RunResult& r) {
  if (r.report.contains("orders"))
    for (const auto& o : r.report["orders"]) {
      std::cout << o["order"].get<std::string>() << ": " << o["verdict"].get<std::string>();
      if (o.contains("empirically_verified") && o["empirically_verified"].get<bool>()) std::cout << " (verified)";
      std::cout << '\n';
    }
  if (r.report.contains("monte_carlo")) {
    const auto& mc = r.report["monte_carlo"];
    std::cout << "mc st: " << (mc["st"]["pass"].get<bool>() ? "pass" : "fail")
              << ", icx: " << (mc["icx"]["pass"].get<bool>() ? "pass" : "fail") << '\n';
  }
  if (!r.report_path.empty() && r.report.contains("orders")) std::cout << "report: " << r.report_path.string() << '\n';
  if (!r.curves_path.empty()) std::cout << "curves: " << r.curves_path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location-scale mixtures of elliptical laws: stochastic order checks"};
  app.require_subcommand(1);

  std::string spec_path, out_flag;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  bool quiet = false;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "scenario YAML file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_flag, "output directory (default $LSE_OUT_DIR or .)");
    cmd->add_option("--seed", seed, "root seed, overrides the scenario");
    cmd->add_option("--samples", samples, "Monte Carlo sample count, enables mc")->check(CLI::PositiveNumber);
    cmd->add_flag("--quiet", quiet, "no summary on stdout");
  };

  auto* check = app.add_subcommand("check", "order verdicts, JSON report and optional Monte Carlo curves");
  add_run_flags(check);
  auto* curves = app.add_subcommand("curves", "Monte Carlo survival and stop-loss curves only");
  add_run_flags(curves);

  auto* cones = app.add_subcommand("cones", "psd / copositive / completely positive test of a matrix file");
  std::string matrix_path, cone = "all";
  cones->add_option("matrix", matrix_path, "whitespace-delimited square matrix")->required()->check(CLI::ExistingFile);
  cones->add_option("--cone", cone, "psd, copositive, completely_positive or all")
      ->check(CLI::IsMember({"psd", "copositive", "completely_positive", "all"}));
  cones->add_option("--out", out_flag, "write cones.json into this directory");
  cones->add_flag("--quiet", quiet, "no summary on stdout");

  auto* assumptions = app.add_subcommand("assumptions", "tail ratio limit of a generator for two scales");
  std::string family = "normal";
  double param = 0.0, sigma1 = 1.0, sigma2 = 1.0;
  assumptions->add_option("--generator", family, "normal, student, cauchy, laplace, logistic, exponential_power");
  assumptions->add_option("--param", param, "student m or exponential_power s");
  assumptions->add_option("--m", param, "alias of --param for student");
  assumptions->add_option("--s", param, "alias of --param for exponential_power");
  assumptions->add_option("--sigma1", sigma1)->check(CLI::PositiveNumber);
  assumptions->add_option("--sigma2", sigma2)->check(CLI::PositiveNumber);
  assumptions->add_option("--out", out_flag, "write assumptions.json into this directory");
  assumptions->add_flag("--quiet", quiet, "no summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (check->parsed() || curves->parsed()) {
      const ScenarioSpec spec = parse_scenario(read_file(spec_path));
      RunOptions opt{default_out_dir(out_flag), seed, samples, quiet};
      ScenarioSpec run = spec;
      if (curves->parsed() && !run.mc) run.mc = McSpec{};
      const RunResult r = run_check(run, opt, check->parsed());
      if (!quiet) print_summary(r);
      return curves->parsed() ? kOk : r.exit_code;
    }
    if (cones->parsed()) {
      const Json j = cones_report(parse_matrix(read_file(matrix_path)), cone);
      if (!quiet) std::cout << cones_text(j);
      if (!out_flag.empty()) write_file(std::filesystem::path(out_flag) / "cones.json", j.dump(2) + "\n");
      return kOk;
    }
    if (assumptions->parsed()) {
      const Json j = assumptions_report(generator_from(family, param), sigma1, sigma2);
      if (!quiet) {
        const auto& l = j["limit"];
        std::cout << "generator: " << j["generator"].get<std::string>() << '\n'
                  << "C: " << l["c_value"].dump() << (l["closed_form"].get<bool>() ? " (closed form)" : " (numeric)")
                  << '\n'
                  << "assumption 1: " << (l["assumption1"].get<bool>() ? "satisfied" : "not satisfied") << '\n'
                  << "assumption 2: "
                  << (!l["assumption2_applicable"].get<bool>() ? "not applicable"
                      : l["assumption2"].get<bool>()          ? "satisfied"
                                                              : "not satisfied")
                  << '\n';
      }
      if (!out_flag.empty()) write_file(std::filesystem::path(out_flag) / "assumptions.json", j.dump(2) + "\n");
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
