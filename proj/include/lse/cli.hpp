#pragma once

// Scenario execution for the command-line front end: order reports as JSON,
// Monte Carlo curves as CSV, plus the cones and assumptions subcommands.

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lse/cones.hpp"
#include "lse/empirical.hpp"
#include "lse/generators.hpp"
#include "lse/orders.hpp"
#include "lse/scenario.hpp"

namespace lse::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kUsage = 1, kNotOrdered = 2, kInconclusive = 3 };

using Json = nlohmann::ordered_json;

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;     // overrides the scenario seed
  std::optional<std::size_t> samples;    // overrides mc.samples (and enables mc)
  bool quiet = false;
};

struct RunResult {
  int exit_code = kOk;
  Json report;
  std::vector<CurvePoint> curves;
  std::filesystem::path report_path, curves_path;
};

/// Non-finite values become strings so the report stays valid JSON.
inline Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

inline Json to_json(const LimitRatioResult& r) {
  return Json{{"sigma1", number(r.sigma1)},
              {"sigma2", number(r.sigma2)},
              {"c_value", number(r.c_value)},
              {"converged", r.converged},
              {"closed_form", r.closed_form},
              {"assumption1", r.satisfies_assumption1},
              {"assumption2", r.satisfies_assumption2},
              {"assumption2_applicable", r.assumption2_applicable}};
}

inline Json to_json(const OrderReport& r) {
  Json clauses = Json::array();
  for (const auto& c : r.clauses) clauses.push_back(Json{{"tag", c.tag}, {"text", c.text}, {"value", c.value}});
  Json checks = Json::array();
  for (const auto& c : r.assumption_checks) checks.push_back(to_json(c));
  return Json{{"order", to_string(r.order)},
              {"verdict", to_string(r.verdict)},
              {"sufficient", to_string(r.sufficient)},
              {"necessary", to_string(r.necessary)},
              {"clauses", clauses},
              {"assumption_checks", checks}};
}

inline Json to_json(const DominanceResult& r) {
  Json j{{"pass", r.pass},
         {"max_violation", number(r.max_violation)},
         {"standard_error_at_violation", number(r.standard_error_at_violation)},
         {"exceedances", r.exceedances}};
  j["violation_point"] = r.violation_point ? number(*r.violation_point) : Json(nullptr);
  if (!r.functional.empty()) j["functional"] = r.functional;
  return j;
}

inline Json to_json(const ConeVerdict& v) {
  Json j{{"status", to_string(v.status)}, {"certificate", to_string(v.certificate)}, {"value", number(v.value)}};
  if (v.witness) {
    Json w = Json::array();
    for (Eigen::Index i = 0; i < v.witness->size(); ++i) w.push_back(number((*v.witness)(i)));
    j["witness"] = w;
  }
  return j;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline const char* kCsvHeader = "t,survival_1,survival_2,se_1,se_2,stoploss_1,stoploss_2";

/// Locale-independent CSV with LF line endings.
inline std::string curves_csv(const std::vector<CurvePoint>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    for (double v : {r.t, r.survival_1, r.survival_2, r.se_1, r.se_2, r.stoploss_1, r.stoploss_2}) {
      out += format_number(v);
      out += ',';
    }
    out.back() = '\n';
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << content;
  if (!f) throw UsageError("failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace detail {

inline McConfig mc_config(const ScenarioSpec& spec) {
  McConfig cfg;
  cfg.seed = spec.seed;
  cfg.sample_count = spec.mc->samples;
  cfg.confidence_multiplier = spec.mc->multiplier;
  cfg.coupled = spec.mc->coupled;
  cfg.grid = spec.mc->grid;
  return cfg;
}

// Univariate laws the curves and st/icx dominance are computed on.
inline std::pair<LseDistribution, LseDistribution> projected(const ScenarioSpec& spec, const LseDistribution& d1,
                                                             const LseDistribution& d2) {
  if (d1.dim() == 1) return {d1, d2};
  const Vector a = spec.mc->direction ? *spec.mc->direction : Vector::Ones(d1.dim());
  return {linear_functional(d1, a), linear_functional(d2, a)};
}

inline std::vector<Vector> orthant_corners(const LseDistribution& d1, const LseDistribution& d2) {
  const Vector centre = 0.5 * (d1.mu() + d2.mu());
  const Vector scale = (0.5 * (d1.sigma().diagonal() + d2.sigma().diagonal())).cwiseSqrt();
  return {centre, centre + 0.5 * scale, centre - 0.5 * scale, centre + scale};
}

}  // namespace detail

/// Applies option overrides to a parsed scenario.
inline ScenarioSpec apply_options(ScenarioSpec spec, const RunOptions& opt) {
  if (opt.seed) spec.seed = *opt.seed;
  if (opt.samples) {
    if (!spec.mc) spec.mc = McSpec{};
    spec.mc->samples = *opt.samples;
  }
  return spec;
}

/// Runs every requested order check and, with an mc block, the matching
/// Monte Carlo dominance checks; writes the JSON report and CSV curves.
inline RunResult run_check(const ScenarioSpec& input, const RunOptions& opt, bool analytic = true) {
  const ScenarioSpec spec = apply_options(input, opt);
  const LseDistribution d1 = spec.first.build(), d2 = spec.second.build();
  RunResult result;
  Json& rep = result.report;
  rep["schema_version"] = kSchemaVersion;
  rep["scenario"] = spec.name;
  rep["seed"] = spec.seed;
  rep["dimension"] = d1.dim();

  std::optional<DominanceResult> st_mc, icx_mc, cx_mc, uo_mc;
  if (spec.mc) {
    const McConfig cfg = detail::mc_config(spec);
    const auto [p1, p2] = detail::projected(spec, d1, d2);
    st_mc = verify_st(p1, p2, cfg, &result.curves);
    icx_mc = verify_icx(p1, p2, cfg);
    auto wants = [&](std::initializer_list<OrderKind> ks) {
      for (OrderKind k : spec.orders)
        for (OrderKind w : ks)
          if (k == w) return true;
      return false;
    };
    if (analytic && wants({OrderKind::CX, OrderKind::LCX, OrderKind::ILCX})) {
      std::vector<Vector> dirs;
      for (int i = 0; i < d1.dim(); ++i) dirs.push_back(Vector::Unit(d1.dim(), i));
      if (d1.dim() > 1) dirs.push_back(Vector::Ones(d1.dim()));
      cx_mc = verify_cx(d1, d2, cfg, dirs);
    }
    if (analytic && d1.dim() > 1 && wants({OrderKind::UO, OrderKind::SM}))
      uo_mc = verify_orthant(d1, d2, cfg, detail::orthant_corners(d1, d2));

    Json mc{{"samples", spec.mc->samples},
            {"multiplier", number(spec.mc->multiplier)},
            {"coupled", spec.mc->coupled},
            {"grid_points", result.curves.size()}};
    if (d1.dim() > 1) {
      Json dir = Json::array();
      const Vector a = spec.mc->direction ? *spec.mc->direction : Vector::Ones(d1.dim());
      for (Eigen::Index i = 0; i < a.size(); ++i) dir.push_back(number(a(i)));
      mc["direction"] = dir;
    }
    mc["st"] = to_json(*st_mc);
    mc["icx"] = to_json(*icx_mc);
    if (cx_mc) mc["cx"] = to_json(*cx_mc);
    if (uo_mc) mc["orthant"] = to_json(*uo_mc);
    mc["curves"] = spec.outputs.curves;
    rep["monte_carlo"] = mc;
  }

  bool any_not = false, any_open = false;
  if (analytic) {
    Json orders = Json::array();
    for (OrderKind k : spec.orders) {
      const OrderReport r = check(d1, d2, k);
      Json j = to_json(r);
      // An inconclusive order counts as verified when its Monte Carlo check passes.
      const DominanceResult* probe = nullptr;
      if ((k == OrderKind::ST || k == OrderKind::PLST) && st_mc && d1.dim() == 1) probe = &*st_mc;
      if ((k == OrderKind::ICX || k == OrderKind::IPLCX) && icx_mc && d1.dim() == 1) probe = &*icx_mc;
      if ((k == OrderKind::CX || k == OrderKind::LCX || k == OrderKind::ILCX) && cx_mc) probe = &*cx_mc;
      if ((k == OrderKind::UO || k == OrderKind::SM) && uo_mc) probe = &*uo_mc;
      bool verified = false;
      if (probe) {
        j["monte_carlo_pass"] = probe->pass;
        verified = r.verdict == Verdict::Inconclusive && probe->pass;
        j["empirically_verified"] = verified;
      }
      if (r.verdict == Verdict::NotOrdered) any_not = true;
      if (r.verdict == Verdict::Inconclusive && !verified) any_open = true;
      orders.push_back(j);
    }
    rep["orders"] = orders;
  }
  result.exit_code = any_not ? kNotOrdered : any_open ? kInconclusive : kOk;
  rep["exit_status"] = result.exit_code;

  result.report_path = opt.out_dir / spec.outputs.report;
  if (analytic) write_file(result.report_path, rep.dump(2) + "\n");
  if (spec.mc) {
    result.curves_path = opt.out_dir / spec.outputs.curves;
    write_file(result.curves_path, curves_csv(result.curves));
  }
  return result;
}

/// Reads a whitespace-delimited square matrix.
inline Eigen::MatrixXd parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      pos = line.find_first_not_of(" \t\r,", pos);
      if (pos == std::string::npos) break;
      const std::size_t end = line.find_first_of(" \t\r,", pos);
      const std::string token = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      double v = 0.0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      if (res.ec != std::errc() || res.ptr != token.data() + token.size() || !std::isfinite(v))
        throw ParseError(line_no, "invalid matrix entry '" + token + "'");
      row.push_back(v);
      pos = end;
      if (pos == std::string::npos) break;
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(line_no, "ragged matrix row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(0, "empty matrix");
  if (rows.size() != rows.front().size()) throw ParseError(0, "matrix must be square");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

/// psd / copositive / completely positive verdicts of one matrix.
inline Json cones_report(const Eigen::MatrixXd& a, const std::string& which) {
  Json j{{"schema_version", kSchemaVersion}, {"dimension", a.rows()}};
  if (which == "psd" || which == "all") j["psd"] = to_json(is_psd(a));
  if (which == "copositive" || which == "all") j["copositive"] = to_json(is_copositive(a));
  if (which == "completely_positive" || which == "all") j["completely_positive"] = to_json(is_completely_positive(a));
  return j;
}

inline std::string cones_text(const Json& j) {
  std::ostringstream out;
  for (const char* key : {"psd", "copositive", "completely_positive"}) {
    if (!j.contains(key)) continue;
    const auto& v = j[key];
    out << key << ": " << v["status"].get<std::string>() << " (" << v["certificate"].get<std::string>() << ")";
    if (v.contains("witness")) {
      out << " witness:";
      for (const auto& w : v["witness"]) out << ' ' << w.dump();
    }
    out << '\n';
  }
  return out.str();
}

inline DensityGenerator generator_from(const std::string& family, double param) {
  if (family == "normal") return DensityGenerator::normal();
  if (family == "cauchy") return DensityGenerator::cauchy();
  if (family == "laplace") return DensityGenerator::laplace();
  if (family == "logistic") return DensityGenerator::logistic();
  if (family == "student") {
    if (param != std::floor(param)) throw ParameterError("student generator: m must be an integer");
    return DensityGenerator::student(static_cast<int>(param));
  }
  if (family == "exponential_power") return DensityGenerator::exponential_power(param);
  throw UsageError("unknown generator family '" + family + "'");
}

inline Json assumptions_report(const DensityGenerator& gen, double sigma1, double sigma2) {
  const LimitRatioResult closed = limit_ratio(gen, sigma1, sigma2);
  const LimitRatioResult numeric = limit_ratio_numeric(gen, sigma1, sigma2, 0.0, 0.0);
  return Json{{"schema_version", kSchemaVersion},
              {"generator", gen.name()},
              {"limit", to_json(closed)},
              {"numeric_ladder", to_json(numeric)}};
}

}  // namespace lse::cli
