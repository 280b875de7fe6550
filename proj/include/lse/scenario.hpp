#pragma once

// Scenario documents: a YAML description of two LSE laws, the orders to
// check and an optional Monte Carlo block.
//
//   name: ghss-st                # optional
//   seed: 20261017               # root seed for every random draw
//   first:
//     mu: [0.0]
//     sigma: [[1.0]]
//     delta: [0.2]               # optional, zeros
//     generator: normal          # or {family: student, m: 3} / {family: exponential_power, s: 1.5}
//     alpha: inv_sqrt_z          # one | sqrt_z | inv_sqrt_z | {kind: power_z, power: p}
//     beta: inv_z                # zero | identity | inv_z | {kind: power_z, power: p}
//     mixing: {law: beta, lambda: 3}   # degenerate {z0} | gig {lambda, chi, tau} | discrete {atoms: [[z, w], ...]}
//   second: { ... same keys ... }
//   orders: [st, icx]            # optional, all orders
//   mc:                          # optional
//     samples: 1000000
//     multiplier: 3
//     coupled: true
//     grid: [-2, -1, 0, 1, 2]    # optional, pooled quantile grid
//     direction: [1, 1]          # projection for multivariate laws, default all ones
//   outputs: {report: report.json, curves: curves.csv}

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "lse/distribution.hpp"
#include "lse/errors.hpp"
#include "lse/orders.hpp"

namespace lse {

namespace detail {
// Eigen comparison asserts on mismatched shapes.
template <class A>
bool same(const A& a, const A& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}
}  // namespace detail

struct DistributionSpec {
  Vector mu;
  Matrix sigma;
  Vector delta;
  DensityGenerator generator = DensityGenerator::normal();
  AlphaBetaMap map;
  MixingDistribution mixing = MixingDistribution::degenerate(1.0);

  LseDistribution build() const { return LseDistribution(mu, sigma, delta, generator, map, mixing); }

  bool operator==(const DistributionSpec& o) const {
    return detail::same(mu, o.mu) && detail::same(sigma, o.sigma) && detail::same(delta, o.delta) && generator == o.generator &&
           map.alpha_kind == o.map.alpha_kind && map.beta_kind == o.map.beta_kind && map == o.map &&
           mixing == o.mixing;
  }
};

struct McSpec {
  std::size_t samples = 1000000;
  double multiplier = 3.0;
  bool coupled = true;
  std::vector<double> grid;
  std::optional<Vector> direction;
  bool operator==(const McSpec& o) const {
    return samples == o.samples && multiplier == o.multiplier && coupled == o.coupled && grid == o.grid &&
           direction.has_value() == o.direction.has_value() && (!direction || detail::same(*direction, *o.direction));
  }
};

struct OutputSpec {
  std::string report = "report.json";
  std::string curves = "curves.csv";
  bool operator==(const OutputSpec&) const = default;
};

struct ScenarioSpec {
  std::string name;
  std::uint64_t seed = 0;
  DistributionSpec first, second;
  std::vector<OrderKind> orders;
  std::optional<McSpec> mc;
  OutputSpec outputs;
  bool operator==(const ScenarioSpec&) const = default;
};

namespace detail {

inline int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

[[noreturn]] inline void schema_error(const YAML::Node& node, const std::string& message) {
  throw ParseError(line_of(node), message);
}

inline void allow_keys(const YAML::Node& map, const std::set<std::string>& keys, const std::string& where) {
  if (!map.IsMap()) schema_error(map, where + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!keys.count(key)) schema_error(kv.first, "unknown key '" + key + "' in " + where);
  }
}

inline const YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& where) {
  const YAML::Node node = map[key];
  if (!node) schema_error(map, "missing key '" + key + "' in " + where);
  return node;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) schema_error(node, what + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    schema_error(node, what + " has an invalid value '" + node.Scalar() + "'");
  }
}

inline double number(const YAML::Node& node, const std::string& what) {
  const double v = scalar<double>(node, what);
  if (!std::isfinite(v)) schema_error(node, what + " must be finite");
  return v;
}

inline std::vector<double> number_list(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) schema_error(node, what + " must be a list");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(number(item, what));
  return out;
}

inline Vector vector_of(const YAML::Node& node, const std::string& what) {
  const auto values = number_list(node, what);
  if (values.empty()) schema_error(node, what + " must not be empty");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline Matrix matrix_of(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() == 0) schema_error(node, what + " must be a nonempty list of rows");
  const auto n = static_cast<Eigen::Index>(node.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = number_list(node[static_cast<std::size_t>(i)], what + " row");
    if (static_cast<Eigen::Index>(row.size()) != n) schema_error(node[static_cast<std::size_t>(i)], what + " must be square");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        schema_error(node, what + " is not symmetric (entries " + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  return m;
}

// Rethrows library parameter errors with the line of the offending block.
template <class F>
auto at_line(const YAML::Node& node, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const ParameterError& e) {
    const int line = line_of(node);
    throw ParameterError(line > 0 ? "line " + std::to_string(line) + ": " + e.what() : e.what());
  } catch (const UsageError& e) {
    throw ParseError(line_of(node), e.what());
  }
}

inline DensityGenerator parse_generator(const YAML::Node& node) {
  std::string family;
  if (node.IsScalar()) family = node.as<std::string>();
  else {
    allow_keys(node, {"family", "m", "s"}, "generator");
    family = scalar<std::string>(require(node, "family", "generator"), "generator family");
  }
  return at_line(node, [&] {
    if (family == "normal") return DensityGenerator::normal();
    if (family == "cauchy") return DensityGenerator::cauchy();
    if (family == "laplace") return DensityGenerator::laplace();
    if (family == "logistic") return DensityGenerator::logistic();
    if (family == "student") {
      if (!node.IsMap()) schema_error(node, "student generator needs m");
      const double m = number(require(node, "m", "generator"), "m");
      if (m != std::floor(m)) throw ParameterError("student generator: m must be an integer");
      return DensityGenerator::student(static_cast<int>(m));
    }
    if (family == "exponential_power") {
      if (!node.IsMap()) schema_error(node, "exponential_power generator needs s");
      return DensityGenerator::exponential_power(number(require(node, "s", "generator"), "s"));
    }
    schema_error(node, "unknown generator family '" + family + "'");
  });
}

inline std::pair<std::string, double> kind_with_power(const YAML::Node& node, const std::string& what) {
  if (node.IsScalar()) return {node.as<std::string>(), 0.0};
  allow_keys(node, {"kind", "power"}, what);
  const auto kind = scalar<std::string>(require(node, "kind", what), what + " kind");
  const double power = node["power"] ? number(node["power"], what + " power") : 0.0;
  return {kind, power};
}

inline AlphaBetaMap parse_map(const YAML::Node& alpha, const YAML::Node& beta) {
  AlphaKind ak = AlphaKind::One;
  double ap = 0.0;
  if (alpha) {
    const auto [kind, power] = kind_with_power(alpha, "alpha");
    if (kind == "one") ak = AlphaKind::One;
    else if (kind == "sqrt_z") ak = AlphaKind::SqrtZ;
    else if (kind == "inv_sqrt_z") ak = AlphaKind::InvSqrtZ;
    else if (kind == "power_z") ak = AlphaKind::PowerZ, ap = power;
    else schema_error(alpha, "unknown alpha kind '" + kind + "'");
  }
  BetaKind bk = BetaKind::Zero;
  double bp = 0.0;
  if (beta) {
    const auto [kind, power] = kind_with_power(beta, "beta");
    if (kind == "zero") bk = BetaKind::Zero;
    else if (kind == "identity") bk = BetaKind::Identity;
    else if (kind == "inv_z") bk = BetaKind::InvZ;
    else if (kind == "power_z") bk = BetaKind::PowerZ, bp = power;
    else schema_error(beta, "unknown beta kind '" + kind + "'");
  }
  return AlphaBetaMap::make(ak, bk, ap, bp);
}

inline MixingDistribution parse_mixing(const YAML::Node& node) {
  allow_keys(node, {"law", "z0", "lambda", "chi", "tau", "atoms"}, "mixing");
  const auto law = scalar<std::string>(require(node, "law", "mixing"), "mixing law");
  return at_line(node, [&] {
    if (law == "degenerate") return MixingDistribution::degenerate(number(require(node, "z0", "mixing"), "z0"));
    if (law == "beta") return MixingDistribution::beta_lambda_one(number(require(node, "lambda", "mixing"), "lambda"));
    if (law == "gig")
      return MixingDistribution::gig(number(require(node, "lambda", "mixing"), "lambda"),
                                     number(require(node, "chi", "mixing"), "chi"),
                                     number(require(node, "tau", "mixing"), "tau"));
    if (law == "discrete") {
      const YAML::Node atoms = require(node, "atoms", "mixing");
      if (!atoms.IsSequence()) schema_error(atoms, "atoms must be a list of [z, weight] pairs");
      std::vector<std::pair<double, double>> out;
      for (const auto& a : atoms) {
        const auto pair = number_list(a, "atom");
        if (pair.size() != 2) schema_error(a, "each atom must be [z, weight]");
        out.emplace_back(pair[0], pair[1]);
      }
      return MixingDistribution::discrete(std::move(out));
    }
    schema_error(node, "unknown mixing law '" + law + "'");
  });
}

inline DistributionSpec parse_distribution(const YAML::Node& node, const std::string& where) {
  allow_keys(node, {"mu", "sigma", "delta", "generator", "alpha", "beta", "mixing"}, where);
  DistributionSpec d;
  d.mu = vector_of(require(node, "mu", where), where + ".mu");
  d.sigma = matrix_of(require(node, "sigma", where), where + ".sigma");
  d.delta = node["delta"] ? vector_of(node["delta"], where + ".delta") : Vector::Zero(d.mu.size());
  if (d.sigma.rows() != d.mu.size()) schema_error(node["sigma"], where + ".sigma dimension differs from mu");
  if (d.delta.size() != d.mu.size()) schema_error(node["delta"], where + ".delta dimension differs from mu");
  d.generator = node["generator"] ? parse_generator(node["generator"]) : DensityGenerator::normal();
  d.map = parse_map(node["alpha"], node["beta"]);
  d.mixing = node["mixing"] ? parse_mixing(node["mixing"]) : MixingDistribution::degenerate(1.0);
  at_line(node, [&] { return d.build(); });
  return d;
}

inline McSpec parse_mc(const YAML::Node& node) {
  allow_keys(node, {"samples", "multiplier", "coupled", "grid", "direction"}, "mc");
  McSpec mc;
  if (node["samples"]) {
    const double s = number(node["samples"], "mc.samples");
    if (s < 1 || s != std::floor(s)) schema_error(node["samples"], "mc.samples must be a positive integer");
    mc.samples = static_cast<std::size_t>(s);
  }
  if (node["multiplier"]) mc.multiplier = number(node["multiplier"], "mc.multiplier");
  if (!(mc.multiplier > 0.0)) schema_error(node["multiplier"], "mc.multiplier must be positive");
  if (node["coupled"]) mc.coupled = scalar<bool>(node["coupled"], "mc.coupled");
  if (node["grid"]) {
    mc.grid = number_list(node["grid"], "mc.grid");
    if (mc.grid.empty() || !std::is_sorted(mc.grid.begin(), mc.grid.end()))
      schema_error(node["grid"], "mc.grid must be nonempty and sorted");
  }
  if (node["direction"]) mc.direction = vector_of(node["direction"], "mc.direction");
  return mc;
}

}  // namespace detail

/// Parses and validates a scenario document.
inline ScenarioSpec parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
  }
  using namespace detail;
  if (!root || root.IsNull()) throw ParseError(0, "empty scenario document");
  allow_keys(root, {"name", "seed", "first", "second", "orders", "mc", "outputs"}, "scenario");
  ScenarioSpec spec;
  if (root["name"]) spec.name = scalar<std::string>(root["name"], "name");
  if (root["seed"]) spec.seed = scalar<std::uint64_t>(root["seed"], "seed");
  spec.first = parse_distribution(require(root, "first", "scenario"), "first");
  spec.second = parse_distribution(require(root, "second", "scenario"), "second");
  if (spec.first.mu.size() != spec.second.mu.size()) schema_error(root["second"], "first and second dimensions differ");
  if (!(spec.first.generator == spec.second.generator) || !(spec.first.map == spec.second.map) ||
      !(spec.first.mixing == spec.second.mixing))
    throw IncomparableFamiliesError("line " + std::to_string(line_of(root["second"])) +
                                    ": first and second must share generator, alpha/beta map and mixing law");
  if (root["orders"]) {
    const YAML::Node orders = root["orders"];
    if (!orders.IsSequence()) schema_error(orders, "orders must be a list");
    for (const auto& o : orders) {
      const auto name = scalar<std::string>(o, "order");
      const auto kind = order_from_string(name);
      if (!kind) schema_error(o, "unknown order '" + name + "'");
      spec.orders.push_back(*kind);
    }
  } else {
    spec.orders.assign(kAllOrders.begin(), kAllOrders.end());
  }
  if (root["mc"]) {
    spec.mc = parse_mc(root["mc"]);
    if (spec.mc->direction && spec.mc->direction->size() != spec.first.mu.size())
      schema_error(root["mc"]["direction"], "mc.direction dimension differs from mu");
  }
  if (root["outputs"]) {
    const YAML::Node out = root["outputs"];
    allow_keys(out, {"report", "curves"}, "outputs");
    if (out["report"]) spec.outputs.report = scalar<std::string>(out["report"], "outputs.report");
    if (out["curves"]) spec.outputs.curves = scalar<std::string>(out["curves"], "outputs.curves");
  }
  return spec;
}

namespace detail {

// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void emit_numbers(YAML::Emitter& out, const double* data, Eigen::Index n) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < n; ++i) out << format_double(data[i]);
  out << YAML::EndSeq;
}

inline void emit_distribution(YAML::Emitter& out, const DistributionSpec& d) {
  out << YAML::BeginMap;
  out << YAML::Key << "mu" << YAML::Value;
  emit_numbers(out, d.mu.data(), d.mu.size());
  out << YAML::Key << "sigma" << YAML::Value << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < d.sigma.rows(); ++i) {
    const Vector row = d.sigma.row(i).transpose();
    emit_numbers(out, row.data(), row.size());
  }
  out << YAML::EndSeq;
  out << YAML::Key << "delta" << YAML::Value;
  emit_numbers(out, d.delta.data(), d.delta.size());

  out << YAML::Key << "generator" << YAML::Value;
  const auto fam = d.generator.family();
  if (fam == GeneratorFamily::Student)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "family" << YAML::Value << "student" << YAML::Key << "m"
        << YAML::Value << d.generator.student_m() << YAML::EndMap;
  else if (fam == GeneratorFamily::ExponentialPower)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "family" << YAML::Value << "exponential_power" << YAML::Key
        << "s" << YAML::Value << format_double(d.generator.parameter()) << YAML::EndMap;
  else out << to_string(fam);

  out << YAML::Key << "alpha" << YAML::Value;
  if (d.map.alpha_kind == AlphaKind::PowerZ)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << "power_z" << YAML::Key << "power"
        << YAML::Value << format_double(d.map.alpha_power) << YAML::EndMap;
  else out << to_string(d.map.alpha_kind);
  out << YAML::Key << "beta" << YAML::Value;
  if (d.map.beta_kind == BetaKind::PowerZ)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << "power_z" << YAML::Key << "power"
        << YAML::Value << format_double(d.map.beta_power) << YAML::EndMap;
  else out << to_string(d.map.beta_kind);

  out << YAML::Key << "mixing" << YAML::Value << YAML::Flow << YAML::BeginMap;
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Degenerate>) {
          out << YAML::Key << "law" << YAML::Value << "degenerate" << YAML::Key << "z0" << YAML::Value
              << format_double(law.z0);
        } else if constexpr (std::is_same_v<T, BetaLambdaOne>) {
          out << YAML::Key << "law" << YAML::Value << "beta" << YAML::Key << "lambda" << YAML::Value
              << format_double(law.lambda);
        } else if constexpr (std::is_same_v<T, GeneralizedInverseGaussian>) {
          out << YAML::Key << "law" << YAML::Value << "gig" << YAML::Key << "lambda" << YAML::Value
              << format_double(law.lambda) << YAML::Key << "chi" << YAML::Value << format_double(law.chi) << YAML::Key
              << "tau" << YAML::Value << format_double(law.tau);
        } else {
          out << YAML::Key << "law" << YAML::Value << "discrete" << YAML::Key << "atoms" << YAML::Value
              << YAML::BeginSeq;
          for (const auto& [z, w] : law.atoms)
            out << YAML::Flow << YAML::BeginSeq << format_double(z) << format_double(w) << YAML::EndSeq;
          out << YAML::EndSeq;
        }
      },
      d.mixing.law());
  out << YAML::EndMap;
  out << YAML::EndMap;
}

}  // namespace detail

/// YAML text that parses back to an equal ScenarioSpec.
inline std::string serialize_scenario(const ScenarioSpec& spec) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  if (!spec.name.empty()) out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << spec.name;
  out << YAML::Key << "seed" << YAML::Value << spec.seed;
  out << YAML::Key << "first" << YAML::Value;
  detail::emit_distribution(out, spec.first);
  out << YAML::Key << "second" << YAML::Value;
  detail::emit_distribution(out, spec.second);
  out << YAML::Key << "orders" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (OrderKind k : spec.orders) out << to_string(k);
  out << YAML::EndSeq;
  if (spec.mc) {
    out << YAML::Key << "mc" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "samples" << YAML::Value << spec.mc->samples;
    out << YAML::Key << "multiplier" << YAML::Value << detail::format_double(spec.mc->multiplier);
    out << YAML::Key << "coupled" << YAML::Value << spec.mc->coupled;
    if (!spec.mc->grid.empty()) {
      out << YAML::Key << "grid" << YAML::Value;
      detail::emit_numbers(out, spec.mc->grid.data(), static_cast<Eigen::Index>(spec.mc->grid.size()));
    }
    if (spec.mc->direction) {
      out << YAML::Key << "direction" << YAML::Value;
      detail::emit_numbers(out, spec.mc->direction->data(), spec.mc->direction->size());
    }
    out << YAML::EndMap;
  }
  out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "report" << YAML::Value << YAML::DoubleQuoted << spec.outputs.report;
  out << YAML::Key << "curves" << YAML::Value << YAML::DoubleQuoted << spec.outputs.curves;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace lse
