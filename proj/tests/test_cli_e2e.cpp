#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lse_e2e_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

Run lse(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = env + " \"" LSE_CLI_PATH "\" " + args + " > \"" + out.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out)};
}

std::string univariate(const std::string& name, const std::string& generator, const std::string& first,
                       const std::string& second, const std::string& tail = "") {
  auto block = [&](const std::string& params) {
    return params + "\n  generator: " + generator + "\n  alpha: inv_sqrt_z\n  beta: inv_z\n"
           "  mixing: {law: beta, lambda: 3}\n";
  };
  return "name: " + name + "\nseed: 11\nfirst:\n" + block(first) + "second:\n" + block(second) + tail;
}

const std::string kSt = univariate("st", "normal", "  mu: [0]\n  sigma: [[1]]\n  delta: [0.2]",
                                   "  mu: [0.3]\n  sigma: [[1]]\n  delta: [0.5]");

}  // namespace

TEST_CASE("reflexive scenario exits 0 with every order ordered", "[cli]") {
  const fs::path dir = scratch("reflexive");
  const std::string text = R"(seed: 3
first:
  mu: [0, 1]
  sigma: [[2, 0.3], [0.3, 1]]
  delta: [0.5, -0.2]
  alpha: inv_sqrt_z
  beta: inv_z
  mixing: {law: gig, lambda: -0.5, chi: 1, tau: 1}
second:
  mu: [0, 1]
  sigma: [[2, 0.3], [0.3, 1]]
  delta: [0.5, -0.2]
  alpha: inv_sqrt_z
  beta: inv_z
  mixing: {law: gig, lambda: -0.5, chi: 1, tau: 1}
)";
  spit(dir / "s.yaml", text);
  const Run r = lse("check --spec \"" + (dir / "s.yaml").string() + "\" --out \"" + dir.string() + "\"", dir);
  INFO(r.out);
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["schema_version"] == 1);
  REQUIRE(report["orders"].size() == 13);
  for (const auto& o : report["orders"]) CHECK(o["verdict"] == "ordered");
  CHECK_FALSE(fs::exists(dir / "curves.csv"));
}

TEST_CASE("exit status follows the verdicts", "[cli]") {
  const fs::path dir = scratch("status");
  spit(dir / "st.yaml", kSt + "orders: [st, icx]\n");
  spit(dir / "cx.yaml", kSt + "orders: [st, cx]\n");
  spit(dir / "cauchy.yaml", univariate("cauchy", "cauchy", "  mu: [0]\n  sigma: [[2]]\n  delta: [0]",
                                       "  mu: [0]\n  sigma: [[1]]\n  delta: [0]", "orders: [cx]\n"));
  auto run = [&](const std::string& f) {
    return lse("check --quiet --spec \"" + (dir / f).string() + "\" --out \"" + dir.string() + "\"", dir);
  };
  CHECK(run("st.yaml").code == 0);
  CHECK(run("cx.yaml").code == 2);
  const Run c = run("cauchy.yaml");
  CHECK(c.code == 3);
  CHECK(c.out.empty());
}

TEST_CASE("usage and parse errors exit 1", "[cli]") {
  const fs::path dir = scratch("errors");
  spit(dir / "bad.yaml", "first:\n  mu: [0]\n  sigma: [[1]]\n  bogus: 1\nsecond:\n  mu: [0]\n  sigma: [[1]]\n");
  const Run bad = lse("check --spec \"" + (dir / "bad.yaml").string() + "\" --out \"" + dir.string() + "\"", dir);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("line 4") != std::string::npos);

  spit(dir / "mismatch.yaml", "first:\n  mu: [0]\n  sigma: [[1]]\nsecond:\n  mu: [0]\n  sigma: [[1]]\n"
                              "  generator: laplace\n");
  CHECK(lse("check --spec \"" + (dir / "mismatch.yaml").string() + "\"", dir).code == 1);
  CHECK(lse("check --spec \"" + (dir / "missing.yaml").string() + "\"", dir).code == 1);
  CHECK(lse("frobnicate", dir).code == 1);
  CHECK(lse("", dir).code == 1);
}

TEST_CASE("curves are byte-identical for a fixed seed", "[cli]") {
  const fs::path dir = scratch("curves");
  spit(dir / "s.yaml", kSt + "mc: {samples: 20000}\n");
  const std::string spec = "--quiet --spec \"" + (dir / "s.yaml").string() + "\"";
  REQUIRE(lse("curves " + spec + " --out \"" + (dir / "a").string() + "\"", dir).code == 0);
  REQUIRE(lse("curves " + spec + " --out \"" + (dir / "b").string() + "\"", dir).code == 0);
  REQUIRE(lse("curves " + spec + " --seed 12 --out \"" + (dir / "c").string() + "\"", dir).code == 0);
  const std::string a = slurp(dir / "a" / "curves.csv");
  CHECK(a == slurp(dir / "b" / "curves.csv"));
  CHECK(a != slurp(dir / "c" / "curves.csv"));
  CHECK_FALSE(fs::exists(dir / "a" / "report.json"));

  CHECK(a.rfind("t,survival_1,survival_2,se_1,se_2,stoploss_1,stoploss_2\n", 0) == 0);
  CHECK(a.find('\r') == std::string::npos);
  CHECK(a.back() == '\n');
  // header + default grid
  CHECK(std::count(a.begin(), a.end(), '\n') == 42);
}

TEST_CASE("check with mc writes report and curves", "[cli]") {
  const fs::path dir = scratch("mc");
  spit(dir / "s.yaml", kSt + "orders: [st, icx]\nmc: {samples: 20000, grid: [-1, 0, 1, 2]}\n"
                             "outputs: {report: out/r.json, curves: out/c.csv}\n");
  const Run r = lse("check --spec \"" + (dir / "s.yaml").string() + "\"", dir, "LSE_OUT_DIR=\"" + dir.string() + "\"");
  INFO(r.out);
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "r.json"));
  CHECK(report["monte_carlo"]["st"]["pass"] == true);
  CHECK(report["monte_carlo"]["icx"]["pass"] == true);
  CHECK(report["monte_carlo"]["samples"] == 20000);
  const std::string csv = slurp(dir / "out" / "c.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(r.out.find("st: ordered") != std::string::npos);

  // --samples enables mc on a spec without it
  spit(dir / "plain.yaml", kSt + "orders: [st]\n");
  CHECK(lse("check --quiet --samples 10000 --spec \"" + (dir / "plain.yaml").string() + "\" --out \"" +
                (dir / "p").string() + "\"",
            dir)
            .code == 0);
  CHECK(fs::exists(dir / "p" / "curves.csv"));
}

TEST_CASE("cones subcommand reports witnesses", "[cli]") {
  const fs::path dir = scratch("cones");
  spit(dir / "m.txt", "1 0\n0 -1\n");
  const Run r = lse("cones \"" + (dir / "m.txt").string() + "\" --out \"" + dir.string() + "\"", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("copositive: outside") != std::string::npos);
  CHECK(r.out.find("witness") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "cones.json"));
  CHECK(j["copositive"]["status"] == "outside");
  CHECK(j["copositive"]["witness"].size() == 2);

  spit(dir / "horn.txt",
       "1 -1 1 1 -1\n-1 1 -1 1 1\n1 -1 1 -1 1\n1 1 -1 1 -1\n-1 1 1 -1 1\n");
  const Run h = lse("cones --cone copositive \"" + (dir / "horn.txt").string() + "\"", dir);
  CHECK(h.out.find("copositive: inside") != std::string::npos);

  spit(dir / "ragged.txt", "1 2\n3\n");
  CHECK(lse("cones \"" + (dir / "ragged.txt").string() + "\"", dir).code == 1);
  spit(dir / "asym.txt", "1 2\n3 1\n");
  CHECK(lse("cones \"" + (dir / "asym.txt").string() + "\"", dir).code == 1);
}

TEST_CASE("assumptions subcommand", "[cli]") {
  const fs::path dir = scratch("assumptions");
  const Run r = lse("assumptions --generator student --m 2 --sigma1 2 --sigma2 1 --out \"" + dir.string() + "\"", dir);
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "assumptions.json"));
  CHECK(j["limit"]["c_value"].get<double>() == Catch::Approx(0.25).epsilon(1e-12));
  CHECK(j["limit"]["assumption1"] == true);
  CHECK(j["limit"]["assumption2"] == true);
  CHECK(r.out.find("assumption 2: satisfied") != std::string::npos);

  CHECK(lse("assumptions --generator weibull", dir).code == 1);
  CHECK(lse("assumptions --generator student --m 2.5", dir).code == 1);
}
