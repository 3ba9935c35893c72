#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinbound/commands.hpp"

using namespace spinbound;
using doctest::Approx;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "spinbound");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("spinbound_test_" + name);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("sweep-chain") {
  const auto r = run({"sweep-chain", "--n", "6", "--steps", "5", "--bx-max", "1"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"bx", "jx_expect", "e_ground", "e_sep_qfi", "e_lower_wy", "corr_ground",
                                            "corr_sep", "corr_wy"});
  CHECK(std::stod(rows[1][2]) == Approx(-1.5));
  CHECK(std::stod(rows[1][3]) == Approx(-1.5));
  double prev = -1.0;
  for (size_t i = 1; i < rows.size(); ++i) {
    const double lo = std::stod(rows[i][4]), eg = std::stod(rows[i][2]), hi = std::stod(rows[i][3]);
    CHECK(lo <= eg + 1e-9);
    CHECK(eg <= hi + 1e-9);
    const double jx = std::stod(rows[i][1]);
    CHECK(jx >= prev);
    prev = jx;
  }

  const auto odd = run({"sweep-chain", "--n", "7"});
  CHECK(odd.code == 2);
  CHECK(odd.err.find("even") != std::string::npos);
}

TEST_CASE("qfi-bound") {
  const auto r = run({"qfi-bound", "--n", "4,10", "--steps", "6"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 13);
  CHECK(rows[0].size() == 8);
  for (size_t i = 1; i < rows.size(); ++i) {
    const int n = std::stoi(rows[i][0]);
    const double delta = std::stod(rows[i][5]);
    CHECK(delta >= -1e-9);
    CHECK(delta <= 8.0 / n);
    CHECK(std::stod(rows[i][6]) == Approx(8.0 / n));
  }
  const auto grid = cli::qfi_grid(10, 1.0, 30);
  CHECK(grid.size() == 30);
  CHECK(grid.front() > 0.0);
  CHECK(grid.back() == Approx(3.0));
}

TEST_CASE("kprod") {
  const auto r = run({"kprod", "--n", "10", "--k", "1,2,5", "--jx0", "0.3"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 4);
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][2]) >= std::stod(rows[i][1]) - 1e-12);
    CHECK(rows[i][6] == rows[1][6]);
  }
  // k = 1 is the separable chain bound at zero field
  CHECK(std::stod(rows[1][1]) == Approx(-10 * (0.25 - 0.09 / 4)));
  CHECK(run({"kprod", "--n", "10", "--k", "3"}).code == 2);
}

TEST_CASE("verify") {
  const auto r = run({"verify", "saturation", "--trials", "6", "--seed", "4"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("suite") == "saturation");
  CHECK(j.at("trials") == 6);
  CHECK(j.at("passed") == 6);
  CHECK(j.at("failed") == 0);
  CHECK(j.at("seed") == 4);
  CHECK(j.at("worst_abs_err").get<double>() <= 1e-12);

  CHECK(run({"verify", "bogus"}).code == 2);
  for (const auto& s : cli::verify_suites()) {
    const auto rep = cli::verify(s, 1, 3);
    CHECK_MESSAGE(rep.failed == 0, s);
  }
}

TEST_CASE("output is deterministic and independent of threads") {
  const auto a = run({"kprod", "--n", "6", "--k", "1,2,3", "--threads", "1"});
  const auto b = run({"kprod", "--n", "6", "--k", "1,2,3", "--threads", "3"});
  CHECK(a.out == b.out);
  const auto v1 = run({"verify", "witnesses", "--trials", "8", "--seed", "9", "--threads", "2"});
  const auto v2 = run({"verify", "witnesses", "--trials", "8", "--seed", "9"});
  CHECK(v1.out == v2.out);
}

TEST_CASE("thread count resolution") {
  ::unsetenv("SPINBOUND_THREADS");
  CHECK(cli::resolve_threads(3) == 3);
  CHECK(cli::resolve_threads(0) >= 1);
  ::setenv("SPINBOUND_THREADS", "5", 1);
  CHECK(cli::resolve_threads(2) == 5);
  ::setenv("SPINBOUND_THREADS", "junk", 1);
  CHECK(cli::resolve_threads(2) == 2);
  ::unsetenv("SPINBOUND_THREADS");

  const auto squares = cli::parallel_map<int>(50, 4, [](int i) { return i * i; });
  for (int i = 0; i < 50; ++i) CHECK(squares[i] == i * i);
}

TEST_CASE("config file, output file and flags") {
  const auto cfg = temp_file("config.json");
  const auto out = temp_file("out.csv");
  {
    std::ofstream f(cfg);
    f << R"({"n": 4, "steps": 3, "bx_max": 0.5, "j": 2.0})";
  }
  const auto r = run({"sweep-chain", "--config", cfg.string(), "--steps", "2", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(out);
  std::stringstream text;
  text << in.rdbuf();
  const auto rows = parse_csv(text.str());
  REQUIRE(rows.size() == 3);  // the flag wins over the config
  CHECK(std::stod(rows[1][2]) == Approx(-4 * 2.0 / 4));
  CHECK(std::stod(rows[2][0]) == Approx(0.5));
  std::filesystem::remove(cfg);
  std::filesystem::remove(out);

  CHECK(run({"sweep-chain", "--config", "/nonexistent/config.json"}).code == 2);
  CHECK(run({"sweep-chain", "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
}

TEST_CASE("witness and report commands") {
  const auto state = temp_file("state.json");
  {
    const double th = 3.14159265358979323846 / 8;
    nlohmann::json re = nlohmann::json::array();
    const double a[4] = {std::cos(th), 0, 0, std::sin(th)};
    for (int i = 0; i < 4; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < 4; ++k) row.push_back(a[i] * a[k]);
      re.push_back(row);
    }
    std::ofstream f(state);
    f << nlohmann::json{{"dim", 4}, {"re", re}}.dump();
  }
  const auto w = run({"witness", "--criterion", "corr_qfi", "--axis", "x", "--state-file", state.string()});
  REQUIRE(w.code == 0);
  const auto jw = nlohmann::json::parse(w.out);
  CHECK(jw.at("violated") == true);
  CHECK(jw.at("lower").is_null());
  std::filesystem::remove(state);

  const auto model = temp_file("model.json");
  {
    std::ofstream f(model);
    f << R"({"n": 4, "d": 2,
             "terms": [{"j": -1.0, "h": {"dim": 2, "re": [[0.5, 0], [0, -0.5]]}}],
             "b": [0.3, 0, 0],
             "generators": [{"dim": 2, "re": [[0, 1], [1, 0]]},
                            {"dim": 2, "re": [[0, 0], [0, 0]], "im": [[0, -1], [1, 0]]},
                            {"dim": 2, "re": [[1, 0], [0, -1]]}],
             "edges": [[1, 2], [2, 3], [3, 4], [4, 1]]})";
  }
  const auto rep = run({"report", "--model", model.string()});
  INFO(rep.err);
  REQUIRE(rep.code == 0);
  const auto jr = nlohmann::json::parse(rep.out);
  CHECK(jr.at("E_ground").get<double>() <= jr.at("E_sep").get<double>() + 1e-9);
  CHECK(jr.at("delta").is_null());
  std::filesystem::remove(model);
}

}
