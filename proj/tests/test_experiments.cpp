#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "pfl/errors.hpp"
#include "pfl/experiments.hpp"
#include "pfl/io.hpp"

using namespace pfl;
using nlohmann::json;

namespace {

json tanh_config() {
  return {{"experiment", "tanh_calibration"},
          {"n", 1},
          {"eps", {0.1}},
          {"grid", {{"spacing_per_eps", 8}}},
          {"params", {{"length", 10}, {"property_samples", 200}}},
          {"seed", 5}};
}

json boundary_config() {
  return {{"experiment", "boundary_atom"},
          {"n", 2},
          {"eps", {0.2, 0.1}},
          {"params", {{"S", 1.0}, {"base", {{"shape", "compact_bump"}, {"amplitude", 2.0}, {"width", 1.0}}}}}};
}

bool mentions(const std::vector<std::string>& msgs, const std::string& needle) {
  for (const auto& m : msgs)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "pfl_test_experiments" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("valid configs pass validation") {
  CHECK(validate_config(tanh_config()).empty());
  CHECK(validate_config(boundary_config()).empty());
  const auto cfg = parse_config(boundary_config());
  CHECK(cfg.experiment == "boundary_atom");
  CHECK(cfg.eps == std::vector<double>{0.2, 0.1});
}

TEST_CASE("validation names the offending field") {
  json up = boundary_config();
  up["eps"] = {0.1, 0.2};
  CHECK(mentions(validate_config(up), "eps must be strictly decreasing"));

  json osc = {{"experiment", "oscillation_atom"}, {"n", 2}, {"eps", {0.4, 0.2}},
              {"params", {{"S", 0.02}, {"delta", 0.3}}}};
  CHECK(mentions(validate_config(osc), "ModifiedFloor"));
  osc["params"]["delta"] = 0.2;
  CHECK(validate_config(osc).empty());

  json unknown = tanh_config();
  unknown["colour"] = "blue";
  CHECK(mentions(validate_config(unknown), "colour"));

  json missing = boundary_config();
  missing["params"].erase("S");
  CHECK(mentions(validate_config(missing), "params.S"));

  json name = tanh_config();
  name["experiment"] = "nope";
  CHECK_FALSE(validate_config(name).empty());

  json dim = tanh_config();
  dim["n"] = 2;
  CHECK_FALSE(validate_config(dim).empty());

  json negative = boundary_config();
  negative["eps"] = {0.2, -0.1};
  CHECK_FALSE(validate_config(negative).empty());

  CHECK_THROWS_AS(parse_config(up), ConfigError);
}

TEST_CASE("every shipped config validates") {
  const std::filesystem::path dir = PFL_SOURCE_DIR "/configs";
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
  CHECK(count == experiment_names().size());
}

TEST_CASE("worker cap from the environment") {
  ::setenv("PFL_WORKERS", "3", 1);
  CHECK(worker_cap_from_env() == 3);
  ::setenv("PFL_WORKERS", "many", 1);
  CHECK_FALSE(worker_cap_from_env().has_value());
  ::setenv("PFL_WORKERS", "0", 1);
  CHECK_FALSE(worker_cap_from_env().has_value());
  ::unsetenv("PFL_WORKERS");
  CHECK_FALSE(worker_cap_from_env().has_value());
}

TEST_CASE("tanh calibration run and artifacts") {
  const auto cfg = parse_config(tanh_config());
  const RunResult a = run_experiment(cfg);
  REQUIRE(a.summary.find("AC1") != nullptr);
  REQUIRE(a.summary.find("AC10") != nullptr);
  CHECK(a.summary.find("AC10")->passed);
  CHECK(a.summary.find("nothing") == nullptr);
  REQUIRE(a.rows.size() == 1);
  REQUIRE(a.rows[0].S_eps.has_value());
  CHECK(*a.rows[0].S_eps == doctest::Approx(1.0).epsilon(1e-2));

  // Two runs write byte-identical artifacts.
  const RunResult b = run_experiment(cfg);
  const auto da = scratch("a");
  const auto db = scratch("b");
  write_run(cfg, a, da);
  write_run(cfg, b, db);
  CHECK(read_text(da / "sweep.csv") == read_text(db / "sweep.csv"));
  CHECK(read_text(da / "summary.json") == read_text(db / "summary.json"));
  CHECK(read_text(da / "manifest.json") == read_text(db / "manifest.json"));

  // The manifest lists every other file with its hash.
  const json manifest = json::parse(read_text(da / "manifest.json"));
  std::size_t listed = 0;
  for (const auto& f : manifest["files"]) {
    const auto path = da / f["path"].get<std::string>();
    REQUIRE(std::filesystem::exists(path));
    CHECK(f["sha256"].get<std::string>() == sha256_file(path));
    CHECK(f["bytes"].get<std::uintmax_t>() == std::filesystem::file_size(path));
    ++listed;
  }
  std::size_t on_disk = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(da))
    if (e.is_regular_file()) ++on_disk;
  CHECK(listed + 1 == on_disk);
  CHECK(std::filesystem::exists(da / "fields" / "tanh_eps_0.1.field"));

  // Summary JSON round-trips.
  const auto back = summary_from_json(json::parse(read_text(da / "summary.json")));
  REQUIRE(back.assertions.size() == a.summary.assertions.size());
  for (std::size_t i = 0; i < back.assertions.size(); ++i) {
    CHECK(back.assertions[i].id == a.summary.assertions[i].id);
    CHECK(back.assertions[i].passed == a.summary.assertions[i].passed);
    CHECK(back.assertions[i].measured == a.summary.assertions[i].measured);
  }
  CHECK(render_summary(back) == render_summary(a.summary));
}

TEST_CASE("sweep CSV keeps its columns for missing values") {
  SweepRow r;
  r.experiment = "x";
  r.n = 2;
  r.eps = 0.5;
  r.S_eps = 1.25;
  const std::string csv = sweep_csv({r});
  const auto header = csv.substr(0, csv.find('\n'));
  const auto line = csv.substr(csv.find('\n') + 1);
  CHECK(header.rfind("experiment,n,eps,", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(line.begin(), line.end(), ','));
  CHECK(line.find("1.25") != std::string::npos);
}

TEST_CASE("empty summaries do not pass") {
  VerificationSummary s;
  CHECK_FALSE(s.all_passed());
  s.assertions.push_back(Assertion{"AC0", "p", 1.0, 1.0, "<=", true, ""});
  CHECK(s.all_passed());
}

TEST_CASE("neumann layer run") {
  json j = {{"experiment", "neumann_layer"},
            {"n", 2},
            {"eps", {0.025, 0.0125}},
            {"params", {{"theta", 1}, {"perturbation_exponent", 1.5}, {"min_exponent", 1.8}}}};
  const RunResult r = run_experiment(parse_config(j));
  REQUIRE(r.summary.find("AC8c") != nullptr);
  CHECK(r.summary.find("AC8c")->passed);
  CHECK(r.rows.size() == 2);
  CHECK(r.fields.size() == 2);
}
