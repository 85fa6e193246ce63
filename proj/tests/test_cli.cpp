#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <fluxbic/cli.hpp>
#include <fluxbic/fluxbic.hpp>

using namespace fluxbic;
namespace fs = std::filesystem;

namespace {

const std::string cli = FLUXBIC_CLI_PATH;
const std::string presets = FLUXBIC_PRESETS_DIR;

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "fluxbic_cli_tests";
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const fs::path& err = scratch() / "stderr.txt") {
  const std::string cmd = "\"" + cli + "\" " + args + " > " + (scratch() / "stdout.txt").string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("table1 preset end to end", "[cli]") {
  const fs::path out = scratch() / "row1.csv";
  REQUIRE(run("table1 --config " + presets + "/row1.json --out " + out.string()) == 0);
  const Dataset d = read_dataset_csv(out.string());
  REQUIRE(d.rows.size() == 1);
  CHECK(d.columns.size() == 12);
  CHECK(d.columns.back() == "T1_ms");
  // Same numbers as the library call.
  const RateReport r = reproduce_table1(table1_row(10.0, 5.0, 21.74), NoiseParams{}).report;
  const auto cols = r.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    CHECK(d.columns[i] == cols[i].first);
    CHECK_THAT(d.rows[0][i], Catch::Matchers::WithinRel(cols[i].second, 1e-14));
  }
  const json meta = json::parse(slurp(out.string() + ".meta.json"));
  CHECK(meta["conventions"]["G0"] == "G0=2e^2/h");
  CHECK(meta["tool_version"] == tool_version);
  CHECK(meta["resolved_config"]["noise"]["Q_ind"] == 8e9);
}

TEST_CASE("spectrum to standard output with overrides", "[cli]") {
  REQUIRE(run("spectrum --config " + presets + "/qutrit_fit.json --override circuit.EJ_over_EL=33.79 --override numerics.levels=6") ==
          0);
  const std::string text = slurp(scratch() / "stdout.txt");
  CHECK(text.rfind("level,E_GHz,parity,parity_label\r\n", 0) == 0);
  CHECK(text.find("Even") != std::string::npos);
  CHECK(text.find("Odd") != std::string::npos);
}

TEST_CASE("json output parses", "[cli]") {
  const fs::path out = scratch() / "fit.json";
  REQUIRE(run("qutrit-fit --config " + presets + "/qutrit_fit.json --format json --out " + out.string()) == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc["records"].size() == 8);
  CHECK(doc["records"][0]["operator"] == "H");
  CHECK(doc["metadata"]["analytic_model"].contains("Delta_GHz"));
}

TEST_CASE("prepare preset", "[cli]") {
  const fs::path out = scratch() / "prepare.csv";
  REQUIRE(run("prepare --config " + presets + "/prepare.json --out " + out.string()) == 0);
  const Dataset d = read_dataset_csv(out.string());
  CHECK(d.columns[4] == "t_adiabatic_ns");
  CHECK(d.rows[0][4] > 10.0);
}

TEST_CASE("configuration errors exit with 2", "[cli][errors]") {
  const fs::path err = scratch() / "err.txt";
  const fs::path bad = write_config("unknown_key.json", R"({"circuit": {"E_J": 10, "E_C": 2, "E_L": 0.4, "E_X": 1}})");
  CHECK(run("spectrum --config " + bad.string(), err) == 2);
  CHECK(slurp(err).find("circuit.E_X") != std::string::npos);

  const fs::path both = write_config("both.json", R"({"circuit": {"E_J": 10, "E_C": 2, "EJ_over_EC": 5, "E_L": 0.4}})");
  CHECK(run("spectrum --config " + both.string(), err) == 2);

  const fs::path negative = write_config("negative.json", R"({"circuit": {"E_J": 10, "E_C": -2, "E_L": 0.4}})");
  CHECK(run("spectrum --config " + negative.string(), err) == 2);
  CHECK(slurp(err).find("UnitError") != std::string::npos);

  const fs::path narrow = write_config("narrow.json",
                                       R"({"circuit": {"E_J": 10, "E_C": 2, "E_L": 0.4}, "numerics": {"basis": "grid", "phase_halfwidth": 3.0}})");
  CHECK(run("spectrum --config " + narrow.string(), err) == 2);

  const fs::path sweep = write_config(
      "sweep.json", R"({"circuit": {"E_J": 10, "E_C": 2, "E_L": 0.4}, "sweep": {"axis": "circuit.E_C", "values": [1, 3, 2], "outputs": ["energies"]}})");
  CHECK(run("sweep --config " + sweep.string(), err) == 2);

  CHECK(run("spectrum --config " + (scratch() / "missing.json").string(), err) == 2);
  CHECK(run("spectrum", err) == 2);
  CHECK(run("transmogrify --config x", err) == 2);
  CHECK(run("spectrum --config " + presets + "/row1.json --format xml", err) == 2);
}

TEST_CASE("numerical failures exit with 3", "[cli][errors]") {
  const fs::path err = scratch() / "err3.txt";
  CHECK(run("qutrit-fit --config " + presets + "/qutrit_fit.json --override circuit.phi_ext=0.1", err) == 3);
  CHECK(slurp(err).find("WrongParityOrder") != std::string::npos);
}

TEST_CASE("multi-curve sweep writes one file per curve and a manifest", "[cli]") {
  const fs::path dir = scratch() / "curves";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path out = dir / "upward.csv";
  REQUIRE(run("sweep --config " + presets + "/upward_vs_temperature.json --override sweep.range.num=4 --out " + out.string()) == 0);
  CHECK(fs::exists(dir / "upward_EL21.74.csv"));
  CHECK(fs::exists(dir / "upward_EL33.79.csv"));
  const json manifest = json::parse(slurp(dir / "upward_manifest.json"));
  REQUIRE(manifest["curves"].size() == 2);
  CHECK(manifest["curves"][0]["file"] == "upward_EL21.74.csv");
  const Dataset d = read_dataset_csv((dir / "upward_EL33.79.csv").string());
  CHECK(d.rows.size() == 4);
  CHECK(d.columns.front() == "circuit.T");
}

TEST_CASE("multi-curve sweep needs an output path", "[cli][errors]") {
  CHECK(run("sweep --config " + presets + "/upward_vs_temperature.json --override sweep.range.num=2") == 2);
}

TEST_CASE("repeated runs are byte identical", "[cli]") {
  const fs::path a = scratch() / "det_a.csv", b = scratch() / "det_b.csv";
  const std::string args = "sweep --config " + presets + "/overlaps_vs_charging.json --override sweep.range.num=6 --out ";
  REQUIRE(run(args + a.string()) == 0);
  fs::copy_file(a, scratch() / "det_first.csv", fs::copy_options::overwrite_existing);
  fs::copy_file(a.string() + ".meta.json", scratch() / "det_first.meta.json", fs::copy_options::overwrite_existing);
  REQUIRE(run(args + a.string()) == 0);
  CHECK(slurp(a) == slurp(scratch() / "det_first.csv"));
  CHECK(slurp(a.string() + ".meta.json") == slurp(scratch() / "det_first.meta.json"));
  REQUIRE(run(args + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("every preset parses", "[cli]") {
  for (const auto& entry : fs::directory_iterator(presets)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    json doc = load_json_file(entry.path().string());
    doc["task"] = doc.contains("sweep") ? "sweep" : "spectrum";
    CHECK_NOTHROW(parse_config(doc));
  }
}

TEST_CASE("override parsing", "[cli]") {
  json doc = json::parse(R"({"circuit": {"E_J": 10}})");
  apply_override(doc, "circuit.E_C=2.5");
  apply_override(doc, "output.format=json");
  apply_override(doc, "sweep.values=[1,2]");
  CHECK(doc["circuit"]["E_C"] == 2.5);
  CHECK(doc["output"]["format"] == "json");
  CHECK(doc["sweep"]["values"].size() == 2);
  CHECK_THROWS_AS(apply_override(doc, "novalue"), Error);
  CHECK_THROWS_AS(apply_override(doc, "circuit..E_C=1"), Error);
}

TEST_CASE("defaults are recorded", "[cli]") {
  json doc = json::parse(R"({"circuit": {"E_J": 10, "E_C": 2, "E_L": 0.4}})");
  const RunConfig c = parse_config(doc);
  const json m = run_metadata(c);
  bool saw = false;
  for (const auto& k : m["defaults_applied"]) saw = saw || k == "circuit.phi_ext";
  CHECK(saw);
  CHECK(m["resolved_config"]["numerics"]["ladder"][0]["dim"] == 200);
}
