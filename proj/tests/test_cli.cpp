#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return RAMPSVM_CLI_PATH; }

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string command =
      std::string(cli_path()) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(command.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path make_dataset(const fs::path& dir) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const fs::path path = dir / "toy.csv";
  std::ofstream out(path);
  out << "f0,f1,f2,label\n";
  for (int i = 0; i < 24; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    const double x0 = label == 1 ? 0.7 + 0.3 * unit(rng) : 0.3 * unit(rng);
    out << x0 << "," << unit(rng) << "," << unit(rng) << "," << label << "\n";
  }
  return path;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rampsvm_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("missing dataset exits with the configuration code") {
  const auto dir = fresh_dir("missing");
  const auto r = run_cli("train --data /nonexistent/file.csv --out-dir " + dir.string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("\"error\"") != std::string::npos);
  CHECK(r.err.find("config") != std::string::npos);
}

TEST_CASE("unknown solver is a configuration error") {
  const auto dir = fresh_dir("solver");
  const auto data = make_dataset(dir);
  const auto r = run_cli("train --data " + data.string() + " --solver magic", dir);
  CHECK(r.exit_code == 2);
}

TEST_CASE("minimal train run writes the model and traces") {
  const auto dir = fresh_dir("train");
  const auto data = make_dataset(dir);
  const auto r = run_cli("train --data " + data.string() + " --C 1 --B 1 --out-dir " +
                             dir.string() + " --seed 7",
                         dir);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "daks_trace.jsonl"));
  const std::string model = slurp(dir / "model.json");
  CHECK(model.find("\"selected_features\"") != std::string::npos);
  CHECK(model.find("\"metadata\"") != std::string::npos);
  CHECK(model.find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("exact train writes solver events") {
  const auto dir = fresh_dir("exact");
  const auto data = make_dataset(dir);
  const auto r = run_cli("train --data " + data.string() + " --C 1 --B 1 --solver exact" +
                             " --time-limit 60 --out-dir " + dir.string(),
                         dir);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "milp_events.jsonl"));
  CHECK(fs::exists(dir / "tighten_trace.jsonl"));
}

TEST_CASE("tighten and export-lp emit their artifacts") {
  const auto dir = fresh_dir("tighten");
  const auto data = make_dataset(dir);
  const auto r = run_cli("tighten --data " + data.string() + " --C 1 --B 2 --out-dir " +
                             dir.string(),
                         dir);
  CHECK(r.exit_code == 0);
  const std::string bounds = slurp(dir / "bounds.json");
  CHECK(bounds.find("\"UB_w\"") != std::string::npos);
  CHECK(bounds.find("\"M\"") != std::string::npos);

  const auto r2 = run_cli("export-lp --data " + data.string() + " --C 1 --B 2 --out-dir " +
                              dir.string(),
                          dir);
  CHECK(r2.exit_code == 0);
  const std::string lp = slurp(dir / "model.lp");
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Binaries") != std::string::npos);
  CHECK(lp.find("End") != std::string::npos);
}

TEST_CASE("repeated runs with one seed are byte-identical") {
  const auto dir1 = fresh_dir("det1");
  const auto dir2 = fresh_dir("det2");
  const auto data = make_dataset(dir1);
  const std::string common = "cv --data " + data.string() +
                             " --C 1 --B 1 --seed 99 --perturb label-noise --fraction 0.05"
                             " --threads 2 --out-dir ";
  const auto r1 = run_cli(common + dir1.string(), dir1);
  const auto r2 = run_cli(common + dir2.string(), dir2);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  const std::string report1 = slurp(dir1 / "report.json");
  CHECK_FALSE(report1.empty());
  CHECK(report1 == slurp(dir2 / "report.json"));
  CHECK(slurp(dir1 / "tables.csv") == slurp(dir2 / "tables.csv"));
}

TEST_CASE("config file applies with flag overrides") {
  const auto dir = fresh_dir("config");
  const auto data = make_dataset(dir);
  const fs::path config = dir / "run.json";
  {
    std::ofstream out(config);
    out << "{\"data\": \"" << data.string() << "\", \"C\": 10.0, \"B\": 2, \"seed\": 4,"
        << " \"daks\": {\"phase2_rounds\": 1}}\n";
  }
  const auto r = run_cli("train --config " + config.string() + " --C 1 --out-dir " +
                             dir.string(),
                         dir);
  CHECK(r.exit_code == 0);
  const std::string model = slurp(dir / "model.json");
  CHECK(model.find("\"C\": 1") != std::string::npos);  // flag beat the file
  CHECK(model.find("\"B\": 2") != std::string::npos);  // file value kept
}

}  // TEST_SUITE
