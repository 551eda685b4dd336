// End-to-end checks of the CLI surface: subcommands, file artifacts, exit
// codes. Each test shells out to the built binary.
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(DIMSEL_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe) != nullptr) r.output += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "dimsel_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("synth writes a deterministic dataset with per-class counts") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "toy.csv";
  const std::string flags = "synth --classes 20,20 --m 64 --sep-band 20:30 --noise 0.1 "
                            "--seed 7 -o " + csv.string();

  const RunResult first = run_cli(flags);
  REQUIRE(first.exit_code == 0);
  CHECK(first.output.find("a2: 20") != std::string::npos);
  CHECK(first.output.find("a3: 20") != std::string::npos);
  const std::string bytes1 = slurp(csv);
  CHECK(line_count(bytes1) == 41);  // header + 40 rows

  const RunResult second = run_cli(flags);
  REQUIRE(second.exit_code == 0);
  CHECK(slurp(csv) == bytes1);
}

TEST_CASE("synth rejects a band outside the signal") {
  const RunResult r = run_cli("synth --classes 5,5 --m 512 --sep-band 600:650 -o /dev/null");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("band outside signal") != std::string::npos);
}

TEST_CASE("dim emits the full triangle and a heatmap that peaks in the band") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "sep.csv";
  REQUIRE(run_cli("synth --classes 8,8 --m 64 --sep-band 30:40 --band-amp 3 --noise 0.2 "
                  "--seed 5 -o " + csv.string()).exit_code == 0);

  const RunResult r = run_cli("dim --data " + csv.string() + " --pair a2:a3 --zones 10,50 --out " +
                              (dir / "dim_out").string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("z1_end=10") != std::string::npos);

  const std::string table = slurp(dir / "dim_out" / "dim.csv");
  CHECK(line_count(table) == 64 * 65 / 2 + 1);

  // Largest w=1 lambda lies inside the band.
  std::istringstream is(table);
  std::string line;
  std::getline(is, line);
  long best_k = -1;
  double best_lam = -1;
  while (std::getline(is, line)) {
    long k = 0, w = 0;
    double lam = 0;
    REQUIRE(std::sscanf(line.c_str(), "%ld,%ld,%lf", &k, &w, &lam) == 3);
    if (w == 1 && lam > best_lam) {
      best_lam = lam;
      best_k = k;
    }
  }
  CHECK(best_k >= 30);
  CHECK(best_k < 40);

  const std::string pgm = slurp(dir / "dim_out" / "dim.pgm");
  CHECK(pgm.substr(0, 3) == "P5\n");
  CHECK(pgm.find("64 64\n255\n") != std::string::npos);
}

TEST_CASE("dim on identical classes yields an all-black heatmap") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "flat.csv";
  // No --sep-band and no noise: the two classes are exact copies.
  REQUIRE(run_cli("synth --classes 3,3 --m 16 --seed 2 -o " + csv.string()).exit_code == 0);
  const RunResult r = run_cli("dim --data " + csv.string() + " --pair a2:a3 --zones 4,12 --out " +
                              (dir / "flat_out").string());
  REQUIRE(r.exit_code == 0);
  const std::string pgm = slurp(dir / "flat_out" / "dim.pgm");
  const std::string pixels = pgm.substr(pgm.find("255\n") + 4);
  REQUIRE(pixels.size() == 16 * 16);
  for (char c : pixels) CHECK(c == 0);
}

TEST_CASE("energy and select write their reports") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "es.csv";
  REQUIRE(run_cli("synth --classes 8,8 --m 64 --sep-band 30:40 --noise 0.3 --seed 9 -o " +
                  csv.string()).exit_code == 0);

  const RunResult energy = run_cli("energy --data " + csv.string() +
                                   " --pair a2:a3 --zones 10,50 --out " + (dir / "es_out").string());
  REQUIRE(energy.exit_code == 0);
  CHECK(slurp(dir / "es_out" / "energy.json").find("\"r2\"") != std::string::npos);

  const RunResult select = run_cli("select --data " + csv.string() +
                                   " --pair a2:a3 --zones 10,50 --percents 5,10 --out " +
                                   (dir / "es_out").string());
  REQUIRE(select.exit_code == 0);
  const std::string groups = slurp(dir / "es_out" / "groups.csv");
  CHECK(groups.rfind("percent,n_vars,group_energy_ratio,indices\n", 0) == 0);
  CHECK(line_count(groups) == 3);
}

TEST_CASE("train saves a model file") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "tr.csv";
  REQUIRE(run_cli("synth --classes 8,8 --m 64 --sep-band 30:40 --band-amp 2 --noise 0.2 "
                  "--seed 4 -o " + csv.string()).exit_code == 0);
  const RunResult r = run_cli("train --data " + csv.string() +
                              " --pair a2:a3 --zones 10,50 --percent 10 --hidden 4 "
                              "--max-epochs 30 --seed 6 --out " + (dir / "tr_out").string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("training accuracy") != std::string::npos);

  std::istringstream model(slurp(dir / "tr_out" / "model.txt"));
  long ni = 0, nh = 0;
  unsigned long long seed = 0;
  REQUIRE((model >> ni >> nh >> seed));
  CHECK(nh == 4);
  CHECK(ni >= 1);
}

TEST_CASE("suite reports all pairs sorted by ratio and honors --percents") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "suite.csv";
  REQUIRE(run_cli("synth --classes 8,8,8 --m 64 --sep-band 30:40 --noise 0.3 --seed 12 -o " +
                  csv.string()).exit_code == 0);

  const RunResult r = run_cli("suite --data " + csv.string() +
                              " --all-pairs --zones 10,50 --percents 3,6,9,10 --hidden 4 "
                              "--max-epochs 25 --seed 3 --out " + (dir / "suite_out").string());
  REQUIRE(r.exit_code == 0);

  const std::string table = slurp(dir / "suite_out" / "suite.csv");
  CHECK(line_count(table) == 4);  // header + 3 pairs

  std::istringstream is(table);
  std::string line;
  std::getline(is, line);
  double prev = -1;
  while (std::getline(is, line)) {
    std::istringstream row(line);
    std::string pair_name, ratio_str, rest;
    std::getline(row, pair_name, ',');
    std::getline(row, ratio_str, ',');
    std::string mean_str, std_str, best_mean, best_std, best_pct;
    std::getline(row, mean_str, ',');
    std::getline(row, std_str, ',');
    std::getline(row, best_mean, ',');
    std::getline(row, best_std, ',');
    std::getline(row, best_pct, ',');
    const double ratio = std::stod(ratio_str);
    CHECK(ratio >= prev);
    prev = ratio;
    const int bp = std::stoi(best_pct);
    CHECK((bp == 3 || bp == 6 || bp == 9 || bp == 10));
  }
  CHECK(slurp(dir / "suite_out" / "suite.json").find("\"rows\"") != std::string::npos);
}

TEST_CASE("suite without a dataset reports 'dataset not provided'") {
  const RunResult r = run_cli("suite --data /nonexistent/clinic.csv --pairs gl:me");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("dataset not provided") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("dim").exit_code == 1);  // missing required --pair
}

TEST_CASE("numeric failures exit with code 3") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "noiseless.csv";
  // Identical classes with zero noise: every lambda is 0, so the noise-zone
  // energy is zero and rescaling is undefined.
  REQUIRE(run_cli("synth --classes 3,3 --m 16 --seed 1 -o " + csv.string()).exit_code == 0);
  const RunResult r = run_cli("energy --data " + csv.string() + " --pair a2:a3 --zones 4,12");
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("noise-zone energy") != std::string::npos);
}

TEST_CASE("trend subcommand fits a suite CSV") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "trend_in.csv";
  std::ofstream out(csv);
  out << "pair,ratio_e10_e3,mean_at_10,std_at_10,best_mean,best_std,best_percent,n_vars_at_10\n";
  for (int i = 1; i <= 7; ++i) {
    out << "a2:a3," << i << ',' << 60 + 5 * i << ",1,90,1,10,3\n";
  }
  out.close();
  const RunResult r = run_cli("trend --suite " + csv.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("spearman 1") != std::string::npos);
}
