#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hdsvm/dataset.hpp"
#include "hdsvm/harness.hpp"
#include "test_support.hpp"

namespace {

using hdsvm::testing::temp_path;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const auto out_path = temp_path("cli_stdout.txt");
  const std::string cmd = std::string(HDSVM_CLI_PATH) + " " + args + " > " + out_path + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

// Two well separated classes in d = 30, samples as rows.
std::string write_labeled(const std::string& name, bool overlap = false) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  const hdsvm::Index d = 30;
  hdsvm::Matrix x(d, 24);
  std::vector<int> labels;
  for (hdsvm::Index j = 0; j < 24; ++j) {
    const int c = j < 12 ? 1 : 2;
    for (hdsvm::Index f = 0; f < d; ++f) x(f, j) = z(rng) + (c == 2 ? 1.0 : 0.0);
    labels.push_back(c);
  }
  if (overlap) {
    x.col(1) = x.col(20);
  }
  const hdsvm::LabeledDataset ds(x, labels, 2, {"normal", "tumor"});
  const auto path = temp_path(name);
  hdsvm::write_labeled_matrix(ds, path, {});
  return path;
}

}  // namespace

TEST_CASE("configuration errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("simulate --scenario q --reps 2").code == 2);
  CHECK(run("simulate --scenario a --sweep 33 --reps 2").code == 2);
  CHECK(run("simulate --scenario a --sweep 32 --reps 2 --format xml").code == 2);
  CHECK(run("simulate --scenario a --sweep 32 --reps 2 --classifiers svm,knn").code == 2);
  CHECK(run("simulate --config " + temp_path("missing.cfg")).code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("simulate writes the CSV report") {
  const auto r = run("simulate --scenario b --sweep 32,64 --reps 5 --seed 3");
  REQUIRE(r.code == 0);
  CHECK(first_line(r.out) == std::string(hdsvm::kCsvHeader));
  CHECK(count_lines(r.out) == 1 + 2 * 2 * 3);
}

TEST_CASE("thread count does not change the output") {
  const std::string base = "simulate --scenario c --sweep 32,64 --reps 40 --seed 11 --classifiers svm,bc_svm,ay14";
  const auto one = run(base + " --threads 1");
  const auto four = run(base + " --threads 4");
  REQUIRE(one.code == 0);
  CHECK(one.out == four.out);
  const auto json = run(base + " --format json");
  CHECK(json.code == 0);
  CHECK(json.out.front() == '{');
}

TEST_CASE("config file drives a custom sweep") {
  const auto cfg = temp_path("custom.cfg");
  std::ofstream(cfg) << "# custom pair\ndimensions = 16, 32\nsizes = 4, 6\nreps = 3\n"
                        "population.2.mean = constant:1\npopulation.2.cov = structured:0.4\n";
  const auto r = run("simulate --config " + cfg + " --seed 9");
  REQUIRE(r.code == 0);
  CHECK(count_lines(r.out) == 1 + 2 * 2 * 3);
  std::ofstream(cfg) << "dimensions = 16\nsizes = 4, 6\nreps = 3\n";
  CHECK(run("simulate --config " + cfg).code == 2);  // both populations at the origin
}

TEST_CASE("fit then predict") {
  const auto data = write_labeled("cli_train.csv");
  const auto model = temp_path("cli_model.json");
  REQUIRE(run("fit --data " + data + " --model " + model).code == 0);
  const auto r = run("predict --labeled --data " + data + " --model " + model);
  REQUIRE(r.code == 0);
  CHECK(first_line(r.out) == "sample,predicted,actual,votes,tie");
  CHECK(count_lines(r.out) == 25);
  // Training points sit on or outside the margin, so they are reproduced.
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  int agree = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
    agree += f[1] == f[2];
  }
  CHECK(agree >= 23);
}

TEST_CASE("data and solver failures") {
  CHECK(run("fit --data " + temp_path("nope.csv") + " --model " + temp_path("m.json")).code == 3);
  const auto data = write_labeled("cli_bench.csv");
  CHECK(run("bench-real --data " + data + " --train-sizes 13,5 --reps 2").code == 3);
  CHECK(run("bench-real --data " + data + " --train-sizes 12,12 --reps 2").code == 3);
  const auto ok = run("bench-real --data " + data + " --train-sizes 5,5 --reps 4 --seed 2");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("real_data,bc_svm") != std::string::npos);

  const auto bad = write_labeled("cli_overlap.csv", true);
  CHECK(run("fit --data " + bad + " --model " + temp_path("m.json")).code == 4);
}

TEST_CASE("diagnose") {
  const auto r = run("diagnose --scenario b --sweep 32");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("0.857142857142857") != std::string::npos);
  const auto data = write_labeled("cli_diag.csv");
  const auto d = run("diagnose --data " + data + " --train-sizes 5,5");
  REQUIRE(d.code == 0);
  CHECK(first_line(d.out).rfind("first,second,kappa_over_delta_hat", 0) == 0);
  CHECK(count_lines(d.out) == 2);
}
