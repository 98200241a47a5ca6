#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using ellcert::cli::CommandOutcome;
using ellcert::cli::run;

namespace {

const std::string kModel = std::string(ELLCERT_MODELS_DIR) + "/helicopter.mpc";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "ellcert_cli_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("check prints the family dimensions and writes nothing") {
  const CommandOutcome out = run({"check", kModel});
  CHECK(out.exit_code == 0);
  CHECK(out.artifacts.empty());
  CHECK(out.summary.find("n_x=46, d=36, n_z=10, n=16") != std::string::npos);
  CHECK(out.summary.find("constraints: 10 groups") != std::string::npos);
}

TEST_CASE("certify writes a deterministic certificate") {
  const fs::path json = scratch_dir() / "cert.json";
  const CommandOutcome first =
      run({"certify", kModel, "--json", json.string()});
  REQUIRE(first.exit_code == 0);
  REQUIRE(first.artifacts.size() == 1);
  const std::string once = slurp(json.string());
  CHECK(once.find("\"N\": 5528") != std::string::npos);
  CHECK(once.find("\"n_lambda_paper\": 6817") != std::string::npos);
  CHECK(once.find("\"n\": 16") != std::string::npos);
  CHECK(once.find("\"epsilon\": 0.25") != std::string::npos);

  const CommandOutcome second =
      run({"certify", kModel, "--json", json.string()});
  REQUIRE(second.exit_code == 0);
  CHECK(slurp(json.string()) == once);  // byte-identical
  CHECK(second.summary == first.summary);
}

TEST_CASE("solve reports the instance outcome") {
  const CommandOutcome out = run({"solve", kModel, "--x0", "0,0,0,0,0,0"});
  CHECK(out.exit_code == 0);
  CHECK(out.summary.find("status=") != std::string::npos);
  CHECK(out.summary.find("u=(") != std::string::npos);
}

TEST_CASE("solve writes the iteration trace on request") {
  const fs::path trace = scratch_dir() / "trace.csv";
  const CommandOutcome out =
      run({"solve", kModel, "--x0", "0,0,0,0,0,0", "--trace", trace.string()});
  REQUIRE(out.exit_code == 0);
  const std::string csv = slurp(trace.string());
  CHECK(csv.rfind("iter,kind,det_ratio,sigma_min,sigma_max,best_cost\n", 0) ==
        0);
  const bool has_cost_cut = csv.find(",cost_cut,") != std::string::npos;
  CHECK(has_cost_cut);
}

TEST_CASE("solve warns when the parameter leaves the envelope") {
  const CommandOutcome out = run({"solve", kModel, "--x0", "30,0,0,0,0,0"});
  CHECK(out.exit_code == 0);
  CHECK(out.summary.find("warning") != std::string::npos);
}

TEST_CASE("simulate writes the trajectory CSV") {
  const fs::path traj = scratch_dir() / "traj.csv";
  const CommandOutcome out = run({"simulate", kModel, "--x0", "5,3,0,0,0,0",
                                  "--steps", "3", "--out", traj.string()});
  REQUIRE(out.exit_code == 0);
  const std::string csv = slurp(traj.string());
  CHECK(csv.rfind("step,t,x1,x2,x3,x4,x5,x6,u1,u2,status,iterations,"
                  "best_cost\n",
                  0) == 0);
  CHECK(out.summary.find("final state") != std::string::npos);
}

TEST_CASE("simulate accepts plant matrices from CSV files") {
  const fs::path a_csv = scratch_dir() / "A.csv";
  const fs::path b_csv = scratch_dir() / "B.csv";
  {
    std::ofstream a(a_csv);
    a << "0.5,0,0,0,0,0\n0,0.5,0,0,0,0\n0,0,0.5,0,0,0\n"
         "0,0,0,0.5,0,0\n0,0,0,0,0.5,0\n0,0,0,0,0,0.5\n";
    std::ofstream b(b_csv);
    b << "0,0\n0,0\n0,0\n0,0\n0,0\n0,0\n";
  }
  const CommandOutcome out =
      run({"simulate", kModel, "--x0", "4,0,0,0,0,0", "--steps", "2",
           "--plant", a_csv.string() + "," + b_csv.string()});
  CHECK(out.exit_code == 0);
  // halving plant with zero input coupling: 4 -> 2 -> 1
  CHECK(out.summary.find("final state (1, ") != std::string::npos);
}

TEST_CASE("validation failures exit with code 1") {
  const fs::path bad = scratch_dir() / "bad.mpc";
  {
    std::ofstream f(bad);
    f << "Input\nxo(2\n";
  }
  const CommandOutcome out = run({"check", bad.string()});
  CHECK(out.exit_code == 1);
  CHECK(out.summary.find("line") != std::string::npos);

  const CommandOutcome missing = run({"check", "/nonexistent/model.mpc"});
  CHECK(missing.exit_code == 1);

  const CommandOutcome noargs = run({"frobnicate"});
  CHECK(noargs.exit_code == 1);
}

TEST_CASE("unwritable artifact paths exit with code 2") {
  const CommandOutcome out =
      run({"certify", kModel, "--json", "/nonexistent-dir/cert.json"});
  CHECK(out.exit_code == 2);
  CHECK(out.summary.find("cannot write") != std::string::npos);
}

TEST_CASE("trajectory CSV is byte-identical across runs") {
  const fs::path t1 = scratch_dir() / "traj1.csv";
  const fs::path t2 = scratch_dir() / "traj2.csv";
  for (const fs::path& p : {t1, t2}) {
    const CommandOutcome out = run({"simulate", kModel, "--x0",
                                    "10,5,0,0,0,0", "--steps", "4", "--out",
                                    p.string()});
    REQUIRE(out.exit_code == 0);
  }
  CHECK(slurp(t1.string()) == slurp(t2.string()));
}

TEST_CASE("solve reports slack-level feasibility of the plan") {
  const CommandOutcome out = run({"solve", kModel, "--x0", "2,1,0,0,0,0",
                                  "--slack", "1e-6"});
  REQUIRE(out.exit_code == 0);
  CHECK(out.summary.find("rows beyond slack 1e-06: 0") != std::string::npos);
}
