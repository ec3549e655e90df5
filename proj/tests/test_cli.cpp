#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gcpbench/cli.hpp"
#include "gcpbench/config.hpp"
#include "gcpbench/io.hpp"
#include "support/fixtures.hpp"

using namespace gcpbench;
using namespace gcpbench::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome runCli(std::vector<std::string> args) {
  args.insert(args.begin(), "gcpbench");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Runs the installed binary through the shell and returns its exit status.
int runBinary(const std::string& args) {
  const std::string cmd = std::string("\"") + GCPBENCH_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path workDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gcpbench_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

template <typename Fn>
void writeWith(const fs::path& path, Fn&& fn) {
  std::ofstream out(path);
  fn(out);
}

// Survey, observations, 100 Hz trajectory and calibration for z-offsets `d`
// (one GCP per entry, observed at t = 1, 2, ...).
struct Fixture {
  fs::path traj, obs, gcps, calib;
};

Fixture writeFixture(const fs::path& dir, const std::vector<double>& d) {
  // All-zero offsets fit any layout; borrow a balanced one.
  const auto gcps = surveyOf(balancedLayout(d.back() == 0.0 ? std::vector<double>(d.size(), 1.0) : d));
  Fixture f{dir / "traj.txt", dir / "obs.csv", dir / "gcps.csv", dir / "calib.json"};
  writeTextFile(f.traj, formatTrajectory(smoothTrajectory(0.0, static_cast<double>(d.size()) + 1.0)));
  writeWith(f.obs, [&](std::ostream& o) { writeObservationsCsv(o, observationsFor(gcps, d)); });
  writeWith(f.gcps, [&](std::ostream& o) { writeSurveyCsv(o, gcps); });
  writeTextFile(f.calib, toJson(defaultCalibration()).dump());
  return f;
}

std::vector<std::string> evalArgs(const Fixture& f) {
  return {"evaluate", "--traj", f.traj.string(), "--obs", f.obs.string(), "--gcps", f.gcps.string(),
          "--default-calib", f.calib.string()};
}

}  // namespace

TEST_CASE("usage errors exit 2 and help exits 0") {
  CHECK(runCli({}).code == cli::kExitUsage);
  CHECK(runCli({"frobnicate"}).code == cli::kExitUsage);
  CHECK(runCli({"validate", "--traj", "x.txt"}).code == cli::kExitUsage);
  CHECK(runCli({"simulate", "--out", "x.csv", "--seed", "1", "--stamp-unit", "ms"}).code == cli::kExitUsage);
  const Outcome help = runCli({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("evaluate-multi") != std::string::npos);
  CHECK(runCli({"detect", "--help"}).code == cli::kExitOk);
}

TEST_CASE("the binary maps failures to exit codes") {
  const fs::path dir = workDir("binary");
  CHECK(runBinary("--help") == 0);
  CHECK(runBinary("evaluate") == 2);
  CHECK(runBinary("detect --scans " + (dir / "missing.csv").string()) == 1);
}

TEST_CASE("evaluate scores a perfect submission 100 and echoes its inputs") {
  const fs::path dir = workDir("perfect");
  const Fixture f = writeFixture(dir, {0.0, 0.0, 0.0, 0.0, 0.0});
  const Outcome r = runCli(evalArgs(f));
  REQUIRE(r.code == cli::kExitOk);
  const Json j = Json::parse(r.out);
  CHECK(j["sequence_score"].get<double>() == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(j["rmse_ate"].get<double>() < 1e-9);
  CHECK(j["gcps"].size() == 5);
  CHECK(j["site"] == 1);
  CHECK(j["config"] == toJson(RunConfig{}));
  CHECK(j["calibration"] == toJson(defaultCalibration()));
}

TEST_CASE("site 3 doubles the score of the same errors") {
  // Offsets score 20, 10, 6, 0, 0: 36 of 100 points.
  const fs::path dir = workDir("site3");
  const Fixture f = writeFixture(dir, {0.0, 0.0075, 0.02, 0.45, -0.4775});
  const Outcome s1 = runCli(evalArgs(f));
  auto args3 = evalArgs(f);
  args3.insert(args3.end(), {"--site", "3"});
  const Outcome s3 = runCli(args3);
  REQUIRE(s1.code == 0);
  REQUIRE(s3.code == 0);
  const Json j1 = Json::parse(s1.out), j3 = Json::parse(s3.out);
  CHECK(j1["sequence_score"].get<double>() == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(j3["sequence_score"].get<double>() == doctest::Approx(72.0).epsilon(1e-12));
  std::vector<int> scores;
  for (const auto& g : j3["gcps"]) scores.push_back(g["score"].get<int>());
  CHECK(scores == std::vector<int>{20, 10, 6, 0, 0});

  auto bad = evalArgs(f);
  bad.insert(bad.end(), {"--site", "4"});
  CHECK(runCli(bad).code == cli::kExitUsage);
}

TEST_CASE("participant extrinsics override the defaults frame by frame") {
  const fs::path dir = workDir("override");
  const Fixture f = writeFixture(dir, {0.0, 0.0, 0.0, 0.0, 0.0});
  // The override drops the true 0.3 rad lidar rotation. Observations seen
  // through a wrong rotation from a yawing body do not fit any single rigid
  // alignment.
  const fs::path user = dir / "user.json";
  writeTextFile(user, R"({"lidar": {"t": [0.15, -0.05, 0.3], "q": [1, 0, 0, 0]}})");
  auto args = evalArgs(f);
  args.insert(args.end(), {"--calib", user.string()});
  const Outcome r = runCli(args);
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["calibration"]["lidar"]["t"][0].get<double>() == 0.15);
  CHECK(j["calibration"].contains("tip"));
  CHECK(j["sequence_score"].get<double>() < 100.0);
}

TEST_CASE("evaluation failures exit 1 with a message") {
  const fs::path dir = workDir("failures");
  const Fixture f = writeFixture(dir, {0.0, 0.0, 0.0});
  auto noCalib = evalArgs(f);
  noCalib.erase(noCalib.end() - 2, noCalib.end());
  const Outcome r = runCli(noCalib);
  CHECK(r.code == cli::kExitFailure);
  CHECK(r.err.find("lidar") != std::string::npos);

  writeTextFile(f.traj, "0 0 0 0 0 0 0 1\n1 bad\n");
  CHECK(runCli(evalArgs(f)).code == cli::kExitFailure);
}

TEST_CASE("evaluate-multi keeps one frame across sessions") {
  const fs::path dir = workDir("multi");
  const Fixture a = writeFixture(dir, {0.0, 0.0, 0.0, 0.0});
  fs::create_directories(dir / "b");
  const Fixture b = writeFixture(dir / "b", {0.0, 0.0, 0.0, 0.0});
  const std::vector<std::string> base{"evaluate-multi", "--trajs", a.traj.string() + "," + b.traj.string(),
                                      "--gcps", a.gcps.string(), "--default-calib", a.calib.string(), "--obs"};
  auto ok = base;
  ok.push_back(a.obs.string() + "," + b.obs.string());
  const Outcome r = runCli(ok);
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["sequence_score"].get<double>() == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(j["gcps"].size() == 8);
  CHECK(j["gcps"][4]["sequence"] == 1);

  auto mismatch = base;
  mismatch.push_back(a.obs.string());
  CHECK(runCli(mismatch).code == cli::kExitUsage);
}

TEST_CASE("validate exits 1 on rejection and 0 on acceptance") {
  const fs::path dir = workDir("validate");
  const fs::path sparse = dir / "sparse.txt", dense = dir / "dense.txt", report = dir / "report.json";
  writeTextFile(sparse, "1 0 0 0 0 0 0 1\n2 0 0 0 0 0 0 1\n3 0 0 0 0 0 0 1\n");
  writeTextFile(dense, formatTrajectory(smoothTrajectory(0.0, 3.0)));
  const Outcome bad = runCli({"validate", "--traj", sparse.string(), "--span", "0,3", "--out", report.string()});
  CHECK(bad.code == cli::kExitFailure);
  const Json j = Json::parse(readTextFile(report));
  CHECK_FALSE(j["accepted"].get<bool>());
  bool sawSparse = false;
  for (const auto& f : j["findings"]) sawSparse |= f["code"] == "sparse_trajectory";
  CHECK(sawSparse);
  CHECK(runCli({"validate", "--traj", dense.string(), "--span", "0,3"}).code == cli::kExitOk);
  CHECK(runCli({"validate", "--traj", dense.string(), "--span", "0"}).code == cli::kExitUsage);
  CHECK(runCli({"validate", "--traj", dense.string(), "--span", "a,b"}).code == cli::kExitUsage);
}

TEST_CASE("validate honors nanosecond stamps") {
  const fs::path dir = workDir("validate_ns");
  std::string text;
  for (long k = 0; k <= 300; ++k) text += std::to_string(2'000'000'000L + k * 10'000'000L) + " 0 0 0 0 0 0 1\n";
  writeTextFile(dir / "ns.txt", text);
  CHECK(runCli({"validate", "--traj", (dir / "ns.txt").string(), "--span", "2,5", "--stamp-unit", "ns"}).code ==
        cli::kExitOk);
}

TEST_CASE("diff names the GCPs near a localized change") {
  const fs::path dir = workDir("diff");
  const Fixture f = writeFixture(dir, {0.0, 0.0, 0.0, 0.0});
  // GCP times are 1, 2, 3, 4; a 3 cm bump over [2.9, 3.1] touches GCPs 2, 3
  // and 4 (windows of +-1 s).
  std::vector<TimedPose> bumped;
  for (const auto& p : smoothTrajectory(0.0, 5.0).poses()) {
    const double dz = std::abs(p.timestamp - 3.0) <= 0.1 + 1e-9 ? 0.03 : 0.0;
    bumped.push_back({p.timestamp, RigidTransformd::fromTranslation(Point3(0, 0, dz)) * p.pose});
  }
  writeTextFile(dir / "curr.txt", formatTrajectory(Trajectory(bumped)));
  const Outcome r =
      runCli({"diff", "--prev", f.traj.string(), "--curr", (dir / "curr.txt").string(), "--gcps", f.obs.string()});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  REQUIRE(j["windows"].size() == 1);
  CHECK(j["windows"][0]["peak_displacement"].get<double>() == doctest::Approx(0.03));
  std::vector<std::string> names;
  for (const auto& g : j["flagged_gcp_names"]) names.push_back(g["name"].get<std::string>());
  CHECK(names == std::vector<std::string>{"gcp1", "gcp2", "gcp3"});
  // Stepping 3 cm in one 10 ms interval is 3 m/s plus the body speed, below
  // the 5 m/s gate.
  CHECK(j["discontinuities"].empty());
  CHECK(j.contains("config"));
}

TEST_CASE("simulate then detect is reproducible and finds the target") {
  const fs::path dir = workDir("pipeline");
  const auto a = dir / "a.csv", b = dir / "b.csv", c = dir / "c.csv";
  REQUIRE(runCli({"simulate", "--out", a.string(), "--seed", "5", "--revolutions", "2"}).code == 0);
  REQUIRE(runCli({"simulate", "--out", b.string(), "--seed", "5", "--revolutions", "2"}).code == 0);
  REQUIRE(runCli({"simulate", "--out", c.string(), "--seed", "6", "--revolutions", "2"}).code == 0);
  CHECK(readTextFile(a) == readTextFile(b));
  CHECK(readTextFile(a) != readTextFile(c));
  const std::string header = readTextFile(a).substr(0, readTextFile(a).find('\n'));
  REQUIRE(header.rfind("# config,", 0) == 0);
  const Json meta = Json::parse(header.substr(9));
  CHECK(meta["seed"] == 5);
  CHECK(meta["simulation"]["revolutions"] == 2);

  const auto accPath = dir / "acc.csv";
  const Outcome da = runCli({"detect", "--scans", a.string(), "--accumulator", accPath.string()});
  const Outcome db = runCli({"detect", "--scans", b.string()});
  REQUIRE(da.code == 0);
  CHECK(da.out == db.out);
  const Json det = Json::parse(da.out);
  // Default scene: level unit 0.5 m over the floor, target 0.6 m ahead, so the
  // center sits at (0.6, 0, -0.5) in the lidar frame.
  const Point3 center(det["center"][0].get<double>(), det["center"][1].get<double>(), det["center"][2].get<double>());
  CHECK((center - Point3(0.6, 0.0, -0.5)).norm() < 0.005);
  CHECK(det["config"]["detector"]["projection"] == "along_beam");
  CHECK(readTextFile(accPath).rfind("# origin_u,", 0) == 0);
}

TEST_CASE("the config file comes from the option or the environment") {
  const fs::path dir = workDir("config");
  const fs::path cfgPath = dir / "cfg.json", out = dir / "scan.csv";
  writeTextFile(cfgPath, R"({"simulation": {"revolutions": 1}, "scanner": {"rings": 8, "samples_per_rev": 90}})");
  auto revolutionsIn = [&] {
    const Json meta = Json::parse(readTextFile(out).substr(9, readTextFile(out).find('\n') - 9));
    return meta["simulation"]["revolutions"].get<int>();
  };

  REQUIRE(runCli({"simulate", "--out", out.string(), "--seed", "1", "--config", cfgPath.string()}).code == 0);
  CHECK(revolutionsIn() == 1);

  ::setenv("GCPBENCH_CONFIG", cfgPath.string().c_str(), 1);
  REQUIRE(runCli({"simulate", "--out", out.string(), "--seed", "1"}).code == 0);
  CHECK(revolutionsIn() == 1);
  ::unsetenv("GCPBENCH_CONFIG");

  REQUIRE(runCli({"simulate", "--out", out.string(), "--seed", "1"}).code == 0);
  CHECK(revolutionsIn() == RunConfig{}.revolutions);

  writeTextFile(cfgPath, R"({"simulation": {"revolution": 1}})");
  const Outcome bad = runCli({"simulate", "--out", out.string(), "--seed", "1", "--config", cfgPath.string()});
  CHECK(bad.code == cli::kExitFailure);
  CHECK(bad.err.find("revolution") != std::string::npos);
}

TEST_CASE("report writes error, histogram and Rayleigh series") {
  const fs::path dir = workDir("report");
  const Fixture f = writeFixture(dir, {0.0, 0.0075, 0.02, 0.45, -0.4775});
  auto args = evalArgs(f);
  args.insert(args.end(), {"--out", (dir / "eval.json").string()});
  REQUIRE(runCli(args).code == 0);
  REQUIRE(runCli({"report", "--in", (dir / "eval.json").string(), "--plots", (dir / "plots").string()}).code == 0);

  std::istringstream errors(readTextFile(dir / "plots" / "errors.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(errors, line)) lines.push_back(line);
  REQUIRE(lines.size() == 7);  // config, header, five rows
  CHECK(lines[0].rfind("# config,", 0) == 0);
  CHECK(lines[1] == "index,name,sequence,covered,error_m,score");
  CHECK(lines[3].rfind("1,gcp1,0,1,", 0) == 0);

  // sigma = sqrt(sum e^2 / 2N) over the five injected offsets.
  const double sumSq = 0.0075 * 0.0075 + 0.02 * 0.02 + 0.45 * 0.45 + 0.4775 * 0.4775;
  const double sigma = std::sqrt(sumSq / 10.0);
  std::istringstream curve(readTextFile(dir / "plots" / "rayleigh.csv"));
  std::vector<std::string> rows;
  while (std::getline(curve, line)) rows.push_back(line);
  REQUIRE(rows.size() == 1 + 1 + 1 + 101);
  const auto fields = rows[1].substr(2);
  CHECK(std::stod(fields.substr(fields.find(',') + 1)) == doctest::Approx(sigma).epsilon(1e-9));
  CHECK(rows[2] == "x,pdf");

  const std::string hist = readTextFile(dir / "plots" / "histogram.csv");
  CHECK(hist.find("bin_lo,bin_hi,count,density") != std::string::npos);
}
