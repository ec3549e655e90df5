#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "gcpbench/io.hpp"
#include "gcpbench/validation.hpp"

using namespace gcpbench;

namespace {

ErrorCode codeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::DegenerateInput;
}

// Knots at k / rate for k in [k0, k1]; the pose at time t comes from `pose`.
Trajectory sampled(long k0, long k1, double rate, const std::function<RigidTransformd(double)>& pose) {
  std::vector<TimedPose> poses;
  for (long k = k0; k <= k1; ++k) {
    const double t = static_cast<double>(k) / rate;
    poses.push_back({t, pose(t)});
  }
  return Trajectory(std::move(poses));
}

RigidTransformd straight(double t) { return RigidTransformd::fromTranslation(Point3(t, 0.0, 0.0)); }

// One `t x y z qx qy qz qw` line per knot, identity rotation.
std::string identityLines(long k0, long k1, double rate) {
  return formatTrajectory(sampled(k0, k1, rate, straight));
}

std::vector<std::string> codes(const ValidationReport& r) {
  std::vector<std::string> out;
  for (const auto& f : r.findings) out.push_back(f.code);
  return out;
}

const Finding* find(const ValidationReport& r, const std::string& code) {
  const auto it = std::find_if(r.findings.begin(), r.findings.end(), [&](const Finding& f) { return f.code == code; });
  return it == r.findings.end() ? nullptr : &*it;
}

}  // namespace

TEST_CASE("a dense well-formed submission is accepted without findings") {
  const ValidationReport r = validateSubmission(identityLines(0, 2000, 200.0), 0.0, 10.0);
  CHECK(r.accepted);
  CHECK(r.findings.empty());
}

TEST_CASE("a non-unit quaternion is rejected with its line and timestamp") {
  std::string text = "0 0 0 0 0 0 0 1\n0.01 0 0 0 0 0 0 0.5\n";
  for (int k = 2; k <= 1000; ++k) text += std::to_string(k / 100.0) + " 0 0 0 0 0 0 1\n";
  const ValidationReport r = validateSubmission(text, 0.0, 10.0);
  CHECK_FALSE(r.accepted);
  REQUIRE(codes(r) == std::vector<std::string>{"invalid_quaternion"});
  CHECK(r.findings[0].line == 2u);
  CHECK(r.findings[0].timestamp == doctest::Approx(0.01));
  CHECK(r.findings[0].message.find("0.5") != std::string::npos);
}

TEST_CASE("quaternion norm tolerance is a closed bound") {
  // qw = 1 + delta gives norm 1 + delta exactly enough at these scales.
  auto verdict = [](double qw) {
    std::string text;
    for (int k = 0; k <= 1000; ++k) text += std::to_string(k / 100.0) + " 0 0 0 0 0 0 " + formatDouble(qw) + "\n";
    return validateSubmission(text, 0.0, 10.0).accepted;
  };
  CHECK(verdict(1.0009));
  CHECK(verdict(0.9991));
  CHECK_FALSE(verdict(1.0011));
  CHECK_FALSE(verdict(0.9989));
}

TEST_CASE("poses only at GCP times are sparse and cover nothing") {
  // Five poses one second apart: 4 intervals over 4 s is 1 Hz, and every gap
  // exceeds the 0.5 s coverage limit.
  const ValidationReport r = validateSubmission(identityLines(1, 5, 1.0), 0.0, 6.0);
  CHECK_FALSE(r.accepted);
  const Finding* sparse = find(r, "sparse_trajectory");
  REQUIRE(sparse);
  CHECK(sparse->severity == Severity::Error);
  CHECK(sparse->message.find("mean pose rate 1 Hz") != std::string::npos);
  const Finding* coverage = find(r, "incomplete_trajectory");
  REQUIRE(coverage);
  CHECK(coverage->severity == Severity::Warning);
  CHECK(coverage->message.find("covers 0%") != std::string::npos);
}

TEST_CASE("pose rate gate sits at the configured minimum") {
  ValidationConfig cfg;
  cfg.coverageMaxGap = 1.0;
  // 101 poses at 10 Hz: a rate exactly at the minimum passes.
  CHECK(validateSubmission(identityLines(0, 100, 10.0), 0.0, 10.0, cfg).accepted);
  cfg.minPoseRate = 10.5;
  CHECK(find(validateSubmission(identityLines(0, 100, 10.0), 0.0, 10.0, cfg), "sparse_trajectory"));
}

TEST_CASE("partial span coverage warns but stays accepted") {
  SUBCASE("trajectory ends early") {
    // [0, 5] of [0, 10] covered.
    const ValidationReport r = validateSubmission(identityLines(0, 1000, 200.0), 0.0, 10.0);
    CHECK(r.accepted);
    REQUIRE(codes(r) == std::vector<std::string>{"incomplete_trajectory"});
    CHECK(r.findings[0].message.find("covers 50%") != std::string::npos);
  }
  SUBCASE("a two second hole in the middle") {
    // [0, 4] and [6, 10]: 8 of 10 s.
    const std::string text = identityLines(0, 800, 200.0) + identityLines(1200, 2000, 200.0);
    const ValidationReport r = validateSubmission(text, 0.0, 10.0);
    CHECK(r.accepted);
    REQUIRE(codes(r) == std::vector<std::string>{"incomplete_trajectory"});
    CHECK(r.findings[0].message.find("covers 80%") != std::string::npos);
  }
  SUBCASE("just above the coverage threshold") {
    // [0, 9.2] of [0, 10] is 92%.
    CHECK(validateSubmission(identityLines(0, 1840, 200.0), 0.0, 10.0).findings.empty());
  }
}

TEST_CASE("malformed lines are reported with their line numbers") {
  std::string text = "# header comment\n";
  for (int k = 0; k <= 1000; ++k) text += std::to_string(k / 100.0) + " 0 0 0 0 0 0 1\n";
  text += "10.5 0 0 0 0 0 1\n";       // line 1003: 7 fields
  text += "10.6 0 0 zero 0 0 0 1\n";  // line 1004: not a number
  const ValidationReport r = validateSubmission(text, 0.0, 10.0);
  CHECK_FALSE(r.accepted);
  REQUIRE(codes(r) == std::vector<std::string>{"malformed_line", "malformed_line"});
  CHECK(r.findings[0].line == 1003u);
  CHECK(r.findings[0].message.find("got 7") != std::string::npos);
  CHECK(r.findings[1].line == 1004u);
}

TEST_CASE("repeated or decreasing timestamps are rejected") {
  std::string text;
  for (int k = 0; k <= 1000; ++k) text += std::to_string(k / 100.0) + " 0 0 0 0 0 0 1\n";
  text += "9.5 0 0 0 0 0 0 1\n";
  const ValidationReport r = validateSubmission(text, 0.0, 10.0);
  CHECK_FALSE(r.accepted);
  const Finding* f = find(r, "non_monotonic_timestamp");
  REQUIRE(f);
  CHECK(f->line == 1002u);
  CHECK(f->message.find("line 1001") != std::string::npos);
}

TEST_CASE("an empty submission is rejected") {
  const ValidationReport r = validateSubmission("# nothing here\n\n", 0.0, 10.0);
  CHECK_FALSE(r.accepted);
  CHECK(codes(r) == std::vector<std::string>{"empty_trajectory"});
}

TEST_CASE("findings are ordered untimed first, then by time and code") {
  std::string text;
  for (int k = 0; k <= 400; ++k) {
    const double t = k / 100.0;
    const char* qw = (k == 300 || k == 100) ? " 2" : " 1";
    text += std::to_string(t) + " 0 0 0 0 0 0" + qw + "\n";
  }
  text += "bad line\n";
  const ValidationReport r = validateSubmission(text, 0.0, 10.0);
  // Untimed: incomplete_trajectory (40% covered) and malformed_line. Timed:
  // the two bad quaternions at t = 1 and t = 3.
  REQUIRE(codes(r) == std::vector<std::string>{"incomplete_trajectory", "malformed_line", "invalid_quaternion",
                                               "invalid_quaternion"});
  CHECK(*r.findings[2].timestamp == doctest::Approx(1.0));
  CHECK(*r.findings[3].timestamp == doctest::Approx(3.0));
}

TEST_CASE("nanosecond stamps validate like seconds") {
  std::string text;
  for (long k = 0; k <= 2000; ++k) text += std::to_string(1'700'000'000'000'000'000L + k * 5'000'000L) + " 0 0 0 0 0 0 1\n";
  const double t0 = 1.7e9;
  CHECK(validateSubmission(text, t0, t0 + 10.0, {}, 1e-9).findings.empty());
}

TEST_CASE("smooth motion raises no discontinuity") {
  const Trajectory traj = sampled(0, 4000, 200.0, straight);
  const std::vector<double> gcps{5.0, 10.0};
  CHECK(detectDiscontinuities(traj, gcps).empty());
}

TEST_CASE("a jump near a GCP is an error, far from one a warning") {
  // 1 m/s along x with a 5 cm step at t = 10: the interval [9.995, 10] moves
  // 0.005 + 0.05 m in 0.005 s, i.e. 11 m/s.
  const Trajectory traj = sampled(0, 4000, 200.0, [](double t) {
    return RigidTransformd::fromTranslation(Point3(t + (t >= 10.0 ? 0.05 : 0.0), 0.0, 0.0));
  });

  SUBCASE("near") {
    const std::vector<double> gcps{3.0, 10.2, 18.0};
    const auto flags = detectDiscontinuities(traj, gcps);
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].tStart == doctest::Approx(9.995));
    CHECK(flags[0].tEnd == doctest::Approx(10.0));
    CHECK(flags[0].speed == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(flags[0].severity == Severity::Error);
    CHECK(flags[0].gcpIndex == 1u);
  }
  SUBCASE("nearest GCP wins when several windows overlap") {
    const std::vector<double> gcps{9.3, 10.6};
    const auto flags = detectDiscontinuities(traj, gcps);
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].gcpIndex == 1u);
  }
  SUBCASE("far") {
    const std::vector<double> gcps{0.0, 11.5};
    const auto flags = detectDiscontinuities(traj, gcps);
    REQUIRE(flags.size() == 1);
    CHECK(flags[0].severity == Severity::Warning);
    CHECK_FALSE(flags[0].gcpIndex.has_value());
  }
  SUBCASE("same flags after a rigid change of world frame") {
    const RigidTransformd world =
        RigidTransformd::fromAxisAngle(Point3(0.3, -0.2, 1.0), 1.1, Point3(100.0, -40.0, 3.0));
    const std::vector<double> gcps{10.2};
    const auto a = detectDiscontinuities(traj, gcps);
    const auto b = detectDiscontinuities(traj.transformed(world), gcps);
    REQUIRE(a.size() == b.size());
    CHECK(b[0].speed == doctest::Approx(a[0].speed).epsilon(1e-9));
    CHECK(b[0].gcpIndex == a[0].gcpIndex);
  }
}

TEST_CASE("diff of identical submissions is zero everywhere") {
  const Trajectory t = sampled(0, 4000, 200.0, straight);
  const std::vector<double> gcps{10.0};
  const DiffReport d = diffSubmissions(t, t, gcps);
  CHECK(d.displacements.size() == 4001);
  CHECK(*std::max_element(d.displacements.begin(), d.displacements.end()) == 0.0);
  CHECK(d.threshold == doctest::Approx(1e-6));
  CHECK(d.windows.empty());
  CHECK(d.flaggedGCPs.empty());
}

TEST_CASE("diff resamples the previous submission at the current stamps") {
  // Straight-line motion interpolates exactly, so a 100 Hz resubmission of a
  // 200 Hz trajectory differs by rounding only.
  const Trajectory prev = sampled(0, 4000, 200.0, straight);
  const Trajectory curr = sampled(0, 2000, 100.0, straight);
  const DiffReport d = diffSubmissions(prev, curr, std::vector<double>{});
  CHECK(d.displacements.size() == 2001);
  CHECK(*std::max_element(d.displacements.begin(), d.displacements.end()) < 1e-12);
  CHECK(d.windows.empty());
}

TEST_CASE("a global offset is not a localized change") {
  const Trajectory prev = sampled(0, 4000, 200.0, straight);
  const Trajectory curr = prev.transformed(RigidTransformd::fromTranslation(Point3(0.0, 1.0, 0.0)));
  const std::vector<double> gcps{5.0, 10.0};
  const DiffReport d = diffSubmissions(prev, curr, gcps);
  CHECK(d.median == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.windows.empty());
  CHECK(d.flaggedGCPs.empty());
}

TEST_CASE("a local bump is found and attributed to the GCPs around it") {
  const Trajectory prev = sampled(0, 4000, 200.0, straight);
  auto bumped = [](double offset) {
    return sampled(0, 4000, 200.0, [offset](double t) {
      const double dy = std::abs(t - 10.0) <= 0.5 ? 0.03 : 0.0;
      return RigidTransformd::fromTranslation(Point3(t, dy, offset));
    });
  };
  // Windows [g - 1, g + 1]: 3 and 17 miss [9.5, 10.5]; 10 and 11.4 overlap it.
  const std::vector<double> gcps{3.0, 10.0, 11.4, 17.0};

  SUBCASE("on an unchanged background") {
    const DiffReport d = diffSubmissions(prev, bumped(0.0), gcps);
    CHECK(d.median == 0.0);
    CHECK(d.mad == 0.0);
    REQUIRE(d.windows.size() == 1);
    CHECK(d.windows[0].tStart == doctest::Approx(9.5));
    CHECK(d.windows[0].tEnd == doctest::Approx(10.5));
    CHECK(d.windows[0].peakDisplacement == doctest::Approx(0.03));
    CHECK(d.flaggedGCPs == std::vector<std::size_t>{1, 2});
  }
  SUBCASE("on top of a 1 m global offset") {
    // Offset along z, bump along y: inside the bump the displacement is
    // hypot(1, 0.03) = 1.00045.
    const DiffReport d = diffSubmissions(prev, bumped(1.0), gcps);
    REQUIRE(d.windows.size() == 1);
    CHECK(d.windows[0].peakDisplacement == doctest::Approx(std::hypot(1.0, 0.03)).epsilon(1e-12));
    CHECK(d.flaggedGCPs == std::vector<std::size_t>{1, 2});
  }
  SUBCASE("unchanged by a common change of world frame") {
    const RigidTransformd world = RigidTransformd::fromAxisAngle(Point3(1.0, 2.0, 0.5), -0.7, Point3(5.0, 6.0, 7.0));
    const DiffReport a = diffSubmissions(prev, bumped(0.0), gcps);
    const DiffReport b = diffSubmissions(prev.transformed(world), bumped(0.0).transformed(world), gcps);
    REQUIRE(a.displacements.size() == b.displacements.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.displacements.size(); ++i) {
      worst = std::max(worst, std::abs(a.displacements[i] - b.displacements[i]));
    }
    CHECK(worst < 1e-9);
    CHECK(b.flaggedGCPs == a.flaggedGCPs);
  }
}

TEST_CASE("disjoint submissions cannot be diffed") {
  const Trajectory prev = sampled(0, 1000, 200.0, straight);
  const Trajectory curr = sampled(1200, 2000, 200.0, straight);
  CHECK(codeOf([&] { diffSubmissions(prev, curr, std::vector<double>{}); }) == ErrorCode::NoOverlap);
  CHECK(codeOf([&] { diffSubmissions(Trajectory{}, curr, std::vector<double>{}); }) == ErrorCode::NoOverlap);
}
