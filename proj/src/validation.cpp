#include "gcpbench/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gcpbench/io.hpp"

namespace gcpbench {

void finalize(ValidationReport& report) {
  std::stable_sort(report.findings.begin(), report.findings.end(), [](const Finding& a, const Finding& b) {
    const double ta = a.timestamp.value_or(-std::numeric_limits<double>::infinity());
    const double tb = b.timestamp.value_or(-std::numeric_limits<double>::infinity());
    if (ta != tb) return ta < tb;
    if (a.code != b.code) return a.code < b.code;
    return a.line.value_or(0) < b.line.value_or(0);
  });
  report.accepted = std::none_of(report.findings.begin(), report.findings.end(),
                                 [](const Finding& f) { return f.severity == Severity::Error; });
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

ValidationReport validateSubmission(std::string_view rawText, double spanStart, double spanEnd,
                                    const ValidationConfig& cfg, double stampScale) {
  ValidationReport report;
  ParsedTrajectory parsed = parseTrajectory(rawText, stampScale);
  report.findings = parsed.findings;
  const auto& recs = parsed.records;

  for (std::size_t i = 0; i < recs.size(); ++i) {
    const PoseRecord& r = recs[i];
    const double norm = r.rotation.norm();
    if (!(std::abs(norm - 1.0) <= cfg.quaternionNormTolerance)) {
      report.findings.push_back({Severity::Error, "invalid_quaternion",
                                 "quaternion norm " + fmt(norm) + " deviates from 1 by more than " +
                                     fmt(cfg.quaternionNormTolerance),
                                 r.timestamp, r.line});
    }
    if (i > 0 && !(r.timestamp > recs[i - 1].timestamp)) {
      report.findings.push_back({Severity::Error, "non_monotonic_timestamp",
                                 "timestamp does not increase over line " + std::to_string(recs[i - 1].line),
                                 r.timestamp, r.line});
    }
  }

  if (!recs.empty()) {
    const double span = spanEnd - spanStart;
    if (span > 0.0) {
      double covered = 0.0;
      for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
        const double a = recs[i].timestamp, b = recs[i + 1].timestamp;
        if (!(b > a) || b - a > cfg.coverageMaxGap) continue;
        covered += std::max(0.0, std::min(b, spanEnd) - std::max(a, spanStart));
      }
      const double fraction = covered / span;
      if (fraction < cfg.minSpanCoverage) {
        report.findings.push_back({Severity::Warning, "incomplete_trajectory",
                                   "trajectory covers " + fmt(100.0 * fraction) + "% of the expected span [" +
                                       fmt(spanStart) + ", " + fmt(spanEnd) + "]",
                                   std::nullopt, std::nullopt});
      }
    }
    const double duration = recs.back().timestamp - recs.front().timestamp;
    const double rate = duration > 0.0 ? static_cast<double>(recs.size() - 1) / duration : 0.0;
    if (rate < cfg.minPoseRate) {
      report.findings.push_back({Severity::Error, "sparse_trajectory",
                                 "mean pose rate " + fmt(rate) + " Hz below " + fmt(cfg.minPoseRate) + " Hz",
                                 std::nullopt, std::nullopt});
    }
  }
  finalize(report);
  return report;
}

std::vector<DiscontinuityFlag> detectDiscontinuities(const Trajectory& traj, std::span<const double> gcpTimes,
                                                     const ValidationConfig& cfg) {
  std::vector<DiscontinuityFlag> flags;
  const auto& poses = traj.poses();
  for (std::size_t i = 0; i + 1 < poses.size(); ++i) {
    const double t0 = poses[i].timestamp, t1 = poses[i + 1].timestamp;
    const double speed = (poses[i + 1].pose.translation() - poses[i].pose.translation()).norm() / (t1 - t0);
    if (!(speed > cfg.velocityThreshold)) continue;
    DiscontinuityFlag flag{t0, t1, speed, std::nullopt, Severity::Warning};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < gcpTimes.size(); ++g) {
      const double lo = gcpTimes[g] - cfg.discontinuityWindow;
      const double hi = gcpTimes[g] + cfg.discontinuityWindow;
      if (t1 < lo || t0 > hi) continue;
      const double dist = std::abs(0.5 * (t0 + t1) - gcpTimes[g]);
      if (dist < best) {
        best = dist;
        flag.gcpIndex = g;
        flag.severity = Severity::Error;
      }
    }
    flags.push_back(flag);
  }
  return flags;
}

DiffReport diffSubmissions(const Trajectory& prev, const Trajectory& curr, std::span<const double> gcpTimes,
                           const ValidationConfig& cfg) {
  if (prev.empty() || curr.empty() || curr.endTime() < prev.startTime() || curr.startTime() > prev.endTime()) {
    throw Error(ErrorCode::NoOverlap, "submissions share no time span");
  }
  DiffReport report;
  for (const auto& p : curr.poses()) {
    if (p.timestamp < prev.startTime() || p.timestamp > prev.endTime()) continue;
    const RigidTransformd before = interpolatePose(prev, p.timestamp, std::numeric_limits<double>::infinity());
    report.timestamps.push_back(p.timestamp);
    report.displacements.push_back((p.pose.translation() - before.translation()).norm());
  }
  if (report.displacements.empty()) throw Error(ErrorCode::NoOverlap, "no current pose inside the previous span");

  auto median = [](std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  report.median = median(report.displacements);
  std::vector<double> dev(report.displacements.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(report.displacements[i] - report.median);
  report.mad = median(dev);
  report.threshold = report.median + std::max(cfg.diffMadFactor * report.mad, cfg.diffMinExcess);

  const std::size_t n = report.displacements.size();
  for (std::size_t i = 0; i < n;) {
    if (!(report.displacements[i] > report.threshold)) {
      ++i;
      continue;
    }
    ChangeWindow w{report.timestamps[i], report.timestamps[i], 0.0};
    while (i < n && report.displacements[i] > report.threshold) {
      w.tEnd = report.timestamps[i];
      w.peakDisplacement = std::max(w.peakDisplacement, report.displacements[i]);
      ++i;
    }
    report.windows.push_back(w);
  }
  for (std::size_t g = 0; g < gcpTimes.size(); ++g) {
    const double lo = gcpTimes[g] - cfg.diffWindow, hi = gcpTimes[g] + cfg.diffWindow;
    const bool hit = std::any_of(report.windows.begin(), report.windows.end(),
                                 [&](const ChangeWindow& w) { return !(w.tEnd < lo || w.tStart > hi); });
    if (hit) report.flaggedGCPs.push_back(g);
  }
  return report;
}

}  // namespace gcpbench
