#ifndef GCPBENCH_VALIDATION_HPP
#define GCPBENCH_VALIDATION_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcpbench/trajectory.hpp"

namespace gcpbench {

enum class Severity { Error, Warning };

struct Finding {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::optional<double> timestamp;
  std::optional<std::size_t> line;
};

struct ValidationReport {
  std::vector<Finding> findings;  // sorted by timestamp (untimed first), then code
  bool accepted = true;
};

/// Heuristic gates for submission checks. None of these are calibrated
/// against real submissions; all are overridable.
struct ValidationConfig {
  double quaternionNormTolerance = 1e-3;
  double minSpanCoverage = 0.9;
  double minPoseRate = 10.0;   // Hz
  double coverageMaxGap = 0.5;  // s; longer gaps do not count toward span coverage

  double discontinuityWindow = 1.0;  // s around a GCP timestamp
  double velocityThreshold = 5.0;    // m/s

  double diffMadFactor = 5.0;
  double diffMinExcess = 1e-6;  // m; absolute slack above the median
  double diffWindow = 1.0;      // s around a GCP timestamp
};

/// Sorts findings and derives `accepted`.
void finalize(ValidationReport& report);

/// Parses and checks a pose-per-line submission: malformed lines, timestamp
/// order, quaternion norms, span coverage and pose rate.
ValidationReport validateSubmission(std::string_view rawText, double spanStart, double spanEnd,
                                    const ValidationConfig& cfg = {}, double stampScale = 1.0);

struct DiscontinuityFlag {
  double tStart = 0.0;
  double tEnd = 0.0;
  double speed = 0.0;                   // m/s
  std::optional<std::size_t> gcpIndex;  // set when near a GCP timestamp
  Severity severity = Severity::Warning;
};

/// Finite-difference speed between consecutive poses; intervals above the
/// threshold are errors near a GCP timestamp and warnings elsewhere.
std::vector<DiscontinuityFlag> detectDiscontinuities(const Trajectory& traj, std::span<const double> gcpTimes,
                                                     const ValidationConfig& cfg = {});

struct ChangeWindow {
  double tStart = 0.0;
  double tEnd = 0.0;
  double peakDisplacement = 0.0;
};

struct DiffReport {
  std::vector<double> timestamps;
  std::vector<double> displacements;
  double median = 0.0;
  double mad = 0.0;
  double threshold = 0.0;
  std::vector<ChangeWindow> windows;
  std::vector<std::size_t> flaggedGCPs;  // indices into gcpTimes
};

/// Displacement of `curr` against `prev` (interpolated) at every timestamp of
/// `curr` inside prev's span. Localized changes are maximal runs above
/// median + k * MAD. Throws NoOverlap when the spans do not intersect.
DiffReport diffSubmissions(const Trajectory& prev, const Trajectory& curr, std::span<const double> gcpTimes,
                           const ValidationConfig& cfg = {});

}  // namespace gcpbench

#endif  // GCPBENCH_VALIDATION_HPP
