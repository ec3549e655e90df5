#ifndef GCPBENCH_IO_HPP
#define GCPBENCH_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gcpbench/evaluation.hpp"
#include "gcpbench/gcp_detector.hpp"
#include "gcpbench/lidar_sim.hpp"
#include "gcpbench/trajectory.hpp"
#include "gcpbench/validation.hpp"

namespace gcpbench {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Trajectory text: `timestamp tx ty tz qx qy qz qw` per line, `#` comments.

struct PoseRecord {
  std::size_t line = 0;
  double timestamp = 0.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // as written, not normalized
};

struct ParsedTrajectory {
  std::vector<PoseRecord> records;
  std::vector<Finding> findings;

  /// Builds a Trajectory (normalizing quaternions). Throws when timestamps are
  /// not strictly increasing or a quaternion is zero.
  [[nodiscard]] Trajectory toTrajectory(const std::string& bodyFrame = "imu") const;
};

/// Lenient line parser; bad lines become `malformed_line` findings and an
/// input without poses yields `empty_trajectory`. Timestamps are multiplied by
/// `stampScale` (1e-9 for nanosecond stamps).
ParsedTrajectory parseTrajectory(std::string_view text, double stampScale = 1.0);

/// 17 significant digits per value; parse(format(t)) reproduces t exactly.
std::string formatTrajectory(const Trajectory& traj);

std::string readTextFile(const std::filesystem::path& path);
void writeTextFile(const std::filesystem::path& path, std::string_view text);

/// Parses a trajectory file and fails with ParseError on any error finding.
Trajectory loadTrajectory(const std::filesystem::path& path, double stampScale = 1.0);

// ---------------------------------------------------------------------------
// Scan CSV: `revolution,ring,azimuth_rad,x,y,z,intensity`.

void writeScansCsv(std::ostream& out, const std::vector<LidarScan>& scans);
std::vector<LidarScan> readScansCsv(std::istream& in);

// ---------------------------------------------------------------------------
// Survey CSV `name,x,y,z` and observation CSV
// `timestamp,gcp_name,sensor_frame,px,py,pz`.

std::vector<GroundControlPoint> readSurveyCsv(std::istream& in);
void writeSurveyCsv(std::ostream& out, const std::vector<GroundControlPoint>& gcps);
std::vector<GCPObservation> readObservationsCsv(std::istream& in, double stampScale = 1.0);
void writeObservationsCsv(std::ostream& out, const std::vector<GCPObservation>& obs);

// ---------------------------------------------------------------------------
// JSON documents.

/// `{frame: {t: [x, y, z], q: [qw, qx, qy, qz]}}`, each imu <- sensor.
CalibrationSet calibrationFromJson(const Json& j);
Json toJson(const CalibrationSet& calib);

Json toJson(const RigidTransformd& t);
RigidTransformd transformFromJson(const Json& j);

Json toJson(const DetectionResult& det);
Json toJson(const EvaluationReport& report);
EvaluationReport evaluationReportFromJson(const Json& j);
Json toJson(const ValidationReport& report);
Json toJson(const DiffReport& report);
Json toJson(const std::vector<DiscontinuityFlag>& flags);

/// 17 significant digits, trailing zeros dropped; reads back to the same double.
std::string formatDouble(double v);

}  // namespace gcpbench

#endif  // GCPBENCH_IO_HPP
