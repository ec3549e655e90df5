#ifndef GCPBENCH_LIDAR_SIM_HPP
#define GCPBENCH_LIDAR_SIM_HPP

#include <cstdint>
#include <vector>

#include "gcpbench/geometry.hpp"

namespace gcpbench {

/// Multi-ring scanner. Ray direction for elevation e and azimuth a in the lidar
/// frame is (cos e cos a, cos e sin a, sin e).
struct ScannerSpec {
  std::vector<double> ringElevations;  // radians, strictly decreasing
  int samplesPerRev = 1800;
  RigidTransformd mountPose;  // world <- lidar
  double rangeNoiseSigma = 0.03;
  double intensityNoiseSigma = 0.0;
  bool azimuthPhaseJitter = true;
  bool intensityBlur = false;

  /// 32 rings evenly spaced from 0 deg down to -90 deg.
  static ScannerSpec hemispherical(int rings = 32);

  void validate() const;
};

/// Circular target: concentric constant-reflectivity zones separated by
/// edgeRadii. intensityLevels[k] applies inside edgeRadii[k] (and outside the
/// previous radius); the last level is the background.
struct FiducialSpec {
  Point3 center = Point3::Zero();
  std::vector<double> edgeRadii{0.10, 0.15};
  std::vector<double> intensityLevels{0.9, 0.2, 0.5};

  void validate() const;
  [[nodiscard]] double intensityAt(const Point3& pointOnPlane) const;
};

struct RingSample {
  double azimuth = 0.0;  // radians
  Point3 point = Point3::Zero();  // lidar frame
  double intensity = 0.0;
  double range = 0.0;
};

struct Ring {
  int ringIndex = 0;
  std::vector<RingSample> samples;
};

struct LidarScan {
  std::vector<Ring> rings;
  int revolutionIndex = 0;

  [[nodiscard]] std::size_t sampleCount() const;
};

/// Synthetic scans of a planar floor (world frame) carrying one fiducial.
/// Samples are the ray/plane intersections expressed in the lidar frame with
/// Gaussian range noise along the ray. Rays that miss the plane are omitted.
std::vector<LidarScan> simulateScan(const ScannerSpec& scanner, const Planed& ground,
                                    const FiducialSpec& fiducial, int revolutions, std::uint64_t seed);

Point3 groundTruthCenter(const FiducialSpec& fiducial);

/// World-frame copy of every sample point: mountPose * point.
std::vector<Point3> samplesInWorld(const LidarScan& scan, const RigidTransformd& mountPose);

/// All samples of all rings of all scans, lidar frame.
std::vector<Point3> collectPoints(const std::vector<LidarScan>& scans);

}  // namespace gcpbench

#endif  // GCPBENCH_LIDAR_SIM_HPP
