#ifndef GCPBENCH_TESTS_FIXTURES_HPP
#define GCPBENCH_TESTS_FIXTURES_HPP

// Evaluation fixtures with known answers. Surveyed GCPs lie on the floor
// (z = 0) and estimation errors are injected along z. Such errors survive
// Kabsch alignment untouched when they sum to zero and carry no moment about
// the GCP centroid: sum d = sum d x = sum d y = 0.

#include <cmath>
#include <string>
#include <vector>

#include "gcpbench/evaluation.hpp"
#include "gcpbench/trajectory.hpp"

namespace gcpbench::testing {

/// Planar GCP layout for z-offsets `d` (sum must be 0). The last point's
/// position is solved so the offsets carry no moment.
inline std::vector<Point3> balancedLayout(const std::vector<double>& d) {
  const std::size_t n = d.size();
  std::vector<Point3> pts;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = 2.0 * static_cast<double>(i) + 0.3;
    pts.emplace_back(4.0 * std::cos(a) + 0.5 * static_cast<double>(i), 3.0 * std::sin(a), 0.0);
    mx += d[i] * pts.back().x();
    my += d[i] * pts.back().y();
  }
  pts.emplace_back(-mx / d.back(), -my / d.back(), 0.0);
  return pts;
}

inline std::string gcpName(std::size_t i) { return "gcp" + std::to_string(i); }

inline std::vector<GroundControlPoint> surveyOf(const std::vector<Point3>& pts, std::size_t firstIndex = 0) {
  std::vector<GroundControlPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back({gcpName(firstIndex + i), pts[i]});
  return out;
}

/// Smooth body motion sampled at 100 Hz over [t0, t1]: yaw 0.1 rad/s and a
/// gentle planar path.
inline RigidTransformd truePose(double t) {
  return RigidTransformd::fromAxisAngle(Point3::UnitZ(), 0.1 * t, Point3(0.5 * t, 0.3 * std::sin(0.2 * t), 0.2));
}

inline Trajectory smoothTrajectory(double t0, double t1, double rate = 100.0) {
  std::vector<TimedPose> poses;
  const auto n = static_cast<long>(std::llround((t1 - t0) * rate));
  for (long k = 0; k <= n; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    poses.push_back({t, truePose(t)});
  }
  return Trajectory(std::move(poses));
}

inline RigidTransformd lidarExtrinsic() {
  return RigidTransformd::fromAxisAngle(Point3(0.1, 0.0, 1.0), 0.3, Point3(0.1, -0.05, 0.3));
}

inline CalibrationSet defaultCalibration() { return {{"lidar", lidarExtrinsic()}, {"tip", RigidTransformd()}}; }

/// One lidar observation per GCP at t = 1, 2, 3, ... (knots of the 100 Hz
/// trajectory). Each sensor-frame point is chosen so the true trajectory
/// maps it onto surveyed + (0, 0, d_i).
inline std::vector<GCPObservation> observationsFor(const std::vector<GroundControlPoint>& gcps,
                                                   const std::vector<double>& d, double firstTime = 1.0) {
  std::vector<GCPObservation> obs;
  const RigidTransformd calibInv = lidarExtrinsic().inverse();
  for (std::size_t i = 0; i < gcps.size(); ++i) {
    const double t = firstTime + static_cast<double>(i);
    const Point3 world = gcps[i].surveyedPosition + Point3(0.0, 0.0, d[i]);
    obs.push_back({t, gcps[i].name, "lidar", calibInv * (truePose(t).inverse() * world)});
  }
  return obs;
}

}  // namespace gcpbench::testing

#endif  // GCPBENCH_TESTS_FIXTURES_HPP
