#include "gcpbench/lidar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace gcpbench {

ScannerSpec ScannerSpec::hemispherical(int rings) {
  ScannerSpec spec;
  spec.ringElevations.resize(static_cast<std::size_t>(rings));
  for (int i = 0; i < rings; ++i) {
    spec.ringElevations[static_cast<std::size_t>(i)] =
        -0.5 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(rings - 1);
  }
  return spec;
}

void ScannerSpec::validate() const {
  if (ringElevations.empty()) throw Error(ErrorCode::InvalidConfig, "scanner has no rings");
  for (std::size_t i = 1; i < ringElevations.size(); ++i) {
    if (!(ringElevations[i] < ringElevations[i - 1])) {
      throw Error(ErrorCode::InvalidConfig, "ring elevations must be strictly decreasing");
    }
  }
  if (samplesPerRev < 8) throw Error(ErrorCode::InvalidConfig, "samplesPerRev must be >= 8");
  if (!(rangeNoiseSigma >= 0.0) || !(intensityNoiseSigma >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "noise sigmas must be >= 0");
  }
}

void FiducialSpec::validate() const {
  if (edgeRadii.empty()) throw Error(ErrorCode::InvalidConfig, "fiducial needs at least one edge radius");
  for (std::size_t i = 0; i < edgeRadii.size(); ++i) {
    if (!(edgeRadii[i] > 0.0) || (i > 0 && !(edgeRadii[i] > edgeRadii[i - 1]))) {
      throw Error(ErrorCode::InvalidConfig, "edge radii must be positive and strictly increasing");
    }
  }
  if (intensityLevels.size() != edgeRadii.size() + 1) {
    throw Error(ErrorCode::InvalidConfig, "intensityLevels must have edgeRadii.size() + 1 entries");
  }
  if (!center.allFinite()) throw Error(ErrorCode::InvalidConfig, "fiducial center not finite");
}

double FiducialSpec::intensityAt(const Point3& pointOnPlane) const {
  const double r = (pointOnPlane - center).norm();
  for (std::size_t k = 0; k < edgeRadii.size(); ++k) {
    if (r < edgeRadii[k]) return intensityLevels[k];
  }
  return intensityLevels.back();
}

std::size_t LidarScan::sampleCount() const {
  std::size_t n = 0;
  for (const auto& ring : rings) n += ring.samples.size();
  return n;
}

namespace {

void blurAlongRing(std::vector<double>& values) {
  if (values.size() < 3) return;
  const std::vector<double> in = values;
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double left = in[i == 0 ? 0 : i - 1];
    const double right = in[i + 1 == n ? n - 1 : i + 1];
    values[i] = 0.25 * left + 0.5 * in[i] + 0.25 * right;
  }
}

}  // namespace

std::vector<LidarScan> simulateScan(const ScannerSpec& scanner, const Planed& ground,
                                    const FiducialSpec& fiducial, int revolutions, std::uint64_t seed) {
  scanner.validate();
  fiducial.validate();
  if (revolutions < 1) throw Error(ErrorCode::InvalidConfig, "revolutions must be >= 1");
  if (std::abs(ground.signedDistance(fiducial.center)) > 1e-9) {
    throw Error(ErrorCode::InvalidConfig, "fiducial center is not on the ground plane");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double step = 2.0 * std::numbers::pi / scanner.samplesPerRev;
  std::uniform_real_distribution<double> phaseDist(0.0, step);

  const Eigen::Matrix3d rot = scanner.mountPose.rotationMatrix();
  const Point3& origin = scanner.mountPose.translation();
  const double originHeight = ground.signedDistance(origin);
  const double intensityCap = 1.0 + 3.0 * scanner.intensityNoiseSigma;

  std::vector<LidarScan> scans;
  scans.reserve(static_cast<std::size_t>(revolutions));
  for (int rev = 0; rev < revolutions; ++rev) {
    const double phase = scanner.azimuthPhaseJitter ? phaseDist(rng) : 0.0;
    LidarScan scan;
    scan.revolutionIndex = rev;
    scan.rings.reserve(scanner.ringElevations.size());
    for (std::size_t r = 0; r < scanner.ringElevations.size(); ++r) {
      const double el = scanner.ringElevations[r];
      const double ce = std::cos(el), se = std::sin(el);
      Ring ring;
      ring.ringIndex = static_cast<int>(r);
      ring.samples.reserve(static_cast<std::size_t>(scanner.samplesPerRev));
      std::vector<double> clean;
      clean.reserve(static_cast<std::size_t>(scanner.samplesPerRev));
      for (int k = 0; k < scanner.samplesPerRev; ++k) {
        const double az = phase + step * k;
        const Point3 dirLidar(ce * std::cos(az), ce * std::sin(az), se);
        const Point3 dirWorld = rot * dirLidar;
        const double denom = ground.normal.dot(dirWorld);
        if (std::abs(denom) < 1e-12) continue;
        const double range = -originHeight / denom;
        if (!(range > 0.0)) continue;
        const Point3 hit = origin + range * dirWorld;
        RingSample s;
        s.azimuth = az;
        s.range = range;
        s.point = dirLidar * range;
        ring.samples.push_back(s);
        clean.push_back(fiducial.intensityAt(hit));
      }
      if (scanner.intensityBlur) blurAlongRing(clean);
      // Noise is drawn in sample order after geometry so the stream does not
      // depend on the blur flag.
      for (std::size_t i = 0; i < ring.samples.size(); ++i) {
        RingSample& s = ring.samples[i];
        if (scanner.rangeNoiseSigma > 0.0) {
          const Point3 dir = s.point / s.range;
          s.range += scanner.rangeNoiseSigma * gauss(rng);
          s.point = dir * s.range;
        }
        double intensity = clean[i];
        if (scanner.intensityNoiseSigma > 0.0) intensity += scanner.intensityNoiseSigma * gauss(rng);
        s.intensity = std::clamp(intensity, 0.0, intensityCap);
      }
      scan.rings.push_back(std::move(ring));
    }
    scans.push_back(std::move(scan));
  }
  return scans;
}

Point3 groundTruthCenter(const FiducialSpec& fiducial) { return fiducial.center; }

std::vector<Point3> samplesInWorld(const LidarScan& scan, const RigidTransformd& mountPose) {
  std::vector<Point3> out;
  out.reserve(scan.sampleCount());
  for (const auto& ring : scan.rings) {
    for (const auto& s : ring.samples) out.push_back(mountPose * s.point);
  }
  return out;
}

std::vector<Point3> collectPoints(const std::vector<LidarScan>& scans) {
  std::vector<Point3> out;
  std::size_t n = 0;
  for (const auto& scan : scans) n += scan.sampleCount();
  out.reserve(n);
  for (const auto& scan : scans) {
    for (const auto& ring : scan.rings) {
      for (const auto& s : ring.samples) out.push_back(s.point);
    }
  }
  return out;
}

}  // namespace gcpbench
