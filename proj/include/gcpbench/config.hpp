#ifndef GCPBENCH_CONFIG_HPP
#define GCPBENCH_CONFIG_HPP

#include <filesystem>

#include "gcpbench/evaluation.hpp"
#include "gcpbench/gcp_detector.hpp"
#include "gcpbench/io.hpp"
#include "gcpbench/lidar_sim.hpp"
#include "gcpbench/validation.hpp"

namespace gcpbench {

/// Every tunable of the toolkit in one document. Sections: scanner, ground,
/// fiducial, simulation, detector, scoring, evaluation, validation. Unknown
/// keys are rejected; missing keys keep their defaults.
struct RunConfig {
  ScannerSpec scanner = defaultScanner();
  Planed ground = Planed::fromNormalOffset(Point3::UnitZ(), 0.0);
  FiducialSpec fiducial = defaultFiducial();
  int revolutions = 10;

  DetectorConfig detector = defaultDetector();

  ScoreBrackets brackets = ScoreBrackets::challengeDefault();
  double maxGap = kDefaultMaxGap;
  MultiSessionAlignment multiSession = MultiSessionAlignment::ReferenceSession;

  ValidationConfig validation;

  /// Hemispherical 32-ring unit mounted level, 0.5 m above the floor.
  static ScannerSpec defaultScanner();
  /// Default target 0.6 m ahead of the scanner on the floor.
  static FiducialSpec defaultFiducial();
  /// Detector defaults with the crop window on the default target.
  static DetectorConfig defaultDetector();

  void validate() const;
};

RunConfig runConfigFromJson(const Json& j);
/// Fully materialized configuration (every default spelled out).
Json toJson(const RunConfig& cfg);

Json toJson(const DetectorConfig& cfg);
DetectorConfig detectorConfigFromJson(const Json& j, DetectorConfig base = {});

RunConfig loadRunConfig(const std::filesystem::path& path);

}  // namespace gcpbench

#endif  // GCPBENCH_CONFIG_HPP
