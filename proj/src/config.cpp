#include "gcpbench/config.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gcpbench {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void unknownKey(const std::string& section, const std::string& key) {
  throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in section '" + section + "'");
}

void requireObject(const Json& j, const std::string& section) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "section '" + section + "' must be an object");
}

template <typename T>
T get(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "bad value for '" + key + "': " + e.what());
  }
}

Point3 point(const Json& j, const std::string& key) {
  const auto v = get<std::vector<double>>(j, key);
  if (v.size() != 3) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must have 3 entries");
  return {v[0], v[1], v[2]};
}

Json vec(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

const char* projectionName(ProjectionMode m) { return m == ProjectionMode::AlongBeam ? "along_beam" : "orthogonal"; }

const char* multiSessionName(MultiSessionAlignment m) {
  return m == MultiSessionAlignment::ReferenceSession ? "reference_session" : "joint";
}

void readScanner(const Json& j, ScannerSpec& s) {
  requireObject(j, "scanner");
  for (const auto& [key, v] : j.items()) {
    if (key == "ring_elevations_deg") {
      s.ringElevations.clear();
      for (double d : get<std::vector<double>>(v, key)) s.ringElevations.push_back(d * kDeg);
    } else if (key == "rings") {
      s.ringElevations = ScannerSpec::hemispherical(get<int>(v, key)).ringElevations;
    } else if (key == "samples_per_rev") {
      s.samplesPerRev = get<int>(v, key);
    } else if (key == "mount") {
      s.mountPose = transformFromJson(v);
    } else if (key == "range_noise_sigma") {
      s.rangeNoiseSigma = get<double>(v, key);
    } else if (key == "intensity_noise_sigma") {
      s.intensityNoiseSigma = get<double>(v, key);
    } else if (key == "azimuth_phase_jitter") {
      s.azimuthPhaseJitter = get<bool>(v, key);
    } else if (key == "intensity_blur") {
      s.intensityBlur = get<bool>(v, key);
    } else {
      unknownKey("scanner", key);
    }
  }
}

void readFiducial(const Json& j, FiducialSpec& f) {
  requireObject(j, "fiducial");
  for (const auto& [key, v] : j.items()) {
    if (key == "center") {
      f.center = point(v, key);
    } else if (key == "edge_radii") {
      f.edgeRadii = get<std::vector<double>>(v, key);
    } else if (key == "intensity_levels") {
      f.intensityLevels = get<std::vector<double>>(v, key);
    } else {
      unknownKey("fiducial", key);
    }
  }
}

void readGround(const Json& j, Planed& p) {
  requireObject(j, "ground");
  Point3 normal = p.normal;
  double offset = p.offset;
  for (const auto& [key, v] : j.items()) {
    if (key == "normal") {
      normal = point(v, key);
    } else if (key == "offset") {
      offset = get<double>(v, key);
    } else {
      unknownKey("ground", key);
    }
  }
  p = Planed::fromNormalOffset(normal, offset);
}

void readBrackets(const Json& j, ScoreBrackets& b) {
  requireObject(j, "scoring");
  for (const auto& [key, v] : j.items()) {
    if (key == "brackets") {
      b.brackets.clear();
      for (const auto& row : v) {
        if (!row.is_array() || row.size() != 2) {
          throw Error(ErrorCode::InvalidConfig, "each bracket is [upper_bound_or_null, points]");
        }
        const double bound = row[0].is_null() ? std::numeric_limits<double>::infinity() : get<double>(row[0], key);
        b.brackets.push_back({bound, get<int>(row[1], key)});
      }
    } else if (key == "max_points_per_gcp") {
      b.maxPointsPerGCP = get<int>(v, key);
    } else {
      unknownKey("scoring", key);
    }
  }
}

void readEvaluation(const Json& j, RunConfig& cfg) {
  requireObject(j, "evaluation");
  for (const auto& [key, v] : j.items()) {
    if (key == "max_gap") {
      cfg.maxGap = get<double>(v, key);
    } else if (key == "multi_session_alignment") {
      const auto name = get<std::string>(v, key);
      if (name == "reference_session") {
        cfg.multiSession = MultiSessionAlignment::ReferenceSession;
      } else if (name == "joint") {
        cfg.multiSession = MultiSessionAlignment::Joint;
      } else {
        throw Error(ErrorCode::InvalidConfig, "multi_session_alignment is reference_session or joint");
      }
    } else {
      unknownKey("evaluation", key);
    }
  }
}

void readValidation(const Json& j, ValidationConfig& c) {
  requireObject(j, "validation");
  for (const auto& [key, v] : j.items()) {
    double* target = nullptr;
    if (key == "quaternion_norm_tolerance") target = &c.quaternionNormTolerance;
    else if (key == "min_span_coverage") target = &c.minSpanCoverage;
    else if (key == "min_pose_rate") target = &c.minPoseRate;
    else if (key == "coverage_max_gap") target = &c.coverageMaxGap;
    else if (key == "discontinuity_window") target = &c.discontinuityWindow;
    else if (key == "velocity_threshold") target = &c.velocityThreshold;
    else if (key == "diff_mad_factor") target = &c.diffMadFactor;
    else if (key == "diff_min_excess") target = &c.diffMinExcess;
    else if (key == "diff_window") target = &c.diffWindow;
    else unknownKey("validation", key);
    *target = get<double>(v, key);
  }
}

}  // namespace

ScannerSpec RunConfig::defaultScanner() {
  ScannerSpec s = ScannerSpec::hemispherical(32);
  s.mountPose = RigidTransformd::fromTranslation(Point3(0.0, 0.0, 0.5));
  return s;
}

FiducialSpec RunConfig::defaultFiducial() {
  FiducialSpec f;
  f.center = Point3(0.6, 0.0, 0.0);
  return f;
}

DetectorConfig RunConfig::defaultDetector() {
  DetectorConfig d;
  d.roiCenterHint = Eigen::Vector2d(0.6, 0.0);
  return d;
}

void RunConfig::validate() const {
  scanner.validate();
  fiducial.validate();
  detector.validate();
  brackets.validate();
  if (revolutions < 1) throw Error(ErrorCode::InvalidConfig, "revolutions must be >= 1");
  if (!(maxGap > 0.0)) throw Error(ErrorCode::InvalidConfig, "max_gap must be > 0");
}

DetectorConfig detectorConfigFromJson(const Json& j, DetectorConfig d) {
  requireObject(j, "detector");
  for (const auto& [key, v] : j.items()) {
    if (key == "roi_center_hint") {
      if (v.is_null()) {
        d.roiCenterHint.reset();
      } else {
        const auto h = get<std::vector<double>>(v, key);
        if (h.size() != 2) throw Error(ErrorCode::InvalidConfig, "roi_center_hint is [x, y] or null");
        d.roiCenterHint = Eigen::Vector2d(h[0], h[1]);
      }
    } else if (key == "roi_radius") {
      d.roiRadius = get<double>(v, key);
    } else if (key == "hough_cell_size") {
      d.houghCellSize = get<double>(v, key);
    } else if (key == "hough_extent") {
      d.houghExtent = get<double>(v, key);
    } else if (key == "blur_sigma") {
      d.blurSigma = get<double>(v, key);
    } else if (key == "canny_smooth_sigma") {
      d.cannySmoothSigma = get<double>(v, key);
    } else if (key == "canny_high_frac") {
      d.cannyHighFrac = get<double>(v, key);
    } else if (key == "canny_low_frac") {
      d.cannyLowFrac = get<double>(v, key);
    } else if (key == "edge_floor_frac") {
      d.edgeFloorFrac = get<double>(v, key);
    } else if (key == "radii") {
      d.radii = get<std::vector<double>>(v, key);
    } else if (key == "min_votes") {
      d.minVotes = v.is_null() ? std::nullopt : std::optional<double>(get<double>(v, key));
    } else if (key == "support_tolerance") {
      d.supportTolerance = v.is_null() ? std::nullopt : std::optional<double>(get<double>(v, key));
    } else if (key == "sub_cell_refinement") {
      d.subCellRefinement = get<bool>(v, key);
    } else if (key == "robust_plane") {
      d.robustPlane = get<bool>(v, key);
    } else if (key == "ransac_iters") {
      d.planeFit.ransacIters = get<int>(v, key);
    } else if (key == "inlier_dist") {
      d.planeFit.inlierDist = get<double>(v, key);
    } else if (key == "max_tilt_deg") {
      d.maxTiltDeg = get<double>(v, key);
    } else if (key == "beam_origin") {
      d.beamOrigin = point(v, key);
    } else if (key == "projection") {
      const auto name = get<std::string>(v, key);
      if (name == "along_beam") {
        d.projection = ProjectionMode::AlongBeam;
      } else if (name == "orthogonal") {
        d.projection = ProjectionMode::Orthogonal;
      } else {
        throw Error(ErrorCode::InvalidConfig, "projection is along_beam or orthogonal");
      }
    } else {
      unknownKey("detector", key);
    }
  }
  return d;
}

Json toJson(const DetectorConfig& d) {
  return Json{
      {"roi_center_hint",
       d.roiCenterHint ? Json::array({d.roiCenterHint->x(), d.roiCenterHint->y()}) : Json(nullptr)},
      {"roi_radius", d.roiRadius},
      {"hough_cell_size", d.houghCellSize},
      {"hough_extent", d.houghExtent},
      {"blur_sigma", d.blurSigma},
      {"canny_smooth_sigma", d.cannySmoothSigma},
      {"canny_high_frac", d.cannyHighFrac},
      {"canny_low_frac", d.cannyLowFrac},
      {"edge_floor_frac", d.edgeFloorFrac},
      {"radii", d.radii},
      {"min_votes", d.effectiveMinVotes()},
      {"support_tolerance", d.effectiveSupportTolerance()},
      {"sub_cell_refinement", d.subCellRefinement},
      {"robust_plane", d.robustPlane},
      {"ransac_iters", d.planeFit.ransacIters},
      {"inlier_dist", d.planeFit.inlierDist},
      {"max_tilt_deg", d.maxTiltDeg},
      {"projection", projectionName(d.projection)},
      {"beam_origin", vec(d.beamOrigin)},
  };
}

RunConfig runConfigFromJson(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "configuration must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "scanner") {
      readScanner(v, cfg.scanner);
    } else if (key == "ground") {
      readGround(v, cfg.ground);
    } else if (key == "fiducial") {
      readFiducial(v, cfg.fiducial);
    } else if (key == "simulation") {
      requireObject(v, key);
      for (const auto& [k, x] : v.items()) {
        if (k == "revolutions") cfg.revolutions = get<int>(x, k);
        else unknownKey("simulation", k);
      }
    } else if (key == "detector") {
      cfg.detector = detectorConfigFromJson(v, cfg.detector);
    } else if (key == "scoring") {
      readBrackets(v, cfg.brackets);
    } else if (key == "evaluation") {
      readEvaluation(v, cfg);
    } else if (key == "validation") {
      readValidation(v, cfg.validation);
    } else {
      unknownKey("<root>", key);
    }
  }
  cfg.validate();
  return cfg;
}

Json toJson(const RunConfig& cfg) {
  Json elevations = Json::array();
  for (double e : cfg.scanner.ringElevations) elevations.push_back(e / kDeg);
  Json brackets = Json::array();
  for (const auto& b : cfg.brackets.brackets) {
    brackets.push_back(Json::array({std::isinf(b.upperBound) ? Json(nullptr) : Json(b.upperBound), b.points}));
  }
  const ValidationConfig& v = cfg.validation;
  return Json{
      {"scanner",
       Json{{"ring_elevations_deg", elevations},
            {"samples_per_rev", cfg.scanner.samplesPerRev},
            {"mount", toJson(cfg.scanner.mountPose)},
            {"range_noise_sigma", cfg.scanner.rangeNoiseSigma},
            {"intensity_noise_sigma", cfg.scanner.intensityNoiseSigma},
            {"azimuth_phase_jitter", cfg.scanner.azimuthPhaseJitter},
            {"intensity_blur", cfg.scanner.intensityBlur}}},
      {"ground", Json{{"normal", vec(cfg.ground.normal)}, {"offset", cfg.ground.offset}}},
      {"fiducial",
       Json{{"center", vec(cfg.fiducial.center)},
            {"edge_radii", cfg.fiducial.edgeRadii},
            {"intensity_levels", cfg.fiducial.intensityLevels}}},
      {"simulation", Json{{"revolutions", cfg.revolutions}}},
      {"detector", toJson(cfg.detector)},
      {"scoring", Json{{"brackets", brackets}, {"max_points_per_gcp", cfg.brackets.maxPointsPerGCP}}},
      {"evaluation", Json{{"max_gap", cfg.maxGap}, {"multi_session_alignment", multiSessionName(cfg.multiSession)}}},
      {"validation",
       Json{{"quaternion_norm_tolerance", v.quaternionNormTolerance},
            {"min_span_coverage", v.minSpanCoverage},
            {"min_pose_rate", v.minPoseRate},
            {"coverage_max_gap", v.coverageMaxGap},
            {"discontinuity_window", v.discontinuityWindow},
            {"velocity_threshold", v.velocityThreshold},
            {"diff_mad_factor", v.diffMadFactor},
            {"diff_min_excess", v.diffMinExcess},
            {"diff_window", v.diffWindow}}},
  };
}

RunConfig loadRunConfig(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(readTextFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return runConfigFromJson(j);
}

}  // namespace gcpbench
