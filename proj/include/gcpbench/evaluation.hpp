#ifndef GCPBENCH_EVALUATION_HPP
#define GCPBENCH_EVALUATION_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcpbench/geometry.hpp"
#include "gcpbench/trajectory.hpp"

namespace gcpbench {

struct GroundControlPoint {
  std::string name;
  Point3 surveyedPosition = Point3::Zero();  // world frame
};

struct GCPObservation {
  double timestamp = 0.0;
  std::string gcpName;
  std::string sensorFrame;  // e.g. "lidar" or "tip"
  Point3 pointInSensorFrame = Point3::Zero();
};

/// Extrinsics keyed by sensor frame name, each imu <- sensor.
using CalibrationSet = std::map<std::string, RigidTransformd>;

/// Half-open error brackets [previous bound, upperBound) -> points. The last
/// bracket is open-ended.
struct ScoreBrackets {
  struct Bracket {
    double upperBound;
    int points;
  };
  std::vector<Bracket> brackets;
  int maxPointsPerGCP = 20;

  /// 20 / 10 / 6 / 5 / 3 / 1 / 0 points with bounds 5 mm, 1 cm, 3 cm, 6 cm,
  /// 10 cm and 40 cm.
  static ScoreBrackets challengeDefault();
  void validate() const;
};

int scoreError(double error, const ScoreBrackets& brackets = ScoreBrackets::challengeDefault());

/// (sum of scores / (maxPoints * N)) * multiplier. Throws EmptySequence for N = 0.
double sequenceScore(std::span<const int> scores, double multiplier = 100.0, int maxPointsPerGCP = 20);

/// Single-session multiplier 100; the manipulation-resistant site uses 200.
double siteMultiplier(int site);

struct EstimatedGCP {
  std::size_t observationIndex = 0;
  std::string name;
  double timestamp = 0.0;
  Point3 position = Point3::Zero();  // submission world frame
};

struct UncoveredGCP {
  std::size_t observationIndex = 0;
  std::string name;
  double timestamp = 0.0;
  std::string reason;
};

struct GCPEstimates {
  std::vector<EstimatedGCP> covered;
  std::vector<UncoveredGCP> uncovered;
};

/// p_world = interpolatePose(traj, t) * calib[frame] * p_sensor for every
/// observation; failed interpolations are reported as uncovered.
/// Throws MissingFrame when an observation references an uncalibrated frame.
GCPEstimates estimatedGCPPositions(const Trajectory& traj, std::span<const GCPObservation> obs,
                                   const CalibrationSet& calib, double maxGap = kDefaultMaxGap);

struct GCPResult {
  std::string name;
  double timestamp = 0.0;
  int sequence = 0;
  bool covered = false;
  std::optional<double> error;  // meters, covered only
  int score = 0;
  std::string reason;  // why uncovered
};

struct EvaluationReport {
  std::vector<GCPResult> gcps;
  double sequenceScore = 0.0;
  double rmseAte = 0.0;
  double gcpCoverage = 0.0;
  double multiplier = 100.0;
  RigidTransformd alignment;  // surveyed <- submission world
};

/// Scores rows (covered ones carry their aligned residual, uncovered ones get
/// 0 points) and fills sequence score, RMSE over covered rows and coverage.
EvaluationReport assembleReport(std::vector<GCPResult> rows, const ScoreBrackets& brackets, double multiplier);

EvaluationReport evaluateSequence(const Trajectory& traj, std::span<const GCPObservation> obs,
                                  const CalibrationSet& calib, std::span<const GroundControlPoint> gcps,
                                  const ScoreBrackets& brackets = ScoreBrackets::challengeDefault(),
                                  double multiplier = 100.0, double maxGap = kDefaultMaxGap);

/// How sessions sharing one frame are brought onto the survey.
enum class MultiSessionAlignment {
  /// One rigid alignment estimated from the first session's GCPs and applied
  /// to every session; cross-session registration errors are fully scored.
  ReferenceSession,
  /// One rigid alignment over all sessions' GCPs jointly.
  Joint,
};

EvaluationReport evaluateMultiSession(std::span<const Trajectory> trajs,
                                      std::span<const std::vector<GCPObservation>> obsPerTraj,
                                      const CalibrationSet& calib, std::span<const GroundControlPoint> gcps,
                                      const ScoreBrackets& brackets = ScoreBrackets::challengeDefault(),
                                      double multiplier = 100.0, double maxGap = kDefaultMaxGap,
                                      MultiSessionAlignment mode = MultiSessionAlignment::ReferenceSession);

/// Total challenge score: sum of sequence scores, listed in name order.
struct ChallengeSummary {
  std::vector<std::pair<std::string, double>> sequences;
  double total = 0.0;
};
ChallengeSummary aggregateScores(const std::map<std::string, EvaluationReport>& reports);

struct RayleighFit {
  double sigma = 0.0;
  bool degenerate = false;
  std::size_t sampleCount = 0;

  /// Radius containing fraction p of the mass: sigma * sqrt(-2 ln(1 - p)).
  [[nodiscard]] double quantile(double p) const;
  [[nodiscard]] double pdf(double x) const;
};

/// Maximum-likelihood Rayleigh scale sqrt(sum e^2 / (2 n)). All-zero input
/// gives sigma 0 with the degenerate flag set.
RayleighFit rayleighFit(std::span<const double> errors);

}  // namespace gcpbench

#endif  // GCPBENCH_EVALUATION_HPP
