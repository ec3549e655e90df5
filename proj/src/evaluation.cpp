#include "gcpbench/evaluation.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace gcpbench {

ScoreBrackets ScoreBrackets::challengeDefault() {
  ScoreBrackets b;
  b.brackets = {{0.005, 20}, {0.01, 10}, {0.03, 6}, {0.06, 5},
                {0.1, 3},    {0.4, 1},   {std::numeric_limits<double>::infinity(), 0}};
  b.maxPointsPerGCP = 20;
  return b;
}

void ScoreBrackets::validate() const {
  if (brackets.empty()) throw Error(ErrorCode::InvalidConfig, "no score brackets");
  for (std::size_t i = 1; i < brackets.size(); ++i) {
    if (!(brackets[i].upperBound > brackets[i - 1].upperBound) || !(brackets[i].points < brackets[i - 1].points)) {
      throw Error(ErrorCode::InvalidConfig, "bracket bounds must increase and points decrease");
    }
  }
  if (!std::isinf(brackets.back().upperBound) || brackets.back().points != 0) {
    throw Error(ErrorCode::InvalidConfig, "last bracket must be open-ended with 0 points");
  }
  if (maxPointsPerGCP <= 0 || brackets.front().points > maxPointsPerGCP) {
    throw Error(ErrorCode::InvalidConfig, "maxPointsPerGCP must bound the bracket points");
  }
}

int scoreError(double error, const ScoreBrackets& brackets) {
  if (!(error >= 0.0)) throw Error(ErrorCode::DegenerateInput, "error must be >= 0");
  for (const auto& b : brackets.brackets) {
    if (error < b.upperBound) return b.points;
  }
  return 0;
}

double sequenceScore(std::span<const int> scores, double multiplier, int maxPointsPerGCP) {
  if (scores.empty()) throw Error(ErrorCode::EmptySequence, "no GCPs evaluated");
  const double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
  return sum / (static_cast<double>(maxPointsPerGCP) * static_cast<double>(scores.size())) * multiplier;
}

double siteMultiplier(int site) {
  if (site < 1 || site > 3) throw Error(ErrorCode::InvalidConfig, "site must be 1, 2 or 3");
  return site == 3 ? 200.0 : 100.0;
}

GCPEstimates estimatedGCPPositions(const Trajectory& traj, std::span<const GCPObservation> obs,
                                   const CalibrationSet& calib, double maxGap) {
  GCPEstimates out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const GCPObservation& o = obs[i];
    const auto it = calib.find(o.sensorFrame);
    if (it == calib.end()) {
      throw Error(ErrorCode::MissingFrame, "no extrinsic for sensor frame '" + o.sensorFrame + "'");
    }
    try {
      const RigidTransformd worldFromBody = interpolatePose(traj, o.timestamp, maxGap);
      out.covered.push_back({i, o.gcpName, o.timestamp, worldFromBody * (it->second * o.pointInSensorFrame)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfRange && e.code() != ErrorCode::GapTooLarge) throw;
      out.uncovered.push_back({i, o.gcpName, o.timestamp, std::string(errorCodeName(e.code()))});
    }
  }
  return out;
}

EvaluationReport assembleReport(std::vector<GCPResult> rows, const ScoreBrackets& brackets, double multiplier) {
  brackets.validate();
  EvaluationReport report;
  report.multiplier = multiplier;
  std::vector<int> scores;
  scores.reserve(rows.size());
  double sumSq = 0.0;
  std::size_t covered = 0;
  for (auto& row : rows) {
    if (row.covered && row.error) {
      row.score = scoreError(*row.error, brackets);
      sumSq += *row.error * *row.error;
      ++covered;
    } else {
      row.covered = false;
      row.score = 0;
    }
    scores.push_back(row.score);
  }
  report.sequenceScore = sequenceScore(scores, multiplier, brackets.maxPointsPerGCP);
  report.rmseAte = covered ? std::sqrt(sumSq / static_cast<double>(covered)) : 0.0;
  report.gcpCoverage = static_cast<double>(covered) / static_cast<double>(rows.size());
  report.gcps = std::move(rows);
  return report;
}

namespace {

using SurveyIndex = std::unordered_map<std::string, Point3>;

SurveyIndex indexSurvey(std::span<const GroundControlPoint> gcps) {
  SurveyIndex index;
  for (const auto& g : gcps) {
    if (!index.emplace(g.name, g.surveyedPosition).second) {
      throw Error(ErrorCode::InvalidConfig, "duplicate GCP name '" + g.name + "'");
    }
  }
  return index;
}

const Point3& surveyed(const SurveyIndex& index, const std::string& name) {
  const auto it = index.find(name);
  if (it == index.end()) throw Error(ErrorCode::UnknownGCP, "observation of unsurveyed GCP '" + name + "'");
  return it->second;
}

// Rows for one session plus the covered (surveyed, estimated) pairs; row
// indices of covered entries are returned in `coveredRows`.
struct SessionRows {
  std::vector<GCPResult> rows;
  std::vector<std::size_t> coveredRows;
  std::vector<Point3> surveyedPts;
  std::vector<Point3> estimatedPts;
};

void appendSession(SessionRows& acc, int sequence, const Trajectory& traj, std::span<const GCPObservation> obs,
                   const CalibrationSet& calib, const SurveyIndex& survey, double maxGap) {
  const GCPEstimates est = estimatedGCPPositions(traj, obs, calib, maxGap);
  const std::size_t base = acc.rows.size();
  acc.rows.resize(base + obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    GCPResult& row = acc.rows[base + i];
    row.name = obs[i].gcpName;
    row.timestamp = obs[i].timestamp;
    row.sequence = sequence;
    surveyed(survey, row.name);
  }
  for (const auto& u : est.uncovered) acc.rows[base + u.observationIndex].reason = u.reason;
  for (const auto& c : est.covered) {
    acc.rows[base + c.observationIndex].covered = true;
    acc.coveredRows.push_back(base + c.observationIndex);
    acc.surveyedPts.push_back(surveyed(survey, c.name));
    acc.estimatedPts.push_back(c.position);
  }
}

void applyAlignment(SessionRows& s, const RigidTransformd& t) {
  for (std::size_t k = 0; k < s.coveredRows.size(); ++k) {
    s.rows[s.coveredRows[k]].error = (s.surveyedPts[k] - t * s.estimatedPts[k]).norm();
  }
}

void requireCoverage(std::size_t covered) {
  if (covered < 3) {
    throw Error(ErrorCode::InsufficientCoverage,
                std::to_string(covered) + " covered GCPs, alignment needs at least 3");
  }
}

}  // namespace

EvaluationReport evaluateSequence(const Trajectory& traj, std::span<const GCPObservation> obs,
                                  const CalibrationSet& calib, std::span<const GroundControlPoint> gcps,
                                  const ScoreBrackets& brackets, double multiplier, double maxGap) {
  if (obs.empty()) throw Error(ErrorCode::EmptySequence, "no GCP observations");
  const SurveyIndex survey = indexSurvey(gcps);
  SessionRows s;
  appendSession(s, 0, traj, obs, calib, survey, maxGap);
  requireCoverage(s.coveredRows.size());
  const RigidTransformd t = kabschAlign(s.estimatedPts, s.surveyedPts);
  applyAlignment(s, t);
  EvaluationReport report = assembleReport(std::move(s.rows), brackets, multiplier);
  report.alignment = t;
  return report;
}

EvaluationReport evaluateMultiSession(std::span<const Trajectory> trajs,
                                      std::span<const std::vector<GCPObservation>> obsPerTraj,
                                      const CalibrationSet& calib, std::span<const GroundControlPoint> gcps,
                                      const ScoreBrackets& brackets, double multiplier, double maxGap,
                                      MultiSessionAlignment mode) {
  if (trajs.size() != obsPerTraj.size()) {
    throw Error(ErrorCode::InvalidConfig, "one observation list per trajectory required");
  }
  if (trajs.empty()) throw Error(ErrorCode::EmptySequence, "no sessions");
  const SurveyIndex survey = indexSurvey(gcps);
  SessionRows all;
  std::size_t referenceCovered = 0;
  for (std::size_t j = 0; j < trajs.size(); ++j) {
    appendSession(all, static_cast<int>(j), trajs[j], obsPerTraj[j], calib, survey, maxGap);
    if (j == 0) referenceCovered = all.coveredRows.size();
  }
  if (all.rows.empty()) throw Error(ErrorCode::EmptySequence, "no GCP observations");

  RigidTransformd t;
  if (mode == MultiSessionAlignment::ReferenceSession) {
    requireCoverage(referenceCovered);
    const std::vector<Point3> est(all.estimatedPts.begin(),
                                  all.estimatedPts.begin() + static_cast<std::ptrdiff_t>(referenceCovered));
    const std::vector<Point3> sur(all.surveyedPts.begin(),
                                  all.surveyedPts.begin() + static_cast<std::ptrdiff_t>(referenceCovered));
    t = kabschAlign(est, sur);
  } else {
    requireCoverage(all.coveredRows.size());
    t = kabschAlign(all.estimatedPts, all.surveyedPts);
  }
  applyAlignment(all, t);
  EvaluationReport report = assembleReport(std::move(all.rows), brackets, multiplier);
  report.alignment = t;
  return report;
}

ChallengeSummary aggregateScores(const std::map<std::string, EvaluationReport>& reports) {
  ChallengeSummary summary;
  for (const auto& [name, report] : reports) {
    summary.sequences.emplace_back(name, report.sequenceScore);
    summary.total += report.sequenceScore;
  }
  return summary;
}

double RayleighFit::quantile(double p) const {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorCode::OutOfRange, "quantile level must be in [0, 1)");
  return sigma * std::sqrt(-2.0 * std::log1p(-p));
}

double RayleighFit::pdf(double x) const {
  if (!(sigma > 0.0) || x < 0.0) return 0.0;
  const double s2 = sigma * sigma;
  return x / s2 * std::exp(-0.5 * x * x / s2);
}

RayleighFit rayleighFit(std::span<const double> errors) {
  if (errors.size() < 2) throw Error(ErrorCode::DegenerateInput, "Rayleigh fit needs at least 2 samples");
  double sumSq = 0.0;
  for (double e : errors) {
    if (!(e >= 0.0)) throw Error(ErrorCode::DegenerateInput, "errors must be non-negative");
    sumSq += e * e;
  }
  RayleighFit fit;
  fit.sampleCount = errors.size();
  fit.sigma = std::sqrt(sumSq / (2.0 * static_cast<double>(errors.size())));
  fit.degenerate = !(fit.sigma > 0.0);
  return fit;
}

}  // namespace gcpbench
