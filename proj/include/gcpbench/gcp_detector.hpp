#ifndef GCPBENCH_GCP_DETECTOR_HPP
#define GCPBENCH_GCP_DETECTOR_HPP

#include <optional>
#include <span>
#include <vector>

#include "gcpbench/geometry.hpp"
#include "gcpbench/lidar_sim.hpp"

namespace gcpbench {

/// How ring samples are mapped onto the fitted ground plane before edge
/// localization.
enum class ProjectionMode {
  Orthogonal,  ///< foot point of each sample
  AlongBeam,   ///< intersection of the sample's beam (from the lidar origin) with the plane
};

struct DetectorConfig {
  /// Crop window center as (x, y) in the lidar frame; no hint means the
  /// scans are taken as already cropped.
  std::optional<Eigen::Vector2d> roiCenterHint;
  double roiRadius = 0.25;

  double houghCellSize = 0.002;
  double houghExtent = 0.5;
  double blurSigma = 2.0;  // cells

  double cannySmoothSigma = 2.0;  // samples
  double cannyHighFrac = 0.5;
  double cannyLowFrac = 0.2;
  /// Edges must also reach this fraction of the strongest gradient seen in
  /// any ring of the scan set. Keeps noise-only rings from voting.
  double edgeFloorFrac = 0.2;

  std::vector<double> radii{0.10, 0.15};
  std::optional<double> minVotes;  // default 3 * radii.size()
  /// An (edge, radius) pair supports the detection when its circle passes
  /// within this distance of the center. Default 3 * blurSigma * cellSize.
  std::optional<double> supportTolerance;

  bool subCellRefinement = true;
  bool robustPlane = false;
  PlaneFitOptions planeFit{};
  double maxTiltDeg = 45.0;
  ProjectionMode projection = ProjectionMode::AlongBeam;
  /// Optical center the beams start from, in the frame of the scan points.
  /// Zero for raw lidar-frame scans; set it when points were re-expressed in
  /// another frame.
  Point3 beamOrigin = Point3::Zero();

  void validate() const;
  [[nodiscard]] double effectiveMinVotes() const;
  [[nodiscard]] double effectiveSupportTolerance() const;
};

struct Edge {
  double position = 0.0;  // fractional sample index within the ring
  double azimuth = 0.0;
  PlanePoint uv = PlanePoint::Zero();
  int scan = 0;
  int ring = 0;
};

using EdgeSet = std::vector<Edge>;

/// Dense vote grid over candidate in-plane centers. Cell (row, col) covers
/// u in [origin.u + col * cell, +cell) and v in [origin.v + row * cell, +cell).
class HoughAccumulator {
 public:
  HoughAccumulator() = default;
  HoughAccumulator(const PlanePoint& center, double halfExtent, double cellSize);

  [[nodiscard]] Eigen::Index rows() const { return weights_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return weights_.cols(); }
  [[nodiscard]] double cellSize() const { return cellSize_; }
  [[nodiscard]] const PlanePoint& origin() const { return origin_; }
  [[nodiscard]] const Eigen::MatrixXd& weights() const { return weights_; }
  [[nodiscard]] Eigen::MatrixXd& weights() { return weights_; }
  [[nodiscard]] double total() const { return weights_.sum(); }

  [[nodiscard]] PlanePoint cellCenter(Eigen::Index row, Eigen::Index col) const;
  /// Cell index of uv, which may lie outside the grid.
  [[nodiscard]] Eigen::Vector2i cellOf(const PlanePoint& uv) const;
  [[nodiscard]] bool contains(Eigen::Index row, Eigen::Index col) const {
    return row >= 0 && col >= 0 && row < rows() && col < cols();
  }

  /// Cell-wise sum; both grids must share geometry.
  HoughAccumulator& operator+=(const HoughAccumulator& other);

 private:
  Eigen::MatrixXd weights_;
  PlanePoint origin_ = PlanePoint::Zero();
  double cellSize_ = 0.0;
};

struct DetectionResult {
  Point3 center = Point3::Zero();  // lidar frame
  PlanePoint inPlaneCenter = PlanePoint::Zero();
  double votes = 0.0;       // supporting (edge, radius) pairs
  double peakWeight = 0.0;  // blurred accumulator value at the argmax cell
  Planed plane;
  std::size_t edgeCount = 0;
};

struct HoughPeak {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double weight = 0.0;
  PlanePoint uv = PlanePoint::Zero();
};

/// Keeps samples within roiRadius (horizontal, lidar frame) of the hint.
/// Throws EmptyROI when nothing is left.
std::vector<LidarScan> cropROI(const std::vector<LidarScan>& scans, const DetectorConfig& cfg);

/// 1D Canny on a scalar signal: Gaussian smoothing, central differences,
/// non-maximum suppression and hysteresis relative to the signal's maximum
/// |gradient|. Returns sub-sample edge positions (parabolic peak fit).
std::vector<double> cannyEdges1D(std::span<const double> signal, const DetectorConfig& cfg,
                                 double gradientFloor = 0.0);

/// Largest |gradient| of the smoothed signal.
double maxSmoothedGradient(std::span<const double> signal, const DetectorConfig& cfg);

/// Index runs of a ring that are contiguous in azimuth (handles the 2 pi wrap
/// and gaps left by cropping).
std::vector<std::vector<std::size_t>> contiguousSegments(const Ring& ring);

/// Intensity edges along one ring, mapped into plane coordinates by linear
/// interpolation between the neighbouring samples' (u, v).
EdgeSet detectEdges(const Ring& ring, const Planed& plane, const DetectorConfig& cfg,
                    double gradientFloor = 0.0);

/// Deposits unit weight per (edge, radius), spread evenly over the distinct
/// cells the rasterized circle touches; out-of-grid cells are dropped.
HoughAccumulator& houghVote(HoughAccumulator& acc, std::span<const Edge> edges, std::span<const double> radii);

/// Separable normalized Gaussian with reflected borders; total weight is kept.
HoughAccumulator gaussianBlur(const HoughAccumulator& acc, double sigmaCells);

/// Argmax (lowest row, then column, on ties); optional 3x3 weighted-centroid
/// refinement.
HoughPeak findPeak(const HoughAccumulator& acc, bool refine);

/// Full pipeline: crop, plane fit, projection, per-ring edges, voting, blur,
/// argmax, lift to 3D. `accumulatorOut` receives the blurred grid if set.
DetectionResult detectGCP(const std::vector<LidarScan>& scans, const DetectorConfig& cfg,
                          HoughAccumulator* accumulatorOut = nullptr);

struct GridEvaluation {
  std::vector<double> errors;
  double median = 0.0;
  double max = 0.0;
  double rayleighSigma = 0.0;
  double r95 = 0.0;
  double r997 = 0.0;
  bool degenerate = false;
};

/// Aligns detections onto the surveyed grid and summarizes the residuals.
GridEvaluation evaluateDetectorGrid(const std::vector<Point3>& gridPoints, const std::vector<Point3>& detections);

}  // namespace gcpbench

#endif  // GCPBENCH_GCP_DETECTOR_HPP
