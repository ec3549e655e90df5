#include "gcpbench/gcp_detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gcpbench/evaluation.hpp"

namespace gcpbench {

void DetectorConfig::validate() const {
  if (!(houghCellSize > 0.0)) throw Error(ErrorCode::InvalidConfig, "houghCellSize must be > 0");
  if (!(houghExtent > 0.0)) throw Error(ErrorCode::InvalidConfig, "houghExtent must be > 0");
  if (!(cannyLowFrac > 0.0 && cannyLowFrac < cannyHighFrac && cannyHighFrac <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "need 0 < cannyLowFrac < cannyHighFrac <= 1");
  }
  if (!(edgeFloorFrac >= 0.0 && edgeFloorFrac <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "edgeFloorFrac must be in [0, 1]");
  }
  if (!(cannySmoothSigma >= 0.0) || !(blurSigma >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "smoothing sigmas must be >= 0");
  }
  if (radii.empty()) throw Error(ErrorCode::InvalidConfig, "radii must not be empty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw Error(ErrorCode::InvalidConfig, "radii must be positive and increasing");
    }
  }
  if (roiCenterHint && !(roiRadius >= 0.0)) throw Error(ErrorCode::InvalidConfig, "roiRadius must be >= 0");
  if (!(maxTiltDeg > 0.0 && maxTiltDeg <= 90.0)) throw Error(ErrorCode::InvalidConfig, "maxTiltDeg in (0, 90]");
  if (!beamOrigin.allFinite()) throw Error(ErrorCode::InvalidConfig, "beamOrigin must be finite");
}

double DetectorConfig::effectiveMinVotes() const {
  return minVotes ? *minVotes : 3.0 * static_cast<double>(radii.size());
}

double DetectorConfig::effectiveSupportTolerance() const {
  return supportTolerance ? *supportTolerance : 3.0 * std::max(blurSigma, 1.0) * houghCellSize;
}

// ---------------------------------------------------------------------------
// Accumulator

HoughAccumulator::HoughAccumulator(const PlanePoint& center, double halfExtent, double cellSize)
    : cellSize_(cellSize) {
  if (!(cellSize > 0.0) || !(halfExtent > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "accumulator needs positive cell size and extent");
  }
  const auto n = static_cast<Eigen::Index>(std::ceil(2.0 * halfExtent / cellSize - 1e-9));
  weights_ = Eigen::MatrixXd::Zero(n, n);
  origin_ = center - PlanePoint::Constant(0.5 * static_cast<double>(n) * cellSize);
}

PlanePoint HoughAccumulator::cellCenter(Eigen::Index row, Eigen::Index col) const {
  return origin_ + cellSize_ * PlanePoint(static_cast<double>(col) + 0.5, static_cast<double>(row) + 0.5);
}

Eigen::Vector2i HoughAccumulator::cellOf(const PlanePoint& uv) const {
  const PlanePoint rel = (uv - origin_) / cellSize_;
  return {static_cast<int>(std::floor(rel.y())), static_cast<int>(std::floor(rel.x()))};
}

HoughAccumulator& HoughAccumulator::operator+=(const HoughAccumulator& other) {
  if (other.rows() != rows() || other.cols() != cols() || other.cellSize_ != cellSize_ ||
      other.origin_ != origin_) {
    throw Error(ErrorCode::InvalidConfig, "accumulator geometry mismatch");
  }
  weights_ += other.weights_;
  return *this;
}

// ---------------------------------------------------------------------------
// Cropping

std::vector<LidarScan> cropROI(const std::vector<LidarScan>& scans, const DetectorConfig& cfg) {
  if (!cfg.roiCenterHint) return scans;
  const Eigen::Vector2d hint = *cfg.roiCenterHint;
  const double r2 = cfg.roiRadius * cfg.roiRadius;
  std::vector<LidarScan> out;
  out.reserve(scans.size());
  std::size_t kept = 0;
  for (const auto& scan : scans) {
    LidarScan cropped;
    cropped.revolutionIndex = scan.revolutionIndex;
    cropped.rings.reserve(scan.rings.size());
    for (const auto& ring : scan.rings) {
      Ring r;
      r.ringIndex = ring.ringIndex;
      for (const auto& s : ring.samples) {
        if ((s.point.head<2>() - hint).squaredNorm() <= r2) r.samples.push_back(s);
      }
      kept += r.samples.size();
      cropped.rings.push_back(std::move(r));
    }
    out.push_back(std::move(cropped));
  }
  if (kept == 0 || !(cfg.roiRadius > 0.0)) throw Error(ErrorCode::EmptyROI, "no samples inside the ROI");
  return out;
}

// ---------------------------------------------------------------------------
// 1D Canny

namespace {

std::size_t reflectIndex(std::ptrdiff_t i, std::size_t n) {
  const auto len = static_cast<std::ptrdiff_t>(n);
  if (len == 1) return 0;
  const std::ptrdiff_t period = 2 * len;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < len ? i : period - 1 - i);
}

std::vector<double> gaussianKernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

std::vector<double> smoothedGradient(std::span<const double> signal, double sigma) {
  const std::size_t n = signal.size();
  const std::vector<double> kernel = gaussianKernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<double> smooth(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      acc += kernel[static_cast<std::size_t>(k + radius)] *
             signal[reflectIndex(static_cast<std::ptrdiff_t>(i) + k, n)];
    }
    smooth[i] = acc;
  }
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) grad[i] = 0.5 * (smooth[i + 1] - smooth[i - 1]);
  return grad;
}

}  // namespace

double maxSmoothedGradient(std::span<const double> signal, const DetectorConfig& cfg) {
  if (signal.size() < 5) return 0.0;
  const auto grad = smoothedGradient(signal, cfg.cannySmoothSigma);
  double m = 0.0;
  for (double g : grad) m = std::max(m, std::abs(g));
  return m;
}

std::vector<double> cannyEdges1D(std::span<const double> signal, const DetectorConfig& cfg, double gradientFloor) {
  const std::size_t n = signal.size();
  if (n < 5) return {};
  const auto grad = smoothedGradient(signal, cfg.cannySmoothSigma);
  std::vector<double> mag(n);
  double maxMag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] = std::abs(grad[i]);
    maxMag = std::max(maxMag, mag[i]);
  }
  if (!(maxMag > 1e-12)) return {};
  const double high = std::max(cfg.cannyHighFrac * maxMag, gradientFloor);
  const double low = cfg.cannyLowFrac * maxMag;

  std::vector<double> edges;
  // Hysteresis over runs of |g| >= low: a run is kept when it holds a strong
  // sample, and then every NMS peak inside it is an edge.
  std::size_t i = 1;
  while (i + 1 < n) {
    if (mag[i] < low) {
      ++i;
      continue;
    }
    std::size_t end = i;
    bool strong = false;
    while (end + 1 < n && mag[end] >= low) {
      strong = strong || mag[end] >= high;
      ++end;
    }
    if (strong) {
      for (std::size_t k = i; k < end; ++k) {
        // Strict on the left, non-strict on the right: a two-sample plateau
        // yields its first sample.
        if (!(mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])) continue;
        const double a = mag[k - 1], b = mag[k], c = mag[k + 1];
        const double denom = a - 2.0 * b + c;
        double delta = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
        delta = std::clamp(delta, -0.5, 0.5);
        edges.push_back(static_cast<double>(k) + delta);
      }
    }
    i = end + 1;
  }
  return edges;
}

// ---------------------------------------------------------------------------
// Rings

std::vector<std::vector<std::size_t>> contiguousSegments(const Ring& ring) {
  const auto& s = ring.samples;
  const std::size_t n = s.size();
  std::vector<std::vector<std::size_t>> segments;
  if (n == 0) return segments;
  if (n == 1) return {{0}};

  std::vector<double> steps(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) steps[i] = s[i + 1].azimuth - s[i].azimuth;
  std::vector<double> sorted = steps;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double nominal = std::max(sorted[sorted.size() / 2], 1e-12);
  const double gapLimit = 1.5 * nominal;

  std::vector<std::size_t> breaks;  // a segment starts at each break index
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (steps[i] > gapLimit) breaks.push_back(i + 1);
  }
  const double wrapStep = s.front().azimuth + 2.0 * std::numbers::pi - s.back().azimuth;
  const bool wrapContiguous = wrapStep <= gapLimit;

  if (breaks.empty()) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    segments.push_back(std::move(all));
    return segments;
  }
  // Walk from the first break; when the wrap is contiguous the tail of the
  // ring continues into its head.
  const std::size_t start = wrapContiguous ? breaks.front() : 0;
  std::vector<std::size_t> current;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = (start + k) % n;
    const bool isBreak = std::binary_search(breaks.begin(), breaks.end(), idx) ||
                         (!wrapContiguous && idx == 0);
    if (isBreak && !current.empty()) {
      segments.push_back(std::move(current));
      current.clear();
    }
    current.push_back(idx);
  }
  if (!current.empty()) segments.push_back(std::move(current));
  return segments;
}

namespace {

PlanePoint sampleOnPlane(const RingSample& s, const Planed& plane, const DetectorConfig& cfg) {
  if (cfg.projection == ProjectionMode::AlongBeam) {
    const Point3 beam = s.point - cfg.beamOrigin;
    const double along = plane.normal.dot(beam);
    if (std::abs(along) > 1e-12) {
      const double scale = (plane.offset - plane.normal.dot(cfg.beamOrigin)) / along;
      if (scale > 0.0) return plane.project(cfg.beamOrigin + beam * scale);
    }
  }
  return plane.project(s.point);
}

}  // namespace

EdgeSet detectEdges(const Ring& ring, const Planed& plane, const DetectorConfig& cfg, double gradientFloor) {
  EdgeSet edges;
  for (const auto& segment : contiguousSegments(ring)) {
    if (segment.size() < 5) continue;
    std::vector<double> intensity(segment.size());
    std::vector<PlanePoint> uv(segment.size());
    std::vector<double> azimuth(segment.size());
    for (std::size_t i = 0; i < segment.size(); ++i) {
      const RingSample& s = ring.samples[segment[i]];
      intensity[i] = s.intensity;
      uv[i] = sampleOnPlane(s, plane, cfg);
      azimuth[i] = s.azimuth;
    }
    // Azimuths restart after the 2 pi wrap inside a joined segment.
    for (std::size_t i = 1; i < azimuth.size(); ++i) {
      while (azimuth[i] < azimuth[i - 1]) azimuth[i] += 2.0 * std::numbers::pi;
    }
    for (double pos : cannyEdges1D(intensity, cfg, gradientFloor)) {
      const auto lo = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(uv.size() - 2)));
      const double f = pos - static_cast<double>(lo);
      Edge e;
      e.position = static_cast<double>(segment[lo]) + f;
      e.azimuth = std::fmod((1.0 - f) * azimuth[lo] + f * azimuth[lo + 1], 2.0 * std::numbers::pi);
      e.uv = (1.0 - f) * uv[lo] + f * uv[lo + 1];
      e.ring = ring.ringIndex;
      edges.push_back(e);
    }
  }
  return edges;
}

// ---------------------------------------------------------------------------
// Voting

HoughAccumulator& houghVote(HoughAccumulator& acc, std::span<const Edge> edges, std::span<const double> radii) {
  const double cell = acc.cellSize();
  std::vector<std::pair<int, int>> cells;
  for (const double r : radii) {
    const auto steps = static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / (0.5 * cell)));
    std::vector<PlanePoint> offsets(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
      const double a = 2.0 * std::numbers::pi * k / steps;
      offsets[static_cast<std::size_t>(k)] = PlanePoint(r * std::cos(a), r * std::sin(a));
    }
    for (const Edge& e : edges) {
      cells.clear();
      for (const auto& o : offsets) {
        const Eigen::Vector2i c = acc.cellOf(e.uv + o);
        cells.emplace_back(c.x(), c.y());
      }
      std::sort(cells.begin(), cells.end());
      cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
      const double w = 1.0 / static_cast<double>(cells.size());
      for (const auto& [row, col] : cells) {
        if (acc.contains(row, col)) acc.weights()(row, col) += w;
      }
    }
  }
  return acc;
}

HoughAccumulator gaussianBlur(const HoughAccumulator& acc, double sigmaCells) {
  HoughAccumulator out = acc;
  if (!(sigmaCells > 0.0) || acc.rows() == 0) return out;
  const std::vector<double> kernel = gaussianKernel(sigmaCells);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const Eigen::MatrixXd& in = acc.weights();
  const auto rows = static_cast<std::size_t>(in.rows());
  const auto cols = static_cast<std::size_t>(in.cols());

  // Scatter form: every source cell hands out its whole weight, reflected
  // at the borders, so the total is preserved.
  Eigen::MatrixXd tmp = Eigen::MatrixXd::Zero(in.rows(), in.cols());
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double w = in(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      if (w == 0.0) continue;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const std::size_t rr = reflectIndex(static_cast<std::ptrdiff_t>(r) + k, rows);
        tmp(static_cast<Eigen::Index>(rr), static_cast<Eigen::Index>(c)) +=
            w * kernel[static_cast<std::size_t>(k + radius)];
      }
    }
  }
  Eigen::MatrixXd& res = out.weights();
  res.setZero();
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double w = tmp(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      if (w == 0.0) continue;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const std::size_t cc = reflectIndex(static_cast<std::ptrdiff_t>(c) + k, cols);
        res(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cc)) +=
            w * kernel[static_cast<std::size_t>(k + radius)];
      }
    }
  }
  return out;
}

HoughPeak findPeak(const HoughAccumulator& acc, bool refine) {
  const Eigen::MatrixXd& w = acc.weights();
  HoughPeak peak;
  peak.weight = -1.0;
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      if (w(r, c) > peak.weight) {
        peak.weight = w(r, c);
        peak.row = r;
        peak.col = c;
      }
    }
  }
  peak.uv = acc.cellCenter(peak.row, peak.col);
  if (!refine || !(peak.weight > 0.0)) return peak;
  PlanePoint sum = PlanePoint::Zero();
  double mass = 0.0;
  for (Eigen::Index dr = -1; dr <= 1; ++dr) {
    for (Eigen::Index dc = -1; dc <= 1; ++dc) {
      const Eigen::Index r = peak.row + dr, c = peak.col + dc;
      if (!acc.contains(r, c)) continue;
      sum += w(r, c) * acc.cellCenter(r, c);
      mass += w(r, c);
    }
  }
  peak.uv = sum / mass;
  return peak;
}

// ---------------------------------------------------------------------------
// Pipeline

DetectionResult detectGCP(const std::vector<LidarScan>& scans, const DetectorConfig& cfg,
                          HoughAccumulator* accumulatorOut) {
  cfg.validate();
  if (scans.empty()) throw Error(ErrorCode::DegenerateInput, "no scans");
  const std::vector<LidarScan> cropped = cropROI(scans, cfg);
  const std::vector<Point3> points = collectPoints(cropped);
  if (points.empty()) throw Error(ErrorCode::EmptyROI, "scans contain no samples");

  PlaneFitOptions fitOptions = cfg.planeFit;
  fitOptions.robust = cfg.robustPlane;
  const PlaneFit<double> fit = fitPlane(points, fitOptions);
  const double tilt = std::acos(std::min(1.0, std::abs(fit.plane.normal.z()))) * 180.0 / std::numbers::pi;
  if (tilt > cfg.maxTiltDeg) {
    throw Error(ErrorCode::DegenerateInput,
                "fitted plane is tilted " + std::to_string(tilt) + " deg from the scanner up-axis");
  }
  const Planed& plane = fit.plane;

  double globalMax = 0.0;
  for (const auto& scan : cropped) {
    for (const auto& ring : scan.rings) {
      for (const auto& segment : contiguousSegments(ring)) {
        std::vector<double> intensity(segment.size());
        for (std::size_t i = 0; i < segment.size(); ++i) intensity[i] = ring.samples[segment[i]].intensity;
        globalMax = std::max(globalMax, maxSmoothedGradient(intensity, cfg));
      }
    }
  }
  const double floor = cfg.edgeFloorFrac * globalMax;

  Point3 centroid = Point3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  HoughAccumulator acc(plane.project(centroid), cfg.houghExtent, cfg.houghCellSize);

  EdgeSet allEdges;
  for (std::size_t si = 0; si < cropped.size(); ++si) {
    EdgeSet scanEdges;
    for (const auto& ring : cropped[si].rings) {
      EdgeSet ringEdges = detectEdges(ring, plane, cfg, floor);
      for (auto& e : ringEdges) e.scan = static_cast<int>(si);
      scanEdges.insert(scanEdges.end(), ringEdges.begin(), ringEdges.end());
    }
    houghVote(acc, scanEdges, cfg.radii);
    allEdges.insert(allEdges.end(), scanEdges.begin(), scanEdges.end());
  }
  if (allEdges.empty()) throw Error(ErrorCode::NoDetection, "no intensity edges found");

  const HoughAccumulator blurred = gaussianBlur(acc, cfg.blurSigma);
  const HoughPeak peak = findPeak(blurred, cfg.subCellRefinement);
  if (accumulatorOut) *accumulatorOut = blurred;

  DetectionResult result;
  result.inPlaneCenter = peak.uv;
  result.center = plane.lift(peak.uv);
  result.plane = plane;
  result.peakWeight = peak.weight;
  result.edgeCount = allEdges.size();
  const double tol = cfg.effectiveSupportTolerance();
  for (const Edge& e : allEdges) {
    const double d = (e.uv - peak.uv).norm();
    for (double r : cfg.radii) {
      if (std::abs(d - r) <= tol) result.votes += 1.0;
    }
  }
  if (result.votes < cfg.effectiveMinVotes()) {
    throw Error(ErrorCode::NoDetection, "peak supported by " + std::to_string(result.votes) +
                                            " votes, need " + std::to_string(cfg.effectiveMinVotes()));
  }
  return result;
}

GridEvaluation evaluateDetectorGrid(const std::vector<Point3>& gridPoints, const std::vector<Point3>& detections) {
  GridEvaluation out;
  out.errors = alignmentResiduals(gridPoints, detections);
  std::vector<double> sorted = out.errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  out.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  out.max = sorted.back();
  const RayleighFit fit = rayleighFit(out.errors);
  out.rayleighSigma = fit.sigma;
  out.r95 = fit.quantile(0.95);
  out.r997 = fit.quantile(0.997);
  out.degenerate = fit.degenerate;
  return out;
}

}  // namespace gcpbench
