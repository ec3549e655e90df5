#ifndef GCPBENCH_GEOMETRY_HPP
#define GCPBENCH_GEOMETRY_HPP

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gcpbench/error.hpp"

namespace gcpbench {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Point3 = Eigen::Vector3d;
using PlanePoint = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Rigid transforms
// ---------------------------------------------------------------------------

/// Proper rigid motion x -> R x + t with R stored as a unit quaternion.
template <typename Scalar>
class RigidTransform {
 public:
  using Quaternion = Eigen::Quaternion<Scalar>;
  using Vector = Vector3<Scalar>;
  using Matrix = Eigen::Matrix<Scalar, 3, 3>;

  RigidTransform() : rotation_(Quaternion::Identity()), translation_(Vector::Zero()) {}

  /// Normalizes `rotation`; a zero or non-finite quaternion is rejected.
  RigidTransform(const Quaternion& rotation, const Vector& translation)
      : rotation_(rotation), translation_(translation) {
    const Scalar n = rotation_.norm();
    if (!(n > Scalar(0)) || !std::isfinite(static_cast<double>(n))) {
      throw Error(ErrorCode::DegenerateInput, "rotation quaternion has zero or non-finite norm");
    }
    rotation_.coeffs() /= n;
    if (!translation_.allFinite()) {
      throw Error(ErrorCode::DegenerateInput, "translation is not finite");
    }
  }

  RigidTransform(const Matrix& rotation, const Vector& translation)
      : RigidTransform(Quaternion(rotation), translation) {}

  static RigidTransform Identity() { return RigidTransform(); }

  static RigidTransform fromTranslation(const Vector& t) {
    return RigidTransform(Quaternion::Identity(), t);
  }

  static RigidTransform fromAxisAngle(const Vector& axis, Scalar angle,
                                      const Vector& t = Vector::Zero()) {
    return RigidTransform(Quaternion(Eigen::AngleAxis<Scalar>(angle, axis.normalized())), t);
  }

  [[nodiscard]] const Quaternion& rotation() const { return rotation_; }
  [[nodiscard]] const Vector& translation() const { return translation_; }
  [[nodiscard]] Matrix rotationMatrix() const { return rotation_.toRotationMatrix(); }

  [[nodiscard]] RigidTransform inverse() const {
    const Quaternion inv = rotation_.conjugate();
    return RigidTransform(inv, -(inv * translation_));
  }

  [[nodiscard]] Vector operator*(const Vector& p) const { return rotation_ * p + translation_; }

  [[nodiscard]] RigidTransform operator*(const RigidTransform& rhs) const {
    return RigidTransform(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_);
  }

  [[nodiscard]] std::vector<Vector> apply(std::span<const Vector> points) const {
    std::vector<Vector> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back((*this) * p);
    return out;
  }

  template <typename NewScalar>
  [[nodiscard]] RigidTransform<NewScalar> cast() const {
    return RigidTransform<NewScalar>(rotation_.template cast<NewScalar>(),
                                     translation_.template cast<NewScalar>());
  }

 private:
  Quaternion rotation_;
  Vector translation_;
};

using RigidTransformd = RigidTransform<double>;

// ---------------------------------------------------------------------------
// Planes
// ---------------------------------------------------------------------------

/// Plane {x : normal . x = offset} with a right-handed in-plane basis
/// (basisU x basisV = normal). In-plane coordinates are measured from the foot
/// of the frame origin, offset * normal.
template <typename Scalar>
struct Plane {
  using Vector = Vector3<Scalar>;
  using PlaneCoords = Vector2<Scalar>;

  Vector normal = Vector::UnitZ();
  Scalar offset = Scalar(0);
  Vector basisU = Vector::UnitX();
  Vector basisV = Vector::UnitY();

  /// Builds the plane and its basis. basisU is the frame x-axis projected onto
  /// the plane (y-axis when the normal is close to x).
  static Plane fromNormalOffset(const Vector& normal, Scalar offset) {
    const Scalar n = normal.norm();
    if (!(n > Scalar(0))) throw Error(ErrorCode::DegenerateInput, "plane normal has zero length");
    Plane plane;
    plane.normal = normal / n;
    plane.offset = offset / n;
    const Vector ref = std::abs(plane.normal.x()) < Scalar(0.9) ? Vector::UnitX() : Vector::UnitY();
    plane.basisU = (ref - ref.dot(plane.normal) * plane.normal).normalized();
    plane.basisV = plane.normal.cross(plane.basisU);
    return plane;
  }

  static Plane fromPointNormal(const Vector& point, const Vector& normal) {
    const Vector n = normal.normalized();
    return fromNormalOffset(n, n.dot(point));
  }

  [[nodiscard]] Vector origin() const { return offset * normal; }
  [[nodiscard]] Scalar signedDistance(const Vector& p) const { return normal.dot(p) - offset; }
  [[nodiscard]] Vector closestPoint(const Vector& p) const { return p - signedDistance(p) * normal; }

  [[nodiscard]] PlaneCoords project(const Vector& p) const {
    const Vector d = p - origin();
    return PlaneCoords(basisU.dot(d), basisV.dot(d));
  }

  [[nodiscard]] Vector lift(const PlaneCoords& uv) const {
    return origin() + uv.x() * basisU + uv.y() * basisV;
  }

  /// Maps plane coordinates (u, v, height) to the ambient frame.
  [[nodiscard]] RigidTransform<Scalar> toAmbient() const {
    Eigen::Matrix<Scalar, 3, 3> r;
    r.col(0) = basisU;
    r.col(1) = basisV;
    r.col(2) = normal;
    return RigidTransform<Scalar>(r, origin());
  }

  /// Re-expresses the plane after a rigid motion of the ambient frame.
  [[nodiscard]] Plane transformed(const RigidTransform<Scalar>& t) const {
    const Vector n = t.rotation() * normal;
    return fromNormalOffset(n, n.dot(t * origin()));
  }
};

using Planed = Plane<double>;

template <typename Scalar>
struct PlaneFit {
  Plane<Scalar> plane;
  Scalar rmsResidual = Scalar(0);
  std::size_t inlierCount = 0;
};

struct PlaneFitOptions {
  bool robust = false;
  int ransacIters = 200;
  double inlierDist = 0.05;
  std::uint64_t seed = 0;
};

namespace detail {

template <typename Scalar>
PlaneFit<Scalar> totalLeastSquaresPlane(std::span<const Vector3<Scalar>> points,
                                        const std::vector<std::size_t>* subset) {
  using Vector = Vector3<Scalar>;
  const std::size_t n = subset ? subset->size() : points.size();
  if (n < 3) throw Error(ErrorCode::DegenerateInput, "plane fit needs at least 3 points");
  auto at = [&](std::size_t i) -> const Vector& { return subset ? points[(*subset)[i]] : points[i]; };

  Vector centroid = Vector::Zero();
  for (std::size_t i = 0; i < n; ++i) centroid += at(i);
  centroid /= Scalar(n);

  Eigen::Matrix<Scalar, 3, 3> cov = Eigen::Matrix<Scalar, 3, 3>::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector d = at(i) - centroid;
    cov.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 3, 3>> eig(cov);
  const auto& ev = eig.eigenvalues();  // ascending
  if (!(ev(2) > Scalar(0)) || ev(1) <= ev(2) * Scalar(1e-12)) {
    throw Error(ErrorCode::DegenerateInput, "points are coincident or collinear");
  }
  Vector normal = eig.eigenvectors().col(0).normalized();
  // Orient toward the frame origin (the scanner).
  if (normal.dot(-centroid) < Scalar(0)) normal = -normal;

  PlaneFit<Scalar> fit;
  fit.plane = Plane<Scalar>::fromNormalOffset(normal, normal.dot(centroid));
  Scalar ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar d = fit.plane.signedDistance(at(i));
    ss += d * d;
  }
  fit.rmsResidual = std::sqrt(ss / Scalar(n));
  fit.inlierCount = n;
  return fit;
}

}  // namespace detail

/// Total least-squares plane through `points`, optionally preceded by a RANSAC
/// consensus stage. The normal points toward the frame origin.
template <typename Scalar>
PlaneFit<Scalar> fitPlane(std::span<const Vector3<Scalar>> points, const PlaneFitOptions& options = {}) {
  using Vector = Vector3<Scalar>;
  if (points.size() < 3) throw Error(ErrorCode::DegenerateInput, "plane fit needs at least 3 points");
  if (!options.robust) return detail::totalLeastSquaresPlane<Scalar>(points, nullptr);

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  const Scalar tol = Scalar(options.inlierDist);
  std::size_t bestCount = 0;
  Vector bestNormal = Vector::Zero();
  Scalar bestOffset = 0;
  for (int iter = 0; iter < options.ransacIters; ++iter) {
    const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == b || b == c || a == c) continue;
    const Vector n = (points[b] - points[a]).cross(points[c] - points[a]);
    const Scalar len = n.norm();
    if (!(len > Scalar(1e-12))) continue;
    const Vector unit = n / len;
    const Scalar off = unit.dot(points[a]);
    std::size_t count = 0;
    for (const auto& p : points) {
      if (std::abs(unit.dot(p) - off) <= tol) ++count;
    }
    if (count > bestCount) {
      bestCount = count;
      bestNormal = unit;
      bestOffset = off;
    }
  }
  if (Scalar(bestCount) < Scalar(0.5) * Scalar(points.size())) {
    throw Error(ErrorCode::NoConsensus, "RANSAC inlier ratio below 50%");
  }
  std::vector<std::size_t> inliers;
  inliers.reserve(bestCount);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(bestNormal.dot(points[i]) - bestOffset) <= tol) inliers.push_back(i);
  }
  return detail::totalLeastSquaresPlane<Scalar>(points, &inliers);
}

template <typename Scalar>
struct PlaneProjection {
  Vector2<Scalar> uv;
  std::size_t originalIndex = 0;
};

/// Orthogonal projection of each point, in the plane's (u, v) basis.
template <typename Scalar>
std::vector<PlaneProjection<Scalar>> projectToPlane(const Plane<Scalar>& plane,
                                                    std::span<const Vector3<Scalar>> points) {
  std::vector<PlaneProjection<Scalar>> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out.push_back({plane.project(points[i]), i});
  return out;
}

template <typename Scalar>
Vector3<Scalar> liftFromPlane(const Plane<Scalar>& plane, const Vector2<Scalar>& uv) {
  return plane.lift(uv);
}

// ---------------------------------------------------------------------------
// Point-set alignment
// ---------------------------------------------------------------------------

/// Least-squares rigid transform T minimizing sum |target_i - T source_i|^2
/// (Kabsch with proper-rotation correction; no scale).
template <typename Scalar>
RigidTransform<Scalar> kabschAlign(std::span<const Vector3<Scalar>> source,
                                   std::span<const Vector3<Scalar>> target) {
  using Vector = Vector3<Scalar>;
  using Matrix = Eigen::Matrix<Scalar, 3, 3>;
  if (source.size() != target.size()) {
    throw Error(ErrorCode::DegenerateInput, "source and target sizes differ");
  }
  const std::size_t n = source.size();
  if (n < 3) throw Error(ErrorCode::DegenerateInput, "alignment needs at least 3 correspondences");

  Vector cs = Vector::Zero(), ct = Vector::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cs += source[i];
    ct += target[i];
  }
  cs /= Scalar(n);
  ct /= Scalar(n);

  Matrix h = Matrix::Zero();
  Matrix spread = Matrix::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector s = source[i] - cs;
    h.noalias() += s * (target[i] - ct).transpose();
    spread.noalias() += s * s.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> spreadEig(spread, Eigen::EigenvaluesOnly);
  const auto& sv = spreadEig.eigenvalues();
  if (!(sv(2) > Scalar(0)) || sv(1) <= sv(2) * Scalar(1e-12)) {
    throw Error(ErrorCode::DegenerateInput, "source points are coincident or collinear");
  }

  Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  Matrix d = Matrix::Identity();
  if ((v * u.transpose()).determinant() < Scalar(0)) d(2, 2) = Scalar(-1);
  const Matrix r = v * d * u.transpose();
  return RigidTransform<Scalar>(r, ct - r * cs);
}

/// e_i = |surveyed_i - T estimated_i| with T = kabschAlign(estimated, surveyed).
template <typename Scalar>
std::vector<Scalar> alignmentResiduals(std::span<const Vector3<Scalar>> surveyed,
                                       std::span<const Vector3<Scalar>> estimated,
                                       RigidTransform<Scalar>* alignment = nullptr) {
  const RigidTransform<Scalar> t = kabschAlign(estimated, surveyed);
  std::vector<Scalar> e;
  e.reserve(surveyed.size());
  for (std::size_t i = 0; i < surveyed.size(); ++i) e.push_back((surveyed[i] - t * estimated[i]).norm());
  if (alignment) *alignment = t;
  return e;
}

// std::vector overloads so call sites need not spell the span type.
template <typename Scalar>
PlaneFit<Scalar> fitPlane(const std::vector<Vector3<Scalar>>& points, const PlaneFitOptions& options = {}) {
  return fitPlane(std::span<const Vector3<Scalar>>(points), options);
}
template <typename Scalar>
std::vector<PlaneProjection<Scalar>> projectToPlane(const Plane<Scalar>& plane,
                                                    const std::vector<Vector3<Scalar>>& points) {
  return projectToPlane(plane, std::span<const Vector3<Scalar>>(points));
}
template <typename Scalar>
RigidTransform<Scalar> kabschAlign(const std::vector<Vector3<Scalar>>& source,
                                   const std::vector<Vector3<Scalar>>& target) {
  return kabschAlign(std::span<const Vector3<Scalar>>(source), std::span<const Vector3<Scalar>>(target));
}
template <typename Scalar>
std::vector<Scalar> alignmentResiduals(const std::vector<Vector3<Scalar>>& surveyed,
                                       const std::vector<Vector3<Scalar>>& estimated,
                                       RigidTransform<Scalar>* alignment = nullptr) {
  return alignmentResiduals(std::span<const Vector3<Scalar>>(surveyed),
                            std::span<const Vector3<Scalar>>(estimated), alignment);
}

}  // namespace gcpbench

#endif  // GCPBENCH_GEOMETRY_HPP
