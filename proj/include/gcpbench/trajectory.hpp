#ifndef GCPBENCH_TRAJECTORY_HPP
#define GCPBENCH_TRAJECTORY_HPP

#include <string>
#include <vector>

#include "gcpbench/geometry.hpp"

namespace gcpbench {

/// Pose of the body frame in the world frame (world <- body) at `timestamp`.
struct TimedPose {
  double timestamp = 0.0;
  RigidTransformd pose;
};

/// Poses ordered by strictly increasing timestamp.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TimedPose> poses, std::string bodyFrame = "imu");

  [[nodiscard]] const std::vector<TimedPose>& poses() const { return poses_; }
  [[nodiscard]] const std::string& bodyFrame() const { return bodyFrame_; }
  [[nodiscard]] bool empty() const { return poses_.empty(); }
  [[nodiscard]] std::size_t size() const { return poses_.size(); }
  [[nodiscard]] double startTime() const;
  [[nodiscard]] double endTime() const;

  /// Left-multiplies every pose by `worldChange` (re-expresses the world frame).
  [[nodiscard]] Trajectory transformed(const RigidTransformd& worldChange) const;

 private:
  std::vector<TimedPose> poses_;
  std::string bodyFrame_ = "imu";
};

inline constexpr double kDefaultMaxGap = 0.5;
inline constexpr double kKnotTolerance = 1e-9;

/// Pose at time t: exact knot within 1e-9 s, otherwise linear translation and
/// shortest-arc slerp between the bracketing knots.
/// Throws OutOfRange outside the knot span and GapTooLarge when the bracketing
/// interval exceeds maxGap.
RigidTransformd interpolatePose(const Trajectory& traj, double t, double maxGap = kDefaultMaxGap);

}  // namespace gcpbench

#endif  // GCPBENCH_TRAJECTORY_HPP
