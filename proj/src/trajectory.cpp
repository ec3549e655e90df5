#include "gcpbench/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gcpbench {

Trajectory::Trajectory(std::vector<TimedPose> poses, std::string bodyFrame)
    : poses_(std::move(poses)), bodyFrame_(std::move(bodyFrame)) {
  for (std::size_t i = 0; i < poses_.size(); ++i) {
    if (!std::isfinite(poses_[i].timestamp)) {
      throw Error(ErrorCode::DegenerateInput, "non-finite timestamp at pose " + std::to_string(i));
    }
    if (i > 0 && !(poses_[i].timestamp > poses_[i - 1].timestamp)) {
      throw Error(ErrorCode::DegenerateInput,
                  "timestamps not strictly increasing at pose " + std::to_string(i));
    }
  }
}

double Trajectory::startTime() const {
  if (poses_.empty()) throw Error(ErrorCode::OutOfRange, "empty trajectory");
  return poses_.front().timestamp;
}

double Trajectory::endTime() const {
  if (poses_.empty()) throw Error(ErrorCode::OutOfRange, "empty trajectory");
  return poses_.back().timestamp;
}

Trajectory Trajectory::transformed(const RigidTransformd& worldChange) const {
  std::vector<TimedPose> out = poses_;
  for (auto& p : out) p.pose = worldChange * p.pose;
  return Trajectory(std::move(out), bodyFrame_);
}

RigidTransformd interpolatePose(const Trajectory& traj, double t, double maxGap) {
  const auto& poses = traj.poses();
  if (poses.empty()) throw Error(ErrorCode::OutOfRange, "empty trajectory");
  if (t < poses.front().timestamp - kKnotTolerance || t > poses.back().timestamp + kKnotTolerance) {
    throw Error(ErrorCode::OutOfRange, "t=" + std::to_string(t) + " outside trajectory span");
  }
  auto it = std::lower_bound(poses.begin(), poses.end(), t,
                             [](const TimedPose& p, double value) { return p.timestamp < value; });
  // Knot hit on either side of t.
  if (it != poses.end() && std::abs(it->timestamp - t) <= kKnotTolerance) return it->pose;
  if (it != poses.begin() && std::abs(std::prev(it)->timestamp - t) <= kKnotTolerance) {
    return std::prev(it)->pose;
  }
  if (it == poses.end() || it == poses.begin()) {
    throw Error(ErrorCode::OutOfRange, "t=" + std::to_string(t) + " outside trajectory span");
  }
  const TimedPose& a = *std::prev(it);
  const TimedPose& b = *it;
  const double dt = b.timestamp - a.timestamp;
  if (dt > maxGap) {
    throw Error(ErrorCode::GapTooLarge, "bracketing interval " + std::to_string(dt) + " s exceeds " +
                                            std::to_string(maxGap) + " s");
  }
  const double s = (t - a.timestamp) / dt;
  // Eigen's slerp flips the second quaternion when the dot product is
  // negative, so the shorter arc is taken.
  const Eigen::Quaterniond q = a.pose.rotation().slerp(s, b.pose.rotation());
  const Eigen::Vector3d p = (1.0 - s) * a.pose.translation() + s * b.pose.translation();
  return RigidTransformd(q, p);
}

}  // namespace gcpbench
