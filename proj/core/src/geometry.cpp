#include "puregaze/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace puregaze {

double deg_to_rad(double d) { return d * kPi / 180.0; }
double rad_to_deg(double r) { return r * 180.0 / kPi; }

GazeVector pitchyaw_to_vector(const GazeLabel& label) {
  if (!(std::abs(label.pitch) <= kPi / 2) || !(std::abs(label.yaw) <= kPi)) {
    throw DomainError("gaze label out of range: pitch=" + std::to_string(label.pitch) +
                      " yaw=" + std::to_string(label.yaw));
  }
  const double cp = std::cos(label.pitch);
  return GazeVector{-cp * std::sin(label.yaw), -std::sin(label.pitch), -cp * std::cos(label.yaw)};
}

GazeLabel vector_to_pitchyaw(const GazeVector& v) {
  const double norm = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DomainError("cannot convert zero or non-finite vector to pitch/yaw");
  }
  const double sy = std::clamp(-v.y / norm, -1.0, 1.0);
  GazeLabel label;
  label.pitch = std::asin(sy);
  label.yaw = std::atan2(-v.x, -v.z);
  return label;
}

double angular_error_deg(const GazeVector& a, const GazeVector& b) {
  const double na = std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z);
  const double nb = std::sqrt(b.x * b.x + b.y * b.y + b.z * b.z);
  if (!(na > 0.0) || !(nb > 0.0) || !std::isfinite(na) || !std::isfinite(nb)) {
    throw DomainError("angular error undefined for zero or non-finite vectors");
  }
  const double dot = (a.x * b.x + a.y * b.y + a.z * b.z) / (na * nb);
  return rad_to_deg(std::acos(std::clamp(dot, -1.0, 1.0)));
}

double angular_error_deg(const GazeLabel& a, const GazeLabel& b) {
  return angular_error_deg(pitchyaw_to_vector(a), pitchyaw_to_vector(b));
}

}  // namespace puregaze
