#pragma once

#include "puregaze/common.hpp"

namespace puregaze {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Gaze direction as (pitch, yaw) in radians.
/// pitch in [-pi/2, pi/2], yaw in [-pi, pi].
struct GazeLabel {
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Gaze direction as a 3D unit vector in normalized camera space.
/// Convention (pinned for reproducibility; train and eval must share it):
///   x = -cos(pitch) * sin(yaw)
///   y = -sin(pitch)
///   z = -cos(pitch) * cos(yaw)
/// so (0, 0) looks down the negative z axis and positive pitch points the
/// vector downward in y.
struct GazeVector {
  double x = 0.0;
  double y = 0.0;
  double z = -1.0;
};

GazeVector pitchyaw_to_vector(const GazeLabel& label);

/// Inverse of pitchyaw_to_vector. Accepts any nonzero vector and normalizes.
GazeLabel vector_to_pitchyaw(const GazeVector& v);

/// Angle between two gaze vectors in degrees, in [0, 180]. Both inputs are
/// renormalized, so the result is invariant to positive rescaling. The dot
/// product is clamped to [-1, 1] before acos.
double angular_error_deg(const GazeVector& a, const GazeVector& b);

/// Angular error between two (pitch, yaw) labels, through the vector form.
double angular_error_deg(const GazeLabel& a, const GazeLabel& b);

double deg_to_rad(double d);
double rad_to_deg(double r);

}  // namespace puregaze
