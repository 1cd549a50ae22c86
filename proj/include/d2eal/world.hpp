// Discrete-time 3-DOF kinematics and the pursuit / avoidance / heading laws.

#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "d2eal/flags.hpp"
#include "d2eal/geometry.hpp"

namespace d2eal::world {

/// Wrap to (-pi, pi].
[[nodiscard]] double wrap_angle(double angle) noexcept;

/// Body-to-global rotation for a heading.
[[nodiscard]] Mat2 rotation(double heading) noexcept;

struct Pose {
    Vec2 position;
    double heading{0};  ///< radians, kept in (-pi, pi]
};

struct ControlInput {
    Vec2 body_velocity;  ///< m/s, body frame
    double yaw_rate{0};  ///< rad/s
};

struct ControlParams {
    double k1{1.0};
    double k2{2.0};
    double k3{2.0};
    double standoff{5.0};  ///< d_S, metres
    double v_max{20.0};
    double w_max{2.0};

    /// Throws ConfigError unless every field is strictly positive and finite.
    void validate() const;
};

inline constexpr unsigned kDegenerateDirection = kFlagDegenerateDirection;
inline constexpr unsigned kCoincidentRobots = kFlagCoincidentRobots;

inline constexpr double kDirectionEpsilon = 1e-9;
inline constexpr double kCollisionEpsilon = 1e-6;

struct VectorCommand {
    Vec2 value;
    unsigned flags{0};
};

struct YawCommand {
    double value{0};
    unsigned flags{0};
};

[[nodiscard]] Pose step_kinematics(const Pose& pose, const ControlInput& u, double dt);

/// Reference velocity (body frame) that chases the predicted target while
/// regulating the current range towards the standoff distance.
[[nodiscard]] VectorCommand chase_command(const Pose& robot, const Vec2& target_now,
                                          const Vec2& predicted_target, const ControlParams& params);

/// Repulsion (body frame) from the nearest other robot; ties go to the lowest index.
[[nodiscard]] VectorCommand collision_avoidance(std::size_t robot_index, std::span<const Vec2> positions,
                                                double heading, const ControlParams& params);

[[nodiscard]] YawCommand heading_command(const Pose& robot, const Vec2& predicted_target,
                                         const ControlParams& params);

/// Per-component velocity clamp to v_max, yaw clamp to w_max.
[[nodiscard]] ControlInput clamp_control(const ControlInput& u, const ControlParams& params) noexcept;

struct RobotCommand {
    ControlInput input;
    unsigned flags{0};
};

/// Sum of chase and avoidance terms plus the yaw law, clamped as a whole.
[[nodiscard]] RobotCommand robot_control(std::size_t robot_index, std::span<const Pose> robots,
                                         const Vec2& target_now, const Vec2& predicted_target,
                                         const ControlParams& params);

// ---------------------------------------------------------------------------
// Target input schedules
// ---------------------------------------------------------------------------

struct ConstantInput {
    Vec2 body_velocity{5.0, 0.0};
    double yaw_rate{0.0};
};

/// Constant speed with a constant turn: a circle of radius speed / yaw_rate.
struct CircleInput {
    double speed{5.0};
    double yaw_rate{0.1};
};

/// Constant speed, yaw_rate(t) = amplitude * sin(2 pi t dt / period).
struct SinusoidInput {
    double speed{5.0};
    double amplitude{0.3};
    double period_s{40.0};
};

/// Constant speed, proportional steering towards each waypoint in turn.
struct WaypointInput {
    std::vector<Vec2> points;
    double speed{5.0};
    double turn_gain{1.0};
    double max_yaw_rate{1.0};
    double capture_radius{2.0};
};

using TargetSchedule = std::variant<ConstantInput, CircleInput, SinusoidInput, WaypointInput>;

struct TargetState {
    Pose pose;
    std::size_t waypoint{0};  ///< only used by WaypointInput
};

[[nodiscard]] ControlInput target_input(const TargetState& target, int step, const TargetSchedule& schedule,
                                        double dt);

[[nodiscard]] TargetState step_target(const TargetState& target, int step, const TargetSchedule& schedule,
                                      double dt);

/// States for steps 0..steps inclusive, starting from `initial`.
[[nodiscard]] std::vector<TargetState> target_trajectory(const TargetState& initial, int steps,
                                                         const TargetSchedule& schedule, double dt);

/// Robots on an arc behind a target at the origin facing +x, each heading
/// towards the target.
[[nodiscard]] std::vector<Pose> initial_robot_poses(std::size_t count, double radius, double arc_span);

}  // namespace d2eal::world
