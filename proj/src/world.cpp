#include "d2eal/world.hpp"

#include <algorithm>
#include <limits>

namespace d2eal::world {

double wrap_angle(double angle) noexcept {
    double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (wrapped <= -kPi) {
        wrapped += 2.0 * kPi;
    }
    return wrapped;
}

Mat2 rotation(double heading) noexcept {
    const double c = std::cos(heading);
    const double s = std::sin(heading);
    return {c, -s, s, c};
}

void ControlParams::validate() const {
    for (double v : {k1, k2, k3, standoff, v_max, w_max}) {
        if (!std::isfinite(v) || !(v > 0.0)) {
            throw Error(ErrorCode::ConfigError, "control parameters must be strictly positive");
        }
    }
}

Pose step_kinematics(const Pose& pose, const ControlInput& u, double dt) {
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    }
    if (!pose.position.is_finite() || !std::isfinite(pose.heading) || !u.body_velocity.is_finite() ||
        !std::isfinite(u.yaw_rate)) {
        throw Error(ErrorCode::NonFiniteInput, "step_kinematics received a non-finite value");
    }
    return {pose.position + dt * (rotation(pose.heading) * u.body_velocity),
            wrap_angle(pose.heading + dt * u.yaw_rate)};
}

VectorCommand chase_command(const Pose& robot, const Vec2& target_now, const Vec2& predicted_target,
                            const ControlParams& params) {
    const Vec2 to_prediction = predicted_target - robot.position;
    const double reach = to_prediction.norm();
    if (reach < kDirectionEpsilon) {
        return {{}, kDegenerateDirection};
    }
    const double range_error = distance(target_now, robot.position) - params.standoff;
    const Vec2 global = (params.k1 * range_error / reach) * to_prediction;
    return {rotation(robot.heading).transpose() * global, 0};
}

VectorCommand collision_avoidance(std::size_t robot_index, std::span<const Vec2> positions, double heading,
                                  const ControlParams& params) {
    if (positions.size() < 2 || robot_index >= positions.size()) {
        throw Error(ErrorCode::InvalidArgument, "collision_avoidance needs at least two robots");
    }
    const Vec2& self = positions[robot_index];
    std::size_t nearest = robot_index;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < positions.size(); ++j) {
        if (j == robot_index) {
            continue;
        }
        const double dist = distance(positions[j], self);
        if (dist < best) {
            best = dist;
            nearest = j;
        }
    }
    const Vec2 offset = positions[nearest] - self;
    const Mat2 to_body = rotation(heading).transpose();
    if (best < kCollisionEpsilon) {
        // Magnitude capped at k2 / eps; direction arbitrary when exactly coincident.
        const Vec2 direction = best > 0.0 ? offset * (1.0 / best) : Vec2{1.0, 0.0};
        return {to_body * (-(params.k2 / kCollisionEpsilon) * direction), kCoincidentRobots};
    }
    return {to_body * (-(params.k2 / offset.squared_norm()) * offset), 0};
}

YawCommand heading_command(const Pose& robot, const Vec2& predicted_target, const ControlParams& params) {
    const Vec2 to_prediction = predicted_target - robot.position;
    if (to_prediction.norm() < kDirectionEpsilon) {
        return {0.0, kDegenerateDirection};
    }
    const Vec2 h{std::cos(robot.heading), std::sin(robot.heading)};
    const double err = std::atan2(cross(h, to_prediction), dot(h, to_prediction));
    return {std::clamp(params.k3 * err, -params.w_max, params.w_max), 0};
}

ControlInput clamp_control(const ControlInput& u, const ControlParams& params) noexcept {
    return {{std::clamp(u.body_velocity.x, -params.v_max, params.v_max),
             std::clamp(u.body_velocity.y, -params.v_max, params.v_max)},
            std::clamp(u.yaw_rate, -params.w_max, params.w_max)};
}

RobotCommand robot_control(std::size_t robot_index, std::span<const Pose> robots, const Vec2& target_now,
                           const Vec2& predicted_target, const ControlParams& params) {
    const Pose& self = robots[robot_index];
    const VectorCommand chase = chase_command(self, target_now, predicted_target, params);
    const YawCommand yaw = heading_command(self, predicted_target, params);
    unsigned flags = chase.flags | yaw.flags;
    Vec2 velocity = chase.value;
    if (robots.size() >= 2) {
        std::vector<Vec2> positions;
        positions.reserve(robots.size());
        for (const Pose& p : robots) {
            positions.push_back(p.position);
        }
        const VectorCommand avoid = collision_avoidance(robot_index, positions, self.heading, params);
        velocity += avoid.value;
        flags |= avoid.flags;
    }
    return {clamp_control({velocity, yaw.value}, params), flags};
}

ControlInput target_input(const TargetState& target, int step, const TargetSchedule& schedule, double dt) {
    struct Visitor {
        const TargetState& target;
        int step;
        double dt;

        ControlInput operator()(const ConstantInput& s) const { return {s.body_velocity, s.yaw_rate}; }
        ControlInput operator()(const CircleInput& s) const { return {{s.speed, 0.0}, s.yaw_rate}; }
        ControlInput operator()(const SinusoidInput& s) const {
            const double time = static_cast<double>(step) * dt;
            return {{s.speed, 0.0}, s.amplitude * std::sin(2.0 * kPi * time / s.period_s)};
        }
        ControlInput operator()(const WaypointInput& s) const {
            if (target.waypoint >= s.points.size()) {
                return {{s.speed, 0.0}, 0.0};
            }
            const Vec2 to_goal = s.points[target.waypoint] - target.pose.position;
            const double bearing = std::atan2(to_goal.y, to_goal.x);
            const double err = wrap_angle(bearing - target.pose.heading);
            return {{s.speed, 0.0}, std::clamp(s.turn_gain * err, -s.max_yaw_rate, s.max_yaw_rate)};
        }
    };
    return std::visit(Visitor{target, step, dt}, schedule);
}

TargetState step_target(const TargetState& target, int step, const TargetSchedule& schedule, double dt) {
    TargetState next{step_kinematics(target.pose, target_input(target, step, schedule, dt), dt), target.waypoint};
    if (const auto* wp = std::get_if<WaypointInput>(&schedule)) {
        while (next.waypoint < wp->points.size() &&
               distance(wp->points[next.waypoint], next.pose.position) <= wp->capture_radius) {
            ++next.waypoint;
        }
    }
    return next;
}

std::vector<TargetState> target_trajectory(const TargetState& initial, int steps, const TargetSchedule& schedule,
                                           double dt) {
    std::vector<TargetState> states;
    states.reserve(static_cast<std::size_t>(steps) + 1);
    states.push_back(initial);
    for (int t = 0; t < steps; ++t) {
        states.push_back(step_target(states.back(), t, schedule, dt));
    }
    return states;
}

std::vector<Pose> initial_robot_poses(std::size_t count, double radius, double arc_span) {
    std::vector<Pose> poses;
    poses.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double frac = count == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(count - 1);
        const double angle = kPi + arc_span * (frac - 0.5);
        const Vec2 position{radius * std::cos(angle), radius * std::sin(angle)};
        poses.push_back({position, wrap_angle(std::atan2(-position.y, -position.x))});
    }
    return poses;
}

}  // namespace d2eal::world
