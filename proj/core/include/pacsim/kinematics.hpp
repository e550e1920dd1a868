#pragma once

#include <vector>

#include "pacsim/geometry.hpp"

namespace pacsim {

// Lagrangian coordinates of one segment: curvature affine in the normalized
// coordinate s, α(s) = c0 s + c1 s²/2, bending plane phi, length change deltaL.
struct SegmentState {
    double c0 = 0.0;      // rad, zero-order curvature coefficient
    double c1 = 0.0;      // rad, first-order curvature coefficient
    double phi = 0.0;     // rad, bending-plane angle
    double deltaL = 0.0;  // m, axial length change
};

struct TendonGuide {
    double radius = 0.0;   // m, attachment radius in the cross-section
    double azimuth = 0.0;  // rad, angular position around the cross-section
    std::vector<double> stations;  // s values of the guides, increasing, last = 1
};

struct SegmentParams {
    double rest_length = 0.0;  // m
    double radius = 0.0;       // m, cross-section radius (segment-constant)
    double mass = 0.0;         // kg
    double k_bending = 0.0;    // N·m·rad⁻² in normalized-s units
    double k_torsion = 0.0;    // N·m·rad⁻²
    double k_axial = 0.0;      // N/m
    std::vector<TendonGuide> tendon_guides;

    // Throws std::invalid_argument on violated invariants.
    void validate() const;
};

struct RobotState {
    std::vector<SegmentState> segments;

    RobotState() = default;
    explicit RobotState(int n) : segments(n) {}

    int segment_count() const { return static_cast<int>(segments.size()); }
    int dof() const { return 4 * segment_count(); }

    // Configuration vector, [c0, c1, phi, deltaL] per segment in order.
    Eigen::VectorXd flatten() const;
    static RobotState unflatten(const Eigen::VectorXd& q);
};

// Pose of the material point at normalized coordinate s of one segment,
// relative to the segment base. Rotation uses the no-twist material frame
// (identity at s = 0); translation per the Fresnel-integral closed form.
// Throws std::domain_error for s outside [0, 1].
RigidTransform segment_pose(const SegmentState& state, const SegmentParams& params, double s);

// Base-frame transforms T_0^i of every segment tip, i = 1..n.
std::vector<RigidTransform> robot_fk(const RobotState& state,
                                     const std::vector<SegmentParams>& params);

// Pose of the material point (segment_index, s) in the base frame.
RigidTransform point_pose(const RobotState& state, const std::vector<SegmentParams>& params,
                          int segment_index, double s);

// 6×4n Jacobian of the material point (segment_index, s): rows 0-2 position,
// rows 3-5 orientation in the body angular-velocity convention. Columns of
// segments distal to the point are zero. Analytic; the finite-difference
// cross-check lives in the test suite.
Eigen::MatrixXd point_jacobian(const RobotState& state, const std::vector<SegmentParams>& params,
                               int segment_index, double s);

}  // namespace pacsim
