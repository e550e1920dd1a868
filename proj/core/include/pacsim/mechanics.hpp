#pragma once

#include "pacsim/kinematics.hpp"

namespace pacsim {

// Vector in configuration space, 4 entries per segment matching
// [c0, c1, phi, deltaL]: units (N·m, N·m, N·m, N).
using GeneralizedForce = Eigen::VectorXd;

// Per-segment stiffness: the curvature coefficients couple through the
// 2×2 Hankel matrix H with H(i,j) = 1/(i+j-1), i.e. [[1, 1/2], [1/2, 1/3]].
struct StiffnessModel {
    struct Entry {
        double k_bending = 0.0;
        double k_torsion = 0.0;
        double k_axial = 0.0;
    };
    std::vector<Entry> segments;
    // Optional contraction stiffening, k_bending·(1 + coeff·|deltaL|);
    // 0 keeps the plain Hankel model.
    double contraction_stiffening = 0.0;

    static StiffnessModel from_params(const std::vector<SegmentParams>& params,
                                      double contraction_stiffening = 0.0);

    // 4×4 stiffness block of segment i at the given state (symmetric PSD).
    Eigen::Matrix4d segment_block(int i, const SegmentState& state) const;
};

// Restoring force K(q): per segment blockdiag(k_b·H, k_t, k_a)·q_i.
GeneralizedForce elastic_force(const RobotState& state, const StiffnessModel& model);

// ½ Σ qᵢᵀ Kᵢ qᵢ; its gradient is elastic_force (for zero stiffening).
double elastic_energy(const RobotState& state, const StiffnessModel& model);

// U_g = Σ mᵢ ∫₀¹ (-gravity)·pᵢ(s) ds, mass lumped uniformly along the
// centerline; evaluated by adaptive quadrature.
double gravity_potential(const RobotState& state, const std::vector<SegmentParams>& params,
                         const Vec3& gravity);

// G(q) = ∇_q U_g, assembled as -Σ mᵢ ∫ J_posᵀ(i, s)·gravity ds with the
// analytic point Jacobian under the quadrature.
GeneralizedForce gravity_force(const RobotState& state, const std::vector<SegmentParams>& params,
                               const Vec3& gravity);

}  // namespace pacsim
