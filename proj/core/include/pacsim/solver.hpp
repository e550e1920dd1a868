#pragma once

#include <functional>

#include "pacsim/actuation.hpp"

namespace pacsim {

enum class ModelKind { pac, pcc };

struct PointLoad {
    int segment = 0;
    double s = 1.0;
    Vec3 force = Vec3::Zero();    // N, base frame
    Vec3 moment = Vec3::Zero();   // N·m, base frame
};

struct StaticsProblem {
    RobotState initial_state;
    std::vector<SegmentParams> params;
    StiffnessModel stiffness;
    std::vector<TendonRouting> tendons;
    TendonCommand command;
    Vec3 gravity = Vec3::Zero();
    std::vector<PointLoad> loads;
    ModelKind model = ModelKind::pac;  // pcc freezes every c1 coordinate

    void validate() const;
};

struct SolverOptions {
    // Damping matrix diagonal (4n). Empty selects the default: per segment
    // diag(k_b, k_b/3, k_t, k_a)·relaxation_time, which makes the damped flow
    // contract at comparable rates across the stiff axial and soft bending
    // modes. Any SPD diagonal leaves the equilibria unchanged.
    Eigen::VectorXd damping_diag;
    double relaxation_time = 1.0;  // s, scales the default damping
    double step_error_tol = 1e-8;
    double initial_step = 1e-3;
    double max_step = 10.0;
    double residual_tol = 1e-6;    // N-equivalent residual norm
    int max_iterations = 100000;
    // Called after every accepted step with the state and its residual norm.
    std::function<void(const RobotState&, double)> step_monitor;
};

struct SolveReport {
    bool converged = false;
    RobotState state;
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> residual_history;  // per accepted step
};

// Generalized force of a wrench applied at the material point (segment, s):
// J_posᵀ·force + J_ornᵀ·(Rᵀ·moment), with R the point rotation (moment given
// in the base frame, orientation rows in the body convention).
GeneralizedForce apply_point_force(const RobotState& state,
                                   const std::vector<SegmentParams>& params, int segment,
                                   double s, const Vec3& force,
                                   const Vec3& moment = Vec3::Zero());

// r(q) = A(q)f_act + Σ J_pᵀ f_ext - G(q) - K(q); zero exactly at equilibrium.
GeneralizedForce static_residual(const RobotState& state, const StaticsProblem& problem);

// Integrates the damped flow D q̇ = r(q) with an embedded RK23 step controller
// until ‖r‖ < residual_tol (non-convergence is reported, not thrown). In PCC
// mode the c1 coordinates are frozen and excluded from the residual norm.
SolveReport solve_statics(const StaticsProblem& problem, const SolverOptions& options = {});

}  // namespace pacsim
