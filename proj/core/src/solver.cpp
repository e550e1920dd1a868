#include "pacsim/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pacsim {

namespace {

Eigen::VectorXd default_damping(const StaticsProblem& p, double relaxation_time) {
    const int n = static_cast<int>(p.params.size());
    Eigen::VectorXd d(4 * n);
    for (int i = 0; i < n; ++i) {
        const StiffnessModel::Entry& e = p.stiffness.segments[i];
        d[4 * i + 0] = e.k_bending;
        d[4 * i + 1] = e.k_bending / 3.0;
        d[4 * i + 2] = e.k_torsion;
        d[4 * i + 3] = e.k_axial;
    }
    return d * relaxation_time;
}

}  // namespace

void StaticsProblem::validate() const {
    if (params.empty()) throw std::invalid_argument("statics problem needs >= 1 segment");
    if (initial_state.segments.size() != params.size())
        throw std::invalid_argument("initial state and params size mismatch");
    if (stiffness.segments.size() != params.size())
        throw std::invalid_argument("stiffness model and params size mismatch");
    for (const SegmentParams& p : params) p.validate();
    for (const TendonRouting& t : tendons) t.validate(params);
    if (command.target_lengths.size() != static_cast<Eigen::Index>(tendons.size()))
        throw std::invalid_argument("tendon command size does not match tendon count");
    if (command.kp < 0.0 || command.kd < 0.0)
        throw std::invalid_argument("tendon gains must be >= 0");
    for (const PointLoad& l : loads) {
        if (l.segment < 0 || l.segment >= static_cast<int>(params.size()))
            throw std::invalid_argument("point load references a segment that does not exist");
        if (!(l.s >= 0.0 && l.s <= 1.0))
            throw std::invalid_argument("point load location s outside [0, 1]");
    }
    if (model == ModelKind::pcc) {
        for (const SegmentState& s : initial_state.segments)
            if (s.c1 != 0.0)
                throw std::invalid_argument("pcc mode requires c1 = 0 in the initial state");
    }
}

GeneralizedForce apply_point_force(const RobotState& state,
                                   const std::vector<SegmentParams>& params, int segment,
                                   double s, const Vec3& force, const Vec3& moment) {
    const Eigen::MatrixXd jac = point_jacobian(state, params, segment, s);
    GeneralizedForce f = jac.topRows<3>().transpose() * force;
    if (!moment.isZero()) {
        const Mat3 r = point_pose(state, params, segment, s).rotation;
        f += jac.bottomRows<3>().transpose() * (r.transpose() * moment);
    }
    return f;
}

GeneralizedForce static_residual(const RobotState& state, const StaticsProblem& problem) {
    GeneralizedForce r = -elastic_force(state, problem.stiffness);
    if (!problem.gravity.isZero())
        r -= gravity_force(state, problem.params, problem.gravity);
    if (!problem.tendons.empty()) {
        const Eigen::VectorXd l = tendon_lengths(state, problem.tendons, problem.params);
        const Eigen::VectorXd f =
            tendon_forces(l, Eigen::VectorXd::Zero(l.size()), problem.command);
        if (!f.isZero())
            r += actuation_matrix(state, problem.tendons, problem.params) * f;
    }
    for (const PointLoad& load : problem.loads)
        r += apply_point_force(state, problem.params, load.segment, load.s, load.force,
                               load.moment);
    return r;
}

SolveReport solve_statics(const StaticsProblem& problem, const SolverOptions& options) {
    problem.validate();
    const int dof = static_cast<int>(problem.params.size()) * 4;
    Eigen::VectorXd dinv;
    if (options.damping_diag.size() == dof) {
        if ((options.damping_diag.array() <= 0.0).any())
            throw std::invalid_argument("damping diagonal must be positive");
        dinv = options.damping_diag.cwiseInverse();
    } else if (options.damping_diag.size() == 0) {
        dinv = default_damping(problem, options.relaxation_time).cwiseInverse();
    } else {
        throw std::invalid_argument("damping diagonal has wrong length");
    }

    // PCC: freeze every c1 coordinate of the flow and of the residual norm.
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(dof);
    if (problem.model == ModelKind::pcc)
        for (int i = 0; i < dof / 4; ++i) mask[4 * i + 1] = 0.0;

    const auto residual = [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
        return static_residual(RobotState::unflatten(q), problem).cwiseProduct(mask);
    };

    SolveReport report;
    Eigen::VectorXd q = problem.initial_state.flatten();
    Eigen::VectorXd r = residual(q);
    double rnorm = r.norm();
    double best_norm = rnorm;
    Eigen::VectorXd best_q = q;
    report.residual_history.push_back(rnorm);

    double h = options.initial_step;
    Eigen::VectorXd k1 = dinv.cwiseProduct(r);
    int iter = 0;
    while (rnorm >= options.residual_tol && iter < options.max_iterations) {
        // Bogacki–Shampine 3(2) embedded pair, FSAL.
        const Eigen::VectorXd k2 = dinv.cwiseProduct(residual(q + 0.5 * h * k1));
        const Eigen::VectorXd k3 = dinv.cwiseProduct(residual(q + 0.75 * h * k2));
        const Eigen::VectorXd qn = q + h * (2.0 / 9.0 * k1 + 1.0 / 3.0 * k2 + 4.0 / 9.0 * k3);
        const Eigen::VectorXd rn = residual(qn);
        const Eigen::VectorXd k4 = dinv.cwiseProduct(rn);
        const Eigen::VectorXd err_vec =
            h * ((2.0 / 9.0 - 7.0 / 24.0) * k1 + (1.0 / 3.0 - 1.0 / 4.0) * k2 +
                 (4.0 / 9.0 - 1.0 / 3.0) * k3 - 1.0 / 8.0 * k4);
        double err = 0.0;
        bool finite = qn.allFinite() && rn.allFinite();
        if (finite)
            err = (err_vec.array() / (1.0 + q.array().abs())).matrix().norm();

        ++iter;
        if (finite && err <= options.step_error_tol) {
            q = qn;
            r = rn;
            k1 = k4;  // first-same-as-last
            rnorm = r.norm();
            report.residual_history.push_back(rnorm);
            if (rnorm < best_norm) {
                best_norm = rnorm;
                best_q = q;
            }
            if (options.step_monitor) options.step_monitor(RobotState::unflatten(q), rnorm);
        }
        const double safety =
            finite && err > 0.0
                ? 0.9 * std::cbrt(options.step_error_tol / err)
                : (finite ? 5.0 : 0.2);
        h = std::min(options.max_step, h * std::min(5.0, std::max(0.2, safety)));
    }

    report.converged = rnorm < options.residual_tol;
    report.iterations = iter;
    if (report.converged) {
        report.state = RobotState::unflatten(q);
        report.residual_norm = rnorm;
    } else {
        report.state = RobotState::unflatten(best_q);
        report.residual_norm = best_norm;
    }
    return report;
}

}  // namespace pacsim
