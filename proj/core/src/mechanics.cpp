#include "pacsim/mechanics.hpp"

#include <cmath>
#include <stdexcept>

namespace pacsim {

StiffnessModel StiffnessModel::from_params(const std::vector<SegmentParams>& params,
                                           double contraction_stiffening) {
    StiffnessModel m;
    m.segments.reserve(params.size());
    for (const SegmentParams& p : params)
        m.segments.push_back({p.k_bending, p.k_torsion, p.k_axial});
    m.contraction_stiffening = contraction_stiffening;
    return m;
}

Eigen::Matrix4d StiffnessModel::segment_block(int i, const SegmentState& state) const {
    const Entry& e = segments.at(i);
    const double kb = e.k_bending * (1.0 + contraction_stiffening * std::abs(state.deltaL));
    Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
    k(0, 0) = kb;
    k(0, 1) = k(1, 0) = 0.5 * kb;
    k(1, 1) = kb / 3.0;
    k(2, 2) = e.k_torsion;
    k(3, 3) = e.k_axial;
    return k;
}

GeneralizedForce elastic_force(const RobotState& state, const StiffnessModel& model) {
    if (state.segments.size() != model.segments.size())
        throw std::invalid_argument("elastic_force: state and stiffness size mismatch");
    GeneralizedForce f(state.dof());
    for (int i = 0; i < state.segment_count(); ++i) {
        const SegmentState& q = state.segments[i];
        const Eigen::Vector4d qi(q.c0, q.c1, q.phi, q.deltaL);
        f.segment<4>(4 * i) = model.segment_block(i, q) * qi;
    }
    return f;
}

double elastic_energy(const RobotState& state, const StiffnessModel& model) {
    if (state.segments.size() != model.segments.size())
        throw std::invalid_argument("elastic_energy: state and stiffness size mismatch");
    double u = 0.0;
    for (int i = 0; i < state.segment_count(); ++i) {
        const SegmentState& q = state.segments[i];
        const Eigen::Vector4d qi(q.c0, q.c1, q.phi, q.deltaL);
        u += 0.5 * qi.dot(model.segment_block(i, q) * qi);
    }
    return u;
}

double gravity_potential(const RobotState& state, const std::vector<SegmentParams>& params,
                         const Vec3& gravity) {
    if (state.segments.size() != params.size())
        throw std::invalid_argument("gravity_potential: state and params size mismatch");
    if (gravity.isZero()) return 0.0;
    double u = 0.0;
    RigidTransform base;
    for (int i = 0; i < state.segment_count(); ++i) {
        const SegmentState& q = state.segments[i];
        const SegmentParams& p = params[i];
        const double ui = adaptive_quadrature(
            [&](double s) {
                const Vec3 pos = base.apply(segment_pose(q, p, s).translation);
                return -gravity.dot(pos);
            },
            0.0, 1.0, 1e-12);
        u += p.mass * ui;
        base = compose(base, segment_pose(q, p, 1.0));
    }
    return u;
}

GeneralizedForce gravity_force(const RobotState& state, const std::vector<SegmentParams>& params,
                               const Vec3& gravity) {
    if (state.segments.size() != params.size())
        throw std::invalid_argument("gravity_force: state and params size mismatch");
    GeneralizedForce g = GeneralizedForce::Zero(state.dof());
    if (gravity.isZero()) return g;
    for (int i = 0; i < state.segment_count(); ++i) {
        const Eigen::VectorXd gi = adaptive_quadrature_vec(
            [&](double s) -> Eigen::VectorXd {
                const Eigen::MatrixXd jac = point_jacobian(state, params, i, s);
                return jac.topRows<3>().transpose() * gravity;
            },
            0.0, 1.0, 1e-10);
        g -= params[i].mass * gi;
    }
    return g;
}

}  // namespace pacsim
