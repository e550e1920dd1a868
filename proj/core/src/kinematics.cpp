#include "pacsim/kinematics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pacsim {

namespace {

void check_segment_index(int index, int n) {
    if (index < 0 || index >= n)
        throw std::domain_error("segment index " + std::to_string(index) +
                                " out of range for " + std::to_string(n) + " segments");
}

void check_station(double s) {
    if (!(s >= 0.0 && s <= 1.0))
        throw std::domain_error("normalized coordinate s = " + std::to_string(s) +
                                " outside [0, 1]");
}

double alpha_at(const SegmentState& q, double s) { return s * (q.c0 + 0.5 * q.c1 * s); }

Mat3 skew(const Vec3& w) {
    Mat3 m;
    m << 0, -w.z(), w.y(),
         w.z(), 0, -w.x(),
        -w.y(), w.x(), 0;
    return m;
}

}  // namespace

void SegmentParams::validate() const {
    if (!(rest_length > 0.0)) throw std::invalid_argument("segment rest_length must be > 0");
    if (!(radius > 0.0)) throw std::invalid_argument("segment radius must be > 0");
    if (!(mass >= 0.0)) throw std::invalid_argument("segment mass must be >= 0");
    if (!(k_bending > 0.0 && k_torsion > 0.0 && k_axial > 0.0))
        throw std::invalid_argument("segment stiffnesses must be > 0");
    for (const TendonGuide& g : tendon_guides) {
        if (g.radius > radius)
            throw std::invalid_argument("tendon attachment radius exceeds segment radius");
        if (g.stations.empty() || g.stations.back() != 1.0)
            throw std::invalid_argument("tendon guide stations must end at s = 1");
        for (size_t i = 0; i < g.stations.size(); ++i) {
            if (g.stations[i] < 0.0 || g.stations[i] > 1.0 ||
                (i > 0 && g.stations[i] <= g.stations[i - 1]))
                throw std::invalid_argument(
                    "tendon guide stations must be strictly increasing within [0, 1]");
        }
    }
}

Eigen::VectorXd RobotState::flatten() const {
    Eigen::VectorXd q(dof());
    for (int i = 0; i < segment_count(); ++i) {
        q[4 * i + 0] = segments[i].c0;
        q[4 * i + 1] = segments[i].c1;
        q[4 * i + 2] = segments[i].phi;
        q[4 * i + 3] = segments[i].deltaL;
    }
    return q;
}

RobotState RobotState::unflatten(const Eigen::VectorXd& q) {
    if (q.size() % 4 != 0)
        throw std::invalid_argument("configuration vector length must be a multiple of 4");
    RobotState st(static_cast<int>(q.size() / 4));
    for (int i = 0; i < st.segment_count(); ++i) {
        st.segments[i].c0 = q[4 * i + 0];
        st.segments[i].c1 = q[4 * i + 1];
        st.segments[i].phi = q[4 * i + 2];
        st.segments[i].deltaL = q[4 * i + 3];
    }
    return st;
}

RigidTransform segment_pose(const SegmentState& state, const SegmentParams& params, double s) {
    check_station(s);
    const double len = params.rest_length + state.deltaL;
    if (!(len > 0.0)) throw std::invalid_argument("segment length L + deltaL must stay > 0");
    const ArcIntegrals arc = affine_arc_integrals(state.c0, state.c1, len, s);
    const double cp = std::cos(state.phi), sp = std::sin(state.phi);
    RigidTransform t;
    t.rotation = rotation_material(alpha_at(state, s), state.phi);
    t.translation = Vec3(cp * arc.x_int, sp * arc.x_int, arc.z_int);
    return t;
}

std::vector<RigidTransform> robot_fk(const RobotState& state,
                                     const std::vector<SegmentParams>& params) {
    if (state.segments.size() != params.size())
        throw std::invalid_argument("robot_fk: state and params length mismatch");
    std::vector<RigidTransform> out;
    out.reserve(state.segments.size());
    RigidTransform acc;
    for (size_t i = 0; i < state.segments.size(); ++i) {
        acc = compose(acc, segment_pose(state.segments[i], params[i], 1.0));
        out.push_back(acc);
    }
    return out;
}

RigidTransform point_pose(const RobotState& state, const std::vector<SegmentParams>& params,
                          int segment_index, double s) {
    check_segment_index(segment_index, state.segment_count());
    RigidTransform acc;
    for (int i = 0; i < segment_index; ++i)
        acc = compose(acc, segment_pose(state.segments[i], params[i], 1.0));
    return compose(acc, segment_pose(state.segments[segment_index], params[segment_index], s));
}

Eigen::MatrixXd point_jacobian(const RobotState& state, const std::vector<SegmentParams>& params,
                               int segment_index, double s) {
    if (state.segments.size() != params.size())
        throw std::invalid_argument("point_jacobian: state and params length mismatch");
    check_segment_index(segment_index, state.segment_count());
    check_station(s);

    const int n = state.segment_count();
    const int k = segment_index;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(6, 4 * n);

    // Per-segment local pose at its chain parameter (1 for proximal segments,
    // s for the query segment) plus the arc moments driving its derivatives.
    std::vector<RigidTransform> local(k + 1);
    std::vector<AffineArcMoments> mom(k + 1);
    std::vector<double> par(k + 1);
    for (int j = 0; j <= k; ++j) {
        const double sj = (j == k) ? s : 1.0;
        par[j] = sj;
        local[j] = segment_pose(state.segments[j], params[j], sj);
        mom[j] = affine_arc_moments(state.segments[j].c0, state.segments[j].c1,
                                    params[j].rest_length + state.segments[j].deltaL, sj);
    }

    // Prefix rotations R_0^{j-1} and the point position y_j in frame S_j.
    std::vector<Mat3> prefix(k + 1);
    prefix[0] = Mat3::Identity();
    for (int j = 1; j <= k; ++j) prefix[j] = prefix[j - 1] * local[j - 1].rotation;
    std::vector<Vec3> y(k + 1);
    y[k] = Vec3::Zero();
    for (int j = k - 1; j >= 0; --j)
        y[j] = local[j + 1].translation + local[j + 1].rotation * y[j + 1];

    // Suffix rotations R_post_j: point frame relative to the tip frame of
    // segment j (identity for the query segment itself).
    std::vector<Mat3> post(k + 1);
    post[k] = Mat3::Identity();
    for (int j = k - 1; j >= 0; --j) post[j] = local[j + 1].rotation * post[j + 1];

    for (int j = 0; j <= k; ++j) {
        const SegmentState& q = state.segments[j];
        const double len = params[j].rest_length + q.deltaL;
        const double sj = par[j];
        const double cp = std::cos(q.phi), sp = std::sin(q.phi);
        const AffineArcMoments& mj = mom[j];
        const Vec3 yj = y[j];
        const Mat3& Rl = local[j].rotation;

        // ∂M/∂α = M·skew(bend_axis); bend_axis = Rz(phi)·ŷ in the base of S_{j-1}.
        const Vec3 bend_axis(-sp, cp, 0.0);
        const Mat3 dM_dalpha = Rl * skew(bend_axis);
        // ∂M/∂phi = skew(ẑ)M − M skew(ẑ).
        const Vec3 ez(0.0, 0.0, 1.0);
        const Mat3 dM_dphi = skew(ez) * Rl - Rl * skew(ez);

        // Local translation derivatives; translation = (cφ·I_sin, sφ·I_sin, I_cos).
        const Vec3 dt_dc0(cp * mj.cos1, sp * mj.cos1, -mj.sin1);
        const Vec3 dt_dc1(0.5 * cp * mj.cos2, 0.5 * sp * mj.cos2, -0.5 * mj.sin2);
        const Vec3 dt_dphi(-sp * mj.sin0, cp * mj.sin0, 0.0);
        const Vec3 dt_ddl = local[j].translation / len;

        // Position columns: R_0^{j-1} (∂t_j + ∂M_j·y_j). α depends on the
        // curvature coefficients through α(s_j) = c0 s_j + c1 s_j²/2.
        const Vec3 col_c0 = prefix[j] * (dt_dc0 + dM_dalpha * yj * sj);
        const Vec3 col_c1 = prefix[j] * (dt_dc1 + dM_dalpha * yj * (0.5 * sj * sj));
        const Vec3 col_phi = prefix[j] * (dt_dphi + dM_dphi * yj);
        const Vec3 col_dl = prefix[j] * dt_ddl;
        jac.block<3, 1>(0, 4 * j + 0) = col_c0;
        jac.block<3, 1>(0, 4 * j + 1) = col_c1;
        jac.block<3, 1>(0, 4 * j + 2) = col_phi;
        jac.block<3, 1>(0, 4 * j + 3) = col_dl;

        // Body angular velocity columns: vee(R_postᵀ (Mᵀ ∂M) R_post).
        const Mat3 postT = post[j].transpose();
        const Vec3 w_alpha = postT * bend_axis;
        const Vec3 w_phi = postT * (Rl.transpose() * ez - ez);
        jac.block<3, 1>(3, 4 * j + 0) = w_alpha * sj;
        jac.block<3, 1>(3, 4 * j + 1) = w_alpha * (0.5 * sj * sj);
        jac.block<3, 1>(3, 4 * j + 2) = w_phi;
        // deltaL does not rotate the frame.
    }
    return jac;
}

}  // namespace pacsim
