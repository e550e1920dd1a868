#include "pacsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pacsim {

namespace {

// Active coordinate indices per model: PCC freezes c1.
std::vector<int> active_coords(int n, ModelKind kind) {
    std::vector<int> act;
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < 4; ++c)
            if (kind == ModelKind::pac || c != 1) act.push_back(4 * i + c);
    return act;
}

Eigen::VectorXd marker_residuals(const RobotState& state,
                                 const std::vector<SegmentParams>& params,
                                 const std::vector<Marker>& markers) {
    Eigen::VectorXd r(3 * markers.size());
    // Group by segment to reuse the prefix transform.
    std::vector<RigidTransform> prefix(params.size());
    RigidTransform acc;
    for (size_t i = 0; i < params.size(); ++i) {
        prefix[i] = acc;
        acc = compose(acc, segment_pose(state.segments[i], params[i], 1.0));
    }
    for (size_t k = 0; k < markers.size(); ++k) {
        const Marker& m = markers[k];
        const Vec3 p = prefix[m.segment].apply(
            segment_pose(state.segments[m.segment], params[m.segment], m.s).translation);
        r.segment<3>(3 * k) = p - m.position;
    }
    return r;
}

double rms_of(const Eigen::VectorXd& r) {
    const int count = static_cast<int>(r.size() / 3);
    double acc = 0.0;
    for (int k = 0; k < count; ++k) acc += r.segment<3>(3 * k).squaredNorm();
    return std::sqrt(acc / count);
}

// Levenberg–Marquardt over the active coordinates, monotone in rms.
void lm_refine(RobotState& state, const std::vector<SegmentParams>& params,
               const std::vector<Marker>& markers, const std::vector<int>& act,
               int max_iterations) {
    Eigen::VectorXd q = state.flatten();
    Eigen::VectorXd r = marker_residuals(state, params, markers);
    double cost = r.squaredNorm();
    double lambda = 1e-6;
    for (int it = 0; it < max_iterations; ++it) {
        // FD Jacobian over active coordinates.
        Eigen::MatrixXd jac(r.size(), act.size());
        for (size_t a = 0; a < act.size(); ++a) {
            const int idx = act[a];
            const double h = 1e-7 * std::max(1.0, std::abs(q[idx]));
            Eigen::VectorXd qp = q, qm = q;
            qp[idx] += h;
            qm[idx] -= h;
            jac.col(a) = (marker_residuals(RobotState::unflatten(qp), params, markers) -
                          marker_residuals(RobotState::unflatten(qm), params, markers)) /
                         (2.0 * h);
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        if (jtr.lpNorm<Eigen::Infinity>() < 1e-14) break;

        bool accepted = false;
        for (int attempt = 0; attempt < 20 && !accepted; ++attempt) {
            Eigen::MatrixXd a = jtj;
            for (Eigen::Index d = 0; d < a.rows(); ++d)
                a(d, d) += lambda * (jtj(d, d) + 1e-12);
            const Eigen::VectorXd dq_act = a.ldlt().solve(-jtr);
            Eigen::VectorXd qt = q;
            for (size_t i = 0; i < act.size(); ++i) qt[act[i]] += dq_act[i];
            Eigen::VectorXd rt;
            try {
                rt = marker_residuals(RobotState::unflatten(qt), params, markers);
            } catch (const std::exception&) {
                lambda *= 10.0;  // stepped out of the admissible region (L+dL <= 0)
                continue;
            }
            const double ct = rt.squaredNorm();
            if (ct < cost) {
                q = qt;
                r = rt;
                cost = ct;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) break;
    }
    state = RobotState::unflatten(q);
}

// Greedy per-segment constant-curvature initialization: each segment is fit
// in the frame left by its predecessors with closed-form estimates for
// (c0, phi, deltaL) from its own markers.
RobotState pcc_initial_guess(const std::vector<Marker>& markers,
                             const std::vector<SegmentParams>& params) {
    const int n = static_cast<int>(params.size());
    RobotState state(n);
    std::map<int, std::vector<Marker>> by_segment;
    for (const Marker& m : markers) by_segment[m.segment].push_back(m);

    RigidTransform acc;
    for (int i = 0; i < n; ++i) {
        auto it = by_segment.find(i);
        SegmentState& q = state.segments[i];
        if (it != by_segment.end() && !it->second.empty()) {
            std::vector<Marker> local = it->second;
            std::sort(local.begin(), local.end(),
                      [](const Marker& a, const Marker& b) { return a.s < b.s; });
            // Into the segment base frame.
            const Mat3 rt = acc.rotation.transpose();
            for (Marker& m : local) m.position = rt * (m.position - acc.translation);

            const Marker& tip = local.back();
            const double lat = std::hypot(tip.position.x(), tip.position.y());
            if (lat > 1e-9) q.phi = std::atan2(tip.position.y(), tip.position.x());
            // Polar angle of an arc tip equals half its tip angle.
            q.c0 = 2.0 * std::atan2(lat, tip.position.z());
            double arc = 0.0;
            Vec3 prev = Vec3::Zero();
            for (const Marker& m : local) {
                arc += (m.position - prev).norm();
                prev = m.position;
            }
            if (tip.s > 0.2) {
                const double est = arc / tip.s - params[i].rest_length;
                q.deltaL = std::max(est, -0.9 * params[i].rest_length);
            }
            // Local polish on this segment's own markers.
            RobotState one(1);
            one.segments[0] = q;
            lm_refine(one, {params[i]}, local, active_coords(1, ModelKind::pcc), 40);
            q = one.segments[0];
        }
        acc = compose(acc, segment_pose(q, params[i], 1.0));
    }
    return state;
}

}  // namespace

FitResult fit_model(const std::vector<Marker>& markers, ModelKind kind,
                    const std::vector<SegmentParams>& params) {
    const int n = static_cast<int>(params.size());
    std::vector<int> count(n, 0);
    for (const Marker& m : markers) {
        if (m.segment < 0 || m.segment >= n)
            throw std::domain_error("marker references a segment that does not exist");
        if (!(m.s >= 0.0 && m.s <= 1.0))
            throw std::domain_error("marker station s outside [0, 1]");
        ++count[m.segment];
    }
    for (int i = 0; i < n; ++i)
        if (count[i] < 4)
            throw std::domain_error("fit needs at least 4 markers per segment");

    RobotState state = pcc_initial_guess(markers, params);
    lm_refine(state, params, markers, active_coords(n, ModelKind::pcc), 120);
    if (kind == ModelKind::pac)
        lm_refine(state, params, markers, active_coords(n, ModelKind::pac), 120);

    FitResult out;
    out.state = state;
    out.rms = rms_of(marker_residuals(state, params, markers));
    return out;
}

Mat3 marker_tip_frame(const std::vector<Marker>& markers) {
    if (markers.size() < 2)
        throw std::invalid_argument("tip frame needs at least two markers");
    Mat3 frame = Mat3::Identity();
    Vec3 prev_t(0.0, 0.0, 1.0);
    for (size_t i = 1; i < markers.size(); ++i) {
        const Vec3 chord = markers[i].position - markers[i - 1].position;
        const double len = chord.norm();
        if (len < 1e-12) continue;
        const Vec3 t = chord / len;
        const Vec3 w = prev_t.cross(t);
        const double sw = w.norm(), cw = prev_t.dot(t);
        if (sw > 1e-14)
            frame = Eigen::AngleAxisd(std::atan2(sw, cw), w / sw).toRotationMatrix() * frame;
        prev_t = t;
    }
    return frame;
}

std::pair<ErrorReport, ErrorReport> compare_models(const StaticsProblem& problem,
                                                   const std::vector<Marker>& truth,
                                                   const SolverOptions& options) {
    if (truth.empty()) throw std::invalid_argument("compare_models: no ground-truth markers");
    const Mat3 truth_tip = marker_tip_frame(truth);

    const auto evaluate = [&](ModelKind kind) -> ErrorReport {
        StaticsProblem p = problem;
        p.model = kind;
        if (kind == ModelKind::pcc)
            for (SegmentState& s : p.initial_state.segments) s.c1 = 0.0;
        const SolveReport sol = solve_statics(p, options);
        if (!sol.converged)
            throw SolveFailure(std::string("statics solve failed under ") +
                               (kind == ModelKind::pac ? "pac" : "pcc") +
                               ", residual " + std::to_string(sol.residual_norm));
        ErrorReport rep;
        rep.model = kind;
        rep.marker_errors.reserve(truth.size());
        double acc = 0.0;
        for (const Marker& m : truth) {
            const Vec3 pos =
                point_pose(sol.state, p.params, m.segment, m.s).translation;
            const double err = (pos - m.position).norm();
            rep.marker_errors.push_back(err);
            acc += err * err;
        }
        rep.marker_rms = std::sqrt(acc / truth.size());

        const int last = static_cast<int>(p.params.size()) - 1;
        const RigidTransform tip = point_pose(sol.state, p.params, last, 1.0);
        // Ground-truth tip: the marker at the last segment's s = 1 (the final
        // marker by construction of rod_markers / the CSV contract).
        rep.tip_position_error = (tip.translation - truth.back().position).norm();
        const Mat3 rel = tip.rotation.transpose() * truth_tip;
        const double c = std::clamp(0.5 * (rel.trace() - 1.0), -1.0, 1.0);
        rep.tip_geodesic_error = std::acos(c);
        rep.tip_frobenius_error = (tip.rotation - truth_tip).norm();
        return rep;
    };

    return {evaluate(ModelKind::pac), evaluate(ModelKind::pcc)};
}

}  // namespace pacsim
