#include "pacsim/actuation.hpp"

#include <cmath>
#include <stdexcept>

namespace pacsim {

namespace {

double single_tendon_length(const SegmentState& q, const SegmentParams& p,
                            const TendonRouting& t) {
    // Guide positions in the segment base frame; chord sums are invariant to
    // the world placement of the segment, so no chaining is needed.
    const Vec3 offset(t.radius * std::cos(t.azimuth), t.radius * std::sin(t.azimuth), 0.0);
    double len = 0.0;
    Vec3 prev = Vec3::Zero();
    bool have_prev = false;
    for (double s : t.stations) {
        const RigidTransform pose = segment_pose(q, p, s);
        const Vec3 g = pose.apply(offset);
        if (have_prev) len += (g - prev).norm();
        prev = g;
        have_prev = true;
    }
    return len;
}

}  // namespace

void TendonRouting::validate(const std::vector<SegmentParams>& params) const {
    if (segment < 0 || segment >= static_cast<int>(params.size()))
        throw std::invalid_argument("tendon references a segment that does not exist");
    if (radius > params[segment].radius)
        throw std::invalid_argument("tendon attachment radius exceeds segment radius");
    if (stations.size() < 2 || stations.back() != 1.0)
        throw std::invalid_argument("tendon needs at least two stations, the last at s = 1");
    for (size_t i = 0; i < stations.size(); ++i) {
        if (stations[i] < 0.0 || stations[i] > 1.0 ||
            (i > 0 && stations[i] <= stations[i - 1]))
            throw std::invalid_argument(
                "tendon stations must be strictly increasing within [0, 1]");
    }
}

Eigen::VectorXd tendon_lengths(const RobotState& state,
                               const std::vector<TendonRouting>& routing,
                               const std::vector<SegmentParams>& params) {
    if (state.segments.size() != params.size())
        throw std::invalid_argument("tendon_lengths: state and params size mismatch");
    Eigen::VectorXd l(routing.size());
    for (size_t j = 0; j < routing.size(); ++j) {
        const TendonRouting& t = routing[j];
        if (t.segment < 0 || t.segment >= state.segment_count())
            throw std::invalid_argument("tendon references a segment that does not exist");
        l[j] = single_tendon_length(state.segments[t.segment], params[t.segment], t);
    }
    return l;
}

double tendon_force(double length, double rate, double target_length, double target_rate,
                    double kp, double kd) {
    const double f = kd * (target_rate - rate) + kp * (target_length - length);
    return f > 0.0 ? f : 0.0;
}

Eigen::VectorXd tendon_forces(const Eigen::VectorXd& lengths, const Eigen::VectorXd& rates,
                              const TendonCommand& command) {
    if (lengths.size() != command.target_lengths.size())
        throw std::invalid_argument("tendon_forces: command size mismatch");
    Eigen::VectorXd f(lengths.size());
    for (Eigen::Index j = 0; j < lengths.size(); ++j) {
        const double target_rate =
            command.target_rates.size() == lengths.size() ? command.target_rates[j] : 0.0;
        f[j] = tendon_force(lengths[j], rates.size() == lengths.size() ? rates[j] : 0.0,
                            command.target_lengths[j], target_rate, command.kp, command.kd);
    }
    return f;
}

Eigen::MatrixXd actuation_matrix(const RobotState& state,
                                 const std::vector<TendonRouting>& routing,
                                 const std::vector<SegmentParams>& params) {
    const int n = state.segment_count();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4 * n, static_cast<Eigen::Index>(routing.size()));
    for (size_t j = 0; j < routing.size(); ++j) {
        const TendonRouting& t = routing[j];
        if (t.segment < 0 || t.segment >= n)
            throw std::invalid_argument("tendon references a segment that does not exist");
        // A tendon's length depends only on its owning segment's coordinates.
        SegmentState q = state.segments[t.segment];
        double* coord[4] = {&q.c0, &q.c1, &q.phi, &q.deltaL};
        for (int c = 0; c < 4; ++c) {
            const double saved = *coord[c];
            const double h = 1e-6 * std::max(1.0, std::abs(saved));
            *coord[c] = saved + h;
            const double lp = single_tendon_length(q, params[t.segment], t);
            *coord[c] = saved - h;
            const double lm = single_tendon_length(q, params[t.segment], t);
            *coord[c] = saved;
            a(4 * t.segment + c, static_cast<Eigen::Index>(j)) = -(lp - lm) / (2.0 * h);
        }
    }
    return a;
}

}  // namespace pacsim
