#pragma once

#include "pacsim/mechanics.hpp"

namespace pacsim {

// One tendon: straight runs between guide points on the cross-section of its
// owning segment (frictionless guides, Bowden-decoupled from other segments).
struct TendonRouting {
    int segment = 0;        // owning segment index (0-based)
    double radius = 0.0;    // m, attachment radius d
    double azimuth = 0.0;   // rad, angular position around the cross-section
    std::vector<double> stations;  // increasing s values, last = 1

    void validate(const std::vector<SegmentParams>& params) const;
};

// PD tendon command (Eq.-of-motion rates are zero in quasi-statics).
struct TendonCommand {
    Eigen::VectorXd target_lengths;  // l̄, m
    Eigen::VectorXd target_rates;    // m/s, zero in statics
    double kp = 20.0;                // N/m
    double kd = 20.0;                // N·s/m
};

// Current tendon lengths: sum of chords between consecutive guide positions.
Eigen::VectorXd tendon_lengths(const RobotState& state,
                               const std::vector<TendonRouting>& routing,
                               const std::vector<SegmentParams>& params);

// PD law clamped below at zero (tendons cannot push).
double tendon_force(double length, double rate, double target_length, double target_rate,
                    double kp, double kd);
Eigen::VectorXd tendon_forces(const Eigen::VectorXd& lengths, const Eigen::VectorXd& rates,
                              const TendonCommand& command);

// A(q) = -(∂l/∂q)ᵀ, the virtual-work transpose of the tendon-length Jacobian
// (central finite differences of tendon_lengths). Positive tension pulls the
// configuration toward shortening the tendon.
Eigen::MatrixXd actuation_matrix(const RobotState& state,
                                 const std::vector<TendonRouting>& routing,
                                 const std::vector<SegmentParams>& params);

}  // namespace pacsim
