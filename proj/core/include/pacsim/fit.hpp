#pragma once

#include "pacsim/oracle.hpp"

namespace pacsim {

struct FitResult {
    RobotState state;
    double rms = 0.0;  // m, root-mean-square marker distance
};

// Least-squares fit of per-segment states to sampled centerline markers.
// PCC freezes c1 = 0; the PAC fit is initialized from the PCC solution and
// accepts only improving steps, so fit_model(pac).rms <= fit_model(pcc).rms.
// Throws std::domain_error when any segment carries fewer than 4 markers.
FitResult fit_model(const std::vector<Marker>& markers, ModelKind kind,
                    const std::vector<SegmentParams>& params);

struct ErrorReport {
    ModelKind model = ModelKind::pac;
    double tip_position_error = 0.0;    // m
    double tip_geodesic_error = 0.0;    // rad
    double tip_frobenius_error = 0.0;   // ‖R_model - R_truth‖_F
    double marker_rms = 0.0;            // m
    std::vector<double> marker_errors;  // m, per ground-truth marker
};

struct SolveFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tip orientation of a marker polyline: parallel transport of the identity
// frame along the chord tangents (the material frame of a no-twist rod).
Mat3 marker_tip_frame(const std::vector<Marker>& markers);

// Solves the scenario under PAC and under PCC and scores both against the
// ground-truth markers. Throws SolveFailure when either solve diverges.
std::pair<ErrorReport, ErrorReport> compare_models(const StaticsProblem& problem,
                                                   const std::vector<Marker>& truth,
                                                   const SolverOptions& options = {});

}  // namespace pacsim
