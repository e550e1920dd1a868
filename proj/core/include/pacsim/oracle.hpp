#pragma once

#include <optional>
#include <utility>

#include "pacsim/solver.hpp"

namespace pacsim {

// High-resolution discrete-elastica rod used as synthetic ground truth in
// place of motion-capture data. Positions are the unknowns; material frames
// are reconstructed by parallel transport after a solve (no twist DOF).
struct DenseRod {
    std::vector<Vec3> nodes;            // N+1 node positions, base frame
    std::vector<Mat3> frames;           // per-node material frames
    std::vector<double> bending_ei;     // per element, N·m²
    std::vector<double> axial_ea;       // per element, N
    double element_rest_length = 0.0;   // uniform, m
    double mass = 0.0;                  // kg, lumped uniformly on the nodes

    int element_count() const { return static_cast<int>(bending_ei.size()); }
    double rest_length() const { return element_rest_length * element_count(); }

    // Straight rod along +z with uniform properties.
    static DenseRod straight(int elements, double length, double bending_stiffness,
                             double axial_stiffness, double mass);
    // Discretization of a segment chain: EI_i = k_bending_i·L_i, EA_i = k_axial_i·L_i.
    static DenseRod from_segments(const std::vector<SegmentParams>& params, int elements);
};

// Conservative tip couple about a fixed axis; valid for bending in the plane
// orthogonal to the axis (the loading used by the validation scenarios).
struct TipMoment {
    Vec3 axis = Vec3(0.0, 1.0, 0.0);
    double magnitude = 0.0;  // N·m
};

// Centerline-routed tendon: tension applied through the chord polyline of the
// listed material stations (fractions of rest length). Guides at nonzero
// cross-section radius are not representable without frame DOF.
struct DenseTendon {
    double tension = 0.0;            // N, >= 0
    std::vector<double> stations;    // increasing material fractions in [0, 1]
};

struct DenseLoads {
    Vec3 gravity = Vec3::Zero();                      // m/s²
    std::vector<std::pair<int, Vec3>> node_forces;    // (node index, N)
    std::optional<TipMoment> tip_moment;
    std::vector<DenseTendon> tendons;
};

struct DenseSolveOptions {
    double gradient_tol = 1e-8;   // relative to the characteristic force
    int max_iterations = 400;
    int load_ramp_steps = 1;      // continuation steps for strongly nonlinear cases
};

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimizes discrete elastic + gravity - load-work energy over the free node
// positions (base clamped: nodes 0 and 1 fixed). Newton with a banded
// finite-difference Hessian of the analytic gradient, Levenberg damping and a
// backtracking line search. Throws OracleError on non-convergence.
DenseRod dense_equilibrium(const DenseRod& rod, const DenseLoads& loads,
                           const DenseSolveOptions& options = {});

// Total potential and its gradient (exposed for convergence checks in tests).
double dense_energy(const DenseRod& rod, const std::vector<Vec3>& nodes,
                    const DenseLoads& loads);
std::vector<Vec3> dense_energy_gradient(const DenseRod& rod, const std::vector<Vec3>& nodes,
                                        const DenseLoads& loads);

// One ground-truth sample: material station (segment, s) and its position.
struct Marker {
    int segment = 0;
    double s = 0.0;
    Vec3 position = Vec3::Zero();
};

// Markers at every node, stations assigned by material (rest) arc length over
// the given segment partition. Boundary nodes belong to the earlier segment
// as s = 1.
std::vector<Marker> rod_markers(const DenseRod& rod,
                                const std::vector<SegmentParams>& params);

}  // namespace pacsim
