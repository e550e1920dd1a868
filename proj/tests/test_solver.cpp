#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace pacsim;
using namespace pacsim::test;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

StaticsProblem rest_problem(int n) {
    StaticsProblem p;
    p.params = default_arm(n);
    p.initial_state = RobotState(n);
    p.stiffness = StiffnessModel::from_params(p.params);
    return p;
}

void attach_three_tendons(StaticsProblem& p, int segment) {
    for (int k = 0; k < 3; ++k) {
        TendonRouting t;
        t.segment = segment;
        t.radius = 0.03;
        t.azimuth = 2.0 * kPi * k / 3.0;
        t.stations = {0.0, 0.25, 0.5, 0.75, 1.0};
        p.tendons.push_back(t);
    }
}

void command_rest_lengths(StaticsProblem& p) {
    if (p.tendons.empty()) {
        p.command.target_lengths = Eigen::VectorXd();
        return;
    }
    p.command.target_lengths = tendon_lengths(p.initial_state, p.tendons, p.params);
    p.command.target_rates = Eigen::VectorXd::Zero(p.command.target_lengths.size());
}
}  // namespace

TEST_CASE("rest scenario has zero residual and converges immediately") {
    StaticsProblem p = rest_problem(2);
    attach_three_tendons(p, 0);
    attach_three_tendons(p, 1);
    command_rest_lengths(p);
    CHECK(static_residual(p.initial_state, p).norm() == doctest::Approx(0.0).epsilon(1e-12));

    const SolveReport rep = solve_statics(p);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 2);
    CHECK(rep.state.flatten().norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("residual superposition at rest") {
    StaticsProblem p = rest_problem(1);
    PointLoad load;
    load.segment = 0;
    load.s = 1.0;
    load.force = Vec3(0.4, -0.2, -1.1);
    p.loads.push_back(load);
    p.command.target_lengths = Eigen::VectorXd();
    const GeneralizedForce r = static_residual(p.initial_state, p);
    const GeneralizedForce expect =
        apply_point_force(p.initial_state, p.params, 0, 1.0, load.force);
    CHECK((r - expect).norm() < 1e-14);
}

TEST_CASE("apply_point_force spec points") {
    const std::vector<SegmentParams> arm = default_arm(1);
    const RobotState st(1);
    CHECK(apply_point_force(st, arm, 0, 0.7, Vec3::Zero()).norm() == 0.0);

    const GeneralizedForce axial = apply_point_force(st, arm, 0, 1.0, Vec3(0, 0, -2.5));
    CHECK(axial[3] == doctest::Approx(-2.5).epsilon(1e-12));
    CHECK(std::abs(axial[0]) < 1e-12);
    CHECK(std::abs(axial[1]) < 1e-12);
    CHECK(std::abs(axial[2]) < 1e-12);

    CHECK_THROWS_AS(apply_point_force(st, arm, 0, 1.4, Vec3(1, 0, 0)), std::domain_error);
    CHECK_THROWS_AS(apply_point_force(st, arm, 3, 0.5, Vec3(1, 0, 0)), std::domain_error);
}

TEST_CASE("point force matches the work-functional gradient") {
    std::mt19937 rng(53);
    const std::vector<SegmentParams> arm = default_arm(2);
    const Vec3 f(0.8, 0.3, -0.5);
    for (int trial = 0; trial < 10; ++trial) {
        const RobotState st = random_state(rng, 2);
        const GeneralizedForce tau = apply_point_force(st, arm, 1, 0.6, f);
        const Eigen::VectorXd q = st.flatten();
        for (int i = 0; i < st.dof(); ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(q[i]));
            Eigen::VectorXd qp = q, qm = q;
            qp[i] += h;
            qm[i] -= h;
            const double wp =
                f.dot(point_pose(RobotState::unflatten(qp), arm, 1, 0.6).translation);
            const double wm =
                f.dot(point_pose(RobotState::unflatten(qm), arm, 1, 0.6).translation);
            const double fd = (wp - wm) / (2 * h);
            CHECK(std::abs(tau[i] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("lateral gravity deflection grows with tip load") {
    // Upright segment, gravity sideways; tip masses of 0.5 kg and 1.0 kg.
    const double g = 9.81;
    double prev_deflection = 0.0;
    for (double tip_mass : {0.0, 0.5, 1.0}) {
        StaticsProblem p = rest_problem(1);
        p.gravity = Vec3(-g, 0, 0);
        if (tip_mass > 0) {
            PointLoad load;
            load.segment = 0;
            load.s = 1.0;
            load.force = tip_mass * p.gravity;
            p.loads.push_back(load);
        }
        p.command.target_lengths = Eigen::VectorXd();
        const SolveReport rep = solve_statics(p);
        REQUIRE(rep.converged);
        CHECK(rep.residual_norm < 1e-6);
        const Vec3 tip = robot_fk(rep.state, p.params)[0].translation;
        const double deflection = std::abs(tip.x());
        CHECK(deflection > prev_deflection);
        prev_deflection = deflection;
    }
}

TEST_CASE("distinct initial guesses reach the same equilibrium") {
    StaticsProblem p = rest_problem(1);
    p.gravity = Vec3(-9.81, 0, 0);
    p.command.target_lengths = Eigen::VectorXd();

    SolverOptions tight;
    tight.residual_tol = 1e-9;
    const SolveReport a = solve_statics(p, tight);
    StaticsProblem p2 = p;
    p2.initial_state.segments[0].c0 = -0.4;
    p2.initial_state.segments[0].deltaL = 0.01;
    const SolveReport b = solve_statics(p2, tight);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK((a.state.flatten() - b.state.flatten()).norm() < 1e-6);
}

TEST_CASE("re-solving from the equilibrium terminates immediately") {
    StaticsProblem p = rest_problem(1);
    p.gravity = Vec3(-9.81, 0, 0);
    p.command.target_lengths = Eigen::VectorXd();
    const SolveReport first = solve_statics(p);
    REQUIRE(first.converged);

    StaticsProblem again = p;
    again.initial_state = first.state;
    const SolveReport second = solve_statics(again);
    CHECK(second.converged);
    CHECK(second.iterations <= 2);
    CHECK((second.state.flatten() - first.state.flatten()).norm() < 1e-9);
}

TEST_CASE("energy descends along the unactuated damped flow") {
    StaticsProblem p = rest_problem(2);
    p.gravity = Vec3(-9.81, 0, -2.0);
    PointLoad load;
    load.segment = 1;
    load.s = 1.0;
    load.force = Vec3(-3.0, 0.5, -1.0);
    p.loads.push_back(load);
    p.command.target_lengths = Eigen::VectorXd();
    p.initial_state.segments[0].c0 = 0.3;  // start away from equilibrium

    const auto potential = [&](const RobotState& st) {
        double u = elastic_energy(st, p.stiffness) + gravity_potential(st, p.params, p.gravity);
        u -= load.force.dot(point_pose(st, p.params, 1, 1.0).translation);
        return u;
    };

    std::vector<double> energies{potential(p.initial_state)};
    SolverOptions opt;
    opt.step_monitor = [&](const RobotState& st, double) { energies.push_back(potential(st)); };
    const SolveReport rep = solve_statics(p, opt);
    REQUIRE(rep.converged);
    REQUIRE(energies.size() > 3);
    for (size_t i = 1; i < energies.size(); ++i)
        CHECK(energies[i] <= energies[i - 1] + 1e-10);
}

TEST_CASE("pcc mode freezes c1 and balances the remaining coordinates") {
    StaticsProblem p = rest_problem(2);
    p.gravity = Vec3(-9.81, 0, 0);
    p.command.target_lengths = Eigen::VectorXd();
    p.model = ModelKind::pcc;
    const SolveReport rep = solve_statics(p);
    REQUIRE(rep.converged);
    for (const SegmentState& s : rep.state.segments) CHECK(s.c1 == 0.0);

    const GeneralizedForce r = static_residual(rep.state, p);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(r[4 * i + 0]) < 1e-6);
        CHECK(std::abs(r[4 * i + 2]) < 1e-6);
        CHECK(std::abs(r[4 * i + 3]) < 1e-6);
    }

    StaticsProblem bad = p;
    bad.initial_state.segments[0].c1 = 0.2;
    CHECK_THROWS_AS(solve_statics(bad), std::invalid_argument);
}

TEST_CASE("tendon actuation bends the arm toward the tensioned side") {
    StaticsProblem p = rest_problem(1);
    attach_three_tendons(p, 0);
    command_rest_lengths(p);
    // Raising a target above the current length tensions that tendon under
    // the PD law f = kp(l_bar - l) with the zero clamp.
    p.command.target_lengths[0] += 0.03;
    const SolveReport rep = solve_statics(p);
    REQUIRE(rep.converged);
    const Vec3 tip = robot_fk(rep.state, p.params)[0].translation;
    CHECK(tip.x() > 0.005);                     // bends toward the azimuth-0 tendon
    CHECK(rep.state.segments[0].deltaL < 0.0);  // and compresses

    // Lowering the target leaves the tendon slack: nothing moves.
    StaticsProblem slack = rest_problem(1);
    attach_three_tendons(slack, 0);
    command_rest_lengths(slack);
    slack.command.target_lengths[0] -= 0.03;
    const SolveReport rep2 = solve_statics(slack);
    REQUIRE(rep2.converged);
    CHECK(rep2.state.flatten().norm() < 1e-12);
}

TEST_CASE("solver reports non-convergence with the best state") {
    StaticsProblem p = rest_problem(1);
    p.gravity = Vec3(-9.81, 0, 0);
    p.command.target_lengths = Eigen::VectorXd();
    SolverOptions opt;
    opt.max_iterations = 3;
    const SolveReport rep = solve_statics(p, opt);
    CHECK(!rep.converged);
    CHECK(rep.iterations == 3);
    CHECK(rep.residual_history.size() >= 1);
    CHECK(rep.residual_norm >= 0.0);
}

TEST_CASE("problem validation") {
    StaticsProblem p = rest_problem(1);
    p.command.target_lengths = Eigen::VectorXd();
    PointLoad bad;
    bad.segment = 5;
    p.loads.push_back(bad);
    CHECK_THROWS_AS(solve_statics(p), std::invalid_argument);
    p.loads.clear();
    p.command.target_lengths = Eigen::VectorXd::Zero(2);  // no tendons attached
    CHECK_THROWS_AS(solve_statics(p), std::invalid_argument);
}
