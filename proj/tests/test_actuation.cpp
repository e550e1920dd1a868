#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace pacsim;
using namespace pacsim::test;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

TendonRouting make_tendon(int segment, double radius, double azimuth,
                          std::vector<double> stations) {
    TendonRouting t;
    t.segment = segment;
    t.radius = radius;
    t.azimuth = azimuth;
    t.stations = std::move(stations);
    return t;
}
}  // namespace

TEST_CASE("tendon length on a straight segment") {
    const std::vector<SegmentParams> arm = default_arm(1);
    RobotState st(1);
    st.segments[0].deltaL = 0.011;
    const double len = arm[0].rest_length + 0.011;

    const std::vector<TendonRouting> two = {make_tendon(0, 0.03, 0.0, {0.0, 1.0})};
    CHECK(tendon_lengths(st, two, arm)[0] == doctest::Approx(len).epsilon(1e-14));

    const std::vector<TendonRouting> three = {make_tendon(0, 0.03, 1.2, {0.0, 0.5, 1.0})};
    CHECK(tendon_lengths(st, three, arm)[0] == doctest::Approx(len).epsilon(1e-14));
}

TEST_CASE("tendon on the inner side of a bend shortens") {
    const std::vector<SegmentParams> arm = default_arm(1);
    RobotState st(1);
    st.segments[0].c0 = 1.2;  // bend toward +x
    const double d = 0.03;
    const int guides = 8;
    std::vector<double> stations;
    for (int i = 0; i <= guides; ++i) stations.push_back(double(i) / guides);
    const std::vector<TendonRouting> routing = {make_tendon(0, d, 0.0, stations)};
    const double got = tendon_lengths(st, routing, arm)[0];
    CHECK(got < arm[0].rest_length);

    // Constant-curvature chord formula: guides sit on a circle of radius
    // R - d; each chord spans an angle c0/guides.
    const double r_arc = arm[0].rest_length / st.segments[0].c0;
    const double chord = 2.0 * (r_arc - d) * std::sin(st.segments[0].c0 / (2.0 * guides));
    CHECK(got == doctest::Approx(guides * chord).epsilon(1e-10));
}

TEST_CASE("pd tendon force and clamping") {
    CHECK(tendon_force(0.13, 0.0, 0.14, 0.0, 20.0, 20.0) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(tendon_force(0.14, 0.0, 0.14, 0.0, 20.0, 20.0) == 0.0);
    // Unclamped value would be -0.2 N; tendons cannot push.
    CHECK(tendon_force(0.15, 0.0, 0.14, 0.0, 20.0, 20.0) == 0.0);

    TendonCommand cmd;
    cmd.target_lengths = Eigen::VectorXd::Constant(2, 0.1);
    cmd.kp = 0.0;
    cmd.kd = 0.0;
    const Eigen::VectorXd f =
        tendon_forces(Eigen::VectorXd::Constant(2, 0.2), Eigen::VectorXd::Zero(2), cmd);
    CHECK(f.norm() == 0.0);
}

TEST_CASE("actuation matrix of an axial tendon") {
    const std::vector<SegmentParams> arm = default_arm(1);
    const std::vector<TendonRouting> routing = {make_tendon(0, 0.03, 0.7, {0.0, 1.0})};
    const Eigen::MatrixXd a = actuation_matrix(RobotState(1), routing, arm);
    REQUIRE(a.rows() == 4);
    REQUIRE(a.cols() == 1);
    // dl/d(deltaL) = 1, so tension compresses the segment.
    CHECK(a(3, 0) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("symmetric three-tendon layout cancels bending at rest") {
    const std::vector<SegmentParams> arm = default_arm(1);
    std::vector<TendonRouting> routing;
    for (int k = 0; k < 3; ++k)
        routing.push_back(make_tendon(0, 0.03, 2.0 * kPi * k / 3.0, {0.0, 0.5, 1.0}));
    const Eigen::MatrixXd a = actuation_matrix(RobotState(1), routing, arm);
    const Eigen::VectorXd net = a * Eigen::VectorXd::Constant(3, 2.0);
    CHECK(std::abs(net[0]) < 1e-8);
    CHECK(std::abs(net[1]) < 1e-8);
    CHECK(std::abs(net[2]) < 1e-8);
    CHECK(net[3] == doctest::Approx(-6.0).epsilon(1e-8));
}

TEST_CASE("virtual work consistency of the actuation matrix") {
    std::mt19937 rng(47);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<SegmentParams> arm = default_arm(2);
    std::vector<TendonRouting> routing;
    for (int k = 0; k < 3; ++k) {
        routing.push_back(make_tendon(0, 0.03, 2.0 * kPi * k / 3.0, {0.0, 0.25, 0.5, 0.75, 1.0}));
        routing.push_back(make_tendon(1, 0.03, 2.0 * kPi * k / 3.0 + 0.5, {0.0, 0.5, 1.0}));
    }
    for (int trial = 0; trial < 15; ++trial) {
        const RobotState st = random_state(rng, 2);
        const Eigen::MatrixXd a = actuation_matrix(st, routing, arm);
        Eigen::VectorXd tension(routing.size());
        for (Eigen::Index j = 0; j < tension.size(); ++j) tension[j] = 1.5 + u(rng);

        // (A f)·δq must equal -f·(∂l/∂q δq) for any direction δq.
        Eigen::VectorXd dq(st.dof());
        for (int i = 0; i < st.dof(); ++i) dq[i] = u(rng);
        dq *= 1e-6 / dq.norm();
        const Eigen::VectorXd q = st.flatten();
        const Eigen::VectorXd lp =
            tendon_lengths(RobotState::unflatten(q + dq), routing, arm);
        const Eigen::VectorXd lm =
            tendon_lengths(RobotState::unflatten(q - dq), routing, arm);
        const double work_fd = -tension.dot((lp - lm) / 2.0);
        const double work_matrix = (a * tension).dot(dq);
        CHECK(std::abs(work_matrix - work_fd) <
              1e-6 * std::max(std::abs(work_fd), 1e-12));
    }
}

TEST_CASE("routing validation") {
    const std::vector<SegmentParams> arm = default_arm(1);
    CHECK_THROWS_AS(make_tendon(2, 0.03, 0, {0.0, 1.0}).validate(arm), std::invalid_argument);
    CHECK_THROWS_AS(make_tendon(0, 0.05, 0, {0.0, 1.0}).validate(arm), std::invalid_argument);
    CHECK_THROWS_AS(make_tendon(0, 0.03, 0, {0.0, 0.9}).validate(arm), std::invalid_argument);
    CHECK_THROWS_AS(make_tendon(0, 0.03, 0, {0.5, 0.2, 1.0}).validate(arm),
                    std::invalid_argument);
    CHECK_NOTHROW(make_tendon(0, 0.03, 0, {0.0, 0.5, 1.0}).validate(arm));
}
