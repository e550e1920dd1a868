#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

namespace pacsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rotation + translation pair; rotation must stay in SO(3).
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform Identity() { return {}; }
    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

// parent ∘ child: rotation R_p R_c, translation R_p t_c + t_p.
RigidTransform compose(const RigidTransform& parent, const RigidTransform& child);

// Frame of the bending-adapted parameterization: Rz(phi) * Ry(alpha).
// Note this matrix carries a residual phi-spin at alpha = 0; the material
// (no-twist) frame used for chaining and cross-sections is
// rotation_material(alpha, phi) = Rz(phi) * Ry(alpha) * Rz(-phi).
Mat3 rotation_from_alpha_phi(double alpha, double phi);
Mat3 rotation_material(double alpha, double phi);

// Standard Fresnel integrals C(x) = ∫cos(πt²/2)dt, S(x) = ∫sin(πt²/2)dt.
struct FresnelCS {
    double c = 0.0;
    double s = 0.0;
};
FresnelCS fresnel(double x);

// Translation integrals of a segment with curvature angle
// α(v) = c0 v + c1 v²/2 (curvature affine in the normalized coordinate):
//   x_int = scale ∫₀ˢ sin α(v) dv,  z_int = scale ∫₀ˢ cos α(v) dv.
// Closed form through Fresnel integrals for |c1| >= 1e-4, a Taylor expansion
// about the constant-curvature limit below; the branches agree to ~1e-11.
struct ArcIntegrals {
    double x_int = 0.0;
    double z_int = 0.0;
};
ArcIntegrals affine_arc_integrals(double c0, double c1, double scale, double s);

// Moments of the same integrands,
//   sin_m = scale ∫₀ˢ vᵐ sin α(v) dv,  cos_m likewise, m = 0..3.
// Order 0 reproduces affine_arc_integrals; orders 1 and 2 are the
// configuration derivatives ∂/∂c0 and 2 ∂/∂c1 of the order-0 integrals;
// order 3 feeds the centroid derivative used by the gravity gradient.
struct AffineArcMoments {
    double sin0 = 0.0, cos0 = 0.0;
    double sin1 = 0.0, cos1 = 0.0;
    double sin2 = 0.0, cos2 = 0.0;
    double sin3 = 0.0, cos3 = 0.0;
};
AffineArcMoments affine_arc_moments(double c0, double c1, double scale, double s);

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive Gauss–Kronrod (G7/K15) integration to absolute tolerance `tol`.
// Throws QuadratureError when the subdivision budget is exhausted before the
// error estimate drops below tol; the message reports the achieved estimate.
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-12);

// Vector-valued variant used for generalized-force assembly.
Eigen::VectorXd adaptive_quadrature_vec(const std::function<Eigen::VectorXd(double)>& f,
                                        double a, double b, double tol = 1e-10);

}  // namespace pacsim
