#include "pacsim/geometry.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

namespace pacsim {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// |c1| below which affine_arc_integrals switches from the Fresnel closed form
// to the constant-curvature Taylor branch (catastrophic cancellation guard).
constexpr double kC1Switch = 1e-4;
// Wider window for the first/second moments: their by-parts recurrences divide
// by c1 twice and lose ~c0^2 eps / c1^2, so the Taylor branch stays in charge
// until the recurrences are well conditioned.
constexpr double kC1SwitchMoments = 5e-2;

// Series/continued-fraction crossover for the Fresnel integrals (NR choice).
constexpr double kFresnelSeriesMax = 1.5;

// Power series for C(x), S(x), |x| <= kFresnelSeriesMax.
FresnelCS fresnel_series(double x) {
    const double t = 0.5 * kPi * x * x;
    const double t2 = t * t;
    double cterm = x, csum = 0.0;
    double sterm = x * t, ssum = 0.0;
    for (int k = 0; k < 40; ++k) {
        const int n2 = 2 * k;
        csum += cterm / (2.0 * n2 + 1.0);          // /(4k+1)
        ssum += sterm / (2.0 * n2 + 3.0);          // /(4k+3)
        cterm *= -t2 / ((n2 + 1.0) * (n2 + 2.0));
        sterm *= -t2 / ((n2 + 2.0) * (n2 + 3.0));
        if (std::abs(cterm) + std::abs(sterm) < 1e-18 * (std::abs(csum) + std::abs(ssum) + 1e-30))
            break;
    }
    return {csum, ssum};
}

// Auxiliary functions f, g for x > kFresnelSeriesMax via the modified Lentz
// continued fraction for the complex error function (NR §6.9 structure):
//   C(x) = 1/2 + f sin(θ) - g cos(θ),  S(x) = 1/2 - f cos(θ) - g sin(θ),
// with θ = πx²/2. f, g are smooth and decay like 1/(πx); keeping the phase
// θ outside the CF lets callers substitute an accurately reduced phase.
void fresnel_aux(double x, double& f, double& g) {
    using cplx = std::complex<double>;
    const double pix2 = kPi * x * x;
    cplx b(1.0, -pix2);
    cplx cc(1e300, 0.0);
    cplx d = 1.0 / b;
    cplx h = d;
    double n = -1.0;
    for (int k = 2; k <= 200; ++k) {
        n += 2.0;
        const double a = -n * (n + 1.0);
        b += 4.0;
        d = 1.0 / (a * d + b);
        cc = b + a / cc;
        const cplx del = cc * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-15) break;
    }
    h *= cplx(x, -x);
    f = 0.5 * (h.real() + h.imag());
    g = 0.5 * (h.real() - h.imag());
}

// C and S at u given θ = πu²/2 (mod 2π acceptable). Odd extension for u < 0.
FresnelCS fresnel_at(double u, double theta) {
    const double au = std::abs(u);
    FresnelCS v;
    if (au <= kFresnelSeriesMax) {
        v = fresnel_series(au);
    } else {
        double f, g;
        fresnel_aux(au, f, g);
        const double st = std::sin(theta), ct = std::cos(theta);
        v.c = 0.5 + f * st - g * ct;
        v.s = 0.5 - f * ct - g * st;
    }
    if (u < 0.0) {
        v.c = -v.c;
        v.s = -v.s;
    }
    return v;
}

// ∫₀ˢ vᵐ cos(xv) dv and ∫₀ˢ vᵐ sin(xv) dv for m = 0..mmax.
// Series in x for |x|s <= 6, upward recurrence otherwise (stable there).
void base_trig_moments(double x, double s, int mmax, double* C, double* S) {
    if (std::abs(x) * s <= 6.0) {
        const double xs2 = x * x * s * s;
        for (int m = 0; m <= mmax; ++m) {
            double term = std::pow(s, m + 1);
            double acc = 0.0;
            for (int k = 0; k < 64; ++k) {
                acc += term / (m + 2 * k + 1);
                term *= -xs2 / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
                if (std::abs(term) < 1e-18 * (1.0 + std::abs(acc))) break;
            }
            C[m] = acc;
            term = x * std::pow(s, m + 2);
            acc = 0.0;
            for (int k = 0; k < 64; ++k) {
                acc += term / (m + 2 * k + 2);
                term *= -xs2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
                if (std::abs(term) < 1e-18 * (1.0 + std::abs(acc))) break;
            }
            S[m] = acc;
        }
        return;
    }
    const double sn = std::sin(x * s), cn = std::cos(x * s);
    C[0] = sn / x;
    S[0] = (1.0 - cn) / x;
    double spow = 1.0;  // s^m
    for (int m = 1; m <= mmax; ++m) {
        spow *= s;
        C[m] = spow * sn / x - (m / x) * S[m - 1];
        S[m] = -spow * cn / x + (m / x) * C[m - 1];
    }
}

// ∫₀ˢ vᵐ sin(c0 v + c1 v²/2) dv (and cos) by expanding about c1 = 0:
// sin(θ+ε) with ε = (c1/2)v², kept through ε⁴ (truncation ≲ ε⁵/120).
void taylor_affine_moment(double c0, double c1, double s, int m, double& Ms, double& Mc) {
    double C[12], S[12];
    base_trig_moments(c0, s, m + 8, C, S);
    const double h = 0.5 * c1;
    const double h2 = h * h, h3 = h2 * h, h4 = h2 * h2;
    Ms = S[m] + h * C[m + 2] - 0.5 * h2 * S[m + 4] - h3 / 6.0 * C[m + 6] + h4 / 24.0 * S[m + 8];
    Mc = C[m] - h * S[m + 2] - 0.5 * h2 * C[m + 4] + h3 / 6.0 * S[m + 6] + h4 / 24.0 * C[m + 8];
}

struct UnitMoments {
    double s0 = 0, c0 = 0, s1 = 0, c1 = 0, s2 = 0, c2 = 0;
};

// Unit-scale moments for c1 > 0 guaranteed by the caller.
UnitMoments unit_moments_positive_c1(double a0, double a1, double s, bool want_higher) {
    UnitMoments m;
    if (a1 < kC1Switch) {
        taylor_affine_moment(a0, a1, s, 0, m.s0, m.c0);
        if (want_higher) {
            taylor_affine_moment(a0, a1, s, 1, m.s1, m.c1);
            taylor_affine_moment(a0, a1, s, 2, m.s2, m.c2);
        }
        return m;
    }

    // Fresnel closed form. Substituting t = sqrt(c1/π)(v + c0/c1) turns the
    // phase into πt²/2 - β with β = c0²/(2c1); β can reach ~1e6, so it is
    // reduced mod 2π in extended precision and shared between both endpoint
    // phases (θ(u1) = β + α(s) exactly), which keeps the endpoint difference
    // well conditioned as c1 → 0.
    const double k = std::sqrt(a1 / kPi);
    const double u0 = a0 / std::sqrt(kPi * a1);
    const double u1 = u0 + k * s;
    const double alpha_s = s * (a0 + 0.5 * a1 * s);

    const long double beta = static_cast<long double>(a0) * a0 / (2.0L * a1);
    constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;
    const double th0 = static_cast<double>(std::fmod(beta, kTwoPiL));
    const double th1 = th0 + alpha_s;

    const FresnelCS f0 = fresnel_at(u0, th0);
    const FresnelCS f1 = fresnel_at(u1, th1);
    const double dC = f1.c - f0.c, dS = f1.s - f0.s;
    const double cb = std::cos(th0), sb = std::sin(th0);
    m.c0 = (cb * dC + sb * dS) / k;
    m.s0 = (cb * dS - sb * dC) / k;
    if (!want_higher) return m;

    if (a1 < kC1SwitchMoments) {
        taylor_affine_moment(a0, a1, s, 1, m.s1, m.c1);
        taylor_affine_moment(a0, a1, s, 2, m.s2, m.c2);
        return m;
    }
    // Integration by parts: d(-cos α) = (c0 + c1 v) sin α dv etc.
    const double sa = std::sin(alpha_s), ca = std::cos(alpha_s);
    const double one_m_ca = 2.0 * std::pow(std::sin(0.5 * alpha_s), 2);
    m.c1 = (sa - a0 * m.c0) / a1;
    m.s1 = (one_m_ca - a0 * m.s0) / a1;
    m.c2 = (s * sa - m.s0 - a0 * m.c1) / a1;
    m.s2 = (m.c0 - s * ca - a0 * m.s1) / a1;
    return m;
}

UnitMoments unit_moments(double c0, double c1, double s, bool want_higher) {
    if (s == 0.0) return {};
    if (c1 >= 0.0) return unit_moments_positive_c1(c0, c1, s, want_higher);
    // α(v; -c0, -c1) = -α(v; c0, c1): cosine moments even, sine moments odd.
    UnitMoments m = unit_moments_positive_c1(-c0, -c1, s, want_higher);
    m.s0 = -m.s0;
    m.s1 = -m.s1;
    m.s2 = -m.s2;
    return m;
}

// --- Gauss–Kronrod 7/15 pair (QUADPACK abscissae/weights) ---
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename Value, typename F>
void gk15_panel(F&& f, double a, double b, Value& kronrod, Value& gauss) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Value fc = f(c);
    kronrod = kWgk[7] * fc;
    gauss = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        Value fv = f(c - h * kXgk[i]);
        fv += f(c + h * kXgk[i]);
        kronrod += kWgk[i] * fv;
        if (i % 2 == 1) gauss += kWg[i / 2] * fv;
    }
    kronrod *= h;
    gauss *= h;
}

// Globally adaptive: split the interval with the largest error estimate until
// the summed estimate meets tol (QUADPACK QAG strategy).
template <typename Value, typename Norm, typename F>
Value adaptive_gk(F&& f, double a, double b, double tol, Norm&& norm) {
    struct Interval {
        double a, b, err;
        Value integral;
    };
    constexpr int kMaxIntervals = 2048;
    const double min_width = std::abs(b - a) * 1e-14;

    const auto evaluate = [&](double lo, double hi) {
        Value k, g;
        gk15_panel<Value>(f, lo, hi, k, g);
        Value diff = k;
        diff -= g;
        return Interval{lo, hi, norm(diff), k};
    };

    std::vector<Interval> panels{evaluate(a, b)};
    double total_err = panels[0].err;
    while (total_err > tol) {
        size_t worst = 0;
        for (size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[worst].err) worst = i;
        const Interval iv = panels[worst];
        if (static_cast<int>(panels.size()) >= kMaxIntervals ||
            std::abs(iv.b - iv.a) <= min_width) {
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "adaptive_quadrature: no convergence, achieved estimate %.3e "
                          "(requested %.3e)",
                          total_err, tol);
            throw QuadratureError(msg);
        }
        const double mid = 0.5 * (iv.a + iv.b);
        const Interval left = evaluate(iv.a, mid);
        const Interval right = evaluate(mid, iv.b);
        total_err += left.err + right.err - iv.err;
        panels[worst] = left;
        panels.push_back(right);
    }
    Value total = panels[0].integral;
    for (size_t i = 1; i < panels.size(); ++i) total += panels[i].integral;
    return total;
}

}  // namespace

RigidTransform compose(const RigidTransform& parent, const RigidTransform& child) {
    RigidTransform out;
    out.rotation = parent.rotation * child.rotation;
    out.translation = parent.rotation * child.translation + parent.translation;
    return out;
}

Mat3 rotation_from_alpha_phi(double alpha, double phi) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double cp = std::cos(phi), sp = std::sin(phi);
    Mat3 r;
    r << ca * cp, -sp, sa * cp,
         ca * sp,  cp, sa * sp,
             -sa, 0.0,      ca;
    return r;
}

Mat3 rotation_material(double alpha, double phi) {
    // Rz(phi) Ry(alpha) Rz(-phi): no-twist bend about the axis Rz(phi)·ŷ.
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double cp = std::cos(phi), sp = std::sin(phi);
    Mat3 r;
    r << ca * cp * cp + sp * sp, (ca - 1.0) * cp * sp, sa * cp,
         (ca - 1.0) * cp * sp, ca * sp * sp + cp * cp, sa * sp,
         -sa * cp, -sa * sp, ca;
    return r;
}

FresnelCS fresnel(double x) {
    const double ax = std::abs(x);
    FresnelCS v;
    if (ax <= kFresnelSeriesMax) {
        v = fresnel_series(ax);
    } else {
        // Reduce πx²/2 in extended precision before taking sin/cos.
        const long double theta = 0.5L * 3.141592653589793238462643383279502884L *
                                  static_cast<long double>(ax) * ax;
        constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;
        v = fresnel_at(ax, static_cast<double>(std::fmod(theta, kTwoPiL)));
    }
    if (x < 0.0) {
        v.c = -v.c;
        v.s = -v.s;
    }
    return v;
}

ArcIntegrals affine_arc_integrals(double c0, double c1, double scale, double s) {
    const UnitMoments m = unit_moments(c0, c1, s, /*want_higher=*/false);
    return {scale * m.s0, scale * m.c0};
}

AffineArcMoments affine_arc_moments(double c0, double c1, double scale, double s) {
    const UnitMoments m = unit_moments(c0, c1, s, /*want_higher=*/true);
    AffineArcMoments out;
    out.sin0 = scale * m.s0;
    out.cos0 = scale * m.c0;
    out.sin1 = scale * m.s1;
    out.cos1 = scale * m.c1;
    out.sin2 = scale * m.s2;
    out.cos2 = scale * m.c2;
    return out;
}

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("adaptive_quadrature: tol must be > 0");
    if (a == b) return 0.0;
    return adaptive_gk<double>(f, a, b, tol, [](double d) { return std::abs(d); });
}

Eigen::VectorXd adaptive_quadrature_vec(const std::function<Eigen::VectorXd(double)>& f,
                                        double a, double b, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("adaptive_quadrature_vec: tol must be > 0");
    return adaptive_gk<Eigen::VectorXd>(
        f, a, b, tol, [](const Eigen::VectorXd& d) { return d.cwiseAbs().maxCoeff(); });
}

}  // namespace pacsim
