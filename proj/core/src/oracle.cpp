#include "pacsim/oracle.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>

namespace pacsim {

namespace {

Vec3 tip_moment_frame_d1(const TipMoment& m) {
    const Vec3 d2(0.0, 0.0, 1.0);
    Vec3 d1 = m.axis.normalized().cross(d2);
    const double n = d1.norm();
    if (n < 1e-12) throw std::invalid_argument("tip moment axis must not be the rod axis");
    return d1 / n;
}

// Rotation taking a onto b by the minimal (geodesic) rotation.
Mat3 min_rotation(const Vec3& a, const Vec3& b) {
    const Vec3 u = a.normalized(), v = b.normalized();
    const double c = u.dot(v);
    const Vec3 w = u.cross(v);
    const double s = w.norm();
    if (s < 1e-14) {
        if (c > 0.0) return Mat3::Identity();
        // Antipodal: rotate pi about any axis orthogonal to u.
        Vec3 axis = u.cross(Vec3(1, 0, 0));
        if (axis.norm() < 1e-6) axis = u.cross(Vec3(0, 1, 0));
        return Eigen::AngleAxisd(3.14159265358979323846, axis.normalized()).toRotationMatrix();
    }
    return Eigen::AngleAxisd(std::atan2(s, c), w / s).toRotationMatrix();
}

std::vector<double> node_masses(const DenseRod& rod) {
    const int n_nodes = rod.element_count() + 1;
    std::vector<double> m(n_nodes, rod.mass / rod.element_count());
    m.front() *= 0.5;
    m.back() *= 0.5;
    return m;
}

int station_node(const DenseRod& rod, double station) {
    const int n = rod.element_count();
    int idx = static_cast<int>(std::lround(station * n));
    return std::min(std::max(idx, 0), n);
}

}  // namespace

DenseRod DenseRod::straight(int elements, double length, double bending_stiffness,
                            double axial_stiffness, double mass) {
    if (elements < 2) throw std::invalid_argument("dense rod needs >= 2 elements");
    DenseRod rod;
    rod.element_rest_length = length / elements;
    rod.bending_ei.assign(elements, bending_stiffness);
    rod.axial_ea.assign(elements, axial_stiffness);
    rod.mass = mass;
    rod.nodes.resize(elements + 1);
    for (int i = 0; i <= elements; ++i) rod.nodes[i] = Vec3(0, 0, i * rod.element_rest_length);
    rod.frames.assign(elements + 1, Mat3::Identity());
    return rod;
}

DenseRod DenseRod::from_segments(const std::vector<SegmentParams>& params, int elements) {
    if (params.empty()) throw std::invalid_argument("dense rod needs >= 1 segment");
    double total = 0.0, mass = 0.0;
    for (const SegmentParams& p : params) {
        total += p.rest_length;
        mass += p.mass;
    }
    DenseRod rod = straight(elements, total, 1.0, 1.0, mass);
    for (int e = 0; e < elements; ++e) {
        const double mid = (e + 0.5) * rod.element_rest_length;
        double cum = 0.0;
        const SegmentParams* seg = &params.back();
        for (const SegmentParams& p : params) {
            if (mid < cum + p.rest_length) {
                seg = &p;
                break;
            }
            cum += p.rest_length;
        }
        // Normalized-s stiffness k_b relates to flexural rigidity as EI = k_b·L.
        rod.bending_ei[e] = seg->k_bending * seg->rest_length;
        rod.axial_ea[e] = seg->k_axial * seg->rest_length;
    }
    return rod;
}

double dense_energy(const DenseRod& rod, const std::vector<Vec3>& nodes,
                    const DenseLoads& loads) {
    const int n = rod.element_count();
    const double h = rod.element_rest_length;
    double energy = 0.0;
    for (int e = 0; e < n; ++e) {
        const double len = (nodes[e + 1] - nodes[e]).norm();
        energy += 0.5 * rod.axial_ea[e] / h * (len - h) * (len - h);
    }
    for (int i = 1; i < n; ++i) {
        const Vec3 e1 = nodes[i] - nodes[i - 1];
        const Vec3 e2 = nodes[i + 1] - nodes[i];
        const double c = std::clamp(e1.normalized().dot(e2.normalized()), -1.0, 1.0);
        const double ei = 0.5 * (rod.bending_ei[i - 1] + rod.bending_ei[i]);
        energy += ei / h * (1.0 - c);
    }
    if (!loads.gravity.isZero()) {
        const std::vector<double> m = node_masses(rod);
        for (size_t i = 0; i < nodes.size(); ++i)
            energy -= m[i] * loads.gravity.dot(nodes[i]);
    }
    for (const auto& [idx, f] : loads.node_forces) energy -= f.dot(nodes.at(idx));
    if (loads.tip_moment && loads.tip_moment->magnitude != 0.0) {
        const Vec3 d1 = tip_moment_frame_d1(*loads.tip_moment);
        const Vec3 d2(0.0, 0.0, 1.0);
        const Vec3 e = nodes[n] - nodes[n - 1];
        energy -= loads.tip_moment->magnitude * std::atan2(e.dot(d1), e.dot(d2));
    }
    for (const DenseTendon& t : loads.tendons) {
        if (t.stations.size() < 2) continue;
        double l = 0.0;
        for (size_t k = 1; k < t.stations.size(); ++k)
            l += (nodes[station_node(rod, t.stations[k])] -
                  nodes[station_node(rod, t.stations[k - 1])])
                     .norm();
        energy += t.tension * l;  // tension pays to lengthen the chord path
    }
    return energy;
}

std::vector<Vec3> dense_energy_gradient(const DenseRod& rod, const std::vector<Vec3>& nodes,
                                        const DenseLoads& loads) {
    const int n = rod.element_count();
    const double h = rod.element_rest_length;
    std::vector<Vec3> grad(nodes.size(), Vec3::Zero());
    for (int e = 0; e < n; ++e) {
        const Vec3 d = nodes[e + 1] - nodes[e];
        const double len = d.norm();
        const Vec3 f = rod.axial_ea[e] / h * (len - h) * (d / len);
        grad[e + 1] += f;
        grad[e] -= f;
    }
    for (int i = 1; i < n; ++i) {
        const Vec3 e1 = nodes[i] - nodes[i - 1];
        const Vec3 e2 = nodes[i + 1] - nodes[i];
        const double l1 = e1.norm(), l2 = e2.norm();
        const Vec3 u1 = e1 / l1, u2 = e2 / l2;
        const double c = u1.dot(u2);
        const double ei = 0.5 * (rod.bending_ei[i - 1] + rod.bending_ei[i]);
        // E = (EI/h)(1 - u1·u2); chain rule through the normalizations.
        const Vec3 dc_de1 = (u2 - c * u1) / l1;
        const Vec3 dc_de2 = (u1 - c * u2) / l2;
        const double w = -ei / h;
        grad[i - 1] -= w * dc_de1;
        grad[i] += w * (dc_de1 - dc_de2);
        grad[i + 1] += w * dc_de2;
    }
    if (!loads.gravity.isZero()) {
        const std::vector<double> m = node_masses(rod);
        for (size_t i = 0; i < nodes.size(); ++i) grad[i] -= m[i] * loads.gravity;
    }
    for (const auto& [idx, f] : loads.node_forces) grad.at(idx) -= f;
    if (loads.tip_moment && loads.tip_moment->magnitude != 0.0) {
        const Vec3 d1 = tip_moment_frame_d1(*loads.tip_moment);
        const Vec3 d2(0.0, 0.0, 1.0);
        const Vec3 e = nodes[n] - nodes[n - 1];
        const double a = e.dot(d1), b = e.dot(d2);
        const Vec3 dpsi = (d1 * b - d2 * a) / (a * a + b * b);
        grad[n] -= loads.tip_moment->magnitude * dpsi;
        grad[n - 1] += loads.tip_moment->magnitude * dpsi;
    }
    for (const DenseTendon& t : loads.tendons) {
        for (size_t k = 1; k < t.stations.size(); ++k) {
            const int ia = station_node(rod, t.stations[k - 1]);
            const int ib = station_node(rod, t.stations[k]);
            if (ia == ib) continue;
            const Vec3 u = (nodes[ib] - nodes[ia]).normalized();
            grad[ib] += t.tension * u;
            grad[ia] -= t.tension * u;
        }
    }
    return grad;
}

DenseRod dense_equilibrium(const DenseRod& rod, const DenseLoads& loads,
                           const DenseSolveOptions& options) {
    const int n = rod.element_count();
    if (static_cast<int>(rod.nodes.size()) != n + 1)
        throw std::invalid_argument("dense rod node count does not match element count");
    const int n_free = 3 * (n - 1);  // nodes 0 and 1 clamped

    // Characteristic force for the convergence scale.
    double char_force = 0.0;
    for (const auto& [idx, f] : loads.node_forces) char_force = std::max(char_force, f.norm());
    char_force = std::max(char_force, rod.mass * loads.gravity.norm());
    if (loads.tip_moment)
        char_force = std::max(char_force,
                              std::abs(loads.tip_moment->magnitude) / rod.rest_length());
    for (const DenseTendon& t : loads.tendons) char_force = std::max(char_force, t.tension);
    char_force = std::max(char_force,
                          rod.bending_ei.front() / (rod.rest_length() * rod.rest_length()));
    const double tol = options.gradient_tol * char_force;

    std::vector<Vec3> x = rod.nodes;
    const auto pack = [&](const std::vector<Vec3>& g) {
        Eigen::VectorXd v(n_free);
        for (int i = 2; i <= n; ++i) v.segment<3>(3 * (i - 2)) = g[i];
        return v;
    };

    const int ramps = std::max(1, options.load_ramp_steps);
    for (int ramp = 1; ramp <= ramps; ++ramp) {
        const double w = static_cast<double>(ramp) / ramps;
        DenseLoads lw = loads;
        lw.gravity *= w;
        for (auto& [idx, f] : lw.node_forces) f *= w;
        if (lw.tip_moment) lw.tip_moment->magnitude *= w;
        for (auto& t : lw.tendons) t.tension *= w;

        double lambda = 1e-10;
        bool done = false;
        for (int it = 0; it < options.max_iterations; ++it) {
            const Eigen::VectorXd g = pack(dense_energy_gradient(rod, x, lw));
            if (g.lpNorm<Eigen::Infinity>() < ((ramp == ramps) ? tol : 1e4 * tol)) {
                done = true;
                break;
            }

            // Banded FD Hessian of the analytic gradient: perturbing every
            // fifth node touches disjoint gradient stencils (range ±2 nodes).
            Eigen::SparseMatrix<double> hess(n_free, n_free);
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(static_cast<size_t>(n_free) * 15);
            const double fd = 1e-7 * std::max(1.0, rod.rest_length());
            for (int color = 0; color < 5; ++color) {
                for (int comp = 0; comp < 3; ++comp) {
                    std::vector<Vec3> xp = x, xm = x;
                    for (int i = 2 + color; i <= n; i += 5) {
                        xp[i][comp] += fd;
                        xm[i][comp] -= fd;
                    }
                    const Eigen::VectorXd gp = pack(dense_energy_gradient(rod, xp, lw));
                    const Eigen::VectorXd gm = pack(dense_energy_gradient(rod, xm, lw));
                    const Eigen::VectorXd col = (gp - gm) / (2.0 * fd);
                    for (int i = 2 + color; i <= n; i += 5) {
                        const int j = 3 * (i - 2) + comp;
                        for (int di = -2; di <= 2; ++di) {
                            const int ni = i + di;
                            if (ni < 2 || ni > n) continue;
                            for (int rc = 0; rc < 3; ++rc) {
                                const int r = 3 * (ni - 2) + rc;
                                const double v = col[r];
                                if (v != 0.0) trip.emplace_back(r, j, v);
                            }
                        }
                    }
                }
            }
            hess.setFromTriplets(trip.begin(), trip.end());

            const double e0 = dense_energy(rod, x, lw);
            bool accepted = false;
            for (int attempt = 0; attempt < 25 && !accepted; ++attempt) {
                Eigen::SparseMatrix<double> hl = hess;
                for (int d = 0; d < n_free; ++d) hl.coeffRef(d, d) += lambda;
                Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(hl);
                if (ldlt.info() != Eigen::Success) {
                    lambda = std::max(lambda * 10.0, 1e-8);
                    continue;
                }
                const Eigen::VectorXd dx = ldlt.solve(-g);
                if (!dx.allFinite()) {
                    lambda = std::max(lambda * 10.0, 1e-8);
                    continue;
                }
                std::vector<Vec3> xt = x;
                for (int i = 2; i <= n; ++i) xt[i] += dx.segment<3>(3 * (i - 2));
                const double e1 = dense_energy(rod, xt, lw);
                if (e1 < e0 + 1e-14 * std::abs(e0)) {
                    x = xt;
                    lambda = std::max(lambda * 0.25, 1e-12);
                    accepted = true;
                } else {
                    lambda = std::max(lambda * 10.0, 1e-8);
                }
            }
            if (!accepted) break;  // stalled; gradient check below decides
        }
        if (!done) {
            const Eigen::VectorXd g = pack(dense_energy_gradient(rod, x, lw));
            char msg[128];
            std::snprintf(msg, sizeof(msg),
                          "dense_equilibrium: no convergence, |grad|_inf = %.3e (tol %.3e)",
                          g.lpNorm<Eigen::Infinity>(), tol);
            if (g.lpNorm<Eigen::Infinity>() >= ((ramp == ramps) ? tol : 1e4 * tol))
                throw OracleError(msg);
        }
    }

    DenseRod out = rod;
    out.nodes = x;
    // Parallel-transport material frames along the deformed centerline.
    out.frames.assign(n + 1, Mat3::Identity());
    Vec3 prev_t(0.0, 0.0, 1.0);
    Mat3 frame = Mat3::Identity();
    for (int i = 0; i <= n; ++i) {
        Vec3 t;
        if (i == 0)
            t = (x[1] - x[0]).normalized();
        else if (i == n)
            t = (x[n] - x[n - 1]).normalized();
        else
            t = ((x[i + 1] - x[i - 1]) * 0.5).normalized();
        frame = min_rotation(prev_t, t) * frame;
        prev_t = t;
        out.frames[i] = frame;
    }
    return out;
}

std::vector<Marker> rod_markers(const DenseRod& rod, const std::vector<SegmentParams>& params) {
    std::vector<double> cum{0.0};
    for (const SegmentParams& p : params) cum.push_back(cum.back() + p.rest_length);
    const double total = cum.back();
    if (std::abs(total - rod.rest_length()) > 1e-9 * total)
        throw std::invalid_argument("rod rest length does not match the segment partition");

    std::vector<Marker> out;
    out.reserve(rod.nodes.size());
    const int n = rod.element_count();
    for (int i = 0; i <= n; ++i) {
        const double a = i * rod.element_rest_length;
        int seg = 0;
        while (seg + 1 < static_cast<int>(params.size()) && a > cum[seg + 1] + 1e-12 * total)
            ++seg;
        // Boundary nodes report as s = 1 of the earlier segment.
        if (seg + 1 < static_cast<int>(params.size()) && std::abs(a - cum[seg + 1]) <= 1e-12 * total)
            out.push_back({seg, 1.0, rod.nodes[i]});
        else
            out.push_back({seg, (a - cum[seg]) / params[seg].rest_length, rod.nodes[i]});
    }
    out.back() = {static_cast<int>(params.size()) - 1, 1.0, rod.nodes[n]};
    return out;
}

}  // namespace pacsim
