#include "onsager/harmonic_map.hpp"

#include "onsager/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace onsager {

namespace {

bool in_omega(const LatticeBox& lat, long idx) {
    return idx >= 0 && lat.domain().signed_distance(lat.position(static_cast<std::size_t>(idx)), lat.dim()) > 0.0;
}

Mask omega_mask(const LatticeBox& lat) {
    Mask m(lat.size(), 0);
    for (std::size_t i = 0; i < lat.size(); ++i) m[i] = in_omega(lat, static_cast<long>(i));
    return m;
}

// G(i, j) = ∂_j n_i: central differences, one-sided (second order when two
// points are available) at the edge of Ω.
Mat3 director_gradient(const DirectorField& n, const Mask& omega, std::size_t idx) {
    const LatticeBox& lat = n.lattice;
    const double h = lat.spacing();
    Mat3 g = Mat3::Zero();
    auto inside = [&](long j) { return j >= 0 && omega[static_cast<std::size_t>(j)]; };
    for (int a = 0; a < lat.dim(); ++a) {
        const long p = lat.neighbor(idx, a, +1);
        const long m = lat.neighbor(idx, a, -1);
        const Vec3& c = n.values[idx];
        Vec3 d = Vec3::Zero();
        if (inside(p) && inside(m)) {
            d = (n.values[p] - n.values[m]) / (2.0 * h);
        } else if (inside(p)) {
            const long pp = lat.neighbor(static_cast<std::size_t>(p), a, +1);
            d = inside(pp) ? Vec3((-3.0 * c + 4.0 * n.values[p] - n.values[pp]) / (2.0 * h)) : Vec3((n.values[p] - c) / h);
        } else if (inside(m)) {
            const long mm = lat.neighbor(static_cast<std::size_t>(m), a, -1);
            d = inside(mm) ? Vec3((3.0 * c - 4.0 * n.values[m] + n.values[mm]) / (2.0 * h)) : Vec3((c - n.values[m]) / h);
        }
        g.col(a) = d;
    }
    return g;
}

Vec3 curl_of(const Mat3& g) { return {g(2, 1) - g(1, 2), g(0, 2) - g(2, 0), g(1, 0) - g(0, 1)}; }

template <class Density>
double integrate_over_omega(const DirectorField& n, Density density) {
    const Mask omega = omega_mask(n.lattice);
    double sum = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i)
        if (omega[i]) sum += density(n.values[i], director_gradient(n, omega, i));
    return sum * n.lattice.cell_volume();
}

}  // namespace

Mask dirichlet_nodes(const LatticeBox& lat) {
    const Mask omega = omega_mask(lat);
    Mask out(lat.size(), 0);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!omega[i]) continue;
        for (int a = 0; a < lat.dim() && !out[i]; ++a)
            for (int s : {-1, 1}) {
                const long j = lat.neighbor(i, a, s);
                if (j < 0 || !omega[static_cast<std::size_t>(j)]) out[i] = 1;
            }
    }
    return out;
}

Vec3 lattice_laplacian(const DirectorField& n, std::size_t idx) {
    const LatticeBox& lat = n.lattice;
    Vec3 sum = Vec3::Zero();
    for (int a = 0; a < lat.dim(); ++a)
        for (int s : {-1, 1}) {
            const long j = lat.neighbor(idx, a, s);
            if (j < 0) throw InvalidArgument("lattice_laplacian: stencil leaves the box");
            sum += n.values[static_cast<std::size_t>(j)] - n.values[idx];
        }
    return sum / (lat.spacing() * lat.spacing());
}

HeatFlowResult heat_flow(const DirectorField& n0, double step, double tol, int max_iter,
                         const std::function<void(int, const DirectorField&)>& observer) {
    const LatticeBox& lat = n0.lattice;
    const double h = lat.spacing();
    if (!(step > 0.0) || step > h * h / (2.0 * lat.dim()) * (1.0 + 1e-12)) {
        throw InvalidArgument("heat_flow: step must lie in (0, h²/(2d)]");
    }
    const Mask omega = omega_mask(lat);
    const Mask pinned = dirichlet_nodes(lat);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!omega[i]) continue;
        if (std::abs(n0.values[i].norm() - 1.0) > 1e-12) throw InvalidArgument("heat_flow: n0 is not unit on Ω");
        if (!pinned[i]) free.push_back(i);
    }

    HeatFlowResult out;
    out.n = n0;
    DirectorField next = n0;
    std::vector<double> grad(free.size());
    for (int it = 1; it <= max_iter; ++it) {
        parallel_for(free.size(), [&](std::size_t k) {
            const std::size_t i = free[k];
            const Vec3& v = out.n.values[i];
            const Vec3 lap = lattice_laplacian(out.n, i);
            const Vec3 tangent = lap - v.dot(lap) * v;
            grad[k] = tangent.cwiseAbs().maxCoeff();
            // |w| >= 1, so the projection back to S² cannot lengthen an edge
            const Vec3 w = v + step * tangent;
            const double len = w.norm();
            if (len < 1e-12) throw ZeroVector("heat_flow: normalization of a vanishing vector");
            next.values[i] = w / len;
        });
        out.iterations = it;
        out.gradient = grad.empty() ? 0.0 : *std::max_element(grad.begin(), grad.end());
        if (out.gradient <= tol) return out;
        std::swap(out.n.values, next.values);
        if (observer) observer(it, out.n);
    }
    throw NonConvergence("heat_flow: projected gradient " + std::to_string(out.gradient) + " after " +
                         std::to_string(max_iter) + " steps");
}

double weak_residual(const DirectorField& n, int test_resolution) {
    const LatticeBox& lat = n.lattice;
    if (test_resolution < 1) throw InvalidArgument("weak_residual: test_resolution must be positive");
    const Mask omega = omega_mask(lat);
    const Mask pinned = dirichlet_nodes(lat);
    const double h = lat.spacing();
    const int r = test_resolution;
    const int d = lat.dim();
    const int nn = lat.nodes_per_axis();

    // w_a(x) = n ∧ D_a⁺ n on edges inside Ω
    std::vector<std::array<Vec3, 3>> w(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!omega[i]) continue;
        for (int a = 0; a < d; ++a) {
            const long j = lat.neighbor(i, a, +1);
            w[i][a] = (j >= 0 && omega[j]) ? Vec3(n.values[i].cross((n.values[j] - n.values[i]) / h)) : Vec3::Zero();
        }
    }

    double worst = 0.0;
    const int kz = d == 3 ? nn : 1;
    for (int cz = 0; cz < kz; cz += (d == 3 ? r : 1))
        for (int cy = 0; cy < nn; cy += r)
            for (int cx = 0; cx < nn; cx += r) {
                const std::array<int, 3> c{cx, cy, cz};
                auto phi = [&](const std::array<int, 3>& p) {
                    double v = 1.0;
                    for (int a = 0; a < d; ++a) v *= std::max(0.0, 1.0 - std::abs(p[a] - c[a]) / double(r));
                    return v;
                };
                // the support must sit on free nodes
                std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
                bool ok = true;
                for (int a = 0; a < d; ++a) {
                    lo[a] = c[a] - r + 1;
                    hi[a] = c[a] + r - 1;
                    if (lo[a] < 0 || hi[a] >= nn) ok = false;
                }
                if (!ok) continue;
                for (int z = lo[2]; z <= hi[2] && ok; ++z)
                    for (int y = lo[1]; y <= hi[1] && ok; ++y)
                        for (int x = lo[0]; x <= hi[0] && ok; ++x) {
                            const std::size_t i = lat.ravel(x, y, z);
                            if (!omega[i] || pinned[i]) ok = false;
                        }
                if (!ok) continue;
                Vec3 sum = Vec3::Zero();
                for (int z = lo[2] - (d == 3); z <= hi[2]; ++z)
                    for (int y = lo[1] - 1; y <= hi[1]; ++y)
                        for (int x = lo[0] - 1; x <= hi[0]; ++x) {
                            const std::array<int, 3> p{x, y, z};
                            const std::size_t i = lat.ravel(x, y, z);
                            for (int a = 0; a < d; ++a) {
                                std::array<int, 3> q = p;
                                ++q[a];
                                const double dphi = (phi(q) - phi(p)) / h;
                                if (dphi != 0.0) sum += dphi * w[i][a];
                            }
                        }
                worst = std::max(worst, sum.cwiseAbs().maxCoeff() * lat.cell_volume());
            }
    return worst;
}

double lattice_dirichlet_energy(const DirectorField& n) {
    const LatticeBox& lat = n.lattice;
    const Mask omega = omega_mask(lat);
    const double h = lat.spacing();
    double sum = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!omega[i]) continue;
        for (int a = 0; a < lat.dim(); ++a) {
            const long j = lat.neighbor(i, a, +1);
            if (j >= 0 && omega[j]) sum += (n.values[j] - n.values[i]).squaredNorm();
        }
    }
    return 0.5 * sum / (h * h) * lat.cell_volume();
}

double dirichlet_energy(const DirectorField& n) {
    return integrate_over_omega(n, [](const Vec3&, const Mat3& g) { return 0.5 * g.squaredNorm(); });
}

double oseen_frank_energy(const DirectorField& n, const OFConstants& c) {
    return integrate_over_omega(n, [&](const Vec3& v, const Mat3& g) {
        const double div = g.trace();
        const Vec3 curl = curl_of(g);
        const double twist = v.dot(curl);
        const double bend = v.cross(curl).squaredNorm();
        const double saddle = (g * g).trace() - div * div;
        return 0.5 * c.k1 * div * div + 0.5 * c.k2 * twist * twist + 0.5 * c.k3 * bend + 0.5 * (c.k2 + c.k4) * saddle;
    });
}

double saddle_splay_integral(const DirectorField& n) {
    return integrate_over_omega(n, [](const Vec3&, const Mat3& g) { return (g * g).trace() - g.trace() * g.trace(); });
}

double compare_directors(const DirectorField& n_a, const DirectorField& n_b, const Mask& region) {
    if (n_a.values.size() != n_b.values.size() || region.size() != n_a.values.size())
        throw InvalidArgument("compare_directors: size mismatch");
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < region.size(); ++i) {
        if (!region[i]) continue;
        plus += (n_a.values[i] - n_b.values[i]).squaredNorm();
        minus += (n_a.values[i] + n_b.values[i]).squaredNorm();
    }
    return std::sqrt(std::min(plus, minus) * n_a.lattice.cell_volume());
}

DirectorField restrict_to_omega(const LatticeBox& lat, const std::function<Vec3(const Vec3&)>& profile) {
    DirectorField n(lat);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!in_omega(lat, static_cast<long>(i))) continue;
        n.values[i] = profile(lat.position(i));
        n.defined[i] = 1;
    }
    return n;
}

HeatFlowResult harmonic_reference(const LatticeBox& lat, const std::function<Vec3(const Vec3&)>& profile, double tol,
                                  int max_iter) {
    const double h = lat.spacing();
    return heat_flow(restrict_to_omega(lat, profile), h * h / (2.0 * lat.dim()), tol, max_iter);
}

}  // namespace onsager
