#include "onsager/sphere_quadrature.hpp"

#include <cmath>
#include <string>

namespace onsager {

namespace {

constexpr int kLeviCivita[3][3][3] = {
    {{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
    {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
    {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}},
};

// R_j m_k = -eps_{jkl} m_l
double rot_of_coordinate(int j, int k, const Vec3& m) {
    double r = 0.0;
    for (int l = 0; l < 3; ++l) r -= kLeviCivita[j][k][l] * m(l);
    return r;
}

double double_factorial(int n) {
    double r = 1.0;
    for (int k = n; k > 1; k -= 2) r *= k;
    return r;
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // one more derivative evaluation at the converged root
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
}

SphereGrid build_grid(int n_polar, int n_azimuth) {
    if (n_polar < 2 || n_azimuth < 4) {
        throw InvalidArgument("build_grid: need n_polar >= 2 and n_azimuth >= 4, got " +
                              std::to_string(n_polar) + ", " + std::to_string(n_azimuth));
    }
    SphereGrid g;
    g.n_polar = n_polar;
    g.n_azimuth = n_azimuth;
    g.exact_degree = std::min(2 * n_polar - 1, n_azimuth - 1);

    std::vector<double> z, wz;
    gauss_legendre(n_polar, z, wz);
    g.nodes.reserve(static_cast<std::size_t>(n_polar) * n_azimuth);
    g.weights.reserve(g.nodes.capacity());
    const double dphi = 2.0 * kPi / n_azimuth;
    for (int i = 0; i < n_polar; ++i) {
        const double st = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
        for (int j = 0; j < n_azimuth; ++j) {
            const double phi = j * dphi;
            Vec3 m(st * std::cos(phi), st * std::sin(phi), z[i]);
            m.normalize();
            g.nodes.push_back(m);
            g.weights.push_back(wz[i] * dphi);
        }
    }
    return g;
}

SphereGrid build_grid_for_degree(int degree) {
    int n_polar = std::max(2, (degree + 2) / 2);
    if (n_polar % 2) ++n_polar;
    int n_azimuth = std::max(4, degree + 1);
    n_azimuth = (n_azimuth + 3) / 4 * 4;
    return build_grid(n_polar, n_azimuth);
}

double integrate(const SphereGrid& grid, std::span<const double> values) {
    if (values.size() != grid.size()) {
        throw InvalidArgument("integrate: got " + std::to_string(values.size()) +
                              " values for " + std::to_string(grid.size()) + " nodes");
    }
    double sum = 0.0;
    for (std::size_t q = 0; q < values.size(); ++q) sum += grid.weights[q] * values[q];
    return sum;
}

double sphere_monomial_moment(int a, int b, int c) {
    if (a % 2 || b % 2 || c % 2) return 0.0;
    // 4π (a-1)!!(b-1)!!(c-1)!! / (a+b+c+1)!!
    return kFourPi * double_factorial(a - 1) * double_factorial(b - 1) * double_factorial(c - 1) /
           double_factorial(a + b + c + 1);
}

Vec3 rotational_gradient_linear(const Vec3& u, const Vec3& m) {
    Vec3 r = Vec3::Zero();
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r(j) += u(k) * rot_of_coordinate(j, k, m);
    return r;
}

Vec3 rotational_gradient_quadratic(const Mat3& a, const Vec3& m) {
    // R_j (m_p A_pq m_q) = A_pq (R_j m_p) m_q + A_pq m_p (R_j m_q)
    Vec3 r = Vec3::Zero();
    for (int j = 0; j < 3; ++j)
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q)
                r(j) += a(p, q) * (rot_of_coordinate(j, p, m) * m(q) + m(p) * rot_of_coordinate(j, q, m));
    return r;
}

double rotational_divergence_linear(const Mat3& l, const Vec3& m) {
    double r = 0.0;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r += l(j, k) * rot_of_coordinate(j, k, m);
    return r;
}

RotationalResiduals rotational_identity_check(const Vec3& u, const Vec3& m) {
    if (std::abs(m.norm() - 1.0) > 1e-12) {
        throw InvalidArgument("rotational_identity_check: m is not a unit vector");
    }
    RotationalResiduals res;
    res.residual_a = (rotational_gradient_linear(u, m) - m.cross(u)).norm();
    // m ∧ u = L m with L_jk = eps_{jkl} u_l
    Mat3 l = Mat3::Zero();
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            for (int q = 0; q < 3; ++q) l(j, k) += kLeviCivita[j][k][q] * u(q);
    res.residual_b = std::abs(rotational_divergence_linear(l, m) + 2.0 * m.dot(u));
    return res;
}

Vec3 integration_by_parts_residual(const SphereGrid& grid, const Mat3& a, const Mat3& b) {
    Vec3 sum = Vec3::Zero();
    for (std::size_t q = 0; q < grid.size(); ++q) {
        const Vec3& m = grid.nodes[q];
        const double f1 = m.dot(a * m);
        const double f2 = m.dot(b * m);
        sum += grid.weights[q] * (rotational_gradient_quadratic(a, m) * f2 + f1 * rotational_gradient_quadratic(b, m));
    }
    return sum;
}

}  // namespace onsager
