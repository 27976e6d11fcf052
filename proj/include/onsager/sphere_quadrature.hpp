#pragma once

#include "onsager/core.hpp"

#include <span>
#include <vector>

namespace onsager {

// Product rule on S²: Gauss-Legendre in cos(theta) times a uniform
// trapezoid in phi. Immutable after construction.
struct SphereGrid {
    int n_polar = 0;
    int n_azimuth = 0;
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    // Max total degree of polynomials in m integrated exactly.
    int exact_degree = 0;

    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// Requires n_polar >= 2 and n_azimuth >= 4. Exact for degree
// min(2 n_polar - 1, n_azimuth - 1).
SphereGrid build_grid(int n_polar, int n_azimuth);

// Smallest grid (n_azimuth a multiple of 4, n_polar even) exact to `degree`.
SphereGrid build_grid_for_degree(int degree);

double integrate(const SphereGrid& grid, std::span<const double> values);

// Closed-form sphere moment ∫ m1^a m2^b m3^c dm.
double sphere_monomial_moment(int a, int b, int c);

// Action of the rotational gradient R = m ∧ ∇_m on polynomials of degree <= 2,
// written through the rule R_j m_k = -eps_{jkl} m_l and the product rule.
Vec3 rotational_gradient_linear(const Vec3& u, const Vec3& m);
Vec3 rotational_gradient_quadratic(const Mat3& a, const Vec3& m);
// R · F for the linear vector field F(m) = L m.
double rotational_divergence_linear(const Mat3& l, const Vec3& m);

struct RotationalResiduals {
    double residual_a = 0.0;  // |R(m·u) - m∧u|
    double residual_b = 0.0;  // |R·(m∧u) + 2 m·u|
};

// Throws InvalidArgument unless |m| = 1 to 1e-12.
RotationalResiduals rotational_identity_check(const Vec3& u, const Vec3& m);

// Quadrature value of ∫ (R f1) f2 + f1 (R f2) dm for f1 = m·Am, f2 = m·Bm.
// Vanishes by integration by parts on the sphere.
Vec3 integration_by_parts_residual(const SphereGrid& grid, const Mat3& a, const Mat3& b);

}  // namespace onsager
