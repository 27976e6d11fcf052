#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "onsager/sphere_quadrature.hpp"
#include "oracles.hpp"

#include <random>

using namespace onsager;

namespace {

double monomial(const Vec3& m, int a, int b, int c) {
    return std::pow(m(0), a) * std::pow(m(1), b) * std::pow(m(2), c);
}

double quad_monomial(const SphereGrid& g, int a, int b, int c) {
    std::vector<double> v(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) v[q] = monomial(g.nodes[q], a, b, c);
    return integrate(g, v);
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Vec3 v(n(rng), n(rng), n(rng));
    return v.normalized();
}

}  // namespace

TEST_CASE("gauss-legendre integrates x^k exactly up to 2n-1") {
    std::vector<double> x, w;
    for (int n : {1, 2, 5, 12, 24}) {
        gauss_legendre(n, x, w);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
            const double exact = (k % 2) ? 0.0 : 2.0 / (k + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("default grid: weights and exact degree") {
    const SphereGrid g = build_grid(24, 48);
    CHECK(g.size() == 24u * 48u);
    CHECK(g.exact_degree == 47);
    double total = 0.0;
    for (double w : g.weights) {
        CHECK(w > 0.0);
        total += w;
    }
    CHECK(total == doctest::Approx(4.0 * oracle::pi).epsilon(1e-12 / (4.0 * oracle::pi)));
    for (const Vec3& m : g.nodes) CHECK(m.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("monomial moments are exact through the stated degree") {
    for (auto [np, na] : {std::pair{6, 12}, std::pair{10, 16}, std::pair{24, 48}}) {
        const SphereGrid g = build_grid(np, na);
        double worst = 0.0;
        for (int a = 0; a <= g.exact_degree; ++a)
            for (int b = 0; a + b <= g.exact_degree; ++b)
                for (int c = 0; a + b + c <= g.exact_degree; ++c) {
                    const double exact = sphere_monomial_moment(a, b, c);
                    worst = std::max(worst, std::abs(quad_monomial(g, a, b, c) - exact));
                }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("closed form moments against low order hand values") {
    CHECK(sphere_monomial_moment(0, 0, 0) == doctest::Approx(4.0 * oracle::pi));
    CHECK(sphere_monomial_moment(2, 0, 0) == doctest::Approx(4.0 * oracle::pi / 3.0));
    CHECK(sphere_monomial_moment(2, 2, 0) == doctest::Approx(4.0 * oracle::pi / 15.0));
    CHECK(sphere_monomial_moment(4, 0, 0) == doctest::Approx(4.0 * oracle::pi / 5.0));
    CHECK(sphere_monomial_moment(1, 0, 0) == 0.0);
}

TEST_CASE("a degree past the exact range is not integrated exactly") {
    const SphereGrid g = build_grid(4, 8);
    // azimuth limit: cos(8 phi) content of x^8
    CHECK(std::abs(quad_monomial(g, 8, 0, 0) - sphere_monomial_moment(8, 0, 0)) > 1e-6);
}

TEST_CASE("grid for degree") {
    for (int d : {10, 30, 47, 61, 120}) {
        const SphereGrid g = build_grid_for_degree(d);
        CHECK(g.exact_degree >= d);
        CHECK(g.n_polar % 2 == 0);
        CHECK(g.n_azimuth % 4 == 0);
    }
}

TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(build_grid(1, 8), InvalidArgument);
    CHECK_THROWS_AS(build_grid(4, 3), InvalidArgument);
    const SphereGrid g = build_grid(4, 8);
    std::vector<double> v(g.size() - 1, 1.0);
    CHECK_THROWS_AS(integrate(g, v), InvalidArgument);
    CHECK_THROWS_AS(rotational_identity_check(Vec3(1, 0, 0), Vec3(1, 1, 0)), InvalidArgument);
}

TEST_CASE("rotational gradient identities at random points") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n;
    for (int k = 0; k < 200; ++k) {
        const Vec3 m = random_unit(rng);
        const Vec3 u(n(rng), n(rng), n(rng));
        const RotationalResiduals r = rotational_identity_check(u, m);
        CHECK(r.residual_a < 1e-13);
        CHECK(r.residual_b < 1e-13);
    }
}

TEST_CASE("rotational gradient of a quadratic matches a finite rotation") {
    // R_j f(m) = d/dt f(exp(t e_j∧) m) at t = 0
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int k = 0; k < 20; ++k) {
        Mat3 a;
        for (int i = 0; i < 9; ++i) a.data()[i] = n(rng);
        const Vec3 m = random_unit(rng);
        const Vec3 r = rotational_gradient_quadratic(a, m);
        for (int j = 0; j < 3; ++j) {
            const double t = 1e-5;
            const Vec3 axis = Vec3::Unit(j);
            const Vec3 mp = Eigen::AngleAxisd(t, axis) * m;
            const Vec3 mm = Eigen::AngleAxisd(-t, axis) * m;
            const double fd = (mp.dot(a * mp) - mm.dot(a * mm)) / (2 * t);
            CHECK(r(j) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("integration by parts on the sphere") {
    const SphereGrid g = build_grid(24, 48);
    std::mt19937_64 rng(23);
    std::normal_distribution<double> n;
    for (int k = 0; k < 10; ++k) {
        Mat3 a, b;
        for (int i = 0; i < 9; ++i) {
            a.data()[i] = n(rng);
            b.data()[i] = n(rng);
        }
        CHECK(integration_by_parts_residual(g, a, b).norm() < 1e-12);
    }
}

TEST_CASE("fourth moment along any axis and a Gaussian-type integrand") {
    const SphereGrid g = build_grid(24, 48);
    std::mt19937_64 rng(41);
    for (int k = 0; k < 10; ++k) {
        const Vec3 nu = random_unit(rng);
        std::vector<double> v(g.size());
        for (std::size_t q = 0; q < g.size(); ++q) v[q] = std::pow(g.nodes[q].dot(nu), 4);
        CHECK(integrate(g, v) == doctest::Approx(4.0 * oracle::pi / 5.0).epsilon(1e-13));
    }
    std::vector<double> v(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) v[q] = std::exp(g.nodes[q](2) * g.nodes[q](2));
    const double ref = 4.0 * oracle::pi * oracle::adaptive_simpson([](double z) { return std::exp(z * z); }, 0.0, 1.0, 1e-14);
    CHECK(integrate(g, v) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("hand-checked cross product case") {
    const RotationalResiduals r = rotational_identity_check(Vec3(0, 0, 1), Vec3(1, 0, 0));
    CHECK(r.residual_a == 0.0);
    CHECK(r.residual_b == 0.0);
    CHECK((rotational_gradient_linear(Vec3(0, 0, 1), Vec3(1, 0, 0)) - Vec3(0, -1, 0)).norm() == 0.0);
    const Vec3 m = Vec3(1, 2, 2) / 3.0;
    CHECK(rotational_identity_check(m, m).residual_a < 1e-15);
}
