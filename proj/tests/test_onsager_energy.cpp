#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "onsager/onsager_energy.hpp"
#include "oracles.hpp"

#include <random>

using namespace onsager;

namespace {

const KernelSpec kSpec(2, oracle::pi / 2);
const double kAlpha = 8.0;

struct Fixture {
    BinghamEvaluator eval{build_grid(24, 48)};
    double eta = eta1(kAlpha);

    LatticeBox lattice(int nodes_across, double eps_max) const {
        return make_lattice(2, 3.0, nodes_across, Domain{}, kSpec.truncation_radius(eps_max));
    }
};

Mat3 random_traceless(std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> nd;
    Mat3 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = nd(rng);
    return scale * traceless(symmetrize(a));
}

Mat3 rotation(double angle, Vec3 axis) { return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(); }

}  // namespace

TEST_CASE("cutoff profile") {
    CHECK(cutoff(0.0, 3.0) == 1.0);
    CHECK(cutoff(1.5, 3.0) == 1.0);
    CHECK(cutoff(3.0, 3.0) == 0.0);
    CHECK(cutoff(7.0, 3.0) == 0.0);
    double prev = 1.0;
    for (double r = 1.5; r <= 3.0; r += 0.01) {
        CHECK(cutoff(r, 3.0) <= prev);
        prev = cutoff(r, 3.0);
    }
}

TEST_CASE("boundary data") {
    Fixture fx;
    const LatticeBox lat = fx.lattice(16, 0.01);
    SUBCASE("constant director gives the uniaxial branch state on Ω") {
        const auto bd = make_boundary(lat, named_profile("constant"), fx.eta, fx.eval);
        const Vec3 e3(0, 0, 1);
        const Mat3 target = oracle::series_s2(fx.eta) * (e3 * e3.transpose() - Mat3::Identity() / 3.0);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            const Vec3 x = lat.position(i);
            if (lat.domain().signed_distance(x, 2) > 0.0) {
                CHECK(bd->n_b.values[i].norm() == doctest::Approx(1.0).epsilon(1e-14));
                CHECK((bd->q.values[i] - target).norm() < 1e-8);
            }
            if (x.norm() >= 3.0) {
                CHECK(bd->q.values[i].norm() == 0.0);
                CHECK(bd->n_b.values[i].norm() == 0.0);
            }
            CHECK(is_qtensor(bd->q.values[i], 1e-12));
        }
    }
    SUBCASE("planar profile is unit on Ω") {
        const auto bd = make_boundary(lat, named_profile("planar"), fx.eta, fx.eval);
        for (std::size_t i = 0; i < lat.size(); ++i)
            if (lat.domain().signed_distance(lat.position(i), 2) > 0.0) {
                CHECK(bd->n_b.values[i].norm() == doctest::Approx(1.0).epsilon(1e-14));
                CHECK(bd->n_b.values[i](2) == 0.0);
            }
    }
    SUBCASE("non-unit profile on Ω is rejected") {
        CHECK_THROWS_AS(make_boundary(lat, [](const Vec3&) { return Vec3(0, 0, 0.9); }, fx.eta, fx.eval),
                        InvalidArgument);
    }
    SUBCASE("unknown profile name") { CHECK_THROWS_AS(named_profile("spiral"), InvalidArgument); }
}

TEST_CASE("nonlocal form matches the brute-force double sum") {
    // 8x8 patch of random Q-tensors padded by zeros
    const double h = 1.0 / 8.0;
    const LatticeBox lat(2, 1.0, h, 40, Domain{});
    std::mt19937_64 rng(11);
    QTensorField u(lat);
    std::vector<std::array<int, 2>> patch;
    for (int j = 16; j < 24; ++j)
        for (int i = 16; i < 24; ++i) {
            u.values[lat.ravel(i, j, 0)] = random_traceless(rng, 0.3);
            patch.push_back({i, j});
        }
    for (double eps : {0.01, 0.03}) {
        // the sampled kernel with its mass over all of Z²
        auto kern = [&](int di, int dj) { return kSpec.g_eps((di * di + dj * dj) * h * h, eps) * h * h; };
        double mass = 0.0;
        for (int di = -60; di <= 60; ++di)
            for (int dj = -60; dj <= 60; ++dj) mass += kern(di, dj);
        double brute = 0.0;
        for (const auto& p : patch) {
            const Mat3& ux = u.values[lat.ravel(p[0], p[1], 0)];
            double inside = 0.0;
            for (const auto& q : patch) {
                const double k = kern(p[0] - q[0], p[1] - q[1]) / mass;
                inside += k;
                brute += (ux - u.values[lat.ravel(q[0], q[1], 0)]).squaredNorm() * k * h * h;
            }
            // pairs with the zero field outside the patch
            brute += 2.0 * ux.squaredNorm() * (1.0 - inside) * h * h;
        }
        CHECK(nonlocal_form(u, kSpec, eps) == doctest::Approx(brute).epsilon(1e-10));
        CHECK(nonlocal_form(u, kSpec, eps) >= 0.0);
    }
}

TEST_CASE("energy of the boundary state") {
    Fixture fx;
    const LatticeBox lat = fx.lattice(32, 0.02);
    const auto bd = make_boundary(lat, named_profile("constant"), fx.eta, fx.eval);
    const BinghamMoments hom = fx.eval.evaluate(BinghamParam::uniaxial(fx.eta, Vec3(0, 0, 1)));
    const double vol = lat.domain().volume(2);

    SUBCASE("homogeneous part plus the boundary deficit of the convolution") {
        for (double eps : {0.02, 0.005}) {
            const State s = boundary_state(bd, eps, kAlpha, 0.25);
            const EnergyReport r = energy(s, fx.eval, kSpec);
            const double nodes_vol = s.masks.omega_nodes.size() * lat.cell_volume();
            CHECK(nodes_vol == doctest::Approx(vol).epsilon(1e-12));
            // 1_Ω * g_ε integrated over Ω falls short of |Ω| by the mass leaking out
            const double deficit = nodes_vol - 3.0 * r.c1 / kAlpha;
            const double q2 = hom.q.squaredNorm();
            const double expected =
                nodes_vol * homogeneous_energy(hom, kAlpha) + (0.5 * kAlpha * q2 - kAlpha / 3.0) * deficit;
            CHECK(r.total == doctest::Approx(expected).epsilon(1e-12));
            CHECK(r.entropy == doctest::Approx(nodes_vol * hom.entropy).epsilon(1e-12));
            CHECK(r.bulk == doctest::Approx(-0.5 * kAlpha * q2 * nodes_vol).epsilon(1e-12));
        }
    }
    SUBCASE("nonlocal term is positive and vanishes as eps decreases") {
        double prev = 1e300, first = 0.0;
        for (double eps : {0.02, 0.005, 0.00125}) {
            const double nl = energy(boundary_state(bd, eps, kAlpha, 0.25), fx.eval, kSpec).nonlocal;
            CHECK(nl > 0.0);
            CHECK(nl < prev);
            if (first == 0.0) first = nl;
            prev = nl;
        }
        // boundary layer of width √ε
        CHECK(prev < 0.3 * first);
    }
    SUBCASE("interaction terms are linear in alpha") {
        const EnergyReport a = energy(boundary_state(bd, 0.005, kAlpha, 0.25), fx.eval, kSpec);
        const EnergyReport b = energy(boundary_state(bd, 0.005, 2.0 * kAlpha, 0.25), fx.eval, kSpec);
        CHECK(b.entropy == a.entropy);
        CHECK(b.bulk == 2.0 * a.bulk);
        CHECK(b.nonlocal == 2.0 * a.nonlocal);
        CHECK(b.c1 == 2.0 * a.c1);
        CHECK((b.total - b.entropy) == doctest::Approx(2.0 * (a.total - a.entropy)).epsilon(1e-14));
    }
    SUBCASE("C1 does not depend on the state") {
        State s = boundary_state(bd, 0.005, kAlpha, 0.25);
        const double c1 = energy(s, fx.eval, kSpec).c1;
        std::mt19937_64 rng(3);
        for (std::size_t i : s.masks.inner_nodes) {
            s.b[i] = random_traceless(rng, 2.0);
            s.q.values[i] = fx.eval.evaluate(BinghamParam(s.b[i])).q;
        }
        CHECK(energy(s, fx.eval, kSpec).c1 == c1);
    }
}

TEST_CASE("frame indifference") {
    Fixture fx;
    const LatticeBox lat = fx.lattice(16, 0.01);
    const Mat3 rot = rotation(0.7, Vec3(1, -2, 0.5));
    const auto planar = named_profile("planar");
    const auto a = make_boundary(lat, planar, fx.eta, fx.eval);
    const auto b = make_boundary(lat, [&](const Vec3& x) { return Vec3(rot * planar(x)); }, fx.eta, fx.eval);
    State sa = boundary_state(a, 0.01, kAlpha, 0.25);
    State sb = boundary_state(b, 0.01, kAlpha, 0.25);
    std::mt19937_64 rng(8);
    for (std::size_t i : sa.masks.inner_nodes) {
        sa.b[i] = random_traceless(rng, 3.0);
        sb.b[i] = BinghamParam(rot * sa.b[i] * rot.transpose()).matrix();
        sa.q.values[i] = fx.eval.evaluate(BinghamParam(sa.b[i])).q;
        sb.q.values[i] = fx.eval.evaluate(BinghamParam(sb.b[i])).q;
    }
    const EnergyReport ea = energy(sa, fx.eval, kSpec);
    const EnergyReport eb = energy(sb, fx.eval, kSpec);
    CHECK(eb.total == doctest::Approx(ea.total).epsilon(1e-10));
    CHECK(eb.nonlocal == doctest::Approx(ea.nonlocal).epsilon(1e-10));
}

TEST_CASE("a-priori quantity") {
    Fixture fx;
    const LatticeBox lat = fx.lattice(32, 0.02);
    SUBCASE("boundary state: local term vanishes, the rest is the nonlocal form") {
        const auto bd = make_boundary(lat, named_profile("planar"), fx.eta, fx.eval);
        const State s = boundary_state(bd, 0.01, kAlpha, 0.25);
        const double q = apriori_quantity(s, fx.eval, kSpec);
        CHECK(q == doctest::Approx(kAlpha / (2.0 * 0.01) * nonlocal_form(s.q, kSpec, 0.01)).epsilon(1e-13));
    }
    SUBCASE("bounded as eps halves") {
        const auto bd = make_boundary(lat, named_profile("planar"), fx.eta, fx.eval);
        double prev = 0.0;
        for (double eps : {0.02, 0.01, 0.005}) {
            const double q = apriori_quantity(boundary_state(bd, eps, kAlpha, 0.25), fx.eval, kSpec);
            CHECK(q > 0.0);
            if (prev > 0.0) {
                CHECK(q / prev < 2.0);
                CHECK(q / prev > 0.5);
            }
            prev = q;
        }
    }
}

TEST_CASE("minimality gap") {
    Fixture fx;
    const LatticeBox lat = fx.lattice(16, 0.01);
    const auto bd = make_boundary(lat, named_profile("constant"), fx.eta, fx.eval);
    State s = boundary_state(bd, 0.01, kAlpha, 0.25);
    CHECK(minimality_gap(s, fx.eval, kSpec) == 0.0);
    std::mt19937_64 rng(4);
    for (std::size_t i : s.masks.inner_nodes) {
        s.b[i] = random_traceless(rng, 6.0);
        s.q.values[i] = fx.eval.evaluate(BinghamParam(s.b[i])).q;
    }
    CHECK(minimality_gap(s, fx.eval, kSpec) > 0.0);
}

TEST_CASE("admissibility is enforced") {
    Fixture fx;
    const LatticeBox lat = fx.lattice(16, 0.01);
    const auto bd = make_boundary(lat, named_profile("constant"), fx.eta, fx.eval);
    State s = boundary_state(bd, 0.01, kAlpha, 0.25);
    CHECK_NOTHROW(check_admissible(s));
    const std::size_t pinned = s.masks.omega_nodes.front();
    REQUIRE(!s.masks.inner[pinned]);
    s.q.values[pinned](0, 1) += 1e-15;
    CHECK_THROWS_AS(energy(s, fx.eval, kSpec), InvariantViolation);
}

TEST_CASE("csv row") {
    EnergyReport r;
    r.eps = 0.5;
    r.total = -1.25;
    const std::string row = energy_csv_row(r);
    CHECK(std::count(row.begin(), row.end(), ',') == 9);
    CHECK(row.rfind("0.5,0,", 0) == 0);
    const std::string header = energy_csv_header();
    CHECK(std::count(header.begin(), header.end(), ',') == 9);
}
