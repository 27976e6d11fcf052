// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.

#include "onsager/bingham.hpp"
#include "onsager/harmonic_map.hpp"
#include "onsager/kernel_ops.hpp"
#include "onsager/minimizer.hpp"
#include "onsager/onsager_energy.hpp"
#include "onsager/sphere_quadrature.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace onsager;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

const double kA = oracle::pi / 2;
const double kAlpha = 8.0;

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    return Vec3(nd(rng), nd(rng), nd(rng)).normalized();
}

LatticeBox periodic_box(int n, double h) { return LatticeBox(2, 1.0, h, n, Domain{}); }

ScalarField band_limited(const LatticeBox& lat, std::mt19937_64& rng, int kmax, int modes = 12) {
    std::uniform_int_distribution<int> kd(-kmax, kmax);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * oracle::pi);
    std::normal_distribution<double> amp;
    ScalarField f(lat.size(), 0.0);
    for (int m = 0; m < modes; ++m) {
        const double kx = kd(rng), ky = kd(rng), p = ph(rng), c = amp(rng);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const Vec3 x = lat.position(i);
            f[i] += c * std::cos(2.0 * oracle::pi * (kx * x(0) + ky * x(1)) / lat.length() + p);
        }
    }
    return f;
}

// Ω = unit square, 64 nodes across, box sized for the widest kernel used.
LatticeBox solver_lattice(double eps_max) {
    return make_lattice(2, 3.0, 64, Domain{}, KernelSpec(2, kA).truncation_radius(eps_max));
}

Outcome phase_anchors() {
    const double a0 = alpha_of_eta(0.0);
    const EtaStar star = eta_star();
    // independent series evaluation near the minimum
    double series_min = 1e300;
    for (int k = 0; k <= 4000; ++k) series_min = std::min(series_min, oracle::series_alpha(1.0 + 3.0 * k / 4000));
    const bool ok = std::abs(a0 - 7.5) <= 1e-9 && std::abs(star.alpha - 6.7314) <= 5e-3 &&
                    std::abs(star.alpha - series_min) <= 1e-6;
    return {ok, "alpha(0)=" + std::to_string(a0) + " min alpha=" + std::to_string(star.alpha) + " at eta=" +
                    std::to_string(star.eta) + " (series scan " + std::to_string(series_min) + ")"};
}

Outcome orientation_identity() {
    const BinghamEvaluator eval(build_grid(24, 48));
    double worst = 0.0, worst_quad = 0.0;
    for (double eta : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
        const double ratio = eta / alpha_of_eta(eta);
        worst = std::max(worst, std::abs(s2_of_eta(eta) - ratio));
        // degree of orientation from the sphere quadrature of the Bingham state
        const Mat3 q = eval.evaluate(BinghamParam::uniaxial(eta, Vec3::UnitZ())).q;
        worst_quad = std::max(worst_quad, std::abs(1.5 * q(2, 2) - ratio));
        worst = std::max(worst, std::abs(oracle::series_s2(eta) - eta / oracle::series_alpha(eta)));
    }
    return {worst <= 1e-8 && worst_quad <= 1e-8,
            "max |s2 - eta/alpha| = " + sci(worst) + ", via sphere quadrature " + sci(worst_quad)};
}

Outcome uniaxial_moment() {
    const SphereGrid grid = build_grid(24, 48);
    const double eta = eta1(kAlpha);
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const Vec3 nu = random_unit(rng);
        const Mat3 q = moment_Q(BinghamParam::uniaxial(eta, nu), grid);
        worst = std::max(worst, (q - (eta / kAlpha) * (nu * nu.transpose() - Mat3::Identity() / 3.0)).norm());
    }
    return {worst <= 1e-8, "eta1=" + std::to_string(eta) + ", max Frobenius error " + sci(worst)};
}

Outcome homogeneous_minimizer() {
    const SphereGrid grid = build_grid(24, 48);
    const HomogeneousMinimum m = minimize_homogeneous(kAlpha, grid, 12, 3);
    const double uni = uniaxiality_residual(m.q);
    const double s = director_extract(m.q).s;
    const double target = eta1(kAlpha) / kAlpha;
    return {uni <= 1e-6 && std::abs(s - target) <= 1e-6,
            "uniaxiality residual " + sci(uni) + ", |s - eta1/alpha| = " + sci(std::abs(s - target))};
}

Outcome kernel_assumptions() {
    const KernelSpec spec(2, kA);
    const int n = 401;
    double lo = 1.0, hi = 0.0, margin = -1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = -8.0 + 16.0 * i / (n - 1), y = -8.0 + 16.0 * j / (n - 1);
            const double xi2 = x * x + y * y;
            // closed form of the transform, independent of the library
            const double g = std::exp(-oracle::pi * oracle::pi * xi2 / kA);
            lo = std::min(lo, g);
            hi = std::max(hi, g);
            margin = std::max(margin, (oracle::pi * oracle::pi / kA) * xi2 * g * g - (1.0 - g));
            margin = std::max(margin, std::abs(spec.ghat(xi2) - g) - 1e-15);
        }
    const double mu = mu_quadrature(spec, 1.0, 0.05, 8.0);
    const double mu_err = std::abs(mu - 2.0 / (2.0 * kA));
    return {lo >= 0.0 && hi <= 1.0 && margin <= 0.0 && mu_err <= 1e-10,
            "ghat in [" + sci(lo) + ", " + sci(hi) + "], max violation " + sci(margin) + ", |mu - d/2a| = " +
                sci(mu_err)};
}

Outcome factorization() {
    const KernelSpec spec(2, kA);
    const LatticeBox lat = periodic_box(64, 1.0 / 16);
    std::mt19937_64 rng(21);
    double worst = 0.0;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const ScalarField u = band_limited(lat, rng, 12);
        ScalarField diff = A_eps(lat, u, spec, eps, BoundaryMode::Periodic);
        const auto t = T_eps(lat, u, spec, eps);
        for (int k = 0; k < 2; ++k) {
            const ComplexField tt = T_eps_component(lat, t[k], k, spec, eps);
            for (std::size_t i = 0; i < u.size(); ++i) diff[i] -= tt[i].real();
        }
        worst = std::max(worst, l2_norm(lat, diff) / l2_norm(lat, u));
    }
    return {worst <= 1e-10, "max relative residual " + sci(worst)};
}

Outcome t_limit() {
    const KernelSpec spec(2, kA);
    const LatticeBox lat = periodic_box(256, 1.0 / 32);
    const double b = 4.0;
    const double cstar = std::sqrt(spec.mu() / 4.0);
    ScalarField u(lat.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(-b * lat.position(i).squaredNorm());
    std::vector<double> errs;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const auto t = T_eps(lat, u, spec, eps);
        std::vector<ComplexField> e(2, ComplexField(u.size()));
        for (int k = 0; k < 2; ++k)
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double grad = -2.0 * b * lat.position(i)(k) * u[i];
                e[k][i] = t[k][i] + std::complex<double>(0.0, cstar) * grad;
            }
        errs.push_back(l2_norm(lat, e));
    }
    const bool ok = errs[1] < errs[0] && errs[2] < errs[1] && errs[1] / errs[0] <= 0.2 && errs[2] / errs[1] <= 0.2;
    return {ok, "E = " + sci(errs[0]) + ", " + sci(errs[1]) + ", " + sci(errs[2])};
}

Outcome commutator() {
    const KernelSpec spec(2, kA);
    const LatticeBox lat = periodic_box(128, 1.0 / 16);
    ScalarField phi(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) phi[i] = std::exp(-2.0 * lat.position(i).squaredNorm());
    std::mt19937_64 rng(31);
    std::vector<double> worst;
    for (double eps : {1.0, 1e-2, 1e-4}) {
        double w = 0.0;
        for (int k = 0; k < 20; ++k) w = std::max(w, commutator_diag(lat, phi, band_limited(lat, rng, 8), spec, eps).norm_ratio);
        worst.push_back(w);
    }
    const double lo = *std::min_element(worst.begin(), worst.end());
    const double hi = *std::max_element(worst.begin(), worst.end());
    return {lo > 0.0 && hi / lo < 10.0,
            "max ratios " + sci(worst[0]) + ", " + sci(worst[1]) + ", " + sci(worst[2]) + " (spread " + sci(hi / lo) + ")"};
}

Outcome fixed_eps_solve() {
    const KernelSpec spec(2, kA);
    const double eps = 4e-3;
    const BinghamEvaluator eval(build_grid(24, 48));
    const double eta = eta1(kAlpha);
    const auto bd = make_boundary(solver_lattice(eps), named_profile("constant"), eta, eval);
    SolverConfig cfg;
    cfg.alpha = kAlpha;
    cfg.eps = eps;
    cfg.sigma = 0.25;
    const SolveResult res = minimize(cfg, bd, eval, spec);
    const SolverReport& r = res.report();
    const Mat3 target = oracle::series_s2(eta) * (Vec3::UnitZ() * Vec3::UnitZ().transpose() - Mat3::Identity() / 3.0);
    double worst = 0.0;
    int count = 0;
    for (std::size_t i : res.state.masks.omega_nodes) {
        if (res.state.masks.distance[i] <= 3.0 * std::sqrt(eps)) continue;
        worst = std::max(worst, (res.state.q.values[i] - target).norm());
        ++count;
    }
    const bool ok = res.converged && r.el_residual <= 1e-6 && r.energy.min_gap <= 1e-8 && count > 0 && worst <= 1e-3;
    return {ok, std::string("converged=") + (res.converged ? "yes" : "no") + " start=" + r.init +
                    " el_residual=" + sci(r.el_residual) + " min_gap=" + sci(r.energy.min_gap) + " interior nodes=" +
                    std::to_string(count) + " max |Q - s2 Q0| = " + sci(worst)};
}

const std::vector<double> kScan{1.6e-2, 4e-3, 1e-3};

SolverConfig scan_config() {
    SolverConfig cfg;
    cfg.alpha = kAlpha;
    cfg.sigma = 0.25;
    cfg.tol_q = 1e-14;
    cfg.restarts = 0;
    return cfg;
}

Outcome scan_constant() {
    const KernelSpec spec(2, kA);
    const BinghamEvaluator eval(build_grid(24, 48));
    const LatticeBox lat = solver_lattice(kScan.front());
    const auto profile = named_profile("constant");
    const auto bd = make_boundary(lat, profile, eta1(kAlpha), eval);
    const auto scan = eps_scan(scan_config(), kScan, bd, eval, spec, restrict_to_omega(lat, profile));
    std::vector<double> err, ap;
    bool converged = true;
    for (const auto& s : scan) {
        err.push_back(s.report().q_error);
        ap.push_back(s.report().energy.apriori);
        converged = converged && s.converged;
    }
    bool monotone = true;
    for (std::size_t k = 1; k < err.size(); ++k) monotone = monotone && err[k] < err[k - 1];
    const double spread = *std::max_element(ap.begin(), ap.end()) / *std::min_element(ap.begin(), ap.end());
    const bool ok = converged && monotone && err.back() <= 0.1 * err.front() && ap.front() > 0.0 && spread <= 10.0;
    return {ok, "L2 errors " + sci(err[0]) + ", " + sci(err[1]) + ", " + sci(err[2]) + "; apriori " + sci(ap[0]) + ", " +
                    sci(ap[1]) + ", " + sci(ap[2])};
}

Outcome scan_planar() {
    const KernelSpec spec(2, kA);
    const BinghamEvaluator eval(build_grid(24, 48));
    const LatticeBox lat = solver_lattice(kScan.front());
    const auto profile = named_profile("planar");
    const auto bd = make_boundary(lat, profile, eta1(kAlpha), eval);
    const HeatFlowResult ref = harmonic_reference(lat, profile, 1e-10, 2000000);
    const auto scan = eps_scan(scan_config(), kScan, bd, eval, spec, ref.n);
    std::vector<double> err;
    bool converged = true;
    for (const auto& s : scan) {
        err.push_back(s.report().director_error);
        converged = converged && s.converged;
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < err.size(); ++k) decreasing = decreasing && err[k] < err[k - 1];
    return {converged && decreasing && err.back() <= 0.5 * err.front(),
            "director L2 errors " + sci(err[0]) + ", " + sci(err[1]) + ", " + sci(err[2])};
}

Outcome harmonic_oracle() {
    const LatticeBox lat = make_lattice(2, 3.0, 64, Domain{}, 0.0);
    const double h = lat.spacing();
    auto psi = [](const Vec3& x) { return 0.25 * oracle::pi * (x(0) + x(1)); };
    auto equatorial = [](double a) { return Vec3(std::cos(a), std::sin(a), 0.0); };
    const Mask pinned = dirichlet_nodes(lat);
    DirectorField n0(lat);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (lat.domain().signed_distance(lat.position(i), 2) <= 0.0) continue;
        n0.values[i] = pinned[i] ? equatorial(psi(lat.position(i))) : equatorial(0.4);
        n0.defined[i] = 1;
    }
    const HeatFlowResult r = heat_flow(n0, 0.25 * h * h, 1e-11, 5000000);
    double err = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!n0.defined[i]) continue;
        const double a = std::atan2(r.n.values[i](1), r.n.values[i](0)) - psi(lat.position(i));
        err += a * a;
    }
    err = std::sqrt(err * lat.cell_volume());

    // k4 density: same boundary values, different interior
    auto twisted = [](const Vec3& x) {
        return Vec3(std::sin(1.3 * x(0)), std::cos(0.7 * x(1)), 1.0 + x(0) * x(1)).normalized();
    };
    // |change| <= h² E_D at every resolution, E_D the Dirichlet energy of the
    // perturbed field
    double worst = 0.0;
    std::string changes;
    for (int across : {16, 32, 64}) {
        const LatticeBox l = make_lattice(2, 3.0, across, Domain{}, 0.0);
        const DirectorField a = restrict_to_omega(l, twisted);
        const DirectorField b = restrict_to_omega(l, [&](const Vec3& x) {
            const double bump = std::pow(std::max(0.0, 1.0 - 16.0 * x.squaredNorm()), 3);
            return Vec3((twisted(x) + 0.3 * bump * Vec3(1.0, -0.5, 0.2)).normalized());
        });
        const double change = std::abs(saddle_splay_integral(b) - saddle_splay_integral(a));
        const double bound = l.spacing() * l.spacing() * dirichlet_energy(b);
        worst = std::max(worst, change / bound);
        changes += (changes.empty() ? "" : ", ") + sci(change);
    }
    const bool ok = err <= 1e-6 && worst <= 1.0;
    return {ok, "angular L2 error " + sci(err) + "; k4 interior changes " + changes + " (max change/(h^2 E_D) " +
                    sci(worst) + ")"};
}

Outcome rotational_identities() {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Vec3 u(nd(rng), nd(rng), nd(rng));
        const RotationalResiduals r = rotational_identity_check(u, random_unit(rng));
        worst = std::max({worst, r.residual_a, r.residual_b});
    }
    const SphereGrid grid = build_grid(24, 48);
    double ibp = 0.0;
    for (int k = 0; k < 20; ++k) {
        Mat3 a, b;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                a(i, j) = nd(rng);
                b(i, j) = nd(rng);
            }
        ibp = std::max(ibp, integration_by_parts_residual(grid, symmetrize(a), symmetrize(b)).norm());
    }
    return {worst <= 1e-10 && ibp <= 1e-10, "rotational identities " + sci(worst) + ", integration by parts " + sci(ibp)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"phase diagram anchors", phase_anchors},
        {"degree of orientation identity", orientation_identity},
        {"uniaxial moment identity", uniaxial_moment},
        {"homogeneous global minimizer", homogeneous_minimizer},
        {"kernel assumptions", kernel_assumptions},
        {"operator factorization", factorization},
        {"T_eps limit", t_limit},
        {"commutator boundedness", commutator},
        {"fixed-eps solve", fixed_eps_solve},
        {"eps scan, constant boundary", scan_constant},
        {"eps scan, varying boundary", scan_planar},
        {"harmonic-map oracle", harmonic_oracle},
        {"rotational identities", rotational_identities},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failures;
        std::printf("criterion %2zu %s: %s | %s [%.1fs]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures;
}
