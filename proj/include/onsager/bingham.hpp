#pragma once

#include "onsager/core.hpp"
#include "onsager/sphere_quadrature.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

namespace onsager {

// Exponent B of the orientation density exp(m·Bm)/Z. Stored symmetric and
// traceless: adding c·I to B does not change the normalized density.
class BinghamParam {
public:
    BinghamParam() : b_(Mat3::Zero()) {}
    explicit BinghamParam(const Mat3& b) : b_(traceless(symmetrize(b))) {}

    // Density ∝ exp(eta (m·nu)²).
    static BinghamParam uniaxial(double eta, const Vec3& nu) { return BinghamParam(eta * nu * nu.transpose()); }

    const Mat3& matrix() const { return b_; }
    double operator_norm() const;

private:
    Mat3 b_;
};

struct BinghamMoments {
    double log_z = 0.0;   // log ∫ exp(m·Bm) dm
    Mat3 q = Mat3::Zero();  // ∫ (m⊗m - I/3) f dm
    double entropy = 0.0;  // ∫ f log f dm
};

// Evaluates Bingham moments in the eigenframe of B, with the largest
// eigenvalue on the pole of the product grid. Grids are upgraded on demand
// so that exact_degree >= max(30, 6 |B|_op); an upgrade past
// `max_degree` raises QuadratureInsufficient. Safe for concurrent use.
class BinghamEvaluator {
public:
    explicit BinghamEvaluator(SphereGrid grid, int max_degree = 400);

    BinghamMoments evaluate(const BinghamParam& p) const;
    const SphereGrid& grid() const { return grid_; }

    static int required_degree(const BinghamParam& p);

private:
    // Reduced rule for integrands even in every coordinate.
    struct EvenRule {
        std::vector<double> x2, y2, z2, w;
    };
    static EvenRule make_rule(const SphereGrid& g);
    const EvenRule& rule_for(int degree) const;

    SphereGrid grid_;
    int max_degree_;
    EvenRule base_;
    mutable std::shared_mutex mutex_;
    mutable std::map<int, std::unique_ptr<EvenRule>> upgraded_;
};

double partition(const BinghamParam& p, const SphereGrid& grid);
Mat3 moment_Q(const BinghamParam& p, const SphereGrid& grid);
double entropy(const BinghamParam& p, const SphereGrid& grid);

// Homogeneous Maier-Saupe free energy ∫ f log f + (α/2)(2/3 - |Q|²),
// whose critical points are exactly the Bingham states with B = α Q.
double homogeneous_energy(const BinghamParam& p, double alpha, const SphereGrid& grid);
double homogeneous_energy(const BinghamMoments& mom, double alpha);

// α(η) = ∫₀¹ e^{ηz²} dz / ∫₀¹ z²(1-z²) e^{ηz²} dz.
double alpha_of_eta(double eta);

// Degree of orientation ∫ P2(z) e^{ηz²} / ∫ e^{ηz²} over [-1, 1].
double s2_of_eta(double eta);

struct EtaStar {
    double eta = 0.0;    // minimizer of α(η)
    double alpha = 0.0;  // α* = min α(η) ≈ 6.7314
};
EtaStar eta_star();

struct EtaBranch {
    std::string label;  // "isotropic", "eta2", "eta1"
    double eta = 0.0;
    double s2 = 0.0;
    bool stable = false;
};

struct PhasePoint {
    double alpha = 0.0;
    std::vector<EtaBranch> branches;  // ordered by eta

    const EtaBranch* find(const std::string& label) const;
};

// Solutions of α(η) = alpha. Bisection to 1e-12 in η; NoBracket if a
// bracket fails to change sign.
PhasePoint eta_branches(double alpha);

// η₁(α): the largest root, used by the solver. Requires alpha > α*.
double eta1(double alpha);

struct HomogeneousMinimum {
    BinghamParam param;
    double energy = 0.0;
    Mat3 q = Mat3::Zero();
    int starts = 0;
};

// Multistart Nelder-Mead over the 5-dimensional space of traceless
// symmetric B.
HomogeneousMinimum minimize_homogeneous(double alpha, const SphereGrid& grid, int starts,
                                        std::uint64_t seed);

}  // namespace onsager
