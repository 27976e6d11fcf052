#include "onsager/bingham.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

namespace onsager {

namespace {

using boost::math::quadrature::gauss_kronrod;

// ∫₀¹ w(z) e^{η(z²-1)} dz, i.e. scaled by e^{-η} to keep large η finite.
template <class Weight>
double scaled_moment(double eta, Weight weight) {
    const double shift = std::max(eta, 0.0);
    auto f = [&](double z) { return weight(z) * std::exp(eta * z * z - shift); };
    return gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 12, 1e-14);
}

}  // namespace

double BinghamParam::operator_norm() const {
    Eigen::SelfAdjointEigenSolver<Mat3> es(b_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

BinghamEvaluator::EvenRule BinghamEvaluator::make_rule(const SphereGrid& g) {
    EvenRule r;
    const bool reducible = g.n_polar % 2 == 0 && g.n_azimuth % 4 == 0;
    if (!reducible) {
        for (std::size_t q = 0; q < g.size(); ++q) {
            const Vec3& m = g.nodes[q];
            r.x2.push_back(m(0) * m(0));
            r.y2.push_back(m(1) * m(1));
            r.z2.push_back(m(2) * m(2));
            r.w.push_back(g.weights[q]);
        }
        return r;
    }
    // Keep z > 0 and phi in [0, π/2]; the product grid is symmetric under
    // every reflection m_i -> -m_i, so each kept node stands for its orbit.
    const int quarter = g.n_azimuth / 4;
    for (int i = g.n_polar / 2; i < g.n_polar; ++i) {
        for (int j = 0; j <= quarter; ++j) {
            const std::size_t q = static_cast<std::size_t>(i) * g.n_azimuth + j;
            const Vec3& m = g.nodes[q];
            const double mult = (j == 0 || j == quarter) ? 4.0 : 8.0;
            r.x2.push_back(m(0) * m(0));
            r.y2.push_back(m(1) * m(1));
            r.z2.push_back(m(2) * m(2));
            r.w.push_back(mult * g.weights[q]);
        }
    }
    return r;
}

BinghamEvaluator::BinghamEvaluator(SphereGrid grid, int max_degree)
    : grid_(std::move(grid)), max_degree_(max_degree), base_(make_rule(grid_)) {}

int BinghamEvaluator::required_degree(const BinghamParam& p) {
    return std::max(30, static_cast<int>(std::ceil(6.0 * p.operator_norm())));
}

const BinghamEvaluator::EvenRule& BinghamEvaluator::rule_for(int degree) const {
    if (degree <= grid_.exact_degree) return base_;
    if (degree > max_degree_) {
        throw QuadratureInsufficient("Bingham exponent needs sphere degree " + std::to_string(degree) +
                                     " beyond the cap " + std::to_string(max_degree_));
    }
    // round up so that nearby norms share one upgraded grid
    const int key = (degree + 15) / 16 * 16;
    {
        std::shared_lock lock(mutex_);
        auto it = upgraded_.find(key);
        if (it != upgraded_.end()) return *it->second;
    }
    std::unique_lock lock(mutex_);
    auto& slot = upgraded_[key];
    if (!slot) slot = std::make_unique<EvenRule>(make_rule(build_grid_for_degree(key)));
    return *slot;
}

BinghamMoments BinghamEvaluator::evaluate(const BinghamParam& p) const {
    const EvenRule& rule = rule_for(required_degree(p));
    Eigen::SelfAdjointEigenSolver<Mat3> es(p.matrix());
    const Vec3 d = es.eigenvalues();  // ascending; d(2) sits on the pole
    double s = 0.0, sx = 0.0, sy = 0.0, sz = 0.0;
    const std::size_t n = rule.w.size();
    for (std::size_t q = 0; q < n; ++q) {
        // m·Dm - d_max, using |m| = 1
        const double e = rule.w[q] * std::exp((d(0) - d(2)) * rule.x2[q] + (d(1) - d(2)) * rule.y2[q]);
        s += e;
        sx += e * rule.x2[q];
        sy += e * rule.y2[q];
        sz += e * rule.z2[q];
    }
    BinghamMoments out;
    out.log_z = d(2) + std::log(s);
    const Vec3 second(sx / s, sy / s, sz / s);
    const Mat3& v = es.eigenvectors();
    out.q = v * (second - Vec3::Constant(1.0 / 3.0)).asDiagonal() * v.transpose();
    out.q = traceless(symmetrize(out.q));
    out.entropy = d.dot(second) - out.log_z;
    return out;
}

double partition(const BinghamParam& p, const SphereGrid& grid) {
    return std::exp(BinghamEvaluator(grid).evaluate(p).log_z);
}

Mat3 moment_Q(const BinghamParam& p, const SphereGrid& grid) { return BinghamEvaluator(grid).evaluate(p).q; }

double entropy(const BinghamParam& p, const SphereGrid& grid) { return BinghamEvaluator(grid).evaluate(p).entropy; }

double homogeneous_energy(const BinghamMoments& mom, double alpha) {
    return mom.entropy + 0.5 * alpha * (2.0 / 3.0 - mom.q.squaredNorm());
}

double homogeneous_energy(const BinghamParam& p, double alpha, const SphereGrid& grid) {
    return homogeneous_energy(BinghamEvaluator(grid).evaluate(p), alpha);
}

double alpha_of_eta(double eta) {
    const double num = scaled_moment(eta, [](double) { return 1.0; });
    const double den = scaled_moment(eta, [](double z) { return z * z * (1.0 - z * z); });
    return num / den;
}

double s2_of_eta(double eta) {
    const double num = scaled_moment(eta, [](double z) { return 1.5 * z * z - 0.5; });
    const double den = scaled_moment(eta, [](double) { return 1.0; });
    return num / den;
}

EtaStar eta_star() {
    static const EtaStar cached = [] {
        auto r = boost::math::tools::brent_find_minima([](double e) { return alpha_of_eta(e); }, 0.5, 6.0, 50);
        return EtaStar{r.first, r.second};
    }();
    return cached;
}

namespace {

double bisect_alpha(double target, double lo, double hi) {
    double flo = alpha_of_eta(lo) - target;
    const double fhi = alpha_of_eta(hi) - target;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) {
        throw NoBracket("eta_branches: alpha(eta) - " + std::to_string(target) + " has no sign change on [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = alpha_of_eta(mid) - target;
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if (hi - lo > 1e-12) throw NoBracket("eta_branches: bisection did not reach 1e-12");
    return 0.5 * (lo + hi);
}

}  // namespace

const EtaBranch* PhasePoint::find(const std::string& label) const {
    for (const auto& b : branches)
        if (b.label == label) return &b;
    return nullptr;
}

PhasePoint eta_branches(double alpha) {
    if (!(alpha > 0.0)) throw InvalidArgument("eta_branches: alpha must be positive");
    PhasePoint pp;
    pp.alpha = alpha;
    pp.branches.push_back({"isotropic", 0.0, 0.0, alpha < 7.5});
    const EtaStar star = eta_star();
    if (alpha > star.alpha) {
        // α(η) grows without bound on both sides of η*
        const double e2 = bisect_alpha(alpha, -200.0, star.eta);
        const double e1 = bisect_alpha(alpha, star.eta, 200.0);
        pp.branches.push_back({"eta2", e2, s2_of_eta(e2), false});
        pp.branches.push_back({"eta1", e1, s2_of_eta(e1), true});
        std::sort(pp.branches.begin(), pp.branches.end(),
                  [](const EtaBranch& a, const EtaBranch& b) { return a.eta < b.eta; });
    }
    return pp;
}

double eta1(double alpha) {
    const PhasePoint pp = eta_branches(alpha);
    const EtaBranch* b = pp.find("eta1");
    if (!b) throw InvalidArgument("eta1: alpha must exceed alpha* ≈ 6.7314");
    return b->eta;
}

namespace {

Mat3 unpack_traceless(const gsl_vector* v) {
    const double b0 = gsl_vector_get(v, 0), b1 = gsl_vector_get(v, 1), b2 = gsl_vector_get(v, 2);
    const double b3 = gsl_vector_get(v, 3), b4 = gsl_vector_get(v, 4);
    Mat3 b;
    b << b0, b1, b2, b1, b3, b4, b2, b4, -b0 - b3;
    return b;
}

struct HomogeneousProblem {
    double alpha;
    const BinghamEvaluator* eval;
};

double homogeneous_objective(const gsl_vector* v, void* params) {
    const auto* prob = static_cast<const HomogeneousProblem*>(params);
    return homogeneous_energy(prob->eval->evaluate(BinghamParam(unpack_traceless(v))), prob->alpha);
}

struct SimplexDeleter {
    void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using SimplexPtr = std::unique_ptr<gsl_multimin_fminimizer, SimplexDeleter>;
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

// One Nelder-Mead descent; returns the minimum value and writes the point back.
double nelder_mead(HomogeneousProblem& prob, gsl_vector* x, double step) {
    gsl_multimin_function fn{&homogeneous_objective, 5, &prob};
    SimplexPtr s(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 5));
    VectorPtr steps(gsl_vector_alloc(5));
    gsl_vector_set_all(steps.get(), step);
    gsl_multimin_fminimizer_set(s.get(), &fn, x, steps.get());
    for (int it = 0; it < 20000; ++it) {
        if (gsl_multimin_fminimizer_iterate(s.get())) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-11) == GSL_SUCCESS) break;
    }
    gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(s.get()));
    return gsl_multimin_fminimizer_minimum(s.get());
}

}  // namespace

HomogeneousMinimum minimize_homogeneous(double alpha, const SphereGrid& grid, int starts, std::uint64_t seed) {
    if (starts < 1) throw InvalidArgument("minimize_homogeneous: need at least one start");
    BinghamEvaluator eval(grid);
    HomogeneousProblem prob{alpha, &eval};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-8.0, 8.0);

    HomogeneousMinimum best;
    best.energy = std::numeric_limits<double>::infinity();
    VectorPtr x(gsl_vector_alloc(5));
    for (int k = 0; k < starts; ++k) {
        for (int i = 0; i < 5; ++i) gsl_vector_set(x.get(), i, unif(rng));
        double value = nelder_mead(prob, x.get(), 1.0);
        // restart from the reported point until the simplex stops improving
        for (int r = 0; r < 20; ++r) {
            const double again = nelder_mead(prob, x.get(), 1e-2);
            const bool done = value - again < 1e-15;
            value = std::min(value, again);
            if (done) break;
        }
        if (value < best.energy) {
            best.energy = value;
            best.param = BinghamParam(unpack_traceless(x.get()));
        }
    }
    best.q = eval.evaluate(best.param).q;
    best.starts = starts;
    return best;
}

}  // namespace onsager
