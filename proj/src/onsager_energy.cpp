#include "onsager/onsager_energy.hpp"

#include "onsager/parallel.hpp"

#include <cmath>
#include <cstdio>

namespace onsager {

DirectorProfile named_profile(const std::string& name) {
    if (name == "constant") return [](const Vec3&) { return Vec3(0.0, 0.0, 1.0); };
    if (name == "planar") {
        return [](const Vec3& x) {
            const double psi = 0.25 * kPi * (x(0) + x(1));
            return Vec3(std::cos(psi), std::sin(psi), 0.0);
        };
    }
    throw InvalidArgument("unknown boundary_profile '" + name + "' (expected constant or planar)");
}

double cutoff(double r, double radius) {
    const double inner = 0.5 * radius;
    if (r <= inner) return 1.0;
    if (r >= radius) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * (r - inner) / (radius - inner)));
}

std::shared_ptr<const BoundaryData> make_boundary(const LatticeBox& lat, const DirectorProfile& profile, double eta,
                                                  const BinghamEvaluator& eval) {
    auto bd = std::make_shared<BoundaryData>();
    bd->lattice = lat;
    bd->eta = eta;
    bd->n_b = DirectorField(lat);
    bd->b.assign(lat.size(), Mat3::Zero());
    bd->q = QTensorField(lat);
    const Domain& omega = lat.domain();
    parallel_for(lat.size(), [&](std::size_t i) {
        const Vec3 x = lat.position(i);
        const double chi = cutoff(x.norm(), lat.radius());
        if (chi == 0.0) return;
        const Vec3 v = profile(x);
        if (omega.signed_distance(x, lat.dim()) > 0.0 && std::abs(v.norm() - 1.0) > 1e-12) {
            throw InvalidArgument("make_boundary: profile has |n_b| = " + std::to_string(v.norm()) + " inside Ω");
        }
        const Vec3 n = chi * v;
        bd->n_b.values[i] = n;
        bd->n_b.defined[i] = 1;
        const BinghamParam p(eta * n * n.transpose());
        bd->b[i] = p.matrix();
        bd->q.values[i] = eval.evaluate(p).q;
    });
    return bd;
}

double boundary_delta(double eps, double sigma) { return std::pow(eps, 0.5 - sigma); }

State boundary_state(std::shared_ptr<const BoundaryData> boundary, double eps, double alpha, double sigma) {
    if (!boundary) throw InvalidArgument("boundary_state: missing boundary data");
    State s;
    s.masks = make_masks(boundary->lattice, boundary_delta(eps, sigma));
    s.eps = eps;
    s.alpha = alpha;
    s.sigma = sigma;
    s.q = boundary->q;
    s.b = boundary->b;
    s.boundary = std::move(boundary);
    return s;
}

void check_admissible(const State& s) {
    const BoundaryData& bd = *s.boundary;
    for (std::size_t i = 0; i < s.q.values.size(); ++i) {
        if (s.masks.inner[i]) continue;
        if (s.q.values[i] != bd.q.values[i] || s.b[i] != bd.b[i]) {
            const Vec3 x = bd.lattice.position(i);
            throw InvariantViolation("state leaves the admissible set at node " + std::to_string(i) + " (" +
                                     std::to_string(x(0)) + ", " + std::to_string(x(1)) + ")");
        }
    }
}

namespace {

double double_dot(const Mat3& a, const Mat3& b) { return (a.array() * b.array()).sum(); }

std::vector<double> node_entropies(const std::vector<Mat3>& b, const std::vector<std::size_t>& nodes,
                                   const BinghamEvaluator& eval) {
    std::vector<double> out(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t k) { out[k] = eval.evaluate(BinghamParam(b[nodes[k]])).entropy; });
    return out;
}

}  // namespace

EnergyReport energy(const State& s, const BinghamEvaluator& eval, const KernelSpec& spec) {
    check_admissible(s);
    const LatticeBox& lat = s.q.lattice;
    const auto& nodes = s.masks.omega_nodes;
    const double hd = lat.cell_volume();

    RegionConvolver conv(lat, s.masks.omega, spec, s.eps);
    const std::vector<Mat3> smoothed = conv.apply(s.q.values, nodes);
    const std::vector<double> mass = conv.apply(ScalarField(lat.size(), 1.0), nodes);
    const std::vector<double> ent = node_entropies(s.b, nodes, eval);

    EnergyReport r;
    r.eps = s.eps;
    r.alpha = s.alpha;
    r.delta = s.masks.delta;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Mat3& q = s.q.values[nodes[k]];
        r.entropy += ent[k];
        r.bulk += q.squaredNorm();
        r.nonlocal += double_dot(q, q - smoothed[k]);
        r.c1 += mass[k];
    }
    r.entropy *= hd;
    r.bulk *= -0.5 * s.alpha * hd;
    r.nonlocal *= 0.5 * s.alpha * hd;
    r.c1 *= s.alpha / 3.0 * hd;
    r.total = r.entropy + r.bulk + r.nonlocal + r.c1;
    return r;
}

double nonlocal_form(const QTensorField& u, const KernelSpec& spec, double eps) {
    const QTensorField smoothed = convolve(u, spec, eps, BoundaryMode::FreeSpace);
    double sum = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) sum += double_dot(u.values[i], u.values[i] - smoothed.values[i]);
    return 2.0 * sum * u.lattice.cell_volume();
}

double apriori_quantity(const State& s, const BinghamEvaluator& eval, const KernelSpec& spec) {
    check_admissible(s);
    const BoundaryData& bd = *s.boundary;
    const auto& nodes = s.masks.omega_nodes;
    const std::vector<double> ent = node_entropies(s.b, nodes, eval);
    const std::vector<double> ent_ref = node_entropies(bd.b, nodes, eval);
    double local = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::size_t i = nodes[k];
        local += (ent[k] - ent_ref[k]) - 0.5 * s.alpha * (s.q.values[i].squaredNorm() - bd.q.values[i].squaredNorm());
    }
    local *= s.q.lattice.cell_volume() / s.eps;
    return local + s.alpha / (2.0 * s.eps) * nonlocal_form(s.q, spec, s.eps);
}

double minimality_gap(const State& s, const BinghamEvaluator& eval, const KernelSpec& spec) {
    const State ref = boundary_state(s.boundary, s.eps, s.alpha, s.sigma);
    return energy(s, eval, spec).total - energy(ref, eval, spec).total;
}

std::string energy_csv_header() { return "eps,alpha,delta,entropy,bulk,nonlocal,C1,total,apriori,min_gap"; }

std::string energy_csv_row(const EnergyReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.eps, r.alpha,
                  r.delta, r.entropy, r.bulk, r.nonlocal, r.c1, r.total, r.apriori, r.min_gap);
    return buf;
}

}  // namespace onsager
