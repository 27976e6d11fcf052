#include "onsager/minimizer.hpp"

#include "onsager/harmonic_map.hpp"
#include "onsager/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace onsager {

void SolverConfig::validate(const LatticeBox& lat) const {
    if (!(alpha > 7.5)) throw InvalidArgument("alpha must exceed 7.5, got " + std::to_string(alpha));
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (!(sigma > 0.0 && sigma < 0.5)) throw InvalidArgument("sigma must lie in (0, 1/2)");
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in (0, 1]");
    if (!(tol_q > 0.0) || !(tol_el > 0.0)) throw InvalidArgument("tolerances must be positive");
    if (max_iter < 1) throw InvalidArgument("max_iter must be positive");
    if (restarts < 0) throw InvalidArgument("restarts must be non-negative");
    const double delta = boundary_delta(eps, sigma);
    if (delta < 2.0 * lat.spacing()) {
        throw InvalidArgument("delta = " + std::to_string(delta) + " is below two lattice spacings (" +
                              std::to_string(2.0 * lat.spacing()) + ")");
    }
}

MeanField::MeanField(const State& s, const KernelSpec& spec) : conv_(s.q.lattice, s.masks.omega, spec, s.eps) {}

std::vector<Mat3> MeanField::operator()(const State& s) const { return conv_.apply(s.q.values, s.masks.inner_nodes); }

std::vector<Mat3> mean_field(const State& s, const KernelSpec& spec) {
    std::vector<Mat3> m = MeanField(s, spec)(s);
    for (auto& v : m) v = BinghamParam(s.alpha * v).matrix();
    return m;
}

StepResult scf_step(State& s, double theta, const MeanField& mf, const BinghamEvaluator& eval) {
    const std::vector<Mat3> m = mf(s);
    const auto& nodes = s.masks.inner_nodes;
    std::vector<double> res(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t k) {
        const std::size_t i = nodes[k];
        const BinghamParam target(s.alpha * m[k]);
        const BinghamMoments mom = eval.evaluate(target);
        res[k] = (mom.q - s.q.values[i]).norm();
        if (theta == 1.0) {
            s.b[i] = target.matrix();
            s.q.values[i] = mom.q;
        } else if (theta > 0.0) {
            const BinghamParam mixed((1.0 - theta) * s.b[i] + theta * target.matrix());
            s.b[i] = mixed.matrix();
            s.q.values[i] = eval.evaluate(mixed).q;
        }
    });
    StepResult out;
    for (double r : res) out.residual = std::max(out.residual, r);
    return out;
}

ElResidual el_residual(const State& s, const KernelSpec& spec) {
    const auto& nodes = s.masks.inner_nodes;
    ElResidual out;
    const std::vector<Mat3> m = MeanField(s, spec)(s);
    const QTensorField full = convolve(s.q, spec, s.eps, BoundaryMode::FreeSpace);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Mat3& q = s.q.values[nodes[k]];
        out.omega = std::max(out.omega, row_wedge_sum(q, m[k]).norm());
        out.full_space = std::max(out.full_space, row_wedge_sum(q, full.values[nodes[k]]).norm());
    }
    return out;
}

std::string solver_csv_header() {
    return energy_csv_header() +
           ",restart,init,converged,iterations,residual,el_residual,el_residual_full,q_error,director_error,selected";
}

std::string solver_csv_row(const SolverReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, ",%d,%s,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d", r.restart, r.init.c_str(),
                  r.converged ? 1 : 0, r.iterations, r.residual, r.el_residual, r.el_residual_full, r.q_error,
                  r.director_error, r.selected ? 1 : 0);
    return energy_csv_row(r.energy) + buf;
}

namespace {

struct Start {
    std::string label;
    State state;
};

std::vector<Start> make_starts(const SolverConfig& cfg, const State& base, const BinghamEvaluator& eval,
                               const State* warm) {
    std::vector<Start> starts;
    const auto& nodes = base.masks.inner_nodes;
    const double eta = base.boundary->eta;

    Start first{warm ? "warm" : "h_nb", base};
    if (warm) {
        if (warm->q.values.size() != base.q.values.size())
            throw InvalidArgument("minimize: warm start lives on a different lattice");
        for (std::size_t i : nodes) {
            first.state.q.values[i] = warm->q.values[i];
            first.state.b[i] = warm->b[i];
        }
    }
    starts.push_back(std::move(first));
    if (cfg.restarts == 0) return starts;

    Start iso{"isotropic", base};
    for (std::size_t i : nodes) {
        iso.state.q.values[i].setZero();
        iso.state.b[i].setZero();
    }
    starts.push_back(std::move(iso));

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    for (int r = 1; r < cfg.restarts; ++r) {
        Vec3 nu(normal(rng), normal(rng), normal(rng));
        nu.normalize();
        const BinghamParam p = BinghamParam::uniaxial(eta, nu);
        const Mat3 q = eval.evaluate(p).q;
        Start s{"uniaxial", base};
        for (std::size_t i : nodes) {
            s.state.q.values[i] = q;
            s.state.b[i] = p.matrix();
        }
        starts.push_back(std::move(s));
    }
    return starts;
}

SolverReport run_scf(State& s, const SolverConfig& cfg, const MeanField& mf, const BinghamEvaluator& eval,
                     const KernelSpec& spec) {
    SolverReport rep;
    double theta = cfg.theta;
    double last = std::numeric_limits<double>::infinity();
    int rises = 0;
    for (int it = 1; it <= cfg.max_iter; ++it) {
        const double res = scf_step(s, theta, mf, eval).residual;
        rep.iterations = it;
        rep.residual = res;
        if (res <= cfg.tol_q) {
            rep.converged = true;
            break;
        }
        rises = res > last ? rises + 1 : 0;
        if (rises >= 2 && theta > cfg.theta / 64.0) {
            theta *= 0.5;
            rises = 0;
        }
        last = res;
    }
    const ElResidual el = el_residual(s, spec);
    rep.el_residual = el.omega;
    rep.el_residual_full = el.full_space;
    rep.converged = rep.converged && rep.el_residual <= cfg.tol_el;
    rep.energy = energy(s, eval, spec);
    return rep;
}

}  // namespace

SolveResult minimize(const SolverConfig& cfg, std::shared_ptr<const BoundaryData> boundary,
                     const BinghamEvaluator& eval, const KernelSpec& spec, const State* warm) {
    if (!boundary) throw InvalidArgument("minimize: missing boundary data");
    cfg.validate(boundary->lattice);
    const State base = boundary_state(boundary, cfg.eps, cfg.alpha, cfg.sigma);
    if (base.masks.inner_nodes.empty()) throw InvalidArgument("minimize: Ω_δ holds no lattice nodes");
    const MeanField mf(base, spec);
    const double ref_total = energy(base, eval, spec).total;

    SolveResult out;
    std::vector<Start> starts = make_starts(cfg, base, eval, warm);
    std::vector<State> finals;
    for (std::size_t r = 0; r < starts.size(); ++r) {
        State& s = starts[r].state;
        SolverReport rep = run_scf(s, cfg, mf, eval, spec);
        rep.restart = static_cast<int>(r);
        rep.init = starts[r].label;
        rep.energy.min_gap = rep.energy.total - ref_total;
        out.runs.push_back(rep);
        finals.push_back(std::move(s));
    }
    // prefer converged runs, then lower energy; energies equal to roundoff
    // keep the earlier start
    auto better = [&](std::size_t a, std::size_t b) {
        if (out.runs[a].converged != out.runs[b].converged) return out.runs[a].converged;
        const double eb = out.runs[b].energy.total;
        return out.runs[a].energy.total < eb - 1e-12 * std::max(1.0, std::abs(eb));
    };
    std::size_t best = 0;
    for (std::size_t r = 1; r < out.runs.size(); ++r)
        if (better(r, best)) best = r;
    out.best = best;
    out.converged = out.runs[best].converged;
    out.runs[best].selected = true;
    out.state = std::move(finals[best]);
    out.runs[best].energy.apriori = apriori_quantity(out.state, eval, spec);
    return out;
}

QTensorField limit_qtensor(const DirectorField& n, double eta, const BinghamEvaluator& eval) {
    QTensorField q(n.lattice);
    parallel_for(q.values.size(), [&](std::size_t i) {
        if (n.defined[i]) q.values[i] = eval.evaluate(BinghamParam(eta * n.values[i] * n.values[i].transpose())).q;
    });
    return q;
}

std::vector<SolveResult> eps_scan(const SolverConfig& base, const std::vector<double>& eps_list,
                                  std::shared_ptr<const BoundaryData> boundary, const BinghamEvaluator& eval,
                                  const KernelSpec& spec, const DirectorField& limit_map) {
    if (eps_list.empty()) throw InvalidArgument("eps_scan: empty eps list");
    for (std::size_t k = 1; k < eps_list.size(); ++k)
        if (!(eps_list[k] < eps_list[k - 1])) throw InvalidArgument("eps_scan: eps list must be strictly decreasing");
    const QTensorField q_limit = limit_qtensor(limit_map, boundary->eta, eval);
    const LatticeBox& lat = boundary->lattice;
    std::vector<SolveResult> out;
    for (double eps : eps_list) {
        SolverConfig cfg = base;
        cfg.eps = eps;
        SolveResult res = minimize(cfg, boundary, eval, spec, out.empty() ? nullptr : &out.back().state);
        const State& s = res.state;
        double err = 0.0;
        for (std::size_t i : s.masks.inner_nodes) err += (s.q.values[i] - q_limit.values[i]).squaredNorm();
        SolverReport& rep = res.runs[res.best];
        rep.q_error = std::sqrt(err * lat.cell_volume());
        const DirectorField n = orient_lift(s.q, s.masks.omega);
        rep.director_error = compare_directors(n, limit_map, s.masks.omega);
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace onsager
