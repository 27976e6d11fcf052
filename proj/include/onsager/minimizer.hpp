#pragma once

#include "onsager/bingham.hpp"
#include "onsager/kernel_ops.hpp"
#include "onsager/onsager_energy.hpp"
#include "onsager/qtensor_field.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace onsager {

struct SolverConfig {
    double alpha = 8.0;
    double eps = 4e-3;
    double sigma = 0.25;
    double theta = 0.5;
    double tol_q = 1e-8;
    double tol_el = 1e-6;
    int max_iter = 20000;
    int restarts = 4;
    std::uint64_t seed = 1;

    // Throws InvalidArgument unless α > 7.5, σ ∈ (0, 1/2), θ ∈ (0, 1],
    // positive tolerances and eps, and δ resolvable on `lat`.
    void validate(const LatticeBox& lat) const;
};

// Precomputed convolution of the field restricted to Ω, evaluated on Ω_δ.
class MeanField {
public:
    MeanField(const State& s, const KernelSpec& spec);

    // M = (Q 1_Ω) * g_ε at the Ω_δ nodes, in masks.inner_nodes order.
    std::vector<Mat3> operator()(const State& s) const;

private:
    RegionConvolver conv_;
};

// B = α M on Ω_δ, in masks.inner_nodes order.
std::vector<Mat3> mean_field(const State& s, const KernelSpec& spec);

struct StepResult {
    double residual = 0.0;  // max over Ω_δ of |moment_Q(αM) - Q_old|
};

// One damped self-consistent step on Ω_δ: B ← (1-θ)B + θ αM, Q ← moment_Q(B).
// Pinned nodes are not touched.
StepResult scf_step(State& s, double theta, const MeanField& mf, const BinghamEvaluator& eval);

struct ElResidual {
    double omega = 0.0;       // max over Ω_δ of |Σ_i Qⁱ ∧ (Qⁱ *_Ω g_ε)|
    double full_space = 0.0;  // same with the convolution of the extended field
};
ElResidual el_residual(const State& s, const KernelSpec& spec);

struct SolverReport {
    EnergyReport energy;
    int restart = 0;
    std::string init;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    double el_residual = 0.0;
    double el_residual_full = 0.0;
    double q_error = 0.0;         // L²(Ω_δ) distance to the limit Q, when one is given
    double director_error = 0.0;  // L²(Ω) distance of the director to the limit map, mod sign
    bool selected = false;
};

std::string solver_csv_header();
std::string solver_csv_row(const SolverReport& r);

struct SolveResult {
    State state;
    std::vector<SolverReport> runs;  // one per start
    std::size_t best = 0;            // index into runs
    bool converged = false;

    const SolverReport& report() const { return runs[best]; }
};

// Damped SCF from 1 + restarts starts: h_{n_b} (or `warm` restricted to Ω_δ),
// the isotropic interior, then uniaxial interiors at amplitude η with random
// constant directors. Returns the lowest-energy converged run, or the
// lowest-energy run flagged unconverged if none converged.
SolveResult minimize(const SolverConfig& cfg, std::shared_ptr<const BoundaryData> boundary,
                     const BinghamEvaluator& eval, const KernelSpec& spec, const State* warm = nullptr);

// Limit Q-tensor field moment_Q(η n⊗n) of a director field.
QTensorField limit_qtensor(const DirectorField& n, double eta, const BinghamEvaluator& eval);

// Solves along a strictly decreasing ε list, warm-starting each solve from
// the previous one, and fills q_error (against limit_qtensor(limit_map) on
// Ω_δ) and director_error (orient_lift of Q over Ω against limit_map) in the
// selected report of each solve.
std::vector<SolveResult> eps_scan(const SolverConfig& base, const std::vector<double>& eps_list,
                                  std::shared_ptr<const BoundaryData> boundary, const BinghamEvaluator& eval,
                                  const KernelSpec& spec, const DirectorField& limit_map);

}  // namespace onsager
