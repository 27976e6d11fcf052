#pragma once

#include "onsager/core.hpp"
#include "onsager/lattice.hpp"
#include "onsager/qtensor_field.hpp"

#include <functional>

namespace onsager {

struct OFConstants {
    double k1 = 1.0;  // splay
    double k2 = 1.0;  // twist
    double k3 = 1.0;  // bend
    double k4 = 0.0;  // saddle-splay
};

// Ω nodes with a lattice neighbor outside Ω.
Mask dirichlet_nodes(const LatticeBox& lat);

struct HeatFlowResult {
    DirectorField n;
    int iterations = 0;
    double gradient = 0.0;  // final max-norm of the projected Laplacian
};

// Projected explicit heat flow n ← (n + τ P_n Δ_h n)/|·| on the Ω nodes, where
// P_n removes the component along n, with the
// values of n0 on the Dirichlet nodes held fixed. Requires τ ≤ h²/(2d) and
// |n0| = 1 on Ω. Throws NonConvergence after max_iter steps and ZeroVector if
// a normalization meets |v| < 1e-12. `observer` sees every iterate.
HeatFlowResult heat_flow(const DirectorField& n0, double step, double tol, int max_iter,
                         const std::function<void(int, const DirectorField&)>& observer = {});

// 5-point (7-point) Laplacian at an Ω node; all neighbors must be in the box.
Vec3 lattice_laplacian(const DirectorField& n, std::size_t idx);

// max over hat test functions φ (support of `test_resolution` cells per side,
// centers on a stride of the same size) and components of
// |Σ_j Σ_x D_j⁺φ (n ∧ D_j⁺n) h^d|, summed over the Ω nodes whose forward
// neighbors are in Ω.
double weak_residual(const DirectorField& n, int test_resolution);

// (1/2) Σ over lattice edges inside Ω of |D⁺n|² h^d; heat_flow decreases it.
double lattice_dirichlet_energy(const DirectorField& n);

// (1/2) Σ_Ω |∇n|² h^d with central differences, one-sided at ∂Ω.
double dirichlet_energy(const DirectorField& n);

double oseen_frank_energy(const DirectorField& n, const OFConstants& c);

// The k₄ density tr((∇n)²) - (div n)² summed over Ω.
double saddle_splay_integral(const DirectorField& n);

// min over σ = ±1 of ‖n_a - σ n_b‖ in L²(region).
double compare_directors(const DirectorField& n_a, const DirectorField& n_b, const Mask& region);

// Unit director on Ω equal to `profile` there, zero elsewhere.
DirectorField restrict_to_omega(const LatticeBox& lat, const std::function<Vec3(const Vec3&)>& profile);

// Harmonic map with the Dirichlet data of `profile`: heat flow at the
// largest stable step, started from the profile itself.
HeatFlowResult harmonic_reference(const LatticeBox& lat, const std::function<Vec3(const Vec3&)>& profile, double tol,
                                  int max_iter);

}  // namespace onsager
