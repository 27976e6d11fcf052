#pragma once

#include "onsager/bingham.hpp"
#include "onsager/core.hpp"
#include "onsager/kernel_ops.hpp"
#include "onsager/lattice.hpp"
#include "onsager/qtensor_field.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace onsager {

using DirectorProfile = std::function<Vec3(const Vec3&)>;

// Named boundary profiles: "constant" (n = e₃) and "planar"
// (n = (cos ψ, sin ψ, 0) with ψ = (π/4)(x + y), a π/2 sweep over the unit square).
DirectorProfile named_profile(const std::string& name);

// Cutoff χ(|x|): 1 on B_{R/2}, 0 outside B_R, a cosine ramp in between.
double cutoff(double r, double radius);

// Boundary director n_b = χ·profile on the whole lattice and the induced
// states h_{n_b} = exp(η (m·n_b)²)/Z, stored through B = η n_b⊗n_b and Q.
struct BoundaryData {
    LatticeBox lattice;
    double eta = 0.0;
    DirectorField n_b;
    std::vector<Mat3> b;
    QTensorField q;
};

// Throws InvalidArgument if the profile is not unit length on Ω.
std::shared_ptr<const BoundaryData> make_boundary(const LatticeBox& lat, const DirectorProfile& profile, double eta,
                                                  const BinghamEvaluator& eval);

// An admissible state. On Ω_δ the density is Bingham with parameter b; on the
// shell Ω^δ and outside Ω it equals h_{n_b}, so q and b agree with the
// boundary there bit for bit.
struct State {
    std::shared_ptr<const BoundaryData> boundary;
    RegionMasks masks;
    double eps = 0.0;
    double alpha = 0.0;
    double sigma = 0.25;
    QTensorField q;
    std::vector<Mat3> b;
};

double boundary_delta(double eps, double sigma);

// State equal to h_{n_b} everywhere.
State boundary_state(std::shared_ptr<const BoundaryData> boundary, double eps, double alpha, double sigma);

// Throws InvariantViolation if the pinned region differs from h_{n_b}.
void check_admissible(const State& s);

struct EnergyReport {
    double eps = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    double entropy = 0.0;
    double bulk = 0.0;      // -(α/2) ∫_Ω |Q|²
    double nonlocal = 0.0;  // (α/2) ∫_Ω Q:(Q - Q *_Ω g_ε)
    double c1 = 0.0;        // (α/3) ∫_Ω (1_Ω * g_ε)
    double total = 0.0;
    double apriori = 0.0;
    double min_gap = 0.0;
};

// Entropy, bulk, nonlocal, C1 and total of A_ε[f] over Ω. apriori and
// min_gap are left at zero; see apriori_quantity and minimality_gap.
EnergyReport energy(const State& s, const BinghamEvaluator& eval, const KernelSpec& spec);

// 2 ∫ u:(u - u * g_ε) = ∫∫ |u(x) - u(y)|² g_ε(x - y) for u supported in the box.
double nonlocal_form(const QTensorField& u, const KernelSpec& spec, double eps);

// (1/ε) ∫_Ω (A[f] - A[h_{n_b}]) + (α/2ε) ∫∫ |Q̄(x) - Q̄(y)|² g_ε(x - y), with
// A the homogeneous energy density and Q̄ the state extended by h_{n_b}.
double apriori_quantity(const State& s, const BinghamEvaluator& eval, const KernelSpec& spec);

// A_ε[s] - A_ε[h_{n_b}].
double minimality_gap(const State& s, const BinghamEvaluator& eval, const KernelSpec& spec);

std::string energy_csv_header();
std::string energy_csv_row(const EnergyReport& r);

}  // namespace onsager
