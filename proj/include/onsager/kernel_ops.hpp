#pragma once

#include "onsager/core.hpp"
#include "onsager/lattice.hpp"
#include "onsager/qtensor_field.hpp"

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace onsager {

// Gaussian interaction kernel g(x) = (a/π)^{d/2} e^{-a|x|²} with
// ĝ(ξ) = e^{-π²|ξ|²/a}, rescaled as g_ε(x) = ε^{-d/2} g(x/√ε).
struct KernelSpec {
    int d = 2;
    double a = kPi / 2.0;

    KernelSpec() = default;
    KernelSpec(int dim, double shape);

    double g(double r2) const;
    double g_eps(double r2, double eps) const;
    double ghat(double xi2) const;
    double one_minus_ghat(double xi2) const;

    double mu() const { return d / (2.0 * a); }
    double c0() const { return kPi * kPi / a; }
    // c* = sqrt(μ/(2d)): T_ε u → -i c* ∇u
    double limit_const() const { return std::sqrt(mu() / (2.0 * d)); }

    // Mass of g_ε outside the ball of radius r.
    double tail_mass(double r, double eps) const;
    // Smallest r with tail_mass(r, eps) <= tol.
    double truncation_radius(double eps, double tol = 1e-14) const;

    // h(ξ) = ξ sqrt((1 - ĝ(ξ))/|ξ|²), extended by 0 at ξ = 0.
    Vec3 h(const Vec3& xi) const;

    // Symbol of the lattice kernel: g_ε sampled at spacing `spacing` and
    // normalized to unit mass. By Poisson summation this is
    // Σ_m ĝ(√ε(ξ - m/h)) / Σ_m ĝ(√ε m/h), real, even, in (0, 1], and equal
    // to ĝ(√ε ξ) up to terms of size e^{-π²ε/(a h²)}.
    double lattice_ghat(const Vec3& xi, double eps, double spacing) const;
    double lattice_one_minus_ghat(const Vec3& xi, double eps, double spacing) const;
};

double mu_of(const KernelSpec& spec);
// Midpoint-rule value of ∫|x|² g_ε on [-extent, extent]^d with spacing h.
double mu_quadrature(const KernelSpec& spec, double eps, double h, double extent);

// Max over lattice-neighbor sample pairs in [-extent, extent]^d of
// |h(ξ) - h(ξ')| / |ξ - ξ'|.
double lipschitz_check(const KernelSpec& spec, double extent, int per_axis);

// Periodic grid of a given shape for spectral work. Frequencies follow
// ξ = k / (n h) with k in [-n/2, n/2).
class SpectralGrid {
public:
    SpectralGrid(std::array<int, 3> shape, int d, double h);
    explicit SpectralGrid(const LatticeBox& lat) : SpectralGrid(lat.shape(), lat.dim(), lat.spacing()) {}

    std::size_t size() const;
    int dim() const { return d_; }
    Vec3 frequency(std::size_t idx) const;

    void forward(ComplexField& data) const;
    // Inverse transform including the 1/size normalization.
    void backward(ComplexField& data) const;
    // data <- F^{-1}[ symbol · F data ] for a precomputed table.
    void apply(ComplexField& data, const std::vector<double>& symbol) const;
    std::vector<double> tabulate(const std::function<double(const Vec3&)>& symbol) const;

private:
    std::array<int, 3> shape_;
    int d_;
    double h_;
};

enum class BoundaryMode { FreeSpace, Periodic };

// u * g_ε on the lattice, i.e. the node sum Σ u(y) g_ε(x - y) h^d with the
// sampled kernel rescaled to unit mass. FreeSpace mode checks that the wrap gap between the
// support of u and its periodic image exceeds the truncation radius and
// throws PaddingError otherwise.
ScalarField convolve(const LatticeBox& lat, const ScalarField& u, const KernelSpec& spec, double eps,
                     BoundaryMode mode = BoundaryMode::FreeSpace);
QTensorField convolve(const QTensorField& q, const KernelSpec& spec, double eps,
                      BoundaryMode mode = BoundaryMode::FreeSpace);

// (u 1_region) * g_ε, computed on the region's bounding box padded by the
// truncation radius and zero outside that box.
class RegionConvolver {
public:
    RegionConvolver(const LatticeBox& lat, const Mask& region, const KernelSpec& spec, double eps);

    // Values at the listed lattice nodes, which must lie in the padded box.
    std::vector<Mat3> apply(const std::vector<Mat3>& q, const std::vector<std::size_t>& at) const;
    std::vector<double> apply(const ScalarField& u, const std::vector<std::size_t>& at) const;
    // Every lattice node of the padded box.
    const std::vector<std::size_t>& box_nodes() const { return box_nodes_; }

private:
    long crop_index(std::size_t lattice_idx) const;

    LatticeBox lat_;
    Mask region_;
    std::array<int, 3> lo_{}, n_{};
    SpectralGrid grid_;
    std::vector<double> symbol_;
    std::vector<std::size_t> box_nodes_;
    std::vector<std::size_t> region_nodes_;
};

ScalarField convolve_region(const LatticeBox& lat, const ScalarField& u, const Mask& region,
                            const KernelSpec& spec, double eps);
QTensorField convolve_region(const QTensorField& q, const Mask& region, const KernelSpec& spec, double eps);

// A_ε u = (u - u * g_ε)/ε, applied through its continuum symbol
// (1 - ĝ(√ε ξ))/ε. It matches convolve up to the sampling error of g_ε,
// of size e^{-π²ε/(a h²)}.
ScalarField A_eps(const LatticeBox& lat, const ScalarField& u, const KernelSpec& spec, double eps,
                  BoundaryMode mode = BoundaryMode::FreeSpace);

// T_ε^k with symbol ξ_k sqrt((1 - ĝ(√εξ))/(ε|ξ|²)); one complex field per axis.
ComplexField T_eps_component(const LatticeBox& lat, const ComplexField& u, int k, const KernelSpec& spec,
                             double eps);
std::vector<ComplexField> T_eps(const LatticeBox& lat, const ScalarField& u, const KernelSpec& spec, double eps);

// Spectral gradient, one field per axis.
std::vector<ScalarField> spectral_gradient(const LatticeBox& lat, const ScalarField& u);

// Lattice L² norms with node volume h^d.
double l2_norm(const LatticeBox& lat, const ScalarField& u);
double l2_norm(const LatticeBox& lat, const std::vector<ComplexField>& u);

struct CommutatorDiag {
    double norm_ratio = 0.0;   // ‖[T_ε, φ]u‖ / ‖u‖
    double limit_error = 0.0;  // ‖[T_ε, φ]u + i c* (∇φ) u‖
};
CommutatorDiag commutator_diag(const LatticeBox& lat, const ScalarField& phi, const ScalarField& u,
                               const KernelSpec& spec, double eps);

struct SmoothingDiag {
    double defect = 0.0;    // (1/ε) ‖u * g_ε - u‖²
    double gradient = 0.0;  // ‖∇(u * g_ε)‖²
};
SmoothingDiag smoothing_diag(const LatticeBox& lat, const ScalarField& u, const KernelSpec& spec, double eps);

}  // namespace onsager
