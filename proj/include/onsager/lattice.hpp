#pragma once

#include "onsager/core.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace onsager {

using ScalarField = std::vector<double>;
using ComplexField = std::vector<std::complex<double>>;
using Mask = std::vector<std::uint8_t>;

enum class DomainShape { Box, Ball };

// The physical domain Ω, centered at the origin: the cube [-w, w]^d or the
// ball of radius w.
struct Domain {
    DomainShape shape = DomainShape::Box;
    double half_width = 0.5;

    // Exact signed distance to ∂Ω, positive inside.
    double signed_distance(const Vec3& x, int d) const;
    // max |x| over Ω
    double circumradius(int d) const;
    double volume(int d) const;
};

// Uniform cell-centered lattice on the periodic box [-L/2, L/2]^d with
// L = n h. Axis 0 is the fastest index. Unused axes (d = 2) have extent 1.
class LatticeBox {
public:
    LatticeBox() = default;
    LatticeBox(int d, double radius, double h, int n, Domain omega);

    int dim() const { return d_; }
    double radius() const { return radius_; }  // R: fields vanish for |x| >= R
    double spacing() const { return h_; }
    int nodes_per_axis() const { return n_; }
    double length() const { return n_ * h_; }
    const Domain& domain() const { return omega_; }

    std::array<int, 3> shape() const { return {n_, n_, d_ == 3 ? n_ : 1}; }
    std::size_t size() const;
    double cell_volume() const;

    double coordinate(int i) const { return -0.5 * n_ * h_ + (i + 0.5) * h_; }
    Vec3 position(std::size_t idx) const;
    std::array<int, 3> unravel(std::size_t idx) const;
    std::size_t ravel(int i, int j, int k) const;

    // Index of the lattice neighbor one step along `axis` (sign ±1), or -1 if
    // the step leaves the box.
    long neighbor(std::size_t idx, int axis, int sign) const;

private:
    int d_ = 2;
    double radius_ = 0.0;
    double h_ = 0.0;
    int n_ = 0;
    Domain omega_;
};

// Smallest integer >= n of the form 2^a 3^b 5^c, even.
int fft_friendly_size(int n);

// h = 2 w / nodes_across; the box holds B_R plus a wrap gap of at least
// `min_gap` so that free-space convolutions of fields supported in B_R do not
// alias. Requires Ω ⊂ B_{R/4}.
LatticeBox make_lattice(int d, double radius, int nodes_across, const Domain& omega, double min_gap);

// Node masks for Ω, the shell Ω^δ = {dist <= δ} and the interior Ω_δ.
struct RegionMasks {
    double delta = 0.0;
    ScalarField distance;  // signed distance to ∂Ω
    Mask omega, shell, inner;
    std::vector<std::size_t> omega_nodes, inner_nodes;

    bool exterior(std::size_t idx) const { return !omega[idx]; }
};

RegionMasks make_masks(const LatticeBox& lat, double delta);

}  // namespace onsager
