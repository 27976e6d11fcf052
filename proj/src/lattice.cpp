#include "onsager/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace onsager {

double Domain::signed_distance(const Vec3& x, int d) const {
    if (shape == DomainShape::Ball) return half_width - x.head(d).norm();
    // box: inside, distance to the nearest face; outside, distance to the box
    Vec3 q = Vec3::Zero();
    for (int i = 0; i < d; ++i) q(i) = std::abs(x(i)) - half_width;
    const double outside = q.head(d).cwiseMax(0.0).norm();
    const double inside = std::min(q.head(d).maxCoeff(), 0.0);
    return -(outside + inside);
}

double Domain::circumradius(int d) const {
    return shape == DomainShape::Ball ? half_width : half_width * std::sqrt(static_cast<double>(d));
}

double Domain::volume(int d) const {
    if (shape == DomainShape::Box) return std::pow(2.0 * half_width, d);
    return d == 2 ? kPi * half_width * half_width : 4.0 / 3.0 * kPi * std::pow(half_width, 3);
}

LatticeBox::LatticeBox(int d, double radius, double h, int n, Domain omega)
    : d_(d), radius_(radius), h_(h), n_(n), omega_(omega) {
    if (d != 2 && d != 3) throw InvalidArgument("lattice dimension must be 2 or 3, got " + std::to_string(d));
    if (!(h > 0.0) || n < 2) throw InvalidArgument("lattice needs h > 0 and at least 2 nodes per axis");
}

std::size_t LatticeBox::size() const {
    std::size_t s = static_cast<std::size_t>(n_) * n_;
    return d_ == 3 ? s * n_ : s;
}

double LatticeBox::cell_volume() const { return std::pow(h_, d_); }

std::array<int, 3> LatticeBox::unravel(std::size_t idx) const {
    const auto n = static_cast<std::size_t>(n_);
    return {static_cast<int>(idx % n), static_cast<int>((idx / n) % n), static_cast<int>(idx / (n * n))};
}

std::size_t LatticeBox::ravel(int i, int j, int k) const {
    const auto n = static_cast<std::size_t>(n_);
    return static_cast<std::size_t>(i) + n * (static_cast<std::size_t>(j) + n * static_cast<std::size_t>(k));
}

Vec3 LatticeBox::position(std::size_t idx) const {
    const auto c = unravel(idx);
    return {coordinate(c[0]), coordinate(c[1]), d_ == 3 ? coordinate(c[2]) : 0.0};
}

long LatticeBox::neighbor(std::size_t idx, int axis, int sign) const {
    auto c = unravel(idx);
    c[axis] += sign;
    if (c[axis] < 0 || c[axis] >= n_ || axis >= d_) return -1;
    return static_cast<long>(ravel(c[0], c[1], c[2]));
}

int fft_friendly_size(int n) {
    for (int m = std::max(n, 2);; ++m) {
        if (m % 2) continue;
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

LatticeBox make_lattice(int d, double radius, int nodes_across, const Domain& omega, double min_gap) {
    if (nodes_across < 4) throw InvalidArgument("lattice_n must be at least 4");
    if (!(omega.half_width > 0.0)) throw InvalidArgument("domain half width must be positive");
    if (omega.circumradius(d) > radius / 4.0 + 1e-12) {
        throw InvalidArgument("lattice_r = " + std::to_string(radius) + " too small: the domain must lie in B_{R/4}");
    }
    const double h = 2.0 * omega.half_width / nodes_across;
    // nodes_across even keeps ∂Ω halfway between nodes
    int core = static_cast<int>(std::ceil(2.0 * radius / h - 1e-9));
    core += core % 2;
    const int gap = static_cast<int>(std::ceil(std::max(min_gap, 0.0) / h - 1e-9));
    return LatticeBox(d, radius, h, fft_friendly_size(core + gap), omega);
}

RegionMasks make_masks(const LatticeBox& lat, double delta) {
    RegionMasks m;
    m.delta = delta;
    const std::size_t n = lat.size();
    m.distance.resize(n);
    m.omega.assign(n, 0);
    m.shell.assign(n, 0);
    m.inner.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double dist = lat.domain().signed_distance(lat.position(i), lat.dim());
        m.distance[i] = dist;
        if (dist <= 0.0) continue;
        m.omega[i] = 1;
        m.omega_nodes.push_back(i);
        if (dist <= delta) {
            m.shell[i] = 1;
        } else {
            m.inner[i] = 1;
            m.inner_nodes.push_back(i);
        }
    }
    return m;
}

}  // namespace onsager
