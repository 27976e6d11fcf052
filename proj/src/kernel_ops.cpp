#include "onsager/kernel_ops.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace onsager {

KernelSpec::KernelSpec(int dim, double shape) : d(dim), a(shape) {
    if (d != 2 && d != 3) throw InvalidArgument("kernel dimension must be 2 or 3");
    if (!(a > 0.0 && a < kPi)) throw InvalidArgument("kernel shape a must lie in (0, pi), got " + std::to_string(a));
}

double KernelSpec::g(double r2) const { return std::pow(a / kPi, 0.5 * d) * std::exp(-a * r2); }

double KernelSpec::g_eps(double r2, double eps) const { return std::pow(eps, -0.5 * d) * g(r2 / eps); }

double KernelSpec::ghat(double xi2) const { return std::exp(-kPi * kPi * xi2 / a); }

double KernelSpec::one_minus_ghat(double xi2) const { return -std::expm1(-kPi * kPi * xi2 / a); }

double KernelSpec::tail_mass(double r, double eps) const {
    if (r <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * d, a * r * r / eps);
}

double KernelSpec::truncation_radius(double eps, double tol) const {
    return std::sqrt(boost::math::gamma_q_inv(0.5 * d, tol) * eps / a);
}

Vec3 KernelSpec::h(const Vec3& xi) const {
    const double xi2 = xi.squaredNorm();
    if (xi2 == 0.0) return Vec3::Zero();
    return xi * std::sqrt(one_minus_ghat(xi2) / xi2);
}

namespace {

// log of Σ_m e^{-c(ξ - m/h)²} / Σ_m e^{-c(m/h)²} along one axis
double log_theta_ratio(double xi, double c, double h) {
    const int reach = static_cast<int>(std::ceil(h * std::sqrt(60.0 / c))) + 1;
    auto log_theta = [&](double x) {
        double lead = -1e300;
        for (int m = -reach; m <= reach; ++m) lead = std::max(lead, -c * (x - m / h) * (x - m / h));
        double rest = 0.0;
        for (int m = -reach; m <= reach; ++m) rest += std::exp(-c * (x - m / h) * (x - m / h) - lead);
        return lead + std::log(rest);
    };
    return log_theta(xi) - log_theta(0.0);
}

double lattice_log_symbol(const KernelSpec& spec, const Vec3& xi, double eps, double spacing) {
    const double c = kPi * kPi * eps / spec.a;
    double s = 0.0;
    for (int k = 0; k < spec.d; ++k) s += log_theta_ratio(xi(k), c, spacing);
    return s;
}

}  // namespace

double KernelSpec::lattice_ghat(const Vec3& xi, double eps, double spacing) const {
    return std::exp(lattice_log_symbol(*this, xi, eps, spacing));
}

double KernelSpec::lattice_one_minus_ghat(const Vec3& xi, double eps, double spacing) const {
    return std::max(0.0, -std::expm1(lattice_log_symbol(*this, xi, eps, spacing)));
}

double mu_of(const KernelSpec& spec) { return spec.mu(); }

double mu_quadrature(const KernelSpec& spec, double eps, double h, double extent) {
    const int n = static_cast<int>(std::ceil(extent / h));
    double sum = 0.0;
    const int nz = spec.d == 3 ? n : 0;
    for (int k = -nz; k < std::max(nz, 1); ++k) {
        const double z = spec.d == 3 ? (k + 0.5) * h : 0.0;
        for (int j = -n; j < n; ++j) {
            const double y = (j + 0.5) * h;
            for (int i = -n; i < n; ++i) {
                const double x = (i + 0.5) * h;
                const double r2 = x * x + y * y + z * z;
                sum += r2 * spec.g_eps(r2, eps);
            }
        }
    }
    return sum * std::pow(h, spec.d);
}

double lipschitz_check(const KernelSpec& spec, double extent, int per_axis) {
    if (per_axis < 2) throw InvalidArgument("lipschitz_check needs at least 2 samples per axis");
    const double step = 2.0 * extent / (per_axis - 1);
    const int nz = spec.d == 3 ? per_axis : 1;
    auto at = [&](int i, int j, int k) {
        return Vec3(-extent + i * step, -extent + j * step, spec.d == 3 ? -extent + k * step : 0.0);
    };
    double worst = 0.0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < per_axis; ++j)
            for (int i = 0; i < per_axis; ++i) {
                const Vec3 x = at(i, j, k);
                const Vec3 hx = spec.h(x);
                const std::array<std::array<int, 3>, 3> next = {{{i + 1, j, k}, {i, j + 1, k}, {i, j, k + 1}}};
                for (int axis = 0; axis < spec.d; ++axis) {
                    const auto& c = next[axis];
                    if (c[0] >= per_axis || c[1] >= per_axis || c[2] >= nz) continue;
                    const Vec3 y = at(c[0], c[1], c[2]);
                    worst = std::max(worst, (spec.h(y) - hx).norm() / (y - x).norm());
                }
            }
    return worst;
}

namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
public:
    const PlanPair& get(const std::array<int, 3>& shape, int d) {
        const auto key = std::make_pair(shape, d);
        {
            std::shared_lock lock(mutex_);
            auto it = plans_.find(key);
            if (it != plans_.end()) return it->second;
        }
        std::unique_lock lock(mutex_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        // FFTW wants the slowest axis first
        int dims[3];
        int rank = 0;
        for (int a = d - 1; a >= 0; --a) dims[rank++] = shape[a];
        std::size_t total = 1;
        for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(shape[a]);
        fftw_complex* buf = fftw_alloc_complex(total);
        PlanPair p;
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        p.forward = fftw_plan_dft(rank, dims, buf, buf, FFTW_FORWARD, flags);
        p.backward = fftw_plan_dft(rank, dims, buf, buf, FFTW_BACKWARD, flags);
        fftw_free(buf);
        if (!p.forward || !p.backward) throw Error("FFTW failed to create a plan");
        return plans_.emplace(key, p).first->second;
    }

private:
    std::shared_mutex mutex_;
    std::map<std::pair<std::array<int, 3>, int>, PlanPair> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

fftw_complex* as_fftw(ComplexField& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

}  // namespace

SpectralGrid::SpectralGrid(std::array<int, 3> shape, int d, double h) : shape_(shape), d_(d), h_(h) {
    if (d == 2) shape_[2] = 1;
}

std::size_t SpectralGrid::size() const {
    return static_cast<std::size_t>(shape_[0]) * shape_[1] * shape_[2];
}

Vec3 SpectralGrid::frequency(std::size_t idx) const {
    Vec3 xi = Vec3::Zero();
    for (int a = 0; a < d_; ++a) {
        const auto n = static_cast<std::size_t>(shape_[a]);
        const long k = static_cast<long>(idx % n);
        idx /= n;
        const long signed_k = k < static_cast<long>(n + 1) / 2 ? k : k - static_cast<long>(n);
        xi(a) = static_cast<double>(signed_k) / (static_cast<double>(n) * h_);
    }
    return xi;
}

void SpectralGrid::forward(ComplexField& data) const {
    if (data.size() != size()) throw InvalidArgument("SpectralGrid: field size mismatch");
    fftw_execute_dft(plan_cache().get(shape_, d_).forward, as_fftw(data), as_fftw(data));
}

void SpectralGrid::backward(ComplexField& data) const {
    if (data.size() != size()) throw InvalidArgument("SpectralGrid: field size mismatch");
    fftw_execute_dft(plan_cache().get(shape_, d_).backward, as_fftw(data), as_fftw(data));
    const double scale = 1.0 / static_cast<double>(size());
    for (auto& v : data) v *= scale;
}

void SpectralGrid::apply(ComplexField& data, const std::vector<double>& symbol) const {
    forward(data);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= symbol[i];
    backward(data);
}

std::vector<double> SpectralGrid::tabulate(const std::function<double(const Vec3&)>& symbol) const {
    std::vector<double> t(size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = symbol(frequency(i));
    return t;
}

namespace {

std::vector<double> smoothing_symbol(const SpectralGrid& grid, const KernelSpec& spec, double eps, double h) {
    return grid.tabulate([&](const Vec3& xi) { return spec.lattice_ghat(xi, eps, h); });
}

void check_positive_eps(double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive, got " + std::to_string(eps));
}

// Largest per-axis extent of the nonzero support, in lattice units.
int support_extent(const LatticeBox& lat, const std::function<bool(std::size_t)>& nonzero) {
    std::array<int, 3> lo{lat.nodes_per_axis(), lat.nodes_per_axis(), lat.nodes_per_axis()}, hi{-1, -1, -1};
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!nonzero(i)) continue;
        const auto c = lat.unravel(i);
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], c[a]);
            hi[a] = std::max(hi[a], c[a]);
        }
    }
    int extent = 0;
    for (int a = 0; a < lat.dim(); ++a) extent = std::max(extent, hi[a] - lo[a] + 1);
    return extent;
}

void check_wrap_gap(const LatticeBox& lat, int extent_nodes, const KernelSpec& spec, double eps) {
    if (extent_nodes == 0) return;
    const double gap = (lat.nodes_per_axis() - extent_nodes) * lat.spacing();
    const double tail = spec.tail_mass(gap, eps);
    if (tail > 1e-14) {
        throw PaddingError("padding too small for eps = " + std::to_string(eps) + ": kernel mass " +
                           std::to_string(tail) + " beyond the wrap gap " + std::to_string(gap) + " (need " +
                           std::to_string(spec.truncation_radius(eps)) + ")");
    }
}

}  // namespace

ScalarField convolve(const LatticeBox& lat, const ScalarField& u, const KernelSpec& spec, double eps,
                     BoundaryMode mode) {
    check_positive_eps(eps);
    if (u.size() != lat.size()) throw InvalidArgument("convolve: field size mismatch");
    if (mode == BoundaryMode::FreeSpace)
        check_wrap_gap(lat, support_extent(lat, [&](std::size_t i) { return u[i] != 0.0; }), spec, eps);
    SpectralGrid grid(lat);
    ComplexField buf(u.begin(), u.end());
    grid.apply(buf, smoothing_symbol(grid, spec, eps, lat.spacing()));
    ScalarField out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = buf[i].real();
    return out;
}

namespace {

constexpr int kPairs[3][2][2] = {{{0, 0}, {0, 1}}, {{0, 2}, {1, 1}}, {{1, 2}, {2, 2}}};

void set_from_components(Mat3& m, int pair, const std::complex<double>& v) {
    const auto& p = kPairs[pair];
    m(p[0][0], p[0][1]) = m(p[0][1], p[0][0]) = v.real();
    m(p[1][0], p[1][1]) = m(p[1][1], p[1][0]) = v.imag();
}

std::complex<double> pack(const Mat3& m, int pair) {
    const auto& p = kPairs[pair];
    return {m(p[0][0], p[0][1]), m(p[1][0], p[1][1])};
}

}  // namespace

QTensorField convolve(const QTensorField& q, const KernelSpec& spec, double eps, BoundaryMode mode) {
    check_positive_eps(eps);
    const LatticeBox& lat = q.lattice;
    if (mode == BoundaryMode::FreeSpace)
        check_wrap_gap(lat, support_extent(lat, [&](std::size_t i) { return !q.values[i].isZero(0.0); }), spec, eps);
    SpectralGrid grid(lat);
    const auto symbol = smoothing_symbol(grid, spec, eps, lat.spacing());
    QTensorField out(lat);
    ComplexField buf(lat.size());
    // the kernel is real and even, so two real components share one transform
    for (int pair = 0; pair < 3; ++pair) {
        for (std::size_t i = 0; i < lat.size(); ++i) buf[i] = pack(q.values[i], pair);
        grid.apply(buf, symbol);
        for (std::size_t i = 0; i < lat.size(); ++i) set_from_components(out.values[i], pair, buf[i]);
    }
    return out;
}

namespace {

std::array<int, 3> region_box_shape(const LatticeBox& lat, const Mask& region, double margin,
                                    std::array<int, 3>& lo) {
    const int n = lat.nodes_per_axis();
    std::array<int, 3> blo{n, n, n}, bhi{-1, -1, -1};
    bool any = false;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!region[i]) continue;
        any = true;
        const auto c = lat.unravel(i);
        for (int a = 0; a < 3; ++a) {
            blo[a] = std::min(blo[a], c[a]);
            bhi[a] = std::max(bhi[a], c[a]);
        }
    }
    std::array<int, 3> shape{1, 1, 1};
    lo = {0, 0, 0};
    const int pad = static_cast<int>(std::ceil(margin / lat.spacing()));
    for (int a = 0; a < lat.dim(); ++a) {
        if (!any) {
            blo[a] = 0;
            bhi[a] = 0;
        }
        const int len = bhi[a] - blo[a] + 1;
        int m = fft_friendly_size(len + 2 * pad);
        if (m >= n) {
            shape[a] = n;
            lo[a] = 0;
            continue;
        }
        shape[a] = m;
        lo[a] = std::clamp(blo[a] - (m - len) / 2, 0, n - m);
    }
    return shape;
}

}  // namespace

RegionConvolver::RegionConvolver(const LatticeBox& lat, const Mask& region, const KernelSpec& spec, double eps)
    : lat_(lat), region_(region), grid_({1, 1, 1}, lat.dim(), lat.spacing()) {
    check_positive_eps(eps);
    if (region.size() != lat.size()) throw InvalidArgument("RegionConvolver: region mask size mismatch");
    const double rho = spec.truncation_radius(eps);
    n_ = region_box_shape(lat, region, rho, lo_);
    grid_ = SpectralGrid(n_, lat.dim(), lat.spacing());
    // the wrap gap of the crop must cover the kernel reach
    int extent = 0;
    {
        std::array<int, 3> blo{lat.nodes_per_axis(), lat.nodes_per_axis(), lat.nodes_per_axis()}, bhi{-1, -1, -1};
        for (std::size_t i = 0; i < lat.size(); ++i) {
            if (!region[i]) continue;
            region_nodes_.push_back(i);
            const auto c = lat.unravel(i);
            for (int a = 0; a < 3; ++a) {
                blo[a] = std::min(blo[a], c[a]);
                bhi[a] = std::max(bhi[a], c[a]);
            }
        }
        for (int a = 0; a < lat.dim(); ++a)
            if (bhi[a] >= 0) extent = std::max(extent, bhi[a] - blo[a] + 1);
    }
    for (int a = 0; a < lat.dim() && extent > 0; ++a) {
        const double gap = (n_[a] - extent) * lat.spacing();
        if (spec.tail_mass(gap, eps) > 1e-14) {
            throw PaddingError("region convolution: lattice too small for eps = " + std::to_string(eps) +
                               " (wrap gap " + std::to_string(gap) + ", need " + std::to_string(rho) + ")");
        }
    }
    symbol_ = smoothing_symbol(grid_, spec, eps, lat.spacing());
    for (int k = 0; k < n_[2]; ++k)
        for (int j = 0; j < n_[1]; ++j)
            for (int i = 0; i < n_[0]; ++i) box_nodes_.push_back(lat.ravel(lo_[0] + i, lo_[1] + j, lo_[2] + k));
}

long RegionConvolver::crop_index(std::size_t lattice_idx) const {
    const auto c = lat_.unravel(lattice_idx);
    long idx = 0, stride = 1;
    for (int a = 0; a < 3; ++a) {
        const int r = c[a] - lo_[a];
        if (r < 0 || r >= n_[a]) return -1;
        idx += stride * r;
        stride *= n_[a];
    }
    return idx;
}

std::vector<Mat3> RegionConvolver::apply(const std::vector<Mat3>& q, const std::vector<std::size_t>& at) const {
    if (q.size() != lat_.size()) throw InvalidArgument("RegionConvolver: field size mismatch");
    std::vector<long> where(at.size());
    for (std::size_t k = 0; k < at.size(); ++k) {
        where[k] = crop_index(at[k]);
        if (where[k] < 0) throw InvalidArgument("RegionConvolver: output node outside the padded box");
    }
    std::vector<Mat3> out(at.size(), Mat3::Zero());
    ComplexField buf(grid_.size());
    for (int pair = 0; pair < 3; ++pair) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        for (std::size_t i : region_nodes_) buf[crop_index(i)] = pack(q[i], pair);
        grid_.apply(buf, symbol_);
        for (std::size_t k = 0; k < at.size(); ++k) set_from_components(out[k], pair, buf[where[k]]);
    }
    return out;
}

std::vector<double> RegionConvolver::apply(const ScalarField& u, const std::vector<std::size_t>& at) const {
    if (u.size() != lat_.size()) throw InvalidArgument("RegionConvolver: field size mismatch");
    ComplexField buf(grid_.size(), std::complex<double>(0.0, 0.0));
    for (std::size_t i : region_nodes_) buf[crop_index(i)] = u[i];
    grid_.apply(buf, symbol_);
    std::vector<double> out(at.size());
    for (std::size_t k = 0; k < at.size(); ++k) {
        const long w = crop_index(at[k]);
        if (w < 0) throw InvalidArgument("RegionConvolver: output node outside the padded box");
        out[k] = buf[w].real();
    }
    return out;
}

ScalarField convolve_region(const LatticeBox& lat, const ScalarField& u, const Mask& region, const KernelSpec& spec,
                            double eps) {
    RegionConvolver conv(lat, region, spec, eps);
    const auto vals = conv.apply(u, conv.box_nodes());
    ScalarField out(lat.size(), 0.0);
    for (std::size_t k = 0; k < vals.size(); ++k) out[conv.box_nodes()[k]] = vals[k];
    return out;
}

QTensorField convolve_region(const QTensorField& q, const Mask& region, const KernelSpec& spec, double eps) {
    RegionConvolver conv(q.lattice, region, spec, eps);
    const auto vals = conv.apply(q.values, conv.box_nodes());
    QTensorField out(q.lattice);
    for (std::size_t k = 0; k < vals.size(); ++k) out.values[conv.box_nodes()[k]] = vals[k];
    return out;
}

ScalarField A_eps(const LatticeBox& lat, const ScalarField& u, const KernelSpec& spec, double eps, BoundaryMode mode) {
    check_positive_eps(eps);
    if (u.size() != lat.size()) throw InvalidArgument("A_eps: field size mismatch");
    if (mode == BoundaryMode::FreeSpace)
        check_wrap_gap(lat, support_extent(lat, [&](std::size_t i) { return u[i] != 0.0; }), spec, eps);
    SpectralGrid grid(lat);
    ComplexField buf(u.begin(), u.end());
    grid.apply(buf, grid.tabulate([&](const Vec3& xi) { return spec.one_minus_ghat(eps * xi.squaredNorm()) / eps; }));
    ScalarField out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = buf[i].real();
    return out;
}

ComplexField T_eps_component(const LatticeBox& lat, const ComplexField& u, int k, const KernelSpec& spec,
                             double eps) {
    check_positive_eps(eps);
    if (k < 0 || k >= lat.dim()) throw InvalidArgument("T_eps: axis out of range");
    if (u.size() != lat.size()) throw InvalidArgument("T_eps: field size mismatch");
    SpectralGrid grid(lat);
    ComplexField buf = u;
    const double se = std::sqrt(eps);
    grid.apply(buf, grid.tabulate([&](const Vec3& xi) { return spec.h(se * xi)(k) / se; }));
    return buf;
}

std::vector<ComplexField> T_eps(const LatticeBox& lat, const ScalarField& u, const KernelSpec& spec, double eps) {
    const ComplexField cu(u.begin(), u.end());
    std::vector<ComplexField> out;
    for (int k = 0; k < lat.dim(); ++k) out.push_back(T_eps_component(lat, cu, k, spec, eps));
    return out;
}

std::vector<ScalarField> spectral_gradient(const LatticeBox& lat, const ScalarField& u) {
    if (u.size() != lat.size()) throw InvalidArgument("spectral_gradient: field size mismatch");
    SpectralGrid grid(lat);
    ComplexField hat(u.begin(), u.end());
    grid.forward(hat);
    const int n = lat.nodes_per_axis();
    std::vector<ScalarField> out;
    for (int k = 0; k < lat.dim(); ++k) {
        ComplexField buf(hat.size());
        for (std::size_t i = 0; i < hat.size(); ++i) {
            const auto c = lat.unravel(i);
            // the Nyquist mode has no odd counterpart on an even grid
            const double xi = c[k] == n / 2 && n % 2 == 0 ? 0.0 : grid.frequency(i)(k);
            buf[i] = hat[i] * std::complex<double>(0.0, 2.0 * kPi * xi);
        }
        grid.backward(buf);
        ScalarField g(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) g[i] = buf[i].real();
        out.push_back(std::move(g));
    }
    return out;
}

double l2_norm(const LatticeBox& lat, const ScalarField& u) {
    double s = 0.0;
    for (double v : u) s += v * v;
    return std::sqrt(s * lat.cell_volume());
}

double l2_norm(const LatticeBox& lat, const std::vector<ComplexField>& u) {
    double s = 0.0;
    for (const auto& f : u)
        for (const auto& v : f) s += std::norm(v);
    return std::sqrt(s * lat.cell_volume());
}

CommutatorDiag commutator_diag(const LatticeBox& lat, const ScalarField& phi, const ScalarField& u,
                               const KernelSpec& spec, double eps) {
    if (phi.size() != lat.size() || u.size() != lat.size())
        throw InvalidArgument("commutator_diag: field size mismatch");
    ScalarField phi_u(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) phi_u[i] = phi[i] * u[i];
    const auto t_phi_u = T_eps(lat, phi_u, spec, eps);
    const auto t_u = T_eps(lat, u, spec, eps);
    const auto grad_phi = spectral_gradient(lat, phi);
    const std::complex<double> ic(0.0, spec.limit_const());
    std::vector<ComplexField> comm(lat.dim(), ComplexField(u.size()));
    std::vector<ComplexField> err(lat.dim(), ComplexField(u.size()));
    for (int k = 0; k < lat.dim(); ++k) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            comm[k][i] = t_phi_u[k][i] - phi[i] * t_u[k][i];
            err[k][i] = comm[k][i] + ic * grad_phi[k][i] * u[i];
        }
    }
    CommutatorDiag out;
    const double nu = l2_norm(lat, u);
    out.norm_ratio = nu > 0.0 ? l2_norm(lat, comm) / nu : 0.0;
    out.limit_error = l2_norm(lat, err);
    return out;
}

SmoothingDiag smoothing_diag(const LatticeBox& lat, const ScalarField& u, const KernelSpec& spec, double eps) {
    const ScalarField s = convolve(lat, u, spec, eps);
    ScalarField diff(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) diff[i] = s[i] - u[i];
    SmoothingDiag out;
    const double dn = l2_norm(lat, diff);
    out.defect = dn * dn / eps;
    for (const auto& g : spectral_gradient(lat, s)) {
        const double gn = l2_norm(lat, g);
        out.gradient += gn * gn;
    }
    return out;
}

}  // namespace onsager
