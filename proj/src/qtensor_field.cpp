#include "onsager/qtensor_field.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <memory>

namespace onsager {

bool is_qtensor(const QTensor& q, double tol) {
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    if (std::abs(q.trace()) > tol) return false;
    return q.norm() <= std::sqrt(2.0 / 3.0) + 1e-10;
}

ScalarField QTensorField::component(int i, int j) const {
    ScalarField out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = values[k](i, j);
    return out;
}

DirectorSample director_extract(const QTensor& q, double degeneracy_tol) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(q);
    const Vec3 lam = es.eigenvalues();
    if (lam(2) - lam(1) < degeneracy_tol) {
        throw DegenerateQ("director_extract: top eigenvalue gap " + std::to_string(lam(2) - lam(1)) +
                          " below tolerance");
    }
    DirectorSample out;
    out.s = 1.5 * lam(2);
    out.nu = es.eigenvectors().col(2).normalized();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(out.nu(i)) > 1e-14) {
            if (out.nu(i) < 0) out.nu = -out.nu;
            break;
        }
    }
    return out;
}

double uniaxiality_residual(const QTensor& q) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(symmetrize(q), Eigen::EigenvaluesOnly);
    const Vec3 lam = es.eigenvalues();
    return std::min(lam(1) - lam(0), lam(2) - lam(1)) / std::sqrt(2.0);
}

DirectorField orient_lift(const QTensorField& field, const Mask& region, double degeneracy_tol) {
    const LatticeBox& lat = field.lattice;
    if (region.size() != lat.size()) throw InvalidArgument("orient_lift: region mask size mismatch");
    DirectorField out(lat);
    std::vector<Vec3> line(lat.size(), Vec3::Zero());
    for (std::size_t i = 0; i < lat.size(); ++i)
        if (region[i]) line[i] = director_extract(field.values[i], degeneracy_tol).nu;

    std::deque<std::size_t> queue;
    for (std::size_t seed = 0; seed < lat.size(); ++seed) {
        if (!region[seed] || out.defined[seed]) continue;
        out.values[seed] = line[seed];
        out.defined[seed] = 1;
        queue.push_back(seed);
        while (!queue.empty()) {
            const std::size_t x = queue.front();
            queue.pop_front();
            for (int axis = 0; axis < lat.dim(); ++axis) {
                for (int sign : {-1, 1}) {
                    const long y = lat.neighbor(x, axis, sign);
                    if (y < 0 || !region[y]) continue;
                    const auto yi = static_cast<std::size_t>(y);
                    if (out.defined[yi]) {
                        if (out.values[x].dot(out.values[yi]) <= 0.0) {
                            const Vec3 p = lat.position(x);
                            throw LiftInconsistency("orient_lift: sign contradiction near (" + std::to_string(p(0)) +
                                                    ", " + std::to_string(p(1)) + ", " + std::to_string(p(2)) + ")");
                        }
                        continue;
                    }
                    const Vec3& nu = line[yi];
                    out.values[yi] = nu.dot(out.values[x]) < 0.0 ? Vec3(-nu) : nu;
                    out.defined[yi] = 1;
                    queue.push_back(yi);
                }
            }
        }
    }
    return out;
}

namespace {

void write_coords(std::FILE* f, const LatticeBox& lat, std::size_t i) {
    const Vec3 p = lat.position(i);
    if (lat.dim() == 3)
        std::fprintf(f, "%.17g,%.17g,%.17g", p(0), p(1), p(2));
    else
        std::fprintf(f, "%.17g,%.17g", p(0), p(1));
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

std::unique_ptr<std::FILE, FileCloser> open_or_throw(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "w"));
    if (!f) throw Error("cannot open " + path + " for writing");
    return f;
}

}  // namespace

void write_qfield_csv(const std::string& path, const QTensorField& field, const QFieldMeta& meta, const Mask& region) {
    const LatticeBox& lat = field.lattice;
    auto f = open_or_throw(path);
    std::fprintf(f.get(), lat.dim() == 3 ? "x,y,z," : "x,y,");
    std::fprintf(f.get(), "Q11,Q12,Q13,Q22,Q23,Q33\n");
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!region.empty() && !region[i]) continue;
        const QTensor& q = field.values[i];
        write_coords(f.get(), lat, i);
        std::fprintf(f.get(), ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", q(0, 0), q(0, 1), q(0, 2), q(1, 1), q(1, 2),
                     q(2, 2));
    }
    auto m = open_or_throw(path + ".meta");
    std::fprintf(m.get(), "R=%.17g\nN=%d\nd=%d\ndelta=%.17g\neps=%.17g\nalpha=%.17g\n", lat.radius(),
                 lat.nodes_per_axis(), lat.dim(), meta.delta, meta.eps, meta.alpha);
}

void write_director_csv(const std::string& path, const DirectorField& field) {
    const LatticeBox& lat = field.lattice;
    auto f = open_or_throw(path);
    std::fprintf(f.get(), lat.dim() == 3 ? "x,y,z,nx,ny,nz\n" : "x,y,nx,ny,nz\n");
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (!field.defined[i]) continue;
        const Vec3& n = field.values[i];
        write_coords(f.get(), lat, i);
        std::fprintf(f.get(), ",%.17g,%.17g,%.17g\n", n(0), n(1), n(2));
    }
}

}  // namespace onsager
