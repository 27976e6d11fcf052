#pragma once

#include "onsager/core.hpp"
#include "onsager/lattice.hpp"

#include <string>
#include <vector>

namespace onsager {

// Symmetric traceless 3x3 order parameter, stored as a full matrix.
using QTensor = Mat3;

// Symmetric and traceless to `tol`, Frobenius norm <= sqrt(2/3) + 1e-10.
bool is_qtensor(const QTensor& q, double tol = 1e-13);

struct QTensorField {
    LatticeBox lattice;
    std::vector<QTensor> values;

    QTensorField() = default;
    explicit QTensorField(const LatticeBox& lat) : lattice(lat), values(lat.size(), QTensor::Zero()) {}

    // One scalar component (i, j) as a lattice field.
    ScalarField component(int i, int j) const;
};

struct DirectorField {
    LatticeBox lattice;
    std::vector<Vec3> values;
    Mask defined;

    DirectorField() = default;
    explicit DirectorField(const LatticeBox& lat)
        : lattice(lat), values(lat.size(), Vec3::Zero()), defined(lat.size(), 0) {}
};

inline constexpr double kDefaultDegeneracyTol = 1e-6;

struct DirectorSample {
    double s = 0.0;
    Vec3 nu = Vec3::Zero();
};

// Top eigenpair: s = 3/2 λ_max, nu its unit eigenvector with the first
// nonzero component positive. DegenerateQ if the top two eigenvalues are
// closer than degeneracy_tol.
DirectorSample director_extract(const QTensor& q, double degeneracy_tol = kDefaultDegeneracyTol);

// Distance to the nearest uniaxial tensor s(ν⊗ν - I/3).
double uniaxiality_residual(const QTensor& q);

// Sign-consistent director over `region` by breadth-first propagation from
// the first region node (per connected component). Throws DegenerateQ or
// LiftInconsistency.
DirectorField orient_lift(const QTensorField& field, const Mask& region,
                          double degeneracy_tol = kDefaultDegeneracyTol);

struct QFieldMeta {
    double eps = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
};

// QFIELD-CSV over the nodes selected by `region` (all nodes if empty), plus
// `<path>.meta` listing R, N, d, delta, eps, alpha.
void write_qfield_csv(const std::string& path, const QTensorField& field, const QFieldMeta& meta,
                      const Mask& region = {});
void write_director_csv(const std::string& path, const DirectorField& field);

}  // namespace onsager
