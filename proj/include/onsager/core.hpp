#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace onsager {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFourPi = 4.0 * kPi;

// Base class for every error raised by the library. The CLI maps the
// subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Top two eigenvalues of a Q-tensor are too close to pick a director.
class DegenerateQ : public Error {
public:
    using Error::Error;
};

// Sign propagation of a line field met a contradiction.
class LiftInconsistency : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class NoBracket : public Error {
public:
    using Error::Error;
};

class QuadratureInsufficient : public Error {
public:
    using Error::Error;
};

class PaddingError : public Error {
public:
    using Error::Error;
};

class ZeroVector : public Error {
public:
    using Error::Error;
};

// A state or field broke one of its documented invariants.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

inline Mat3 traceless(const Mat3& m) { return m - (m.trace() / 3.0) * Mat3::Identity(); }

inline Mat3 symmetrize(const Mat3& m) { return 0.5 * (m + m.transpose()); }

// Uniaxial tensor s (nu ⊗ nu - I/3).
inline Mat3 uniaxial(double s, const Vec3& nu) {
    return s * (nu * nu.transpose() - Mat3::Identity() / 3.0);
}

// Axial vector of the antisymmetric part of a*b for symmetric a, b:
// result_l = eps_{lkq} (a b)_{kq}, i.e. sum_i a^i ∧ b^i over rows.
inline Vec3 row_wedge_sum(const Mat3& a, const Mat3& b) {
    const Mat3 p = a.transpose() * b;
    return {p(1, 2) - p(2, 1), p(2, 0) - p(0, 2), p(0, 1) - p(1, 0)};
}

}  // namespace onsager
