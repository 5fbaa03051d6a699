#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rydmimo {

template <typename Scalar> using Complex = std::complex<Scalar>;
template <typename Scalar> using CMat = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar> using CVec = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar> using RMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar> using RVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatd = CMat<double>;
using CVecd = CVec<double>;
using RMatd = RMat<double>;
using RVecd = RVec<double>;

template <typename Scalar> inline constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;

// Error taxonomy. Everything derives from std::invalid_argument or
// std::runtime_error so callers can catch coarsely.
struct InvalidGeometry : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidArchitecture : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConstraintViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidPrecondition : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Integer square root if `n` is a perfect square, -1 otherwise.
inline long exact_sqrt(long n)
{
    if (n < 0)
        return -1;
    long r = 0;
    while ((r + 1) * (r + 1) <= n)
        ++r;
    return r * r == n ? r : -1;
}

/// Wraps an angle into [0, 2pi).
template <typename Scalar> Scalar wrap_phase(Scalar phase)
{
    Scalar w = std::fmod(phase, two_pi<Scalar>);
    if (w < Scalar(0))
        w += two_pi<Scalar>;
    if (w >= two_pi<Scalar>)
        w = Scalar(0);
    return w;
}

} // namespace rydmimo
