#pragma once

// Hybrid combiner design: min || W_opt - W_LO W_LC W_BB ||_F over the LO
// phases (continuous or B-bit) and the digital combiner W_BB.

#include "rydmimo/architecture.hpp"
#include "rydmimo/types.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace rydmimo {

/// Starting point of finite-resolution runs: quantized continuous solution, or
/// the random start snapped to the grid.
enum class FiniteStart { ContinuousWarmStart, Random };

struct OptimizerConfig {
    double epsilon = 1e-4;    // stop when successive squared residuals differ by less
    long max_iterations = 100;
    FiniteStart finite_start = FiniteStart::ContinuousWarmStart;

    void validate() const
    {
        if (!(epsilon > 0.0))
            throw std::invalid_argument("optimizer: epsilon must be > 0");
        if (max_iterations < 1)
            throw std::invalid_argument("optimizer: max_iterations must be >= 1");
    }
};

enum class SolveMethod { AltMin, DirectProportional };
enum class SolverChoice { Auto, AltMin, Direct };

template <typename Scalar = double> struct CombinerSolution {
    RVecd phases;
    CMat<Scalar> w_bb;
    double residual = 0.0;
    long iterations = 0;
    SolveMethod method = SolveMethod::AltMin;
    bool converged = true;
    // Residual after every half-step (W_BB update, then phase update), ending
    // with the final W_BB refresh. Empty for the direct solver.
    std::vector<double> residual_history;
};

template <typename Scalar = double> struct DigitalReference {
    CMat<Scalar> w_opt; // N_r x N_s, first left singular vectors
    CMat<Scalar> f_opt; // N_t x N_s, first right singular vectors
    RVec<Scalar> singular_values;
};

/// Fully digital combiner/precoder from the SVD of H. Each column pair is
/// rotated so the largest-modulus entry of the U column is real positive.
template <typename Derived>
DigitalReference<typename Derived::RealScalar> optimal_digital_combiner(const Eigen::MatrixBase<Derived>& h,
                                                                        long n_streams)
{
    using Scalar = typename Derived::RealScalar;
    if (n_streams < 1 || n_streams > std::min<long>(h.rows(), h.cols()))
        throw InvalidPrecondition("optimal_digital_combiner: n_streams must be in [1, min(N_r, N_t)]");
    if (!h.allFinite())
        throw NumericError("optimal_digital_combiner: channel contains non-finite entries");

    Eigen::BDCSVD<CMat<Scalar>> svd(h.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericError("optimal_digital_combiner: SVD failed");

    DigitalReference<Scalar> ref;
    ref.singular_values = svd.singularValues();
    ref.w_opt = svd.matrixU().leftCols(n_streams);
    ref.f_opt = svd.matrixV().leftCols(n_streams);
    for (long k = 0; k < n_streams; ++k) {
        Eigen::Index r = 0;
        ref.w_opt.col(k).cwiseAbs().maxCoeff(&r);
        const Complex<Scalar> z = ref.w_opt(r, k);
        const Complex<Scalar> rot = std::abs(z) > Scalar(0) ? std::conj(z) / std::abs(z) : Complex<Scalar>(1);
        ref.w_opt.col(k) *= rot;
        ref.f_opt.col(k) *= rot;
    }
    return ref;
}

/// Least-squares digital combiner for a W_RF with mutually orthogonal
/// columns (every reuse architecture): W_BB = diag(1/||w_c||^2) W_RF^H W_opt.
template <typename DerivedRF, typename DerivedOpt>
CMat<typename DerivedRF::RealScalar> update_wbb(const Eigen::MatrixBase<DerivedRF>& w_rf,
                                                const Eigen::MatrixBase<DerivedOpt>& w_opt)
{
    using Scalar = typename DerivedRF::RealScalar;
    if (w_rf.rows() != w_opt.rows())
        throw std::invalid_argument("update_wbb: W_RF and W_opt row counts differ");
    const RVec<Scalar> norms = w_rf.colwise().squaredNorm().transpose();
    const Scalar floor = std::numeric_limits<Scalar>::epsilon() * std::max<Scalar>(Scalar(1), norms.maxCoeff());
    if (norms.size() == 0 || norms.minCoeff() <= floor)
        throw NumericError("update_wbb: W_RF is rank deficient (zero column)");
    return norms.cwiseInverse().asDiagonal() * (w_rf.adjoint() * w_opt);
}

/// Global minimizer over phi of ||Y - e^{j phi} X||_F, i.e. arg Tr[X^H Y] in
/// [0, 2pi). Returns 0 when the trace vanishes (objective is phase-free).
template <typename DerivedY, typename DerivedX>
typename DerivedY::RealScalar optimal_phase(const Eigen::MatrixBase<DerivedY>& block_target,
                                            const Eigen::MatrixBase<DerivedX>& block_product)
{
    using Scalar = typename DerivedY::RealScalar;
    if (block_target.rows() != block_product.rows() || block_target.cols() != block_product.cols())
        throw std::invalid_argument("optimal_phase: block shapes differ");
    const Complex<Scalar> tr = (block_product.adjoint() * block_target).trace();
    if (std::abs(tr) == Scalar(0))
        return Scalar(0);
    return wrap_phase(std::arg(tr));
}

/// Nearest point of {2 pi b / 2^B} under circular distance.
template <typename Scalar> Scalar quantize_phase(Scalar phase, int bits)
{
    if (bits < 1 || bits > 30)
        throw std::invalid_argument("quantize_phase: bits must be in [1, 30]");
    const long levels = 1L << bits;
    const Scalar step = two_pi<Scalar> / static_cast<Scalar>(levels);
    long b = std::lround(wrap_phase(phase) / step) % levels;
    return static_cast<Scalar>(b) * step;
}

inline double apply_resolution(double phase, const PhaseResolution& resolution)
{
    return resolution.is_finite() ? quantize_phase(phase, *resolution.bits) : wrap_phase(phase);
}

namespace detail {

// Structured kernels. `lo` is the N_r diagonal of W_LO; W_RF row r has its
// single nonzero lo(r) in column r / apd_depth.

template <typename Scalar>
CMat<Scalar> structured_wbb(const CVec<Scalar>& lo, long apd_depth, const CMat<Scalar>& w_opt)
{
    const long n_rf = lo.size() / apd_depth;
    CMat<Scalar> w_bb = CMat<Scalar>::Zero(n_rf, w_opt.cols());
    for (long r = 0; r < lo.size(); ++r)
        w_bb.row(r / apd_depth) += std::conj(lo(r)) * w_opt.row(r);
    w_bb /= static_cast<Scalar>(apd_depth);
    return w_bb;
}

template <typename Scalar>
double structured_residual(const CVec<Scalar>& lo, long apd_depth, const CMat<Scalar>& w_bb,
                           const CMat<Scalar>& w_opt)
{
    Scalar acc = 0;
    for (long r = 0; r < lo.size(); ++r)
        acc += (w_opt.row(r) - lo(r) * w_bb.row(r / apd_depth)).squaredNorm();
    return static_cast<double>(std::sqrt(acc));
}

template <typename Scalar> void fill_lo(const ReuseArchitecture& arch, const RVecd& phases, CVec<Scalar>& lo)
{
    for (long i = 0; i < arch.n_blocks; ++i)
        for (long k = 0; k < arch.lo_depth; ++k)
            lo(i * arch.lo_depth + k) =
                std::polar(Scalar(1), static_cast<Scalar>(phases(i) + arch.intra_offsets(i, k)));
}

} // namespace detail

/// ||W_opt - W_RF(phases) W_BB||_F.
template <typename Scalar>
double combiner_residual(const ReuseArchitecture& arch, const RVecd& phases, const CMat<Scalar>& w_bb,
                         const CMat<Scalar>& w_opt)
{
    const CVec<Scalar> lo = lo_diagonal<Scalar>(arch, phases);
    return detail::structured_residual<Scalar>(lo, arch.apd_depth, w_bb, w_opt);
}

namespace detail {

// Algorithm body from feasible starting phases.
template <typename Scalar>
CombinerSolution<Scalar> alternate_from(const ReuseArchitecture& arch, const CMat<Scalar>& w_opt,
                                        const OptimizerConfig& config, RVecd phases)
{
    const long m = arch.lo_depth;
    const long lm = arch.apd_depth;
    CVec<Scalar> lo(arch.n_r());
    fill_lo(arch, phases, lo);
    CVec<Scalar> offset_conj(arch.n_r());
    fill_lo(arch, RVecd::Zero(arch.n_blocks), offset_conj);
    offset_conj = offset_conj.conjugate().eval();

    CombinerSolution<Scalar> sol;
    sol.method = SolveMethod::AltMin;
    sol.converged = false;
    double previous = std::numeric_limits<double>::quiet_NaN();

    for (long p = 1; p <= config.max_iterations; ++p) {
        sol.w_bb = structured_wbb<Scalar>(lo, lm, w_opt);
        sol.residual_history.push_back(structured_residual<Scalar>(lo, lm, sol.w_bb, w_opt));

        // Blocks decouple for fixed W_BB: phi_i = arg Tr[X_i^H Y_i].
        for (long i = 0; i < arch.n_blocks; ++i) {
            Complex<Scalar> tr(0);
            for (long k = 0; k < m; ++k) {
                const long r = i * m + k;
                tr += offset_conj(r) * sol.w_bb.row(r / lm).dot(w_opt.row(r));
            }
            const double phi = std::abs(tr) == Scalar(0) ? 0.0 : wrap_phase(static_cast<double>(std::arg(tr)));
            phases(i) = apply_resolution(phi, arch.resolution);
        }
        fill_lo(arch, phases, lo);
        const double r = structured_residual<Scalar>(lo, lm, sol.w_bb, w_opt);
        sol.residual_history.push_back(r);
        sol.iterations = p;

        if (p > 1 && std::abs(r * r - previous * previous) < config.epsilon) {
            sol.converged = true;
            break;
        }
        previous = r;
    }

    sol.w_bb = structured_wbb<Scalar>(lo, lm, w_opt);
    sol.residual = structured_residual<Scalar>(lo, lm, sol.w_bb, w_opt);
    sol.residual_history.push_back(sol.residual);
    sol.phases = phases;
    return sol;
}

} // namespace detail

/// Alternating minimization: W_BB by least squares, then every block phase by
/// the closed-form rotation (quantized under finite resolution), until the
/// squared residual changes by less than epsilon between iterations.
///
/// Phases start uniform on [0, 2pi). Under finite resolution the start is
/// either snapped to the grid (FiniteStart::Random) or first refined with
/// continuous phases and then snapped (FiniteStart::ContinuousWarmStart); the
/// reported history and iteration count cover the quantized stage only.
template <typename Scalar, typename Rng>
CombinerSolution<Scalar> alternating_minimize(const ReuseArchitecture& arch, const CMat<Scalar>& w_opt,
                                              const OptimizerConfig& config, Rng& rng)
{
    arch.validate();
    config.validate();
    if (w_opt.rows() != arch.n_r())
        throw std::invalid_argument("alternating_minimize: W_opt has " + std::to_string(w_opt.rows()) +
                                    " rows, architecture has N_r=" + std::to_string(arch.n_r()));
    if (w_opt.cols() > arch.n_rf())
        throw InvalidPrecondition("alternating_minimize: N_s exceeds the number of laser chains");

    std::uniform_real_distribution<double> unif(0.0, two_pi<double>);
    RVecd phases(arch.n_blocks);
    for (long i = 0; i < arch.n_blocks; ++i)
        phases(i) = unif(rng);

    if (arch.resolution.is_finite() && config.finite_start == FiniteStart::ContinuousWarmStart) {
        ReuseArchitecture continuous = arch;
        continuous.resolution = PhaseResolution::infinite();
        phases = detail::alternate_from<Scalar>(continuous, w_opt, config, phases).phases;
    }
    for (long i = 0; i < arch.n_blocks; ++i)
        phases(i) = apply_resolution(phases(i), arch.resolution);
    return detail::alternate_from<Scalar>(arch, w_opt, config, std::move(phases));
}

/// Non-iterative solver for proportional reuse (apd_depth | lo_depth). All LO
/// phases are set to 0, which lies on every grid; each W_BB row is the
/// pseudoinverse of its rotated all-ones group vector applied to W_opt.
template <typename Scalar>
CombinerSolution<Scalar> direct_solve_proportional(const ReuseArchitecture& arch, const CMat<Scalar>& w_opt,
                                                   const RVecd* phases_override = nullptr)
{
    arch.validate();
    if (!is_proportional(arch))
        throw InvalidPrecondition("direct_solve_proportional: apd_depth=" + std::to_string(arch.apd_depth) +
                                  " does not divide lo_depth=" + std::to_string(arch.lo_depth));
    if (w_opt.rows() != arch.n_r())
        throw std::invalid_argument("direct_solve_proportional: W_opt row count does not match N_r");

    CombinerSolution<Scalar> sol;
    sol.method = SolveMethod::DirectProportional;
    sol.iterations = 0;
    sol.phases = phases_override ? *phases_override : RVecd::Zero(arch.n_blocks);
    if (sol.phases.size() != arch.n_blocks)
        throw std::invalid_argument("direct_solve_proportional: phase vector has wrong length");

    const long lm = arch.apd_depth;
    const long m = arch.lo_depth;
    sol.w_bb.resize(arch.n_rf(), w_opt.cols());
    for (long n = 0; n < arch.n_rf(); ++n) {
        const long block = (n * lm) / m;
        const long k0 = (n * lm) % m;
        const Complex<Scalar> common = std::polar(Scalar(1), static_cast<Scalar>(-sol.phases(block)));
        auto row = sol.w_bb.row(n);
        row.setZero();
        for (long t = 0; t < lm; ++t)
            row += std::polar(Scalar(1), static_cast<Scalar>(-arch.intra_offsets(block, k0 + t))) *
                   w_opt.row(n * lm + t);
        row *= common / static_cast<Scalar>(lm);
    }
    sol.residual = combiner_residual<Scalar>(arch, sol.phases, sol.w_bb, w_opt);
    return sol;
}

/// Auto picks the direct solver for proportional architectures.
template <typename Scalar, typename Rng>
CombinerSolution<Scalar> solve_combiner(const ReuseArchitecture& arch, const CMat<Scalar>& w_opt,
                                        const OptimizerConfig& config, Rng& rng, SolverChoice choice)
{
    const bool direct = choice == SolverChoice::Direct || (choice == SolverChoice::Auto && is_proportional(arch));
    if (direct)
        return direct_solve_proportional<Scalar>(arch, w_opt);
    return alternating_minimize<Scalar>(arch, w_opt, config, rng);
}

} // namespace rydmimo
