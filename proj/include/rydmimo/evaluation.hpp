#pragma once

// Achievable spectral efficiency with ideal precoding, and per-channel
// evaluation of reuse architectures and conventional partially-connected
// (PC) baselines.

#include "rydmimo/architecture.hpp"
#include "rydmimo/channel.hpp"
#include "rydmimo/optimizer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <string>
#include <vector>

namespace rydmimo {

/// log2 | I + snr/N_s (W)^+ H F F^H H^H W | for a full-column-rank combiner W.
/// The pseudoinverse form equals log2 | I + snr/N_s Q^H H F F^H H^H Q | with
/// Q an orthonormal basis of range(W), which is what gets evaluated.
template <typename DerivedH, typename DerivedW, typename DerivedF>
double spectral_efficiency(const Eigen::MatrixBase<DerivedH>& h, const Eigen::MatrixBase<DerivedW>& combiner,
                           const Eigen::MatrixBase<DerivedF>& f_opt, long n_streams, double snr_linear)
{
    using Scalar = typename DerivedH::RealScalar;
    using Mat = CMat<Scalar>;
    if (combiner.cols() != n_streams || f_opt.cols() != n_streams)
        throw std::invalid_argument("spectral_efficiency: combiner/precoder must have N_s columns");
    if (combiner.rows() != h.rows() || f_opt.rows() != h.cols())
        throw std::invalid_argument("spectral_efficiency: dimension mismatch with H");
    if (!(snr_linear >= 0.0))
        throw std::invalid_argument("spectral_efficiency: SNR must be nonnegative");

    Eigen::HouseholderQR<Mat> qr(combiner.derived());
    const auto& packed = qr.matrixQR();
    Scalar largest = 0;
    for (long k = 0; k < n_streams; ++k)
        largest = std::max(largest, std::abs(packed(k, k)));
    for (long k = 0; k < n_streams; ++k)
        if (!(std::abs(packed(k, k)) > Scalar(1e-12) * largest))
            throw NumericError("spectral_efficiency: combined combiner W_RF*W_BB is rank deficient (column " +
                               std::to_string(k) + " of " + std::to_string(n_streams) + ")");

    const Mat q = qr.householderQ() * Mat::Identity(combiner.rows(), n_streams);
    const Mat g = q.adjoint() * (h * f_opt);
    Mat gram = g * g.adjoint();
    gram = (Scalar(0.5) * (gram + gram.adjoint())).eval();

    Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw NumericError("spectral_efficiency: eigen-decomposition failed");
    const Scalar tol = Scalar(1e-9) * std::max<Scalar>(Scalar(1), eig.eigenvalues().cwiseAbs().maxCoeff());
    double rate = 0.0;
    const double factor = snr_linear / static_cast<double>(n_streams);
    for (long k = 0; k < n_streams; ++k) {
        const Scalar lambda = eig.eigenvalues()(k);
        if (lambda < -tol)
            throw NumericError("spectral_efficiency: negative eigenvalue " + std::to_string(lambda) +
                               " in the signal covariance");
        rate += std::log2(1.0 + factor * std::max<double>(0.0, static_cast<double>(lambda)));
    }
    return rate;
}

template <typename DerivedH, typename DerivedRF, typename DerivedBB, typename DerivedF>
double spectral_efficiency(const Eigen::MatrixBase<DerivedH>& h, const Eigen::MatrixBase<DerivedRF>& w_rf,
                           const Eigen::MatrixBase<DerivedBB>& w_bb, const Eigen::MatrixBase<DerivedF>& f_opt,
                           long n_streams, double snr_linear)
{
    return spectral_efficiency(h, (w_rf * w_bb).eval(), f_opt, n_streams, snr_linear);
}

/// W_RF(phases) * W_BB without materializing W_RF.
template <typename Scalar>
CMat<Scalar> combined_combiner(const ReuseArchitecture& arch, const RVecd& phases, const CMat<Scalar>& w_bb)
{
    const CVec<Scalar> lo = lo_diagonal<Scalar>(arch, phases);
    CMat<Scalar> w(arch.n_r(), w_bb.cols());
    for (long r = 0; r < arch.n_r(); ++r)
        w.row(r) = lo(r) * w_bb.row(r / arch.apd_depth);
    return w;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

template <typename Scalar = double> struct ArchitectureEvaluation {
    std::vector<double> spectral_efficiency; // one per SNR grid point
    CombinerSolution<Scalar> solution;
};

/// SE of the fully digital combiner W_opt on each SNR grid point.
template <typename Scalar>
std::vector<double> ideal_digital_se(const CMat<Scalar>& h, const DigitalReference<Scalar>& ref,
                                     const std::vector<double>& snr_linear)
{
    std::vector<double> out;
    out.reserve(snr_linear.size());
    for (double snr : snr_linear)
        out.push_back(spectral_efficiency(h, ref.w_opt, ref.f_opt, ref.w_opt.cols(), snr));
    return out;
}

/// Solves the combiner for `arch` against a precomputed digital reference and
/// evaluates SE on the grid.
template <typename Scalar, typename Rng>
ArchitectureEvaluation<Scalar> evaluate_architecture(const CMat<Scalar>& h, const DigitalReference<Scalar>& ref,
                                                     const ReuseArchitecture& arch,
                                                     const std::vector<double>& snr_linear,
                                                     SolverChoice choice, const OptimizerConfig& config, Rng& rng)
{
    if (h.rows() != arch.n_r())
        throw std::invalid_argument("evaluate_architecture: channel has " + std::to_string(h.rows()) +
                                    " receive rows, architecture has N_r=" + std::to_string(arch.n_r()));
    ArchitectureEvaluation<Scalar> out;
    out.solution = solve_combiner<Scalar>(arch, ref.w_opt, config, rng, choice);
    const CMat<Scalar> w = combined_combiner<Scalar>(arch, out.solution.phases, out.solution.w_bb);
    const long n_s = ref.w_opt.cols();
    for (double snr : snr_linear)
        out.spectral_efficiency.push_back(spectral_efficiency(h, w, ref.f_opt, n_s, snr));
    return out;
}

template <typename Scalar, typename Rng>
ArchitectureEvaluation<Scalar> evaluate_architecture(const CMat<Scalar>& h, const ReuseArchitecture& arch,
                                                     long n_streams, const std::vector<double>& snr_linear,
                                                     SolverChoice choice, const OptimizerConfig& config, Rng& rng)
{
    const auto ref = optimal_digital_combiner(h, n_streams);
    return evaluate_architecture<Scalar>(h, ref, arch, snr_linear, choice, config, rng);
}

/// Conventional PC array as a reuse architecture: one free phase shifter per
/// antenna, adders of depth n_r / n_rf_chains, no fixed offsets.
inline ReuseArchitecture pc_architecture(long n_r, long n_rf_chains,
                                         PhaseResolution resolution = PhaseResolution::infinite())
{
    if (n_rf_chains < 1 || n_r % n_rf_chains != 0)
        throw InvalidArchitecture("pc baseline: n_rf_chains=" + std::to_string(n_rf_chains) +
                                  " does not divide n_r=" + std::to_string(n_r));
    return ReuseArchitecture::make(n_r, 1, n_r / n_rf_chains, resolution);
}

/// PC baseline solved with the same alternating minimization. The geometry
/// only shapes the channel (hence W_opt); it is checked for consistency here.
template <typename Scalar, typename Rng>
CombinerSolution<Scalar> conventional_pc_baseline(const ArrayGeometry& geometry, long n_r, long n_rf_chains,
                                                  const CMat<Scalar>& w_opt, const OptimizerConfig& config, Rng& rng,
                                                  PhaseResolution resolution = PhaseResolution::infinite())
{
    geometry.validate();
    if (geometry.n_elements() != n_r)
        throw InvalidGeometry("pc baseline: geometry has " + std::to_string(geometry.n_elements()) +
                              " elements, expected " + std::to_string(n_r));
    return alternating_minimize<Scalar>(pc_architecture(n_r, n_rf_chains, resolution), w_opt, config, rng);
}

} // namespace rydmimo
