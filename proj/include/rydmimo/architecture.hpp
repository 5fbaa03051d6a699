#pragma once

// Structured analog combiner W_RF = W_LO * W_LC of the four LO/APD reuse
// architectures (D&D, D&S, S&D, S&S).

#include "rydmimo/types.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace rydmimo {

/// LO phase resolution. `bits` empty means continuous phases.
struct PhaseResolution {
    std::optional<int> bits;

    static PhaseResolution infinite() { return {}; }
    static PhaseResolution finite(int b) { return {b}; }

    bool is_finite() const { return bits.has_value(); }
    long levels() const { return bits ? (1L << *bits) : 0; }
    bool operator==(const PhaseResolution&) const = default;
};

/// Fixed intra-block LO offsets phi_{i,k} = 0.1 pi (k - (N_lom - 1)/2), equal for every block.
inline RMatd default_intra_offsets(long n_blocks, long lo_depth)
{
    RMatd offsets(n_blocks, lo_depth);
    const double center = static_cast<double>(lo_depth - 1) / 2.0;
    for (long k = 0; k < lo_depth; ++k)
        offsets.col(k).setConstant(0.1 * std::numbers::pi * (static_cast<double>(k) - center));
    return offsets;
}

struct ReuseArchitecture {
    long n_blocks = 1;  // N_lon
    long lo_depth = 1;  // N_lom
    long apd_depth = 1; // N_lm
    RMatd intra_offsets = RMatd::Zero(1, 1);
    PhaseResolution resolution;

    long n_r() const { return n_blocks * lo_depth; }
    long n_rf() const { return n_r() / apd_depth; }

    /// Offsets default to the fixed 0.1*pi ramp; zero when lo_depth = 1.
    static ReuseArchitecture make(long n_blocks, long lo_depth, long apd_depth,
                                  PhaseResolution resolution = PhaseResolution::infinite())
    {
        ReuseArchitecture a;
        a.n_blocks = n_blocks;
        a.lo_depth = lo_depth;
        a.apd_depth = apd_depth;
        a.resolution = resolution;
        a.intra_offsets = lo_depth == 1 ? RMatd::Zero(n_blocks, 1) : default_intra_offsets(n_blocks, lo_depth);
        a.validate();
        return a;
    }

    void validate() const
    {
        if (n_blocks < 1 || lo_depth < 1 || apd_depth < 1)
            throw InvalidArchitecture("architecture: depths and block count must be positive");
        if (n_r() % apd_depth != 0)
            throw InvalidArchitecture("architecture: apd_depth=" + std::to_string(apd_depth) +
                                      " does not divide N_r=" + std::to_string(n_r()));
        if (intra_offsets.rows() != n_blocks || intra_offsets.cols() != lo_depth)
            throw InvalidArchitecture("architecture: intra_offsets must be n_blocks x lo_depth");
        if (!intra_offsets.allFinite())
            throw InvalidArchitecture("architecture: intra_offsets must be finite");
        if (lo_depth == 1 && !intra_offsets.isZero(0.0))
            throw InvalidArchitecture("architecture: lo_depth = 1 requires zero intra offsets");
        if (resolution.bits && (*resolution.bits < 1 || *resolution.bits > 30))
            throw InvalidArchitecture("architecture: resolution bits must be in [1, 30]");
    }
};

/// True iff every fiber-combiner group lies inside a single Cell & LO block.
inline bool is_proportional(const ReuseArchitecture& arch) { return arch.lo_depth % arch.apd_depth == 0; }

/// Feasibility of a phase under the given resolution (grid membership mod 2pi).
inline bool phase_is_feasible(double phase, const PhaseResolution& resolution, double tol = 1e-9)
{
    if (!std::isfinite(phase))
        return false;
    if (!resolution.is_finite())
        return true;
    const double step = two_pi<double> / static_cast<double>(resolution.levels());
    const double x = wrap_phase(phase) / step;
    return std::abs(x - std::round(x)) * step <= tol;
}

/// Fiber-combiner adjacency: N_r x (N_r / apd_depth), contiguous all-ones columns.
template <typename Scalar = double> RMat<Scalar> build_wlc(long n_r, long apd_depth)
{
    if (n_r < 1 || apd_depth < 1 || n_r % apd_depth != 0)
        throw InvalidArchitecture("build_wlc: apd_depth=" + std::to_string(apd_depth) +
                                  " does not divide n_r=" + std::to_string(n_r));
    const long n_rf = n_r / apd_depth;
    RMat<Scalar> w = RMat<Scalar>::Zero(n_r, n_rf);
    for (long c = 0; c < n_rf; ++c)
        w.block(c * apd_depth, c, apd_depth, 1).setOnes();
    return w;
}

/// Per-element LO phasors exp(j(phi_i + phi_{i,k})), block index outer.
template <typename Scalar = double>
CVec<Scalar> lo_diagonal(const ReuseArchitecture& arch, const Eigen::Ref<const RVecd>& phases)
{
    arch.validate();
    if (phases.size() != arch.n_blocks)
        throw InvalidArchitecture("build_wlo: expected " + std::to_string(arch.n_blocks) + " phases, got " +
                                  std::to_string(phases.size()));
    for (long i = 0; i < phases.size(); ++i)
        if (!phase_is_feasible(phases(i), arch.resolution))
            throw ConstraintViolation("build_wlo: phase " + std::to_string(phases(i)) + " of block " +
                                      std::to_string(i) + " is outside the feasible set");
    CVec<Scalar> d(arch.n_r());
    for (long i = 0; i < arch.n_blocks; ++i)
        for (long k = 0; k < arch.lo_depth; ++k)
            d(i * arch.lo_depth + k) = std::polar(Scalar(1), static_cast<Scalar>(phases(i) + arch.intra_offsets(i, k)));
    return d;
}

template <typename Scalar = double>
CMat<Scalar> build_wlo(const ReuseArchitecture& arch, const Eigen::Ref<const RVecd>& phases)
{
    return lo_diagonal<Scalar>(arch, phases).asDiagonal();
}

template <typename Scalar = double>
CMat<Scalar> compose_wrf(const ReuseArchitecture& arch, const Eigen::Ref<const RVecd>& phases)
{
    const CVec<Scalar> d = lo_diagonal<Scalar>(arch, phases);
    return d.asDiagonal() * build_wlc<Scalar>(arch.n_r(), arch.apd_depth).template cast<Complex<Scalar>>();
}

} // namespace rydmimo
