#pragma once

// Clustered (Saleh-Valenzuela) narrowband mmWave channel and array responses
// for square UPAs and the Rydberg block layout (UPA of blocks, each block a
// short axial line of sub-elements).

#include "rydmimo/types.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace rydmimo {

enum class ArrayKind { UPA, RydbergNonUPA };

struct ArrayGeometry {
    ArrayKind kind = ArrayKind::UPA;
    long n_blocks = 1;          // UPA: total elements
    long n_per_block = 1;       // UPA: always 1
    double block_spacing = 0.5; // wavelengths
    double intra_spacing = 0.05;

    long n_elements() const { return n_blocks * n_per_block; }

    static ArrayGeometry upa(long n, double spacing = 0.5)
    {
        return {ArrayKind::UPA, n, 1, spacing, 0.0};
    }
    static ArrayGeometry rydberg(long blocks, long per_block, double spacing = 0.5, double intra = 0.05)
    {
        return {ArrayKind::RydbergNonUPA, blocks, per_block, spacing, intra};
    }

    void validate() const
    {
        if (n_blocks < 1 || n_per_block < 1)
            throw InvalidGeometry("array geometry: element counts must be positive");
        if (exact_sqrt(n_blocks) < 0)
            throw InvalidGeometry("array geometry: n_blocks=" + std::to_string(n_blocks) + " is not a perfect square");
        if (kind == ArrayKind::UPA && n_per_block != 1)
            throw InvalidGeometry("array geometry: UPA requires n_per_block = 1");
        if (!(block_spacing > 0.0) || !std::isfinite(block_spacing))
            throw InvalidGeometry("array geometry: block_spacing must be > 0");
        if (!(intra_spacing >= 0.0) || !std::isfinite(intra_spacing))
            throw InvalidGeometry("array geometry: intra_spacing must be >= 0");
    }

    bool operator==(const ArrayGeometry&) const = default;
};

struct ChannelParams {
    long n_tx = 144;
    ArrayGeometry rx_geometry = ArrayGeometry::upa(36);
    long n_clusters = 5;
    long n_rays = 10;
    std::vector<double> cluster_powers = std::vector<double>(5, 1.0);
    double angular_spread = 10.0 * std::numbers::pi / 180.0; // radians
    double tx_spacing = 0.5;

    void validate() const
    {
        if (n_tx < 1 || exact_sqrt(n_tx) < 0)
            throw InvalidGeometry("channel: n_tx=" + std::to_string(n_tx) + " is not a perfect square");
        rx_geometry.validate();
        if (n_clusters < 1 || n_rays < 1)
            throw std::invalid_argument("channel: n_clusters and n_rays must be positive");
        if (static_cast<long>(cluster_powers.size()) != n_clusters)
            throw std::invalid_argument("channel: cluster_powers must have n_clusters entries");
        for (double p : cluster_powers)
            if (!(p > 0.0) || !std::isfinite(p))
                throw std::invalid_argument("channel: cluster powers must be positive");
        if (!(angular_spread >= 0.0) || !std::isfinite(angular_spread))
            throw std::invalid_argument("channel: angular_spread must be >= 0");
        if (!(tx_spacing > 0.0))
            throw InvalidGeometry("channel: tx_spacing must be > 0");
    }
};

template <typename Scalar = double> struct PathMeta {
    Complex<Scalar> gain;
    Scalar aoa_azimuth, aoa_elevation;
    Scalar aod_azimuth, aod_elevation;
};

template <typename Scalar = double> struct ChannelRealization {
    CMat<Scalar> matrix; // N_r x N_t
    std::vector<PathMeta<Scalar>> paths;
};

/// Square-UPA response, element index q1 * sqrt(N) + q2 (q2 fastest), unit norm.
template <typename Scalar>
CVec<Scalar> upa_response(Scalar azimuth, Scalar elevation, long n_elements, Scalar spacing)
{
    const long side = exact_sqrt(n_elements);
    if (n_elements < 1 || side < 0)
        throw InvalidGeometry("upa_response: n_elements=" + std::to_string(n_elements) + " is not a perfect square");
    if (!(spacing > Scalar(0)))
        throw InvalidGeometry("upa_response: spacing must be > 0");

    const Scalar k = two_pi<Scalar> * spacing;
    const Scalar u = std::sin(azimuth) * std::sin(elevation);
    const Scalar v = std::cos(elevation);
    const Scalar norm = Scalar(1) / std::sqrt(static_cast<Scalar>(n_elements));

    CVec<Scalar> a(n_elements);
    for (long q1 = 0; q1 < side; ++q1)
        for (long q2 = 0; q2 < side; ++q2)
            a(q1 * side + q2) = std::polar(norm, k * (Scalar(q1) * u + Scalar(q2) * v));
    return a;
}

/// Axial response of one block: symmetric offsets (k - (n-1)/2) at `spacing`.
template <typename Scalar> CVec<Scalar> axial_response(Scalar elevation, long n, Scalar spacing)
{
    const Scalar k = two_pi<Scalar> * spacing * std::cos(elevation);
    const Scalar center = Scalar(n - 1) / Scalar(2);
    const Scalar norm = Scalar(1) / std::sqrt(static_cast<Scalar>(n));
    CVec<Scalar> a(n);
    for (long i = 0; i < n; ++i)
        a(i) = std::polar(norm, k * (Scalar(i) - center));
    return a;
}

/// Rydberg block-array response: UPA over blocks (outer) Kronecker axial (inner).
template <typename Scalar>
CVec<Scalar> rydberg_response(Scalar azimuth, Scalar elevation, const ArrayGeometry& geometry)
{
    if (geometry.kind != ArrayKind::RydbergNonUPA)
        throw InvalidGeometry("rydberg_response: geometry is not a Rydberg non-UPA layout");
    geometry.validate();
    const CVec<Scalar> outer =
        upa_response<Scalar>(azimuth, elevation, geometry.n_blocks, static_cast<Scalar>(geometry.block_spacing));
    const CVec<Scalar> inner =
        axial_response<Scalar>(elevation, geometry.n_per_block, static_cast<Scalar>(geometry.intra_spacing));
    const long m = geometry.n_per_block;
    CVec<Scalar> a(geometry.n_elements());
    for (long b = 0; b < geometry.n_blocks; ++b)
        a.segment(b * m, m) = outer(b) * inner;
    return a;
}

/// Receive response dispatched on the geometry kind.
template <typename Scalar> CVec<Scalar> array_response(Scalar azimuth, Scalar elevation, const ArrayGeometry& geometry)
{
    if (geometry.kind == ArrayKind::UPA)
        return upa_response<Scalar>(azimuth, elevation, geometry.n_blocks, static_cast<Scalar>(geometry.block_spacing));
    return rydberg_response<Scalar>(azimuth, elevation, geometry);
}

/// Zero-mean Laplacian with the given standard deviation (scale = sd / sqrt 2).
template <typename Scalar, typename Rng> Scalar sample_laplacian(Rng& rng, Scalar std_dev)
{
    if (std_dev == Scalar(0))
        return Scalar(0);
    std::uniform_real_distribution<Scalar> unif(Scalar(-0.5), Scalar(0.5));
    Scalar u = unif(rng);
    while (std::abs(u) >= Scalar(0.5))
        u = unif(rng);
    const Scalar scale = std_dev / std::sqrt(Scalar(2));
    return -scale * (u < 0 ? Scalar(-1) : Scalar(1)) * std::log1p(-Scalar(2) * std::abs(u));
}

/// Draws per-path gains and angles. Depends only on cluster/ray counts,
/// powers and spread, so the same draw can be projected onto several
/// receive geometries for paired comparisons.
template <typename Scalar = double, typename Rng>
std::vector<PathMeta<Scalar>> draw_paths(const ChannelParams& params, Rng& rng)
{
    params.validate();
    std::uniform_real_distribution<Scalar> azimuth_mean(Scalar(0), two_pi<Scalar>);
    std::uniform_real_distribution<Scalar> elevation_mean(Scalar(0), std::numbers::pi_v<Scalar>);
    std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
    const Scalar spread = static_cast<Scalar>(params.angular_spread);

    std::vector<PathMeta<Scalar>> paths;
    paths.reserve(static_cast<std::size_t>(params.n_clusters * params.n_rays));
    for (long i = 0; i < params.n_clusters; ++i) {
        const Scalar aoa_az = azimuth_mean(rng);
        const Scalar aoa_el = elevation_mean(rng);
        const Scalar aod_az = azimuth_mean(rng);
        const Scalar aod_el = elevation_mean(rng);
        const Scalar sd = std::sqrt(static_cast<Scalar>(params.cluster_powers[static_cast<std::size_t>(i)]) / Scalar(2));
        for (long l = 0; l < params.n_rays; ++l) {
            PathMeta<Scalar> p;
            const Scalar re = gauss(rng);
            const Scalar im = gauss(rng);
            p.gain = {sd * re, sd * im};
            p.aoa_azimuth = aoa_az + sample_laplacian(rng, spread);
            p.aoa_elevation = aoa_el + sample_laplacian(rng, spread);
            p.aod_azimuth = aod_az + sample_laplacian(rng, spread);
            p.aod_elevation = aod_el + sample_laplacian(rng, spread);
            paths.push_back(p);
        }
    }
    return paths;
}

/// H = sqrt(Nt Nr / L) * sum_l gain_l a_r(l) a_t(l)^H over the given paths.
template <typename Scalar = double>
ChannelRealization<Scalar> assemble_channel(const ChannelParams& params, std::vector<PathMeta<Scalar>> paths)
{
    params.validate();
    const long n_r = params.rx_geometry.n_elements();
    const long n_t = params.n_tx;
    const Scalar scale =
        std::sqrt(static_cast<Scalar>(n_t * n_r) / static_cast<Scalar>(params.n_clusters * params.n_rays));

    // Rank-L update H = A_r diag(g) A_t^H is cheaper as one GEMM.
    const long n_paths = static_cast<long>(paths.size());
    CMat<Scalar> rx(n_r, n_paths), tx(n_t, n_paths);
    for (long l = 0; l < n_paths; ++l) {
        const auto& p = paths[static_cast<std::size_t>(l)];
        rx.col(l) = scale * p.gain * array_response<Scalar>(p.aoa_azimuth, p.aoa_elevation, params.rx_geometry);
        tx.col(l) = upa_response<Scalar>(p.aod_azimuth, p.aod_elevation, n_t, static_cast<Scalar>(params.tx_spacing));
    }
    ChannelRealization<Scalar> out;
    out.matrix = rx * tx.adjoint();
    out.paths = std::move(paths);
    return out;
}

template <typename Scalar = double, typename Rng>
ChannelRealization<Scalar> generate_channel(const ChannelParams& params, Rng& rng)
{
    return assemble_channel<Scalar>(params, draw_paths<Scalar>(params, rng));
}

} // namespace rydmimo
