#pragma once

// Monte-Carlo sweeps over paired channel realizations.

#include "rydmimo/architecture.hpp"
#include "rydmimo/channel.hpp"
#include "rydmimo/optimizer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rydmimo {

enum class CurveKind { Rydberg, UpaPC, NonUpaPC, IdealDigitalReuse, IdealDigitalNoReuse };
enum class SweepAxis { Snr, Chains, LoDepth, Iteration };

std::string to_string(CurveKind kind);
std::string to_string(SweepAxis axis);

/// One curve of an experiment. For PC baselines `apd_depth` is the adder
/// depth and `lo_depth` selects the layout (N_r = n_blocks * lo_depth).
struct CurveSpec {
    std::string label;
    CurveKind kind = CurveKind::Rydberg;
    long lo_depth = 1;
    long apd_depth = 1;
    PhaseResolution resolution;
    SolverChoice solver = SolverChoice::Auto;
};

/// Channel settings shared by every curve; the receive geometry is derived
/// per curve from n_blocks and lo_depth.
struct ChannelSettings {
    long n_tx = 144;
    long n_clusters = 5;
    long n_rays = 10;
    std::vector<double> cluster_powers = std::vector<double>(5, 1.0);
    double angular_spread_deg = 10.0;
    double block_spacing = 0.5;
    double intra_spacing = 0.05;
    double tx_spacing = 0.5;
};

struct ExperimentSpec {
    std::string name = "experiment";
    ChannelSettings channel;
    long n_blocks = 36;
    long n_streams = 3;
    std::vector<double> snr_db{0.0};
    SweepAxis axis = SweepAxis::Snr;
    std::vector<double> sweep_values; // chains or LO depths; unused for Snr/Iteration
    long trials = 500;
    std::uint64_t seed = 1;
    OptimizerConfig optimizer;
    std::vector<CurveSpec> curves;
    unsigned threads = 1;

    /// Throws std::invalid_argument whose message starts with the field path.
    void validate() const;
};

/// A curve resolved at one sweep point.
struct ResolvedPoint {
    ArrayGeometry geometry;
    ReuseArchitecture architecture; // unused for ideal-digital curves
    bool ideal_digital = false;
    SolverChoice solver = SolverChoice::Auto;
};

ResolvedPoint resolve_point(const ExperimentSpec& spec, const CurveSpec& curve, double sweep_value);

/// X-axis values of the sweep (SNR in dB, chain counts, LO depths or iterations).
std::vector<double> sweep_axis_values(const ExperimentSpec& spec);

/// Raw per-trial metric values, indexed [trial][curve][point]. Failed
/// trial/curve/point cells hold NaN and are listed in `failures`.
struct TrialSamples {
    std::vector<std::string> labels;
    std::vector<double> points;
    long trials = 0;
    std::vector<double> values;
    std::vector<std::string> failures;

    double value(long trial, long curve, long point) const
    {
        return values[static_cast<std::size_t>((trial * static_cast<long>(labels.size()) + curve) *
                                                   static_cast<long>(points.size()) +
                                               point)];
    }
    std::vector<double> series(long curve, long point) const;
};

struct ResultRow {
    std::string label;
    double sweep_value = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    long trials = 0;
};

struct ResultTable {
    std::string sweep_param;
    std::uint64_t seed = 0;
    std::vector<ResultRow> rows;
    std::vector<std::string> failures;
};

TrialSamples run_trials(const ExperimentSpec& spec);
ResultTable aggregate(const ExperimentSpec& spec, const TrialSamples& samples);
ResultTable run_experiment(const ExperimentSpec& spec);

/// Pairwise (cascade) summation; deterministic for a given input order.
double pairwise_sum(std::span<const double> values);

struct SampleStats {
    double mean = 0.0;
    double std_error = 0.0;
    long count = 0;
};

/// Mean and standard error over the finite entries.
SampleStats sample_stats(std::span<const double> values);

/// Statistics of the paired differences a[t] - b[t] over trials where both are finite.
SampleStats paired_difference(std::span<const double> a, std::span<const double> b);

} // namespace rydmimo
