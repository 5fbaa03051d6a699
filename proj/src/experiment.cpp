#include "rydmimo/experiment.hpp"

#include "rydmimo/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace rydmimo {

std::string to_string(CurveKind kind)
{
    switch (kind) {
    case CurveKind::Rydberg: return "rydberg";
    case CurveKind::UpaPC: return "upa_pc";
    case CurveKind::NonUpaPC: return "nonupa_pc";
    case CurveKind::IdealDigitalReuse: return "ideal_digital_reuse";
    case CurveKind::IdealDigitalNoReuse: return "ideal_digital_noreuse";
    }
    return "unknown";
}

std::string to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::Snr: return "snr_db";
    case SweepAxis::Chains: return "n_rf";
    case SweepAxis::LoDepth: return "lo_depth";
    case SweepAxis::Iteration: return "iteration";
    }
    return "unknown";
}

namespace {

using Engine = std::mt19937_64;

// Independent substream for (seed, trial, purpose, key).
Engine substream(std::uint64_t seed, long trial, std::uint32_t purpose, long key)
{
    const auto t = static_cast<std::uint64_t>(trial);
    const auto k = static_cast<std::uint64_t>(key);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32),
                      purpose, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    return Engine(seq);
}

long as_count(double v, const std::string& what)
{
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9)
        throw std::invalid_argument(what + " must be a positive integer, got " + std::to_string(v));
    return static_cast<long>(v);
}

ChannelParams channel_params(const ExperimentSpec& spec, const ArrayGeometry& rx)
{
    ChannelParams p;
    p.n_tx = spec.channel.n_tx;
    p.rx_geometry = rx;
    p.n_clusters = spec.channel.n_clusters;
    p.n_rays = spec.channel.n_rays;
    p.cluster_powers = spec.channel.cluster_powers;
    p.angular_spread = spec.channel.angular_spread_deg * std::numbers::pi / 180.0;
    p.tx_spacing = spec.channel.tx_spacing;
    return p;
}

ArrayGeometry rydberg_layout(const ExperimentSpec& spec, long lo_depth)
{
    if (lo_depth == 1)
        return ArrayGeometry::upa(spec.n_blocks, spec.channel.block_spacing);
    return ArrayGeometry::rydberg(spec.n_blocks, lo_depth, spec.channel.block_spacing, spec.channel.intra_spacing);
}

struct CachedChannel {
    ArrayGeometry geometry;
    CMatd h;
    DigitalReference<double> ref;
};

} // namespace

ResolvedPoint resolve_point(const ExperimentSpec& spec, const CurveSpec& curve, double sweep_value)
{
    long lo_depth = curve.lo_depth;
    long apd_depth = curve.apd_depth;
    if (spec.axis == SweepAxis::LoDepth)
        lo_depth = as_count(sweep_value, "lo_depth sweep value");
    if (lo_depth < 1)
        throw InvalidArchitecture("lo_depth must be positive");
    const long n_r = spec.n_blocks * lo_depth;
    const bool ideal = curve.kind == CurveKind::IdealDigitalReuse || curve.kind == CurveKind::IdealDigitalNoReuse;
    if (spec.axis == SweepAxis::Chains && !ideal) {
        const long chains = as_count(sweep_value, "chain sweep value");
        if (n_r % chains != 0)
            throw InvalidArchitecture("chain count " + std::to_string(chains) + " does not divide N_r=" +
                                      std::to_string(n_r));
        apd_depth = n_r / chains;
    }

    ResolvedPoint rp;
    rp.solver = curve.solver;
    switch (curve.kind) {
    case CurveKind::Rydberg:
        rp.geometry = rydberg_layout(spec, lo_depth);
        rp.architecture = ReuseArchitecture::make(spec.n_blocks, lo_depth, apd_depth, curve.resolution);
        break;
    case CurveKind::UpaPC:
        rp.geometry = ArrayGeometry::upa(n_r, spec.channel.block_spacing);
        if (apd_depth < 1 || n_r % apd_depth != 0)
            throw InvalidArchitecture("apd_depth=" + std::to_string(apd_depth) + " does not divide N_r=" +
                                      std::to_string(n_r));
        rp.architecture = pc_architecture(n_r, n_r / apd_depth, curve.resolution);
        rp.solver = SolverChoice::AltMin;
        break;
    case CurveKind::NonUpaPC:
        rp.geometry = rydberg_layout(spec, lo_depth);
        if (apd_depth < 1 || n_r % apd_depth != 0)
            throw InvalidArchitecture("apd_depth=" + std::to_string(apd_depth) + " does not divide N_r=" +
                                      std::to_string(n_r));
        rp.architecture = pc_architecture(n_r, n_r / apd_depth, curve.resolution);
        rp.solver = SolverChoice::AltMin;
        break;
    case CurveKind::IdealDigitalReuse:
        rp.geometry = rydberg_layout(spec, lo_depth);
        rp.architecture = ReuseArchitecture::make(spec.n_blocks, lo_depth, 1);
        rp.ideal_digital = true;
        break;
    case CurveKind::IdealDigitalNoReuse:
        rp.geometry = ArrayGeometry::upa(spec.n_blocks, spec.channel.block_spacing);
        rp.architecture = ReuseArchitecture::make(spec.n_blocks, 1, 1);
        rp.ideal_digital = true;
        break;
    }
    rp.geometry.validate();
    return rp;
}

std::vector<double> sweep_axis_values(const ExperimentSpec& spec)
{
    switch (spec.axis) {
    case SweepAxis::Snr: return spec.snr_db;
    case SweepAxis::Chains:
    case SweepAxis::LoDepth: return spec.sweep_values;
    case SweepAxis::Iteration: {
        std::vector<double> it(static_cast<std::size_t>(spec.optimizer.max_iterations + 1));
        for (std::size_t i = 0; i < it.size(); ++i)
            it[i] = static_cast<double>(i);
        return it;
    }
    }
    return {};
}

void ExperimentSpec::validate() const
{
    if (trials < 1)
        throw std::invalid_argument("trials: must be >= 1");
    if (threads < 1)
        throw std::invalid_argument("threads: must be >= 1");
    if (n_blocks < 1 || exact_sqrt(n_blocks) < 0)
        throw std::invalid_argument("n_blocks: " + std::to_string(n_blocks) + " is not a positive perfect square");
    if (n_streams < 1)
        throw std::invalid_argument("n_streams: must be >= 1");
    if (snr_db.empty())
        throw std::invalid_argument("snr_db: at least one SNR value is required");
    for (double s : snr_db)
        if (!std::isfinite(s))
            throw std::invalid_argument("snr_db: values must be finite");
    if ((axis == SweepAxis::Chains || axis == SweepAxis::LoDepth)) {
        if (sweep_values.empty())
            throw std::invalid_argument("sweep.values: empty sweep");
        if (snr_db.size() != 1)
            throw std::invalid_argument("snr_db: " + to_string(axis) + " sweeps take exactly one SNR value");
    }
    if (curves.empty())
        throw std::invalid_argument("curves: at least one curve is required");
    try {
        optimizer.validate();
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("optimizer: ") + e.what());
    }
    try {
        channel_params(*this, ArrayGeometry::upa(n_blocks, channel.block_spacing)).validate();
        if (!(channel.intra_spacing >= 0.0))
            throw InvalidGeometry("intra_spacing must be >= 0");
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("channel: ") + e.what());
    }
    if (n_streams > channel.n_tx)
        throw std::invalid_argument("n_streams: N_s=" + std::to_string(n_streams) + " exceeds N_t=" +
                                    std::to_string(channel.n_tx));

    const std::vector<double> xs = axis == SweepAxis::Snr || axis == SweepAxis::Iteration
                                       ? std::vector<double>{0.0}
                                       : sweep_values;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const std::string path = "curves[" + std::to_string(c) + "]";
        if (curves[c].label.empty())
            throw std::invalid_argument(path + ".label: must be nonempty");
        for (double x : xs) {
            ResolvedPoint rp;
            try {
                rp = resolve_point(*this, curves[c], x);
            } catch (const std::exception& e) {
                throw std::invalid_argument(path + ": " + e.what());
            }
            const long n_r = rp.geometry.n_elements();
            const long n_rf = rp.ideal_digital ? n_r : rp.architecture.n_rf();
            if (n_streams > n_rf || n_rf > n_r)
                throw std::invalid_argument(path + ": N_s=" + std::to_string(n_streams) + ", N_RF=" +
                                            std::to_string(n_rf) + ", N_r=" + std::to_string(n_r) +
                                            " violate N_s <= N_RF <= N_r");
        }
    }
}

std::vector<double> TrialSamples::series(long curve, long point) const
{
    std::vector<double> out(static_cast<std::size_t>(trials));
    for (long t = 0; t < trials; ++t)
        out[static_cast<std::size_t>(t)] = value(t, curve, point);
    return out;
}

namespace {

struct TrialOutput {
    std::vector<double> values; // [curve][point]
    std::vector<std::string> failures;
};

TrialOutput run_single_trial(const ExperimentSpec& spec, const std::vector<double>& points, long trial)
{
    const long n_curves = static_cast<long>(spec.curves.size());
    const long n_points = static_cast<long>(points.size());
    TrialOutput out;
    out.values.assign(static_cast<std::size_t>(n_curves * n_points), std::numeric_limits<double>::quiet_NaN());

    Engine channel_rng = substream(spec.seed, trial, 0, 0);
    const auto paths =
        draw_paths<double>(channel_params(spec, ArrayGeometry::upa(spec.n_blocks, spec.channel.block_spacing)),
                           channel_rng);

    std::deque<CachedChannel> cache;
    auto channel_for = [&](const ArrayGeometry& g) -> const CachedChannel& {
        for (const auto& c : cache)
            if (c.geometry == g)
                return c;
        CachedChannel entry;
        entry.geometry = g;
        entry.h = assemble_channel<double>(channel_params(spec, g), paths).matrix;
        entry.ref = optimal_digital_combiner(entry.h, spec.n_streams);
        cache.push_back(std::move(entry));
        return cache.back();
    };

    std::vector<double> snr_linear;
    for (double s : spec.snr_db)
        snr_linear.push_back(db_to_linear(s));

    for (long c = 0; c < n_curves; ++c) {
        const CurveSpec& curve = spec.curves[static_cast<std::size_t>(c)];
        double* row = out.values.data() + c * n_points;

        auto solve = [&](const ResolvedPoint& rp, const CachedChannel& ch) {
            Engine init_rng = substream(spec.seed, trial, 1, rp.architecture.n_blocks);
            return solve_combiner<double>(rp.architecture, ch.ref.w_opt, spec.optimizer, init_rng, rp.solver);
        };

        try {
            if (spec.axis == SweepAxis::Snr) {
                const ResolvedPoint rp = resolve_point(spec, curve, 0.0);
                const CachedChannel& ch = channel_for(rp.geometry);
                if (rp.ideal_digital) {
                    const auto se = ideal_digital_se(ch.h, ch.ref, snr_linear);
                    std::copy(se.begin(), se.end(), row);
                } else {
                    const auto sol = solve(rp, ch);
                    const CMatd w = combined_combiner<double>(rp.architecture, sol.phases, sol.w_bb);
                    for (long p = 0; p < n_points; ++p)
                        row[p] = spectral_efficiency(ch.h, w, ch.ref.f_opt, spec.n_streams,
                                                     snr_linear[static_cast<std::size_t>(p)]);
                }
            } else if (spec.axis == SweepAxis::Iteration) {
                const ResolvedPoint rp = resolve_point(spec, curve, 0.0);
                const CachedChannel& ch = channel_for(rp.geometry);
                if (rp.ideal_digital) {
                    std::fill(row, row + n_points, 0.0);
                } else {
                    const auto sol = solve(rp, ch);
                    const auto& hist = sol.residual_history;
                    for (long p = 0; p < n_points; ++p) {
                        const std::size_t idx = p == 0 ? 0 : static_cast<std::size_t>(2 * p - 1);
                        row[p] = hist.empty() ? sol.residual : idx < hist.size() ? hist[idx] : hist.back();
                    }
                }
            } else {
                for (long p = 0; p < n_points; ++p) {
                    const ResolvedPoint rp = resolve_point(spec, curve, points[static_cast<std::size_t>(p)]);
                    const CachedChannel& ch = channel_for(rp.geometry);
                    if (rp.ideal_digital) {
                        row[p] = ideal_digital_se(ch.h, ch.ref, {snr_linear.front()}).front();
                    } else {
                        const auto sol = solve(rp, ch);
                        const CMatd w = combined_combiner<double>(rp.architecture, sol.phases, sol.w_bb);
                        row[p] = spectral_efficiency(ch.h, w, ch.ref.f_opt, spec.n_streams, snr_linear.front());
                    }
                }
            }
        } catch (const std::exception& e) {
            std::fill(row, row + n_points, std::numeric_limits<double>::quiet_NaN());
            out.failures.push_back("trial " + std::to_string(trial) + ", curve '" + curve.label + "': " + e.what());
        }
    }
    return out;
}

} // namespace

TrialSamples run_trials(const ExperimentSpec& spec)
{
    spec.validate();
    TrialSamples samples;
    for (const auto& c : spec.curves)
        samples.labels.push_back(c.label);
    samples.points = sweep_axis_values(spec);
    samples.trials = spec.trials;

    std::vector<TrialOutput> outputs(static_cast<std::size_t>(spec.trials));
    std::atomic<long> next{0};
    auto worker = [&] {
        for (long t = next++; t < spec.trials; t = next++)
            outputs[static_cast<std::size_t>(t)] = run_single_trial(spec, samples.points, t);
    };
    const unsigned n_threads = std::min<unsigned>(spec.threads, static_cast<unsigned>(spec.trials));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
    }

    for (auto& o : outputs) {
        samples.values.insert(samples.values.end(), o.values.begin(), o.values.end());
        for (auto& f : o.failures)
            samples.failures.push_back(std::move(f));
    }
    return samples;
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleStats sample_stats(std::span<const double> values)
{
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values)
        if (std::isfinite(v))
            finite.push_back(v);
    SampleStats s;
    s.count = static_cast<long>(finite.size());
    if (finite.empty()) {
        s.mean = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.mean = pairwise_sum(finite) / static_cast<double>(finite.size());
    if (finite.size() > 1) {
        std::vector<double> sq(finite.size());
        for (std::size_t i = 0; i < finite.size(); ++i)
            sq[i] = (finite[i] - s.mean) * (finite[i] - s.mean);
        const double var = pairwise_sum(sq) / static_cast<double>(finite.size() - 1);
        s.std_error = std::sqrt(var / static_cast<double>(finite.size()));
    }
    return s;
}

SampleStats paired_difference(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("paired_difference: series lengths differ");
    std::vector<double> d;
    d.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::isfinite(a[i]) && std::isfinite(b[i]))
            d.push_back(a[i] - b[i]);
    return sample_stats(d);
}

ResultTable aggregate(const ExperimentSpec& spec, const TrialSamples& samples)
{
    ResultTable table;
    table.sweep_param = to_string(spec.axis);
    table.seed = spec.seed;
    table.failures = samples.failures;
    for (long c = 0; c < static_cast<long>(samples.labels.size()); ++c)
        for (long p = 0; p < static_cast<long>(samples.points.size()); ++p) {
            const auto series = samples.series(c, p);
            const SampleStats s = sample_stats(series);
            table.rows.push_back({samples.labels[static_cast<std::size_t>(c)],
                                  samples.points[static_cast<std::size_t>(p)], s.count ? s.mean : 0.0, s.std_error,
                                  s.count});
        }
    return table;
}

ResultTable run_experiment(const ExperimentSpec& spec) { return aggregate(spec, run_trials(spec)); }

} // namespace rydmimo
