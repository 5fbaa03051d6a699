#include "rydmimo/validation.hpp"

#include "rydmimo/channel.hpp"
#include "rydmimo/evaluation.hpp"
#include "rydmimo/optimizer.hpp"

#include <Eigen/QR>

#include <cstdio>
#include <random>

namespace rydmimo {

std::string to_string(CheckStatus status)
{
    switch (status) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skip: return "SKIP";
    }
    return "?";
}

namespace {

using Engine = std::mt19937_64;

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CMatd random_cmat(Engine& rng, long rows, long cols)
{
    std::normal_distribution<double> g(0.0, 1.0);
    CMatd m(rows, cols);
    for (long j = 0; j < cols; ++j)
        for (long i = 0; i < rows; ++i)
            m(i, j) = {g(rng), g(rng)};
    return m;
}

CheckResult check_phase_grid()
{
    Engine rng(11);
    constexpr int instances = 20;
    constexpr int grid = 100000;
    double worst = -INFINITY;
    for (int n = 0; n < instances; ++n) {
        const CMatd x = random_cmat(rng, 3, 2);
        const CMatd y = random_cmat(rng, 3, 2);
        auto objective = [&](double phi) { return (y - std::polar(1.0, phi) * x).squaredNorm(); };
        const double best = objective(optimal_phase(y, x));
        double grid_min = INFINITY;
        for (int g = 0; g < grid; ++g)
            grid_min = std::min(grid_min, objective(two_pi<double> * g / grid));
        worst = std::max(worst, best - grid_min);
    }
    const bool ok = worst <= 1e-12;
    return {"phase_update_grid", ok ? CheckStatus::Pass : CheckStatus::Fail,
            "max(closed-form - grid minimum) = " + fmt("%.3e", worst)};
}

CheckResult check_quantizer(const std::function<double(double, int)>& quantizer)
{
    Engine rng(12);
    std::uniform_real_distribution<double> unif(-2.0 * two_pi<double>, 2.0 * two_pi<double>);
    long mismatches = 0;
    for (int bits = 1; bits <= 6; ++bits) {
        const long levels = 1L << bits;
        for (int n = 0; n < 1000; ++n) {
            const double phi = unif(rng);
            double best = -INFINITY;
            for (long b = 0; b < levels; ++b)
                best = std::max(best, std::cos(two_pi<double> * b / levels - phi));
            const double q = quantizer(phi, bits);
            const bool on_grid = phase_is_feasible(q, PhaseResolution::finite(bits));
            if (!on_grid || std::cos(q - phi) < best - 1e-12)
                ++mismatches;
        }
    }
    return {"quantizer_exhaustive", mismatches == 0 ? CheckStatus::Pass : CheckStatus::Fail,
            std::to_string(mismatches) + " of 6000 phases not at the cos-maximizing grid point"};
}

CheckResult check_block_pseudoinverse()
{
    Engine rng(13);
    std::uniform_real_distribution<double> unif(0.0, two_pi<double>);
    double worst = 0.0;
    const long apd_options[] = {1, 2, 3, 6};
    for (int n = 0; n < 20; ++n) {
        auto arch = ReuseArchitecture::make(4, 6, apd_options[n % 4]);
        for (long i = 0; i < arch.intra_offsets.size(); ++i)
            arch.intra_offsets.data()[i] = unif(rng);
        RVecd phases(arch.n_blocks);
        for (long i = 0; i < phases.size(); ++i)
            phases(i) = unif(rng);
        const CMatd w_opt = random_cmat(rng, arch.n_r(), 2);
        const auto direct = direct_solve_proportional<double>(arch, w_opt, &phases);
        const CMatd w_rf = compose_wrf<double>(arch, phases);
        const CMatd general = w_rf.completeOrthogonalDecomposition().pseudoInverse() * w_opt;
        worst = std::max(worst, (direct.w_bb - general).cwiseAbs().maxCoeff());
    }
    return {"block_pseudoinverse", worst <= 1e-10 ? CheckStatus::Pass : CheckStatus::Fail,
            "max |row formula - pinv(W_RF) W_opt| = " + fmt("%.3e", worst)};
}

CheckResult check_proportional(long lo_depth, long apd_depth)
{
    const std::string name =
        "proportional_equivalence[N_lom=" + std::to_string(lo_depth) + ",N_lm=" + std::to_string(apd_depth) + "]";
    const auto inf = ReuseArchitecture::make(36, lo_depth, apd_depth);
    if (!is_proportional(inf))
        return {name, CheckStatus::Skip, "apd_depth does not divide lo_depth; equivalence not applicable"};

    ChannelParams params;
    params.n_tx = 144;
    params.rx_geometry = ArrayGeometry::rydberg(36, lo_depth);
    Engine rng(14);
    const auto h = generate_channel<double>(params, rng).matrix;
    const auto ref = optimal_digital_combiner(h, 3);
    const OptimizerConfig config;

    Engine init_a(15), init_b(15);
    const auto a = alternating_minimize<double>(inf, ref.w_opt, config, init_a);
    const auto b = alternating_minimize<double>(ReuseArchitecture::make(36, lo_depth, apd_depth,
                                                                        PhaseResolution::finite(1)),
                                                ref.w_opt, config, init_b);
    const auto d = direct_solve_proportional<double>(inf, ref.w_opt);
    const double gap = std::max(std::abs(a.residual - b.residual), std::abs(a.residual - d.residual));
    return {name, gap <= 1e-9 ? CheckStatus::Pass : CheckStatus::Fail,
            "residuals inf/B=1/direct = " + fmt("%.12f", a.residual) + "/" + fmt("%.12f", b.residual) + "/" +
                fmt("%.12f", d.residual)};
}

CheckResult check_channel_energy()
{
    ChannelParams params;
    params.n_tx = 144;
    params.rx_geometry = ArrayGeometry::rydberg(36, 6);
    Engine rng(16);
    constexpr int draws = 200;
    double acc = 0.0;
    for (int n = 0; n < draws; ++n)
        acc += generate_channel<double>(params, rng).matrix.squaredNorm();
    const double target = static_cast<double>(params.n_tx * params.rx_geometry.n_elements());
    const double ratio = acc / draws / target;
    return {"channel_energy", std::abs(ratio - 1.0) <= 0.05 ? CheckStatus::Pass : CheckStatus::Fail,
            "mean ||H||_F^2 / (N_t N_r) = " + fmt("%.4f", ratio) + " over 200 draws"};
}

} // namespace

std::vector<CheckResult> run_validation(const ValidationHooks& hooks)
{
    const auto quantizer = hooks.quantizer ? hooks.quantizer
                                           : std::function<double(double, int)>(quantize_phase<double>);
    std::vector<CheckResult> out;
    out.push_back(check_phase_grid());
    out.push_back(check_quantizer(quantizer));
    out.push_back(check_block_pseudoinverse());
    out.push_back(check_proportional(6, 3));
    out.push_back(check_proportional(6, 4));
    out.push_back(check_channel_energy());
    return out;
}

} // namespace rydmimo
