#include "rydmimo/optimizer.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace rydmimo;
using testutil::Engine;

namespace {
constexpr double pi = std::numbers::pi;

RVecd random_phases(Engine& rng, long n)
{
    std::uniform_real_distribution<double> u(0, 2 * pi);
    RVecd p(n);
    for (long i = 0; i < n; ++i)
        p(i) = u(rng);
    return p;
}

double circ_dist(double a, double b)
{
    const double d = std::fmod(std::abs(a - b), 2 * pi);
    return std::min(d, 2 * pi - d);
}
} // namespace

TEST_CASE("optimal_digital_combiner: diagonal and rank-one examples")
{
    CMatd h = CMatd::Zero(3, 3);
    h(0, 0) = 3;
    h(1, 1) = 2;
    h(2, 2) = 1;
    const auto ref = optimal_digital_combiner(h, 2);
    CHECK(ref.singular_values(0) == doctest::Approx(3));
    CHECK(ref.singular_values(1) == doctest::Approx(2));
    CHECK(testutil::max_abs(ref.w_opt - CMatd::Identity(3, 2)) < 1e-12);
    CHECK(testutil::max_abs(ref.f_opt - CMatd::Identity(3, 2)) < 1e-12);

    // u v^H with u = (1, j)/sqrt2, v = e1: the rotated column has a real positive max entry.
    CVecd u(2);
    u << Complex<double>(1, 0), Complex<double>(0, 1);
    u /= std::sqrt(2.0);
    CVecd v = CVecd::Zero(2);
    v(0) = 1;
    const auto r1 = optimal_digital_combiner(CMatd(5.0 * u * v.adjoint()), 1);
    CHECK(r1.singular_values(0) == doctest::Approx(5));
    CHECK(std::abs((r1.w_opt.adjoint() * u)(0)) == doctest::Approx(1));

    CHECK_THROWS_AS(optimal_digital_combiner(h, 4), InvalidPrecondition);
    CHECK_THROWS_AS(optimal_digital_combiner(h, 0), InvalidPrecondition);
}

TEST_CASE("optimal_digital_combiner: W_opt^H H F_opt is the leading singular values")
{
    Engine rng(5);
    const CMatd h = testutil::random_cmat(rng, 20, 16);
    const auto ref = optimal_digital_combiner(h, 3);
    const CMatd d = ref.w_opt.adjoint() * h * ref.f_opt;
    CHECK(testutil::max_abs(d - CMatd(ref.singular_values.head(3).cast<Complex<double>>().asDiagonal())) < 1e-10);
    for (long k = 0; k < 3; ++k) {
        Eigen::Index r;
        ref.w_opt.col(k).cwiseAbs().maxCoeff(&r);
        CHECK(std::abs(ref.w_opt(r, k).imag()) < 1e-14);
        CHECK(ref.w_opt(r, k).real() > 0);
    }
}

TEST_CASE("update_wbb equals the pseudoinverse solution for every architecture")
{
    Engine rng(6);
    const long configs[][2] = {{1, 1}, {6, 1}, {6, 3}, {6, 4}, {6, 12}, {2, 36}};
    for (int n = 0; n < 4; ++n)
        for (const auto& c : configs) {
            const auto a = ReuseArchitecture::make(36, c[0], c[1]);
            const CMatd w_rf = compose_wrf(a, random_phases(rng, 36));
            const CMatd w_opt = testutil::random_orthonormal(rng, a.n_r(), 3);
            const CMatd expected = testutil::pinv(w_rf) * w_opt;
            CHECK(testutil::max_abs(update_wbb(w_rf, w_opt) - expected) < 1e-10);
        }
}

TEST_CASE("update_wbb rejects a zero column")
{
    CMatd w = CMatd::Identity(4, 2);
    w.col(1).setZero();
    CHECK_THROWS_AS(update_wbb(w, CMatd::Identity(4, 1)), NumericError);
}

TEST_CASE("optimal_phase: examples")
{
    CMatd x(2, 1), y(2, 1);
    x << 1, 0;
    y << Complex<double>(0, 1), 0;
    CHECK(optimal_phase(y, x) == doctest::Approx(pi / 2));
    y << -1, 0;
    CHECK(optimal_phase(y, x) == doctest::Approx(pi));
    y << 0, 1;
    CHECK(optimal_phase(y, x) == 0.0); // orthogonal: any phase, 0 returned
    x << Complex<double>(0, 1), 0;
    y << 1, 0;
    CHECK(optimal_phase(y, x) == doctest::Approx(3 * pi / 2));
}

TEST_CASE("optimal_phase matches a dense grid search")
{
    Engine rng(7);
    constexpr int grid = 100000;
    for (int n = 0; n < 20; ++n) {
        const CMatd x = testutil::random_cmat(rng, 6, 3);
        const CMatd y = testutil::random_cmat(rng, 6, 3);
        const double phi = optimal_phase(y, x);
        double best = std::numeric_limits<double>::infinity();
        for (int g = 0; g < grid; ++g) {
            const double t = 2 * pi * g / grid;
            best = std::min(best, (y - std::polar(1.0, t) * x).squaredNorm());
        }
        const double got = (y - std::polar(1.0, phi) * x).squaredNorm();
        CHECK(got <= best + 1e-9);
        CHECK(phi >= 0.0);
        CHECK(phi < 2 * pi);
    }
}

TEST_CASE("quantize_phase: examples and circular wrap")
{
    CHECK(quantize_phase(1.0, 2) == doctest::Approx(pi / 2));
    CHECK(quantize_phase(6.1, 1) == 0.0);
    CHECK(quantize_phase(-0.1, 3) == 0.0);
    CHECK(quantize_phase(pi - 0.01, 1) == doctest::Approx(pi));
    CHECK(quantize_phase(2 * pi, 4) == 0.0);
    CHECK_THROWS(quantize_phase(1.0, 0));
}

TEST_CASE("quantize_phase is the nearest grid point for B = 1..6")
{
    Engine rng(8);
    std::uniform_real_distribution<double> u(-4 * pi, 4 * pi);
    for (int bits = 1; bits <= 6; ++bits) {
        const long levels = 1L << bits;
        for (int n = 0; n < 1000; ++n) {
            const double phi = u(rng);
            const double q = quantize_phase(phi, bits);
            double best = std::numeric_limits<double>::infinity();
            for (long b = 0; b < levels; ++b)
                best = std::min(best, circ_dist(phi, 2 * pi * b / levels));
            CHECK(circ_dist(phi, q) <= best + 1e-12);
            CHECK(phase_is_feasible(q, PhaseResolution::finite(bits)));
        }
    }
}

TEST_CASE("fully digital layout reproduces W_opt")
{
    Engine rng(9);
    const auto a = ReuseArchitecture::make(36, 1, 1);
    const CMatd w_opt = testutil::random_orthonormal(rng, 36, 3);
    const auto sol = alternating_minimize(a, w_opt, OptimizerConfig{}, rng);
    CHECK(sol.residual < 1e-8);
    const auto direct = direct_solve_proportional(a, w_opt);
    CHECK(direct.residual < 1e-8);
}

TEST_CASE("continuous alternating minimization never increases the residual")
{
    Engine rng(10);
    const long configs[][2] = {{6, 4}, {6, 12}, {4, 8}, {2, 12}, {6, 36}};
    for (const auto& c : configs) {
        const auto a = ReuseArchitecture::make(36, c[0], c[1]);
        const CMatd w_opt = testutil::random_orthonormal(rng, a.n_r(), 3);
        const auto sol = alternating_minimize(a, w_opt, OptimizerConfig{}, rng);
        REQUIRE(sol.residual_history.size() >= 3);
        for (std::size_t i = 1; i < sol.residual_history.size(); ++i)
            CHECK(sol.residual_history[i] <= sol.residual_history[i - 1] + 1e-12);
        CHECK(sol.residual == doctest::Approx(sol.residual_history.back()));
        CHECK(sol.residual == doctest::Approx((w_opt - compose_wrf(a, sol.phases) * sol.w_bb).norm()));
        CHECK(sol.iterations <= 100);
        CHECK(sol.residual <= std::sqrt(3.0) + 1e-12);
    }
}

TEST_CASE("finite-resolution solutions stay on the grid")
{
    Engine rng(11);
    for (int bits = 1; bits <= 3; ++bits)
        for (auto start : {FiniteStart::ContinuousWarmStart, FiniteStart::Random}) {
            const auto a = ReuseArchitecture::make(36, 6, 4, PhaseResolution::finite(bits));
            const CMatd w_opt = testutil::random_orthonormal(rng, a.n_r(), 3);
            OptimizerConfig cfg;
            cfg.finite_start = start;
            const auto sol = alternating_minimize(a, w_opt, cfg, rng);
            for (long i = 0; i < 36; ++i)
                CHECK(phase_is_feasible(sol.phases(i), a.resolution));
            CHECK_NOTHROW(compose_wrf(a, sol.phases));
        }
}

TEST_CASE("proportional reuse: direct solver matches alternating minimization")
{
    Engine rng(12);
    const long configs[][2] = {{6, 1}, {6, 2}, {6, 3}, {6, 6}, {4, 2}};
    for (const auto& c : configs) {
        const auto a = ReuseArchitecture::make(36, c[0], c[1]);
        const CMatd w_opt = testutil::random_orthonormal(rng, a.n_r(), 3);
        const auto alt = alternating_minimize(a, w_opt, OptimizerConfig{}, rng);
        const auto dir = direct_solve_proportional(a, w_opt);
        CAPTURE(c[1]);
        CHECK(std::abs(alt.residual - dir.residual) < 1e-8);
        CHECK(dir.iterations == 0);
        CHECK(dir.method == SolveMethod::DirectProportional);
        // residual of the direct solution against the dense pseudoinverse fit
        const CMatd w_rf = compose_wrf(a, dir.phases);
        CHECK(std::abs(dir.residual - (w_opt - w_rf * testutil::pinv(w_rf) * w_opt).norm()) < 1e-10);
    }
    CHECK_THROWS_AS(direct_solve_proportional(ReuseArchitecture::make(36, 6, 4), CMatd(CMatd::Zero(216, 3))),
                    InvalidPrecondition);
}

TEST_CASE("proportional reuse: residual does not depend on the LO phases")
{
    Engine rng(13);
    const auto a = ReuseArchitecture::make(36, 6, 3);
    const CMatd w_opt = testutil::random_orthonormal(rng, a.n_r(), 3);
    const RVecd zero = RVecd::Zero(36);
    const RVecd quarter = RVecd::Constant(36, pi / 2);
    const auto s0 = direct_solve_proportional(a, w_opt, &zero);
    const auto s1 = direct_solve_proportional(a, w_opt, &quarter);
    CHECK(std::abs(s0.residual - s1.residual) < 1e-12);
    CHECK(testutil::max_abs(compose_wrf(a, zero) * s0.w_bb - compose_wrf(a, quarter) * s1.w_bb) < 1e-12);
}

TEST_CASE("solve_combiner dispatch")
{
    Engine rng(14);
    const CMatd w_opt = testutil::random_orthonormal(rng, 216, 3);
    CHECK(solve_combiner(ReuseArchitecture::make(36, 6, 3), w_opt, OptimizerConfig{}, rng, SolverChoice::Auto).method ==
          SolveMethod::DirectProportional);
    CHECK(solve_combiner(ReuseArchitecture::make(36, 6, 4), w_opt, OptimizerConfig{}, rng, SolverChoice::Auto).method ==
          SolveMethod::AltMin);
    CHECK(solve_combiner(ReuseArchitecture::make(36, 6, 3), w_opt, OptimizerConfig{}, rng, SolverChoice::AltMin)
              .method == SolveMethod::AltMin);
    CHECK_THROWS_AS(
        solve_combiner(ReuseArchitecture::make(36, 6, 108), w_opt, OptimizerConfig{}, rng, SolverChoice::AltMin),
        InvalidPrecondition);
}

TEST_CASE("alternating minimization is deterministic for a seed")
{
    Engine g(15);
    const auto a = ReuseArchitecture::make(36, 6, 12, PhaseResolution::finite(2));
    const CMatd w_opt = testutil::random_orthonormal(g, 216, 3);
    Engine r1(99), r2(99);
    const auto s1 = alternating_minimize(a, w_opt, OptimizerConfig{}, r1);
    const auto s2 = alternating_minimize(a, w_opt, OptimizerConfig{}, r2);
    CHECK(s1.phases == s2.phases);
    CHECK(s1.residual == s2.residual);
}

TEST_CASE("finite resolution: random grid start barely moves, warm start improves on it")
{
    Engine rng(16);
    for (int bits : {1, 2}) {
        const auto a = ReuseArchitecture::make(36, 6, 4, PhaseResolution::finite(bits));
        double random_drop = 0.0, warm_drop = 0.0;
        for (int n = 0; n < 50; ++n) {
            const CMatd w_opt = testutil::random_orthonormal(rng, a.n_r(), 3);
            OptimizerConfig random_cfg;
            random_cfg.finite_start = FiniteStart::Random;
            Engine r1(static_cast<unsigned long>(n)), r2(static_cast<unsigned long>(n));
            const auto stuck = alternating_minimize(a, w_opt, random_cfg, r1);
            const auto warm = alternating_minimize(a, w_opt, OptimizerConfig{}, r2);
            random_drop += stuck.residual_history.front() - stuck.residual;
            warm_drop += stuck.residual_history.front() - warm.residual;
            for (std::size_t i = 1; i < warm.residual_history.size(); ++i)
                CHECK(warm.residual_history[i] <= warm.residual_history[i - 1] + 1e-12);
        }
        CAPTURE(bits);
        CHECK(random_drop >= 0.0);
        CHECK(random_drop < 0.2 * warm_drop);
    }
}
