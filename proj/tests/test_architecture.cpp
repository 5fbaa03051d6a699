#include "rydmimo/architecture.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace rydmimo;
using testutil::Engine;

namespace {
constexpr double pi = std::numbers::pi;

// Block-diagonal W_RF built element by element, no diagonal/adjacency factorization.
CMatd dense_wrf(const ReuseArchitecture& a, const RVecd& phases)
{
    CMatd w = CMatd::Zero(a.n_r(), a.n_rf());
    for (long r = 0; r < a.n_r(); ++r) {
        const long block = r / a.lo_depth, k = r % a.lo_depth;
        w(r, r / a.apd_depth) = std::polar(1.0, phases(block) + a.intra_offsets(block, k));
    }
    return w;
}
} // namespace

TEST_CASE("build_wlc: small examples")
{
    const RMatd w = build_wlc(4, 2);
    RMatd expected(4, 2);
    expected << 1, 0, 1, 0, 0, 1, 0, 1;
    CHECK(w == expected);
    CHECK(build_wlc(5, 1) == RMatd::Identity(5, 5));
    CHECK(build_wlc(6, 6) == RMatd::Ones(6, 1));
    CHECK_THROWS_AS(build_wlc(6, 4), InvalidArchitecture);
}

TEST_CASE("build_wlc: rows sum to one, columns to apd_depth")
{
    for (long n_lm : {1, 2, 3, 4, 6, 12, 36}) {
        const RMatd w = build_wlc(144, n_lm);
        CHECK(w.cols() == 144 / n_lm);
        CHECK((w.rowwise().sum().array() == 1.0).all());
        CHECK((w.colwise().sum().array() == static_cast<double>(n_lm)).all());
    }
}

TEST_CASE("build_wlo: two-element block with default offsets")
{
    const auto a = ReuseArchitecture::make(1, 2, 1);
    const CMatd w = build_wlo(a, RVecd::Zero(1));
    CHECK(std::abs(w(0, 0) - std::polar(1.0, -0.05 * pi)) < 1e-15);
    CHECK(std::abs(w(1, 1) - std::polar(1.0, 0.05 * pi)) < 1e-15);
    CHECK(w(0, 1) == Complex<double>(0.0));
    CHECK(w(1, 0) == Complex<double>(0.0));

    const CMatd shifted = build_wlo(a, RVecd::Constant(1, 0.3));
    CHECK(std::abs(shifted(0, 0) - std::polar(1.0, 0.3 - 0.05 * pi)) < 1e-15);
}

TEST_CASE("default offsets: symmetric ramp, zero for single-element blocks")
{
    const RMatd off = default_intra_offsets(3, 6);
    for (long k = 0; k < 6; ++k)
        CHECK(off(2, k) == doctest::Approx(0.1 * pi * (k - 2.5)));
    CHECK(ReuseArchitecture::make(16, 1, 1).intra_offsets.isZero(0.0));
    CHECK(std::abs(off.row(0).sum()) < 1e-14);
}

TEST_CASE("compose_wrf: orthogonal columns, W_RF^H W_RF = N_lm I")
{
    Engine rng(11);
    std::uniform_real_distribution<double> ph(0, 2 * pi);
    const long configs[][2] = {{1, 1}, {6, 1}, {6, 3}, {6, 6}, {6, 4}, {6, 12}, {4, 8}, {2, 36}};
    for (const auto& c : configs) {
        const auto a = ReuseArchitecture::make(36, c[0], c[1]);
        RVecd phases(36);
        for (long i = 0; i < 36; ++i)
            phases(i) = ph(rng);
        const CMatd w = compose_wrf(a, phases);
        CAPTURE(c[0]);
        CAPTURE(c[1]);
        CHECK(w.rows() == a.n_r());
        CHECK(w.cols() == a.n_rf());
        const CMatd gram = w.adjoint() * w;
        CHECK(testutil::max_abs(gram - static_cast<double>(c[1]) * CMatd::Identity(a.n_rf(), a.n_rf())) < 1e-12);
        CHECK(testutil::max_abs(w - dense_wrf(a, phases)) < 1e-14);
        CHECK(testutil::max_abs(w - build_wlo(a, phases) * build_wlc(a.n_r(), c[1]).cast<Complex<double>>()) < 1e-14);
    }
}

TEST_CASE("architecture validation and proportionality")
{
    CHECK(is_proportional(ReuseArchitecture::make(36, 6, 3)));
    CHECK(is_proportional(ReuseArchitecture::make(36, 6, 1)));
    CHECK(is_proportional(ReuseArchitecture::make(36, 6, 6)));
    CHECK_FALSE(is_proportional(ReuseArchitecture::make(36, 6, 4)));
    CHECK_FALSE(is_proportional(ReuseArchitecture::make(36, 6, 12)));
    CHECK_FALSE(is_proportional(ReuseArchitecture::make(36, 1, 4)));

    CHECK_THROWS_AS(ReuseArchitecture::make(36, 6, 5), InvalidArchitecture);
    CHECK_THROWS_AS(ReuseArchitecture::make(36, 0, 1), InvalidArchitecture);
    CHECK_THROWS_AS(ReuseArchitecture::make(36, 6, 3, PhaseResolution::finite(0)), InvalidArchitecture);

    auto a = ReuseArchitecture::make(4, 1, 1);
    a.intra_offsets(2, 0) = 0.1;
    CHECK_THROWS_AS(a.validate(), InvalidArchitecture);

    auto b = ReuseArchitecture::make(4, 2, 1);
    CHECK_THROWS_AS(lo_diagonal(b, RVecd::Zero(3)), InvalidArchitecture);
}

TEST_CASE("finite resolution: grid phases accepted, off-grid rejected")
{
    const auto a = ReuseArchitecture::make(2, 2, 1, PhaseResolution::finite(2));
    RVecd ok(2);
    ok << pi / 2, 3 * pi / 2;
    CHECK_NOTHROW(compose_wrf(a, ok));
    RVecd wrapped(2);
    wrapped << -pi / 2, 2 * pi;
    CHECK_NOTHROW(compose_wrf(a, wrapped));
    RVecd bad(2);
    bad << pi / 2, 0.3;
    CHECK_THROWS_AS(compose_wrf(a, bad), ConstraintViolation);
    CHECK_THROWS_AS(build_wlo(a, bad), ConstraintViolation);

    CHECK(phase_is_feasible(0.3, PhaseResolution::infinite()));
    CHECK_FALSE(phase_is_feasible(std::nan(""), PhaseResolution::infinite()));
    CHECK(PhaseResolution::finite(3).levels() == 8);
}
