#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "dynamo/errors.hpp"
#include "dynamo/induction_dns.hpp"
#include "test_helpers.hpp"

using namespace dynamo;
using namespace dynamo::testing;

namespace {

const VelocityProfile& abc111(int truncation) {
    static const VelocityProfile u2 = abc_flow(1.0, 1.0, 1.0, 2);
    static const VelocityProfile u3 = abc_flow(1.0, 1.0, 1.0, 3);
    static const VelocityProfile u4 = abc_flow(1.0, 1.0, 1.0, 4);
    switch (truncation) {
        case 2: return u2;
        case 3: return u3;
        default: return u4;
    }
}

XiSelection abc_selection(const VelocityProfile& u) {
    return select_xi(alpha_tensor(u).alpha, {.direction_samples = 512, .denominator_bound = 64});
}

// Combined Bloch state of a packaged mode: mean at k = 0 plus eps x fluctuation.
SpectralVectorField mode_state(const BlochMode& m, int truncation) {
    SpectralVectorField b(truncation);
    for_each_mode(m.fluctuation.truncation(), [&](const WaveIndex& k) {
        if (b.contains(k)) b.set_mode(k, Cplx(m.eps) * m.fluctuation.mode(k));
    });
    b.set_mode({0, 0, 0}, m.mean_field);
    return b;
}

}  // namespace

TEST_CASE("zero flow decays every mode by the exact diffusion factor") {
    const VelocityProfile zero{SpectralVectorField(2), 0.0, "zero"};
    const double eps = 0.5;
    const Vec3 xi{0.3, 0.0, 0.0};
    const Vec3 kappa{eps * eps * 0.3, 0.0, 0.0};
    const double dt = 1e-3;
    BlochIntegrator integ(zero, eps, xi, 2, dt);

    SpectralVectorField b = random_bloch_state(2, kappa, 2.0, 5);
    const SpectralVectorField b0 = b;
    const int steps = 7;
    for (int i = 0; i < steps; ++i) integ.step(b);

    const double inv4 = std::pow(eps, -4.0);
    double worst = 0.0;
    for_each_mode(2, [&](const WaveIndex& k) {
        const Vec3 shifted{kTwoPi * k[0] + kappa[0], kTwoPi * k[1] + kappa[1], kTwoPi * k[2] + kappa[2]};
        const double decay = std::exp(-inv4 * dot(shifted, shifted) * dt * steps);
        const CVec3 expect = Cplx(decay) * b0.mode(k);
        const CVec3 got = b.mode(k);
        for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(got[c] - expect[c]) / std::max(std::abs(expect[c]), 1e-30));
    });
    CHECK(worst <= 1e-12);
}

TEST_CASE("the scheme is linear in the state") {
    const VelocityProfile& u = abc111(2);
    const XiSelection sel = abc_selection(u);
    BlochIntegrator integ(u, 0.5, sel.xi, 2, 1e-4);
    const Vec3 kappa = integ.kappa();

    SpectralVectorField b1 = random_bloch_state(2, kappa, 2.0, 8);
    SpectralVectorField b2 = random_bloch_state(2, kappa, 3.0, 9);
    SpectralVectorField combo = b1;
    combo.axpy(Cplx(2.0), b2);

    for (int i = 0; i < 5; ++i) {
        integ.step(b1);
        integ.step(b2);
        integ.step(combo);
    }
    SpectralVectorField expect = b1;
    expect.axpy(Cplx(2.0), b2);
    const double scale = std::max(expect.max_abs_coef(), 1e-300);
    CHECK(max_coef_diff(combo, expect) / scale <= 1e-12);
}

TEST_CASE("induction term is linear and keeps real fields real at kappa = 0") {
    const VelocityProfile& u = abc111(2);
    BlochIntegrator integ(u, 0.5, {0, 0, 0}, 2, 1e-4);
    const VelocityProfile b = random_profile(2, 2.0, 12);
    const SpectralVectorField ind = integ.induction_term(b.field);
    CHECK(reality_defect(ind) <= 1e-13);

    SpectralVectorField twice = b.field;
    twice *= Cplx(2.0);
    SpectralVectorField expect = ind;
    expect *= Cplx(2.0);
    CHECK(max_coef_diff(integ.induction_term(twice), expect) <= 1e-12 * expect.max_abs_coef());
}

TEST_CASE("step self-converges at second order") {
    const VelocityProfile& u = abc111(4);
    const XiSelection sel = abc_selection(u);
    const double eps = 0.5;
    const Vec3 kappa{eps * eps * sel.xi[0], eps * eps * sel.xi[1], eps * eps * sel.xi[2]};

    BlochIntegrator probe(u, eps, sel.xi, 4, 1e-9);
    const double dt1 = 0.8 * probe.stability_bound();
    const int n1 = 64;
    const double horizon = n1 * dt1;

    auto integrate = [&](double dt, int n) {
        BlochIntegrator integ(u, eps, sel.xi, 4, dt);
        SpectralVectorField b = random_bloch_state(4, kappa, 3.0, 20);
        for (int i = 0; i < n; ++i) integ.step(b);
        return b;
    };
    const SpectralVectorField ref = integrate(dt1 / 16.0, n1 * 16);
    auto err = [&](double dt, int n) {
        SpectralVectorField d = integrate(dt, n);
        d -= ref;
        return d.l2_norm();
    };
    const double e1 = err(dt1, n1);
    const double e2 = err(dt1 / 2.0, n1 * 2);
    const double e4 = err(dt1 / 4.0, n1 * 4);
    CHECK(e1 / e2 >= 3.4);
    CHECK(e1 / e2 <= 4.6);
    CHECK(e2 / e4 >= 3.4);
    CHECK(e2 / e4 <= 4.6);
    CHECK(horizon > 0.0);  // guard against a degenerate bound making the test vacuous
}

TEST_CASE("a packaged mode grows at its branch rate within 1 percent") {
    const VelocityProfile& u = abc111(2);
    const XiSelection sel = abc_selection(u);
    const double eps = 0.25;
    const NewtonResult root = newton_lambda(u, sel.xi, eps, sel.lambda0);
    const BlochMode mode = build_mode(u, sel, eps, root.lambda);

    BlochIntegrator probe(u, eps, sel.xi, 2, 1e-9);
    const double dt = 0.9 * probe.stability_bound();
    BlochIntegrator integ(u, eps, sel.xi, 2, dt, {.cfl_c = 0.5, .sample_stride = 200});

    SpectralVectorField b = mode_state(mode, 2);
    const double n0 = b.l2_norm();
    const DnsSeries series = integ.run(b, 5.0);

    const double lam = root.lambda.real();
    for (const auto& s : series.samples) {
        const double expect = n0 * std::exp(lam * s.t);
        CHECK(std::abs(s.l2 / expect - 1.0) <= 0.01);
        CHECK(s.div_defect <= 1e-10);
    }
    const GrowthReport rep = growth_rate(series, 0.5, eps);
    CHECK(std::abs(rep.rate - lam) / lam <= 0.01);
    CHECK(rep.rate_rawtime == doctest::Approx(rep.rate * eps * eps * eps).epsilon(1e-14));
}

TEST_CASE("validate_mode") {
    const VelocityProfile& u = abc111(3);
    const XiSelection sel = abc_selection(u);
    const NewtonResult root = newton_lambda(u, sel.xi, 0.25, sel.lambda0);
    const BlochMode mode = build_mode(u, sel, 0.25, root.lambda);

    SUBCASE("a freshly built mode sits far under the acceptance bar") {
        CHECK(validate_mode(mode, u) <= 1e-8);
    }
    SUBCASE("ten percent noise is loudly detected") {
        BlochMode noisy = mode;
        const VelocityProfile noise = random_profile(3, 3.0, 60);
        noisy.fluctuation.axpy(Cplx(0.1 * mode.fluctuation.l2_norm()), noise.field);
        noisy.mean_field[0] += 0.1 * norm(mode.mean_field);
        CHECK(validate_mode(noisy, u) >= 1e-2);
    }
    SUBCASE("zero mode is rejected") {
        BlochMode zero = mode;
        zero.fluctuation = SpectralVectorField(3);
        zero.mean_field = {Cplx(0), Cplx(0), Cplx(0)};
        try {
            validate_mode(zero, u);
            FAIL("expected DegenerateInput");
        } catch (const Error& e) {
            CHECK(e.kind() == Err::DegenerateInput);
        }
    }
}

TEST_CASE("random_bloch_state properties") {
    const Vec3 kappa{0.1, 0.0, 0.2};
    const SpectralVectorField b = random_bloch_state(3, kappa, 4.0, 123);
    CHECK(b.l2_norm() == doctest::Approx(1.0).epsilon(1e-12));
    double worst = 0.0;
    for_each_mode(3, [&](const WaveIndex& k) {
        const CVec3 shifted{Cplx(kTwoPi * k[0] + kappa[0]), Cplx(kTwoPi * k[1] + kappa[1]),
                            Cplx(kTwoPi * k[2] + kappa[2])};
        worst = std::max(worst, std::abs(bdot(shifted, b.mode(k))));
    });
    CHECK(worst <= 1e-12);
    CHECK(bitwise_equal(b, random_bloch_state(3, kappa, 4.0, 123)));
    CHECK(!bitwise_equal(b, random_bloch_state(3, kappa, 4.0, 124)));
}

TEST_CASE("growth_rate on synthetic series") {
    auto series_of = [](double rate, double horizon, double dt) {
        std::vector<std::pair<double, double>> s;
        for (double t = 0.0; t <= horizon + 1e-12; t += dt) s.emplace_back(t, std::exp(rate * t));
        return s;
    };
    SUBCASE("pure exponential, growing") {
        const GrowthReport r = growth_rate(series_of(0.3, 10.0, 0.1));
        CHECK(std::abs(r.rate - 0.3) <= 1e-6);
        CHECK(r.fit_residual <= 1e-10);
        CHECK(r.t_start >= 4.9);
    }
    SUBCASE("pure exponential, decaying") {
        const GrowthReport r = growth_rate(series_of(-1.0, 10.0, 0.1));
        CHECK(std::abs(r.rate + 1.0) <= 1e-6);
    }
    SUBCASE("transient plus growth: trailing window isolates the growth") {
        std::vector<std::pair<double, double>> s;
        for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.1)
            s.emplace_back(t, std::exp(0.3 * t) + std::exp(-5.0 * t));
        const GrowthReport r = growth_rate(s);
        CHECK(std::abs(r.rate - 0.3) <= 1e-3);
    }
    SUBCASE("rawtime rate carries the eps^3 clock factor") {
        const GrowthReport r = growth_rate(series_of(0.3, 10.0, 0.1), 0.5, 0.5);
        CHECK(r.rate_rawtime == doctest::Approx(r.rate * 0.125).epsilon(1e-14));
    }
    SUBCASE("too few samples") {
        std::vector<std::pair<double, double>> s;
        for (int i = 0; i < 9; ++i) s.emplace_back(i * 0.1, 1.0);
        try {
            growth_rate(s);
            FAIL("expected DegenerateInput");
        } catch (const Error& e) {
            CHECK(e.kind() == Err::DegenerateInput);
        }
    }
    SUBCASE("non-positive norms") {
        auto s = series_of(0.1, 2.0, 0.1);
        s[5].second = 0.0;
        try {
            growth_rate(s);
            FAIL("expected DegenerateInput");
        } catch (const Error& e) {
            CHECK(e.kind() == Err::DegenerateInput);
        }
    }
    SUBCASE("window fraction out of range") {
        try {
            growth_rate(series_of(0.1, 2.0, 0.1), 1.5);
            FAIL("expected BadConfig");
        } catch (const Error& e) {
            CHECK(e.kind() == Err::BadConfig);
        }
    }
}

TEST_CASE("divergence defect stays pinned over a long random run") {
    const VelocityProfile& u = abc111(3);
    const XiSelection sel = abc_selection(u);
    const double eps = 0.5;
    BlochIntegrator probe(u, eps, sel.xi, 3, 1e-9);
    const double dt = 0.9 * probe.stability_bound();
    BlochIntegrator integ(u, eps, sel.xi, 3, dt, {.cfl_c = 0.5, .sample_stride = 50});
    SpectralVectorField b = random_bloch_state(3, integ.kappa(), 3.0, 31);
    const DnsSeries series = integ.run(b, 300.0 * dt);
    for (const auto& s : series.samples) CHECK(s.div_defect <= 1e-10);
}

TEST_CASE("reality is preserved in the unshifted frame") {
    const VelocityProfile& u = abc111(2);
    BlochIntegrator integ(u, 0.5, {0, 0, 0}, 2, 5e-4);
    SpectralVectorField b = random_profile(2, 3.0, 44).field;
    for (int i = 0; i < 50; ++i) integ.step(b);
    CHECK(reality_defect(b) <= 1e-13);
}

TEST_CASE("stability bound enforcement and value") {
    const VelocityProfile& u = abc111(4);
    const double eps = 0.5;
    BlochIntegrator probe(u, eps, {0.1, 0, 0}, 4, 1e-9);
    const double expect = 0.5 / (std::pow(eps, -3.0) * u.sup_norm * kTwoPi * 4.0);
    CHECK(probe.stability_bound() == doctest::Approx(expect).epsilon(1e-12));
    CHECK_NOTHROW(BlochIntegrator(u, eps, {0.1, 0, 0}, 4, 0.999 * expect));
    try {
        BlochIntegrator bad(u, eps, {0.1, 0, 0}, 4, 1.01 * expect);
        FAIL("expected StabilityViolation");
    } catch (const Error& e) {
        CHECK(e.kind() == Err::StabilityViolation);
    }
}

TEST_CASE("run samples the configured stride plus endpoints") {
    const VelocityProfile zero{SpectralVectorField(2), 0.0, "zero"};
    BlochIntegrator integ(zero, 0.5, {0, 0, 0}, 2, 1e-3, {.cfl_c = 0.5, .sample_stride = 3});
    SpectralVectorField b = random_bloch_state(2, {0, 0, 0}, 2.0, 3);
    const DnsSeries s = integ.run(b, 0.0105);  // 11 steps of 1e-3
    REQUIRE(s.samples.size() == 5);
    CHECK(s.samples[0].t == 0.0);
    CHECK(s.samples[1].t == doctest::Approx(0.003).epsilon(1e-15));
    CHECK(s.samples[2].t == doctest::Approx(0.006).epsilon(1e-15));
    CHECK(s.samples[3].t == doctest::Approx(0.009).epsilon(1e-15));
    CHECK(s.samples[4].t == doctest::Approx(0.011).epsilon(1e-15));
}

TEST_CASE("series csv is deterministic and labeled") {
    const std::string dir = scratch_dir("series_csv");
    const VelocityProfile zero{SpectralVectorField(2), 0.0, "zero"};
    BlochIntegrator integ(zero, 0.5, {0, 0, 0}, 2, 1e-3);
    SpectralVectorField b = random_bloch_state(2, {0, 0, 0}, 2.0, 4);
    const DnsSeries s = integ.run(b, 0.01);
    write_series_csv(dir + "/s.csv", s);
    write_series_csv(dir + "/s2.csv", s);
    const std::string text = read_file_bytes(dir + "/s.csv");
    CHECK(text == read_file_bytes(dir + "/s2.csv"));
    CHECK(text.rfind("t,l2_norm,log_norm,div_defect", 0) == 0);
}
