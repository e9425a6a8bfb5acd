#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "gb/catalog.hpp"
#include "gb/certificate.hpp"
#include "gb/errors.hpp"
#include "gb/riccati.hpp"

using namespace gb;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v1(double x) { return Vec::Constant(1, x); }
PhasePoint pp(double x, double p) { return {v1(x), v1(p), 0.0}; }

double coth(double x) { return 1.0 / std::tanh(x); }

RiccatiSolution vertical_solution(const catalog::CatalogEntry& entry, double x0,
                                  double p0, double t1) {
    FlowOptions opt;
    opt.tol = 1e-11;
    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(x0, p0), 0.0, t1, opt);
    JacobiFrame f = integrate_jacobi_frame(orbit, Mat::Zero(1, 1), Mat::Identity(1, 1), opt);
    return solve_riccati(std::move(f));
}

}  // namespace

TEST_CASE("riccati slopes from vertical frames match closed forms") {
    SUBCASE("pendulum equilibrium: coth") {
        auto sol = vertical_solution(catalog::get("pendulum"), 0.0, 0.0, 10.0);
        CHECK(sol.blowup_times().empty());
        for (double t : {0.5, 1.0, 3.0, 9.5})
            CHECK(sol.slope(t)(0, 0) == doctest::Approx(coth(t)).epsilon(1e-8));
    }

    SUBCASE("free particle: 1/t") {
        auto sol = vertical_solution(catalog::get("free_particle"), 0.0, 1.0, 10.0);
        CHECK(sol.blowup_times().empty());
        for (double t : {0.25, 2.0, 10.0})
            CHECK(sol.slope(t)(0, 0) == doctest::Approx(1.0 / t).epsilon(1e-8));
    }

    SUBCASE("harmonic: cot with blowups at multiples of pi") {
        auto sol = vertical_solution(catalog::get("harmonic"), 1.0, 0.0, 10.0);
        REQUIRE(sol.blowup_times().size() == 3);
        CHECK(sol.blowup_times()[0] == doctest::Approx(kPi).epsilon(1e-9));
        CHECK(sol.blowup_times()[1] == doctest::Approx(2 * kPi).epsilon(1e-9));
        CHECK(sol.blowup_times()[2] == doctest::Approx(3 * kPi).epsilon(1e-9));
        for (double t : {0.5, 2.0, 4.0, 7.0})
            CHECK(sol.slope(t)(0, 0) == doctest::Approx(1.0 / std::tan(t)).epsilon(1e-7));
        CHECK_THROWS_AS(sol.slope(kPi), DegenerateFrameError);
    }
}

TEST_CASE("riccati residual stays small wherever defined") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const char* name : {"pendulum", "harmonic", "mathieu(0.1,2)"}) {
        auto entry = catalog::get(name);
        FlowOptions opt;
        opt.tol = 1e-11;
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(0.4 * dist(rng), 1.0 + 0.2 * dist(rng)),
                            0.0, 8.0, opt);
        // Random lagrangian initial frame (d = 1: any nonzero column works).
        Mat h0 = Mat::Constant(1, 1, 1.0), v0 = Mat::Constant(1, 1, dist(rng));
        auto sol = solve_riccati(integrate_jacobi_frame(orbit, h0, v0, opt));
        for (double t : {1.0, 3.0, 5.0, 7.0})
            if (sol.defined_at(t)) CHECK(sol.equation_residual(t) < 1e-6);
    }
}

TEST_CASE("monotone chain of backward and forward slopes") {
    // S_t increasing, U_t decreasing in t on disconjugate orbits.
    auto entry = catalog::get("pendulum");
    FlowOptions opt;
    opt.tol = 1e-11;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(0.3, 8.0);
    OrbitSegment fwd = integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, 9.0, opt);
    OrbitSegment bwd = integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, -9.0, opt);

    auto slope_S = [&](double t) {
        JacobiFrame f = frame_from(fwd, t, 0.0, Mat::Zero(1, 1), Mat::Identity(1, 1), opt);
        Mat h = f.h_part(0.0);
        return (f.v_part(0.0) * h.inverse())(0, 0);
    };
    auto slope_U = [&](double t) {
        JacobiFrame f = frame_from(bwd, -t, 0.0, Mat::Zero(1, 1), Mat::Identity(1, 1), opt);
        Mat h = f.h_part(0.0);
        return (f.v_part(0.0) * h.inverse())(0, 0);
    };
    for (int k = 0; k < 40; ++k) {
        double s = dist(rng), t = dist(rng);
        if (s > t) std::swap(s, t);
        if (t - s < 1e-3) continue;
        CHECK(slope_S(t) - slope_S(s) >= -1e-8);
        CHECK(slope_U(s) - slope_U(t) >= -1e-8);
    }
}

TEST_CASE("comparison function") {
    CHECK(comparison_w(1.0, 0.0, 40.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(comparison_w(1.0, 0.0, 2.0) == doctest::Approx(-comparison_w(1.0, 0.0, -2.0)));
    CHECK(comparison_w(2.0, 0.0, 1.0) == doctest::Approx(2.0 * coth(2.0)));
    CHECK(std::abs(comparison_w(2.0, 0.0, 1.0) - 2.0746) < 1e-4);
    CHECK_THROWS_AS(comparison_w(2.0, 1.0, 0.5), PoleError);

    // The defining identity holds to roundoff.
    for (double t : {0.2, 0.9, 3.7, -1.4})
        CHECK(std::abs(comparison_residual(1.3, 0.4, t)) < 1e-12);
}

TEST_CASE("uniform slope bound from certificates") {
    auto pend = catalog::get("pendulum");
    Region region;
    region.x_lo = v1(0.0);
    region.x_hi = v1(kTwoPi);
    region.p_lo = v1(-2.0);
    region.p_hi = v1(2.0);
    auto cert = certify_bounded(pend.hamiltonian, region);
    auto bound = riccati_bound(cert);
    // C = 0, M = 1, |D| <= 1 so R = 1 and A_raw = coth(1).
    CHECK(bound.C_norm == doctest::Approx(0.0));
    CHECK(bound.R == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(bound.A_raw == doctest::Approx(coth(1.0)).epsilon(1e-9));
    CHECK(bound.A == doctest::Approx(coth(1.0) * 1.1).epsilon(1e-9));

    SUBCASE("free particle: A_raw collapses to M as R -> 0") {
        Region small;
        small.x_lo = v1(-1.0);
        small.x_hi = v1(1.0);
        small.p_lo = v1(-1.0);
        small.p_hi = v1(1.0);
        auto fcert = certify_bounded(catalog::get("free_particle").hamiltonian, small);
        auto fbound = riccati_bound(fcert);
        CHECK(fbound.R == doctest::Approx(1e-6));
        CHECK(fbound.A_raw == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("verify pendulum vertical solution over a long window") {
        auto sol = vertical_solution(pend, 0.0, 0.0, 10.0);
        auto check = verify_bound(sol, bound);
        CHECK(check.pass);
        CHECK(check.max_slope_norm == doctest::Approx(coth(1.0)).epsilon(1e-6));
        CHECK_FALSE(check.per_interval_extension);
    }

    SUBCASE("harmonic: per-interval extension and the cot bound") {
        auto sol = vertical_solution(catalog::get("harmonic"), 1.0, 0.0, 10.0);
        Region hregion;
        hregion.x_lo = v1(-1.5);
        hregion.x_hi = v1(1.5);
        hregion.p_lo = v1(-1.5);
        hregion.p_hi = v1(1.5);
        auto hcert = certify_bounded(catalog::get("harmonic").hamiltonian, hregion);
        auto hbound = riccati_bound(hcert);
        // |cot| <= cot(1) ~ 0.642 on ]1, pi-1[, comfortably below coth(1).
        auto check = verify_bound(sol, hbound);
        CHECK(check.per_interval_extension);
        CHECK(check.pass);
        CHECK(check.max_slope_norm < hbound.A);
    }

    SUBCASE("short windows are rejected") {
        auto sol = vertical_solution(pend, 0.0, 0.0, 1.5);
        CHECK_THROWS_AS(verify_bound(sol, bound), InsufficientWindowError);
    }
}

TEST_CASE("constructed violation is caught with its location") {
    // A slope path exceeding the certified bound must fail verification:
    // use the harmonic solution against an artificially tight bound.
    auto sol = vertical_solution(catalog::get("harmonic"), 1.0, 0.0, 10.0);
    RiccatiBound tight;
    tight.A = 1e-3;
    auto check = verify_bound(sol, tight);
    CHECK_FALSE(check.pass);
    CHECK(check.max_slope_norm > tight.A);
    CHECK(check.at_time > 1.0);
}

TEST_CASE("constants-only bound is monotone in b1 and b2") {
    for (double b1 : {0.5, 1.0, 2.0, 5.0}) {
        CHECK(riccati_bound_from_constants(b1 * 1.5, 1.0).A >=
              riccati_bound_from_constants(b1, 1.0).A);
        CHECK(riccati_bound_from_constants(1.0, b1 * 1.5).A <=
              riccati_bound_from_constants(1.0, b1).A);
    }
}

TEST_CASE("gauge terms in the bound: oracle with nonzero H_px") {
    // L = v^2/2 + a v sin x - cos x gives H = (p - a sin x)^2/2 + cos x, so
    // C = H_pp^{-1} H_px = -a cos x and the flow derivative of C cancels the
    // cross terms exactly: D = H_xx - C^T H_pp C - Cdot = -cos x. Hence
    // R = 1 and A_raw = coth(1) + a on any box reaching |cos x| = 1.
    const double a = 0.3;
    auto one = [](double s) {
        Mat m(1, 1);
        m(0, 0) = s;
        return m;
    };
    auto lag = std::make_shared<CustomLagrangian>(
        ConfigSpace::torus(1), TimeDependence::autonomous(), 1.0,
        [a](const Vec& x, const Vec& v, double) {
            return 0.5 * v[0] * v[0] + a * v[0] * std::sin(x[0]) - std::cos(x[0]);
        },
        [a](const Vec& x, const Vec& v, double) {
            return Vec::Constant(1, a * v[0] * std::cos(x[0]) + std::sin(x[0]));
        },
        [a](const Vec& x, const Vec& v, double) {
            return Vec::Constant(1, v[0] + a * std::sin(x[0]));
        },
        [a, one](const Vec& x, const Vec& v, double) {
            return one(-a * v[0] * std::sin(x[0]) + std::cos(x[0]));
        },
        [a, one](const Vec& x, const Vec&, double) { return one(a * std::cos(x[0])); },
        [one](const Vec&, const Vec&, double) { return one(1.0); });
    auto ham = hamiltonian_from_lagrangian(lag);

    Region region;
    region.x_lo = v1(0.0);
    region.x_hi = v1(kTwoPi);
    region.p_lo = v1(-1.5);
    region.p_hi = v1(1.5);
    auto cert = certify_bounded(ham, region);
    auto bound = riccati_bound(cert);
    CHECK(bound.C_norm == doctest::Approx(a).epsilon(1e-8));
    CHECK(bound.R == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(bound.A_raw == doctest::Approx(1.0 / std::tanh(1.0) + a).epsilon(1e-4));
}

TEST_CASE("mathieu vertical solutions respect the certified bound") {
    auto entry = catalog::get("mathieu(0.1,2)");
    Region region;
    region.x_lo = v1(0.0);
    region.x_hi = v1(kTwoPi);
    region.p_lo = v1(-2.0);
    region.p_hi = v1(2.0);
    region.t_lo = 0.0;
    region.t_hi = kPi;  // one forcing period
    auto cert = certify_bounded(entry.hamiltonian, region);
    auto bound = riccati_bound(cert);
    FlowOptions opt;
    opt.tol = 1e-11;
    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(kPi, 0.0), 0.0, 10.0, opt);
    auto sol = solve_riccati(
        integrate_jacobi_frame(orbit, Mat::Zero(1, 1), Mat::Identity(1, 1), opt));
    auto check = verify_bound(sol, bound);
    CHECK(check.pass);
}
