#include <doctest.h>

#include <cmath>

#include "gb/catalog.hpp"
#include "gb/conjugate_greens.hpp"
#include "gb/errors.hpp"

using namespace gb;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v1(double x) { return Vec::Constant(1, x); }
PhasePoint pp(double x, double p) { return {v1(x), v1(p), 0.0}; }

double coth(double x) { return 1.0 / std::tanh(x); }

}  // namespace

TEST_CASE("conjugate point location") {
    FlowOptions opt;
    opt.tol = 1e-11;

    SUBCASE("harmonic oscillator: multiples of pi to 1e-8") {
        auto entry = catalog::get("harmonic");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(1.0, 0.0), 0.0, 10 * kPi + 0.5, opt);
        auto report = find_conjugate_points(orbit, 0.0, 10 * kPi + 0.5, opt);
        REQUIRE(report.conjugate_times.size() == 10);
        for (int k = 1; k <= 10; ++k) {
            CHECK(std::abs(report.conjugate_times[k - 1].t - k * kPi) < 1e-8);
            CHECK(report.conjugate_times[k - 1].multiplicity == 1);
        }
        CHECK_FALSE(report.disconjugate);
    }

    SUBCASE("pendulum equilibrium: none out to 100") {
        auto entry = catalog::get("pendulum");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, 100.0, opt);
        auto report = find_conjugate_points(orbit, 0.0, 100.0, opt);
        CHECK(report.disconjugate);
    }

    SUBCASE("free particle: none out to 100") {
        auto entry = catalog::get("free_particle");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(0.0, 1.0), 0.0, 100.0, opt);
        auto report = find_conjugate_points(orbit, 0.0, 100.0, opt);
        CHECK(report.disconjugate);
    }
}

TEST_CASE("green bundles at the pendulum equilibrium") {
    auto entry = catalog::get("pendulum");
    GreenOptions opt;
    opt.flow.tol = 1e-12;
    GreenBundles g = green_bundles(entry.hamiltonian, pp(0.0, 0.0), 20.0, opt);
    CHECK(g.converged);
    CHECK(std::abs(g.S_limit(0, 0) - (-1.0)) < 1e-8);
    CHECK(std::abs(g.U_limit(0, 0) - 1.0) < 1e-8);
    // Gap history follows 4 e^{-2h} against the smaller horizon h.
    REQUIRE(g.gap_history.size() >= 3);
    for (const auto& [h, gap] : g.gap_history) {
        const double expect = 2.0 * (coth(h) - coth(2.0 * h));
        CHECK(gap == doctest::Approx(expect).epsilon(0.05));
    }
}

TEST_CASE("green bundles on the mathieu inverted orbit and invariance") {
    auto entry = catalog::get("mathieu(0.1,2)");
    GreenOptions opt;
    opt.flow.tol = 1e-12;
    opt.tol = 1e-7;  // the slopes settle to ~e^{-2h}; horizon 18 suffices
    GreenBundles g0 = green_bundles(entry.hamiltonian, {v1(kPi), v1(0.0), 0.0}, 18.0, opt);
    CHECK(g0.converged);
    CHECK(g0.S_limit(0, 0) < -0.5);
    CHECK(g0.U_limit(0, 0) > 0.5);

    // Invariance: transport graph(S) by the linearized flow over tau and
    // compare against the bundle recomputed at the shifted point.
    const double tau = 0.7;
    OrbitSegment orbit =
        integrate_orbit(entry.hamiltonian, {v1(kPi), v1(0.0), 0.0}, 0.0, tau, opt.flow);
    for (bool stable : {true, false}) {
        const Mat s0 = stable ? g0.S_limit : g0.U_limit;
        JacobiFrame f =
            integrate_jacobi_frame(orbit, Mat::Identity(1, 1), s0, opt.flow);
        const Mat transported = f.v_part(tau) * f.h_part(tau).inverse();
        GreenBundles g1 =
            green_bundles(entry.hamiltonian, orbit.point(tau), 18.0, opt);
        const Mat recomputed = stable ? g1.S_limit : g1.U_limit;
        CHECK((transported - recomputed).norm() < 5e-6);
    }
}

TEST_CASE("green bundles reject conjugate horizons") {
    auto entry = catalog::get("harmonic");
    CHECK_THROWS_AS(green_bundles(entry.hamiltonian, pp(1.0, 0.0), 4.0, {}),
                    DisconjugacyError);
}

TEST_CASE("free particle on the 2-torus: flat slopes and the flow direction") {
    auto entry = catalog::get("free_particle(2)");
    Vec x0 = Vec::Zero(2), p0(2);
    p0 << 1.0, 0.0;
    GreenOptions opt;
    opt.cap_factor = 1.0;  // no doubling: keep the requested horizon
    const double T = 1e5;
    GreenBundles g = green_bundles(entry.hamiltonian, {x0, p0, 0.0}, T, opt);
    CHECK_FALSE(g.converged);  // slopes approach zero only like 1/T
    CHECK(g.S_limit.norm() < 2.0 / T);
    CHECK(g.U_limit.norm() < 2.0 / T);

    // X = (H_p, -H_x) = (p, 0) must lie within 1e-4 of both graphs.
    Vec x_field(4);
    x_field << 1.0, 0.0, 0.0, 0.0;
    Mat graph_s(4, 2), graph_u(4, 2);
    graph_s.topRows(2) = Mat::Identity(2, 2);
    graph_s.bottomRows(2) = g.S_limit;
    graph_u.topRows(2) = Mat::Identity(2, 2);
    graph_u.bottomRows(2) = g.U_limit;
    CHECK(subspace_angle(x_field, graph_s) < 1e-4);
    CHECK(subspace_angle(x_field, graph_u) < 1e-4);
}

TEST_CASE("no bounded directions at the hyperbolic equilibrium") {
    // At the pendulum equilibrium the graphs of the limit slopes intersect
    // trivially, so no unit tangent vector may stay bounded over |t| <= 50.
    auto entry = catalog::get("pendulum");
    FlowOptions opt;
    OrbitSegment fwd = integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, 50.0, opt);
    OrbitSegment bwd = integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, -50.0, opt);
    Mat h0(1, 2), v0(1, 2);
    h0 << 1.0, 0.0;
    v0 << 0.0, 1.0;
    JacobiFrame ff = integrate_jacobi_frame(fwd, h0, v0, opt);
    JacobiFrame fb = integrate_jacobi_frame(bwd, h0, v0, opt);
    Mat mf(2, 2), mb(2, 2);
    mf.row(0) = ff.h_part(50.0);
    mf.row(1) = ff.v_part(50.0);
    mb.row(0) = fb.h_part(-50.0);
    mb.row(1) = fb.v_part(-50.0);
    for (int k = 0; k < 360; ++k) {
        Vec u(2);
        u << std::cos(kTwoPi * k / 360), std::sin(kTwoPi * k / 360);
        CHECK(std::max((mf * u).norm(), (mb * u).norm()) > 1e3);
    }
}

TEST_CASE("frame reconstruction from constants") {
    FlowOptions opt;
    opt.tol = 1e-12;

    SUBCASE("K = 0 re-bases the same subspace") {
        auto entry = catalog::get("pendulum");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, 5.0, opt);
        JacobiFrame base =
            integrate_jacobi_frame(orbit, Mat::Identity(1, 1), Mat::Zero(1, 1), opt);
        Mat d = Mat::Constant(1, 1, 2.5);
        auto rec = jform_reconstruct(base, Mat::Zero(1, 1), d, 0.0);
        for (double t : {1.0, 3.0, 5.0}) {
            CHECK(rec.h_at(t)(0, 0) ==
                  doctest::Approx(base.h_part(t)(0, 0) * 2.5).epsilon(1e-9));
            CHECK(rec.v_at(t)(0, 0) ==
                  doctest::Approx(base.v_part(t)(0, 0) * 2.5).epsilon(1e-9));
        }
        CHECK(rec.lagrangian());
    }

    SUBCASE("free particle: quadrature of 1/s^2 rebuilds the shifted frame") {
        auto entry = catalog::get("free_particle");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(0.0, 1.0), 0.0, 9.0, opt);
        // Base: the vertical-at-0 solution H = t restricted to [1, 9].
        JacobiFrame base = frame_from(orbit, 1.0, 9.0, Mat::Constant(1, 1, 1.0),
                                      Mat::Constant(1, 1, 1.0), opt);
        // Target: H2 = t + 1, V2 = 1, so K = -1 and D = H2(1)/Y(1) = 2.
        auto rec = jform_reconstruct(base, Mat::Constant(1, 1, -1.0),
                                     Mat::Constant(1, 1, 2.0), 1.0);
        for (double t : {1.0, 2.0, 5.0, 9.0}) {
            CHECK(rec.h_at(t)(0, 0) == doctest::Approx(t + 1.0).epsilon(1e-8));
            CHECK(rec.v_at(t)(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
        }
    }

    SUBCASE("pendulum anchored at infinity recovers the stable solution") {
        auto entry = catalog::get("pendulum");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, 20.0, opt);
        JacobiFrame base = frame_from(orbit, 0.25, 20.0, Mat::Constant(1, 1, std::sinh(0.25)),
                                      Mat::Constant(1, 1, std::cosh(0.25)), opt);
        auto rec = jform_reconstruct(base, Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1),
                                     std::numeric_limits<double>::infinity());
        // M(a) = coth(a) - 1 gives Z(a) = sinh(a) M(a) = e^{-a}.
        for (double t : {0.5, 1.0, 2.0}) {
            CHECK(rec.h_at(t)(0, 0) == doctest::Approx(std::exp(-t)).epsilon(1e-7));
            CHECK(rec.v_at(t)(0, 0) / rec.h_at(t)(0, 0) ==
                  doctest::Approx(-1.0).epsilon(1e-7));
        }
        CHECK(rec.tail_bound() < 1e-10);
    }

    SUBCASE("wronskian against the base equals the supplied K") {
        auto entry = catalog::get("mathieu(0.1,2)");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, {v1(kPi), v1(0.0), 0.0}, 0.0, 6.0, opt);
        JacobiFrame base =
            integrate_jacobi_frame(orbit, Mat::Identity(1, 1), Mat::Zero(1, 1), opt);
        const Mat k = Mat::Constant(1, 1, 0.8), d = Mat::Constant(1, 1, 1.3);
        auto rec = jform_reconstruct(base, k, d, 0.0);
        for (double t : {0.5, 2.5, 6.0}) {
            const Mat w = base.h_part(t).transpose() * rec.v_at(t) -
                          base.v_part(t).transpose() * rec.h_at(t);
            CHECK((w - k).norm() < 1e-8);
        }
    }

    SUBCASE("the lagrangian flag follows the symmetry of K^T D") {
        auto entry = catalog::get("free_particle(2)");
        Vec x0 = Vec::Zero(2), p0(2);
        p0 << 1.0, 0.0;
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, {x0, p0, 0.0}, 0.0, 3.0, opt);
        JacobiFrame base =
            integrate_jacobi_frame(orbit, Mat::Identity(2, 2), Mat::Zero(2, 2), opt);
        Mat k(2, 2), d_sym(2, 2), d_skew(2, 2);
        k << 0, 1, 0, 0;
        d_sym = Mat::Identity(2, 2) * 0.0;  // K^T D = 0: symmetric
        d_skew = Mat::Identity(2, 2);       // K^T D = [[0,0],[1,0]]: not
        CHECK(jform_reconstruct(base, k, d_sym, 0.0).lagrangian());
        CHECK_FALSE(jform_reconstruct(base, k, d_skew, 0.0).lagrangian());
    }

    SUBCASE("reconstruction rejects a singular base") {
        auto entry = catalog::get("harmonic");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(1.0, 0.0), 0.0, 4.0, opt);
        JacobiFrame base =
            integrate_jacobi_frame(orbit, Mat::Zero(1, 1), Mat::Identity(1, 1), opt);
        // det H = sin t vanishes at pi inside [0.5, 4].
        JacobiFrame sub = frame_from(orbit, 0.5, 4.0, Mat::Constant(1, 1, std::sin(0.5)),
                                     Mat::Constant(1, 1, std::cos(0.5)), opt);
        CHECK_THROWS_AS(jform_reconstruct(sub, Mat::Constant(1, 1, -1.0),
                                          Mat::Constant(1, 1, 1.0), 0.5),
                        ReconstructionDomainError);
        (void)base;
    }
}

TEST_CASE("reconstructed frames satisfy the linearized equations") {
    auto entry = catalog::get("mathieu(0.1,2)");
    FlowOptions opt;
    opt.tol = 1e-12;
    OrbitSegment orbit =
        integrate_orbit(entry.hamiltonian, {v1(kPi), v1(0.0), 0.0}, 0.0, 4.0, opt);
    JacobiFrame base =
        integrate_jacobi_frame(orbit, Mat::Identity(1, 1), Mat::Constant(1, 1, 0.4), opt);
    auto rec = jform_reconstruct(base, Mat::Constant(1, 1, -0.7),
                                 Mat::Constant(1, 1, 1.1), 0.0);
    // Centered differences of the reconstructed path against the equations.
    const double h = 1e-5;
    for (double t : {1.0, 2.0, 3.5}) {
        const Vec y = orbit.dense().eval(t);
        const Vec x = y.head(1), p = y.tail(1);
        const Mat hpp = entry.hamiltonian->dpp(x, p, t);
        const Mat hxp = entry.hamiltonian->dxp(x, p, t);
        const Mat hxx = entry.hamiltonian->dxx(x, p, t);
        const Mat dh = (rec.h_at(t + h) - rec.h_at(t - h)) / (2 * h);
        const Mat dv = (rec.v_at(t + h) - rec.v_at(t - h)) / (2 * h);
        CHECK((dh - hxp.transpose() * rec.h_at(t) - hpp * rec.v_at(t)).norm() < 1e-6);
        CHECK((dv + hxx * rec.h_at(t) + hxp * rec.v_at(t)).norm() < 1e-6);
    }
}
