#include <doctest.h>

#include <cmath>
#include <random>

#include "gb/catalog.hpp"
#include "gb/certificate.hpp"
#include "gb/errors.hpp"
#include "gb/models.hpp"

using namespace gb;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

// Quartic-plus-quadratic test Lagrangian: L = v^4/4 + v^2/2 on the line.
LagrangianPtr quartic_lagrangian() {
    auto one = [](double s) {
        Mat m(1, 1);
        m(0, 0) = s;
        return m;
    };
    return std::make_shared<CustomLagrangian>(
        ConfigSpace::line(1), TimeDependence::autonomous(), 1.0,
        [](const Vec&, const Vec& v, double) {
            return 0.25 * std::pow(v[0], 4) + 0.5 * v[0] * v[0];
        },
        [](const Vec&, const Vec&, double) { return Vec::Zero(1); },
        [](const Vec&, const Vec& v, double) {
            return Vec::Constant(1, v[0] * v[0] * v[0] + v[0]);
        },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec& v, double) { return one(3.0 * v[0] * v[0] + 1.0); });
}

// Central-difference check of the analytic first and second derivatives.
void check_gradients(const Lagrangian& lag, const Vec& x, const Vec& v, double t) {
    const double h = 1e-5;
    for (int i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (lag.value(xp, v, t) - lag.value(xm, v, t)) / (2 * h);
        CHECK(lag.dx(x, v, t)[i] == doctest::Approx(fd).epsilon(1e-6));
        Vec vp = v, vm = v;
        vp[i] += h;
        vm[i] -= h;
        const double fdv = (lag.value(x, vp, t) - lag.value(x, vm, t)) / (2 * h);
        CHECK(lag.dv(x, v, t)[i] == doctest::Approx(fdv).epsilon(1e-6));

        CHECK((lag.dxx(x, v, t).col(i) - (lag.dx(xp, v, t) - lag.dx(xm, v, t)) / (2 * h))
                  .norm() < 1e-6);
        CHECK((lag.dvv(x, v, t).col(i) - (lag.dv(x, vp, t) - lag.dv(x, vm, t)) / (2 * h))
                  .norm() < 1e-6);
        CHECK((lag.dxv(x, v, t).row(i).transpose() -
               (lag.dv(xp, v, t) - lag.dv(xm, v, t)) / (2 * h))
                  .norm() < 1e-6);
    }
}

}  // namespace

TEST_CASE("legendre transform on catalog points") {
    auto free1 = catalog::get("free_particle");
    auto pend = catalog::get("pendulum");

    PhasePoint a = legendre_transform(*free1.lagrangian, v1(0.0), v1(1.0), 0.0);
    CHECK(a.p[0] == doctest::Approx(1.0));

    PhasePoint b = legendre_transform(*pend.lagrangian, v1(std::numbers::pi / 2), v1(2.0), 0.0);
    CHECK(b.p[0] == doctest::Approx(2.0));
}

TEST_CASE("quartic legendre inversion by damped newton") {
    auto lag = quartic_lagrangian();
    PhasePoint pt = legendre_transform(*lag, v1(0.0), v1(1.0), 0.0);
    CHECK(pt.p[0] == doctest::Approx(2.0));  // p = v^3 + v at v = 1

    LegendreHamiltonian ham(lag);
    Vec v = ham.velocity(v1(0.0), v1(2.0), 0.0);
    CHECK(std::abs(v[0] - 1.0) < 1e-11);
}

TEST_CASE("legendre-derived hamiltonian matches the mechanical pair") {
    auto pend = catalog::get("pendulum");
    auto derived = std::make_shared<LegendreHamiltonian>(pend.lagrangian);
    // H = p^2/2 + cos x for L = v^2/2 - cos x.
    for (double x : {0.0, 0.7, 2.9}) {
        for (double p : {-1.5, 0.25, 2.0}) {
            CHECK(derived->value(v1(x), v1(p), 0.0) ==
                  doctest::Approx(0.5 * p * p + std::cos(x)).epsilon(1e-12));
        }
    }
    CHECK(derived->dxx(v1(0.3), v1(1.0), 0.0)(0, 0) ==
          doctest::Approx(-std::cos(0.3)).epsilon(1e-10));
    CHECK(derived->dpp(v1(0.3), v1(1.0), 0.0)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("free particle hamiltonian has identity H_pp and zero H_xx") {
    auto entry = catalog::get("free_particle(2)");
    auto ham = hamiltonian_from_lagrangian(entry.lagrangian);
    Vec x = Vec::Zero(2), p(2);
    p << 0.3, -1.1;
    CHECK((ham->dpp(x, p, 0.0) - Mat::Identity(2, 2)).norm() == doctest::Approx(0.0));
    CHECK(ham->dxx(x, p, 0.0).norm() == doctest::Approx(0.0));
}

TEST_CASE("quartic dual curvature: H_pp = 1/L_vv") {
    auto lag = quartic_lagrangian();
    LegendreHamiltonian ham(lag);
    // At v = 1 (p = 2): L_vv = 4, so H_pp = 1/4.
    CHECK(ham.dpp(v1(0.0), v1(2.0), 0.0)(0, 0) == doctest::Approx(0.25).epsilon(1e-10));

    // Pure quartic L = v^4/4: at v = 1 (p = 1), H_pp = 1/L_vv = 1/3.
    auto one = [](double s) {
        Mat m(1, 1);
        m(0, 0) = s;
        return m;
    };
    auto pure = std::make_shared<CustomLagrangian>(
        ConfigSpace::line(1), TimeDependence::autonomous(), 1e-6,
        [](const Vec&, const Vec& v, double) { return 0.25 * std::pow(v[0], 4); },
        [](const Vec&, const Vec&, double) { return Vec::Zero(1); },
        [](const Vec&, const Vec& v, double) { return Vec::Constant(1, std::pow(v[0], 3)); },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec& v, double) { return one(3.0 * v[0] * v[0]); });
    LegendreHamiltonian pure_ham(pure);
    CHECK(pure_ham.dpp(v1(0.0), v1(1.0), 0.0)(0, 0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("energy values") {
    auto pend = catalog::get("pendulum");
    CHECK(energy(*pend.lagrangian, v1(0.0), v1(0.0), 0.0) == doctest::Approx(1.0));

    auto free1 = catalog::get("free_particle");
    CHECK(energy(*free1.lagrangian, v1(0.0), v1(3.0), 0.0) == doctest::Approx(4.5));

    auto quart = quartic_lagrangian();
    // E = v L_v - L = v^4 + v^2 - v^4/4 - v^2/2 at v = 2: 16 + 4 - 4 - 2 = 14.
    CHECK(energy(*quart, v1(0.0), v1(2.0), 0.0) == doctest::Approx(14.0));

    // Autonomous identity E(x, v) = H(x, L_v).
    auto ham = hamiltonian_from_lagrangian(pend.lagrangian);
    for (double x : {0.1, 1.3}) {
        for (double v : {-0.7, 1.9}) {
            PhasePoint pt = legendre_transform(*pend.lagrangian, v1(x), v1(v), 0.0);
            CHECK(energy(*pend.lagrangian, v1(x), v1(v), 0.0) ==
                  doctest::Approx(ham->value(pt.x, pt.p, 0.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("legendre round trip to 1e-10 on random catalog points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (const char* name : {"free_particle", "pendulum", "harmonic", "double_well",
                             "mathieu(0.1,2)"}) {
        auto entry = catalog::get(name);
        auto ham = hamiltonian_from_lagrangian(entry.lagrangian);
        for (int k = 0; k < 100; ++k) {
            Vec x = v1(dist(rng)), v = v1(dist(rng));
            const double t = 0.3 * dist(rng);
            PhasePoint pt = legendre_transform(*entry.lagrangian, x, v, t);
            Vec back = ham->dp(x, pt.p, t);
            CHECK(std::abs(back[0] - v[0]) < 1e-10);
        }
    }
}

TEST_CASE("block identities between the dual hessians") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (const char* name : {"pendulum", "harmonic", "double_well", "mathieu(0.1,2)"}) {
        auto entry = catalog::get(name);
        auto ham = hamiltonian_from_lagrangian(entry.lagrangian);
        for (int k = 0; k < 100; ++k) {
            Vec x = v1(dist(rng)), v = v1(dist(rng));
            const double t = 0.3 * dist(rng);
            PhasePoint pt = legendre_transform(*entry.lagrangian, x, v, t);
            const Mat lvx = entry.lagrangian->dxv(x, v, t).transpose();
            const Mat lxx = entry.lagrangian->dxx(x, v, t);
            const Mat hpp = ham->dpp(x, pt.p, t);
            const Mat hxp = ham->dxp(x, pt.p, t);
            const Mat hxx = ham->dxx(x, pt.p, t);
            CHECK((hxp.transpose() + hpp * lvx).norm() < 1e-8);
            CHECK((hxx + hxp * lvx + lxx).norm() < 1e-8);
        }
    }
}

TEST_CASE("hessian symmetry at sampled points") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    auto entry = catalog::get("free_particle(2)");
    auto ham = hamiltonian_from_lagrangian(entry.lagrangian);
    for (int k = 0; k < 20; ++k) {
        Vec x(2), p(2);
        x << dist(rng), dist(rng);
        p << dist(rng), dist(rng);
        const Mat hpp = ham->dpp(x, p, 0.0);
        const Mat hxx = ham->dxx(x, p, 0.0);
        CHECK((hpp - hpp.transpose()).norm() < 1e-12);
        CHECK((hxx - hxx.transpose()).norm() < 1e-12);
    }
}

TEST_CASE("analytic derivatives agree with central differences") {
    auto pend = catalog::get("pendulum");
    check_gradients(*pend.lagrangian, v1(0.8), v1(-0.4), 0.0);
    auto mat = catalog::get("mathieu(0.1,2)");
    check_gradients(*mat.lagrangian, v1(2.5), v1(1.1), 0.4);
}

TEST_CASE("convexity violation reported") {
    auto one = [](double s) {
        Mat m(1, 1);
        m(0, 0) = s;
        return m;
    };
    // L = -v^2/2 is concave.
    auto bad = std::make_shared<CustomLagrangian>(
        ConfigSpace::line(1), TimeDependence::autonomous(), 1.0,
        [](const Vec&, const Vec& v, double) { return -0.5 * v[0] * v[0]; },
        [](const Vec&, const Vec&, double) { return Vec::Zero(1); },
        [](const Vec&, const Vec& v, double) { return Vec::Constant(1, -v[0]); },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec&, double) { return one(-1.0); });
    CHECK_THROWS_AS(legendre_transform(*bad, v1(0.0), v1(1.0), 0.0), ConvexityError);
}

TEST_CASE("boundedness certificate on the pendulum box") {
    auto pend = catalog::get("pendulum");
    Region region;
    region.x_lo = v1(0.0);
    region.x_hi = v1(kTwoPi);
    region.p_lo = v1(-2.0);
    region.p_hi = v1(2.0);
    region.description = "pendulum box";
    auto cert = certify_bounded(pend.hamiltonian, region);
    CHECK(cert.b2_raw == doctest::Approx(1.0));      // H_pp is identically 1
    CHECK(cert.b1_raw >= 3.0);                        // max |H| = 2 + 1
    CHECK(cert.b1() == doctest::Approx(cert.b1_raw * 1.1));

    Region small;
    small.x_lo = v1(-1.0);
    small.x_hi = v1(1.0);
    small.p_lo = v1(-1.0);
    small.p_hi = v1(1.0);
    auto free_cert = certify_bounded(catalog::get("free_particle").hamiltonian, small);
    CHECK(free_cert.b2_raw == doctest::Approx(1.0));
    CHECK(std::isfinite(free_cert.b1_raw));

    SUBCASE("a concave dual direction fails certification") {
        auto one = [](double s) {
            Mat m(1, 1);
            m(0, 0) = s;
            return m;
        };
        auto bad = std::make_shared<CustomHamiltonian>(
            ConfigSpace::line(1), TimeDependence::autonomous(),
            [](const Vec& x, const Vec& p, double) {
                return -0.5 * p[0] * p[0] + x[0];
            },
            [](const Vec&, const Vec&, double) { return Vec::Constant(1, 1.0); },
            [](const Vec&, const Vec& p, double) { return Vec::Constant(1, -p[0]); },
            [one](const Vec&, const Vec&, double) { return one(0.0); },
            [one](const Vec&, const Vec&, double) { return one(0.0); },
            [one](const Vec&, const Vec&, double) { return one(-1.0); });
        CHECK_THROWS_AS(certify_bounded(bad, small), ConvexityError);
    }
}
