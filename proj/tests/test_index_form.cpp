#include <doctest.h>

#include <cmath>
#include <random>

#include "gb/catalog.hpp"
#include "gb/certificate.hpp"
#include "gb/conjugate_greens.hpp"
#include "gb/errors.hpp"
#include "gb/index_form.hpp"
#include "gb/riccati.hpp"

using namespace gb;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v1(double x) { return Vec::Constant(1, x); }
PhasePoint pp(double x, double p) { return {v1(x), v1(p), 0.0}; }

TestField sine_mode(double T, int d = 1) {
    TestField f;
    f.value = [T, d](double t) { return Vec::Constant(d, std::sin(kPi * t / T)); };
    f.deriv = [T, d](double t) {
        return Vec::Constant(d, kPi / T * std::cos(kPi * t / T));
    };
    return f;
}

Vec random_coeffs(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vec c(n);
    for (int i = 0; i < n; ++i) c[i] = dist(rng);
    return c;
}

}  // namespace

TEST_CASE("direct quadrature closed forms") {
    FlowOptions opt;
    opt.tol = 1e-12;

    SUBCASE("free particle: pi^2 / (2T)") {
        const double T = 7.0;
        auto entry = catalog::get("free_particle");
        OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 1.0), 0.0, T, opt);
        const double val = index_form_direct(orbit, sine_mode(T), sine_mode(T), 0.0, T);
        CHECK(val == doctest::Approx(kPi * kPi / (2 * T)).epsilon(1e-9));
    }

    SUBCASE("pendulum equilibrium: pi^2/(2T) + T/2") {
        const double T = 5.0;
        auto entry = catalog::get("pendulum");
        OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, T, opt);
        const double val = index_form_direct(orbit, sine_mode(T), sine_mode(T), 0.0, T);
        CHECK(val == doctest::Approx(kPi * kPi / (2 * T) + T / 2).epsilon(1e-9));
    }

    SUBCASE("zero field gives zero") {
        auto entry = catalog::get("harmonic");
        OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(1.0, 0.0), 0.0, 2.0, opt);
        TestField zero;
        zero.value = [](double) { return Vec::Zero(1); };
        zero.deriv = [](double) { return Vec::Zero(1); };
        CHECK(index_form_direct(orbit, zero, zero, 0.0, 2.0) == doctest::Approx(0.0));
    }
}

TEST_CASE("factorized evaluation agrees with the direct route") {
    FlowOptions opt;
    opt.tol = 1e-12;

    SUBCASE("free particle sine mode") {
        const double T = 7.0;
        auto entry = catalog::get("free_particle");
        OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 1.0), 0.0, T, opt);
        JacobiFrame frame =
            integrate_jacobi_frame(orbit, Mat::Identity(1, 1), Mat::Zero(1, 1), opt);
        const double val =
            index_form_factorized(orbit, frame, sine_mode(T), sine_mode(T), 0.0, T);
        CHECK(val == doctest::Approx(kPi * kPi / (2 * T)).epsilon(1e-8));
    }

    SUBCASE("100 random test-space fields per catalog system") {
        std::mt19937_64 rng(23);
        struct Suite {
            const char* name;
            double x0, p0, a, b;
        };
        for (const Suite& s : {Suite{"free_particle", 0.0, 1.0, 0.0, 6.0},
                               Suite{"pendulum", 0.0, 0.0, 0.0, 6.0},
                               Suite{"harmonic", 1.0, 0.0, 0.2, 2.9},
                               Suite{"mathieu(0.1,2)", kPi, 0.0, 0.0, 6.0},
                               Suite{"double_well", 0.0, 0.0, 0.0, 5.0}}) {
            auto entry = catalog::get(s.name);
            OrbitSegment orbit =
                integrate_orbit(entry.hamiltonian, pp(s.x0, s.p0), s.a, s.b, opt);
            JacobiFrame frame = integrate_jacobi_frame(orbit, Mat::Zero(1, 1),
                                                       Mat::Identity(1, 1), opt);
            TestSpace space(s.a, s.b, 32, 1);
            for (int k = 0; k < 100; ++k) {
                TestField xi = space.field(random_coeffs(rng, space.size()));
                TestField eta = space.field(random_coeffs(rng, space.size()));
                const double direct = index_form_direct(orbit, xi, eta, s.a, s.b);
                const double fact =
                    index_form_factorized(orbit, frame, xi, eta, s.a, s.b);
                CHECK(std::abs(direct - fact) <= 1e-8 * (1.0 + std::abs(direct)));
            }
        }
    }

    SUBCASE("partitioned across a riccati blowup") {
        std::mt19937_64 rng(29);
        auto entry = catalog::get("harmonic");
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, pp(1.0, 0.0), 0.0, 5.0, opt);
        JacobiFrame frame =
            integrate_jacobi_frame(orbit, Mat::Zero(1, 1), Mat::Identity(1, 1), opt);
        // det H = sin t vanishes at pi inside [0.5, 4.5].
        TestSpace space(0.5, 4.5, 32, 1);
        for (int k = 0; k < 25; ++k) {
            TestField xi = space.field(random_coeffs(rng, space.size()));
            TestField eta = space.field(random_coeffs(rng, space.size()));
            const double direct = index_form_direct(orbit, xi, eta, 0.5, 4.5);
            const double fact = index_form_factorized(orbit, frame, xi, eta, 0.5, 4.5);
            CHECK(std::abs(direct - fact) <= 1e-8 * (1.0 + std::abs(direct)));
        }
    }
}

TEST_CASE("a spliced jacobi field is a null direction") {
    FlowOptions opt;
    opt.tol = 1e-12;
    auto entry = catalog::get("harmonic");
    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(1.0, 0.0), 0.0, 4.2, opt);
    JacobiFrame frame = frame_from(orbit, 0.5, 4.2, Mat::Zero(1, 1), Mat::Identity(1, 1), opt);
    TestField j;
    j.value = [](double t) {
        return (t >= 0.5 && t <= 0.5 + kPi) ? v1(std::sin(t - 0.5)) : Vec::Zero(1);
    };
    j.deriv = [](double t) {
        return (t >= 0.5 && t <= 0.5 + kPi) ? v1(std::cos(t - 0.5)) : Vec::Zero(1);
    };
    j.knots = {0.5 + kPi};
    const double direct = index_form_direct(orbit, j, j, 0.5, 4.2);
    const double fact = index_form_factorized(orbit, frame, j, j, 0.5, 4.2);
    CHECK(std::abs(direct) < 1e-9);
    CHECK(std::abs(fact) < 1e-8);
}

TEST_CASE("broken field identity: I(J,J) = J(T)^T (S1 - S2) J(T)") {
    FlowOptions opt;
    opt.tol = 1e-12;
    auto entry = catalog::get("pendulum");
    const double T = 3.0;
    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), 0.0, T + 2, opt);
    TestField j;
    j.value = [T](double t) {
        return t <= T ? v1(std::sinh(t))
                      : v1(-std::sinh(t - (T + 2)) * std::sinh(T) / std::sinh(2.0));
    };
    j.deriv = [T](double t) {
        return t <= T ? v1(std::cosh(t))
                      : v1(-std::cosh(t - (T + 2)) * std::sinh(T) / std::sinh(2.0));
    };
    j.knots = {T};
    const double direct = index_form_direct(orbit, j, j, 0.0, T + 2);

    JacobiFrame f1 = frame_from(orbit, 0.0, T + 2, Mat::Zero(1, 1), Mat::Identity(1, 1), opt);
    JacobiFrame f2 = frame_from(orbit, T + 2, 0.0, Mat::Zero(1, 1), Mat::Identity(1, 1), opt);
    auto s1 = solve_riccati(std::move(f1));
    auto s2 = solve_riccati(std::move(f2));
    const double jT = std::sinh(T);
    const double rhs = jT * (s1.slope(T)(0, 0) - s2.slope(T)(0, 0)) * jT;
    CHECK(direct == doctest::Approx(rhs).epsilon(1e-6));
    CHECK(direct == doctest::Approx(jT * jT * (1.0 / std::tanh(T) + 1.0 / std::tanh(2.0)))
                        .epsilon(1e-6));
}

TEST_CASE("bilinearity and symmetry") {
    std::mt19937_64 rng(31);
    FlowOptions opt;
    opt.tol = 1e-11;
    auto entry = catalog::get("mathieu(0.1,2)");
    OrbitSegment orbit =
        integrate_orbit(entry.hamiltonian, {v1(kPi), v1(0.0), 0.0}, 0.0, 4.0, opt);
    TestSpace space(0.0, 4.0, 24, 1);
    const Vec c1 = random_coeffs(rng, space.size());
    const Vec c2 = random_coeffs(rng, space.size());
    const Vec c3 = random_coeffs(rng, space.size());
    const double alpha = 0.73;
    TestField xi = space.field(c1), eta = space.field(c2), zeta = space.field(c3);
    TestField combo = space.field(alpha * c1 + c3);
    const double lhs = index_form_direct(orbit, combo, eta, 0.0, 4.0);
    const double rhs = alpha * index_form_direct(orbit, xi, eta, 0.0, 4.0) +
                       index_form_direct(orbit, zeta, eta, 0.0, 4.0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    CHECK(index_form_direct(orbit, xi, eta, 0.0, 4.0) ==
          doctest::Approx(index_form_direct(orbit, eta, xi, 0.0, 4.0)).epsilon(1e-10));
}

TEST_CASE("first variation vanishes along solutions") {
    FlowOptions opt;
    opt.tol = 1e-12;
    auto entry = catalog::get("pendulum");
    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.4, 1.7), 0.0, 5.0, opt);
    // d A_L . xi = int L_x xi + L_v xid = [L_v . xi] at the ends.
    TestField xi;
    xi.value = [](double t) { return v1(std::sin(1.3 * t) + 0.4); };
    xi.deriv = [](double t) { return v1(1.3 * std::cos(1.3 * t)); };
    const auto& lag = *entry.lagrangian;
    const auto& ham = *entry.hamiltonian;
    auto integrand = [&](double t) {
        const Vec x = orbit.position(t);
        const Vec v = ham.dp(x, orbit.momentum(t), t);
        return lag.dx(x, v, t).dot(xi.value(t)) + lag.dv(x, v, t).dot(xi.deriv(t));
    };
    double total = 0.0;
    const int cells = 2000;
    static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (int i = 0; i < cells; ++i) {
        const double a = 5.0 * i / cells, b = 5.0 * (i + 1) / cells;
        for (int g = 0; g < 3; ++g)
            total += 0.5 * (b - a) * gw[g] * integrand(0.5 * (a + b) + 0.5 * (b - a) * gx[g]);
    }
    auto boundary = [&](double t) {
        const Vec x = orbit.position(t);
        const Vec v = ham.dp(x, orbit.momentum(t), t);
        return lag.dv(x, v, t).dot(xi.value(t));
    };
    CHECK(total == doctest::Approx(boundary(5.0) - boundary(0.0)).epsilon(1e-8));
}

TEST_CASE("disconjugacy via the index form matches the conjugate scan") {
    FlowOptions opt;
    opt.tol = 1e-11;
    auto entry = catalog::get("harmonic");
    IndexFormOptions iopt;
    iopt.flow = opt;
    for (int k = 1; k <= 5; ++k) {
        OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(1.0, 0.0), 0.0,
                                             k * kPi + 0.2, opt);
        auto longer = disconjugacy_via_index(orbit, k * kPi + 0.1, 256, iopt);
        CHECK(longer.verdict == Verdict::Negative);
        CHECK(longer.agrees_with_conjugate_scan);
        // Below the first conjugate point only the k = 1 window is positive:
        // longer windows still contain the earlier conjugate points.
        auto shorter = disconjugacy_via_index(orbit, k * kPi - 0.1, 256, iopt);
        CHECK(shorter.verdict == (k == 1 ? Verdict::Positive : Verdict::Negative));
        CHECK(shorter.agrees_with_conjugate_scan);
    }

    auto pend = catalog::get("pendulum");
    OrbitSegment orbit = integrate_orbit(pend.hamiltonian, pp(0.0, 0.0), 0.0, 60.0, opt);
    auto verdict = disconjugacy_via_index(orbit, 60.0, 256, iopt);
    CHECK(verdict.verdict == Verdict::Positive);
    CHECK(verdict.a_min > 0.9);
}

TEST_CASE("a_min is nonincreasing under mesh refinement") {
    FlowOptions opt;
    auto entry = catalog::get("free_particle");
    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 1.0), 0.0, 5.0, opt);
    double prev = std::numeric_limits<double>::infinity();
    for (int mesh : {16, 32, 64, 128}) {
        TestSpace space(0.0, 5.0, mesh, 1);
        auto asm_form = assemble_index_form(orbit, space, false);
        auto eig = smallest_eigenpair(asm_form.stiffness, asm_form.mass);
        CHECK(eig.value <= prev + 1e-10);
        prev = eig.value;
    }
}

TEST_CASE("second-order convergence on the free-particle mode") {
    FlowOptions opt;
    auto entry = catalog::get("free_particle");
    const double T = 3.0;
    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 1.0), 0.0, T, opt);
    const double exact = kPi * kPi / (T * T);
    auto a_min = [&](int mesh) {
        TestSpace space(0.0, T, mesh, 1);
        auto asm_form = assemble_index_form(orbit, space, false);
        return smallest_eigenpair(asm_form.stiffness, asm_form.mass).value;
    };
    const double e32 = std::abs(a_min(32) - exact);
    const double e64 = std::abs(a_min(64) - exact);
    CHECK(e32 / e64 > 3.0);
    CHECK(e32 / e64 < 5.0);
}

TEST_CASE("uniform positivity scan across segment lengths") {
    ScanConfig config;
    config.T_list = {5.0, 10.0, 20.0, 40.0};
    config.mesh = 512;
    config.index.flow.tol = 1e-11;

    SUBCASE("pendulum inverted point: uniform bound near one") {
        auto entry = catalog::get("pendulum");
        auto report = uniform_positivity_scan(
            entry.hamiltonian, {pp(0.0, 0.0)}, config);
        CHECK(report.uniform_a == doctest::Approx(1.0).epsilon(0.02));
        CHECK(report.bounded_below);
        CHECK(report.trend_asymptote == doctest::Approx(1.0).epsilon(0.02));
    }

    SUBCASE("free particle: a_min decays like pi^2/T^2") {
        auto entry = catalog::get("free_particle");
        auto report = uniform_positivity_scan(
            entry.hamiltonian, {pp(0.0, 1.0)}, config);
        for (const auto& cell : report.cells)
            CHECK(cell.a_min ==
                  doctest::Approx(kPi * kPi / (cell.T * cell.T)).epsilon(0.05));
        CHECK_FALSE(report.bounded_below);
        CHECK(std::abs(report.trend_asymptote) < 1e-3);
    }

    SUBCASE("harmonic: negative beyond the first conjugate point") {
        auto entry = catalog::get("harmonic");
        auto report = uniform_positivity_scan(
            entry.hamiltonian, {pp(1.0, 0.0)}, config);
        CHECK(report.uniform_a < -0.5);
        CHECK_FALSE(report.bounded_below);
    }
}

TEST_CASE("midpoint constraint halves the fundamental mode") {
    FlowOptions opt;
    const double T = 6.0;

    SUBCASE("d = 1: the midpoint node is pinned, a_min = 4 pi^2 / T^2") {
        auto entry = catalog::get("free_particle");
        OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 1.0), 0.0, T, opt);
        TestSpace space(0.0, T, 128, 1);
        auto constrained = assemble_index_form(orbit, space, true);
        auto eig = smallest_eigenpair(constrained.stiffness, constrained.mass);
        CHECK(eig.value == doctest::Approx(4.0 * kPi * kPi / (T * T)).epsilon(1e-3));
    }

    SUBCASE("d = 2: only the flow-aligned component is constrained") {
        auto entry = catalog::get("free_particle(2)");
        Vec x0 = Vec::Zero(2), p0(2);
        p0 << 1.0, 0.0;
        OrbitSegment orbit =
            integrate_orbit(entry.hamiltonian, {x0, p0, 0.0}, 0.0, T, opt);
        TestSpace space(0.0, T, 64, 2);
        auto constrained = assemble_index_form(orbit, space, true);
        auto eig = smallest_eigenpair(constrained.stiffness, constrained.mass);
        // The transverse sine mode is untouched by the constraint.
        CHECK(eig.value == doctest::Approx(kPi * kPi / (T * T)).epsilon(1e-3));
    }

    SUBCASE("odd element counts are rejected") {
        auto entry = catalog::get("free_particle");
        OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 1.0), 0.0, T, opt);
        TestSpace space(0.0, T, 33, 1);
        CHECK_THROWS_AS(assemble_index_form(orbit, space, true), ConfigError);
    }
}

TEST_CASE("scan results are identical for any worker count") {
    ScanConfig config;
    config.T_list = {4.0, 8.0};
    config.mesh = 64;
    auto entry = catalog::get("pendulum");
    config.workers = 1;
    auto serial = uniform_positivity_scan(entry.hamiltonian, {pp(0.0, 0.0)}, config);
    config.workers = 3;
    auto threaded = uniform_positivity_scan(entry.hamiltonian, {pp(0.0, 0.0)}, config);
    REQUIRE(serial.cells.size() == threaded.cells.size());
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
        CHECK(serial.cells[i].T == threaded.cells[i].T);
        CHECK(serial.cells[i].a_min == threaded.cells[i].a_min);  // bit identical
    }
    CHECK(serial.uniform_a == threaded.uniform_a);
}

TEST_CASE("bump-field bound and the vertical growth floor") {
    auto entry = catalog::get("pendulum");
    // A from the certified riccati bound, B from the bump field.
    Region region;
    region.x_lo = v1(0.0);
    region.x_hi = v1(kTwoPi);
    region.p_lo = v1(-2.0);
    region.p_hi = v1(2.0);
    auto cert = certify_bounded(entry.hamiltonian, region);
    auto bound = riccati_bound(cert);
    const double B = bump_field_bound(*entry.lagrangian, v1(-1.0), v1(1.0), v1(-2.0),
                                      v1(2.0), 0.0, 0.0);
    CHECK(B > 0.0);
    const double floor = 1.0 / std::sqrt(2.0 * bound.A * B);

    FlowOptions opt;
    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pp(0.0, 0.0), -1.0, 12.0, opt);
    for (double t = 1.25; t <= 10.0; t += 0.25) {
        CHECK(vertical_frame(orbit, 0.0, t)(0, 0) >= floor);
        CHECK(std::abs(vertical_frame(orbit, 0.0, -1.0 + 1e-3)(0, 0)) >= 0.0);
    }
}
