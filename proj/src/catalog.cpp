#include "gb/catalog.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gb/errors.hpp"

namespace gb::catalog {
namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const MechanicalLagrangian> mechanical(
    ConfigSpace space, TimeDependence time, std::vector<TrigTerm> pot) {
    const int d = space.dim;
    return std::make_shared<MechanicalLagrangian>(std::move(space), time,
                                                  Mat::Identity(d, d), std::move(pot));
}

CatalogEntry free_particle(int d) {
    auto lag = mechanical(ConfigSpace::torus(d), TimeDependence::autonomous(), {});
    CatalogEntry e;
    e.name = d == 1 ? "free_particle" : "free_particle(" + std::to_string(d) + ")";
    e.lagrangian = lag;
    e.hamiltonian = std::make_shared<MechanicalHamiltonian>(lag);

    Vec x0 = Vec::Zero(d), p0 = Vec::Zero(d);
    p0[0] = 1.0;
    e.facts.reference = {x0, p0, 0.0};
    e.facts.conjugate_window = 100.0;
    e.facts.green_S = 0.0;
    e.facts.green_U = 0.0;
    e.facts.a_min = [](double T) { return kPi * kPi / (T * T); };
    e.facts.vertical_h = [](double t) { return t; };
    e.facts.vertical_v = [](double) { return 1.0; };

    e.self_checks = {
        {"green_S equals large-T backward slope -1/T",
         [] { return std::abs(0.0 - (-1.0 / 1e12)); }},
        {"green_U equals large-T forward slope 1/T",
         [] { return std::abs(0.0 - 1.0 / 1e12); }},
        {"a_min matches Rayleigh quotient of the first Dirichlet mode",
         [e_a = e.facts.a_min] {
             // Independent route: Rayleigh quotient of sin(pi t / T) under
             // I(xi,xi) = int xidot^2, evaluated by closed-form integrals.
             const double T = 7.0;
             const double num = kPi * kPi / (2.0 * T);  // int xidot^2
             const double den = T / 2.0;                // int xi^2
             return std::abs(e_a(T) - num / den);
         }},
    };
    return e;
}

CatalogEntry harmonic() {
    ConfigSpace space = ConfigSpace::line(1);
    auto one = [](double s) {
        Mat m(1, 1);
        m(0, 0) = s;
        return m;
    };
    auto lag = std::make_shared<CustomLagrangian>(
        space, TimeDependence::autonomous(), 1.0,
        [](const Vec& x, const Vec& v, double) { return 0.5 * (v[0] * v[0] - x[0] * x[0]); },
        [](const Vec& x, const Vec&, double) { return Vec::Constant(1, -x[0]); },
        [](const Vec&, const Vec& v, double) { return Vec::Constant(1, v[0]); },
        [one](const Vec&, const Vec&, double) { return one(-1.0); },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec&, double) { return one(1.0); });
    auto ham = std::make_shared<CustomHamiltonian>(
        space, TimeDependence::autonomous(),
        [](const Vec& x, const Vec& p, double) { return 0.5 * (p[0] * p[0] + x[0] * x[0]); },
        [](const Vec& x, const Vec&, double) { return Vec::Constant(1, x[0]); },
        [](const Vec&, const Vec& p, double) { return Vec::Constant(1, p[0]); },
        [one](const Vec&, const Vec&, double) { return one(1.0); },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec&, double) { return one(1.0); });

    CatalogEntry e;
    e.name = "harmonic";
    e.lagrangian = lag;
    e.hamiltonian = ham;
    e.facts.reference = {Vec::Constant(1, 1.0), Vec::Zero(1), 0.0};
    e.facts.conjugate_window = 10.0 * kPi + 0.5;
    for (int k = 1; k <= 10; ++k) e.facts.conjugate_times.push_back(k * kPi);
    e.facts.a_min = [](double T) { return kPi * kPi / (T * T) - 1.0; };
    e.facts.vertical_h = [](double t) { return std::sin(t); };
    e.facts.vertical_v = [](double t) { return std::cos(t); };

    e.self_checks = {
        {"conjugate times are zeros of the vertical solution",
         [h = e.facts.vertical_h, times = e.facts.conjugate_times] {
             double worst = 0.0;
             for (double t : times) worst = std::max(worst, std::abs(h(t)));
             return worst;
         }},
        {"a_min formula matches the first Dirichlet mode Rayleigh quotient",
         [a = e.facts.a_min] {
             const double T = 5.0;
             const double rayleigh = (kPi * kPi / (2.0 * T) - T / 2.0) / (T / 2.0);
             return std::abs(a(T) - rayleigh);
         }},
    };
    return e;
}

CatalogEntry pendulum() {
    auto lag = mechanical(ConfigSpace::torus(1), TimeDependence::autonomous(),
                          {TrigTerm{Vec::Constant(1, 1.0), 0.0, 1.0, 0.0}});
    CatalogEntry e;
    e.name = "pendulum";
    e.lagrangian = lag;
    e.hamiltonian = std::make_shared<MechanicalHamiltonian>(lag);
    e.facts.reference = {Vec::Zero(1), Vec::Zero(1), 0.0};  // inverted point
    e.facts.conjugate_window = 100.0;
    e.facts.green_S = -1.0;
    e.facts.green_U = 1.0;
    e.facts.exponent = 1.0;
    e.facts.a_min = [](double T) { return 1.0 + kPi * kPi / (T * T); };
    e.facts.vertical_h = [](double t) { return std::sinh(t); };
    e.facts.vertical_v = [](double t) { return std::cosh(t); };

    e.self_checks = {
        {"green slopes are the large-T limits of -coth/",
         [] { return std::abs(-1.0 - (-1.0 / std::tanh(40.0))); }},
        {"exponent matches the vertical solution growth",
         [h = e.facts.vertical_h] {
             const double t = 20.0;
             return std::abs(std::log(h(t + 1.0) / h(t)) - 1.0);
         }},
        {"vertical solution never vanishes for t > 0",
         [h = e.facts.vertical_h] {
             double m = 1.0;
             for (double t = 0.5; t <= 100.0; t += 0.5) m = std::min(m, std::abs(h(t)));
             return m > 0.0 ? 0.0 : 1.0;
         }},
    };
    return e;
}

CatalogEntry double_well() {
    ConfigSpace space = ConfigSpace::line(1);
    auto one = [](double s) {
        Mat m(1, 1);
        m(0, 0) = s;
        return m;
    };
    // L = v^2/2 - (x^2 - 1)^2 / 4; hyperbolic equilibrium at the hilltop x = 0.
    auto lag = std::make_shared<CustomLagrangian>(
        space, TimeDependence::autonomous(), 1.0,
        [](const Vec& x, const Vec& v, double) {
            const double w = x[0] * x[0] - 1.0;
            return 0.5 * v[0] * v[0] - 0.25 * w * w;
        },
        [](const Vec& x, const Vec&, double) {
            return Vec::Constant(1, -x[0] * (x[0] * x[0] - 1.0));
        },
        [](const Vec&, const Vec& v, double) { return Vec::Constant(1, v[0]); },
        [one](const Vec& x, const Vec&, double) { return one(-(3.0 * x[0] * x[0] - 1.0)); },
        [one](const Vec&, const Vec&, double) { return one(0.0); },
        [one](const Vec&, const Vec&, double) { return one(1.0); });

    CatalogEntry e;
    e.name = "double_well";
    e.lagrangian = lag;
    e.hamiltonian = std::make_shared<LegendreHamiltonian>(lag);
    e.facts.reference = {Vec::Zero(1), Vec::Zero(1), 0.0};
    e.facts.conjugate_window = 100.0;
    e.facts.green_S = -1.0;
    e.facts.green_U = 1.0;
    e.facts.exponent = 1.0;
    e.facts.a_min = [](double T) { return 1.0 + kPi * kPi / (T * T); };
    e.facts.vertical_h = [](double t) { return std::sinh(t); };
    e.facts.vertical_v = [](double t) { return std::cosh(t); };
    e.self_checks = {
        {"green slopes are the large-T limits of -coth/",
         [] { return std::abs(-1.0 - (-1.0 / std::tanh(40.0))); }},
    };
    return e;
}

CatalogEntry mathieu(double q, double omega) {
    // L = v^2/2 + (1 + q cos(omega t)) cos x; the orbit x = pi is inverted.
    std::vector<TrigTerm> pot;
    pot.push_back({Vec::Constant(1, 1.0), 0.0, -1.0, 0.0});
    if (q != 0.0) {
        pot.push_back({Vec::Constant(1, 1.0), omega, -q / 2.0, 0.0});
        pot.push_back({Vec::Constant(1, 1.0), -omega, -q / 2.0, 0.0});
    }
    auto lag = mechanical(ConfigSpace::torus(1),
                          TimeDependence::periodic(2.0 * kPi / omega), std::move(pot));
    CatalogEntry e;
    std::ostringstream name;
    name << "mathieu(" << q << "," << omega << ")";
    e.name = name.str();
    e.lagrangian = lag;
    e.hamiltonian = std::make_shared<MechanicalHamiltonian>(lag);
    e.facts.reference = {Vec::Constant(1, kPi), Vec::Zero(1), 0.0};
    e.facts.conjugate_window = 100.0;
    // No closed form for the exponents at q != 0; the monodromy spectrum is
    // the oracle, cross-checked against the pendulum at q = 0.
    if (q == 0.0) {
        e.facts.exponent = 1.0;
        e.facts.vertical_h = [](double t) { return std::sinh(t); };
        e.facts.vertical_v = [](double t) { return std::cosh(t); };
    }
    return e;
}

double parse_number(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("catalog: malformed number '" + s + "'");
    return v;
}

std::vector<double> parse_args(const std::string& name, std::size_t open) {
    if (name.back() != ')') throw ConfigError("catalog: malformed name '" + name + "'");
    std::string inner = name.substr(open + 1, name.size() - open - 2);
    std::vector<double> args;
    std::size_t start = 0;
    while (start <= inner.size()) {
        std::size_t comma = inner.find(',', start);
        std::string tok = inner.substr(start, comma == std::string::npos
                                                  ? std::string::npos
                                                  : comma - start);
        if (!tok.empty()) args.push_back(parse_number(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return args;
}

}  // namespace

CatalogEntry get(const std::string& name) {
    std::string base = name;
    std::vector<double> args;
    if (auto open = name.find('('); open != std::string::npos) {
        base = name.substr(0, open);
        args = parse_args(name, open);
    }
    if (base == "free_particle") {
        int d = args.empty() ? 1 : static_cast<int>(args[0]);
        if (d < 1) throw ConfigError("free_particle: dimension must be >= 1");
        return free_particle(d);
    }
    if (base == "harmonic") return harmonic();
    if (base == "pendulum") return pendulum();
    if (base == "double_well") return double_well();
    if (base == "mathieu") {
        double q = args.size() > 0 ? args[0] : 0.1;
        double omega = args.size() > 1 ? args[1] : 2.0;
        return mathieu(q, omega);
    }
    throw ConfigError("unknown catalog system '" + name + "'");
}

std::vector<std::string> names() {
    return {"free_particle", "free_particle(2)", "harmonic", "pendulum",
            "mathieu(0.1,2)", "double_well"};
}

}  // namespace gb::catalog
