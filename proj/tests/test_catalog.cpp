#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gb/catalog.hpp"
#include "gb/errors.hpp"
#include "gb/flow.hpp"
#include "gb/systems_io.hpp"

using namespace gb;

TEST_CASE("every stored fact agrees with its bundled evaluator to 1e-10") {
    for (const auto& name : catalog::names()) {
        auto entry = catalog::get(name);
        INFO("system ", name);
        for (const auto& [label, residual] : entry.self_checks) {
            INFO("check: ", label);
            CHECK(residual() <= 1e-10);
        }
    }
}

TEST_CASE("catalog lookups and parameter parsing") {
    CHECK(catalog::get("free_particle").lagrangian->space().dim == 1);
    CHECK(catalog::get("free_particle(2)").lagrangian->space().dim == 2);
    CHECK(catalog::get("mathieu(0.25,3)").lagrangian->time_dependence().period ==
          doctest::Approx(kTwoPi / 3.0));
    CHECK(catalog::get("mathieu").name == "mathieu(0.1,2)");
    CHECK_THROWS_AS(catalog::get("nosuch"), ConfigError);
    CHECK_THROWS_AS(catalog::get("free_particle(0)"), ConfigError);
}

TEST_CASE("mathieu at q = 0 degenerates to the pendulum linearization") {
    auto mat = catalog::get("mathieu(0,2)");
    auto pend = catalog::get("pendulum");
    FlowOptions opt;
    opt.tol = 1e-12;
    // Inverted points: x = pi for mathieu's potential sign, x = 0 for the
    // pendulum's; both monodromies over one unit of time match.
    Mat a = monodromy(mat.hamiltonian, {Vec::Constant(1, std::numbers::pi),
                                        Vec::Zero(1), 0.0}, 1.0, opt);
    Mat b = monodromy(pend.hamiltonian, {Vec::Zero(1), Vec::Zero(1), 0.0}, 1.0, opt);
    CHECK((a - b).norm() < 1e-9);
}

TEST_CASE("system definition round trip") {
    auto entry = catalog::get("mathieu(0.1,2)");
    const std::string doc = system_to_json(entry);
    auto loaded = system_from_json(doc);
    // The reloaded system evaluates identically.
    Vec x = Vec::Constant(1, 1.1), p = Vec::Constant(1, -0.4);
    for (double t : {0.0, 0.37, 2.0}) {
        CHECK(loaded.hamiltonian->value(x, p, t) ==
              doctest::Approx(entry.hamiltonian->value(x, p, t)).epsilon(1e-14));
        CHECK((loaded.hamiltonian->dxx(x, p, t) - entry.hamiltonian->dxx(x, p, t)).norm() <
              1e-14);
    }

    // Non-mechanical systems export a builtin reference.
    auto harm = catalog::get("harmonic");
    auto reload = system_from_json(system_to_json(harm));
    CHECK(reload.name == "harmonic");

    // File-based loading.
    const auto path = std::filesystem::temp_directory_path() / "gb_sys_test.json";
    {
        std::ofstream out(path);
        out << doc;
    }
    auto from_file = load_system(path.string());
    CHECK(from_file.hamiltonian->value(x, p, 0.5) ==
          doctest::Approx(entry.hamiltonian->value(x, p, 0.5)).epsilon(1e-14));
    std::filesystem::remove(path);

    CHECK_THROWS_AS(system_from_json("{\"kind\": \"weird\"}"), ConfigError);
    CHECK_THROWS_AS(system_from_json("not json"), ConfigError);
}
