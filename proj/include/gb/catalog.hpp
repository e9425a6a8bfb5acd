#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gb/models.hpp"
#include "gb/types.hpp"

namespace gb::catalog {

/// Closed-form facts bundled with a builtin system. Every numeric fact is
/// backed by an independent evaluator in `self_checks`; tests verify the
/// pairs agree before relying on either.
struct KnownFacts {
    PhasePoint reference;  // distinguished point (equilibrium or orbit start)
    std::vector<double> conjugate_times;  // from reference, within the window
    double conjugate_window = 0.0;
    std::optional<double> green_S;   // limiting backward slope at reference (d=1)
    std::optional<double> green_U;   // limiting forward slope at reference (d=1)
    std::optional<double> exponent;  // hyperbolic rate at reference
    std::function<double(double)> a_min;       // smallest index-form eigenvalue vs T
    std::function<double(double)> vertical_h;  // closed-form Y_ref(t) (d=1)
    std::function<double(double)> vertical_v;  // closed-form V component (d=1)
};

struct CatalogEntry {
    std::string name;
    LagrangianPtr lagrangian;
    HamiltonianPtr hamiltonian;  // analytic where available
    KnownFacts facts;
    /// Named residuals that must vanish to 1e-10; each reproduces a stored
    /// fact from its independent evaluator.
    std::vector<std::pair<std::string, std::function<double()>>> self_checks;
};

/// Look up a builtin system. Accepted names: free_particle, free_particle(d),
/// harmonic, pendulum, mathieu, mathieu(q,omega), double_well.
CatalogEntry get(const std::string& name);

std::vector<std::string> names();

}  // namespace gb::catalog
