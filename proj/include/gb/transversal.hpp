#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gb/cocycle.hpp"
#include "gb/flow.hpp"
#include "gb/types.hpp"

namespace gb {

/// The action induced on the transversal bundle N of an autonomous energy
/// level: N(theta) = {xi in T(Sigma) : <dpi(xi), dpi(X))> = 0}, carried over
/// a finite orbit sample with a time-h shift.
struct TransversalAction {
    HamiltonianPtr ham;
    std::vector<PhasePoint> base;
    double step = 0.0;
    bool periodic = false;
    int fiber_dim = 0;  // 2d - 2

    std::vector<Mat> n_basis;      // 2d x fiber_dim orthonormal basis per point
    std::vector<Vec> flow_dir;     // X(theta) per point
    std::vector<Mat> n_coords;     // left inverse rows extracting N-coordinates
    std::vector<Vec> x_coords;     // row extracting the X-coefficient
    std::vector<Mat> maps;         // one-step transversal maps in the bases
    std::vector<Mat> dpsi_steps;   // full 2d x 2d one-step linearizations
    std::vector<double> basis_conditioning;  // smallest sigma of [N | X-normalized]
    std::string notice;

    std::size_t size() const { return base.size(); }
    /// Composed transversal map over k shifts from base index `from`.
    Mat psi(std::size_t from, long k) const;
    /// Composed full linearization over k shifts.
    Mat dpsi(std::size_t from, long k) const;
    SampledCocycle cocycle() const { return {maps, step, periodic}; }
};

/// Build the transversal action along a sampled orbit. Throws
/// SingularProjectionError where dpi(X) = 0. For d = 1 the fiber is trivial
/// and the returned action carries a notice instead of maps.
TransversalAction build_transversal_action(HamiltonianPtr ham,
                                           const std::vector<PhasePoint>& samples,
                                           double step, bool periodic,
                                           const FlowOptions& opt = {});

/// Hyperbolic splitting with fitted constants. For the autonomous reduction
/// the stable/unstable bases live in T(Sigma) = Es + <X> + Eu; in the
/// time-dependent framework they span the full fiber.
struct HyperbolicSplitting {
    std::vector<Mat> es;  // ambient basis per sample point
    std::vector<Mat> eu;
    double C = 1.0;
    double lambda = 0.0;
    double tau = 0.0;  // halving time
};

struct GraphTransformResult {
    HyperbolicSplitting splitting;
    double fixed_point_residual = 0.0;  // movement of L* under one more step
    int iterations = 0;
    double contraction = 0.0;
};

/// Upgrade a Psi-invariant hyperbolic splitting of N to a full flow-invariant
/// splitting by iterating the graph transform over <X>. Throws
/// NoContractionError when no power of the shift contracts.
GraphTransformResult graph_transform_splitting(const TransversalAction& action,
                                               const std::vector<Mat>& es_n,
                                               const std::vector<Mat>& eu_n,
                                               double tol = 1e-10);

/// Graph-transform fixed point for a single linear map: iterate the graph of
/// L : span(eu0) -> span(es0) under `map` until Cauchy to tol. Returns the
/// unstable direction basis and the final update size.
struct PeriodMapGraph {
    Mat unstable;  // fiber_dim x k basis of the fixed-point graph
    double residual = 0.0;
    int iterations = 0;
};
PeriodMapGraph graph_transform_period_map(const Mat& map, const Mat& eu0,
                                          const Mat& es0, double tol = 1e-10);

}  // namespace gb
