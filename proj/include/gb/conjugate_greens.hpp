#pragma once

#include <optional>
#include <vector>

#include "gb/flow.hpp"
#include "gb/riccati.hpp"
#include "gb/types.hpp"

namespace gb {

struct ConjugatePoint {
    double t;
    int multiplicity;
};

struct ConjugateReport {
    double window_lo = 0.0, window_hi = 0.0;
    std::vector<ConjugatePoint> conjugate_times;  // conjugate to the window start
    bool disconjugate = true;
};

/// Locate the times in ]window_lo, window_hi] conjugate to window_lo: zeros
/// of det Y for the frame started vertical at the window start.
ConjugateReport find_conjugate_points(const OrbitSegment& orbit, double window_lo,
                                      double window_hi, const FlowOptions& opt = {});

/// Green bundles at a point, computed as monotone limits of pushed vertical
/// subspaces. Slopes are graphs over the horizontal subspace.
struct GreenBundles {
    PhasePoint at;
    Mat S_limit;  // backward (stable-candidate) slope
    Mat U_limit;  // forward (unstable-candidate) slope
    Mat S_half;   // same slopes at half the final horizon
    Mat U_half;
    double T_used = 0.0;
    double convergence_gap = 0.0;  // ||S_T - S_{T/2}|| + ||U_T - U_{T/2}||
    bool converged = false;
    /// (smaller horizon h, ||S_{2h} - S_h|| + ||U_{2h} - U_h||) per doubling.
    std::vector<std::pair<double, double>> gap_history;
};

struct GreenOptions {
    double tol = 1e-8;
    int ladder = 3;           // number of pre-doublings below the horizon
    double cap_factor = 4.0;  // max horizon growth past the requested one
    FlowOptions flow;
};

/// Compute the Green bundles at `at` with initial horizon T, doubling the
/// horizon until the slopes are Cauchy to tol or the cap is reached. Throws
/// DisconjugacyError if a conjugate point is found in [-T, T].
GreenBundles green_bundles(HamiltonianPtr ham, const PhasePoint& at, double T,
                           const GreenOptions& opt = {});

/// A Jacobi solution assembled from a base frame by the constant-matrix
/// representation H2 = H1 [D + int H1^{-1} H_pp H1^{-T} K], evaluated by
/// cumulative quadrature along the base frame's mesh.
class ReconstructedFrame {
public:
    ReconstructedFrame(JacobiFrame base, Mat k, Mat d, std::vector<double> knots,
                       std::vector<Mat> z_at_knots, double tail_bound, bool lagrangian)
        : base_(std::move(base)), k_(std::move(k)), d_(std::move(d)),
          knots_(std::move(knots)), z_(std::move(z_at_knots)),
          tail_bound_(tail_bound), lagrangian_(lagrangian) {}

    Mat h_at(double t) const;
    Mat v_at(double t) const;
    const std::vector<double>& knots() const { return knots_; }
    const Mat& wronskian_constant() const { return k_; }
    /// Estimated remainder of the improper integral when anchored at +inf.
    double tail_bound() const { return tail_bound_; }
    bool lagrangian() const { return lagrangian_; }

private:
    Mat accumulated(double t) const;
    JacobiFrame base_;
    Mat k_, d_;
    std::vector<double> knots_;
    std::vector<Mat> z_;
    double tail_bound_;
    bool lagrangian_;
};

/// Reconstruct a Jacobi solution from `base` with Wronskian K and base-change
/// D, anchored at t0. Pass t0 = +infinity to anchor the improper integral at
/// the far end of the frame (the tail estimate is reported on the result).
/// Throws ReconstructionDomainError if det H1 vanishes inside the domain.
ReconstructedFrame jform_reconstruct(const JacobiFrame& base, const Mat& k,
                                     const Mat& d, double t0);

}  // namespace gb
