#pragma once

#include <optional>
#include <vector>

#include "gb/certificate.hpp"
#include "gb/flow.hpp"
#include "gb/types.hpp"

namespace gb {

/// Slope dynamics S = V H^{-1} of a Lagrangian Jacobi frame. Defined on the
/// maximal sub-intervals where H(t) stays invertible; the blowup times
/// between them are data, not errors.
class RiccatiSolution {
public:
    struct Interval {
        double lo, hi;
    };

    RiccatiSolution(JacobiFrame frame, std::vector<double> blowups,
                    std::vector<Interval> intervals)
        : frame_(std::move(frame)), blowups_(std::move(blowups)),
          intervals_(std::move(intervals)) {}

    const JacobiFrame& frame() const { return frame_; }
    const std::vector<double>& blowup_times() const { return blowups_; }
    const std::vector<Interval>& intervals() const { return intervals_; }

    bool defined_at(double t) const;
    /// S(t) = V(t) H(t)^{-1}, symmetrized. Throws DegenerateFrameError when
    /// t lies outside every interval of definition.
    Mat slope(double t) const;
    /// Residual of the slope equation at t, using a centered difference of
    /// S along the frame mesh for the time derivative.
    double equation_residual(double t) const;

private:
    JacobiFrame frame_;
    std::vector<double> blowups_;
    std::vector<Interval> intervals_;
};

/// Uniform a-priori bound on symmetric Riccati solutions over a certified
/// region, together with the ingredients used to assemble it.
struct RiccatiBound {
    double b1 = 0.0, b2 = 0.0;  // certificate constants (inflated)
    double M = 0.0;             // 1 / b2
    double R = 0.0;             // comparison rate, floored at 1e-6
    double C_norm = 0.0;        // grid max of ||H_pp^{-1} H_px||
    double A_raw = 0.0;         // M R coth(R) + ||C|| from raw grid maxima
    double A = 0.0;             // same from safety-inflated constants
};

struct BoundCheck {
    bool pass = false;
    double max_slope_norm = 0.0;
    double at_time = 0.0;
    double bound = 0.0;
    std::vector<std::pair<double, double>> per_interval;  // (max ||S||, where)
    /// True when the solution has interior blowups, in which case the bound
    /// is applied per maximal interval of definition.
    bool per_interval_extension = false;
};

/// Derive the Riccati solution of a Lagrangian frame. Blowup times are
/// located by sign changes of det H with bisection.
RiccatiSolution solve_riccati(JacobiFrame frame);

/// Comparison function w(t) = R coth(R t - d). Throws PoleError at the pole.
double comparison_w(double rate, double shift, double t);
/// Analytic derivative of the comparison function.
double comparison_w_dot(double rate, double shift, double t);
/// Residual of wdot + w^2 - R^2 (identically zero up to roundoff).
double comparison_residual(double rate, double shift, double t);

/// Assemble the uniform bound from a certificate: A = M R coth(R) + ||C||
/// with M = 1/b2, C = H_pp^{-1} H_px, D = H_xx - C^T H_pp C - Cdot, and R
/// the grid bound with |y^T D y| <= M R^2. Cdot is a centered difference of
/// C along short flow arcs through each grid node.
RiccatiBound riccati_bound(const BoundednessCertificate& cert);

/// Worst-case bound assembled from the certificate constants alone, using
/// C3-norm majorants for C, Cdot and D. Monotone nondecreasing in b1 and
/// nonincreasing in b2; coarser than the grid-sampled riccati_bound.
RiccatiBound riccati_bound_from_constants(double b1, double b2);

/// Check max ||S|| over the trimmed window ]lo+1, hi-1[ of every maximal
/// interval of definition longer than 2 against bound.A. Throws
/// InsufficientWindowError when no interval is long enough.
BoundCheck verify_bound(const RiccatiSolution& sol, const RiccatiBound& bound);

}  // namespace gb
