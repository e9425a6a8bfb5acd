#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gb/flow.hpp"
#include "gb/types.hpp"

namespace gb {

/// Piecewise-C1 vector field along a projected orbit. `knots` lists the
/// derivative discontinuities so quadrature can split cells there.
struct TestField {
    std::function<Vec(double)> value;
    std::function<Vec(double)> deriv;
    std::vector<double> knots;
};

/// P1 hat-function space on a uniform grid over [a, b], vector valued with
/// d components per node, vanishing at both endpoints. Optionally carries
/// the midpoint-orthogonality constraint <xi(mid), gamma_dot(mid)> = 0.
class TestSpace {
public:
    TestSpace(double a, double b, int n_elem, int dim);

    double a() const { return a_; }
    double b() const { return b_; }
    int n_elem() const { return n_; }
    int dim() const { return d_; }
    double element_size() const { return (b_ - a_) / n_; }
    /// Interior nodes only; size of the unconstrained coefficient vector.
    int size() const { return d_ * (n_ - 1); }
    double node(int i) const { return a_ + (b_ - a_) * i / n_; }

    /// Field for an interior-node coefficient vector (size d*(n-1)).
    TestField field(const Vec& coeffs) const;

private:
    double a_, b_;
    int n_, d_;
};

struct AssembledForm {
    Mat stiffness;  // the index form on the (possibly constrained) basis
    Mat mass;       // L2 Gram matrix on the same basis
    Mat basis;      // maps reduced coordinates to interior-node coefficients
};

struct IndexFormOptions {
    int min_quad_cells = 128;  // floor on quadrature cells for knot-free fields
    FlowOptions flow;
};

/// Second-variation quadrature in Lagrangian form:
/// int xidot L_vv etadot + xidot L_vx eta + xi L_xv etadot + xi L_xx eta.
double index_form_direct(const OrbitSegment& orbit, const TestField& xi,
                         const TestField& eta, double a, double b,
                         const IndexFormOptions& opt = {});

/// Factorized evaluation along a Jacobi frame. Auto-partitions [a, b] at the
/// frame's vertical times and re-anchors a nonsingular frame on each cell;
/// boundary terms use each cell's own slope at its endpoints. Requires
/// endpoint values of xi, eta to vanish wherever the active frame is
/// singular at a cell end.
double index_form_factorized(const OrbitSegment& orbit, const JacobiFrame& frame,
                             const TestField& xi, const TestField& eta, double a,
                             double b, const IndexFormOptions& opt = {});

/// Assemble the index form and Gram matrix on a test space; when
/// `midpoint_constraint` is set the basis is projected onto the null space
/// of <xi(mid), direction> (n_elem must be even so the midpoint is a node).
AssembledForm assemble_index_form(const OrbitSegment& orbit, const TestSpace& space,
                                  bool midpoint_constraint,
                                  const IndexFormOptions& opt = {});

struct EigResult {
    double value = 0.0;
    Vec vector;
    int iterations = 0;
    bool dense_fallback = false;
};

/// Smallest eigenvalue of the pencil (A, M), M positive definite. Dense
/// solve below a size threshold; shift-invert inverse iteration with safe
/// Rayleigh re-shifts above it.
EigResult smallest_eigenpair(const Mat& a, const Mat& m);

enum class Verdict { Positive, Negative, Indeterminate };

struct DisconjugacyVerdict {
    Verdict verdict = Verdict::Indeterminate;
    double a_min = 0.0;
    double consistency = 0.0;  // |a_min(mesh) - a_min(mesh/2)|
    double floor = 0.0;
    bool agrees_with_conjugate_scan = true;
};

/// Positive-definiteness of the index form on the endpoint-zero test space,
/// cross-checked against the conjugate-point scan of the same window.
DisconjugacyVerdict disconjugacy_via_index(const OrbitSegment& orbit, double T,
                                           int mesh, const IndexFormOptions& opt = {});

struct ScanCell {
    int sample = 0;
    double T = 0.0;
    double a_min = 0.0;
};

struct PositivityReport {
    std::vector<ScanCell> cells;
    double uniform_a = 0.0;
    double trend_asymptote = 0.0;  // alpha in a_min ~ alpha + beta / T^2
    double trend_coeff = 0.0;
    double trend_residual = 0.0;
    bool bounded_below = false;  // asymptote above the positivity floor
    Vec witness;                 // minimizer coefficients at the worst cell
    std::vector<std::string> warnings;
};

struct ScanConfig {
    std::vector<double> T_list;
    int mesh = 512;
    bool midpoint_constraint = false;
    double positivity_floor = 1e-3;
    int workers = 1;
    IndexFormOptions index;
};

/// Scan a_min over invariant-set samples and segment lengths.
PositivityReport uniform_positivity_scan(HamiltonianPtr ham,
                                         const std::vector<PhasePoint>& samples,
                                         const ScanConfig& config);

/// Bound B on |I(Z, Z)| for the standard bump field Z = f(t) v0 with
/// f = cos^2(pi t) on [-1/2, 1/2]: B = 4 ||L||_C2 ||(Z, Zdot)||_L2^2,
/// with the C2 norm sampled over a box of chart coordinates.
double bump_field_bound(const Lagrangian& lag, const Vec& x_lo, const Vec& x_hi,
                        const Vec& v_lo, const Vec& v_hi, double t_lo, double t_hi,
                        int grid = 17);

}  // namespace gb
