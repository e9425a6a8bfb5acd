#pragma once

#include <memory>
#include <optional>

#include "gb/models.hpp"
#include "gb/ode.hpp"
#include "gb/types.hpp"

namespace gb {

/// Dense trajectory of the hamiltonian flow over [t0, t1] (either direction).
/// Positions are stored unwrapped so interpolation stays smooth; `point`
/// reduces periodic axes on output.
class OrbitSegment {
public:
    OrbitSegment(HamiltonianPtr ham, ode::Dense sol, double energy_drift)
        : ham_(std::move(ham)), sol_(std::move(sol)), energy_drift_(energy_drift) {}

    const HamiltonianPtr& ham() const { return ham_; }
    double t0() const { return sol_.t_begin(); }
    double t1() const { return sol_.t_end(); }
    int dim() const { return sol_.dim() / 2; }
    /// Max |H(t) - H(t0)| over the sample knots (autonomous systems only).
    double energy_drift() const { return energy_drift_; }

    bool covers(double t) const;
    PhasePoint point(double t) const;
    Vec position(double t) const;  // unwrapped chart coordinates
    Vec momentum(double t) const;
    const ode::Dense& dense() const { return sol_; }

    /// Residual of the Hamilton equations for the interpolated trajectory.
    double equation_residual(double t) const;

private:
    HamiltonianPtr ham_;
    ode::Dense sol_;
    double energy_drift_;
};

/// Matrix solution (H(t), V(t)) of the Jacobi equations along an orbit,
/// co-integrated with the base trajectory on one adaptive mesh. The column
/// count is d for frames spanning Lagrangian subspaces and 2d for full
/// linearizations.
class JacobiFrame {
public:
    JacobiFrame(HamiltonianPtr ham, ode::Dense sol, int dim, int cols)
        : ham_(std::move(ham)), sol_(std::move(sol)), d_(dim), cols_(cols) {}

    const HamiltonianPtr& ham() const { return ham_; }
    double t0() const { return sol_.t_begin(); }
    double t1() const { return sol_.t_end(); }
    int dim() const { return d_; }
    int cols() const { return cols_; }
    bool covers(double t) const;

    Mat h_part(double t) const;  // d x cols horizontal components
    Mat v_part(double t) const;  // d x cols vertical components
    Mat h_dot(double t) const;   // time derivative of the interpolant
    Mat v_dot(double t) const;
    PhasePoint point(double t) const;
    const ode::Dense& dense() const { return sol_; }

    /// Wronskian H_self^T V_other - V_self^T H_other at time t; constant in
    /// t for any pair of Jacobi solutions.
    Mat wronskian(const JacobiFrame& other, double t) const;

private:
    HamiltonianPtr ham_;
    ode::Dense sol_;
    int d_;
    int cols_;
};

struct FlowOptions {
    double tol = 1e-10;
    double closure_tol = 1e-8;  // periodic-orbit gap tolerance
};

/// Integrate the hamiltonian flow from `start` over [t0, t1]; start.clock is
/// identified with t0. Reports energy drift for autonomous systems.
OrbitSegment integrate_orbit(HamiltonianPtr ham, const PhasePoint& start,
                             double t0, double t1, const FlowOptions& opt = {});

/// Integrate the linearized flow with initial frame (H0, V0) from the start
/// of `orbit` across its span (re-integrating the base trajectory on the
/// same mesh). H0, V0 are d x k with the stacked frame of full column rank.
JacobiFrame integrate_jacobi_frame(const OrbitSegment& orbit, const Mat& h0,
                                   const Mat& v0, const FlowOptions& opt = {});

/// Jacobi frame started at orbit.point(t_from) over [t_from, t_to].
JacobiFrame frame_from(const OrbitSegment& orbit, double t_from, double t_to,
                       const Mat& h0, const Mat& v0, const FlowOptions& opt = {});

/// Horizontal part at t_to of the frame started vertical at t_from:
/// Y u = d(pi) d(psi) (0, u).
Mat vertical_frame(const OrbitSegment& orbit, double t_from, double t_to,
                   const FlowOptions& opt = {});

/// Full linearization d(psi)_period at a periodic point, assembled from 2d
/// Jacobi columns. Throws NotPeriodicError when the orbit fails to close.
Mat monodromy(HamiltonianPtr ham, const PhasePoint& start, double period,
              const FlowOptions& opt = {});

/// Canonical horizontal/vertical splitting at a point, with the coordinate
/// symplectic form for checking that both subspaces are Lagrangian.
struct TangentSplitting {
    PhasePoint at;
    Mat horizontal;  // 2d x d basis, columns (e_i, 0)
    Mat vertical;    // 2d x d basis, columns (0, e_i)
};

TangentSplitting tangent_splitting(const PhasePoint& at);

/// omega((h1,v1),(h2,v2)) = v1.h2 - v2.h1 on stacked (h, v) vectors.
double symplectic_form(const Vec& a, const Vec& b);

/// The matrix of the symplectic form in stacked coordinates.
Mat symplectic_matrix(int d);

}  // namespace gb
