#pragma once

#include <functional>
#include <vector>

#include "gb/types.hpp"

namespace gb::ode {

/// Right-hand side of an ODE system: dydt = f(t, y).
using Rhs = std::function<void(double t, const Vec& y, Vec& dydt)>;

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 0.0;   // 0 -> choose automatically
    double max_step = 0.0;       // 0 -> span length
    double blowup_norm = 1e8;    // escape guard on the max-norm of y
    int guard_dims = -1;         // guard only the first k components (-1: all)
    std::size_t max_steps = 2'000'000;
};

/// Dense solution of one integration. Steps are stored in integration
/// order; `eval` accepts any t inside the span (forward or backward).
class Dense {
public:
    double t_begin() const { return ts_.front(); }
    double t_end() const { return ts_.back(); }
    int dim() const { return dim_; }
    bool forward() const { return ts_.back() >= ts_.front(); }

    /// Interpolated state; t is clamped to the span (within a small slack).
    Vec eval(double t) const;
    /// Time derivative of the interpolant.
    Vec derivative(double t) const;

    /// Knots of the underlying adaptive mesh (step boundaries).
    const std::vector<double>& knots() const { return ts_; }

private:
    friend Dense solve(const Rhs&, double, const Vec&, double, const Options&);
    int dim_ = 0;
    std::vector<double> ts_;          // size n+1
    std::vector<Eigen::MatrixXd> c_;  // per step: dim x 5 interpolation table
    std::size_t locate(double t) const;
};

/// Integrate dydt = f(t, y) from t0 to t1 (either direction) with an
/// adaptive embedded Runge-Kutta pair and continuous output.
/// Throws EscapeError on blowup or step-size underflow.
Dense solve(const Rhs& f, double t0, const Vec& y0, double t1,
            const Options& opt = {});

}  // namespace gb::ode
