#pragma once

#include <functional>
#include <memory>
#include <string>

#include "gb/types.hpp"

namespace gb {

/// Convex Lagrangian on a flat configuration space. Implementations supply
/// analytic first and second partials; models are immutable and all
/// evaluations are pure, so they can be shared freely across threads.
class Lagrangian {
public:
    virtual ~Lagrangian() = default;

    const ConfigSpace& space() const { return space_; }
    const TimeDependence& time_dependence() const { return time_; }
    /// Lower bound b for the smallest eigenvalue of L_vv (strict convexity).
    double convexity_floor() const { return convexity_floor_; }

    virtual double value(const Vec& x, const Vec& v, double t) const = 0;
    virtual Vec dx(const Vec& x, const Vec& v, double t) const = 0;
    virtual Vec dv(const Vec& x, const Vec& v, double t) const = 0;
    virtual Mat dxx(const Vec& x, const Vec& v, double t) const = 0;
    /// Mixed partial d^2L/dx dv; the transpose is d^2L/dv dx.
    virtual Mat dxv(const Vec& x, const Vec& v, double t) const = 0;
    virtual Mat dvv(const Vec& x, const Vec& v, double t) const = 0;

protected:
    Lagrangian(ConfigSpace space, TimeDependence time, double floor)
        : space_(std::move(space)), time_(time), convexity_floor_(floor) {}

private:
    ConfigSpace space_;
    TimeDependence time_;
    double convexity_floor_;
};

using LagrangianPtr = std::shared_ptr<const Lagrangian>;

/// Second derivatives of the Lagrangian pulled back along the Legendre
/// transform; used by the index form.
struct LagrangianHessians {
    Mat vv;  // L_vv
    Mat xv;  // L_xv (so L_vx = xv^T)
    Mat xx;  // L_xx
};

/// Hamiltonian on the dual side. Either analytic or Legendre-derived.
class Hamiltonian {
public:
    virtual ~Hamiltonian() = default;

    const ConfigSpace& space() const { return space_; }
    const TimeDependence& time_dependence() const { return time_; }

    virtual double value(const Vec& x, const Vec& p, double t) const = 0;
    virtual Vec dx(const Vec& x, const Vec& p, double t) const = 0;
    virtual Vec dp(const Vec& x, const Vec& p, double t) const = 0;
    virtual Mat dxx(const Vec& x, const Vec& p, double t) const = 0;
    /// Mixed partial d^2H/dx dp; d^2H/dp dx is its transpose.
    virtual Mat dxp(const Vec& x, const Vec& p, double t) const = 0;
    virtual Mat dpp(const Vec& x, const Vec& p, double t) const = 0;

    /// L_vv, L_xv, L_xx at the point corresponding to (x, p, t), computed
    /// from the block identities L_vv = H_pp^{-1}, H_px + H_pp L_vx = 0,
    /// H_xx + H_xp L_vx = -L_xx. Overridden where closed forms exist.
    virtual LagrangianHessians lagrangian_hessians(const Vec& x, const Vec& p,
                                                   double t) const;

protected:
    Hamiltonian(ConfigSpace space, TimeDependence time)
        : space_(std::move(space)), time_(time) {}

private:
    ConfigSpace space_;
    TimeDependence time_;
};

using HamiltonianPtr = std::shared_ptr<const Hamiltonian>;

/// A Lagrangian built from callables; convexity floor must be supplied.
class CustomLagrangian final : public Lagrangian {
public:
    using Scalar = std::function<double(const Vec&, const Vec&, double)>;
    using Vector = std::function<Vec(const Vec&, const Vec&, double)>;
    using Matrix = std::function<Mat(const Vec&, const Vec&, double)>;

    CustomLagrangian(ConfigSpace space, TimeDependence time, double floor,
                     Scalar value, Vector dx, Vector dv, Matrix dxx, Matrix dxv,
                     Matrix dvv)
        : Lagrangian(std::move(space), time, floor),
          value_(std::move(value)), dx_(std::move(dx)), dv_(std::move(dv)),
          dxx_(std::move(dxx)), dxv_(std::move(dxv)), dvv_(std::move(dvv)) {}

    double value(const Vec& x, const Vec& v, double t) const override { return value_(x, v, t); }
    Vec dx(const Vec& x, const Vec& v, double t) const override { return dx_(x, v, t); }
    Vec dv(const Vec& x, const Vec& v, double t) const override { return dv_(x, v, t); }
    Mat dxx(const Vec& x, const Vec& v, double t) const override { return dxx_(x, v, t); }
    Mat dxv(const Vec& x, const Vec& v, double t) const override { return dxv_(x, v, t); }
    Mat dvv(const Vec& x, const Vec& v, double t) const override { return dvv_(x, v, t); }

private:
    Scalar value_;
    Vector dx_, dv_;
    Matrix dxx_, dxv_, dvv_;
};

/// An analytic Hamiltonian built from callables.
class CustomHamiltonian final : public Hamiltonian {
public:
    using Scalar = std::function<double(const Vec&, const Vec&, double)>;
    using Vector = std::function<Vec(const Vec&, const Vec&, double)>;
    using Matrix = std::function<Mat(const Vec&, const Vec&, double)>;

    CustomHamiltonian(ConfigSpace space, TimeDependence time, Scalar value,
                      Vector dx, Vector dp, Matrix dxx, Matrix dxp, Matrix dpp)
        : Hamiltonian(std::move(space), time),
          value_(std::move(value)), dx_(std::move(dx)), dp_(std::move(dp)),
          dxx_(std::move(dxx)), dxp_(std::move(dxp)), dpp_(std::move(dpp)) {}

    double value(const Vec& x, const Vec& p, double t) const override { return value_(x, p, t); }
    Vec dx(const Vec& x, const Vec& p, double t) const override { return dx_(x, p, t); }
    Vec dp(const Vec& x, const Vec& p, double t) const override { return dp_(x, p, t); }
    Mat dxx(const Vec& x, const Vec& p, double t) const override { return dxx_(x, p, t); }
    Mat dxp(const Vec& x, const Vec& p, double t) const override { return dxp_(x, p, t); }
    Mat dpp(const Vec& x, const Vec& p, double t) const override { return dpp_(x, p, t); }

private:
    Scalar value_;
    Vector dx_, dp_;
    Matrix dxx_, dxp_, dpp_;
};

/// One term of a trigonometric-polynomial potential:
/// amplitude * cos(freq . x + nu * t + phase). `nu` drives time-periodic
/// forcing and is zero for autonomous systems.
struct TrigTerm {
    Vec freq;
    double nu = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
};

/// Mechanical system L = v^T M v / 2 - V(x, t) with a constant kinetic
/// matrix and a trig-polynomial potential.
class MechanicalLagrangian final : public Lagrangian {
public:
    MechanicalLagrangian(ConfigSpace space, TimeDependence time, Mat kinetic,
                         std::vector<TrigTerm> potential);

    double value(const Vec& x, const Vec& v, double t) const override;
    Vec dx(const Vec& x, const Vec& v, double t) const override;
    Vec dv(const Vec& x, const Vec& v, double t) const override;
    Mat dxx(const Vec& x, const Vec& v, double t) const override;
    Mat dxv(const Vec& x, const Vec& v, double t) const override;
    Mat dvv(const Vec& x, const Vec& v, double t) const override;

    const Mat& kinetic() const { return kinetic_; }
    const std::vector<TrigTerm>& potential() const { return potential_; }
    double potential_value(const Vec& x, double t) const;
    Vec potential_grad(const Vec& x, double t) const;
    Mat potential_hess(const Vec& x, double t) const;

private:
    Mat kinetic_;
    Mat kinetic_inv_;
    std::vector<TrigTerm> potential_;
    friend class MechanicalHamiltonian;
};

/// Closed-form dual of a MechanicalLagrangian: H = p^T M^{-1} p / 2 + V.
class MechanicalHamiltonian final : public Hamiltonian {
public:
    explicit MechanicalHamiltonian(std::shared_ptr<const MechanicalLagrangian> lag);

    double value(const Vec& x, const Vec& p, double t) const override;
    Vec dx(const Vec& x, const Vec& p, double t) const override;
    Vec dp(const Vec& x, const Vec& p, double t) const override;
    Mat dxx(const Vec& x, const Vec& p, double t) const override;
    Mat dxp(const Vec& x, const Vec& p, double t) const override;
    Mat dpp(const Vec& x, const Vec& p, double t) const override;
    LagrangianHessians lagrangian_hessians(const Vec& x, const Vec& p,
                                           double t) const override;

private:
    std::shared_ptr<const MechanicalLagrangian> lag_;
};

/// Hamiltonian obtained by numerically maximizing p.v - L(x, v, t) in v.
/// The inner maximization is a damped Newton solve of L_v = p; derivatives
/// come from the Legendre block identities.
class LegendreHamiltonian final : public Hamiltonian {
public:
    explicit LegendreHamiltonian(LagrangianPtr lag);

    double value(const Vec& x, const Vec& p, double t) const override;
    Vec dx(const Vec& x, const Vec& p, double t) const override;
    Vec dp(const Vec& x, const Vec& p, double t) const override;
    Mat dxx(const Vec& x, const Vec& p, double t) const override;
    Mat dxp(const Vec& x, const Vec& p, double t) const override;
    Mat dpp(const Vec& x, const Vec& p, double t) const override;
    LagrangianHessians lagrangian_hessians(const Vec& x, const Vec& p,
                                           double t) const override;

    const LagrangianPtr& lagrangian() const { return lag_; }
    /// Invert p = L_v(x, ., t). Throws TransformError on failure.
    Vec velocity(const Vec& x, const Vec& p, double t) const;

private:
    LagrangianPtr lag_;
};

/// Legendre transform of a single tangent vector: (x, v) -> (x, L_v).
/// Throws ConvexityError if L_vv is not positive definite at the point.
PhasePoint legendre_transform(const Lagrangian& lag, const Vec& x, const Vec& v,
                              double t);

/// Full model transform. Returns a MechanicalHamiltonian when the input is
/// mechanical (exact closed form), otherwise a LegendreHamiltonian.
HamiltonianPtr hamiltonian_from_lagrangian(const LagrangianPtr& lag);

/// Energy E = L_v . v - L; preserved by the flow in the autonomous case.
double energy(const Lagrangian& lag, const Vec& x, const Vec& v, double t);

}  // namespace gb
