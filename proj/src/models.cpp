#include "gb/models.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "gb/errors.hpp"

namespace gb {
namespace {

double min_eigenvalue(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    return es.eigenvalues().minCoeff();
}

}  // namespace

LagrangianHessians Hamiltonian::lagrangian_hessians(const Vec& x, const Vec& p,
                                                    double t) const {
    const Mat hpp = dpp(x, p, t);
    const Mat hxp = dxp(x, p, t);
    const Mat hxx = dxx(x, p, t);
    Eigen::LLT<Mat> llt(hpp);
    if (llt.info() != Eigen::Success)
        throw ConvexityError("H_pp not positive definite");
    const Mat lvv = llt.solve(Mat::Identity(hpp.rows(), hpp.cols()));
    const Mat lvx = -llt.solve(hxp.transpose());  // from H_px + H_pp L_vx = 0
    const Mat lxx = -hxx - hxp * lvx;             // from H_xx + H_xp L_vx = -L_xx
    return {lvv, lvx.transpose(), lxx};
}

// ---------------------------------------------------------------------------
// MechanicalLagrangian

MechanicalLagrangian::MechanicalLagrangian(ConfigSpace space, TimeDependence time,
                                           Mat kinetic, std::vector<TrigTerm> potential)
    : Lagrangian(std::move(space), time, min_eigenvalue(kinetic)),
      kinetic_(std::move(kinetic)),
      potential_(std::move(potential)) {
    if (convexity_floor() <= 0.0)
        throw ConvexityError("kinetic matrix not positive definite");
    kinetic_inv_ = kinetic_.inverse();
}

double MechanicalLagrangian::potential_value(const Vec& x, double t) const {
    double s = 0.0;
    for (const auto& term : potential_)
        s += term.amplitude * std::cos(term.freq.dot(x) + term.nu * t + term.phase);
    return s;
}

Vec MechanicalLagrangian::potential_grad(const Vec& x, double t) const {
    Vec g = Vec::Zero(space().dim);
    for (const auto& term : potential_)
        g -= term.amplitude * std::sin(term.freq.dot(x) + term.nu * t + term.phase) *
             term.freq;
    return g;
}

Mat MechanicalLagrangian::potential_hess(const Vec& x, double t) const {
    Mat h = Mat::Zero(space().dim, space().dim);
    for (const auto& term : potential_)
        h -= term.amplitude * std::cos(term.freq.dot(x) + term.nu * t + term.phase) *
             (term.freq * term.freq.transpose());
    return h;
}

double MechanicalLagrangian::value(const Vec& x, const Vec& v, double t) const {
    return 0.5 * v.dot(kinetic_ * v) - potential_value(x, t);
}
Vec MechanicalLagrangian::dx(const Vec& x, const Vec&, double t) const {
    return -potential_grad(x, t);
}
Vec MechanicalLagrangian::dv(const Vec&, const Vec& v, double) const {
    return kinetic_ * v;
}
Mat MechanicalLagrangian::dxx(const Vec& x, const Vec&, double t) const {
    return -potential_hess(x, t);
}
Mat MechanicalLagrangian::dxv(const Vec&, const Vec&, double) const {
    return Mat::Zero(space().dim, space().dim);
}
Mat MechanicalLagrangian::dvv(const Vec&, const Vec&, double) const {
    return kinetic_;
}

// ---------------------------------------------------------------------------
// MechanicalHamiltonian

MechanicalHamiltonian::MechanicalHamiltonian(
    std::shared_ptr<const MechanicalLagrangian> lag)
    : Hamiltonian(lag->space(), lag->time_dependence()), lag_(std::move(lag)) {}

double MechanicalHamiltonian::value(const Vec& x, const Vec& p, double t) const {
    return 0.5 * p.dot(lag_->kinetic_inv_ * p) + lag_->potential_value(x, t);
}
Vec MechanicalHamiltonian::dx(const Vec& x, const Vec&, double t) const {
    return lag_->potential_grad(x, t);
}
Vec MechanicalHamiltonian::dp(const Vec&, const Vec& p, double) const {
    return lag_->kinetic_inv_ * p;
}
Mat MechanicalHamiltonian::dxx(const Vec& x, const Vec&, double t) const {
    return lag_->potential_hess(x, t);
}
Mat MechanicalHamiltonian::dxp(const Vec&, const Vec&, double) const {
    return Mat::Zero(space().dim, space().dim);
}
Mat MechanicalHamiltonian::dpp(const Vec&, const Vec&, double) const {
    return lag_->kinetic_inv_;
}
LagrangianHessians MechanicalHamiltonian::lagrangian_hessians(const Vec& x,
                                                              const Vec&,
                                                              double t) const {
    return {lag_->kinetic_, Mat::Zero(space().dim, space().dim),
            -lag_->potential_hess(x, t)};
}

// ---------------------------------------------------------------------------
// LegendreHamiltonian

LegendreHamiltonian::LegendreHamiltonian(LagrangianPtr lag)
    : Hamiltonian(lag->space(), lag->time_dependence()), lag_(std::move(lag)) {}

Vec LegendreHamiltonian::velocity(const Vec& x, const Vec& p, double t) const {
    // Solve L_v(x, v, t) = p by Newton, damped on the residual norm.
    Vec v = p;  // identity-metric initial guess
    const double tol = 1e-12 * (1.0 + p.norm());
    Vec g = lag_->dv(x, v, t) - p;
    for (int iter = 0; iter < 60; ++iter) {
        if (g.norm() <= tol) return v;
        Mat lvv = lag_->dvv(x, v, t);
        Eigen::LLT<Mat> llt(lvv);
        if (llt.info() != Eigen::Success)
            throw ConvexityError("L_vv not positive definite during Legendre inversion");
        Vec step = llt.solve(-g);
        double alpha = 1.0;
        for (int halving = 0; halving < 50; ++halving) {
            Vec vn = v + alpha * step;
            Vec gn = lag_->dv(x, vn, t) - p;
            if (gn.norm() < g.norm() || halving == 49) {
                v = vn;
                g = gn;
                break;
            }
            alpha *= 0.5;
        }
    }
    if (g.norm() <= 1e3 * tol) return v;
    throw TransformError("Legendre inversion did not converge");
}

double LegendreHamiltonian::value(const Vec& x, const Vec& p, double t) const {
    Vec v = velocity(x, p, t);
    return p.dot(v) - lag_->value(x, v, t);
}
Vec LegendreHamiltonian::dx(const Vec& x, const Vec& p, double t) const {
    return -lag_->dx(x, velocity(x, p, t), t);
}
Vec LegendreHamiltonian::dp(const Vec& x, const Vec& p, double t) const {
    return velocity(x, p, t);
}
Mat LegendreHamiltonian::dpp(const Vec& x, const Vec& p, double t) const {
    Vec v = velocity(x, p, t);
    return lag_->dvv(x, v, t).inverse();
}
Mat LegendreHamiltonian::dxp(const Vec& x, const Vec& p, double t) const {
    Vec v = velocity(x, p, t);
    // H_xp = -L_xv L_vv^{-1}
    return -lag_->dxv(x, v, t) * lag_->dvv(x, v, t).inverse();
}
Mat LegendreHamiltonian::dxx(const Vec& x, const Vec& p, double t) const {
    Vec v = velocity(x, p, t);
    Mat lvx = lag_->dxv(x, v, t).transpose();
    return -lag_->dxx(x, v, t) - dxp(x, p, t) * lvx;
}
LagrangianHessians LegendreHamiltonian::lagrangian_hessians(const Vec& x,
                                                            const Vec& p,
                                                            double t) const {
    Vec v = velocity(x, p, t);
    return {lag_->dvv(x, v, t), lag_->dxv(x, v, t), lag_->dxx(x, v, t)};
}

// ---------------------------------------------------------------------------

PhasePoint legendre_transform(const Lagrangian& lag, const Vec& x, const Vec& v,
                              double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(lag.dvv(x, v, t));
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ConvexityError("L_vv not positive definite at query point");
    return {lag.space().wrap(x), lag.dv(x, v, t), t};
}

HamiltonianPtr hamiltonian_from_lagrangian(const LagrangianPtr& lag) {
    if (auto mech = std::dynamic_pointer_cast<const MechanicalLagrangian>(lag))
        return std::make_shared<MechanicalHamiltonian>(mech);
    return std::make_shared<LegendreHamiltonian>(lag);
}

double energy(const Lagrangian& lag, const Vec& x, const Vec& v, double t) {
    return lag.dv(x, v, t).dot(v) - lag.value(x, v, t);
}

}  // namespace gb
