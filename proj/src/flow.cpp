#include "gb/flow.hpp"

#include <cmath>

#include "gb/errors.hpp"

namespace gb {
namespace {

ode::Rhs hamilton_rhs(const HamiltonianPtr& ham, int d) {
    return [ham, d](double t, const Vec& y, Vec& dydt) {
        const Vec x = y.head(d), p = y.segment(d, d);
        dydt.resize(2 * d);
        dydt.head(d) = ham->dp(x, p, t);
        dydt.segment(d, d) = -ham->dx(x, p, t);
    };
}

// Augmented system: base trajectory plus k columns of the Jacobi equations
//   h' = H_px h + H_pp v,   v' = -H_xx h - H_xp v.
ode::Rhs augmented_rhs(const HamiltonianPtr& ham, int d, int k) {
    return [ham, d, k](double t, const Vec& y, Vec& dydt) {
        const Vec x = y.head(d), p = y.segment(d, d);
        dydt.resize(2 * d + 2 * d * k);
        dydt.head(d) = ham->dp(x, p, t);
        dydt.segment(d, d) = -ham->dx(x, p, t);
        const Mat hpp = ham->dpp(x, p, t);
        const Mat hxp = ham->dxp(x, p, t);
        const Mat hxx = ham->dxx(x, p, t);
        Eigen::Map<const Mat> hm(y.data() + 2 * d, d, k);
        Eigen::Map<const Mat> vm(y.data() + 2 * d + d * k, d, k);
        Eigen::Map<Mat> dh(dydt.data() + 2 * d, d, k);
        Eigen::Map<Mat> dv(dydt.data() + 2 * d + d * k, d, k);
        dh = hxp.transpose() * hm + hpp * vm;
        dv = -hxx * hm - hxp * vm;
    };
}

double autonomous_energy_drift(const Hamiltonian& ham, const ode::Dense& sol, int d) {
    if (!ham.time_dependence().is_autonomous()) return 0.0;
    const Vec y0 = sol.eval(sol.t_begin());
    const double e0 = ham.value(y0.head(d), y0.segment(d, d), sol.t_begin());
    double drift = 0.0;
    for (double t : sol.knots()) {
        const Vec y = sol.eval(t);
        drift = std::max(drift, std::abs(ham.value(y.head(d), y.segment(d, d), t) - e0));
    }
    return drift;
}

}  // namespace

bool OrbitSegment::covers(double t) const {
    const double lo = std::min(t0(), t1()), hi = std::max(t0(), t1());
    return t >= lo - 1e-12 && t <= hi + 1e-12;
}

PhasePoint OrbitSegment::point(double t) const {
    const int d = dim();
    const Vec y = sol_.eval(t);
    return {ham_->space().wrap(y.head(d)), y.segment(d, d), t};
}

Vec OrbitSegment::position(double t) const { return sol_.eval(t).head(dim()); }
Vec OrbitSegment::momentum(double t) const { return sol_.eval(t).segment(dim(), dim()); }

double OrbitSegment::equation_residual(double t) const {
    const int d = dim();
    const Vec y = sol_.eval(t);
    const Vec dy = sol_.derivative(t);
    const Vec x = y.head(d), p = y.segment(d, d);
    double rx = (dy.head(d) - ham_->dp(x, p, t)).norm();
    double rp = (dy.segment(d, d) + ham_->dx(x, p, t)).norm();
    return std::max(rx, rp);
}

OrbitSegment integrate_orbit(HamiltonianPtr ham, const PhasePoint& start,
                             double t0, double t1, const FlowOptions& opt) {
    const int d = start.dim();
    Vec y0(2 * d);
    y0.head(d) = start.x;
    y0.segment(d, d) = start.p;
    ode::Options oo;
    oo.rel_tol = opt.tol;
    oo.abs_tol = opt.tol * 1e-2;
    ode::Dense sol = ode::solve(hamilton_rhs(ham, d), t0, y0, t1, oo);
    double drift = autonomous_energy_drift(*ham, sol, d);
    return {std::move(ham), std::move(sol), drift};
}

bool JacobiFrame::covers(double t) const {
    const double lo = std::min(t0(), t1()), hi = std::max(t0(), t1());
    return t >= lo - 1e-12 && t <= hi + 1e-12;
}

Mat JacobiFrame::h_part(double t) const {
    const Vec y = sol_.eval(t);
    return Eigen::Map<const Mat>(y.data() + 2 * d_, d_, cols_);
}

Mat JacobiFrame::v_part(double t) const {
    const Vec y = sol_.eval(t);
    return Eigen::Map<const Mat>(y.data() + 2 * d_ + d_ * cols_, d_, cols_);
}

Mat JacobiFrame::h_dot(double t) const {
    const Vec dy = sol_.derivative(t);
    return Eigen::Map<const Mat>(dy.data() + 2 * d_, d_, cols_);
}

Mat JacobiFrame::v_dot(double t) const {
    const Vec dy = sol_.derivative(t);
    return Eigen::Map<const Mat>(dy.data() + 2 * d_ + d_ * cols_, d_, cols_);
}

PhasePoint JacobiFrame::point(double t) const {
    const Vec y = sol_.eval(t);
    return {ham_->space().wrap(y.head(d_)), y.segment(d_, d_), t};
}

Mat JacobiFrame::wronskian(const JacobiFrame& other, double t) const {
    return h_part(t).transpose() * other.v_part(t) -
           v_part(t).transpose() * other.h_part(t);
}

JacobiFrame integrate_jacobi_frame(const OrbitSegment& orbit, const Mat& h0,
                                   const Mat& v0, const FlowOptions& opt) {
    return frame_from(orbit, orbit.t0(), orbit.t1(), h0, v0, opt);
}

JacobiFrame frame_from(const OrbitSegment& orbit, double t_from, double t_to,
                       const Mat& h0, const Mat& v0, const FlowOptions& opt) {
    if (!orbit.covers(t_from))
        throw ConfigError("frame_from: t_from outside the orbit span");
    const int d = orbit.dim();
    const int k = static_cast<int>(h0.cols());
    if (v0.cols() != k || h0.rows() != d || v0.rows() != d)
        throw ConfigError("frame_from: inconsistent initial frame shape");
    Mat stacked(2 * d, k);
    stacked.topRows(d) = h0;
    stacked.bottomRows(d) = v0;
    if (Eigen::ColPivHouseholderQR<Mat>(stacked).rank() < k)
        throw ConfigError("frame_from: initial frame is column-rank deficient");

    Vec y0(2 * d + 2 * d * k);
    const Vec base = orbit.dense().eval(t_from);
    y0.head(2 * d) = base;
    Eigen::Map<Mat>(y0.data() + 2 * d, d, k) = h0;
    Eigen::Map<Mat>(y0.data() + 2 * d + d * k, d, k) = v0;

    ode::Options oo;
    oo.rel_tol = opt.tol;
    oo.abs_tol = opt.tol * 1e-2;
    oo.guard_dims = 2 * d;  // escape guard on the base trajectory only
    ode::Dense sol = ode::solve(augmented_rhs(orbit.ham(), d, k), t_from, y0, t_to, oo);
    return {orbit.ham(), std::move(sol), d, k};
}

Mat vertical_frame(const OrbitSegment& orbit, double t_from, double t_to,
                   const FlowOptions& opt) {
    const int d = orbit.dim();
    JacobiFrame f = frame_from(orbit, t_from, t_to, Mat::Zero(d, d),
                               Mat::Identity(d, d), opt);
    return f.h_part(t_to);
}

Mat monodromy(HamiltonianPtr ham, const PhasePoint& start, double period,
              const FlowOptions& opt) {
    const int d = start.dim();
    OrbitSegment orbit =
        integrate_orbit(ham, start, start.clock, start.clock + period, opt);
    const PhasePoint end = orbit.point(orbit.t1());
    const double gap = std::sqrt(
        std::pow(ham->space().distance(end.x, start.x), 2) + (end.p - start.p).squaredNorm());
    if (gap > opt.closure_tol)
        throw NotPeriodicError("monodromy: orbit does not close up", gap);

    Mat h0(d, 2 * d), v0(d, 2 * d);
    h0 << Mat::Identity(d, d), Mat::Zero(d, d);
    v0 << Mat::Zero(d, d), Mat::Identity(d, d);
    JacobiFrame f = integrate_jacobi_frame(orbit, h0, v0, opt);
    Mat m(2 * d, 2 * d);
    m.topRows(d) = f.h_part(orbit.t1());
    m.bottomRows(d) = f.v_part(orbit.t1());
    return m;
}

TangentSplitting tangent_splitting(const PhasePoint& at) {
    const int d = at.dim();
    Mat horizontal(2 * d, d), vertical(2 * d, d);
    horizontal << Mat::Identity(d, d), Mat::Zero(d, d);
    vertical << Mat::Zero(d, d), Mat::Identity(d, d);
    return {at, horizontal, vertical};
}

double symplectic_form(const Vec& a, const Vec& b) {
    const int d = static_cast<int>(a.size()) / 2;
    return a.tail(d).dot(b.head(d)) - b.tail(d).dot(a.head(d));
}

Mat symplectic_matrix(int d) {
    Mat j = Mat::Zero(2 * d, 2 * d);
    j.topRightCorner(d, d) = -Mat::Identity(d, d);
    j.bottomLeftCorner(d, d) = Mat::Identity(d, d);
    return j;
}

}  // namespace gb
