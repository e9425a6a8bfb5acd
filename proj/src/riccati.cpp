#include "gb/riccati.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "gb/errors.hpp"
#include "gb/ode.hpp"

namespace gb {
namespace {

constexpr double kRankTol = 1e-9;  // relative to ||H(t)||

double det_h(const JacobiFrame& f, double t) { return f.h_part(t).determinant(); }

double sigma_min(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().minCoeff();
}

bool near_vertical(const JacobiFrame& f, double t) {
    const Mat h = f.h_part(t);
    return sigma_min(h) < kRankTol * std::max(1.0, h.norm());
}

// Bisect a sign change of det H to 1e-10 in t.
double bisect_zero(const JacobiFrame& f, double lo, double hi) {
    double flo = det_h(f, lo);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = det_h(f, mid);
        if ((flo < 0) == (fm < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Golden-section refinement of a local minimum of sigma_min(H).
double refine_dip(const JacobiFrame& f, double lo, double hi) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = sigma_min(f.h_part(c)), fd = sigma_min(f.h_part(d));
    while (b - a > 1e-10) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = sigma_min(f.h_part(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = sigma_min(f.h_part(d));
        }
    }
    return 0.5 * (a + b);
}

std::vector<double> sample_times(const JacobiFrame& f, int refine) {
    std::vector<double> ts;
    const auto& knots = f.dense().knots();
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        for (int j = 0; j < refine; ++j)
            ts.push_back(knots[i] + (knots[i + 1] - knots[i]) * j / refine);
    }
    ts.push_back(knots.back());
    return ts;
}

double coth(double z) { return 1.0 / std::tanh(z); }

}  // namespace

bool RiccatiSolution::defined_at(double t) const {
    for (const auto& iv : intervals_)
        if (t > iv.lo + 1e-12 && t < iv.hi - 1e-12) return true;
    return false;
}

Mat RiccatiSolution::slope(double t) const {
    const Mat h = frame_.h_part(t);
    const Mat v = frame_.v_part(t);
    if (sigma_min(h) < kRankTol * std::max(1.0, h.norm()))
        throw DegenerateFrameError("Riccati slope queried at a blowup time");
    Mat s = v * h.inverse();
    return 0.5 * (s + s.transpose());
}

double RiccatiSolution::equation_residual(double t) const {
    if (!defined_at(t)) return 0.0;
    // Sdot from the interpolant: S = V H^{-1} gives
    // Sdot = Vdot H^{-1} - S Hdot H^{-1}.
    const Mat h = frame_.h_part(t);
    const Mat hinv = h.inverse();
    const Mat s = slope(t);
    const Mat sdot =
        frame_.v_dot(t) * hinv - s * (frame_.h_dot(t) * hinv);
    const PhasePoint pt = frame_.point(t);
    const Vec x = frame_.dense().eval(t).head(frame_.dim());
    const Mat hpp = frame_.ham()->dpp(x, pt.p, t);
    const Mat hxp = frame_.ham()->dxp(x, pt.p, t);
    const Mat hxx = frame_.ham()->dxx(x, pt.p, t);
    const Mat res = sdot + s * hpp * s + s * hxp.transpose() + hxp * s + hxx;
    return res.norm();
}

RiccatiSolution solve_riccati(JacobiFrame frame) {
    // The initial span must be Lagrangian: V0^T H0 symmetric.
    const Mat h0 = frame.h_part(frame.t0());
    const Mat v0 = frame.v_part(frame.t0());
    const Mat sym = v0.transpose() * h0;
    if ((sym - sym.transpose()).norm() >
        1e-8 * std::max(1.0, sym.norm()))
        throw ConfigError("solve_riccati: initial frame does not span a Lagrangian subspace");

    const double lo = std::min(frame.t0(), frame.t1());
    const double hi = std::max(frame.t0(), frame.t1());
    auto ts = sample_times(frame, 4);
    std::sort(ts.begin(), ts.end());

    std::vector<double> zeros;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double fa = det_h(frame, ts[i]);
        const double fb = det_h(frame, ts[i + 1]);
        if ((fa < 0) != (fb < 0)) {
            zeros.push_back(bisect_zero(frame, ts[i], ts[i + 1]));
        } else if (i > 0 && i + 2 < ts.size()) {
            // Even-multiplicity touch: a dip of the smallest singular value
            // below the rank tolerance without a determinant sign change.
            if (near_vertical(frame, ts[i]) &&
                sigma_min(frame.h_part(ts[i - 1])) > sigma_min(frame.h_part(ts[i])) &&
                sigma_min(frame.h_part(ts[i + 1])) > sigma_min(frame.h_part(ts[i]))) {
                const double z = refine_dip(frame, ts[i - 1], ts[i + 1]);
                if (near_vertical(frame, z)) zeros.push_back(z);
            }
        }
    }
    if (near_vertical(frame, lo)) zeros.push_back(lo);
    if (near_vertical(frame, hi)) zeros.push_back(hi);
    std::sort(zeros.begin(), zeros.end());
    zeros.erase(std::unique(zeros.begin(), zeros.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-8; }),
                zeros.end());

    std::vector<RiccatiSolution::Interval> intervals;
    std::vector<double> boundaries{lo};
    for (double z : zeros) boundaries.push_back(z);
    boundaries.push_back(hi);
    std::sort(boundaries.begin(), boundaries.end());
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i)
        if (boundaries[i + 1] - boundaries[i] > 1e-8)
            intervals.push_back({boundaries[i], boundaries[i + 1]});

    std::vector<double> interior;
    for (double z : zeros)
        if (z > lo + 1e-8 && z < hi - 1e-8) interior.push_back(z);
    return {std::move(frame), std::move(interior), std::move(intervals)};
}

double comparison_w(double rate, double shift, double t) {
    const double z = rate * t - shift;
    if (std::abs(z) < 1e-13 * std::max({1.0, std::abs(rate * t), std::abs(shift)}))
        throw PoleError("comparison function evaluated at its pole");
    return rate * coth(z);
}

double comparison_w_dot(double rate, double shift, double t) {
    const double z = rate * t - shift;
    const double sh = std::sinh(z);
    return -rate * rate / (sh * sh);
}

double comparison_residual(double rate, double shift, double t) {
    const double w = comparison_w(rate, shift, t);
    return comparison_w_dot(rate, shift, t) + w * w - rate * rate;
}

RiccatiBound riccati_bound(const BoundednessCertificate& cert) {
    const auto& ham = cert.ham;
    const int d = static_cast<int>(cert.region.x_lo.size());
    double max_c = 0.0, max_d = 0.0;

    // Grid sweep mirroring the certificate's own sampling.
    auto axis = [](double lo, double hi, int n) {
        std::vector<double> v;
        if (n <= 1 || hi <= lo) {
            v.push_back(0.5 * (lo + hi));
            return v;
        }
        for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
        return v;
    };
    std::vector<std::vector<double>> axes;
    for (int i = 0; i < d; ++i)
        axes.push_back(axis(cert.region.x_lo[i], cert.region.x_hi[i], cert.grid.per_axis));
    for (int i = 0; i < d; ++i)
        axes.push_back(axis(cert.region.p_lo[i], cert.region.p_hi[i], cert.grid.per_axis));
    auto times = axis(cert.region.t_lo, cert.region.t_hi, cert.grid.time_samples);

    auto c_matrix = [&](const Vec& x, const Vec& p, double t) -> Mat {
        const Mat hpp = ham->dpp(x, p, t);
        const Mat hpx = ham->dxp(x, p, t).transpose();
        return hpp.inverse() * hpx;
    };

    std::vector<std::size_t> idx(2 * d, 0);
    Vec x(d), p(d);
    bool done = false;
    while (!done) {
        for (int i = 0; i < d; ++i) x[i] = axes[i][idx[i]];
        for (int i = 0; i < d; ++i) p[i] = axes[d + i][idx[d + i]];
        for (double t : times) {
            const Mat c = c_matrix(x, p, t);
            max_c = std::max(max_c, c.operatorNorm());

            Mat cdot = Mat::Zero(d, d);
            if (ham->dxp(x, p, t).norm() > 0.0) {
                // Centered difference of C along the orbit through the node.
                const double hstep = 1e-3;
                Vec y0(2 * d);
                y0.head(d) = x;
                y0.tail(d) = p;
                ode::Options oo;
                oo.rel_tol = 1e-10;
                oo.abs_tol = 1e-12;
                auto rhs = [&](double tt, const Vec& y, Vec& dy) {
                    dy.resize(2 * d);
                    dy.head(d) = ham->dp(y.head(d), y.tail(d), tt);
                    dy.tail(d) = -ham->dx(y.head(d), y.tail(d), tt);
                };
                const Vec yp = ode::solve(rhs, t, y0, t + hstep, oo).eval(t + hstep);
                const Vec ym = ode::solve(rhs, t, y0, t - hstep, oo).eval(t - hstep);
                cdot = (c_matrix(yp.head(d), yp.tail(d), t + hstep) -
                        c_matrix(ym.head(d), ym.tail(d), t - hstep)) /
                       (2.0 * hstep);
            }
            const Mat hpp = ham->dpp(x, p, t);
            const Mat dd = ham->dxx(x, p, t) - c.transpose() * hpp * c - cdot;
            const Mat dsym = 0.5 * (dd + dd.transpose());
            max_d = std::max(max_d, dsym.operatorNorm());
        }
        int ax = 0;
        while (ax < 2 * d && ++idx[ax] == axes[ax].size()) {
            idx[ax] = 0;
            ++ax;
        }
        done = (ax == 2 * d);
    }

    RiccatiBound b;
    b.b1 = cert.b1();
    b.b2 = cert.b2();
    b.C_norm = max_c;
    const double m_raw = 1.0 / cert.b2_raw;
    b.M = 1.0 / b.b2;
    b.R = std::max(std::sqrt(max_d / m_raw), 1e-6);
    b.A_raw = m_raw * b.R * coth(b.R) + max_c;
    b.A = b.A_raw * cert.safety;
    return b;
}

RiccatiBound riccati_bound_from_constants(double b1, double b2) {
    RiccatiBound b;
    b.b1 = b1;
    b.b2 = b2;
    b.M = 1.0 / b2;
    const double speed = std::sqrt(2.0) * b1 + 1.0;  // phase velocity + clock
    b.C_norm = b.M * b1;
    const double cdot = (b.M * b.M * b1 * b1 + b.M * b1) * speed;
    const double dmax = b1 + b.C_norm * b.C_norm * b1 + cdot;
    b.R = std::max(std::sqrt(dmax / b.M), 1e-6);
    b.A_raw = b.M * b.R * coth(b.R) + b.C_norm;
    b.A = b.A_raw;
    return b;
}

BoundCheck verify_bound(const RiccatiSolution& sol, const RiccatiBound& bound) {
    BoundCheck check;
    check.bound = bound.A;
    check.per_interval_extension = sol.intervals().size() > 1;
    bool any = false;
    for (const auto& iv : sol.intervals()) {
        if (iv.hi - iv.lo <= 2.0) continue;
        any = true;
        const double lo = iv.lo + 1.0, hi = iv.hi - 1.0;
        double worst = 0.0, where = lo;
        const int n = 400;
        for (int i = 0; i <= n; ++i) {
            const double t = lo + (hi - lo) * i / n;
            const double s = sol.slope(t).operatorNorm();
            if (s > worst) {
                worst = s;
                where = t;
            }
        }
        check.per_interval.emplace_back(worst, where);
        if (worst > check.max_slope_norm) {
            check.max_slope_norm = worst;
            check.at_time = where;
        }
    }
    if (!any)
        throw InsufficientWindowError(
            "verify_bound: no maximal interval of definition longer than 2");
    check.pass = check.max_slope_norm < bound.A;
    return check;
}

}  // namespace gb
