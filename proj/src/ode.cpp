#include "gb/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gb/errors.hpp"

namespace gb::ode {
namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - bhat, for the embedded error estimate.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, const Options& opt) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        double sc = opt.abs_tol +
                    opt.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        double q = err[i] / sc;
        s += q * q;
    }
    return std::sqrt(s / static_cast<double>(err.size()));
}

}  // namespace

std::size_t Dense::locate(double t) const {
    const bool fwd = forward();
    // Binary search for the step whose interval contains t.
    std::size_t lo = 0, hi = c_.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        bool before = fwd ? (t <= ts_[mid + 1]) : (t >= ts_[mid + 1]);
        if (before)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

Vec Dense::eval(double t) const {
    std::size_t i = locate(t);
    const double h = ts_[i + 1] - ts_[i];
    double th = (t - ts_[i]) / h;
    th = std::clamp(th, 0.0, 1.0);
    const double th1 = 1.0 - th;
    const auto& con = c_[i];
    // con columns: y0, ydiff, bspl, y_diff - h*f1 - bspl, dense correction
    return con.col(0) +
           th * (con.col(1) + th1 * (con.col(2) + th * (con.col(3) + th1 * con.col(4))));
}

Vec Dense::derivative(double t) const {
    std::size_t i = locate(t);
    const double h = ts_[i + 1] - ts_[i];
    double th = (t - ts_[i]) / h;
    th = std::clamp(th, 0.0, 1.0);
    const double th1 = 1.0 - th;
    const auto& con = c_[i];
    // d/dth of the quartic interpolant, divided by h.
    Vec g = con.col(1) + (th1 - th) * (con.col(2) + th * (con.col(3) + th1 * con.col(4))) +
            th * th1 * (con.col(3) + (th1 - th) * con.col(4));
    return g / h;
}

Dense solve(const Rhs& f, double t0, const Vec& y0, double t1, const Options& opt) {
    if (t1 == t0) throw ConfigError("ode::solve: empty time span");
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const double hmax = (opt.max_step > 0.0) ? opt.max_step : span;

    const Eigen::Index n = y0.size();
    Vec y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

    f(t0, y, k1);
    double h = opt.initial_step;
    if (h <= 0.0) {
        double scale = opt.abs_tol + opt.rel_tol * y.cwiseAbs().maxCoeff();
        double d0 = y.cwiseAbs().maxCoeff() / scale;
        double d1n = k1.cwiseAbs().maxCoeff() / scale;
        h = (d0 > 1e-5 && d1n > 1e-5) ? 0.01 * d0 / d1n : 1e-6;
        h = std::min(h, hmax);
    }
    h = std::min(h, hmax) * dir;

    Dense out;
    out.dim_ = static_cast<int>(n);
    out.ts_.push_back(t0);

    double t = t0;
    std::size_t nsteps = 0;
    while (dir * (t1 - t) > 0.0) {
        if (++nsteps > opt.max_steps)
            throw EscapeError("ode::solve: step budget exhausted", t);
        if (std::abs(h) < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            throw EscapeError("ode::solve: step size underflow", t);
        if (dir * (t + h - t1) > 0.0) h = t1 - t;

        ytmp = y + h * (a21 * k1);
        f(t + h / 5, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + 3 * h / 10, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + 4 * h / 5, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + 8 * h / 9, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, ynew, k7);

        Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = error_norm(err, y, ynew, opt);

        if (en <= 1.0) {
            const Eigen::Index guard =
                opt.guard_dims < 0 ? n : std::min<Eigen::Index>(opt.guard_dims, n);
            if (!ynew.allFinite() ||
                (guard > 0 && ynew.head(guard).cwiseAbs().maxCoeff() > opt.blowup_norm))
                throw EscapeError("ode::solve: solution blowup", t);
            // Accept: store the continuous-extension table for this step.
            Eigen::MatrixXd con(n, 5);
            Vec ydiff = ynew - y;
            Vec bspl = h * k1 - ydiff;
            con.col(0) = y;
            con.col(1) = ydiff;
            con.col(2) = bspl;
            con.col(3) = ydiff - h * k7 - bspl;
            con.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            out.c_.push_back(std::move(con));
            t += h;
            out.ts_.push_back(t);
            y.swap(ynew);
            k1.swap(k7);  // first-same-as-last
        }

        double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        h *= fac;
        if (std::abs(h) > hmax) h = hmax * dir;
    }
    return out;
}

}  // namespace gb::ode
