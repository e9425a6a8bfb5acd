#include "gb/certificate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>

#include "gb/errors.hpp"

namespace gb {
namespace {

std::vector<double> axis_samples(double lo, double hi, int n) {
    std::vector<double> out;
    if (n <= 1 || hi <= lo) {
        out.push_back(0.5 * (lo + hi));
        return out;
    }
    for (int i = 0; i < n; ++i)
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    return out;
}

void for_each_node(const Region& r, const GridSpec& g,
                   const std::function<void(const Vec&, const Vec&, double)>& fn) {
    const int d = static_cast<int>(r.x_lo.size());
    std::vector<std::vector<double>> axes;
    for (int i = 0; i < d; ++i)
        axes.push_back(axis_samples(r.x_lo[i], r.x_hi[i], g.per_axis));
    for (int i = 0; i < d; ++i)
        axes.push_back(axis_samples(r.p_lo[i], r.p_hi[i], g.per_axis));
    auto times = axis_samples(r.t_lo, r.t_hi, g.time_samples);

    std::vector<std::size_t> idx(2 * d, 0);
    Vec x(d), p(d);
    while (true) {
        for (int i = 0; i < d; ++i) x[i] = axes[i][idx[i]];
        for (int i = 0; i < d; ++i) p[i] = axes[d + i][idx[d + i]];
        for (double t : times) fn(x, p, t);
        int axis = 0;
        while (axis < 2 * d && ++idx[axis] == axes[axis].size()) {
            idx[axis] = 0;
            ++axis;
        }
        if (axis == 2 * d) break;
    }
}

}  // namespace

BoundednessCertificate certify_bounded(HamiltonianPtr ham, const Region& region,
                                       const GridSpec& grid, double safety) {
    BoundednessCertificate cert;
    cert.ham = ham;
    cert.region = region;
    cert.grid = grid;
    cert.safety = safety;

    const int d = static_cast<int>(region.x_lo.size());
    const double h = grid.fd_step;
    double b1 = 0.0;
    double b2 = std::numeric_limits<double>::infinity();
    long samples = 0;

    auto hess_norms = [&](const Vec& x, const Vec& p, double t) {
        double m = 0.0;
        m = std::max(m, ham->dxx(x, p, t).operatorNorm());
        m = std::max(m, ham->dxp(x, p, t).operatorNorm());
        m = std::max(m, ham->dpp(x, p, t).operatorNorm());
        return m;
    };

    for_each_node(region, grid, [&](const Vec& x, const Vec& p, double t) {
        ++samples;
        b1 = std::max(b1, std::abs(ham->value(x, p, t)));
        b1 = std::max(b1, ham->dx(x, p, t).norm());
        b1 = std::max(b1, ham->dp(x, p, t).norm());
        b1 = std::max(b1, hess_norms(x, p, t));

        const Mat hpp = ham->dpp(x, p, t);
        Eigen::SelfAdjointEigenSolver<Mat> es(hpp);
        const double lmin = es.eigenvalues().minCoeff();
        if (lmin <= 0.0)
            throw ConvexityError("H_pp has a nonpositive eigenvalue on the grid");
        b2 = std::min(b2, lmin);

        // Third derivatives: central differences of the Hessian blocks in
        // every chart direction, including the clock.
        for (int axis = 0; axis < 2 * d + 1; ++axis) {
            Vec xp = x, xm = x, pp = p, pm = p;
            double tp = t, tm = t;
            if (axis < d) {
                xp[axis] += h;
                xm[axis] -= h;
            } else if (axis < 2 * d) {
                pp[axis - d] += h;
                pm[axis - d] -= h;
            } else {
                tp += h;
                tm -= h;
            }
            double diff = 0.0;
            diff = std::max(diff,
                            (ham->dxx(xp, pp, tp) - ham->dxx(xm, pm, tm)).operatorNorm());
            diff = std::max(diff,
                            (ham->dxp(xp, pp, tp) - ham->dxp(xm, pm, tm)).operatorNorm());
            diff = std::max(diff,
                            (ham->dpp(xp, pp, tp) - ham->dpp(xm, pm, tm)).operatorNorm());
            b1 = std::max(b1, diff / (2.0 * h));
        }
    });

    cert.b1_raw = b1;
    cert.b2_raw = b2;
    cert.samples = samples;
    return cert;
}

}  // namespace gb
