#include "gb/conjugate_greens.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "gb/errors.hpp"

namespace gb {
namespace {

constexpr double kRankTol = 1e-9;

int multiplicity_at(const JacobiFrame& f, double t) {
    const Mat h = f.h_part(t);
    Eigen::JacobiSVD<Mat> svd(h);
    const double floor = kRankTol * std::max(1.0, h.norm());
    int m = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] < floor) ++m;
    return std::max(m, 1);
}

// Five-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                           0.5384693101056831, 0.9061798459386640};
constexpr double kGw[5] = {0.2369268850561891, 0.4786286704993665,
                           0.5688888888888889, 0.4786286704993665,
                           0.2369268850561891};

Mat slope_of(const JacobiFrame& f, double t) {
    const Mat h = f.h_part(t);
    const Mat v = f.v_part(t);
    Mat s = v * h.inverse();
    return 0.5 * (s + s.transpose());
}

}  // namespace

ConjugateReport find_conjugate_points(const OrbitSegment& orbit, double window_lo,
                                      double window_hi, const FlowOptions& opt) {
    if (!orbit.covers(window_lo) || !orbit.covers(window_hi))
        throw ConfigError("find_conjugate_points: window outside the orbit span");
    const int d = orbit.dim();
    JacobiFrame frame = frame_from(orbit, window_lo, window_hi, Mat::Zero(d, d),
                                   Mat::Identity(d, d), opt);
    RiccatiSolution ric = solve_riccati(frame);

    ConjugateReport report;
    report.window_lo = window_lo;
    report.window_hi = window_hi;
    for (double z : ric.blowup_times())
        report.conjugate_times.push_back({z, multiplicity_at(frame, z)});
    // The window end counts; the trivial zero at the start does not.
    const Mat h_end = frame.h_part(window_hi);
    Eigen::JacobiSVD<Mat> svd(h_end);
    if (svd.singularValues().minCoeff() < kRankTol * std::max(1.0, h_end.norm()))
        report.conjugate_times.push_back({window_hi, multiplicity_at(frame, window_hi)});
    report.disconjugate = report.conjugate_times.empty();
    return report;
}

GreenBundles green_bundles(HamiltonianPtr ham, const PhasePoint& at, double T,
                           const GreenOptions& opt) {
    if (T <= 0.0) throw ConfigError("green_bundles: horizon must be positive");
    const int d = at.dim();
    const double clock = at.clock;

    double horizon = T;
    GreenBundles out;
    out.at = at;

    auto slopes_at = [&](double h) -> std::pair<Mat, Mat> {
        OrbitSegment fwd = integrate_orbit(ham, at, clock, clock + h, opt.flow);
        OrbitSegment bwd = integrate_orbit(ham, at, clock, clock - h, opt.flow);
        // Backward transport of the vertical at psi_h(at) down to the point.
        JacobiFrame ef = frame_from(fwd, clock + h, clock, Mat::Zero(d, d),
                                    Mat::Identity(d, d), opt.flow);
        JacobiFrame ff = frame_from(bwd, clock - h, clock, Mat::Zero(d, d),
                                    Mat::Identity(d, d), opt.flow);
        return {slope_of(ef, clock), slope_of(ff, clock)};
    };

    const double cap = T * opt.cap_factor;
    bool have_result = false;
    while (true) {
        try {
            // Disconjugacy over [-horizon, horizon]: scan both legs anchored
            // at the query point (an unstable orbit cannot be shadowed across
            // the whole two-sided window from a re-integrated endpoint).
            // Cross pairs are covered by the monotone-order check below.
            OrbitSegment fwd_leg =
                integrate_orbit(ham, at, clock, clock + horizon, opt.flow);
            OrbitSegment bwd_leg =
                integrate_orbit(ham, at, clock, clock - horizon, opt.flow);
            if (!find_conjugate_points(fwd_leg, clock, clock + horizon, opt.flow)
                     .disconjugate ||
                !find_conjugate_points(bwd_leg, clock, clock - horizon, opt.flow)
                     .disconjugate)
                throw DisconjugacyError(
                    "green_bundles: conjugate point inside the horizon");

            std::vector<double> ladder;
            for (int k = opt.ladder; k >= 0; --k) ladder.push_back(horizon / (1 << k));
            GreenBundles attempt;
            attempt.at = at;
            Mat prev_s, prev_u;
            for (std::size_t i = 0; i < ladder.size(); ++i) {
                auto [s, u] = slopes_at(ladder[i]);
                // Monotone order S_s < S_t < U_t < U_s certifies the cross
                // pairs of the two-sided window.
                const double order_tol = 1e-7 * std::max({1.0, s.norm(), u.norm()});
                Eigen::SelfAdjointEigenSolver<Mat> gap_eig(u - s);
                bool ordered = gap_eig.eigenvalues().minCoeff() >= -order_tol;
                if (i > 0) {
                    Eigen::SelfAdjointEigenSolver<Mat> ds(s - prev_s), du(prev_u - u);
                    ordered = ordered && ds.eigenvalues().minCoeff() >= -order_tol &&
                              du.eigenvalues().minCoeff() >= -order_tol;
                    attempt.gap_history.emplace_back(
                        ladder[i - 1], (s - prev_s).norm() + (u - prev_u).norm());
                }
                if (!ordered)
                    throw DisconjugacyError(
                        "green_bundles: slope order violated inside the horizon");
                if (i + 1 == ladder.size()) {
                    attempt.S_half = prev_s;
                    attempt.U_half = prev_u;
                }
                prev_s = s;
                prev_u = u;
            }
            attempt.S_limit = prev_s;
            attempt.U_limit = prev_u;
            attempt.T_used = horizon;
            attempt.convergence_gap = attempt.gap_history.back().second;
            attempt.converged = attempt.convergence_gap <= opt.tol;
            out = std::move(attempt);
            have_result = true;
        } catch (const DisconjugacyError&) {
            // A doubled horizon that fails validation does not void the
            // last good ladder; the requested horizon must succeed though.
            if (!have_result) throw;
            break;
        }
        if (out.converged || 2.0 * horizon > cap) break;
        horizon *= 2.0;
    }
    return out;
}

Mat ReconstructedFrame::accumulated(double t) const {
    // Z(t) at the nearest knot below t plus a 5-point Gauss tail.
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t i = (it == knots_.begin()) ? 0 : (it - knots_.begin() - 1);
    i = std::min(i, knots_.size() - 1);
    Mat z = z_[i];
    const double a = knots_[i];
    if (std::abs(t - a) > 0.0) {
        const double half = 0.5 * (t - a), mid = 0.5 * (t + a);
        Mat add = Mat::Zero(z.rows(), z.cols());
        for (int g = 0; g < 5; ++g) {
            const double s = mid + half * kGx[g];
            const Mat h1 = base_.h_part(s);
            const PhasePoint pt = base_.point(s);
            const Vec x = base_.dense().eval(s).head(base_.dim());
            const Mat hpp = base_.ham()->dpp(x, pt.p, s);
            const Mat h1i = h1.inverse();
            add += kGw[g] * (h1i * hpp * h1i.transpose() * k_);
        }
        z += half * add;
    }
    return d_ + z;
}

Mat ReconstructedFrame::h_at(double t) const { return base_.h_part(t) * accumulated(t); }

Mat ReconstructedFrame::v_at(double t) const {
    const Mat h1 = base_.h_part(t);
    const Mat v1 = base_.v_part(t);
    return h1.transpose().inverse() * (k_ + v1.transpose() * h_at(t));
}

ReconstructedFrame jform_reconstruct(const JacobiFrame& base, const Mat& k,
                                     const Mat& d, double t0) {
    const double lo = std::min(base.t0(), base.t1());
    const double hi = std::max(base.t0(), base.t1());
    const bool at_infinity = std::isinf(t0);
    if (!at_infinity && (t0 < lo - 1e-12 || t0 > hi + 1e-12))
        throw ConfigError("jform_reconstruct: anchor outside the frame span");

    // Integration knots: the frame mesh refined to a guaranteed resolution,
    // so the cumulative quadrature stays accurate even where the adaptive
    // mesh took giant steps.
    std::vector<double> knots;
    const auto& raw = base.dense().knots();
    std::vector<double> sorted(raw.begin(), raw.end());
    std::sort(sorted.begin(), sorted.end());
    const double hmax = (hi - lo) / 256.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const int pieces =
            std::max(2, static_cast<int>(std::ceil((sorted[i + 1] - sorted[i]) / hmax)));
        for (int j = 0; j < pieces; ++j)
            knots.push_back(sorted[i] + (sorted[i + 1] - sorted[i]) * j / pieces);
    }
    knots.push_back(sorted.back());
    if (!at_infinity) knots.push_back(t0);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [&](double a, double b) { return b - a < 1e-12 * (hi - lo); }),
                knots.end());

    // The base frame must stay nonsingular across the domain.
    {
        JacobiFrame probe = base;
        RiccatiSolution ric = solve_riccati(std::move(probe));
        if (!ric.blowup_times().empty())
            throw ReconstructionDomainError(
                "jform_reconstruct: base frame singular inside the domain");
    }

    const int dd = base.dim();
    auto integrand = [&](double s) -> Mat {
        const Mat h1 = base.h_part(s);
        Eigen::JacobiSVD<Mat> svd(h1);
        if (svd.singularValues().minCoeff() < 1e-12 * std::max(1.0, h1.norm()))
            throw ReconstructionDomainError(
                "jform_reconstruct: base frame singular inside the domain");
        const PhasePoint pt = base.point(s);
        const Vec x = base.dense().eval(s).head(dd);
        const Mat hpp = base.ham()->dpp(x, pt.p, s);
        const Mat h1i = h1.inverse();
        return h1i * hpp * h1i.transpose() * k;
    };

    // Per-cell 5-point Gauss, accumulated from the anchor.
    std::vector<Mat> cell(knots.size() - 1, Mat::Zero(dd, dd));
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        Mat acc = Mat::Zero(dd, dd);
        for (int g = 0; g < 5; ++g) acc += kGw[g] * integrand(mid + half * kGx[g]);
        cell[i] = half * acc;
    }

    std::vector<Mat> z(knots.size(), Mat::Zero(dd, dd));
    double tail = 0.0;
    if (at_infinity) {
        // Anchor at the far end: Z(t) = -int_t^hi G ds - tail estimate.
        z.back() = Mat::Zero(dd, dd);
        for (std::size_t i = knots.size() - 1; i-- > 0;) z[i] = z[i + 1] - cell[i];
        // Tail beyond the cap from the decay rate of ||G|| near the end.
        const double g_end = integrand(knots.back() - 1e-9 * (hi - lo)).norm();
        const double g_mid =
            integrand(knots[knots.size() / 2]).norm();
        const double dt = knots.back() - knots[knots.size() / 2];
        if (g_end > 0.0 && g_mid > g_end && dt > 0.0) {
            const double rate = std::log(g_mid / g_end) / dt;
            tail = g_end / std::max(rate, 1e-6);
        } else {
            tail = std::numeric_limits<double>::infinity();
        }
    } else {
        const auto anchor =
            std::lower_bound(knots.begin(), knots.end(), t0) - knots.begin();
        for (std::size_t i = anchor; i + 1 < knots.size(); ++i) z[i + 1] = z[i] + cell[i];
        for (std::size_t i = anchor; i-- > 0;) z[i] = z[i + 1] - cell[i];
    }

    const Mat kd = k.transpose() * d;
    const bool lagr = (kd - kd.transpose()).norm() <= 1e-10 * std::max(1.0, kd.norm());
    return {base, k, d, std::move(knots), std::move(z), tail, lagr};
}

}  // namespace gb
