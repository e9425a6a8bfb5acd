#include "gb/transversal.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

#include "gb/errors.hpp"

namespace gb {
namespace {

Mat orthonormalize(const Mat& basis) {
    Eigen::HouseholderQR<Mat> qr(basis);
    return qr.householderQ() * Mat::Identity(basis.rows(), basis.cols());
}

// Norm of the restriction of `map` to span(basis), basis orthonormal.
double restricted_norm(const Mat& map, const Mat& basis) {
    Eigen::JacobiSVD<Mat> svd(map * basis);
    return svd.singularValues().maxCoeff();
}

}  // namespace

Mat TransversalAction::psi(std::size_t from, long k) const {
    const long n = static_cast<long>(size());
    Mat acc = Mat::Identity(fiber_dim, fiber_dim);
    if (k >= 0) {
        for (long j = 0; j < k; ++j) acc = maps[(from + j) % n] * acc;
    } else {
        for (long j = 1; j <= -k; ++j) {
            const long idx = ((static_cast<long>(from) - j) % n + n) % n;
            acc = Mat(maps[idx].inverse()) * acc;
        }
    }
    return acc;
}

Mat TransversalAction::dpsi(std::size_t from, long k) const {
    const long n = static_cast<long>(size());
    const int dd = static_cast<int>(dpsi_steps.front().rows());
    Mat acc = Mat::Identity(dd, dd);
    if (k >= 0) {
        for (long j = 0; j < k; ++j) acc = dpsi_steps[(from + j) % n] * acc;
    } else {
        for (long j = 1; j <= -k; ++j) {
            const long idx = ((static_cast<long>(from) - j) % n + n) % n;
            acc = Mat(dpsi_steps[idx].inverse()) * acc;
        }
    }
    return acc;
}

TransversalAction build_transversal_action(HamiltonianPtr ham,
                                           const std::vector<PhasePoint>& samples,
                                           double step, bool periodic,
                                           const FlowOptions& opt) {
    if (samples.empty())
        throw ConfigError("build_transversal_action: no sample points");
    if (!ham->time_dependence().is_autonomous())
        throw ConfigError("build_transversal_action: autonomous systems only");

    TransversalAction action;
    action.ham = ham;
    action.base = samples;
    action.step = step;
    action.periodic = periodic;
    const int d = samples.front().dim();
    action.fiber_dim = 2 * d - 2;

    for (const auto& pt : samples) {
        const Vec hp = ham->dp(pt.x, pt.p, pt.clock);
        const Vec hx = ham->dx(pt.x, pt.p, pt.clock);
        Vec x_field(2 * d);
        x_field.head(d) = hp;
        x_field.tail(d) = -hx;
        if (hp.norm() < 1e-12 * std::max(1.0, x_field.norm()))
            throw SingularProjectionError(
                "build_transversal_action: dpi(X) vanishes at a sample point");
        action.flow_dir.push_back(x_field);

        // N = ker(dH) intersect ker(<dpi(.), dpi X>).
        Mat rows(2, 2 * d);
        rows.row(0).head(d) = hx.transpose();
        rows.row(0).tail(d) = hp.transpose();
        rows.row(1).head(d) = hp.transpose();
        rows.row(1).tail(d).setZero();
        Mat n_basis = orthonormalize(null_space_basis(rows));
        action.n_basis.push_back(n_basis);

        Mat m(2 * d, 2 * d - 1);
        m.leftCols(2 * d - 2) = n_basis;
        m.rightCols(1) = x_field;
        Mat pinv = (m.transpose() * m).inverse() * m.transpose();
        action.n_coords.push_back(pinv.topRows(2 * d - 2));
        action.x_coords.push_back(pinv.row(2 * d - 1).transpose());

        Mat m_unit = m;
        m_unit.rightCols(1) = x_field.normalized();
        Eigen::JacobiSVD<Mat> svd(m_unit);
        action.basis_conditioning.push_back(svd.singularValues().minCoeff());
    }

    if (action.fiber_dim == 0)
        action.notice = "transversal bundle is trivial for one degree of freedom";

    // One-step linearizations between consecutive samples.
    const std::size_t n = samples.size();
    const std::size_t nsteps = periodic ? n : n - 1;
    for (std::size_t i = 0; i < nsteps; ++i) {
        const auto& pt = samples[i];
        OrbitSegment orbit =
            integrate_orbit(ham, pt, pt.clock, pt.clock + step, opt);
        Mat h0(d, 2 * d), v0(d, 2 * d);
        h0 << Mat::Identity(d, d), Mat::Zero(d, d);
        v0 << Mat::Zero(d, d), Mat::Identity(d, d);
        JacobiFrame f = integrate_jacobi_frame(orbit, h0, v0, opt);
        Mat dpsi(2 * d, 2 * d);
        dpsi.topRows(d) = f.h_part(orbit.t1());
        dpsi.bottomRows(d) = f.v_part(orbit.t1());
        action.dpsi_steps.push_back(dpsi);
        if (action.fiber_dim > 0) {
            const std::size_t j = (i + 1) % n;
            action.maps.push_back(action.n_coords[j] * dpsi * action.n_basis[i]);
        } else {
            action.maps.push_back(Mat::Zero(0, 0));
        }
    }
    return action;
}

GraphTransformResult graph_transform_splitting(const TransversalAction& action,
                                               const std::vector<Mat>& es_n,
                                               const std::vector<Mat>& eu_n,
                                               double tol) {
    if (!action.periodic)
        throw ConfigError("graph_transform_splitting: base sample must be periodic");
    if (action.fiber_dim == 0)
        throw ConfigError("graph_transform_splitting: trivial transversal bundle");
    const std::size_t n = action.size();

    // Find a halving power of the shift: the supplied transversal splitting
    // must contract in both time directions.
    long m = 0;
    const long m_cap = std::max<long>(8 * n, std::lround(200.0 / action.step));
    for (long cand = 1; cand <= m_cap; cand *= 2) {
        double worst_s = 0.0, worst_u = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            worst_s = std::max(worst_s,
                               restricted_norm(action.psi(i, cand), orthonormalize(es_n[i])));
            worst_u = std::max(worst_u,
                               restricted_norm(action.psi(i, -cand), orthonormalize(eu_n[i])));
        }
        if (worst_s < 0.5 && worst_u < 0.5) {
            m = cand;
            break;
        }
    }
    if (m == 0)
        throw NoContractionError(
            "graph_transform_splitting: supplied splitting never contracts by half");

    GraphTransformResult result;
    result.splitting.tau = m * action.step;

    auto lift = [&](const std::vector<Mat>& bundle, long direction) {
        // Graph coefficients rows l_i : bundle(i) -> <X>, iterated under the
        // time-(direction * tau) transform.
        const int k = static_cast<int>(bundle.front().cols());
        const long nn = static_cast<long>(n);
        const std::size_t shift =
            static_cast<std::size_t>(((direction * m) % nn + nn) % nn);
        std::vector<Eigen::RowVectorXd> l(n, Eigen::RowVectorXd::Zero(k));
        std::vector<Mat> restricted(n);  // transfer in the bundle's own bases
        std::vector<Eigen::RowVectorXd> c_row(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + shift) % n;
            const Mat amb = action.dpsi(i, direction * m) * (action.n_basis[i] * bundle[i]);
            restricted[i] =
                bundle[j].colPivHouseholderQr().solve(action.n_coords[j] * amb);
            c_row[i] = action.x_coords[j].transpose() * amb;
        }
        double update = 1.0;
        int iters = 0;
        while (update > tol && iters < 10000) {
            update = 0.0;
            std::vector<Eigen::RowVectorXd> nl = l;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = (i + shift) % n;
                Eigen::RowVectorXd cand = (l[i] + c_row[i]) * restricted[i].inverse();
                update = std::max(update, (cand - nl[j]).norm());
                nl[j] = cand;
            }
            l = nl;
            ++iters;
        }
        result.iterations += iters;
        result.fixed_point_residual = std::max(result.fixed_point_residual, update);
        // Assemble ambient graphs.
        std::vector<Mat> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            Mat amb = action.n_basis[i] * bundle[i];
            for (int col = 0; col < k; ++col)
                amb.col(col) += l[i](col) * action.flow_dir[i];
            out[i] = amb;
        }
        return out;
    };

    result.splitting.eu = lift(eu_n, +1);
    result.splitting.es = lift(es_n, -1);

    // Fitted constants over a short ladder of tau-multiples.
    std::vector<std::pair<double, double>> stable_pts, unstable_pts;
    for (long j = 1; j <= 4; ++j) {
        double ws = 0.0, wu = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ws = std::max(ws, restricted_norm(action.dpsi(i, j * m),
                                              orthonormalize(result.splitting.es[i])));
            wu = std::max(wu, restricted_norm(action.dpsi(i, -j * m),
                                              orthonormalize(result.splitting.eu[i])));
        }
        stable_pts.emplace_back(j * m * action.step, ws);
        unstable_pts.emplace_back(j * m * action.step, wu);
    }
    auto fs = exponential_fit(stable_pts);
    auto fu = exponential_fit(unstable_pts);
    result.splitting.lambda = std::min(fs.lambda, fu.lambda);
    result.splitting.C = std::max(fs.C, fu.C);
    result.contraction = 0.5;
    return result;
}

PeriodMapGraph graph_transform_period_map(const Mat& map, const Mat& eu0,
                                          const Mat& es0, double tol) {
    const int ku = static_cast<int>(eu0.cols());
    const int ks = static_cast<int>(es0.cols());
    Mat basis(map.rows(), ku + ks);
    basis.leftCols(ku) = eu0;
    basis.rightCols(ks) = es0;
    Eigen::FullPivLU<Mat> lu(basis);
    if (!lu.isInvertible())
        throw ConfigError("graph_transform_period_map: supplied splitting is degenerate");
    const Mat coords = lu.inverse() * map * basis;
    const Mat a = coords.topLeftCorner(ku, ku);
    const Mat b = coords.topRightCorner(ku, ks);
    const Mat c = coords.bottomLeftCorner(ks, ku);
    const Mat d = coords.bottomRightCorner(ks, ks);

    PeriodMapGraph out;
    Mat l = Mat::Zero(ks, ku);
    double update = 1.0;
    while (update > tol && out.iterations < 20000) {
        const Mat denom = a + b * l;
        Eigen::FullPivLU<Mat> dl(denom);
        if (!dl.isInvertible())
            throw NoContractionError(
                "graph_transform_period_map: graph left the chart");
        Mat nl = (c + d * l) * dl.inverse();
        update = (nl - l).norm();
        l = nl;
        ++out.iterations;
    }
    if (update > tol)
        throw NoContractionError("graph_transform_period_map: iteration did not settle");
    out.residual = update;
    Mat graph(map.rows(), ku);
    graph = eu0 + es0 * l;
    out.unstable = graph;
    return out;
}

}  // namespace gb
