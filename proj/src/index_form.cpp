#include "gb/index_form.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "gb/conjugate_greens.hpp"
#include "gb/errors.hpp"
#include "gb/parallel.hpp"
#include "gb/riccati.hpp"

namespace gb {
namespace {

constexpr double kGx3[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kGw3[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

struct OrbitCoeffs {
    Mat lvv, lxv, lxx;  // Lagrangian Hessians at time t
    Mat hpp, hpx;       // dual blocks for the factorized route
};

OrbitCoeffs coeffs_at(const OrbitSegment& orbit, double t) {
    const int d = orbit.dim();
    const Vec y = orbit.dense().eval(t);
    const Vec x = y.head(d), p = y.segment(d, d);
    const auto& ham = *orbit.ham();
    auto lh = ham.lagrangian_hessians(x, p, t);
    return {lh.vv, lh.xv, lh.xx, ham.dpp(x, p, t), ham.dxp(x, p, t).transpose()};
}

// Quadrature breakpoints: the window split at the field knots and any extra
// partition knots, refined to a minimum resolution.
std::vector<double> quad_breaks(double a, double b, const TestField& xi,
                                const TestField& eta,
                                const std::vector<double>& extra, int min_cells) {
    std::vector<double> pts{a, b};
    auto add = [&](const std::vector<double>& ks) {
        for (double k : ks)
            if (k > a + 1e-14 && k < b - 1e-14) pts.push_back(k);
    };
    add(xi.knots);
    add(eta.knots);
    add(extra);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double u, double v) { return std::abs(u - v) < 1e-13; }),
              pts.end());
    const double hmax = (b - a) / min_cells;
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        out.push_back(pts[i]);
        const int extra_cells = static_cast<int>((pts[i + 1] - pts[i]) / hmax);
        for (int j = 1; j <= extra_cells; ++j)
            out.push_back(pts[i] + (pts[i + 1] - pts[i]) * j / (extra_cells + 1));
    }
    out.push_back(pts.back());
    return out;
}

}  // namespace

TestSpace::TestSpace(double a, double b, int n_elem, int dim)
    : a_(a), b_(b), n_(n_elem), d_(dim) {
    if (n_elem < 2) throw ConfigError("TestSpace: need at least two elements");
    if (b <= a) throw ConfigError("TestSpace: empty interval");
}

TestField TestSpace::field(const Vec& coeffs) const {
    if (coeffs.size() != size())
        throw ConfigError("TestSpace::field: coefficient size mismatch");
    const double a = a_, h = element_size();
    const int n = n_, d = d_;
    // Node values with zero endpoints prepended/appended.
    auto node_value = [coeffs, d, n](int i) -> Vec {
        if (i <= 0 || i >= n) return Vec::Zero(d);
        return coeffs.segment((i - 1) * d, d);
    };
    TestField f;
    f.value = [=](double t) -> Vec {
        double s = (t - a) / h;
        int e = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
        double w = s - e;
        return (1.0 - w) * node_value(e) + w * node_value(e + 1);
    };
    f.deriv = [=](double t) -> Vec {
        double s = (t - a) / h;
        int e = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
        return (node_value(e + 1) - node_value(e)) / h;
    };
    for (int i = 0; i <= n; ++i) f.knots.push_back(a + h * i);
    return f;
}

double index_form_direct(const OrbitSegment& orbit, const TestField& xi,
                         const TestField& eta, double a, double b,
                         const IndexFormOptions& opt) {
    if (!orbit.covers(a) || !orbit.covers(b))
        throw ConfigError("index_form_direct: window outside the orbit span");
    auto breaks = quad_breaks(a, b, xi, eta, {}, opt.min_quad_cells);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double half = 0.5 * (breaks[i + 1] - breaks[i]);
        const double mid = 0.5 * (breaks[i + 1] + breaks[i]);
        double cell = 0.0;
        for (int g = 0; g < 3; ++g) {
            const double t = mid + half * kGx3[g];
            const auto c = coeffs_at(orbit, t);
            const Vec xv = xi.value(t), xd = xi.deriv(t);
            const Vec ev = eta.value(t), ed = eta.deriv(t);
            double val = xd.dot(c.lvv * ed) + xd.dot(c.lxv.transpose() * ev) +
                         xv.dot(c.lxv * ed) + xv.dot(c.lxx * ev);
            cell += kGw3[g] * val;
        }
        total += half * cell;
    }
    return total;
}

namespace {

// One cell of the partitioned factorized formula with its own nonsingular
// frame, anchored horizontally at the cell centre.
struct CellFrame {
    double anchor;
    std::optional<JacobiFrame> left, right;  // anchor->u and anchor->w legs
    const JacobiFrame* supplied = nullptr;   // used when it is regular here

    Mat h_at(double t) const {
        if (supplied) return supplied->h_part(t);
        return (t <= anchor ? *left : *right).h_part(t);
    }
    Mat v_at(double t) const {
        if (supplied) return supplied->v_part(t);
        return (t <= anchor ? *left : *right).v_part(t);
    }
    Mat slope(double t) const {
        const Mat h = h_at(t);
        Mat s = v_at(t) * h.inverse();
        return 0.5 * (s + s.transpose());
    }
};

bool frame_regular_on(const std::function<Mat(double)>& h_of, double u, double w,
                      int samples = 17) {
    for (int i = 0; i <= samples; ++i) {
        const double t = u + (w - u) * i / samples;
        const Mat h = h_of(t);
        Eigen::JacobiSVD<Mat> svd(h);
        if (svd.singularValues().minCoeff() < 1e-6 * std::max(1.0, h.norm()))
            return false;
    }
    return true;
}

void build_cells(const OrbitSegment& orbit, const JacobiFrame& frame, double u,
                 double w, int depth, const IndexFormOptions& opt,
                 std::vector<std::pair<std::pair<double, double>, CellFrame>>& out) {
    if (depth > 10)
        throw DegenerateFrameError(
            "index_form_factorized: no nonsingular frame found on a partition cell");
    // Prefer the supplied frame when it is regular across the closed cell.
    if (frame_regular_on([&](double t) { return frame.h_part(t); }, u, w)) {
        CellFrame cf;
        cf.anchor = 0.5 * (u + w);
        cf.supplied = &frame;
        out.push_back({{u, w}, std::move(cf)});
        return;
    }
    const double c = 0.5 * (u + w);
    const int d = orbit.dim();
    CellFrame cf;
    cf.anchor = c;
    if (c - u > 1e-12)
        cf.left = frame_from(orbit, c, u, Mat::Identity(d, d), Mat::Zero(d, d), opt.flow);
    if (w - c > 1e-12)
        cf.right = frame_from(orbit, c, w, Mat::Identity(d, d), Mat::Zero(d, d), opt.flow);
    if (frame_regular_on([&](double t) { return cf.h_at(t); }, u, w)) {
        out.push_back({{u, w}, std::move(cf)});
        return;
    }
    build_cells(orbit, frame, u, c, depth + 1, opt, out);
    build_cells(orbit, frame, c, w, depth + 1, opt, out);
}

}  // namespace

double index_form_factorized(const OrbitSegment& orbit, const JacobiFrame& frame,
                             const TestField& xi, const TestField& eta, double a,
                             double b, const IndexFormOptions& opt) {
    if (!orbit.covers(a) || !orbit.covers(b))
        throw ConfigError("index_form_factorized: window outside the orbit span");
    if (!frame.covers(a) || !frame.covers(b))
        throw ConfigError("index_form_factorized: window outside the frame span");

    // Partition at the frame's vertical times inside the window.
    RiccatiSolution ric = solve_riccati(frame);
    std::vector<double> knots{a, b};
    for (double z : ric.blowup_times())
        if (z > a + 1e-10 && z < b - 1e-10) knots.push_back(z);
    std::sort(knots.begin(), knots.end());

    std::vector<std::pair<std::pair<double, double>, CellFrame>> cells;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        build_cells(orbit, frame, knots[i], knots[i + 1], 0, opt, cells);

    double total = 0.0;
    for (const auto& [span, cf] : cells) {
        const auto [u, w] = span;
        auto breaks = quad_breaks(u, w, xi, eta, {}, opt.min_quad_cells);
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double half = 0.5 * (breaks[i + 1] - breaks[i]);
            const double mid = 0.5 * (breaks[i + 1] + breaks[i]);
            double cell = 0.0;
            for (int g = 0; g < 3; ++g) {
                const double t = mid + half * kGx3[g];
                const auto c = coeffs_at(orbit, t);
                const Mat s = cf.slope(t);
                const Mat drift = c.hpx + c.hpp * s;
                const Vec wx = xi.deriv(t) - drift * xi.value(t);
                const Vec we = eta.deriv(t) - drift * eta.value(t);
                cell += kGw3[g] * wx.dot(c.hpp.inverse() * we);
            }
            total += half * cell;
        }
        // Boundary terms with this cell's slope; a vanishing field makes the
        // term zero even where the supplied frame degenerates.
        for (int side = 0; side < 2; ++side) {
            const double t = side == 0 ? u : w;
            const double sign = side == 0 ? -1.0 : 1.0;
            const Vec xv = xi.value(t), ev = eta.value(t);
            if (xv.norm() == 0.0 || ev.norm() == 0.0) continue;
            const Mat h = cf.h_at(t);
            Eigen::JacobiSVD<Mat> svd(h);
            if (svd.singularValues().minCoeff() < 1e-9 * std::max(1.0, h.norm()))
                throw DegenerateFrameError(
                    "index_form_factorized: nonzero field at a vertical cell end");
            total += sign * xv.dot(cf.slope(t) * ev);
        }
    }
    return total;
}

AssembledForm assemble_index_form(const OrbitSegment& orbit, const TestSpace& space,
                                  bool midpoint_constraint,
                                  const IndexFormOptions&) {
    const int n = space.n_elem(), d = space.dim();
    const int nn = space.size();
    const double h = space.element_size();
    Mat stiff = Mat::Zero(nn, nn), mass = Mat::Zero(nn, nn);

    for (int e = 0; e < n; ++e) {
        const double t0 = space.node(e), t1 = space.node(e + 1);
        const double half = 0.5 * (t1 - t0), mid = 0.5 * (t0 + t1);
        Mat k_local = Mat::Zero(2 * d, 2 * d);
        Mat m_local = Mat::Zero(2 * d, 2 * d);
        for (int g = 0; g < 3; ++g) {
            const double t = mid + half * kGx3[g];
            const auto c = coeffs_at(orbit, t);
            const double phi0 = (t1 - t) / h, phi1 = (t - t0) / h;
            const double dphi0 = -1.0 / h, dphi1 = 1.0 / h;
            const double phi[2] = {phi0, phi1}, dphi[2] = {dphi0, dphi1};
            for (int a2 = 0; a2 < 2; ++a2) {
                for (int b2 = 0; b2 < 2; ++b2) {
                    Mat blk = dphi[a2] * dphi[b2] * c.lvv +
                              dphi[a2] * phi[b2] * c.lxv.transpose() +
                              phi[a2] * dphi[b2] * c.lxv + phi[a2] * phi[b2] * c.lxx;
                    k_local.block(a2 * d, b2 * d, d, d) += kGw3[g] * half * blk;
                    m_local.block(a2 * d, b2 * d, d, d) +=
                        kGw3[g] * half * phi[a2] * phi[b2] * Mat::Identity(d, d);
                }
            }
        }
        // Scatter, dropping the endpoint nodes.
        for (int a2 = 0; a2 < 2; ++a2) {
            const int na = e + a2;
            if (na <= 0 || na >= n) continue;
            for (int b2 = 0; b2 < 2; ++b2) {
                const int nb = e + b2;
                if (nb <= 0 || nb >= n) continue;
                stiff.block((na - 1) * d, (nb - 1) * d, d, d) +=
                    k_local.block(a2 * d, b2 * d, d, d);
                mass.block((na - 1) * d, (nb - 1) * d, d, d) +=
                    m_local.block(a2 * d, b2 * d, d, d);
            }
        }
    }
    stiff = 0.5 * (stiff + stiff.transpose()).eval();

    AssembledForm out;
    if (!midpoint_constraint) {
        out.stiffness = std::move(stiff);
        out.mass = std::move(mass);
        out.basis = Mat::Identity(nn, nn);
        return out;
    }

    if (n % 2 != 0)
        throw ConfigError("assemble_index_form: midpoint constraint needs even n_elem");
    const int mnode = n / 2;
    const double tmid = space.node(mnode);
    const Vec y = orbit.dense().eval(tmid);
    Vec dir = orbit.ham()->dp(y.head(d), y.segment(d, d), tmid);
    if (dir.norm() == 0.0)
        throw SingularProjectionError(
            "assemble_index_form: projected flow direction vanishes at the midpoint");
    dir.normalize();

    Mat block = null_space_basis(dir.transpose());  // d x (d-1)
    const int red = nn - 1;
    Mat q = Mat::Zero(nn, red);
    int col = 0;
    for (int node = 1; node < n; ++node) {
        const int row = (node - 1) * d;
        if (node == mnode) {
            q.block(row, col, d, block.cols()) = block;
            col += static_cast<int>(block.cols());
        } else {
            q.block(row, col, d, d) = Mat::Identity(d, d);
            col += d;
        }
    }
    out.stiffness = q.transpose() * stiff * q;
    out.mass = q.transpose() * mass * q;
    out.basis = std::move(q);
    return out;
}

EigResult smallest_eigenpair(const Mat& a, const Mat& m) {
    const Eigen::Index n = a.rows();
    EigResult res;
    if (n <= 192) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(a, m);
        res.value = ges.eigenvalues()(0);
        res.vector = ges.eigenvectors().col(0);
        res.dense_fallback = true;
        return res;
    }

    auto gersh_lo = [](const Mat& mm) {
        double lo = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < mm.rows(); ++i) {
            double off = mm.row(i).cwiseAbs().sum() - std::abs(mm(i, i));
            lo = std::min(lo, mm(i, i) - off);
        }
        return lo;
    };
    const double a_lo = gersh_lo(a);
    const double m_lo = std::max(gersh_lo(m), 1e-300);
    const double m_hi = m.cwiseAbs().rowwise().sum().maxCoeff();
    double sigma = (a_lo <= 0.0) ? a_lo / m_lo : a_lo / m_hi;
    sigma -= 0.01 * std::max(1.0, std::abs(sigma));

    Eigen::LLT<Mat> mass_llt(m);
    Vec z = Vec::Ones(n);
    z /= std::sqrt(z.dot(m * z));
    double rho = z.dot(a * z);
    const double tol = 1e-11;

    for (int outer = 0; outer < 40; ++outer) {
        Eigen::LDLT<Mat> shift((a - sigma * m).eval());
        for (int inner = 0; inner < 6; ++inner) {
            Vec w = shift.solve(m * z);
            const double nrm = std::sqrt(w.dot(m * w));
            if (!(nrm > 0.0) || !w.allFinite()) break;
            z = w / nrm;
            rho = z.dot(a * z);
            ++res.iterations;
            Vec r = a * z - rho * m * z;
            const double delta = std::sqrt(std::abs(r.dot(mass_llt.solve(r))));
            if (delta <= tol * std::max(1.0, std::abs(rho))) {
                res.value = rho;
                res.vector = z;
                return res;
            }
            if (inner == 5) {
                const double cand = rho - 1.02 * delta - 1e-12 * std::max(1.0, std::abs(rho));
                if (cand > sigma) sigma = cand;
            }
        }
    }
    // Did not settle; fall back to the dense solver.
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(a, m);
    res.value = ges.eigenvalues()(0);
    res.vector = ges.eigenvectors().col(0);
    res.dense_fallback = true;
    return res;
}

DisconjugacyVerdict disconjugacy_via_index(const OrbitSegment& orbit, double T,
                                           int mesh, const IndexFormOptions& opt) {
    const double a = std::min(orbit.t0(), orbit.t1());
    if (!orbit.covers(a + T))
        throw ConfigError("disconjugacy_via_index: window outside the orbit span");

    TestSpace fine(a, a + T, mesh, orbit.dim());
    TestSpace coarse(a, a + T, std::max(mesh / 2, 2), orbit.dim());
    auto fa = assemble_index_form(orbit, fine, false, opt);
    auto ca = assemble_index_form(orbit, coarse, false, opt);
    auto ef = smallest_eigenpair(fa.stiffness, fa.mass);
    auto ec = smallest_eigenpair(ca.stiffness, ca.mass);

    DisconjugacyVerdict out;
    out.a_min = ef.value;
    out.consistency = std::abs(ef.value - ec.value);
    const double scale =
        fa.stiffness.cwiseAbs().maxCoeff() / std::max(fa.mass.cwiseAbs().maxCoeff(), 1e-300);
    out.floor = 1e-9 * std::max(1.0, scale);
    if (out.a_min > out.floor)
        out.verdict = Verdict::Positive;
    else if (out.a_min < -out.floor)
        out.verdict = Verdict::Negative;
    else
        out.verdict = Verdict::Indeterminate;

    ConjugateReport cr = find_conjugate_points(orbit, a, a + T, opt.flow);
    const bool scan_disconjugate = cr.disconjugate;
    if (out.verdict != Verdict::Indeterminate)
        out.agrees_with_conjugate_scan =
            (out.verdict == Verdict::Positive) == scan_disconjugate;
    return out;
}

PositivityReport uniform_positivity_scan(HamiltonianPtr ham,
                                         const std::vector<PhasePoint>& samples,
                                         const ScanConfig& config) {
    if (samples.empty() || config.T_list.empty())
        throw ConfigError("uniform_positivity_scan: empty samples or T list");
    PositivityReport report;
    report.uniform_a = std::numeric_limits<double>::infinity();

    const double t_max = *std::max_element(config.T_list.begin(), config.T_list.end());
    std::vector<OrbitSegment> orbits;
    for (const auto& pt : samples)
        orbits.push_back(
            integrate_orbit(ham, pt, pt.clock, pt.clock + t_max, config.index.flow));

    struct CellResult {
        ScanCell cell;
        Vec witness;
        bool indeterminate = false;
    };
    const std::size_t n_cells = samples.size() * config.T_list.size();
    std::vector<CellResult> results(n_cells);
    parallel_for(n_cells, config.workers, [&](std::size_t idx) {
        const std::size_t si = idx / config.T_list.size();
        const double T = config.T_list[idx % config.T_list.size()];
        const auto& pt = samples[si];
        TestSpace space(pt.clock, pt.clock + T, config.mesh, pt.dim());
        auto asm_form = assemble_index_form(orbits[si], space,
                                            config.midpoint_constraint, config.index);
        auto eig = smallest_eigenpair(asm_form.stiffness, asm_form.mass);
        results[idx].cell = {static_cast<int>(si), T, eig.value};
        results[idx].witness = asm_form.basis * eig.vector;
        const double floor =
            1e-9 * std::max(1.0, asm_form.stiffness.cwiseAbs().maxCoeff());
        results[idx].indeterminate = std::abs(eig.value) < floor;
    });

    Vec worst_witness;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        report.cells.push_back(r.cell);
        if (r.cell.a_min < worst) {
            worst = r.cell.a_min;
            worst_witness = r.witness;
        }
        if (r.indeterminate)
            report.warnings.push_back("indeterminate cell: |a_min| below numerical floor");
    }
    report.uniform_a = worst;
    report.witness = worst_witness;

    // Fit min-over-samples a_min(T) ~ alpha + beta / T^2.
    std::vector<double> ts = config.T_list;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    Eigen::MatrixXd design(ts.size(), 2);
    Vec rhs(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& c : report.cells)
            if (c.T == ts[i]) mn = std::min(mn, c.a_min);
        design(i, 0) = 1.0;
        design(i, 1) = 1.0 / (ts[i] * ts[i]);
        rhs(i) = mn;
    }
    Vec fit = design.colPivHouseholderQr().solve(rhs);
    report.trend_asymptote = fit(0);
    report.trend_coeff = fit(1);
    report.trend_residual = (design * fit - rhs).norm();
    report.bounded_below =
        report.uniform_a > 0.0 && report.trend_asymptote > config.positivity_floor;
    return report;
}

double bump_field_bound(const Lagrangian& lag, const Vec& x_lo, const Vec& x_hi,
                        const Vec& v_lo, const Vec& v_hi, double t_lo, double t_hi,
                        int grid) {
    const int d = static_cast<int>(x_lo.size());
    double c2 = 0.0;
    std::vector<std::vector<double>> axes;
    auto axis = [&](double lo, double hi) {
        std::vector<double> v;
        for (int i = 0; i < grid; ++i)
            v.push_back(grid > 1 ? lo + (hi - lo) * i / (grid - 1) : 0.5 * (lo + hi));
        return v;
    };
    for (int i = 0; i < d; ++i) axes.push_back(axis(x_lo[i], x_hi[i]));
    for (int i = 0; i < d; ++i) axes.push_back(axis(v_lo[i], v_hi[i]));
    auto times = axis(t_lo, t_hi);

    std::vector<std::size_t> idx(2 * d, 0);
    Vec x(d), v(d);
    bool done = false;
    while (!done) {
        for (int i = 0; i < d; ++i) x[i] = axes[i][idx[i]];
        for (int i = 0; i < d; ++i) v[i] = axes[d + i][idx[d + i]];
        for (double t : times) {
            c2 = std::max(c2, std::abs(lag.value(x, v, t)));
            c2 = std::max(c2, lag.dx(x, v, t).norm());
            c2 = std::max(c2, lag.dv(x, v, t).norm());
            c2 = std::max(c2, lag.dxx(x, v, t).operatorNorm());
            c2 = std::max(c2, lag.dxv(x, v, t).operatorNorm());
            c2 = std::max(c2, lag.dvv(x, v, t).operatorNorm());
        }
        int ax = 0;
        while (ax < 2 * d && ++idx[ax] == axes[ax].size()) {
            idx[ax] = 0;
            ++ax;
        }
        done = (ax == 2 * d);
    }
    // ||(Z, Zdot)||_L2^2 for Z = cos^2(pi t) v0 on [-1/2, 1/2]: 3/8 + pi^2/2.
    const double znorm2 = 3.0 / 8.0 + std::numbers::pi * std::numbers::pi / 2.0;
    return 4.0 * c2 * znorm2;
}

}  // namespace gb
