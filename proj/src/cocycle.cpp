#include "gb/cocycle.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

#include "gb/errors.hpp"

namespace gb {
namespace {

Mat matrix_power(const Mat& m, long k) {
    Mat base = k >= 0 ? m : Mat(m.inverse());
    long e = std::abs(k);
    Mat acc = Mat::Identity(m.rows(), m.cols());
    while (e > 0) {
        if (e & 1) acc = base * acc;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

std::vector<Vec> fiber_mesh(int dim, int count, std::uint64_t seed) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        return dirs;
    }
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            const double a = kTwoPi * i / count;
            Vec v(2);
            v << std::cos(a), std::sin(a);
            dirs.push_back(v);
        }
        return dirs;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < count; ++i) {
        Vec v(dim);
        for (int j = 0; j < dim; ++j) v[j] = gauss(rng);
        dirs.push_back(v.normalized());
    }
    return dirs;
}

int span_rank(const std::vector<Vec>& vectors, int dim) {
    if (vectors.empty()) return 0;
    Mat m(dim, vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) m.col(i) = vectors[i];
    Eigen::JacobiSVD<Mat> svd(m);
    const double tol = 1e-8 * svd.singularValues().maxCoeff();
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol) ++r;
    return r;
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0, rms = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit f;
    const std::size_t n = xs.size();
    if (n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) return f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = f.intercept + f.slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    f.rms = std::sqrt(ss_res / n);
    return f;
}

}  // namespace

Mat SampledCocycle::transfer(std::size_t from, long k) const {
    const long n = static_cast<long>(size());
    if (n == 1) return matrix_power(maps_[0], k);
    if (!periodic_) {
        if (k > max_steps(from, true) || -k > max_steps(from, false))
            throw ConfigError("SampledCocycle::transfer: step leaves the chain");
    }
    Mat acc = Mat::Identity(fiber_dim(), fiber_dim());
    if (k >= 0) {
        for (long j = 0; j < k; ++j)
            acc = maps_[(from + j) % n] * acc;
    } else {
        for (long j = 1; j <= -k; ++j) {
            const long idx = ((static_cast<long>(from) - j) % n + n) % n;
            acc = Mat(maps_[idx].inverse()) * acc;
        }
    }
    return acc;
}

long SampledCocycle::max_steps(std::size_t from, bool forward) const {
    if (periodic_ || size() == 1) return std::numeric_limits<long>::max() / 4;
    return forward ? static_cast<long>(size() - from) : static_cast<long>(from);
}

std::vector<double> SampledCocycle::condition_numbers() const {
    std::vector<double> out;
    for (const auto& m : maps_) {
        Eigen::JacobiSVD<Mat> svd(m);
        out.push_back(svd.singularValues().maxCoeff() /
                      svd.singularValues().minCoeff());
    }
    return out;
}

CocycleReport quasi_hyperbolicity_check(const SampledCocycle& cocycle, double horizon,
                                        double threshold, const QhOptions& opt) {
    CocycleReport report;
    report.horizon = horizon;
    report.threshold = threshold;
    const double bar =
        opt.bounded_margin > 0.0 ? opt.bounded_margin : std::sqrt(threshold);
    const long steps = std::max<long>(1, std::lround(horizon / cocycle.step()));
    const int f = cocycle.fiber_dim();
    auto dirs = fiber_mesh(f, opt.mesh, opt.seed);

    bool any_grown = false, any_between = false;
    double k33 = 0.0, k33_half = 0.0;
    std::vector<double> profile(static_cast<std::size_t>(steps) + 1, 0.0);
    std::vector<Mat> inverse_maps;
    for (std::size_t i = 0; i < cocycle.size(); ++i)
        inverse_maps.push_back(cocycle.map(i).inverse());

    for (std::size_t b = 0; b < cocycle.size(); ++b) {
        const long kf = std::min(steps, cocycle.max_steps(b, true));
        const long kb = std::min(steps, cocycle.max_steps(b, false));
        std::vector<Vec> es_vecs, eu_vecs;

        for (const Vec& v : dirs) {
            // Forward norm profile.
            std::vector<double> nf(static_cast<std::size_t>(kf) + 1);
            Vec z = v;
            nf[0] = 1.0;
            for (long k = 1; k <= kf; ++k) {
                z = cocycle.map((b + k - 1) % cocycle.size()) * z;
                nf[static_cast<std::size_t>(k)] = z.norm();
            }
            // Backward norm profile.
            std::vector<double> nb(static_cast<std::size_t>(kb) + 1);
            Vec w = v;
            nb[0] = 1.0;
            const long n = static_cast<long>(cocycle.size());
            for (long k = 1; k <= kb; ++k) {
                const long idx = ((static_cast<long>(b) - k) % n + n) % n;
                w = inverse_maps[static_cast<std::size_t>(idx)] * w;
                nb[static_cast<std::size_t>(k)] = w.norm();
            }

            const double grow_f = *std::max_element(nf.begin(), nf.end());
            const double grow_b = *std::max_element(nb.begin(), nb.end());
            const double grow = std::max(grow_f, grow_b);

            if (grow > threshold) {
                any_grown = true;
            } else if (grow < bar) {
                if (!report.bounded_witness)
                    report.bounded_witness = VectorWitness{b, v, grow};
            } else {
                any_between = true;
                if (report.indeterminate_witnesses.size() < 8)
                    report.indeterminate_witnesses.push_back({b, v, grow});
            }

            // Bounded-at-horizon proxies for the stable/unstable spaces.
            if (nf.back() <= threshold) es_vecs.push_back(v);
            if (nb.back() <= threshold) eu_vecs.push_back(v);

            // Two-point constant: max over 0 <= t <= s of |P_t v|/(|v|+|P_s v|).
            double prefix = 0.0;
            for (long l = 0; l <= kf; ++l) {
                prefix = std::max(prefix, nf[static_cast<std::size_t>(l)]);
                const double ratio = prefix / (1.0 + nf[static_cast<std::size_t>(l)]);
                k33 = std::max(k33, ratio);
                if (l <= kf / 2) k33_half = std::max(k33_half, ratio);
            }
            for (long k = 0; k <= kf; ++k)
                profile[static_cast<std::size_t>(k)] =
                    std::max(profile[static_cast<std::size_t>(k)],
                             nf[static_cast<std::size_t>(k)]);
        }

        const int es_dim = span_rank(es_vecs, f);
        const int eu_dim = span_rank(eu_vecs, f);
        report.dims.emplace_back(es_dim, eu_dim);
        std::vector<Vec> both;
        for (const Vec& v : es_vecs)
            for (const Vec& u : eu_vecs)
                if ((v - u).norm() < 1e-12) both.push_back(v);
        if (span_rank(both, f) > 0) report.es_eu_intersect = true;
    }

    report.K33 = k33;
    report.K33_half = k33_half;

    if (report.bounded_witness)
        report.quasi_hyperbolic = QhVerdict::Not;
    else if (any_grown && !any_between)
        report.quasi_hyperbolic = QhVerdict::QuasiHyperbolic;
    else
        report.quasi_hyperbolic = QhVerdict::Indeterminate;

    // Growth-shape diagnostic from the max-norm profile, on a log-spaced
    // subsample of at most 48 indices.
    std::vector<std::size_t> picks;
    const std::size_t last = profile.size() - 1;
    if (last <= 48) {
        for (std::size_t k = 1; k <= last; ++k) picks.push_back(k);
    } else {
        for (int j = 0; j <= 48; ++j) {
            const double frac = static_cast<double>(j) / 48.0;
            picks.push_back(static_cast<std::size_t>(
                std::lround(std::pow(static_cast<double>(last), frac))));
        }
        std::sort(picks.begin(), picks.end());
        picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
    }
    std::vector<double> ts, logn, logt, raw;
    for (std::size_t k : picks) {
        if (k == 0 || profile[k] <= 0.0) continue;
        const double t = static_cast<double>(k) * cocycle.step();
        ts.push_back(t);
        raw.push_back(profile[k]);
        logn.push_back(std::log(profile[k]));
        logt.push_back(std::log(t));
    }
    if (ts.size() >= 3 && raw.back() > 2.0) {
        LineFit exp_fit = fit_line(ts, logn);
        LineFit pow_fit = fit_line(logt, logn);
        if (exp_fit.slope > 1e-6 && exp_fit.r2 > 0.999) {
            report.growth_type = "exponential";
            report.growth_rate = exp_fit.slope;
        } else if (pow_fit.r2 > 0.98 && pow_fit.slope > 0.2) {
            report.growth_type = "linear";
            report.growth_rate = pow_fit.slope;
        } else {
            report.growth_type = "irregular";
            report.growth_rate = exp_fit.slope;
        }
    } else {
        report.growth_type = "none";
        report.growth_rate = 0.0;
    }
    return report;
}

bool sacker_sell_dims(const SackerSellInput& input) {
    for (const auto& b : input.omega_points)
        if (b.eu < input.fiber_dim - input.at_x.es) return false;
    for (const auto& a : input.alpha_points)
        if (a.es < input.fiber_dim - input.at_x.eu) return false;
    for (const auto& ms : input.minimal_set_es_dims) {
        for (int d : ms)
            if (d != ms.front()) return false;
    }
    return true;
}

ExponentialFit exponential_fit(const std::vector<std::pair<double, double>>& norm_vs_t) {
    ExponentialFit out;
    std::vector<double> ts, logn;
    for (const auto& [t, nrm] : norm_vs_t) {
        if (nrm <= 0.0) continue;
        ts.push_back(t);
        logn.push_back(std::log(nrm));
    }
    if (ts.size() < 2) return out;
    LineFit f = fit_line(ts, logn);
    out.residual = f.rms;
    if (f.slope < 0.0) {
        out.decaying = true;
        out.lambda = -f.slope;
        out.C = std::exp(f.intercept);
    } else {
        out.decaying = false;
        out.growth_rate = f.slope;
    }
    return out;
}

}  // namespace gb
