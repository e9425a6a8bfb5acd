#include "gb/reports.hpp"

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>
#endif

namespace gb::reports {
namespace {

using nlohmann::json;

json matrix(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vector(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json point(const PhasePoint& p) {
    return {{"x", vector(p.x)}, {"p", vector(p.p)}, {"clock", p.clock}};
}

json green(const GreenBundles& g) {
    json gaps = json::array();
    for (const auto& [h, gap] : g.gap_history)
        gaps.push_back({{"horizon", h}, {"gap", gap}});
    return {{"at", point(g.at)},
            {"S_limit", matrix(g.S_limit)},
            {"U_limit", matrix(g.U_limit)},
            {"T_used", g.T_used},
            {"gap", g.convergence_gap},
            {"converged", g.converged},
            {"gap_history", gaps}};
}

json fit(const ExponentialFit& f) {
    return {{"decaying", f.decaying}, {"C", f.C},       {"lambda", f.lambda},
            {"residual", f.residual}, {"growth_rate", f.growth_rate}};
}

json theorem_c(const TheoremCReport& r) {
    json bundles = json::array();
    for (const auto& b : r.bundles) bundles.push_back(green(b));
    json doc = {{"verdict", verdict_name(r.verdict)},
                {"min_transversal_gap", r.min_transversal_gap},
                {"floor", r.floor},
                {"bundles", bundles},
                {"es_angle", r.es_angle},
                {"eu_angle", r.eu_angle},
                {"detail", r.detail}};
    if (r.splitting) {
        doc["lambda"] = r.splitting->lambda;
        doc["C"] = r.splitting->C;
        doc["stable_fit"] = fit(r.stable_fit);
        doc["unstable_fit"] = fit(r.unstable_fit);
    }
    return doc;
}

json positivity(const PositivityReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"sample", c.sample}, {"T", c.T}, {"a_min", c.a_min}});
    return {{"cells", cells},
            {"uniform_a", r.uniform_a},
            {"trend_asymptote", r.trend_asymptote},
            {"trend_coeff", r.trend_coeff},
            {"trend_residual", r.trend_residual},
            {"bounded_below", r.bounded_below},
            {"warnings", r.warnings}};
}

}  // namespace

std::string verdict_name(HypVerdict v) {
    switch (v) {
        case HypVerdict::Hyperbolic: return "hyperbolic";
        case HypVerdict::NotHyperbolic: return "not_hyperbolic";
        case HypVerdict::HypothesisNotSatisfied: return "hypothesis_not_satisfied";
        case HypVerdict::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

std::string to_json(const GreenBundles& g) { return green(g).dump(2); }

std::string to_json(const ConjugateReport& r) {
    json times = json::array();
    for (const auto& c : r.conjugate_times)
        times.push_back({{"t", c.t}, {"multiplicity", c.multiplicity}});
    json doc = {{"window", {r.window_lo, r.window_hi}},
                {"conjugate_times", times},
                {"disconjugate", r.disconjugate}};
    return doc.dump(2);
}

std::string to_json(const PositivityReport& r) { return positivity(r).dump(2); }

std::string to_json(const CocycleReport& r) {
    json doc;
    switch (r.quasi_hyperbolic) {
        case QhVerdict::QuasiHyperbolic: doc["verdict"] = "quasi_hyperbolic"; break;
        case QhVerdict::Not: doc["verdict"] = "not_quasi_hyperbolic"; break;
        case QhVerdict::Indeterminate: doc["verdict"] = "indeterminate"; break;
    }
    doc["K33"] = r.K33;
    doc["K33_half"] = r.K33_half;
    json dims = json::array();
    for (const auto& [es, eu] : r.dims) dims.push_back({{"es", es}, {"eu", eu}});
    doc["dims"] = dims;
    doc["es_eu_intersect"] = r.es_eu_intersect;
    doc["growth_type"] = r.growth_type;
    doc["growth_rate"] = r.growth_rate;
    doc["horizon"] = r.horizon;
    doc["threshold"] = r.threshold;
    if (r.bounded_witness) {
        doc["bounded_witness"] = {{"base", r.bounded_witness->base},
                                  {"direction", vector(r.bounded_witness->direction)},
                                  {"max_norm", r.bounded_witness->max_norm}};
    }
    doc["indeterminate_count"] = r.indeterminate_witnesses.size();
    return doc.dump(2);
}

std::string to_json(const TheoremCReport& r) { return theorem_c(r).dump(2); }

std::string to_json(const TheoremAReport& r) {
    json doc = {{"verdict", verdict_name(r.verdict)},
                {"detail", r.detail},
                {"positivity", positivity(r.positivity)},
                {"positivity_pass", r.positivity_pass},
                {"splice_constant", r.splice_constant},
                {"splice_pass", r.splice_pass},
                {"transversality", theorem_c(r.transversality)}};
    return doc.dump(2);
}

std::string to_json(const BoundCheck& c, const RiccatiBound& b) {
    json per = json::array();
    for (const auto& [mx, at] : c.per_interval)
        per.push_back({{"max_slope_norm", mx}, {"at", at}});
    json doc = {{"pass", c.pass},
                {"max_slope_norm", c.max_slope_norm},
                {"at_time", c.at_time},
                {"bound", {{"A", b.A},
                           {"A_raw", b.A_raw},
                           {"M", b.M},
                           {"R", b.R},
                           {"C_norm", b.C_norm},
                           {"b1", b.b1},
                           {"b2", b.b2}}},
                {"per_interval", per},
                {"per_interval_extension", c.per_interval_extension}};
    return doc.dump(2);
}

std::string to_json(const BoundednessCertificate& c) {
    json doc = {{"region", c.region.description},
                {"b1", c.b1()},
                {"b2", c.b2()},
                {"b1_raw", c.b1_raw},
                {"b2_raw", c.b2_raw},
                {"safety", c.safety},
                {"samples", c.samples},
                {"heuristic", true}};
    return doc.dump(2);
}

}  // namespace gb::reports
