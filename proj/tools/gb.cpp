// Command-line front end: orbits, frames, Riccati bounds, conjugate points,
// Green bundles, index-form scans and the hyperbolicity pipelines.

#include <CLI11.hpp>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>
#endif

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gb/catalog.hpp"
#include "gb/certificate.hpp"
#include "gb/cocycle.hpp"
#include "gb/conjugate_greens.hpp"
#include "gb/errors.hpp"
#include "gb/index_form.hpp"
#include "gb/reports.hpp"
#include "gb/riccati.hpp"
#include "gb/systems_io.hpp"
#include "gb/theorems.hpp"

using namespace gb;
using nlohmann::json;

namespace {

int log_level() {
    const char* env = std::getenv("GB_LOG");
    if (!env) return 2;  // warn
    std::string v(env);
    if (v == "debug") return 0;
    if (v == "info") return 1;
    if (v == "warn") return 2;
    return 3;
}

void log_info(const std::string& msg) {
    if (log_level() <= 1) std::cerr << "[info] " << msg << "\n";
}

Vec parse_vector(const std::string& text, int expected_dim) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) vals.push_back(std::stod(tok));
    }
    if (expected_dim > 0 && static_cast<int>(vals.size()) == 1 && expected_dim > 1)
        vals.assign(expected_dim, vals[0]);
    if (expected_dim > 0 && static_cast<int>(vals.size()) != expected_dim)
        throw ConfigError("expected " + std::to_string(expected_dim) +
                          " components in '" + text + "'");
    Vec v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
    return v;
}

struct Output {
    std::filesystem::path dir{"."};
    bool plot_data = false;

    void ensure() const {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        auto probe = dir / ".gb_write_probe";
        std::ofstream test(probe);
        if (!test.good()) throw ConfigError("output directory not writable: " + dir.string());
        test.close();
        std::filesystem::remove(probe, ec);
    }
    void write(const std::string& name, const std::string& payload) const {
        std::ofstream out(dir / name);
        out << payload;
        log_info("wrote " + (dir / name).string());
    }
    /// CSV plus an optional whitespace-separated gnuplot twin.
    void table(const std::string& stem, const std::string& header,
               const std::vector<std::vector<double>>& rows) const {
        std::ostringstream csv;
        csv << header << "\n";
        csv.setf(std::ios::scientific);
        csv.precision(17);
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                csv << (i ? "," : "") << row[i];
            csv << "\n";
        }
        write(stem + ".csv", csv.str());
        if (plot_data) {
            std::ostringstream dat;
            dat << "# " << header << "\n";
            dat.setf(std::ios::scientific);
            dat.precision(17);
            for (const auto& row : rows) {
                for (std::size_t i = 0; i < row.size(); ++i)
                    dat << (i ? " " : "") << row[i];
                dat << "\n";
            }
            write(stem + ".dat", dat.str());
        }
    }
};

struct SampleSet {
    std::vector<PhasePoint> points;
    double step = 0.05;
    bool periodic = true;
};

// --set accepts "x=..;p=..[;clock=..][;period=..;n=..]" or a JSON file with
// {"points": [{x, p, clock}], "step", "periodic"}.
SampleSet parse_sample_set(const std::string& spec, const catalog::CatalogEntry& system,
                           const FlowOptions& flow) {
    SampleSet set;
    const int d = system.lagrangian->space().dim;
    if (std::filesystem::exists(spec)) {
        std::ifstream in(spec);
        json doc = json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("sample file is not valid JSON");
        set.step = doc.value("step", 0.05);
        set.periodic = doc.value("periodic", true);
        for (const auto& p : doc.at("points")) {
            Vec x(d), mom(d);
            for (int i = 0; i < d; ++i) x[i] = p.at("x").at(i).get<double>();
            for (int i = 0; i < d; ++i) mom[i] = p.at("p").at(i).get<double>();
            set.points.push_back({x, mom, p.value("clock", 0.0)});
        }
        if (set.points.empty()) throw ConfigError("sample file holds no points");
        return set;
    }

    Vec x = Vec::Zero(d), p = Vec::Zero(d);
    double clock = 0.0, period = 0.0;
    int n = 16;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ';')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("bad sample spec item '" + item + "'");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "x")
            x = parse_vector(val, d);
        else if (key == "p")
            p = parse_vector(val, d);
        else if (key == "clock")
            clock = std::stod(val);
        else if (key == "period")
            period = std::stod(val);
        else if (key == "n")
            n = std::stoi(val);
        else
            throw ConfigError("unknown sample spec key '" + key + "'");
    }
    if (period > 0.0) {
        set.points = sample_periodic_orbit(system.hamiltonian, {x, p, clock}, period, n, flow);
        set.step = period / n;
        set.periodic = true;
    } else {
        set.points = {{x, p, clock}};
        set.periodic = true;
    }
    return set;
}

int verdict_exit(HypVerdict v) {
    switch (v) {
        case HypVerdict::Hyperbolic: return 0;
        case HypVerdict::NotHyperbolic:
        case HypVerdict::HypothesisNotSatisfied: return 1;
        case HypVerdict::Indeterminate: return 3;
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperbolicity toolkit for convex hamiltonian flows"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags remain valid after a subcommand

    double tol = 1e-10;
    int workers = 1;
    std::uint64_t seed = 12345;
    Output out;
    app.add_option("--tol", tol, "integration tolerance");
    app.add_option("--workers", workers, "worker threads for scans");
    app.add_option("--out", out.dir, "output directory");
    app.add_option("--seed", seed, "seed for random sweeps");
    app.add_flag("--plot-data", out.plot_data, "also emit gnuplot-ready .dat tables");

    std::string system_name = "pendulum";
    std::string x_text = "0", p_text = "0";
    double t0 = 0.0, t1 = 10.0, horizon = 20.0, threshold = 1e3;
    double window = 10.0, index_T = 10.0, green_tol = 1e-8;
    int mesh = 512, samples_per_unit = 16;
    std::string midpoint = "auto";
    std::string pipeline = "theoremA";
    std::string set_spec;
    std::string cocycle_kind = "diag";
    std::vector<double> cocycle_params{2.0, 0.5};
    std::vector<double> t_list;

    auto add_system = [&](CLI::App* cmd) {
        cmd->add_option("--system", system_name, "builtin name or definition file");
    };
    auto add_point = [&](CLI::App* cmd) {
        cmd->add_option("--x", x_text, "configuration point (comma separated)");
        cmd->add_option("--p", p_text, "momentum (comma separated)");
    };

    CLI::App* systems = app.add_subcommand("systems", "catalog utilities");
    CLI::App* systems_list = systems->add_subcommand("list", "list builtin systems");
    CLI::App* systems_export = systems->add_subcommand("export", "emit a definition file");
    add_system(systems_export);

    CLI::App* orbit_cmd = app.add_subcommand("orbit", "integrate an orbit, emit CSV");
    add_system(orbit_cmd);
    add_point(orbit_cmd);
    orbit_cmd->add_option("--t0", t0);
    orbit_cmd->add_option("--t1", t1);
    orbit_cmd->add_option("--samples-per-unit", samples_per_unit);

    CLI::App* jacobi_cmd = app.add_subcommand("jacobi", "integrate a vertical frame");
    add_system(jacobi_cmd);
    add_point(jacobi_cmd);
    jacobi_cmd->add_option("--t0", t0);
    jacobi_cmd->add_option("--t1", t1);
    jacobi_cmd->add_option("--samples-per-unit", samples_per_unit);

    CLI::App* riccati_cmd = app.add_subcommand("riccati", "slopes against the bound");
    add_system(riccati_cmd);
    add_point(riccati_cmd);
    riccati_cmd->add_option("--t1", t1);
    riccati_cmd->add_option("--samples-per-unit", samples_per_unit);

    CLI::App* conjugate_cmd = app.add_subcommand("conjugate", "conjugate-point report");
    add_system(conjugate_cmd);
    add_point(conjugate_cmd);
    conjugate_cmd->add_option("--T", window, "window length");

    CLI::App* greens_cmd = app.add_subcommand("greens", "Green bundle slopes");
    add_system(greens_cmd);
    add_point(greens_cmd);
    greens_cmd->add_option("--T", horizon, "initial horizon");
    greens_cmd->add_option("--green-tol", green_tol, "slope convergence tolerance");

    CLI::App* index_cmd = app.add_subcommand("index", "index-form positivity");
    add_system(index_cmd);
    add_point(index_cmd);
    index_cmd->add_option("--T", index_T, "segment length");
    index_cmd->add_option("--T-list", t_list, "lengths for the scan");
    index_cmd->add_option("--mesh", mesh);
    index_cmd->add_option("--midpoint-constraint", midpoint, "on|off|auto");

    CLI::App* hyp_cmd = app.add_subcommand("hyperbolicity", "theorem pipelines");
    add_system(hyp_cmd);
    hyp_cmd->add_option("--set", set_spec, "orbit spec or sample file");
    hyp_cmd->add_option("--horizon", horizon);
    hyp_cmd->add_option("--threshold", threshold);
    hyp_cmd->add_option("--green-tol", green_tol, "slope convergence tolerance");
    hyp_cmd->add_option("--pipeline", pipeline, "theoremA|theoremC|cocycle");
    hyp_cmd->add_option("--mesh", mesh);
    hyp_cmd->add_option("--T-list", t_list);

    CLI::App* cocycle_cmd = app.add_subcommand("cocycle", "sampled cocycle checks");
    cocycle_cmd->add_option("--kind", cocycle_kind, "diag|rotation|shear|system");
    cocycle_cmd->add_option("--params", cocycle_params, "kind parameters");
    cocycle_cmd->add_option("--horizon", horizon);
    cocycle_cmd->add_option("--threshold", threshold);
    add_system(cocycle_cmd);
    cocycle_cmd->add_option("--set", set_spec);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        json err{{"error", "config"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }

    FlowOptions flow;
    flow.tol = tol;

    try {
        out.ensure();

        if (*systems_list) {
            for (const auto& name : catalog::names()) std::cout << name << "\n";
            return 0;
        }
        if (*systems_export) {
            auto entry = load_system(system_name);
            const std::string doc = system_to_json(entry);
            out.write("system.json", doc);
            std::cout << doc << "\n";
            return 0;
        }

        auto entry = load_system(system_name);
        const int d = entry.lagrangian->space().dim;

        if (*orbit_cmd || *jacobi_cmd) {
            PhasePoint start{parse_vector(x_text, d), parse_vector(p_text, d), t0};
            OrbitSegment orbit = integrate_orbit(entry.hamiltonian, start, t0, t1, flow);
            const int n = std::max(2, static_cast<int>(std::abs(t1 - t0) * samples_per_unit));
            std::vector<std::vector<double>> rows;
            std::optional<JacobiFrame> frame;
            std::string header = "t";
            for (int i = 0; i < d; ++i) header += ",x" + std::to_string(i);
            for (int i = 0; i < d; ++i) header += ",p" + std::to_string(i);
            header += ",H";
            if (*jacobi_cmd) {
                frame = integrate_jacobi_frame(orbit, Mat::Zero(d, d),
                                               Mat::Identity(d, d), flow);
                for (int i = 0; i < d * d; ++i) header += ",Hf" + std::to_string(i);
                for (int i = 0; i < d * d; ++i) header += ",Vf" + std::to_string(i);
            }
            for (int k = 0; k <= n; ++k) {
                const double t = t0 + (t1 - t0) * k / n;
                PhasePoint pt = orbit.point(t);
                std::vector<double> row{t};
                for (int i = 0; i < d; ++i) row.push_back(pt.x[i]);
                for (int i = 0; i < d; ++i) row.push_back(pt.p[i]);
                row.push_back(entry.hamiltonian->value(pt.x, pt.p, t));
                if (frame) {
                    const Mat hm = frame->h_part(t), vm = frame->v_part(t);
                    for (int i = 0; i < d * d; ++i) row.push_back(hm(i % d, i / d));
                    for (int i = 0; i < d * d; ++i) row.push_back(vm(i % d, i / d));
                }
                rows.push_back(std::move(row));
            }
            out.table(*orbit_cmd ? "orbit" : "jacobi", header, rows);
            return 0;
        }

        if (*riccati_cmd) {
            PhasePoint start{parse_vector(x_text, d), parse_vector(p_text, d), 0.0};
            OrbitSegment orbit = integrate_orbit(entry.hamiltonian, start, 0.0, t1, flow);
            JacobiFrame fr =
                integrate_jacobi_frame(orbit, Mat::Zero(d, d), Mat::Identity(d, d), flow);
            RiccatiSolution sol = solve_riccati(std::move(fr));

            Region region;  // box around the visited states
            Vec xmin = orbit.position(0.0), xmax = xmin, pmin = start.p, pmax = start.p;
            for (double t = 0.0; t <= t1; t += t1 / 64) {
                xmin = xmin.cwiseMin(orbit.position(t));
                xmax = xmax.cwiseMax(orbit.position(t));
                pmin = pmin.cwiseMin(orbit.momentum(t));
                pmax = pmax.cwiseMax(orbit.momentum(t));
            }
            region.x_lo = xmin.array() - 0.5;
            region.x_hi = xmax.array() + 0.5;
            region.p_lo = pmin.array() - 0.5;
            region.p_hi = pmax.array() + 0.5;
            region.t_lo = 0.0;
            region.t_hi = entry.hamiltonian->time_dependence().kind == TimeKind::Periodic
                              ? entry.hamiltonian->time_dependence().period
                              : 0.0;
            region.description = "orbit box";
            auto cert = certify_bounded(entry.hamiltonian, region);
            auto bound = riccati_bound(cert);
            auto check = verify_bound(sol, bound);
            out.write("riccati.json", reports::to_json(check, bound));

            std::vector<std::vector<double>> rows;
            const int n = std::max(2, static_cast<int>(t1 * samples_per_unit));
            std::string header = "t";
            for (int i = 0; i < d * d; ++i) header += ",S" + std::to_string(i);
            header += ",norm,A,pass";
            for (int k = 0; k <= n; ++k) {
                const double t = t1 * k / n;
                if (!sol.defined_at(t)) continue;
                const Mat s = sol.slope(t);
                std::vector<double> row{t};
                for (int i = 0; i < d * d; ++i) row.push_back(s(i % d, i / d));
                const double nrm = s.operatorNorm();
                row.push_back(nrm);
                row.push_back(bound.A);
                row.push_back(nrm < bound.A ? 1.0 : 0.0);
                rows.push_back(std::move(row));
            }
            out.table("riccati", header, rows);
            std::cout << (check.pass ? "bound holds" : "bound violated") << "\n";
            return check.pass ? 0 : 1;
        }

        if (*conjugate_cmd) {
            PhasePoint start{parse_vector(x_text, d), parse_vector(p_text, d), 0.0};
            OrbitSegment orbit =
                integrate_orbit(entry.hamiltonian, start, 0.0, window, flow);
            auto report = find_conjugate_points(orbit, 0.0, window, flow);
            out.write("conjugate.json", reports::to_json(report));
            std::cout << (report.disconjugate ? "disconjugate" : "conjugate points found")
                      << "\n";
            return 0;
        }

        if (*greens_cmd) {
            PhasePoint start{parse_vector(x_text, d), parse_vector(p_text, d), 0.0};
            GreenOptions gopt;
            gopt.flow = flow;
            gopt.tol = green_tol;
            GreenBundles g = green_bundles(entry.hamiltonian, start, horizon, gopt);
            out.write("greens.json", reports::to_json(g));
            std::cout << "S_limit norm " << g.S_limit.norm() << ", U_limit norm "
                      << g.U_limit.norm() << (g.converged ? "" : " (not converged)")
                      << "\n";
            return 0;
        }

        if (*index_cmd) {
            PhasePoint start{parse_vector(x_text, d), parse_vector(p_text, d), 0.0};
            ScanConfig config;
            config.T_list = t_list.empty() ? std::vector<double>{index_T} : t_list;
            config.mesh = mesh;
            config.workers = workers;
            config.index.flow = flow;
            if (midpoint == "auto")
                config.midpoint_constraint =
                    framework_for(*entry.hamiltonian) == Framework::AutonomousLevel;
            else
                config.midpoint_constraint = (midpoint == "on");
            auto report = uniform_positivity_scan(entry.hamiltonian, {start}, config);
            out.write("index.json", reports::to_json(report));
            std::vector<std::vector<double>> rows;
            for (const auto& c : report.cells) rows.push_back({c.T, c.a_min});
            out.table("index", "T,a_min", rows);
            std::cout << "uniform_a " << report.uniform_a << "\n";
            return report.bounded_below ? 0 : 1;
        }

        if (*hyp_cmd) {
            if (set_spec.empty())
                set_spec = "x=" + x_text + ";p=" + p_text;  // single reference point
            SampleSet set = parse_sample_set(set_spec, entry, flow);

            if (pipeline == "cocycle") {
                // Sample the linearized flow itself over the set.
                std::vector<Mat> maps;
                for (const auto& pt : set.points) {
                    OrbitSegment orbit = integrate_orbit(entry.hamiltonian, pt, pt.clock,
                                                         pt.clock + set.step, flow);
                    Mat h0(d, 2 * d), v0(d, 2 * d);
                    h0 << Mat::Identity(d, d), Mat::Zero(d, d);
                    v0 << Mat::Zero(d, d), Mat::Identity(d, d);
                    JacobiFrame fr = integrate_jacobi_frame(orbit, h0, v0, flow);
                    Mat m(2 * d, 2 * d);
                    m.topRows(d) = fr.h_part(orbit.t1());
                    m.bottomRows(d) = fr.v_part(orbit.t1());
                    maps.push_back(m);
                }
                SampledCocycle cocycle(maps, set.step, set.periodic);
                QhOptions qopt;
                qopt.seed = seed;
                auto report = quasi_hyperbolicity_check(cocycle, horizon, threshold, qopt);
                out.write("hyperbolicity.json", reports::to_json(report));
                return report.quasi_hyperbolic == QhVerdict::QuasiHyperbolic ? 0
                       : report.quasi_hyperbolic == QhVerdict::Not          ? 1
                                                                            : 3;
            }

            if (pipeline == "theoremC") {
                TheoremCConfig config;
                config.horizon = horizon;
                config.bounded_threshold = threshold;
                config.green.flow = flow;
                config.green.tol = green_tol;
                config.sample_step = set.step;
                config.samples_periodic = set.periodic;
                auto report = decide_theorem_C(entry.hamiltonian, set.points, config);
                out.write("hyperbolicity.json", reports::to_json(report));
                if (report.splitting)
                    out.table("rates", "C,lambda",
                              {{report.splitting->C, report.splitting->lambda}});
                std::cout << reports::verdict_name(report.verdict) << "\n";
                return verdict_exit(report.verdict);
            }

            if (pipeline == "theoremA") {
                TheoremAConfig config;
                config.scan.T_list =
                    t_list.empty() ? std::vector<double>{5, 10, 20, 40} : t_list;
                config.scan.mesh = mesh;
                config.scan.workers = workers;
                config.scan.index.flow = flow;
                config.scan.midpoint_constraint =
                    framework_for(*entry.hamiltonian) == Framework::AutonomousLevel;
                config.theorem_c.horizon = horizon;
                config.theorem_c.bounded_threshold = threshold;
                config.theorem_c.green.flow = flow;
                config.theorem_c.green.tol = green_tol;
                config.theorem_c.sample_step = set.step;
                config.theorem_c.samples_periodic = set.periodic;
                auto report = decide_theorem_A(entry.hamiltonian, set.points, config);
                out.write("hyperbolicity.json", reports::to_json(report));
                if (report.transversality.splitting)
                    out.table("rates", "C,lambda",
                              {{report.transversality.splitting->C,
                                report.transversality.splitting->lambda}});
                std::cout << reports::verdict_name(report.verdict) << "\n";
                return verdict_exit(report.verdict);
            }
            throw ConfigError("unknown pipeline '" + pipeline + "'");
        }

        if (*cocycle_cmd) {
            SampledCocycle cocycle({Mat::Identity(2, 2)}, 1.0, true);
            if (cocycle_kind == "diag") {
                Mat m = Mat::Zero(2, 2);
                m(0, 0) = cocycle_params.at(0);
                m(1, 1) = cocycle_params.at(1);
                cocycle = SampledCocycle({m}, 1.0, true);
            } else if (cocycle_kind == "rotation") {
                const double a = cocycle_params.at(0);
                Mat m(2, 2);
                m << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
                cocycle = SampledCocycle({m}, 1.0, true);
            } else if (cocycle_kind == "shear") {
                Mat m(2, 2);
                m << 1.0, cocycle_params.at(0), 0.0, 1.0;
                cocycle = SampledCocycle({m}, 1.0, true);
            } else {
                throw ConfigError("unknown cocycle kind '" + cocycle_kind + "'");
            }
            QhOptions qopt;
            qopt.seed = seed;
            auto report = quasi_hyperbolicity_check(cocycle, horizon, threshold, qopt);
            out.write("cocycle.json", reports::to_json(report));
            return report.quasi_hyperbolic == QhVerdict::QuasiHyperbolic ? 0
                   : report.quasi_hyperbolic == QhVerdict::Not          ? 1
                                                                        : 3;
        }
    } catch (const ConfigError& e) {
        json err{{"error", e.code()}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const Error& e) {
        json err{{"error", e.code()}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        json err{{"error", "internal"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    }
    return 2;
}
