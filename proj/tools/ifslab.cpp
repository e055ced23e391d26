#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "ifslab/chaosgame.hpp"
#include "ifslab/codespace.hpp"
#include "ifslab/io.hpp"
#include "ifslab/measurekit.hpp"
#include "ifslab/serial_ref.hpp"
#include "ifslab/specio.hpp"

namespace fs = std::filesystem;
using namespace ifslab;

namespace {

// exit code contract: 0 success, 1 internal, 2 validation, 3 numeric failure
constexpr int kOk = 0, kInternal = 1, kValidation = 2, kNumeric = 3;

struct Ctx {
    std::string out_dir = ".";
    uint64_t seed = 0;
    io::Json report;
    io::Json timings;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void add_input(const std::string &label, const std::string &path) {
        report["inputs"][label + ":" + path] = io::digest_hex(io::read_file(path));
    }
    void stamp(const std::string &label) {
        const auto now = std::chrono::steady_clock::now();
        timings[label] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - t0).count() / 1000.0;
    }
    void emit(const std::string &name, const std::string &bytes) {
        fs::create_directories(out_dir);
        io::write_file((fs::path(out_dir) / name).string(), bytes);
    }
    // report.json is byte-stable across runs with equal flags; wall-clock data
    // goes to timings.json which carries no such guarantee
    void finish(int exit_code) {
        report["exit_code"] = exit_code;
        emit("report.json", report.dump() + "\n");
        stamp("total");
        emit("timings.json", timings.dump() + "\n");
    }
};

Vec parse_point(const std::string &text, int dim) {
    Vec p;
    p.dim = dim;
    std::stringstream ss(text);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= dim) throw ValidationError("point '" + text + "' has too many coordinates");
        p[i++] = std::stod(tok);
    }
    if (i != dim) throw ValidationError("point '" + text + "' needs " + std::to_string(dim) +
                                        " coordinates");
    return p;
}

PointCloud grid_cloud(const Space &sp, int per_axis) {
    std::vector<Vec> pts;
    const Box &b = sp.bounds;
    if (sp.dim == 1) {
        for (int i = 0; i < per_axis; ++i) {
            Vec p;
            p.dim = 1;
            p[0] = b.lo[0] + (b.hi[0] - b.lo[0]) * i / (per_axis - 1.0);
            pts.push_back(p);
        }
    } else if (sp.dim == 2) {
        for (int i = 0; i < per_axis; ++i)
            for (int j = 0; j < per_axis; ++j) {
                Vec p;
                p.dim = 2;
                p[0] = b.lo[0] + (b.hi[0] - b.lo[0]) * i / (per_axis - 1.0);
                p[1] = b.lo[1] + (b.hi[1] - b.lo[1]) * j / (per_axis - 1.0);
                pts.push_back(p);
            }
    } else {
        for (int i = 0; i < per_axis; ++i)
            for (int j = 0; j < per_axis; ++j)
                for (int k = 0; k < per_axis; ++k) {
                    Vec p;
                    p.dim = 3;
                    p[0] = b.lo[0] + (b.hi[0] - b.lo[0]) * i / (per_axis - 1.0);
                    p[1] = b.lo[1] + (b.hi[1] - b.lo[1]) * j / (per_axis - 1.0);
                    p[2] = b.lo[2] + (b.hi[2] - b.lo[2]) * k / (per_axis - 1.0);
                    pts.push_back(p);
                }
    }
    return PointCloud::build(sp, std::move(pts), 0.0);
}

io::Json trace_json(const ConvergenceTrace &trace) {
    io::Json arr{io::Json::Array{}};
    for (const auto &e : trace.entries) {
        io::Json row;
        row["k"] = e.k;
        row["size"] = e.cloud_size;
        row["step"] = e.step;
        row["residual"] = e.residual;
        arr.push_back(std::move(row));
    }
    return arr;
}

int cmd_render(Ctx &ctx, const std::string &ifs_path, double tol, double prune_eps, int max_iter,
               int width, int height) {
    ctx.add_input("ifs", ifs_path);
    const IFSystem ifs = specio::load_ifs(ifs_path);
    if (prune_eps < 0.0) prune_eps = tol / 4.0;
    ctx.report["params"]["tol"] = tol;
    ctx.report["params"]["prune_eps"] = prune_eps;
    ctx.report["tolerances"]["step"] = "d_H(S_k, S_{k+1}) <= tol (--tol flag)";

    PointCloud seed = PointCloud::build(ifs.space, {ifs.space.bounds.center()}, 0.0);
    const auto [cloud, trace] = attractor(ifs, seed, tol, max_iter, prune_eps);
    ctx.stamp("attractor");
    ctx.report["metrics"]["iterations"] = trace.entries.size();
    ctx.report["metrics"]["points"] = cloud.size();
    ctx.report["metrics"]["converged"] = trace.converged;
    ctx.report["trace"] = trace_json(trace);

    ctx.emit("attractor.csv", io::cloud_to_csv(cloud, ifs.space.dim));
    ctx.emit("attractor.pgm", io::render_pgm(cloud, width, height, ifs.space.bounds));
    if (!trace.converged) {
        ctx.report["reason"] = trace.reason.empty() ? "did not converge" : trace.reason;
        return kNumeric;
    }
    return kOk;
}

int cmd_iterate(Ctx &ctx, const std::string &ifs_path, int n, double prune_eps, int grid,
                int width, int height) {
    ctx.add_input("ifs", ifs_path);
    const IFSystem ifs = specio::load_ifs(ifs_path);
    if (prune_eps < 0.0) {
        // default to the seed grid diagonal so F(X0) within-grid is trappable
        double spacing = 0.0;
        for (int i = 0; i < ifs.space.dim; ++i)
            spacing += std::pow((ifs.space.bounds.hi[i] - ifs.space.bounds.lo[i]) / (grid - 1.0), 2);
        prune_eps = std::sqrt(spacing);
    }
    ctx.report["params"]["n"] = n;
    ctx.report["params"]["prune_eps"] = prune_eps;
    ctx.report["params"]["grid"] = grid;
    const PointCloud X0 = grid_cloud(ifs.space, grid);
    const auto [cloud, rep] = maximal_attractor(ifs, X0, n, prune_eps);
    ctx.stamp("maximal_attractor");
    ctx.report["metrics"]["points"] = cloud.size();
    ctx.report["metrics"]["trapping_ok"] = rep.trapping_ok;
    ctx.report["metrics"]["monotone"] = rep.monotone;
    io::Json steps{io::Json::Array{}};
    for (double e : rep.step_excess) steps.push_back(e);
    ctx.report["metrics"]["step_excess"] = std::move(steps);
    ctx.report["tolerances"]["monotone"] = "e(F^{k+1}X0, F^k X0) <= prune_eps (--prune-eps flag)";
    ctx.emit("maximal.csv", io::cloud_to_csv(cloud, ifs.space.dim));
    ctx.emit("maximal.pgm", io::render_pgm(cloud, width, height, ifs.space.bounds));
    return kOk;
}

int cmd_chaos(Ctx &ctx, const std::string &ifs_path, const std::string &ref_path,
              const std::string &driver_text, const std::string &x0_text, long n, long burn_in,
              long stride, double tol, double prune_eps, int trials, int k_disj, int width,
              int height) {
    ctx.add_input("ifs", ifs_path);
    ctx.add_input("ref", ref_path);
    const IFSystem ifs = specio::load_ifs(ifs_path);
    const PointCloud reference = io::cloud_from_csv(ifs.space, io::read_file(ref_path));
    const Vec x0 = x0_text.empty() ? ifs.space.bounds.center() : parse_point(x0_text, ifs.space.dim);
    const DriverSpec driver = parse_driver_spec(driver_text, ifs.size(), ctx.seed);
    if (prune_eps < 0.0) prune_eps = tol / 4.0;
    ctx.report["params"]["driver"] = driver_text;
    ctx.report["params"]["n"] = n;
    ctx.report["params"]["tol"] = tol;
    ctx.report["params"]["prune_eps"] = prune_eps;
    ctx.report["params"]["seed"] = static_cast<long long>(ctx.seed);
    ctx.report["tolerances"]["pass"] = "d_H(omega, reference) <= tol (--tol flag)";

    if (trials > 1) {
        const auto rep = stochastic_driver_run(ifs, x0, driver, n, trials, ctx.seed, k_disj,
                                               &reference, tol, prune_eps);
        ctx.stamp("trials");
        io::Json arr{io::Json::Array{}};
        for (const auto &t : rep.trials) {
            io::Json row;
            row["seed"] = static_cast<long long>(t.seed);
            row["disjunctive_upto_k"] = t.disjunctive_upto_k;
            row["escaped"] = t.escaped;
            row["d_h"] = t.d_h_vs_ref;
            row["pass"] = t.pass;
            arr.push_back(std::move(row));
        }
        ctx.report["metrics"]["trials"] = std::move(arr);
        ctx.report["metrics"]["passes"] = rep.passes;
        ctx.report["metrics"]["disjunctive_passes"] = rep.disjunctive_passes;
        ctx.report["metrics"]["pooled_d_h"] = rep.pooled_d_h;
        if (rep.passes < trials) {
            ctx.report["reason"] = "some trials missed the reference beyond tol";
            return kNumeric;
        }
        return kOk;
    }

    OrbitConfig cfg;
    cfg.x0 = x0;
    cfg.driver = driver;
    cfg.n = n;
    cfg.burn_in = burn_in;
    cfg.stride = stride;
    const Orbit orbit = run_orbit(ifs, cfg);
    ctx.emit("orbit.csv", io::orbit_to_csv(orbit.indices, orbit.points, ifs.space.dim));
    {
        std::vector<int> strided_symbols;
        for (size_t i = 0; i < orbit.indices.size(); ++i) {
            const long idx = orbit.indices[i];
            strided_symbols.push_back(idx > 0 && idx <= static_cast<long>(orbit.symbols.size())
                                          ? orbit.symbols[static_cast<size_t>(idx - 1)]
                                          : 1);
        }
        ctx.emit("orbit.ppm", io::render_ppm_orbit(orbit.points, strided_symbols, width, height,
                                                   ifs.space.bounds, ifs.space.dim));
    }
    const ChaosReport rep = chaos_vs_attractor(ifs, cfg, reference, tol, prune_eps);
    ctx.stamp("chaos");
    ctx.report["metrics"]["pass"] = rep.pass;
    ctx.report["metrics"]["d_h"] = rep.d_h;
    ctx.report["metrics"]["excess_omega_to_ref"] = rep.excess_omega_to_ref;
    ctx.report["metrics"]["excess_ref_to_omega"] = rep.excess_ref_to_omega;
    if (!rep.omega.cloud.points.empty()) {
        ctx.emit("omega.csv", io::cloud_to_csv(rep.omega.cloud, ifs.space.dim));
        ctx.emit("omega.pgm", io::render_pgm(rep.omega.cloud, width, height, ifs.space.bounds));
        io::Json sens{io::Json::Array{}};
        for (const auto &s : rep.burnin_sensitivity) {
            io::Json row;
            row["burn_in"] = s.burn_in;
            row["cloud_size"] = s.cloud_size;
            row["d_h_vs_main"] = s.d_h_vs_main;
            sens.push_back(std::move(row));
        }
        ctx.report["metrics"]["burnin_sensitivity"] = std::move(sens);
    }
    if (!rep.pass) {
        ctx.report["reason"] = rep.reason;
        return kNumeric;
    }
    return kOk;
}

void emit_measure(Ctx &ctx, const IFSystem &ifs, const DiscreteMeasure &mu, double weight_floor);

int cmd_measure(Ctx &ctx, const std::string &ifs_path, const std::string &mode, double tol,
                int max_iter, double merge_radius, long n, int depth, long samples,
                double weight_floor, const std::string &x0_text) {
    ctx.add_input("ifs", ifs_path);
    const IFSystem ifs = specio::load_ifs(ifs_path);
    if (!ifs.has_weights())
        throw ValidationError("measure commands need weights in the IFS spec");
    ctx.report["params"]["mode"] = mode;
    ctx.report["params"]["merge_radius"] = merge_radius;
    const Vec start =
        x0_text.empty() ? ifs.space.bounds.center() : parse_point(x0_text, ifs.space.dim);

    DiscreteMeasure result;
    if (mode == "invariant") {
        const DiscreteMeasure mu0 = DiscreteMeasure::dirac(start);
        const InvariantResult r = invariant_measure(ifs, mu0, tol, max_iter, merge_radius);
        ctx.stamp("invariant");
        result = r.measure;
        ctx.report["metrics"]["iterations"] = r.iterations;
        ctx.report["metrics"]["converged"] = r.converged;
        ctx.report["metrics"]["residual_d_mk"] = r.residual;
        io::Json steps{io::Json::Array{}};
        for (double d : r.step_distances) steps.push_back(d);
        ctx.report["metrics"]["step_d_mk"] = std::move(steps);
        ctx.report["tolerances"]["converged"] = "d_MK(mu_k, mu_{k+1}) <= tol (--tol flag)";
        if (!r.converged) {
            ctx.report["reason"] = "Markov iteration did not converge within max_iter";
            emit_measure(ctx, ifs, result, weight_floor);
            return kNumeric;
        }
    } else if (mode == "mann") {
        const DiscreteMeasure mu0 = DiscreteMeasure::dirac(start);
        const MannResult r = mann_average(ifs, mu0, n, merge_radius);
        ctx.stamp("mann");
        result = r.average;
        ctx.report["metrics"]["n"] = r.n;
        ctx.report["metrics"]["residual_d_mk"] = r.residual;
        ctx.report["metrics"]["merge_budget"] = r.merge_budget;
        ctx.report["tolerances"]["residual"] =
            "telescoping bound 2*diam/n plus merge budget (reported)";
    } else if (mode == "bernoulli") {
        result = bernoulli_pushforward(ifs, depth, samples, ctx.seed, merge_radius);
        ctx.stamp("bernoulli");
        ctx.report["params"]["depth"] = depth;
        ctx.report["params"]["samples"] = samples;
    } else {
        throw ValidationError("unknown measure mode '" + mode + "'");
    }
    ctx.report["metrics"]["atoms"] = result.size();
    const Vec mean = result.mean();
    io::Json jm{io::Json::Array{}};
    for (int c = 0; c < ifs.space.dim; ++c) jm.push_back(mean[c]);
    ctx.report["metrics"]["mean"] = std::move(jm);
    ctx.report["metrics"]["merge_cost"] = result.merge_cost;
    // weak-convergence monitor for unbounded supports: mass concentration
    // near the origin at a few radii
    io::Json conc;
    for (double r : {0.05, 0.5, 5.0})
        conc["radius_" + std::to_string(r).substr(0, 4)] = result.mass_within(r);
    ctx.report["metrics"]["mass_within"] = std::move(conc);
    emit_measure(ctx, ifs, result, weight_floor);
    return kOk;
}

int cmd_classify(Ctx &ctx, const std::string &ifs_path, const std::string &coeffs_text, int p_max,
                 int samples) {
    ctx.add_input("ifs", ifs_path);
    const IFSystem ifs = specio::load_ifs(ifs_path);
    std::optional<std::vector<double>> coeffs;
    if (!coeffs_text.empty()) {
        std::vector<double> c;
        std::stringstream ss(coeffs_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) c.push_back(std::stod(tok));
        coeffs = std::move(c);
    }
    const ClassificationReport rep = classify(ifs, coeffs, p_max, samples, ctx.seed);
    ctx.stamp("classify");
    io::Json lips{io::Json::Array{}};
    for (double l : rep.lipschitz) lips.push_back(l);
    ctx.report["metrics"]["lipschitz"] = std::move(lips);
    ctx.report["metrics"]["banach_contractive"] = rep.banach_contractive;
    ctx.report["metrics"]["region_nonempty"] = rep.region_nonempty;
    io::Json region{io::Json::Array{}};
    for (const auto &iq : rep.region) region.push_back(iq.text);
    ctx.report["metrics"]["average_region"] = std::move(region);
    if (rep.weights_supplied) {
        ctx.report["metrics"]["average_sum"] = rep.average_sum;
        ctx.report["metrics"]["average_contractive"] = rep.average_contractive;
    }
    if (rep.coeffs_supplied) {
        ctx.report["metrics"]["coeff_weight_sum"] = rep.coeff_weight_sum;
        ctx.report["metrics"]["average_rakotch"] = rep.average_rakotch;
    }
    ctx.report["metrics"]["eventual_p"] = rep.eventual_p;
    io::Json worst{io::Json::Array{}};
    for (double w : rep.eventual_worst) worst.push_back(w);
    ctx.report["metrics"]["eventual_worst"] = std::move(worst);
    ctx.report["notes"] =
        "Lipschitz values for non-affine maps are sampled lower-bound estimates";
    ctx.report["tolerances"]["average_contractive"] =
        "sum p_i Lip_i < 1 - 1e-6 (estimator resolution)";
    ctx.report["tolerances"]["average_rakotch"] =
        "sum p_i c_i <= 1 + 1e-12 and envelopes below c_i + 1e-9";
    return kOk;
}

int cmd_codes(Ctx &ctx, const std::string &mode, const std::string &ifs_path, int k_max,
              double tol, const std::string &word_text, int n_symbols, long length, int k_disj,
              const std::string &driver_text, const std::string &family_text) {
    ctx.report["params"]["mode"] = mode;
    if (mode == "williams") {
        ctx.add_input("ifs", ifs_path);
        const IFSystem ifs = specio::load_ifs(ifs_path);
        const PointCloud pts = williams_points(ifs, k_max, tol);
        ctx.stamp("williams");
        ctx.report["metrics"]["points"] = pts.size();
        ctx.report["tolerances"]["points"] = "Picard residual below tol, dedup radius tol (--tol)";
        ctx.emit("williams.csv", io::cloud_to_csv(pts, ifs.space.dim));
        return kOk;
    }
    if (mode == "coding") {
        ctx.add_input("ifs", ifs_path);
        const IFSystem ifs = specio::load_ifs(ifs_path);
        Word w;
        w.alphabet = ifs.size();
        std::stringstream ss(word_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) w.symbols.push_back(std::stoi(tok));
        const CodingResult r = coding_point(ifs, w, ifs.space.bounds.center());
        io::Json jp{io::Json::Array{}};
        for (int c = 0; c < ifs.space.dim; ++c) jp.push_back(r.point[c]);
        ctx.report["metrics"]["point"] = std::move(jp);
        ctx.report["tolerances"]["point"] =
            "within phi^k(diam) of the coding-map value when a modulus is known";
        return kOk;
    }
    if (mode == "champernowne") {
        const Word w = champernowne(n_symbols, static_cast<size_t>(length));
        ctx.report["metrics"]["word"] = w.to_string();
        std::cout << w.to_string() << "\n";
        return kOk;
    }
    if (mode == "disjunctive") {
        DriverSpec spec = parse_driver_spec(driver_text, n_symbols, ctx.seed);
        Driver driver(spec);
        Word prefix;
        prefix.alphabet = n_symbols;
        for (long i = 0; i < length; ++i) prefix.symbols.push_back(driver.next());
        const DisjunctiveReport rep = is_disjunctive_upto(prefix, k_disj);
        ctx.report["metrics"]["disjunctive"] = rep.ok;
        io::Json missing{io::Json::Array{}};
        for (const auto &m : rep.missing) missing.push_back(m.to_string());
        ctx.report["metrics"]["missing"] = std::move(missing);
        return kOk;
    }
    if (mode == "minorant") {
        std::stringstream ss(family_text);
        std::string fam, par;
        std::getline(ss, fam, ',');
        std::getline(ss, par, ',');
        MinorantFamily family;
        if (fam == "const")
            family = MinorantFamily::constant;
        else if (fam == "logpow")
            family = MinorantFamily::logpow;
        else if (fam == "pow")
            family = MinorantFamily::pow;
        else if (fam == "sinpow")
            family = MinorantFamily::sinpow;
        else
            throw ValidationError("unknown minorant family '" + fam + "'");
        const double param = par.empty() ? (family == MinorantFamily::constant ? 0.3 : 1.0)
                                         : std::stod(par);
        const MinorantVerdict v = minorant_verdict(family, param);
        ctx.report["metrics"]["satisfies_minorant_condition"] = v.satisfies;
        io::Json table{io::Json::Array{}};
        for (const auto &row : v.table) {
            io::Json r;
            r["c"] = row.c;
            r["n"] = row.n;
            r["p_inv_over_n_c"] = row.value;
            table.push_back(std::move(r));
        }
        ctx.report["metrics"]["table"] = std::move(table);
        return kOk;
    }
    throw ValidationError("unknown codes mode '" + mode + "'");
}

int cmd_examples(Ctx &ctx, bool list, const std::string &emit_id, bool all) {
    if (list) {
        for (const auto &e : gallery::entries()) std::cout << e.id << "\t" << e.description << "\n";
        io::Json ids{io::Json::Array{}};
        for (const auto &e : gallery::entries()) ids.push_back(e.id);
        ctx.report["metrics"]["ids"] = std::move(ids);
        return kOk;
    }
    if (all) {
        for (const auto &e : gallery::entries()) ctx.emit(e.id + ".json", e.json);
        return kOk;
    }
    if (!emit_id.empty()) {
        ctx.emit(emit_id + ".json", gallery::find(emit_id).json);
        return kOk;
    }
    throw ValidationError("examples needs --list, --emit ID or --all");
}

void emit_measure(Ctx &ctx, const IFSystem &ifs, const DiscreteMeasure &mu, double weight_floor) {
    ctx.emit("measure.csv", io::measure_to_csv(mu, ifs.space.dim));
    try {
        const PointCloud supp = support_cloud(ifs.space, mu, weight_floor);
        ctx.emit("support.csv", io::cloud_to_csv(supp, ifs.space.dim));
    } catch (const ValidationError &) {
        // floor above every weight: skip the support artifact
    }
}

} // namespace

int main(int argc, char **argv) {
    if (const char *threads = std::getenv("IFSLAB_THREADS")) {
#ifdef _OPENMP
        const int t = std::atoi(threads);
        if (t > 0) omp_set_num_threads(t);
#endif
    }

    CLI::App app{"ifslab: iterated function systems at desk scale"};
    app.require_subcommand(1);
    app.fallthrough(); // --out/--seed may follow the subcommand name

    Ctx ctx;
    app.add_option("--out", ctx.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", ctx.seed, "RNG seed for every stochastic component")
        ->capture_default_str();

    std::string ifs_path, ref_path, driver_text = "champernowne", x0_text, mode, coeffs_text;
    std::string word_text, family_text = "const,0.3";
    double tol = 1e-3, prune_eps = -1.0, merge_radius = 1e-4, weight_floor = 0.0;
    long n = 100000, burn_in = -1, stride = 1, length = 1000, samples = 20000;
    int max_iter = 200, width = 512, height = 512, grid = 101, trials = 1, k_disj = 3, p_max = 4;
    int depth = 10, n_symbols = 2, k_max = 6, cls_samples = 2000;

    auto *render = app.add_subcommand("render", "deterministic attractor iteration");
    render->add_option("--ifs", ifs_path, "IFS spec file")->required();
    render->add_option("--tol", tol, "convergence tolerance on d_H steps");
    render->add_option("--prune-eps", prune_eps, "cloud pruning radius (default tol/4)");
    render->add_option("--max-iter", max_iter, "iteration cap");
    render->add_option("--width", width, "image width");
    render->add_option("--height", height, "image height");

    auto *iterate = app.add_subcommand("iterate", "global maximal attractor probe");
    iterate->add_option("--ifs", ifs_path, "IFS spec file")->required();
    iterate->add_option("--n", n, "number of Hutchinson iterations")->default_val(20);
    iterate->add_option("--prune-eps", prune_eps, "cloud pruning radius (default: grid diagonal)");
    iterate->add_option("--grid", grid, "seed grid points per axis");
    iterate->add_option("--width", width, "image width");
    iterate->add_option("--height", height, "image height");

    auto *chaos = app.add_subcommand("chaos", "chaos game versus a reference cloud");
    chaos->add_option("--ifs", ifs_path, "IFS spec file")->required();
    chaos->add_option("--ref", ref_path, "reference cloud CSV")->required();
    chaos->add_option("--driver", driver_text,
                      "champernowne | periodic:P | explicit:P | bernoulli[:w] | minorant:F");
    chaos->add_option("--x0", x0_text, "start point (comma separated)");
    chaos->add_option("-n,--n", n, "orbit length");
    chaos->add_option("--burn-in", burn_in, "burn-in (default max(1000, n/100))");
    chaos->add_option("--stride", stride, "recording stride");
    chaos->add_option("--tol", tol, "pass threshold on d_H")->default_val(0.02);
    chaos->add_option("--prune-eps", prune_eps, "omega-estimate pruning radius (default tol/4)");
    chaos->add_option("--trials", trials, "independent seeded trials");
    chaos->add_option("--k-disj", k_disj, "disjunctivity check depth for trials");
    chaos->add_option("--width", width, "image width");
    chaos->add_option("--height", height, "image height");

    auto *measure = app.add_subcommand("measure", "Markov operator machinery");
    measure->add_option("--ifs", ifs_path, "IFS spec file")->required();
    measure->add_option("--mode", mode, "invariant | mann | bernoulli")->default_val("invariant");
    measure->add_option("--tol", tol, "d_MK convergence tolerance")->default_val(0.005);
    measure->add_option("--max-iter", max_iter, "iteration cap")->default_val(200);
    measure->add_option("--merge-radius", merge_radius, "atom merge radius");
    measure->add_option("--n", n, "Mann average length")->default_val(2000);
    measure->add_option("--depth", depth, "Bernoulli word length");
    measure->add_option("--samples", samples, "Bernoulli samples (sampled mode)");
    measure->add_option("--weight-floor", weight_floor, "support cloud weight floor");
    measure->add_option("--x0", x0_text, "initial Dirac position (default: domain center)");

    auto *classify_cmd = app.add_subcommand("classify", "contraction-class analysis");
    classify_cmd->add_option("--ifs", ifs_path, "IFS spec file")->required();
    classify_cmd->add_option("--coeffs", coeffs_text, "average-Rakotch coefficients c_i");
    classify_cmd->add_option("--p-max", p_max, "eventual-contraction search depth");
    classify_cmd->add_option("--samples", cls_samples, "sampling effort per map");

    auto *codes = app.add_subcommand("codes", "code-space machinery");
    codes->add_option("--mode", mode,
                      "williams | coding | champernowne | disjunctive | minorant")
        ->required();
    codes->add_option("--ifs", ifs_path, "IFS spec file (williams, coding)");
    codes->add_option("--k-max", k_max, "Williams word length cap");
    codes->add_option("--tol", tol, "Picard tolerance")->default_val(1e-9);
    codes->add_option("--word", word_text, "word symbols, e.g. 2,1,1");
    codes->add_option("--n-symbols", n_symbols, "alphabet size N");
    codes->add_option("--length", length, "prefix length");
    codes->add_option("--k-disj", k_disj, "disjunctivity depth");
    codes->add_option("--driver", driver_text, "driver spec for disjunctive mode");
    codes->add_option("--family", family_text, "minorant family, e.g. logpow,2");

    auto *examples = app.add_subcommand("examples", "built-in gallery of systems");
    bool list = false, all = false;
    std::string emit_id;
    examples->add_flag("--list", list, "print gallery ids");
    examples->add_option("--emit", emit_id, "write one gallery spec to --out");
    examples->add_flag("--all", all, "write every gallery spec to --out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    int code = kInternal;
    try {
        if (render->parsed()) {
            ctx.report["command"] = "render";
            code = cmd_render(ctx, ifs_path, tol, prune_eps, max_iter, width, height);
        } else if (iterate->parsed()) {
            ctx.report["command"] = "iterate";
            code = cmd_iterate(ctx, ifs_path, static_cast<int>(n), prune_eps, grid, width, height);
        } else if (chaos->parsed()) {
            ctx.report["command"] = "chaos";
            if (prune_eps < 0.0) prune_eps = tol / 4.0;
            code = cmd_chaos(ctx, ifs_path, ref_path, driver_text, x0_text, n, burn_in, stride,
                             tol, prune_eps, trials, k_disj, width, height);
        } else if (measure->parsed()) {
            ctx.report["command"] = "measure";
            code = cmd_measure(ctx, ifs_path, mode, tol, max_iter, merge_radius, n, depth, samples,
                               weight_floor, x0_text);
        } else if (classify_cmd->parsed()) {
            ctx.report["command"] = "classify";
            code = cmd_classify(ctx, ifs_path, coeffs_text, p_max, cls_samples);
        } else if (codes->parsed()) {
            ctx.report["command"] = "codes";
            code = cmd_codes(ctx, mode, ifs_path, k_max, tol, word_text, n_symbols, length, k_disj,
                             driver_text, family_text);
        } else if (examples->parsed()) {
            ctx.report["command"] = "examples";
            code = cmd_examples(ctx, list, emit_id, all);
        }
        ctx.finish(code);
        return code;
    } catch (const ValidationError &e) {
        std::cerr << "validation error: " << e.what() << "\n";
        ctx.report["reason"] = e.what();
        ctx.finish(kValidation);
        return kValidation;
    } catch (const expr::ParseError &e) {
        std::cerr << "expression error: " << e.what() << "\n";
        ctx.report["reason"] = e.what();
        ctx.finish(kValidation);
        return kValidation;
    } catch (const NumericError &e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        ctx.report["reason"] = e.what();
        ctx.finish(kNumeric);
        return kNumeric;
    } catch (const std::invalid_argument &e) {
        std::cerr << "validation error: malformed numeric argument (" << e.what() << ")\n";
        ctx.report["reason"] = std::string("malformed numeric argument: ") + e.what();
        ctx.finish(kValidation);
        return kValidation;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        ctx.report["reason"] = e.what();
        ctx.finish(kInternal);
        return kInternal;
    }
}
