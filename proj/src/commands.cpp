#include "dnprobe/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "dnprobe/io.hpp"
#include "dnprobe/pde.hpp"
#include "dnprobe/reconstruct.hpp"

namespace dnprobe {

namespace {

using json = nlohmann::ordered_json;

double smooth_bump(double z) { return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0; }

std::string fd(double v) { return format_double(v); }

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::filesystem::path out_file(const CommandContext& ctx, const std::string& name) {
    return ctx.out / (ctx.cfg.prefix + name);
}

void note(const CommandContext& ctx, const std::string& msg) {
    if (ctx.verbose && ctx.log) *ctx.log << msg << "\n";
}

void require_admissible(const ExperimentConfig& c, const MaterialLaw& law, const Grid& g, const std::string& which) {
    std::vector<double> t;
    for (int n = 0; n <= g.steps; ++n) t.push_back(g.time(n));
    const auto rep = check_admissible(law, {c.s_min, c.s_max}, t, c.samples);
    if (rep.pass) return;
    for (const auto& p : rep.predicates)
        if (!p.pass)
            throw MaterialError(which + " law fails " + p.name + " at t=" + fd(p.t) + ", s=" + fd(p.s) +
                                " (value " + fd(p.worst) + ")");
}

void write_summary(const CommandContext& ctx, const std::string& name, json j) {
    j["config_hash"] = ctx.cfg.hash_hex();
    write_atomic(out_file(ctx, name), j.dump(2) + "\n");
}

std::string norm_flag(const ExperimentConfig& c, const Grid& g) { return BoundaryNorm(g, c.norm).flag(); }

}  // namespace

BoundaryField bump_data(const Grid& g, double amplitude) {
    return separable_data(
        g,
        [&](const Vec& x) {
            double p = amplitude;
            for (std::size_t k = 0; k < g.tangential.size(); ++k) {
                const double lo = g.patch.interval[k][0], hi = g.patch.interval[k][1];
                p *= smooth_bump((2.0 * x[g.tangential[k]] - lo - hi) / (hi - lo));
            }
            return p;
        },
        [&](double t) { return smooth_bump((2.0 * t - g.T) / g.T); });
}

int cmd_forward(const CommandContext& ctx) {
    const auto& c = ctx.cfg;
    const Grid g = build_grid(c.grid);
    const MaterialLaw law = c.law_first();
    require_admissible(c, law, g, "first");
    const std::string flag = norm_flag(c, g);

    if (c.mms != "none") {
        if (!c.A.is_identity()) throw PdeError("manufactured solutions need A = Id");
        Manufactured m;
        m.kind = c.mms == "space" ? Manufactured::Kind::space : Manufactured::Kind::time;
        m.dim = g.dim;
        m.lambda = c.forward_lambda;
        GridConfig fine = c.grid;
        if (m.kind == Manufactured::Kind::space) fine.h = c.grid.h / 2;
        else fine.dt = c.grid.dt / 2;
        const auto rows = mms_study(m, law, {c.grid, fine});
        CsvTable t({"h", "dt", "max_error", "order", "seconds"});
        if (ctx.log) *ctx.log << "h\tdt\tmax_error\torder\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::optional<double> order;
            if (i > 0) {
                const double ratio = m.kind == Manufactured::Kind::space ? rows[i - 1].h / rows[i].h
                                                                         : rows[i - 1].dt / rows[i].dt;
                order = std::log(rows[i - 1].error / rows[i].error) / std::log(ratio);
            }
            t.add({fd(rows[i].h), fd(rows[i].dt), fd(rows[i].error), order ? fd(*order) : "", fd(rows[i].seconds)});
            if (ctx.log)
                *ctx.log << rows[i].h << "\t" << rows[i].dt << "\t" << rows[i].error << "\t"
                         << (order ? std::to_string(*order) : std::string("-")) << "\n";
        }
        write_atomic(out_file(ctx, "mms.csv"), t.render(c.hash_hex(), flag));
        return 0;
    }

    const BoundaryField data = c.data == "zero" ? BoundaryField(g) : bump_data(g, c.amplitude);
    SolveStats stats;
    note(ctx, "forward solve");
    const SpaceTimeField u = solve_forward(law, c.A, g, c.forward_lambda, data, nullptr, {}, &stats);
    const FluxRecord flux = nonlinear_flux(u, law, c.A, g);

    std::vector<std::string> cols{"level", "t", "node"};
    for (int a = 0; a < g.dim; ++a) cols.push_back("x" + std::to_string(a));
    cols.push_back("flux");
    CsvTable t(cols);
    for (int n = 0; n < flux.levels; ++n)
        for (std::size_t k = 0; k < flux.nodes.size(); ++k) {
            const Vec x = g.coord(flux.nodes[k]);
            std::vector<std::string> row{std::to_string(n), fd(g.time(n)), std::to_string(flux.nodes[k])};
            for (int a = 0; a < g.dim; ++a) row.push_back(fd(x[a]));
            row.push_back(fd(flux.at(n, k)));
            t.add(row);
        }
    write_atomic(out_file(ctx, "forward_flux.csv"), t.render(c.hash_hex(), flag));
    write_field(out_file(ctx, "forward_u"), u, g, c.hash_hex());
    json j;
    j["summary_of"] = "forward";
    j["norm_flag"] = flag;
    j["lambda"] = c.forward_lambda;
    j["flux_l2"] = flux_l2(flux, g);
    j["newton_iterations"] = stats.newton_iterations;
    j["residual"] = stats.residual;
    write_summary(ctx, "forward.json", j);
    if (ctx.log) *ctx.log << "flux L2 = " << flux_l2(flux, g) << "\n";
    return 0;
}

int cmd_linearize_check(const CommandContext& ctx) {
    const auto& c = ctx.cfg;
    const Grid g = build_grid(c.grid);
    const MaterialLaw law = c.law_first();
    require_admissible(c, law, g, "first");
    const auto rows = linearization_check(law, c.A, g, c.forward_lambda, bump_data(g, c.amplitude), c.k_list);
    CsvTable t({"k", "d_k", "ratio_d2k_dk", "diverged", "note"});
    json ratios = json::array();
    for (const auto& r : rows) {
        std::optional<double> ratio;
        for (const auto& q : rows)
            if (q.k == 2 * r.k && !q.diverged && !r.diverged && r.d > 0.0) ratio = q.d / r.d;
        t.add({fd(r.k), r.diverged ? "nan" : fd(r.d), ratio ? fd(*ratio) : "", r.diverged ? "1" : "0", r.note});
        ratios.push_back({{"k", r.k}, {"d_k", r.diverged ? json(nullptr) : json(r.d)}, {"ratio", nullable(ratio)}});
        if (ctx.log)
            *ctx.log << "k=" << r.k << "  d_k=" << (r.diverged ? std::string("diverged") : fd(r.d))
                     << (ratio ? "  d_2k/d_k=" + fd(*ratio) : std::string()) << "\n";
    }
    const std::string flag = norm_flag(c, g);
    write_atomic(out_file(ctx, "linearize.csv"), t.render(c.hash_hex(), flag));
    json j;
    j["summary_of"] = "linearize-check";
    j["norm_flag"] = flag;
    j["linear_law"] = law.linear();
    j["rows"] = ratios;
    write_summary(ctx, "linearize.json", j);
    return 0;
}

int cmd_probe(const CommandContext& ctx, Target target) {
    const auto& c = ctx.cfg;
    if (c.tau_list.empty()) throw ConfigError("sweep.tau_list is required for probe commands");
    const Grid g = build_grid(c.grid);
    const LawPair pair{c.law_first(), c.law_second()};
    require_admissible(c, pair.first, g, "first");
    require_admissible(c, pair.second, g, "second");
    note(ctx, "tau sweep over " + std::to_string(c.tau_list.size()) + " points");
    const ReconstructionReport r = tau_sweep(pair, c.A, g, c.sweep(target));
    const std::string name = "probe_" + target_name(target);
    CsvTable t({"target", "t0", "lambda", "tau", "estimate", "pairing", "energy"});
    for (std::size_t i = 0; i < r.tau_sequence.size(); ++i)
        t.add({target_name(target), fd(r.t0), fd(r.lambda), fd(r.tau_sequence[i]), fd(r.raw_estimates[i]),
               fd(r.pairings[i]), fd(r.energies[i])});
    write_atomic(out_file(ctx, name + ".csv"), t.render(c.hash_hex(), r.norm_flag));
    json j;
    j["summary_of"] = name;
    j["target"] = target_name(target);
    j["t0"] = r.t0;
    j["lambda"] = r.lambda;
    j["norm_flag"] = r.norm_flag;
    j["pairing"] = c.pairing == Pairing::weak ? "weak" : "strong";
    j["reference_value"] = nullable(r.reference_value);
    j["finest_estimate"] = r.raw_estimates.back();
    j["extrapolated_value"] = r.extrapolated_value;
    j["extrapolated"] = r.extrapolated;
    j["extrapolation_note"] = r.extrapolation_note;
    j["psi_extrapolated"] = nullable(r.psi_extrapolated);
    j["fitted_rate"] = nullable(r.fitted_rate);
    j["rate_note"] = r.rate_note;
    j["oracle_corrected"] = r.oracle_corrected;
    if (target == Target::rho) {
        std::vector<double> t_grid;
        for (int n = 0; n <= g.steps; ++n) t_grid.push_back(g.time(n));
        const auto im = check_interior_max(pair.first, pair.second, r.lambda, t_grid);
        j["interior_max"] = im.status == InteriorMax::Status::interior              ? "interior"
                            : im.status == InteriorMax::Status::boundary_violation ? "boundary_violation"
                                                                                   : "degenerate_zero";
        j["interior_max_t"] = im.t;
    }
    write_summary(ctx, name + ".json", j);
    if (ctx.log) {
        *ctx.log << "tau\testimate\n";
        for (std::size_t i = 0; i < r.tau_sequence.size(); ++i)
            *ctx.log << r.tau_sequence[i] << "\t" << fd(r.raw_estimates[i]) << "\n";
        *ctx.log << "extrapolated " << fd(r.extrapolated_value)
                 << (r.extrapolated ? "" : " (raw finest: " + r.extrapolation_note + ")") << "\n";
        if (r.reference_value) *ctx.log << "reference " << fd(*r.reference_value) << "\n";
        *ctx.log << "rate " << (r.fitted_rate ? fd(*r.fitted_rate) : r.rate_note) << "\n";
    }
    return 0;
}

int cmd_stability(const CommandContext& ctx, Target target) {
    const auto& c = ctx.cfg;
    if (c.gamma1 || c.rho1) throw ConfigError("stability uses law1 = law2 + eps*(dgamma, drho); drop gamma1/rho1");
    if (c.tau_list.empty()) throw ConfigError("sweep.tau_list is required for stability");
    const Grid g = build_grid(c.grid);
    const LawFamily fam = c.family();
    require_admissible(c, fam.base, g, "second");
    for (double e : c.eps_list) require_admissible(c, fam.at(e), g, "first (eps=" + fd(e) + ")");
    const StabilityReport rep = stability_experiment(fam, c.A, g, c.stability(target));
    const std::string name = "stability_" + target_name(target);
    CsvTable t({"eps", "eta", "true_diff", "reconstructed", "finest", "dropped", "holder_ok", "note"});
    json rows = json::array();
    for (const auto& r : rep.rows) {
        t.add({fd(r.eps), fd(r.eta), fd(r.true_diff), fd(r.reconstructed), fd(r.finest), r.dropped ? "1" : "0",
               r.holder_ok ? "1" : "0", r.note});
        rows.push_back({{"eps", r.eps}, {"eta", r.eta}, {"true_diff", r.true_diff}, {"reconstructed", r.reconstructed},
                        {"dropped", r.dropped}, {"holder_ok", r.holder_ok}});
        if (ctx.log)
            *ctx.log << "eps=" << r.eps << "  eta=" << fd(r.eta) << "  diff=" << fd(r.true_diff)
                     << "  recovered=" << fd(r.reconstructed) << (r.dropped ? "  dropped: " + r.note : "") << "\n";
    }
    write_atomic(out_file(ctx, name + ".csv"), t.render(c.hash_hex(), rep.norm_flag));
    json j;
    j["summary_of"] = name;
    j["target"] = target_name(target);
    j["norm_flag"] = rep.norm_flag;
    j["dictionary_size"] = rep.dictionary_size;
    j["slope"] = nullable(rep.slope);
    j["holder_c"] = nullable(rep.holder_c);
    j["holder_ok"] = rep.holder_ok;
    j["rows"] = rows;
    write_summary(ctx, name + ".json", j);
    if (ctx.log) {
        if (rep.slope) *ctx.log << "slope of diff vs eta: " << fd(*rep.slope) << "\n";
        if (rep.holder_c) *ctx.log << "holder C = " << fd(*rep.holder_c) << (rep.holder_ok ? " (all rows hold)" : " (violated)") << "\n";
    }
    return 0;
}

int cmd_report(const std::filesystem::path& dir, std::ostream& log) {
    if (!std::filesystem::is_directory(dir)) throw std::runtime_error("no output directory '" + dir.string() + "'");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    json all = json::object();
    for (const auto& f : files) {
        std::ifstream in(f);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception&) {
            continue;
        }
        if (!j.is_object() || !j.contains("summary_of")) continue;
        log << f.filename().string() << "\n";
        for (const auto& [k, v] : j.items()) {
            if (v.is_array()) continue;
            log << "  " << k << " = " << v.dump() << "\n";
        }
        all[f.filename().string()] = j;
    }
    write_atomic(dir / "report.json", all.dump(2) + "\n");
    return 0;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Partial parabolic DN map lab with singular boundary probes"};
    app.require_subcommand(1);
    std::string config_path, out_dir, target_text;
    bool verbose = false;
    auto common = [&](CLI::App* s, bool with_target) {
        s->add_option("-c,--config", config_path, "experiment config (INI)")->required();
        s->add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
        s->add_flag("-v,--verbose", verbose, "progress messages");
        if (with_target) s->add_option("--target", target_text, "gamma or rho (default probe.kind)");
    };
    auto* fwd = app.add_subcommand("forward", "forward solve or manufactured-solution study");
    common(fwd, false);
    auto* lin = app.add_subcommand("linearize-check", "Frechet remainder decay table");
    common(lin, false);
    auto* pg = app.add_subcommand("probe-gamma", "tau sweep recovering gamma differences");
    common(pg, false);
    auto* pr = app.add_subcommand("probe-rho", "tau sweep recovering rho differences");
    common(pr, false);
    auto* st = app.add_subcommand("stability", "eps sweep against the DN-difference surrogate");
    common(st, true);
    auto* rp = app.add_subcommand("report", "collect summaries from an output directory");
    rp->add_option("-o,--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (rp->parsed()) return cmd_report(out_dir, out);
        CommandContext ctx;
        ctx.cfg = load_config(config_path);
        ctx.out = out_dir.empty() ? std::filesystem::path(ctx.cfg.out_dir) : std::filesystem::path(out_dir);
        ctx.verbose = verbose;
        ctx.log = &out;
        if (fwd->parsed()) return cmd_forward(ctx);
        if (lin->parsed()) return cmd_linearize_check(ctx);
        if (pg->parsed()) return cmd_probe(ctx, Target::gamma);
        if (pr->parsed()) return cmd_probe(ctx, Target::rho);
        Target t = ctx.cfg.target;
        if (!target_text.empty()) {
            try {
                t = parse_target(target_text);
            } catch (const std::exception&) {
                throw ConfigError("--target must be gamma or rho");
            }
        }
        return cmd_stability(ctx, t);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace dnprobe
