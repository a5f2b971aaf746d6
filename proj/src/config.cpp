#include "dnprobe/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dnprobe {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double parse_number(const std::string& raw) {
    const std::string s = boost::algorithm::trim_copy(raw);
    auto one = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw ConfigError("not a number: '" + raw + "'");
        }
        if (used != t.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + raw + "'");
        return v;
    };
    const auto slash = s.find('/');
    if (slash == std::string::npos) return one(s);
    const double den = one(boost::algorithm::trim_copy(s.substr(slash + 1)));
    if (den == 0.0) throw ConfigError("zero denominator in '" + raw + "'");
    return one(boost::algorithm::trim_copy(s.substr(0, slash))) / den;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, s, boost::algorithm::is_any_of(", \t"), boost::algorithm::token_compress_on);
    std::vector<double> out;
    for (const auto& p : parts)
        if (!p.empty()) out.push_back(parse_number(p));
    return out;
}

namespace {

using Section = std::map<std::string, std::string>;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"grid", {"dim", "h", "dt", "T", "patch", "pad"}},
        {"material",
         {"gamma1", "rho1", "gamma2", "rho2", "dgamma", "drho", "eps", "A", "floor", "kappa", "s_min", "s_max",
          "samples"}},
        {"probe", {"x0", "t0", "lambda", "kind", "r", "a_rule", "shape", "tau0", "pairing", "convention"}},
        {"norm", {"kind", "dictionary_size"}},
        {"sweep", {"tau_list", "eps_list", "k_list"}},
        {"forward", {"lambda", "data", "amplitude", "mms"}},
        {"output", {"dir", "prefix"}},
        {"run", {"seed"}},
    };
    return s;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
    return s;
}

int as_int(const std::string& key, const std::string& v) {
    const double d = parse_number(v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key + " must be an integer");
    return static_cast<int>(d);
}

ScalarLaw as_law(const std::string& key, const std::string& v) {
    try {
        return ScalarLaw::parse(v);
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

Patch parse_patch(const std::string& v) {
    std::vector<std::string> parts;
    const std::string t = boost::algorithm::trim_copy(v);
    boost::algorithm::split(parts, t, boost::algorithm::is_any_of(" \t,"), boost::algorithm::token_compress_on);
    if (parts.empty() || parts[0].empty()) throw ConfigError("patch: empty");
    Patch p;
    try {
        p.face = parse_face(parts[0]);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("patch: ") + e.what());
    }
    if ((parts.size() - 1) % 2 != 0) throw ConfigError("patch: intervals need lo hi pairs");
    for (std::size_t i = 1; i + 1 < parts.size(); i += 2) p.interval.push_back({parse_number(parts[i]), parse_number(parts[i + 1])});
    return p;
}

std::string patch_text(const Patch& p) {
    std::string s = face_name(p.face);
    for (const auto& iv : p.interval) s += " " + num(iv[0]) + " " + num(iv[1]);
    return s;
}

}  // namespace

MaterialLaw ExperimentConfig::law_second() const {
    MaterialLaw m;
    m.gamma_law = gamma2;
    m.rho_law = rho2;
    m.m_floor = ScalarLaw::constant(floor);
    m.kappa_cap = ScalarLaw::constant(kappa);
    return m;
}

MaterialLaw ExperimentConfig::law_first() const {
    MaterialLaw m = family().at(eps);
    if (gamma1) m.gamma_law = *gamma1;
    if (rho1) m.rho_law = *rho1;
    return m;
}

LawFamily ExperimentConfig::family() const {
    LawFamily f;
    f.base = law_second();
    f.dgamma = dgamma;
    f.drho = drho;
    return f;
}

std::string ExperimentConfig::hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

SweepSettings ExperimentConfig::sweep(Target t) const {
    SweepSettings s;
    s.target = t;
    s.x0 = x0;
    s.t0 = t0;
    s.lambda = lambda;
    s.cut.kind = t == Target::gamma ? ProbeKind::gamma : ProbeKind::rho;
    s.cut.r = r;
    s.cut.rule = a_rule;
    s.cut.shape = shape;
    s.tau0 = tau0;
    s.taus = tau_list;
    s.rec.pairing = pairing;
    s.rec.convention = convention;
    s.norm = norm;
    return s;
}

StabilitySettings ExperimentConfig::stability(Target t) const {
    StabilitySettings s;
    s.sweep = sweep(t);
    s.eps_list = eps_list;
    s.random_bumps = dictionary_size;
    s.seed = seed;
    return s;
}

ExperimentConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    std::map<std::string, Section> sec;
    for (const auto& [name, body] : tree) {
        const auto it = schema().find(name);
        if (it == schema().end()) {
            if (body.empty() && !body.data().empty()) throw ConfigError("unknown key '" + name + "' outside a section");
            throw ConfigError("unknown section '" + name + "'");
        }
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw ConfigError("unknown key '" + name + "." + key + "'");
            sec[name][key] = value.get_value<std::string>();
        }
    }
    auto get = [&](const std::string& s, const std::string& k) -> std::optional<std::string> {
        const auto a = sec.find(s);
        if (a == sec.end()) return std::nullopt;
        const auto b = a->second.find(k);
        if (b == a->second.end()) return std::nullopt;
        return boost::algorithm::trim_copy(b->second);
    };
    auto number = [&](const std::string& s, const std::string& k, double& dst) {
        if (auto v = get(s, k)) {
            try {
                dst = parse_number(*v);
            } catch (const ConfigError& e) {
                throw ConfigError(s + "." + k + ": " + e.what());
            }
        }
    };

    ExperimentConfig c;
    if (auto v = get("grid", "dim")) c.grid.dim = as_int("grid.dim", *v);
    number("grid", "h", c.grid.h);
    number("grid", "dt", c.grid.dt);
    number("grid", "T", c.grid.T);
    number("grid", "pad", c.grid.pad);
    if (auto v = get("grid", "patch")) c.grid.patch = parse_patch(*v);

    Grid g;
    try {
        g = build_grid(c.grid);
    } catch (const GeometryError& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
    c.grid.patch = g.patch;
    c.grid.pad = g.pad_cells * g.h;

    if (auto v = get("material", "gamma2")) c.gamma2 = as_law("material.gamma2", *v);
    if (auto v = get("material", "rho2")) c.rho2 = as_law("material.rho2", *v);
    if (auto v = get("material", "gamma1")) c.gamma1 = as_law("material.gamma1", *v);
    if (auto v = get("material", "rho1")) c.rho1 = as_law("material.rho1", *v);
    if (auto v = get("material", "dgamma")) c.dgamma = as_law("material.dgamma", *v);
    if (auto v = get("material", "drho")) c.drho = as_law("material.drho", *v);
    number("material", "eps", c.eps);
    if (auto v = get("material", "A")) {
        try {
            c.A = MatrixField::parse(*v, c.grid.dim);
            if (!(c.A.check_elliptic(c.grid.dim) > 0.0)) throw ConfigError("material.A is not elliptic");
        } catch (const MaterialError& e) {
            throw ConfigError(std::string("material.A: ") + e.what());
        }
    }
    number("material", "floor", c.floor);
    number("material", "kappa", c.kappa);
    number("material", "s_min", c.s_min);
    number("material", "s_max", c.s_max);
    if (auto v = get("material", "samples")) c.samples = as_int("material.samples", *v);
    if (!(c.s_min <= c.s_max)) throw ConfigError("material: s_min must not exceed s_max");
    if (c.samples < 2) throw ConfigError("material.samples must be at least 2");

    // default probe point: centre of S
    c.x0 = {0, 0, 0};
    c.x0[g.axis] = g.side == 0 ? 0.0 : 1.0;
    for (std::size_t k = 0; k < g.tangential.size(); ++k)
        c.x0[g.tangential[k]] = 0.5 * (g.patch.interval[k][0] + g.patch.interval[k][1]);
    if (auto v = get("probe", "x0")) {
        const auto p = parse_list(*v);
        if (static_cast<int>(p.size()) != c.grid.dim) throw ConfigError("probe.x0 needs dim coordinates");
        c.x0 = {0, 0, 0};
        for (std::size_t a = 0; a < p.size(); ++a) c.x0[a] = p[a];
    }
    if (!g.in_patch(c.x0)) throw ConfigError("probe.x0 must lie in the open patch S");
    c.t0 = 0.5 * c.grid.T;
    number("probe", "t0", c.t0);
    number("probe", "lambda", c.lambda);
    if (auto v = get("probe", "kind")) {
        try {
            c.target = parse_target(*v);
        } catch (const std::exception&) {
            throw ConfigError("probe.kind must be gamma or rho");
        }
    }
    number("probe", "r", c.r);
    if (auto v = get("probe", "a_rule")) {
        std::vector<std::string> parts;
        boost::algorithm::split(parts, *v, boost::algorithm::is_space(), boost::algorithm::token_compress_on);
        if (parts.size() != 2 || (parts[0] != "log" && parts[0] != "power"))
            throw ConfigError("probe.a_rule must be 'log p' or 'power p'");
        ScaleRule rule;
        rule.kind = parts[0] == "log" ? ScaleRule::Kind::log : ScaleRule::Kind::power;
        rule.p = parse_number(parts[1]);
        c.a_rule = rule;
    }
    if (auto v = get("probe", "shape")) {
        if (*v == "standard") c.shape = BumpShape::standard;
        else if (*v == "skewed") c.shape = BumpShape::skewed;
        else throw ConfigError("probe.shape must be standard or skewed");
    }
    if (auto v = get("probe", "tau0")) c.tau0 = parse_number(*v);
    if (auto v = get("probe", "pairing")) {
        if (*v == "weak") c.pairing = Pairing::weak;
        else if (*v == "strong") c.pairing = Pairing::strong;
        else throw ConfigError("probe.pairing must be weak or strong");
    }
    number("probe", "convention", c.convention);
    if (!(c.convention > 0.0)) throw ConfigError("probe.convention must be positive");

    if (auto v = get("norm", "kind")) {
        if (*v == "spectral") c.norm = BoundaryNorm::Kind::spectral;
        else if (*v == "l2") c.norm = BoundaryNorm::Kind::l2;
        else throw ConfigError("norm.kind must be spectral or l2");
    }
    if (auto v = get("norm", "dictionary_size")) c.dictionary_size = as_int("norm.dictionary_size", *v);
    if (c.dictionary_size < 0) throw ConfigError("norm.dictionary_size must be non-negative");

    if (auto v = get("sweep", "tau_list")) c.tau_list = parse_list(*v);
    if (auto v = get("sweep", "eps_list")) c.eps_list = parse_list(*v);
    if (auto v = get("sweep", "k_list")) c.k_list = parse_list(*v);
    for (double k : c.k_list)
        if (!(k > 0.0)) throw ConfigError("sweep.k_list entries must be positive");

    number("forward", "lambda", c.forward_lambda);
    if (auto v = get("forward", "data")) {
        if (*v != "zero" && *v != "bump") throw ConfigError("forward.data must be zero or bump");
        c.data = *v;
    }
    number("forward", "amplitude", c.amplitude);
    if (auto v = get("forward", "mms")) {
        if (*v != "none" && *v != "space" && *v != "time") throw ConfigError("forward.mms must be none, space or time");
        c.mms = *v;
    }

    if (auto v = get("output", "dir")) c.out_dir = *v;
    if (auto v = get("output", "prefix")) c.prefix = *v;
    if (auto v = get("run", "seed")) {
        const double d = parse_number(*v);
        if (d < 0 || d != std::floor(d)) throw ConfigError("run.seed must be a non-negative integer");
        c.seed = static_cast<std::uint64_t>(d);
    }

    std::ostringstream o;
    o << "[grid]\ndim=" << c.grid.dim << "\nh=" << num(c.grid.h) << "\ndt=" << num(c.grid.dt) << "\nT=" << num(c.grid.T)
      << "\npatch=" << patch_text(c.grid.patch) << "\npad=" << num(c.grid.pad) << "\n";
    o << "[material]\ngamma2=" << c.gamma2.describe() << "\nrho2=" << c.rho2.describe()
      << "\ngamma1=" << (c.gamma1 ? c.gamma1->describe() : "-") << "\nrho1=" << (c.rho1 ? c.rho1->describe() : "-")
      << "\ndgamma=" << c.dgamma.describe() << "\ndrho=" << c.drho.describe() << "\neps=" << num(c.eps)
      << "\nA=" << c.A.describe() << "\nfloor=" << num(c.floor) << "\nkappa=" << num(c.kappa)
      << "\ns_min=" << num(c.s_min) << "\ns_max=" << num(c.s_max) << "\nsamples=" << c.samples << "\n";
    o << "[probe]\nx0=" << list({c.x0.begin(), c.x0.begin() + c.grid.dim}) << "\nt0=" << num(c.t0)
      << "\nlambda=" << num(c.lambda) << "\nkind=" << target_name(c.target) << "\nr=" << num(c.r) << "\na_rule="
      << (c.a_rule ? std::string(c.a_rule->kind == ScaleRule::Kind::log ? "log " : "power ") + num(c.a_rule->p) : "-")
      << "\nshape=" << (c.shape == BumpShape::standard ? "standard" : "skewed")
      << "\ntau0=" << (c.tau0 ? num(*c.tau0) : "-") << "\npairing=" << (c.pairing == Pairing::weak ? "weak" : "strong")
      << "\nconvention=" << num(c.convention) << "\n";
    o << "[norm]\nkind=" << (c.norm == BoundaryNorm::Kind::spectral ? "spectral" : "l2")
      << "\ndictionary_size=" << c.dictionary_size << "\n";
    o << "[sweep]\ntau_list=" << list(c.tau_list) << "\neps_list=" << list(c.eps_list) << "\nk_list=" << list(c.k_list)
      << "\n";
    o << "[forward]\nlambda=" << num(c.forward_lambda) << "\ndata=" << c.data << "\namplitude=" << num(c.amplitude)
      << "\nmms=" << c.mms << "\n";
    o << "[run]\nseed=" << c.seed << "\n";
    c.canonical = o.str();
    c.hash = fnv1a64(c.canonical);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return parse_config(s.str());
}

}  // namespace dnprobe
