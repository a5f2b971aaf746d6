#include "dnprobe/material.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace dnprobe {

double LawTerm::value(double t, double s) const {
    switch (kind) {
        case Kind::constant: return p[0];
        case Kind::affine_t: return p[0] + p[1] * t;
        case Kind::trig_t: return p[0] + p[1] * std::sin(p[2] * t + p[3]);
        case Kind::gauss_s: {
            const double z = (s - p[2]) / p[3];
            return p[0] + p[1] * std::exp(-0.5 * z * z);
        }
        case Kind::poly_s: return p[0] + p[1] * s + p[2] * s * s;
    }
    return 0.0;
}

double LawTerm::d_dt(double t, double) const {
    switch (kind) {
        case Kind::affine_t: return p[1];
        case Kind::trig_t: return p[1] * p[2] * std::cos(p[2] * t + p[3]);
        default: return 0.0;
    }
}

double LawTerm::d_ds(double, double s) const {
    switch (kind) {
        case Kind::gauss_s: {
            const double z = (s - p[2]) / p[3];
            return -p[1] * z / p[3] * std::exp(-0.5 * z * z);
        }
        case Kind::poly_s: return p[1] + 2.0 * p[2] * s;
        default: return 0.0;
    }
}

ScalarLaw ScalarLaw::constant(double c) { return ScalarLaw({{LawTerm::Kind::constant, {c, 0, 0, 0}}}); }
ScalarLaw ScalarLaw::affine_t(double c0, double c1) { return ScalarLaw({{LawTerm::Kind::affine_t, {c0, c1, 0, 0}}}); }
ScalarLaw ScalarLaw::trig_t(double c0, double amp, double omega, double phase) {
    return ScalarLaw({{LawTerm::Kind::trig_t, {c0, amp, omega, phase}}});
}
ScalarLaw ScalarLaw::gauss_s(double c0, double amp, double s0, double width) {
    if (!(width > 0.0)) throw MaterialError("gauss_s width must be positive");
    return ScalarLaw({{LawTerm::Kind::gauss_s, {c0, amp, s0, width}}});
}
ScalarLaw ScalarLaw::poly_s(double c0, double c1, double c2) { return ScalarLaw({{LawTerm::Kind::poly_s, {c0, c1, c2, 0}}}); }

ScalarLaw ScalarLaw::parse(const std::string& text) {
    std::vector<LawTerm> terms;
    std::istringstream in(text);
    std::string tok;
    std::vector<std::string> words;
    while (in >> tok) words.push_back(tok);
    std::size_t i = 0;
    auto number = [&](const std::string& w) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(w, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != w.size()) throw MaterialError("bad number '" + w + "' in law '" + text + "'");
        return v;
    };
    while (i < words.size()) {
        const std::string name = words[i++];
        std::vector<double> args;
        while (i < words.size() && words[i] != "+") args.push_back(number(words[i++]));
        if (i < words.size()) ++i;  // skip '+'
        auto need = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi)
                throw MaterialError("law '" + name + "' takes " + std::to_string(lo) + (lo == hi ? "" : "-" + std::to_string(hi)) + " parameters");
        };
        ScalarLaw one;
        if (name == "constant") { need(1, 1); one = constant(args[0]); }
        else if (name == "affine_t") { need(2, 2); one = affine_t(args[0], args[1]); }
        else if (name == "trig_t") { need(3, 4); one = trig_t(args[0], args[1], args[2], args.size() > 3 ? args[3] : 0.0); }
        else if (name == "gauss_s") { need(4, 4); one = gauss_s(args[0], args[1], args[2], args[3]); }
        else if (name == "poly_s") { need(1, 3); args.resize(3, 0.0); one = poly_s(args[0], args[1], args[2]); }
        else throw MaterialError("unknown law '" + name + "'");
        terms.insert(terms.end(), one.terms_.begin(), one.terms_.end());
    }
    if (terms.empty()) throw MaterialError("empty law");
    return ScalarLaw(std::move(terms));
}

double ScalarLaw::operator()(double t, double s) const {
    double v = 0.0;
    for (const auto& term : terms_) v += term.value(t, s);
    return v;
}
double ScalarLaw::d_dt(double t, double s) const {
    double v = 0.0;
    for (const auto& term : terms_) v += term.d_dt(t, s);
    return v;
}
double ScalarLaw::d_ds(double t, double s) const {
    double v = 0.0;
    for (const auto& term : terms_) v += term.d_ds(t, s);
    return v;
}

bool ScalarLaw::s_independent() const {
    for (const auto& term : terms_) {
        if (term.kind == LawTerm::Kind::gauss_s && term.p[1] != 0.0) return false;
        if (term.kind == LawTerm::Kind::poly_s && (term.p[1] != 0.0 || term.p[2] != 0.0)) return false;
    }
    return true;
}

ScalarLaw ScalarLaw::operator+(const ScalarLaw& o) const {
    std::vector<LawTerm> t = terms_;
    t.insert(t.end(), o.terms_.begin(), o.terms_.end());
    return ScalarLaw(std::move(t));
}

ScalarLaw ScalarLaw::scaled(double c) const {
    std::vector<LawTerm> t = terms_;
    for (auto& term : t) {
        switch (term.kind) {
            case LawTerm::Kind::constant: term.p[0] *= c; break;
            case LawTerm::Kind::affine_t: term.p[0] *= c; term.p[1] *= c; break;
            case LawTerm::Kind::trig_t: term.p[0] *= c; term.p[1] *= c; break;
            case LawTerm::Kind::gauss_s: term.p[0] *= c; term.p[1] *= c; break;
            case LawTerm::Kind::poly_s: term.p[0] *= c; term.p[1] *= c; term.p[2] *= c; break;
        }
    }
    return ScalarLaw(std::move(t));
}

std::string ScalarLaw::describe() const {
    static const char* names[] = {"constant", "affine_t", "trig_t", "gauss_s", "poly_s"};
    static const int nargs[] = {1, 2, 4, 4, 3};
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i) os << " + ";
        const int k = static_cast<int>(terms_[i].kind);
        os << names[k];
        for (int j = 0; j < nargs[k]; ++j) os << ' ' << terms_[i].p[j];
    }
    return os.str();
}

MatrixField::MatrixField() {
    for (int i = 0; i < 3; ++i) a_[i][i] = 1.0;
}

MatrixField MatrixField::constant(const Mat& a) {
    MatrixField m;
    m.a_ = a;
    m.diagonal_ = true;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j && a[i][j] != 0.0) m.diagonal_ = false;
    std::ostringstream os;
    os.precision(17);
    os << "full";
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) os << ' ' << a[i][j];
    m.text_ = os.str();
    return m;
}

MatrixField MatrixField::scalar(double c) {
    Mat a{};
    for (int i = 0; i < 3; ++i) a[i][i] = c;
    MatrixField m = constant(a);
    std::ostringstream os;
    os.precision(17);
    os << "scalar " << c;
    m.text_ = os.str();
    return m;
}

MatrixField MatrixField::diagonal(const Vec& d) {
    Mat a{};
    for (int i = 0; i < 3; ++i) a[i][i] = d[i];
    MatrixField m = constant(a);
    std::ostringstream os;
    os.precision(17);
    os << "diag " << d[0] << ' ' << d[1] << ' ' << d[2];
    m.text_ = os.str();
    return m;
}

MatrixField MatrixField::variable(std::function<Mat(const Vec&)> fn, bool diagonal_only) {
    MatrixField m;
    m.fn_ = std::move(fn);
    m.diagonal_ = diagonal_only;
    m.text_ = "variable";
    return m;
}

MatrixField MatrixField::parse(const std::string& text, int dim) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    if (!in.eof()) throw MaterialError("bad matrix '" + text + "'");
    if (kind == "identity" && v.empty()) return MatrixField();
    if (kind == "scalar" && v.size() == 1) return scalar(v[0]);
    if (kind == "diag" && v.size() == static_cast<std::size_t>(dim)) {
        Vec d{1, 1, 1};
        for (int i = 0; i < dim; ++i) d[i] = v[i];
        return diagonal(d);
    }
    if (kind == "full") {
        Mat a{};
        a[2][2] = 1.0;
        if (dim == 2 && v.size() == 3) {
            a[0][0] = v[0]; a[0][1] = a[1][0] = v[1]; a[1][1] = v[2];
        } else if (dim == 3 && v.size() == 6) {
            a[0][0] = v[0]; a[0][1] = a[1][0] = v[1]; a[0][2] = a[2][0] = v[2];
            a[1][1] = v[3]; a[1][2] = a[2][1] = v[4]; a[2][2] = v[5];
        } else {
            throw MaterialError("full matrix needs the upper triangle (3 entries in 2D, 6 in 3D)");
        }
        return constant(a);
    }
    throw MaterialError("bad matrix '" + text + "'");
}

bool MatrixField::is_identity() const {
    if (fn_) return false;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (a_[i][j] != (i == j ? 1.0 : 0.0)) return false;
    return true;
}

const Mat& MatrixField::value() const {
    if (fn_) throw MaterialError("variable coefficient matrix has no single value");
    return a_;
}

double MatrixField::check_elliptic(int dim, int samples, unsigned seed) const {
    std::mt19937_64 rng(seed);
    auto uni = [&] { return (rng() >> 11) * 0x1.0p-53; };
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        Vec x{0, 0, 0}, xi{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            x[a] = uni();
            xi[a] = 2.0 * uni() - 1.0;
        }
        const Mat A = at(x);
        double q = 0.0, n2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            n2 += xi[i] * xi[i];
            for (int j = 0; j < dim; ++j) {
                if (std::abs(A[i][j] - A[j][i]) > 1e-14 * (std::abs(A[i][j]) + 1.0))
                    throw MaterialError("coefficient matrix is not symmetric");
                q += xi[i] * A[i][j] * xi[j];
            }
        }
        if (n2 > 0.0) worst = std::min(worst, q / n2);
    }
    if (!(worst > 0.0)) throw MaterialError("coefficient matrix is not elliptic on the samples");
    return worst;
}

std::vector<double> uniform_samples(double lo, double hi, int count) {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
    return v;
}

AdmissibilityReport check_admissible(const MaterialLaw& law, std::array<double, 2> s_range,
                                     const std::vector<double>& t_grid, int s_samples, bool check_kappa) {
    AdmissibilityReport rep;
    PredicateResult pg{"gamma_floor", true, std::numeric_limits<double>::infinity(), 0, 0};
    PredicateResult pr{"rho_floor", true, std::numeric_limits<double>::infinity(), 0, 0};
    PredicateResult pk{"rho_dt_cap", true, -std::numeric_limits<double>::infinity(), 0, 0};
    const auto s_grid = uniform_samples(s_range[0], s_range[1], s_samples);
    for (double s : s_grid) {
        const double floor = law.m_floor(0.0, s);
        const double cap = law.kappa_cap(0.0, s);
        for (double t : t_grid) {
            const double g = law.gamma(t, s), r = law.rho(t, s);
            if (g < pg.worst) { pg.worst = g; pg.t = t; pg.s = s; }
            if (r < pr.worst) { pr.worst = r; pr.t = t; pr.s = s; }
            if (!(g >= floor && g > 0.0)) pg.pass = false;
            if (!(r >= floor && r > 0.0)) pr.pass = false;
            const double dr = law.d_rho_dt(t, s);
            if (dr > pk.worst) { pk.worst = dr; pk.t = t; pk.s = s; }
            if (check_kappa && !(dr <= cap)) pk.pass = false;
        }
    }
    rep.floor = std::min(pg.worst, pr.worst);
    rep.predicates = {pg, pr};
    if (check_kappa) rep.predicates.push_back(pk);
    for (const auto& p : rep.predicates) rep.pass = rep.pass && p.pass;
    return rep;
}

InteriorMax check_interior_max(const MaterialLaw& a, const MaterialLaw& b, double lambda,
                               const std::vector<double>& t_grid) {
    if (t_grid.size() < 3) throw MaterialError("t_grid needs at least 3 samples");
    std::vector<double> d(t_grid.size());
    double mx = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        d[i] = std::abs(a.rho(t_grid[i], lambda) - b.rho(t_grid[i], lambda));
        mx = std::max(mx, d[i]);
    }
    InteriorMax out;
    out.value = mx;
    if (mx == 0.0) {
        out.status = InteriorMax::Status::degenerate_zero;
        out.t = t_grid[t_grid.size() / 2];
        return out;
    }
    const double tol = 1e-14 * mx;
    for (std::size_t i = 1; i + 1 < t_grid.size(); ++i) {
        if (d[i] >= mx - tol) {
            out.status = InteriorMax::Status::interior;
            out.t = t_grid[i];
            return out;
        }
    }
    out.status = InteriorMax::Status::boundary_violation;
    out.t = d.front() >= d.back() ? t_grid.front() : t_grid.back();
    return out;
}

}  // namespace dnprobe
