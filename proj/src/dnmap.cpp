#include "dnprobe/dnmap.hpp"

#include <cmath>
#include <random>

#include "dnprobe/stencil.hpp"
#include "dnprobe/workers.hpp"

namespace dnprobe {

FluxRecord& FluxRecord::operator-=(const FluxRecord& o) {
    if (o.values.size() != values.size()) throw std::invalid_argument("flux record shape mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

FluxRecord& FluxRecord::operator*=(double c) {
    for (double& v : values) v *= c;
    return *this;
}

FluxRecord operator-(FluxRecord a, const FluxRecord& b) { return a -= b; }

namespace {

template <class GammaAt>
FluxRecord flux_impl(const SpaceTimeField& u, const MatrixField& A, const Grid& g, GammaAt&& gamma_at) {
    FluxRecord f;
    f.levels = u.levels;
    f.nodes = g.patch_nodes();
    f.values.assign(f.levels * f.nodes.size(), 0.0);
    const int s = g.side == 0 ? 1 : -1;  // inward step along the normal axis
    for (std::size_t k = 0; k < f.nodes.size(); ++k) {
        const std::size_t node = f.nodes[k];
        const auto m = g.multi(node);
        auto shifted = [&](int axis, int step) {
            auto mm = m;
            mm[axis] += step;
            return g.id(mm);
        };
        const std::size_t n1 = shifted(g.axis, s), n2 = shifted(g.axis, 2 * s);
        const Mat Am = A.at(g.coord(node));
        Vec Anu{0, 0, 0};
        for (int a = 0; a < g.dim; ++a)
            for (int b = 0; b < g.dim; ++b) Anu[b] += g.normal[a] * Am[a][b];
        for (int n = 0; n < u.levels; ++n) {
            Vec grad{0, 0, 0};
            grad[g.axis] = s * (-3.0 * u.at(n, node) + 4.0 * u.at(n, n1) - u.at(n, n2)) / (2.0 * g.h);
            for (int t : g.tangential)
                if (Anu[t] != 0.0) grad[t] = (u.at(n, shifted(t, 1)) - u.at(n, shifted(t, -1))) / (2.0 * g.h);
            double flux = 0.0;
            for (int a = 0; a < g.dim; ++a) flux += Anu[a] * grad[a];
            f.at(n, k) = gamma_at(n, node) * flux;
        }
    }
    return f;
}

}  // namespace

FluxRecord nonlinear_flux(const SpaceTimeField& u, const MaterialLaw& law, const MatrixField& A, const Grid& g) {
    FluxRecord f = flux_impl(u, A, g, [&](int n, std::size_t node) { return law.gamma(g.time(n), u.at(n, node)); });
    f.producer = FluxProducer::nonlinear;
    f.law = law.gamma_law.describe() + " | " + law.rho_law.describe();
    f.lambda = u.levels ? u.at(0, 0) : 0.0;
    return f;
}

FluxRecord linear_flux(const SpaceTimeField& w, const MaterialLaw& law, const MatrixField& A, const Grid& g,
                       double lambda) {
    FluxRecord f = flux_impl(w, A, g, [&](int n, std::size_t) { return law.gamma(g.time(n), lambda); });
    f.producer = FluxProducer::linearized;
    f.law = law.gamma_law.describe() + " | " + law.rho_law.describe();
    f.lambda = lambda;
    return f;
}

BoundaryField as_boundary(const FluxRecord& f, const Grid& g) {
    BoundaryField b(g);
    const auto& bpos = g.boundary_pos();
    for (int n = 0; n < f.levels; ++n)
        for (std::size_t k = 0; k < f.nodes.size(); ++k) b.at(n, bpos[f.nodes[k]]) = f.at(n, k);
    return b;
}

double flux_l2(const FluxRecord& f, const Grid& g) {
    const double sigma = std::pow(g.h, g.dim - 1);
    double s = 0.0;
    for (int n = 1; n < f.levels; ++n)
        for (std::size_t k = 0; k < f.nodes.size(); ++k) s += g.dt * sigma * f.at(n, k) * f.at(n, k);
    return std::sqrt(s);
}

double strong_pairing(const FluxRecord& f, const BoundaryField& h, const Grid& g) {
    const double sigma = std::pow(g.h, g.dim - 1);
    const auto& bpos = g.boundary_pos();
    double s = 0.0;
    for (int n = 1; n < f.levels; ++n)
        for (std::size_t k = 0; k < f.nodes.size(); ++k) s += g.dt * sigma * f.at(n, k) * h.at(n, bpos[f.nodes[k]]);
    return s;
}

SpaceTimeField lift(const BoundaryField& h, const Grid& g) {
    SpaceTimeField E(g, FieldKind::other);
    const HarmonicLifter lifter(g);
    // probe data is a product q(t) p(x); extend the profile once when it is
    int ref = -1;
    double best = 0.0;
    for (int n = 0; n < h.levels; ++n) {
        double s = 0.0;
        for (double v : h.level(n)) s += v * v;
        if (s > best) {
            best = s;
            ref = n;
        }
    }
    if (ref < 0) return E;
    const auto r = h.level(ref);
    std::vector<double> coef(h.levels, 0.0);
    bool separable = true;
    for (int n = 0; n < h.levels && separable; ++n) {
        const auto l = h.level(n);
        double dot = 0.0, nn = 0.0;
        for (std::size_t b = 0; b < h.count; ++b) {
            dot += l[b] * r[b];
            nn += l[b] * l[b];
        }
        coef[n] = dot / best;
        double res = 0.0;
        for (std::size_t b = 0; b < h.count; ++b) res += std::pow(l[b] - coef[n] * r[b], 2);
        if (res > 1e-28 * std::max(nn, 1e-300)) separable = false;
    }
    const auto& bnd = g.boundary();
    if (separable) {
        const auto base = lifter.extend(r);
        for (int n = 0; n < h.levels; ++n) {
            if (coef[n] == 0.0) continue;
            auto lev = E.level(n);
            for (std::size_t i = 0; i < base.size(); ++i) lev[i] = coef[n] * base[i];
            for (std::size_t b = 0; b < bnd.size(); ++b) lev[bnd[b]] = h.at(n, b);
        }
        return E;
    }
    for (int n = 0; n < h.levels; ++n) {
        const auto l = h.level(n);
        bool zero = true;
        for (double v : l) zero = zero && v == 0.0;
        if (zero) continue;
        const auto ext = lifter.extend(l);
        std::copy(ext.begin(), ext.end(), E.level(n).begin());
    }
    return E;
}

double weak_pairing(const SpaceTimeField& w, const SpaceTimeField& E, const MaterialLaw& law, const MatrixField& A,
                    const Grid& g, double lambda) {
    const DirichletForm form(g, A);
    const auto& M = g.mass_weights();
    const int N = g.steps;
    double total = 0.0;
    for (int n = 1; n < N; ++n) {
        const double rn = law.rho(g.time(n), lambda), rn1 = law.rho(g.time(n + 1), lambda);
        const auto wn = w.level(n), En = E.level(n), En1 = E.level(n + 1);
        double s = 0.0;
        for (std::size_t i = 0; i < wn.size(); ++i) s += M[i] * wn[i] * ((rn1 - rn) * En1[i] + rn * (En1[i] - En[i]));
        total -= s;
    }
    for (int n = 1; n <= N; ++n) total += g.dt * law.gamma(g.time(n), lambda) * form(w.level(n), E.level(n));
    return total;
}

double weak_pairing(const SpaceTimeField& w, const BoundaryField& h, const MaterialLaw& law, const MatrixField& A,
                    const Grid& g, double lambda) {
    for (std::size_t b = 0; b < h.count; ++b)
        if (h.at(g.steps, b) != 0.0) throw PdeError("weak pairing needs h to vanish at t = T");
    return weak_pairing(w, lift(h, g), law, A, g, lambda);
}

std::vector<LinearizationRow> linearization_check(const MaterialLaw& law, const MatrixField& A, const Grid& g,
                                                  double lambda, const BoundaryField& data,
                                                  const std::vector<double>& k_list) {
    const SpaceTimeField w = solve_linearized(law, A, g, lambda, data);
    const FluxRecord lin = linear_flux(w, law, A, g, lambda);
    return parallel_map(k_list.size(), [&](std::size_t i) {
        LinearizationRow row;
        row.k = k_list[i];
        try {
            BoundaryField scaled = data;
            scaled *= 1.0 / row.k;
            const SpaceTimeField u = solve_forward(law, A, g, lambda, scaled);
            FluxRecord nl = nonlinear_flux(u, law, A, g);
            nl *= row.k;
            row.d = flux_l2(nl - lin, g);
        } catch (const NewtonDivergence& e) {
            row.diverged = true;
            row.d = std::nan("");
            row.note = e.what();
        }
        return row;
    });
}

std::vector<BoundaryField> random_bumps(const Grid& g, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53); };
    auto bump = [](double z) { return std::abs(z) < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0; };
    std::vector<BoundaryField> out;
    for (int c = 0; c < count; ++c) {
        std::vector<std::array<double, 2>> cw;
        for (std::size_t k = 0; k < g.tangential.size(); ++k) {
            const double lo = g.patch_index[k][0] * g.h, hi = g.patch_index[k][1] * g.h;
            const double w = uni(0.2, 0.45) * (hi - lo);
            cw.push_back({uni(lo + w, hi - w), w});
        }
        const double tc = uni(0.35, 0.65) * g.T, tw = uni(0.15, 0.3) * g.T;
        out.push_back(separable_data(
            g,
            [&](const Vec& x) {
                double p = 1.0;
                for (std::size_t k = 0; k < cw.size(); ++k) p *= bump((x[g.tangential[k]] - cw[k][0]) / cw[k][1]);
                return p;
            },
            [&](double t) { return bump((t - tc) / tw); }));
    }
    return out;
}

std::vector<FluxRecord> linear_responses(const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                                         const std::vector<BoundaryField>& dictionary) {
    return parallel_map(dictionary.size(), [&](std::size_t i) {
        const SpaceTimeField w = solve_linearized(law, A, g, lambda, dictionary[i]);
        return linear_flux(w, law, A, g, lambda);
    });
}

EtaResult eta_from_responses(const std::vector<FluxRecord>& first, const std::vector<FluxRecord>& second,
                             const std::vector<BoundaryField>& dictionary, const Grid& g, const BoundaryNorm& norm) {
    if (dictionary.empty()) throw std::invalid_argument("empty dictionary");
    EtaResult r;
    r.norm_flag = norm.flag();
    for (std::size_t i = 0; i < dictionary.size(); ++i) {
        const double num = norm.dual(as_boundary(first[i] - second[i], g));
        const double den = norm.half(dictionary[i]);
        const double q = den > 0.0 ? num / den : 0.0;
        r.ratios.push_back(q);
        if (q > r.eta || i == 0) {
            r.eta = q;
            r.argmax = i;
        }
    }
    return r;
}

EtaResult eta_surrogate(const MaterialLaw& first, const MaterialLaw& second, const MatrixField& A, const Grid& g,
                        double lambda, const std::vector<BoundaryField>& dictionary, const BoundaryNorm& norm) {
    return eta_from_responses(linear_responses(first, A, g, lambda, dictionary),
                              linear_responses(second, A, g, lambda, dictionary), dictionary, g, norm);
}

}  // namespace dnprobe
