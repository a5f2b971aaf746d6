#include "dnprobe/reconstruct.hpp"

#include <cmath>
#include <stdexcept>

#include "dnprobe/fit.hpp"
#include "dnprobe/stencil.hpp"
#include "dnprobe/workers.hpp"

namespace dnprobe {

std::string target_name(Target t) { return t == Target::gamma ? "gamma" : "rho"; }

Target parse_target(const std::string& s) {
    if (s == "gamma") return Target::gamma;
    if (s == "rho") return Target::rho;
    throw std::invalid_argument("unknown target '" + s + "'");
}

ProbeBundle prepare_probe(Target target, const MatrixField& A, const Grid& g, const ProbeSpec& probe,
                          const RecoveryOptions& opt) {
    if (!A.is_constant()) throw SingularError("probes need a constant matrix A");
    ProbeBundle b{target, probe, make_cutoffs(probe.geom.t0, probe.geom.tau, probe.cut, g, probe.geom.tau0),
                  build_singular_basis(g, probe.geom, A, target == Target::rho, opt.convention),
                  0.0, {}, {}, {}};
    if (target == Target::gamma) {
        if (probe.cut.kind != ProbeKind::gamma) throw SingularError("gamma recovery needs gamma-kind cutoffs");
        b.forward.push_back(probe_gamma(g, probe.geom, b.cut, b.basis));
        b.test.push_back(b.forward.back());
    } else {
        if (g.dim < 3) throw SingularError("rho recovery needs n >= 3");
        if (!A.is_identity()) throw SingularError("rho recovery needs A = Id");
        for (int j = 0; j < g.dim; ++j) {
            auto [gj, gbar] = probe_rho(g, probe.geom, b.cut, b.basis, j);
            b.forward.push_back(std::move(gj));
            b.test.push_back(std::move(gbar));
        }
    }
    b.energy = grad_H_energy(b.basis, g);
    if (!(b.energy > 1e-300) || !std::isfinite(b.energy)) throw SingularError("energy underflow");
    for (const auto& t : b.test)
        for (std::size_t k = 0; k < t.count; ++k)
            if (t.at(g.steps, k) != 0.0) throw SingularError("test probe does not vanish at t = T");
    if (opt.pairing == Pairing::weak)
        for (const auto& t : b.test) b.lifted.push_back(lift(t, g));
    return b;
}

LawResponse respond(const ProbeBundle& b, const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                    const RecoveryOptions& opt, bool keep_fields) {
    LawResponse r;
    for (std::size_t j = 0; j < b.forward.size(); ++j) {
        SpaceTimeField w = solve_linearized(law, A, g, lambda, b.forward[j]);
        if (opt.pairing == Pairing::weak) {
            if (b.lifted.size() != b.test.size()) throw std::logic_error("bundle prepared without lifts");
            r.pairing.push_back(weak_pairing(w, b.lifted[j], law, A, g, lambda));
        } else {
            r.pairing.push_back(strong_pairing(linear_flux(w, law, A, g, lambda), b.test[j], g));
        }
        if (keep_fields) r.fields.push_back(std::move(w));
    }
    return r;
}

PointEstimate combine(const ProbeBundle& b, const LawResponse& first, const LawResponse& second) {
    if (first.pairing.size() != b.forward.size() || second.pairing.size() != b.forward.size())
        throw std::invalid_argument("missing probes in law response");
    PointEstimate e;
    for (std::size_t j = 0; j < b.forward.size(); ++j) e.pairing += first.pairing[j] - second.pairing[j];
    e.energy = b.energy;
    e.value = e.pairing / e.energy;
    return e;
}

namespace {

bool same_gamma(const MaterialLaw& a, const MaterialLaw& b, double lambda, const Grid& g) {
    for (int n = 0; n <= g.steps; ++n)
        if (a.gamma(g.time(n), lambda) != b.gamma(g.time(n), lambda)) return false;
    return true;
}

// Σ_j Σ_n dt (γ¹-γ²)(t_n,λ) a_h(w¹_j, w̄²_j)
double gamma_cross_term(const ProbeBundle& b, const LawPair& pair, const std::vector<SpaceTimeField>& w1,
                        const MatrixField& A, const Grid& g, double lambda) {
    const DirichletForm form(g, A);
    double s = 0.0;
    for (std::size_t j = 0; j < b.test.size(); ++j) {
        const SpaceTimeField adj = solve_adjoint(pair.second, A, g, lambda, b.test[j]);
        for (int n = 1; n <= g.steps; ++n) {
            const double t = g.time(n);
            const double dg = pair.first.gamma(t, lambda) - pair.second.gamma(t, lambda);
            if (dg != 0.0) s += g.dt * dg * form(w1[j].level(n), adj.level(n));
        }
    }
    return s;
}

PointEstimate recover(const ProbeBundle& b, const LawPair& pair, const MatrixField& A, const Grid& g, double lambda,
                      const RecoveryOptions& opt) {
    const bool oracle = b.target == Target::rho && !same_gamma(pair.first, pair.second, lambda, g);
    const LawResponse r1 = respond(b, pair.first, A, g, lambda, opt, oracle);
    const LawResponse r2 = respond(b, pair.second, A, g, lambda, opt);
    PointEstimate e = combine(b, r1, r2);
    if (oracle) {
        e.oracle_term = gamma_cross_term(b, pair, r1.fields, A, g, lambda);
        e.oracle_corrected = true;
        e.value = (e.pairing - e.oracle_term) / e.energy;
    }
    return e;
}

double reference_difference(Target target, const LawPair& pair, double t0, double lambda) {
    return target == Target::gamma ? pair.first.gamma(t0, lambda) - pair.second.gamma(t0, lambda)
                                   : pair.first.rho(t0, lambda) - pair.second.rho(t0, lambda);
}

}  // namespace

PointEstimate recover_gamma_point(const LawPair& pair, const MatrixField& A, const Grid& g, double lambda,
                                  const ProbeSpec& probe, const RecoveryOptions& opt) {
    return recover(prepare_probe(Target::gamma, A, g, probe, opt), pair, A, g, lambda, opt);
}

PointEstimate recover_rho_point(const LawPair& pair, const Grid& g, double lambda, const ProbeSpec& probe,
                                const RecoveryOptions& opt) {
    const MatrixField A = MatrixField::identity();
    return recover(prepare_probe(Target::rho, A, g, probe, opt), pair, A, g, lambda, opt);
}

ProbeSpec make_probe_spec(const Grid& g, const SweepSettings& s, double tau) {
    ProbeSpec p;
    p.geom = exterior_point(g, s.x0, tau);
    p.geom.t0 = s.t0;
    if (s.tau0) {
        if (*s.tau0 > p.geom.delta) throw GeometryError("tau0 exceeds the admissibility radius");
        p.geom.tau0 = *s.tau0;
    }
    p.cut = s.cut;
    p.cut.kind = s.target == Target::gamma ? ProbeKind::gamma : ProbeKind::rho;
    return p;
}

void summarize(ReconstructionReport& r, int dim, const ScaleRule& rule) {
    const auto& tau = r.tau_sequence;
    const auto& e = r.raw_estimates;
    if (tau.size() != e.size() || tau.empty()) throw std::invalid_argument("empty or ragged sweep");
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!std::isfinite(e[i])) throw std::runtime_error("non-finite estimate in sweep");
        if (i > 0 && !(tau[i] < tau[i - 1])) throw std::invalid_argument("tau sequence must be strictly decreasing");
    }
    const Extrapolation x = power_extrapolate(tau, e);
    r.psi_extrapolated.reset();
    if (dim == 2 && r.target == Target::gamma) {
        std::vector<double> psi;
        for (double t : tau) psi.push_back(rule.apply(t) / std::sqrt(std::abs(std::log(t))));
        const Extrapolation y = linear_extrapolate(psi, e);
        if (y.ok) r.psi_extrapolated = y.limit;
    }
    r.extrapolated = x.ok;
    r.extrapolated_value = x.ok ? x.limit : e.back();
    r.extrapolation_note = x.note;
    r.fitted_rate.reset();
    if (tau.size() < 4) {
        r.rate_note = "insufficient sweep: rate needs at least 4 points";
    } else if (!r.reference_value) {
        r.rate_note = "no reference value";
    } else {
        std::vector<double> err;
        for (double v : e) err.push_back(std::abs(v - *r.reference_value));
        bool any = false;
        for (double v : err) any = any || v > 0.0;
        if (any) {
            r.fitted_rate = loglog_slope(tau, err);
            r.rate_note.clear();
        } else {
            r.rate_note = "estimates equal the reference";
        }
    }
}

ReconstructionReport tau_sweep(const LawPair& pair, const MatrixField& A, const Grid& g, const SweepSettings& s,
                               std::optional<double> reference) {
    ReconstructionReport r;
    r.target = s.target;
    r.t0 = s.t0;
    r.lambda = s.lambda;
    r.tau_sequence = s.taus;
    r.norm_flag = BoundaryNorm(g, s.norm).flag();
    r.reference_value = reference ? reference : reference_difference(s.target, pair, s.t0, s.lambda);
    for (std::size_t i = 1; i < s.taus.size(); ++i)
        if (!(s.taus[i] < s.taus[i - 1])) throw std::invalid_argument("tau sequence must be strictly decreasing");
    const auto est = parallel_map(s.taus.size(), [&](std::size_t i) {
        const ProbeBundle b = prepare_probe(s.target, A, g, make_probe_spec(g, s, s.taus[i]), s.rec);
        return recover(b, pair, A, g, s.lambda, s.rec);
    });
    for (const auto& e : est) {
        r.raw_estimates.push_back(e.value);
        r.pairings.push_back(e.pairing);
        r.energies.push_back(e.energy);
        r.oracle_corrected = r.oracle_corrected || e.oracle_corrected;
    }
    CutoffOptions cut = s.cut;
    cut.kind = s.target == Target::gamma ? ProbeKind::gamma : ProbeKind::rho;
    summarize(r, g.dim, cut.effective_rule());
    return r;
}

MaterialLaw LawFamily::at(double eps) const {
    MaterialLaw m = base;
    if (eps != 0.0) {
        m.gamma_law = base.gamma_law + dgamma.scaled(eps);
        m.rho_law = base.rho_law + drho.scaled(eps);
    }
    return m;
}

double window_difference(Target target, const MaterialLaw& a, const MaterialLaw& b, double lambda, double lo,
                         double hi, const Grid& g) {
    double m = 0.0;
    for (int n = 0; n <= g.steps; ++n) {
        const double t = g.time(n);
        if (t < lo || t > hi) continue;
        const double d = target == Target::gamma ? a.gamma(t, lambda) - b.gamma(t, lambda)
                                                 : a.rho(t, lambda) - b.rho(t, lambda);
        m = std::max(m, std::abs(d));
    }
    return m;
}

std::vector<BoundaryField> stability_dictionary(const MatrixField& A, const Grid& g, const StabilitySettings& s) {
    std::vector<BoundaryField> dict;
    RecoveryOptions plain = s.sweep.rec;
    plain.pairing = Pairing::strong;  // no lifts needed
    for (double tau : s.sweep.taus) {
        ProbeBundle b = prepare_probe(s.sweep.target, A, g, make_probe_spec(g, s.sweep, tau), plain);
        for (auto& f : b.forward) dict.push_back(std::move(f));
    }
    for (auto& f : random_bumps(g, s.random_bumps, s.seed)) dict.push_back(std::move(f));
    return dict;
}

StabilityReport stability_experiment(const LawFamily& family, const MatrixField& A, const Grid& g,
                                     const StabilitySettings& s) {
    if (s.eps_list.size() < 3) throw std::invalid_argument("stability experiment needs at least three eps values");
    const SweepSettings& sw = s.sweep;
    StabilityReport rep;
    rep.target = sw.target;
    const BoundaryNorm norm(g, sw.norm);
    rep.norm_flag = norm.flag();
    const MaterialLaw& second = family.base;

    const auto dict = stability_dictionary(A, g, s);
    rep.dictionary_size = dict.size();
    const auto resp2 = linear_responses(second, A, g, sw.lambda, dict);

    const auto bundles = parallel_map(sw.taus.size(), [&](std::size_t i) {
        return prepare_probe(sw.target, A, g, make_probe_spec(g, sw, sw.taus[i]), sw.rec);
    });
    const auto base2 = parallel_map(bundles.size(), [&](std::size_t i) {
        return respond(bundles[i], second, A, g, sw.lambda, sw.rec);
    });
    const double lo = bundles.back().cut.support_lo(), hi = bundles.back().cut.support_hi();
    CutoffOptions cut = sw.cut;
    cut.kind = sw.target == Target::gamma ? ProbeKind::gamma : ProbeKind::rho;

    for (double eps : s.eps_list) {
        StabilityRow row;
        row.eps = eps;
        if (eps == 0.0) {
            row.note = "eps = 0 excluded from fits";
            rep.rows.push_back(row);
            continue;
        }
        try {
            const MaterialLaw first = family.at(eps);
            const LawPair pair{first, second};
            if (sw.target == Target::rho && !same_gamma(first, second, sw.lambda, g))
                throw std::invalid_argument("stability rows for rho need equal gamma laws");
            const auto resp1 = linear_responses(first, A, g, sw.lambda, dict);
            row.eta = eta_from_responses(resp1, resp2, dict, g, norm).eta;
            row.true_diff = window_difference(sw.target, first, second, sw.lambda, lo, hi, g);
            ReconstructionReport r;
            r.target = sw.target;
            r.tau_sequence = sw.taus;
            r.reference_value = reference_difference(sw.target, pair, sw.t0, sw.lambda);
            for (std::size_t i = 0; i < bundles.size(); ++i) {
                const LawResponse r1 = respond(bundles[i], first, A, g, sw.lambda, sw.rec);
                r.raw_estimates.push_back(combine(bundles[i], r1, base2[i]).value);
            }
            summarize(r, g.dim, cut.effective_rule());
            row.reconstructed = r.extrapolated_value;
            row.finest = r.raw_estimates.back();
        } catch (const PdeError& e) {
            row.dropped = true;
            row.note = e.what();
        }
        rep.rows.push_back(row);
    }

    std::vector<double> eta, diff;
    const StabilityRow* largest = nullptr;
    for (const auto& row : rep.rows) {
        if (row.dropped || row.eps == 0.0) continue;
        eta.push_back(row.eta);
        diff.push_back(row.true_diff);
        if (!largest || std::abs(row.eps) > std::abs(largest->eps)) largest = &row;
    }
    if (sw.target == Target::gamma) {
        if (eta.size() >= 2) rep.slope = loglog_slope(eta, diff);
    } else if (largest && largest->eta > 0.0) {
        const double c = largest->true_diff / std::pow(largest->eta, 1.0 / 9.0);
        rep.holder_c = c;
        for (auto& row : rep.rows) {
            if (row.dropped || row.eps == 0.0) continue;
            row.holder_ok = row.true_diff <= c * std::pow(row.eta, 1.0 / 9.0) * (1.0 + 1e-12);
            rep.holder_ok = rep.holder_ok && row.holder_ok;
        }
    }
    return rep;
}

}  // namespace dnprobe
