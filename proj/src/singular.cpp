#include "dnprobe/singular.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace dnprobe {

namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-13);
}

double smoothstep(double z) {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return z * z * z * (10.0 + z * (-15.0 + 6.0 * z));
}

double smoothstep_d(double z) {
    if (z <= 0.0 || z >= 1.0) return 0.0;
    return 30.0 * z * z * (1.0 - z) * (1.0 - z);
}

}  // namespace

Fundamental::Fundamental(int dim, const MatrixField& A, const Vec& y, double scale)
    : dim_(dim), A_(A), y_(y), scale_(scale) {
    if (!A.is_constant()) throw SingularError("the fundamental solution is available for constant A only");
    Eigen::MatrixXd M(dim, dim);
    const Mat& a = A.value();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) M(i, j) = a[i][j];
    const Eigen::MatrixXd inv = M.inverse();
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) inv_[i][j] = inv(i, j);
}

double Fundamental::quad(const Vec& x, Vec& w) const {
    Vec d{0, 0, 0};
    for (int i = 0; i < dim_; ++i) d[i] = x[i] - y_[i];
    double q = 0.0;
    for (int i = 0; i < dim_; ++i) {
        w[i] = 0.0;
        for (int j = 0; j < dim_; ++j) w[i] += inv_[i][j] * d[j];
        q += w[i] * d[i];
    }
    if (!(q > 0.0)) throw SingularError("fundamental solution evaluated at its pole");
    return q;
}

double Fundamental::value(const Vec& x) const {
    Vec w;
    const double q = quad(x, w);
    if (dim_ == 2) return -0.5 * scale_ * std::log(q);
    return scale_ * std::pow(q, 0.5 * (2 - dim_));
}

Vec Fundamental::grad(const Vec& x) const {
    Vec w;
    const double q = quad(x, w);
    const double f = dim_ == 2 ? -1.0 / q : (2 - dim_) * std::pow(q, -0.5 * dim_);
    Vec g{0, 0, 0};
    for (int i = 0; i < dim_; ++i) g[i] = scale_ * f * w[i];
    return g;
}

double fundamental_H(const Vec& x, const Vec& y, const MatrixField& A, int dim) {
    return Fundamental(dim, A, y).value(x);
}

CorrectorSolver::CorrectorSolver(const Grid& g, const MatrixField& A)
    : grid_(g), op_(split_operator(g.omega_prime(), build_stencil(g.omega_prime(), A))) {
    if (!A.is_constant()) throw SingularError("correctors are built for constant A only");
    solver_.compute(op_.Kuu);
}

std::vector<double> CorrectorSolver::solve(std::span<const double> trace) const {
    VecX gb(op_.dirichlet.size());
    for (std::size_t b = 0; b < op_.dirichlet.size(); ++b) gb[b] = trace[b];
    const VecX x = solver_.solve(-(op_.Kub * gb));
    std::vector<double> out(lattice().size(), 0.0);
    for (std::size_t k = 0; k < op_.unknowns.size(); ++k) out[op_.unknowns[k]] = x[k];
    for (std::size_t b = 0; b < op_.dirichlet.size(); ++b) out[op_.dirichlet[b]] = trace[b];
    return out;
}

std::vector<double> CorrectorSolver::solve(const std::function<double(const Vec&)>& trace) const {
    const Lattice& L = lattice();
    std::vector<double> t(op_.dirichlet.size());
    for (std::size_t b = 0; b < t.size(); ++b) t[b] = trace(L.coord(op_.dirichlet[b]));
    return solve(t);
}

double CorrectorSolver::residual(std::span<const double> v) const {
    VecX xu(op_.unknowns.size()), xb(op_.dirichlet.size());
    for (std::size_t k = 0; k < op_.unknowns.size(); ++k) xu[k] = v[op_.unknowns[k]];
    for (std::size_t b = 0; b < op_.dirichlet.size(); ++b) xb[b] = v[op_.dirichlet[b]];
    const VecX r = op_.Kuu * xu + op_.Kub * xb;
    const double h = lattice().h;
    return r.size() ? r.cwiseAbs().maxCoeff() * h * h : 0.0;
}

std::vector<double> solve_corrector(const Grid& g, const std::function<double(const Vec&)>& trace,
                                    const MatrixField& A) {
    return CorrectorSolver(g, A).solve(trace);
}

double ScaleRule::apply(double tau) const {
    if (!(tau > 0.0 && tau < 1.0)) throw SingularError("tau must lie in (0,1)");
    return kind == Kind::log ? std::pow(std::abs(std::log(tau)), p) : std::pow(tau, -p);
}

ScaleRule CutoffOptions::effective_rule() const {
    if (rule) return *rule;
    if (kind == ProbeKind::gamma) return {ScaleRule::Kind::log, 1.0 / 16.0};
    return {ScaleRule::Kind::power, r};
}

BaseBump::BaseBump(BumpShape shape) : shape_(shape) {
    c_ = 1.0;
    const double n2 = integrate([this](double s) { return raw(s) * raw(s); }, -1.0, 1.0);
    c_ = 1.0 / std::sqrt(n2);
    norm_sq_ = integrate([this](double s) { return (*this)(s) * (*this)(s); }, -1.0, 1.0);
    total_ = integrate([this](double s) { return (*this)(s); }, -1.0, 1.0);
    abs_moment_ = integrate([this](double s) { return std::abs(s) * (*this)(s) * (*this)(s); }, -1.0, 1.0);
}

double BaseBump::raw(double s) const {
    if (!(s > -1.0 && s < 1.0)) return 0.0;
    const double b = std::exp(-1.0 / (1.0 - s * s));
    return shape_ == BumpShape::standard ? b : (1.0 + s) * b;
}

double BaseBump::operator()(double s) const { return c_ * raw(s); }

double BaseBump::cumulative(double s) const {
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return total_;
    return integrate([this](double u) { return (*this)(u); }, -1.0, s);
}

double CutoffSet::phi_tau(double t) const { return std::sqrt(a_tau) * phi(a_tau * (t - t0)); }

double CutoffSet::Phi_tau(double t) const { return phi.cumulative(a_tau * (t - t0)) / std::sqrt(a_tau); }

double CutoffSet::chi(double t) const {
    if (kind == ProbeKind::gamma) return 1.0;
    const double lo = t0 - plateau, hi = t0 + plateau;
    if (t < lo) return smoothstep((t - (lo - ramp)) / ramp);
    if (t > hi) return smoothstep(((hi + ramp) - t) / ramp);
    return 1.0;
}

double CutoffSet::dchi(double t) const {
    if (kind == ProbeKind::gamma) return 0.0;
    const double lo = t0 - plateau, hi = t0 + plateau;
    if (t < lo) return smoothstep_d((t - (lo - ramp)) / ramp) / ramp;
    if (t > hi) return -smoothstep_d(((hi + ramp) - t) / ramp) / ramp;
    return 0.0;
}

double CutoffSet::xi(double t) const {
    if (kind == ProbeKind::gamma || t < support_hi()) return 0.0;
    return Phi_tau(T) * (chi(t) - 1.0);
}

double CutoffSet::zeta(double t) const {
    if (kind == ProbeKind::gamma || t < support_hi()) return 0.0;
    return Phi_tau(T) * dchi(t);
}

CutoffSet make_cutoffs(double t0, double tau, const CutoffOptions& opt, const Grid& g, double tau0) {
    CutoffSet c;
    c.kind = opt.kind;
    c.phi = BaseBump(opt.shape);
    c.t0 = t0;
    c.tau = tau;
    c.tau0 = tau0;
    c.r = opt.r;
    c.T = g.T;
    const ScaleRule rule = opt.effective_rule();
    c.a_tau = rule.apply(tau);
    const double room = std::min(t0, g.T - t0);
    if (!(t0 > 0.0 && t0 < g.T)) throw SingularError("t0 must lie in (0,T)");
    if (!(1.0 / c.a_tau < room)) throw SingularError("support overflow: cutoff support leaves (0,T)");
    if (opt.kind == ProbeKind::rho) {
        if (!(tau < tau0)) throw SingularError("support overflow: tau must be below tau0");
        c.plateau = 1.0 / rule.apply(tau0);
        c.ramp = std::min(0.5 * c.plateau, room - c.plateau);
        if (!(c.ramp > 0.0)) throw SingularError("support overflow: plateau cutoff does not fit in (0,T)");
    }
    const int L = g.steps + 1;
    c.phi_s.resize(L);
    c.Phi_s.resize(L);
    c.chi_s.resize(L);
    c.xi_s.resize(L);
    c.zeta_s.resize(L);
    for (int n = 0; n < L; ++n) {
        const double t = g.time(n);
        c.phi_s[n] = c.phi_tau(t);
        c.Phi_s[n] = c.Phi_tau(t);
        c.chi_s[n] = c.chi(t);
        c.xi_s[n] = c.xi(t);
        c.zeta_s[n] = c.zeta(t);
    }
    return c;
}

double mollify(const CutoffSet& cut, const std::function<double(double)>& f) {
    return integrate([&](double t) {
        const double p = cut.phi_tau(t);
        return p * p * f(t);
    }, cut.support_lo(), cut.support_hi());
}

SingularBasis build_singular_basis(const Grid& g, const ProbeGeometry& geom, const MatrixField& A,
                                   bool with_derivatives, double convention_scale) {
    SingularBasis b{g.dim, Fundamental(g.dim, A, geom.y, convention_scale), {}, {}, {}, {}, 0.0, 0.0};
    const CorrectorSolver solver(g, A);
    const Lattice& L = solver.lattice();
    // H is needed on Ω̄ and on ∂Ω′ only; the pole may sit on a slab node
    std::vector<unsigned char> used(L.size(), 0);
    for (std::size_t node = 0; node < g.num_nodes(); ++node) used[g.to_prime(node)] = 1;
    for (std::size_t i = 0; i < L.size(); ++i)
        if (L.state[i] == 1) used[i] = 1;
    b.H_values.assign(L.size(), 0.0);
    for (std::size_t i = 0; i < L.size(); ++i)
        if (used[i]) b.H_values[i] = b.H.value(L.coord(i));
    std::vector<double> trace(solver.op().dirichlet.size());
    for (std::size_t k = 0; k < trace.size(); ++k) {
        trace[k] = b.H_values[solver.op().dirichlet[k]];
        b.trace_scale = std::max(b.trace_scale, std::abs(trace[k]));
    }
    b.corrector_v = solver.solve(trace);
    b.corrector_residual = solver.residual(b.corrector_v);
    if (with_derivatives) {
        b.dH_values.assign(g.dim, std::vector<double>(L.size(), 0.0));
        b.corrector_vj.resize(g.dim);
        for (std::size_t i = 0; i < L.size(); ++i) {
            if (!used[i]) continue;
            const Vec gr = b.H.grad(L.coord(i));
            for (int j = 0; j < g.dim; ++j) b.dH_values[j][i] = gr[j];
        }
        for (int j = 0; j < g.dim; ++j) {
            for (std::size_t k = 0; k < trace.size(); ++k) trace[k] = b.dH_values[j][solver.op().dirichlet[k]];
            b.corrector_vj[j] = solver.solve(trace);
            b.corrector_residual = std::max(b.corrector_residual, solver.residual(b.corrector_vj[j]));
        }
    }
    return b;
}

std::vector<double> probe_profile(const Grid& g, const SingularBasis& basis, int j) {
    const std::vector<double>& P = j < 0 ? basis.H_values : basis.dH_values.at(j);
    const std::vector<double>& v = j < 0 ? basis.corrector_v : basis.corrector_vj.at(j);
    std::vector<double> out(g.num_nodes());
    for (std::size_t node = 0; node < out.size(); ++node) {
        const std::size_t p = g.to_prime(node);
        out[node] = P[p] - v[p];
    }
    return out;
}

namespace {

BoundaryField assemble_probe(const Grid& g, const std::vector<double>& profile, const std::vector<double>& time,
                             double tol) {
    BoundaryField f(g);
    const auto& bnd = g.boundary();
    double leak = 0.0;
    for (std::size_t b = 0; b < bnd.size(); ++b)
        if (!f.support[b]) leak = std::max(leak, std::abs(profile[bnd[b]]));
    double tmax = 0.0;
    for (double q : time) tmax = std::max(tmax, std::abs(q));
    if (leak * tmax > tol) throw SingularError("probe data leaks onto the boundary outside S");
    for (int n = 0; n < f.levels; ++n)
        for (std::size_t b = 0; b < bnd.size(); ++b)
            if (f.support[b]) f.at(n, b) = time[n] * profile[bnd[b]];
    return f;
}

}  // namespace

BoundaryField probe_gamma(const Grid& g, const ProbeGeometry&, const CutoffSet& cut, const SingularBasis& basis) {
    const double tol = 10.0 * 1e-12 * std::max(1.0, basis.trace_scale);
    return assemble_probe(g, probe_profile(g, basis, -1), cut.phi_s, tol);
}

std::pair<BoundaryField, BoundaryField> probe_rho(const Grid& g, const ProbeGeometry&, const CutoffSet& cut,
                                                  const SingularBasis& basis, int j) {
    if (g.dim < 3) throw SingularError("rho probes need n >= 3");
    if (!basis.H.matrix().is_identity()) throw SingularError("rho probes need A = Id");
    if (cut.kind != ProbeKind::rho) throw SingularError("rho probes need rho-kind cutoffs");
    if (basis.dH_values.empty()) throw SingularError("basis was built without derivative correctors");
    const auto profile = probe_profile(g, basis, j);
    std::vector<double> chiPhi(cut.Phi_s.size());
    for (std::size_t n = 0; n < chiPhi.size(); ++n) chiPhi[n] = cut.chi_s[n] * cut.Phi_s[n];
    double scale = 0.0;
    for (const auto& v : basis.dH_values[j]) scale = std::max(scale, std::abs(v));
    const double tol = 10.0 * 1e-12 * std::max(1.0, scale);
    return {assemble_probe(g, profile, chiPhi, tol), assemble_probe(g, profile, cut.phi_s, tol)};
}

SingularNorms singular_norms(const Fundamental& H, const Grid& g) {
    const int n = g.dim, N = g.cells;
    const double h = g.h;
    const Mat& A = H.matrix().value();
    SingularNorms out;
    const int nz = n == 3 ? N + 1 : 1;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j <= N; ++j) {
            for (int i = 0; i <= N; ++i) {
                const std::array<int, 3> m{i, j, k};
                double w = 1.0;
                Vec x{0, 0, 0};
                for (int a = 0; a < n; ++a) {
                    w *= (m[a] == 0 || m[a] == N) ? 0.5 * h : h;
                    x[a] = m[a] * h;
                }
                const double v = H.value(x);
                Vec gr{0, 0, 0};
                for (int a = 0; a < n; ++a) {
                    Vec xp = x, xm = x;
                    xp[a] += h;
                    xm[a] -= h;
                    gr[a] = (H.value(xp) - H.value(xm)) / (2.0 * h);
                }
                double e = 0.0, g2 = 0.0;
                for (int a = 0; a < n; ++a) {
                    g2 += gr[a] * gr[a];
                    for (int b = 0; b < n; ++b) e += A[a][b] * gr[a] * gr[b];
                }
                out.H_l2 += w * v * v;
                out.gradH_l2 += w * g2;
                out.energy += w * e;
            }
        }
    }
    out.H_l2 = std::sqrt(out.H_l2);
    out.gradH_l2 = std::sqrt(out.gradH_l2);
    return out;
}

double grad_H_energy(const Fundamental& H, const Grid& g) { return singular_norms(H, g).energy; }

double grad_H_energy(const SingularBasis& basis, const Grid& g) { return grad_H_energy(basis.H, g); }

}  // namespace dnprobe
