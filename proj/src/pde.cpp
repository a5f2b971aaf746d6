#include "dnprobe/pde.hpp"

#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>
#include <numbers>

#include "dnprobe/stencil.hpp"

namespace dnprobe {

namespace {

void check_shape(const BoundaryField& data, const Grid& g) {
    if (data.levels != g.steps + 1 || data.count != g.boundary().size())
        throw PdeError("boundary data does not match the grid");
}

void check_source(const SpaceTimeField* f, const Grid& g) {
    if (f && (f->levels != g.steps + 1 || f->nodes != g.num_nodes())) throw PdeError("source does not match the grid");
}

// alpha I + beta K with a cached preconditioner
class ShiftedSolver {
public:
    ShiftedSolver(const SpMat& K, double tol) : K_(K), solver_(tol) {
        I_.resize(K.rows(), K.cols());
        I_.setIdentity();
    }
    const SpdSolver& get(double alpha, double beta) {
        if (alpha != alpha_ || beta != beta_) {
            SpMat M = beta * K_ + alpha * I_;
            solver_.compute(M);
            alpha_ = alpha;
            beta_ = beta;
        }
        return solver_;
    }

private:
    const SpMat& K_;
    SpMat I_;
    SpdSolver solver_;
    double alpha_ = std::nan(""), beta_ = std::nan("");
};

}  // namespace

SpaceTimeField solve_forward(const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                             const BoundaryField& data, const SpaceTimeField* source, const SolveOptions& opt,
                             SolveStats* stats) {
    check_shape(data, g);
    check_source(source, g);
    for (std::size_t b = 0; b < data.count; ++b)
        if (data.at(0, b) != 0.0) throw PdeError("boundary data must vanish at t = 0");

    const Lattice& L = g.omega();
    const Stencil st = build_stencil(L, A);
    const auto& interior = g.interior();
    const auto& bnd = g.boundary();
    const auto& ipos = g.interior_pos();
    const std::size_t nu = interior.size();

    SpaceTimeField u(g, FieldKind::forward);
    std::vector<double> cur(g.num_nodes(), lambda), prev(g.num_nodes(), lambda);
    std::fill(u.level(0).begin(), u.level(0).end(), lambda);

    std::vector<double> gam(cur.size()), dgam(cur.size());
    VecX R(nu);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    SolveStats local;

    for (int n = 1; n <= g.steps; ++n) {
        const double t = g.time(n);
        prev = cur;
        for (std::size_t b = 0; b < bnd.size(); ++b) cur[bnd[b]] = lambda + data.at(n, b);
        int it = 0;
        double rnorm = 0.0;
        for (;; ++it) {
            for (std::size_t k = 0; k < cur.size(); ++k) {
                gam[k] = law.gamma(t, cur[k]);
                dgam[k] = law.d_gamma_ds(t, cur[k]);
            }
            for (std::size_t k = 0; k < nu; ++k) {
                const std::size_t i = interior[k];
                R[k] = law.rho(t, cur[i]) * (cur[i] - prev[i]) / g.dt - (source ? source->at(n, i) : 0.0);
            }
            for (const auto& f : st.faces)
                R[ipos[f.i]] += f.w * 0.5 * (gam[f.i] + gam[f.j]) * (cur[f.i] - cur[f.j]);
            for (const auto& c : st.cross) R[ipos[c.i]] -= c.w * gam[c.c] * (cur[c.p] - cur[c.m]);
            rnorm = nu ? R.cwiseAbs().maxCoeff() : 0.0;
            if (!std::isfinite(rnorm)) throw NewtonDivergence("non-finite residual at t = " + std::to_string(t));
            if (rnorm <= opt.newton_tol) break;
            if (it == opt.newton_cap)
                throw NewtonDivergence("no convergence in " + std::to_string(opt.newton_cap) + " iterations at t = " +
                                       std::to_string(t) + " (residual " + std::to_string(rnorm) + ")");

            trip.clear();
            for (std::size_t k = 0; k < nu; ++k) {
                const std::size_t i = interior[k];
                const double d = law.rho(t, cur[i]) / g.dt + law.d_rho_ds(t, cur[i]) * (cur[i] - prev[i]) / g.dt;
                trip.emplace_back(k, k, d);
            }
            for (const auto& f : st.faces) {
                const int r = ipos[f.i];
                const double diff = cur[f.i] - cur[f.j];
                const double gf = 0.5 * (gam[f.i] + gam[f.j]);
                trip.emplace_back(r, r, f.w * (gf + 0.5 * dgam[f.i] * diff));
                if (ipos[f.j] >= 0) trip.emplace_back(r, ipos[f.j], f.w * (-gf + 0.5 * dgam[f.j] * diff));
            }
            for (const auto& c : st.cross) {
                const int r = ipos[c.i];
                if (ipos[c.p] >= 0) trip.emplace_back(r, ipos[c.p], -c.w * gam[c.c]);
                if (ipos[c.m] >= 0) trip.emplace_back(r, ipos[c.m], c.w * gam[c.c]);
                if (ipos[c.c] >= 0) trip.emplace_back(r, ipos[c.c], -c.w * dgam[c.c] * (cur[c.p] - cur[c.m]));
            }
            SpMat J(nu, nu);
            J.setFromTriplets(trip.begin(), trip.end());
            J.makeCompressed();
            if (!analyzed) {
                lu.analyzePattern(J);
                analyzed = true;
            }
            lu.factorize(J);
            if (lu.info() != Eigen::Success) throw NewtonDivergence("singular Jacobian at t = " + std::to_string(t));
            const VecX delta = lu.solve(R);
            for (std::size_t k = 0; k < nu; ++k) cur[interior[k]] -= delta[k];
        }
        local.newton_iterations = std::max(local.newton_iterations, it);
        local.residual = std::max(local.residual, rnorm);
        std::copy(cur.begin(), cur.end(), u.level(n).begin());
    }
    if (stats) *stats = local;
    return u;
}

SpaceTimeField solve_linearized(const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                                const BoundaryField& data, const SpaceTimeField* source, const SolveOptions& opt,
                                SolveStats* stats) {
    check_shape(data, g);
    check_source(source, g);
    for (std::size_t b = 0; b < data.count; ++b)
        if (data.at(0, b) != 0.0) throw PdeError("boundary data must vanish at t = 0");

    const SplitOperator op = split_operator(g.omega(), build_stencil(g.omega(), A));
    ShiftedSolver shifted(op.Kuu, opt.linear_tol);
    const std::size_t nu = op.unknowns.size(), nb = op.dirichlet.size();
    SpaceTimeField w(g, FieldKind::linearized);
    VecX wu = VecX::Zero(nu), gb(nb);
    SolveStats local;
    for (int n = 1; n <= g.steps; ++n) {
        const double t = g.time(n);
        const double rho = law.rho(t, lambda), gam = law.gamma(t, lambda);
        for (std::size_t b = 0; b < nb; ++b) gb[b] = data.at(n, b);
        VecX rhs = (rho / g.dt) * wu - gam * (op.Kub * gb);
        if (source)
            for (std::size_t k = 0; k < nu; ++k) rhs[k] += source->at(n, op.unknowns[k]);
        const SpdSolver& s = shifted.get(rho / g.dt, gam);
        wu = s.solve(rhs, wu);
        local.linear_iterations = std::max(local.linear_iterations, s.iterations());
        auto lev = w.level(n);
        for (std::size_t k = 0; k < nu; ++k) lev[op.unknowns[k]] = wu[k];
        for (std::size_t b = 0; b < nb; ++b) lev[op.dirichlet[b]] = gb[b];
    }
    if (stats) *stats = local;
    return w;
}

SpaceTimeField solve_adjoint(const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                             const BoundaryField& data, const SolveOptions& opt, SolveStats* stats) {
    check_shape(data, g);
    for (std::size_t b = 0; b < data.count; ++b)
        if (data.at(g.steps, b) != 0.0) throw PdeError("adjoint data must vanish at t = T");

    const SplitOperator op = split_operator(g.omega(), build_stencil(g.omega(), A));
    ShiftedSolver shifted(op.Kuu, opt.linear_tol);
    const std::size_t nu = op.unknowns.size(), nb = op.dirichlet.size();
    SpaceTimeField w(g, FieldKind::adjoint);
    VecX wu = VecX::Zero(nu), gb(nb);
    SolveStats local;
    for (int n = g.steps - 1; n >= 0; --n) {
        const double t = g.time(n);
        const double rho = law.rho(t, lambda), gam = law.gamma(t, lambda);
        const double rho_next = law.rho(g.time(n + 1), lambda);
        for (std::size_t b = 0; b < nb; ++b) gb[b] = data.at(n, b);
        const VecX rhs = (rho_next / g.dt) * wu - gam * (op.Kub * gb);
        const SpdSolver& s = shifted.get(rho / g.dt, gam);
        wu = s.solve(rhs, wu);
        local.linear_iterations = std::max(local.linear_iterations, s.iterations());
        auto lev = w.level(n);
        for (std::size_t k = 0; k < nu; ++k) lev[op.unknowns[k]] = wu[k];
        for (std::size_t b = 0; b < nb; ++b) lev[op.dirichlet[b]] = gb[b];
    }
    if (stats) *stats = local;
    return w;
}

double Manufactured::u(const Vec& x, double t) const {
    double p = 1.0;
    for (int a = 0; a < dim; ++a)
        p *= kind == Kind::space ? std::sin(std::numbers::pi * x[a]) : 4.0 * x[a] * (1.0 - x[a]);
    return lambda + (kind == Kind::space ? t : std::sin(t)) * p;
}

double Manufactured::ut(const Vec& x, double t) const {
    double p = 1.0;
    for (int a = 0; a < dim; ++a)
        p *= kind == Kind::space ? std::sin(std::numbers::pi * x[a]) : 4.0 * x[a] * (1.0 - x[a]);
    return (kind == Kind::space ? 1.0 : std::cos(t)) * p;
}

Vec Manufactured::grad(const Vec& x, double t) const {
    const double pi = std::numbers::pi;
    const double q = kind == Kind::space ? t : std::sin(t);
    Vec g{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        double p = q;
        for (int b = 0; b < dim; ++b) {
            if (kind == Kind::space) p *= b == a ? pi * std::cos(pi * x[b]) : std::sin(pi * x[b]);
            else p *= b == a ? 4.0 * (1.0 - 2.0 * x[b]) : 4.0 * x[b] * (1.0 - x[b]);
        }
        g[a] = p;
    }
    return g;
}

double Manufactured::laplacian(const Vec& x, double t) const {
    const double pi = std::numbers::pi;
    if (kind == Kind::space) return -dim * pi * pi * (u(x, t) - lambda);
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
        double p = -8.0;
        for (int b = 0; b < dim; ++b)
            if (b != a) p *= 4.0 * x[b] * (1.0 - x[b]);
        s += p;
    }
    return std::sin(t) * s;
}

SpaceTimeField manufactured_source(const Manufactured& m, const MaterialLaw& law, const Grid& g) {
    SpaceTimeField f(g, FieldKind::other);
    for (int n = 0; n <= g.steps; ++n) {
        const double t = g.time(n);
        for (std::size_t i = 0; i < f.nodes; ++i) {
            const Vec x = g.coord(i);
            const double u = m.u(x, t);
            const Vec gr = m.grad(x, t);
            double g2 = 0.0;
            for (int a = 0; a < g.dim; ++a) g2 += gr[a] * gr[a];
            f.at(n, i) = law.rho(t, u) * m.ut(x, t) - law.gamma(t, u) * m.laplacian(x, t) - law.d_gamma_ds(t, u) * g2;
        }
    }
    return f;
}

BoundaryField manufactured_data(const Manufactured& m, const Grid& g) {
    BoundaryField d(g);
    const auto& bnd = g.boundary();
    for (int n = 0; n <= g.steps; ++n)
        for (std::size_t b = 0; b < bnd.size(); ++b) d.at(n, b) = m.u(g.coord(bnd[b]), g.time(n)) - m.lambda;
    return d;
}

double manufactured_error(const Manufactured& m, const SpaceTimeField& u, const Grid& g) {
    double e = 0.0;
    for (int n = 0; n <= g.steps; ++n)
        for (std::size_t i = 0; i < u.nodes; ++i) e = std::max(e, std::abs(u.at(n, i) - m.u(g.coord(i), g.time(n))));
    return e;
}

std::vector<MmsRow> mms_study(const Manufactured& m, const MaterialLaw& law, const std::vector<GridConfig>& grids) {
    std::vector<MmsRow> rows;
    for (const auto& cfg : grids) {
        const auto t0 = std::chrono::steady_clock::now();
        const Grid g = build_grid(cfg);
        const SpaceTimeField f = manufactured_source(m, law, g);
        const SpaceTimeField u = solve_forward(law, MatrixField::identity(), g, m.lambda, manufactured_data(m, g), &f);
        MmsRow r;
        r.h = g.h;
        r.dt = g.dt;
        r.error = manufactured_error(m, u, g);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(r);
    }
    return rows;
}

}  // namespace dnprobe
