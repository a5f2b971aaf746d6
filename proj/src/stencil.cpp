#include "dnprobe/stencil.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <string>

namespace dnprobe {

namespace {

std::size_t neighbor(const Lattice& L, std::size_t id, int axis, int step) {
    auto m = L.multi(id);
    m[axis] += step;
    if (m[axis] < 0 || m[axis] >= L.n[axis]) throw SolverError("stencil leaves the lattice");
    const std::size_t j = L.id(m);
    if (L.state[j] == 0) throw SolverError("stencil references a node outside the domain closure");
    return j;
}

}  // namespace

Stencil build_stencil(const Lattice& L, const MatrixField& A) {
    Stencil s;
    const double ih2 = 1.0 / (L.h * L.h);
    const bool cross = !A.is_diagonal();
    const bool variable = !A.is_constant();
    const Mat A0 = variable ? Mat{} : A.value();
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (L.state[i] != 2) continue;
        const Vec xi = L.coord(i);
        for (int k = 0; k < L.dim; ++k) {
            for (int step : {-1, 1}) {
                const std::size_t j = neighbor(L, i, k, step);
                double akk = A0[k][k];
                if (variable) {
                    Vec mid = xi;
                    mid[k] += 0.5 * step * L.h;
                    akk = A.at(mid)[k][k];
                }
                s.faces.push_back({i, j, akk * ih2});
            }
        }
        if (!cross) continue;
        for (int k = 0; k < L.dim; ++k) {
            for (int l = 0; l < L.dim; ++l) {
                if (k == l) continue;
                for (int step : {-1, 1}) {
                    const std::size_t c = neighbor(L, i, k, step);
                    const double akl = variable ? A.at(L.coord(c))[k][l] : A0[k][l];
                    if (akl == 0.0) continue;
                    const std::size_t p = neighbor(L, c, l, 1);
                    const std::size_t m = neighbor(L, c, l, -1);
                    s.cross.push_back({i, c, p, m, step * akl * 0.25 * ih2});
                }
            }
        }
    }
    return s;
}

SplitOperator split_operator(const Lattice& L, const Stencil& s) {
    SplitOperator op;
    op.upos.assign(L.size(), -1);
    op.dpos.assign(L.size(), -1);
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (L.state[i] == 2) {
            op.upos[i] = static_cast<int>(op.unknowns.size());
            op.unknowns.push_back(i);
        } else if (L.state[i] == 1) {
            op.dpos[i] = static_cast<int>(op.dirichlet.size());
            op.dirichlet.push_back(i);
        }
    }
    std::vector<Eigen::Triplet<double>> tu, tb;
    auto add = [&](std::size_t row, std::size_t col, double v) {
        const int r = op.upos[row];
        if (op.upos[col] >= 0) tu.emplace_back(r, op.upos[col], v);
        else tb.emplace_back(r, op.dpos[col], v);
    };
    for (const auto& f : s.faces) {
        add(f.i, f.i, f.w);
        add(f.i, f.j, -f.w);
    }
    for (const auto& c : s.cross) {
        add(c.i, c.p, -c.w);
        add(c.i, c.m, c.w);
    }
    op.Kuu.resize(op.unknowns.size(), op.unknowns.size());
    op.Kub.resize(op.unknowns.size(), op.dirichlet.size());
    op.Kuu.setFromTriplets(tu.begin(), tu.end());
    op.Kub.setFromTriplets(tb.begin(), tb.end());
    op.Kuu.prune(0.0);
    return op;
}

struct SpdSolver::Impl {
    SpMat A;  // the solver keeps a reference, so the matrix lives here
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
};

void SpdSolver::compute(const SpMat& A) {
    impl_ = std::make_shared<Impl>();
    impl_->cg.setTolerance(tol_);
    impl_->cg.setMaxIterations(std::max<Eigen::Index>(10 * A.rows(), 10));
    impl_->A = A;
    impl_->cg.compute(impl_->A);
    if (impl_->cg.info() != Eigen::Success) throw SolverError("preconditioner setup failed");
}

// Eigen also stops when the residual underflows (tiny right-hand sides); only
// reaching the cap counts as failure.
VecX SpdSolver::solve(const VecX& b) const {
    if (!impl_) throw SolverError("solver used before compute()");
    if (b.squaredNorm() == 0.0) {
        iterations_ = 0;
        return VecX::Zero(b.size());
    }
    VecX x = impl_->cg.solve(b);
    iterations_ = static_cast<int>(impl_->cg.iterations());
    if (impl_->cg.info() != Eigen::Success && impl_->cg.iterations() >= impl_->cg.maxIterations())
        throw SolverError("conjugate gradient hit the iteration cap (" + std::to_string(iterations_) + ")");
    return x;
}

VecX SpdSolver::solve(const VecX& b, const VecX& guess) const {
    if (!impl_) throw SolverError("solver used before compute()");
    if (b.squaredNorm() == 0.0) {
        iterations_ = 0;
        return VecX::Zero(b.size());
    }
    VecX x = impl_->cg.solveWithGuess(b, guess);
    iterations_ = static_cast<int>(impl_->cg.iterations());
    if (impl_->cg.info() != Eigen::Success && impl_->cg.iterations() >= impl_->cg.maxIterations())
        throw SolverError("conjugate gradient hit the iteration cap (" + std::to_string(iterations_) + ")");
    return x;
}

DirichletForm::DirichletForm(const Grid& g, const MatrixField& A) {
    if (!A.is_diagonal()) throw SolverError("the discrete Dirichlet form supports diagonal A only");
    const Lattice& L = g.omega();
    const double scale = std::pow(g.h, g.dim - 2);
    for (std::size_t i = 0; i < L.size(); ++i) {
        const auto m = L.multi(i);
        for (int k = 0; k < g.dim; ++k) {
            if (m[k] == g.cells) continue;
            auto mj = m;
            mj[k] += 1;
            const std::size_t j = L.id(mj);
            double w = scale;
            for (int t = 0; t < g.dim; ++t)
                if (t != k && (m[t] == 0 || m[t] == g.cells)) w *= 0.5;
            Vec mid = L.coord(i);
            mid[k] += 0.5 * g.h;
            w *= A.at(mid)[k][k];
            edges_.push_back({i, j, w});
        }
    }
}

double DirichletForm::operator()(std::span<const double> u, std::span<const double> v) const {
    double s = 0.0;
    for (const auto& e : edges_) s += e.w * (u[e.i] - u[e.j]) * (v[e.i] - v[e.j]);
    return s;
}

HarmonicLifter::HarmonicLifter(const Grid& g)
    : grid_(g), op_(split_operator(g.omega(), build_stencil(g.omega(), MatrixField::identity()))) {
    solver_.compute(op_.Kuu);
}

std::vector<double> HarmonicLifter::extend(std::span<const double> boundary_values) const {
    VecX gb(op_.dirichlet.size());
    for (Eigen::Index b = 0; b < gb.size(); ++b) gb[b] = boundary_values[b];
    const VecX x = solver_.solve(-(op_.Kub * gb));
    std::vector<double> out(grid_.num_nodes(), 0.0);
    for (std::size_t k = 0; k < op_.unknowns.size(); ++k) out[op_.unknowns[k]] = x[k];
    for (std::size_t b = 0; b < op_.dirichlet.size(); ++b) out[op_.dirichlet[b]] = boundary_values[b];
    return out;
}

}  // namespace dnprobe
