#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "dnprobe/grid.hpp"
#include "dnprobe/material.hpp"

namespace dnprobe {

using SpMat = Eigen::SparseMatrix<double>;
using VecX = Eigen::VectorXd;

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Second-order stencil of u -> -div(c A grad u) on the unknown nodes of a lattice.
/// Face term: row i gets  w * (c_i + c_j)/2 * (u_i - u_j).
/// Cross term: row i gets -w * c_c * (u_p - u_m)   (off-diagonal entries of A).
struct Stencil {
    struct Face {
        std::size_t i, j;
        double w;
    };
    struct Cross {
        std::size_t i, c, p, m;
        double w;
    };
    std::vector<Face> faces;
    std::vector<Cross> cross;
};

Stencil build_stencil(const Lattice& L, const MatrixField& A);

/// Unit-coefficient operator split into unknown and Dirichlet columns.
struct SplitOperator {
    std::vector<std::size_t> unknowns, dirichlet;  // lattice ids, ascending
    std::vector<int> upos, dpos;                   // lattice id -> position or -1
    SpMat Kuu, Kub;
};

SplitOperator split_operator(const Lattice& L, const Stencil& s);

/// Preconditioned CG (incomplete Cholesky), relative residual tolerance,
/// iteration cap 10·N.
class SpdSolver {
public:
    explicit SpdSolver(double tol = 1e-12) : tol_(tol) {}
    void compute(const SpMat& A);
    VecX solve(const VecX& b) const;
    VecX solve(const VecX& b, const VecX& guess) const;
    int iterations() const { return iterations_; }
    double tolerance() const { return tol_; }

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    double tol_;
    mutable int iterations_ = 0;
};

/// Discrete Dirichlet form a_h(u,v) on Ω̄ for diagonal A: trapezoid-weighted
/// edge sum, so that a_h(u, e_i) = |cell| (-div A grad u)_i at interior nodes.
class DirichletForm {
public:
    DirichletForm(const Grid& g, const MatrixField& A);
    double operator()(std::span<const double> u, std::span<const double> v) const;

private:
    struct Edge {
        std::size_t i, j;
        double w;
    };
    std::vector<Edge> edges_;
};

/// Per-slice harmonic extension into Ω from ∂Ω values.
class HarmonicLifter {
public:
    explicit HarmonicLifter(const Grid& g);
    /// boundary values in Grid::boundary() order -> values on all Ω̄ nodes
    std::vector<double> extend(std::span<const double> boundary_values) const;

private:
    Grid grid_;
    SplitOperator op_;
    SpdSolver solver_;
};

}  // namespace dnprobe
