#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dnprobe/grid.hpp"

namespace dnprobe {

struct MaterialError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One closed-form term of a coefficient law.
///   constant   c
///   affine_t   c0 + c1 t
///   trig_t     c0 + amp sin(omega t + phase)
///   gauss_s    c0 + amp exp(-(s - s0)^2 / (2 w^2))
///   poly_s     c0 + c1 s + c2 s^2
struct LawTerm {
    enum class Kind { constant, affine_t, trig_t, gauss_s, poly_s };
    Kind kind = Kind::constant;
    std::array<double, 4> p{0, 0, 0, 0};

    double value(double t, double s) const;
    double d_dt(double t, double s) const;
    double d_ds(double t, double s) const;
};

/// Sum of built-in terms.
class ScalarLaw {
public:
    ScalarLaw() = default;
    explicit ScalarLaw(std::vector<LawTerm> terms) : terms_(std::move(terms)) {}

    static ScalarLaw constant(double c);
    static ScalarLaw affine_t(double c0, double c1);
    static ScalarLaw trig_t(double c0, double amp, double omega, double phase = 0.0);
    static ScalarLaw gauss_s(double c0, double amp, double s0, double width);
    static ScalarLaw poly_s(double c0, double c1, double c2);
    /// "name p1 p2 ... [+ name ...]"
    static ScalarLaw parse(const std::string& text);

    double operator()(double t, double s) const;
    double d_dt(double t, double s) const;
    double d_ds(double t, double s) const;
    /// true when no term depends on s
    bool s_independent() const;

    ScalarLaw operator+(const ScalarLaw& o) const;
    ScalarLaw scaled(double c) const;
    std::string describe() const;
    const std::vector<LawTerm>& terms() const { return terms_; }

private:
    std::vector<LawTerm> terms_;
};

struct MaterialLaw {
    ScalarLaw gamma_law = ScalarLaw::constant(1.0);
    ScalarLaw rho_law = ScalarLaw::constant(1.0);
    ScalarLaw m_floor = ScalarLaw::constant(0.0);    // depends on s only
    ScalarLaw kappa_cap = ScalarLaw::constant(1e300);

    double gamma(double t, double s) const { return gamma_law(t, s); }
    double rho(double t, double s) const { return rho_law(t, s); }
    double d_gamma_ds(double t, double s) const { return gamma_law.d_ds(t, s); }
    double d_rho_ds(double t, double s) const { return rho_law.d_ds(t, s); }
    double d_rho_dt(double t, double s) const { return rho_law.d_dt(t, s); }
    bool linear() const { return gamma_law.s_independent() && rho_law.s_independent(); }
};

using Mat = std::array<std::array<double, 3>, 3>;

/// Symmetric elliptic coefficient matrix, constant or a map x -> matrix.
class MatrixField {
public:
    MatrixField();  // identity
    static MatrixField identity() { return MatrixField(); }
    static MatrixField constant(const Mat& a);
    static MatrixField scalar(double c);
    static MatrixField diagonal(const Vec& d);
    static MatrixField variable(std::function<Mat(const Vec&)> fn, bool diagonal_only);
    /// "identity" | "scalar c" | "diag a b [c]" | "full a11 a12 a22" (2D) or 6 entries (3D)
    static MatrixField parse(const std::string& text, int dim);

    Mat at(const Vec& x) const { return fn_ ? fn_(x) : a_; }
    bool is_constant() const { return !fn_; }
    bool is_diagonal() const { return diagonal_; }
    bool is_identity() const;
    const Mat& value() const;  // constant case only
    /// Checks symmetry and ξᵀAξ ≥ c|ξ|² on samples; returns the smallest
    /// observed Rayleigh quotient. Throws on asymmetry.
    double check_elliptic(int dim, int samples = 256, unsigned seed = 7) const;
    std::string describe() const { return text_; }

private:
    Mat a_{};
    std::function<Mat(const Vec&)> fn_;
    bool diagonal_ = true;
    std::string text_ = "identity";
};

struct PredicateResult {
    std::string name;
    bool pass = true;
    double worst = 0.0;  // extreme sampled value relevant to the predicate
    double t = 0.0;
    double s = 0.0;
};

struct AdmissibilityReport {
    bool pass = true;
    double floor = 0.0;  // min over samples of min(γ, ρ)
    std::vector<PredicateResult> predicates;
};

/// Samples the positivity floors and the ∂tρ cap on t_grid × s_range
/// (s_samples points, default 256).
AdmissibilityReport check_admissible(const MaterialLaw& law, std::array<double, 2> s_range,
                                     const std::vector<double>& t_grid, int s_samples = 256,
                                     bool check_kappa = true);

struct InteriorMax {
    enum class Status { interior, boundary_violation, degenerate_zero };
    Status status = Status::interior;
    double t = 0.0;
    double value = 0.0;
};

/// Scans |ρ¹(·,λ) − ρ²(·,λ)| on t_grid; smallest interior maximizer wins.
InteriorMax check_interior_max(const MaterialLaw& a, const MaterialLaw& b, double lambda,
                               const std::vector<double>& t_grid);

std::vector<double> uniform_samples(double lo, double hi, int count);

}  // namespace dnprobe
