#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnprobe/dnmap.hpp"
#include "dnprobe/singular.hpp"

namespace dnprobe {

enum class Target { gamma, rho };
std::string target_name(Target t);
Target parse_target(const std::string& s);

/// weak: discrete weak form against the harmonic lift (default).
/// strong: 3-point boundary flux times the test probe.
enum class Pairing { weak, strong };

struct LawPair {
    MaterialLaw first, second;
};

struct RecoveryOptions {
    Pairing pairing = Pairing::weak;
    double convention = 1.0;  // multiplies the fundamental solution
};

/// Everything for one τ that does not depend on the coefficient laws.
struct ProbeBundle {
    Target target = Target::gamma;
    ProbeSpec spec;
    CutoffSet cut;
    SingularBasis basis;
    double energy = 0.0;
    std::vector<BoundaryField> forward;  // g (γ) or g_j (ρ)
    std::vector<BoundaryField> test;     // g (γ) or ḡ_j (ρ)
    std::vector<SpaceTimeField> lifted;  // lifts of test, weak pairing only
};

ProbeBundle prepare_probe(Target target, const MatrixField& A, const Grid& g, const ProbeSpec& probe,
                          const RecoveryOptions& opt = {});

/// Linear responses of one law to the bundle's forward probes.
struct LawResponse {
    std::vector<double> pairing;        // ⟨Λ g, test⟩ per probe
    std::vector<SpaceTimeField> fields; // kept for the oracle correction
};

LawResponse respond(const ProbeBundle& b, const MaterialLaw& law, const MatrixField& A, const Grid& g, double lambda,
                    const RecoveryOptions& opt = {}, bool keep_fields = false);

struct PointEstimate {
    double value = 0.0;    // (Σ pairing difference - oracle term) / energy
    double pairing = 0.0;  // Σ_j ⟨(Λ¹-Λ²) g_j, ḡ_j⟩
    double energy = 0.0;
    double oracle_term = 0.0;
    bool oracle_corrected = false;
};

PointEstimate combine(const ProbeBundle& b, const LawResponse& first, const LawResponse& second);

/// Estimate of γ¹(t₀,λ) - γ²(t₀,λ).
PointEstimate recover_gamma_point(const LawPair& pair, const MatrixField& A, const Grid& g, double lambda,
                                  const ProbeSpec& probe, const RecoveryOptions& opt = {});

/// Estimate of ρ¹(t₀,λ) - ρ²(t₀,λ); n ≥ 3, A = Id. When γ¹ ≠ γ² the interior
/// γ-cross term is removed with simulated fields (flagged as oracle_corrected).
PointEstimate recover_rho_point(const LawPair& pair, const Grid& g, double lambda, const ProbeSpec& probe,
                                const RecoveryOptions& opt = {});

struct SweepSettings {
    Target target = Target::gamma;
    Vec x0{0, 0, 0};
    double t0 = 0.0;
    double lambda = 0.0;
    CutoffOptions cut;
    std::optional<double> tau0;  // defaults to the admissibility radius
    std::vector<double> taus;
    RecoveryOptions rec;
    BoundaryNorm::Kind norm = BoundaryNorm::Kind::spectral;
};

ProbeSpec make_probe_spec(const Grid& g, const SweepSettings& s, double tau);

struct ReconstructionReport {
    Target target = Target::gamma;
    double t0 = 0.0, lambda = 0.0;
    std::vector<double> tau_sequence, raw_estimates, pairings, energies;
    double extrapolated_value = 0.0;
    bool extrapolated = false;
    std::string extrapolation_note;
    std::optional<double> psi_extrapolated;  // n = 2 γ: linear fit in a_τ |ln τ|^{-1/2}
    std::optional<double> reference_value;
    std::optional<double> fitted_rate;
    std::string rate_note;
    std::string norm_flag;
    bool oracle_corrected = false;
};

/// Extrapolation (e∞ + c τ^p) and rate from a finished sweep. n = 2 γ sweeps
/// also report the linear fit against a_τ |ln τ|^{-1/2}.
void summarize(ReconstructionReport& r, int dim, const ScaleRule& rule);

ReconstructionReport tau_sweep(const LawPair& pair, const MatrixField& A, const Grid& g, const SweepSettings& s,
                               std::optional<double> reference = std::nullopt);

/// law¹ = base + ε·perturbation, law² = base.
struct LawFamily {
    MaterialLaw base;
    ScalarLaw dgamma = ScalarLaw::constant(0.0);
    ScalarLaw drho = ScalarLaw::constant(0.0);
    MaterialLaw at(double eps) const;
};

struct StabilityRow {
    double eps = 0.0;
    double eta = 0.0;
    double true_diff = 0.0;      // sup |law¹ - law²| over the probed window at s = λ
    double reconstructed = 0.0;  // extrapolated (or finest) recovered difference
    double finest = 0.0;
    bool dropped = false;
    bool holder_ok = true;
    std::string note;
};

struct StabilityReport {
    Target target = Target::gamma;
    std::vector<StabilityRow> rows;
    std::optional<double> slope;     // γ: log-log slope of true_diff vs η̂
    std::optional<double> holder_c;  // ρ: C calibrated at the largest ε
    bool holder_ok = true;
    std::string norm_flag;
    std::size_t dictionary_size = 0;
};

struct StabilitySettings {
    SweepSettings sweep;
    std::vector<double> eps_list;
    int random_bumps = 16;
    std::uint64_t seed = 12345;
};

/// Probe family of the sweep plus seeded random bumps.
std::vector<BoundaryField> stability_dictionary(const MatrixField& A, const Grid& g, const StabilitySettings& s);

StabilityReport stability_experiment(const LawFamily& family, const MatrixField& A, const Grid& g,
                                     const StabilitySettings& s);

/// sup over the time samples in [lo, hi] of |a - b| at s = λ for the target coefficient.
double window_difference(Target target, const MaterialLaw& a, const MaterialLaw& b, double lambda, double lo,
                         double hi, const Grid& g);

}  // namespace dnprobe
