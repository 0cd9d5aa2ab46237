// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "chirpident/specest.hpp"

namespace chirpident {

/// Parameter-space bounds the hypotheses must respect.
struct Bounds {
  double tau_max = 0.0;
  double f_max = 0.0;
};

/// Stacked linear system tying per-pulse beat frequencies to the parameter
/// vector beta = [f_1..f_K, tau_1..tau_K]: row m of B is [1, -2*fc^m] and
/// A = B (x) I_K.
struct ConstraintSystem {
  Eigen::MatrixXd B;         ///< M x 2
  Eigen::MatrixXd A;         ///< MK x 2K Kronecker expansion of B
  Eigen::VectorXd nu_stack;  ///< MK estimated frequencies, pulse-major
  ChirpSchedule chirps;
  int K = 0;
  bool underdetermined = false;  ///< M < 2: 2K unknowns, only K equations
};

/// One (component k of pulse a, component l of pulse b) pairing and the
/// time/frequency shift that would explain it.
struct Hypothesis {
  int k = 0;
  int l = 0;
  double tau_h = 0.0;
  double f_h = 0.0;
  enum class Phase { untested, pass, fail };
  Phase phase_ok = Phase::untested;
  double phase_residual_cycles = 0.0;
};

/// Hypotheses generated from one sign-paired pulse pair.
struct PairHypotheses {
  std::vector<Hypothesis> hyps;
  int pulse_a = 0;
  int pulse_b = 0;
  double fc1 = 0.0;  ///< rate of the pair's first pulse
};

struct Triplet {
  double tau = 0.0;
  double f = 0.0;
  double phi = 0.0;
  double amp = 0.0;
};

struct MatchResult {
  std::vector<Triplet> triplets;
  double residual = 0.0;  ///< stacked least-squares residual norm
  std::vector<std::string> ambiguity_flags;
  int pulses_used = 0;
  bool complete() const { return ambiguity_flags.empty(); }
};

struct PhaseMatchOutcome {
  bool pass = false;
  double residual_cycles = 0.0;
};

struct LsFit {
  Eigen::VectorXd beta;  ///< [f_1..f_K, tau_1..tau_K]
  double residual = 0.0;
};

ConstraintSystem build_constraints(const ChirpSchedule& chirps,
                                   const std::vector<SinusoidEstimateSet>& estimates);

/// Evaluates every (k, l) pairing between two sign-paired pulses:
/// tau_h = (nu_k^1 - nu_l^2)/(-4*fc1), f_h = (nu_k^1 + nu_l^2)/2. Pairings
/// with tau_h outside [0, tau_max] or |f_h| >= f_max are dropped; the
/// tolerances widen those cuts for noisy estimates.
std::vector<Hypothesis> candidate_intersections(const SinusoidEstimateSet& est1,
                                                const SinusoidEstimateSet& est2,
                                                double fc1, const Bounds& bounds,
                                                double tau_tol = 0.0,
                                                double f_tol = 0.0);

/// Same-target test from the phase relation psi1 - psi2 = 2*fc1*tau_h^2,
/// compared on the branch of the cycle difference nearest the prediction.
PhaseMatchOutcome phase_match_check(const Hypothesis& h, double psi1, double psi2,
                                    double fc1, double tol_cycles);

/// Turns per-pair hypothesis sets into matched targets: pairings unique in
/// both components are accepted greedily; conflicted groups are intersected
/// across pairs by nearest-neighbour agreement in (tau, f) and, for residual
/// groups of up to 4, settled exhaustively. Unresolved groups are flagged and
/// a partial result returned.
MatchResult resolve_ambiguities(const std::vector<PairHypotheses>& pairs,
                                const std::vector<SinusoidEstimateSet>& estimates,
                                const ChirpSchedule& chirps, const Bounds& bounds,
                                double agree_tau_tol, double agree_f_tol);

/// Closed-form least squares for beta given per-pulse component assignments
/// (assignment[m][k] = component of pulse m explained by target k). Exploits
/// the Kronecker structure: the 2x2 Gram of B is all that gets inverted, and
/// it is diagonal for sign-paired schedules. Rejects schedules whose rates
/// are all equal.
LsFit ls_fit_parameters(const ConstraintSystem& system,
                        const std::vector<std::vector<int>>& assignment);

/// Noiseless matching: feasibility cuts plus the phase test on each
/// sign-paired pulse pair, then cross-pair resolution.
MatchResult match_noiseless(const std::vector<SinusoidEstimateSet>& estimates,
                            const ChirpSchedule& chirps, const Bounds& bounds,
                            double phase_tol_cycles = 1e-6);

/// Band widths and consistency scale for noisy matching.
struct MatchTolerances {
  double nu_tol = 0.0;    ///< band half-width per pulse (typically 3x root CRLB)
  double sigma_nu = 0.0;  ///< expected per-pulse frequency deviation; > 0
                          ///< enables the residual consistency gate
};

/// Noisy matching: phase tests disabled, feasibility and cross-pair agreement
/// widened to tolerance bands derived from the per-pulse frequency deviation
/// nu_tol. The assignment with the smallest stacked least-squares residual
/// wins; amplitudes are averaged across pulses. When sigma_nu is given, a
/// winning assignment whose residual is far beyond what that deviation
/// explains is flagged instead of silently accepted.
MatchResult match_noisy(const std::vector<SinusoidEstimateSet>& estimates,
                        const ChirpSchedule& chirps, const Bounds& bounds,
                        const MatchTolerances& tolerances);
MatchResult match_noisy(const std::vector<SinusoidEstimateSet>& estimates,
                        const ChirpSchedule& chirps, const Bounds& bounds,
                        double nu_tol);

/// Next sweep rate to probe with: over a 256-point grid of admissible rates,
/// maximizes the minimum distance to the slopes f_c(k,l) induced by the
/// current hypothesis points; falls back to continuing the sign-paired
/// schedule when there is nothing to separate.
double next_chirp_rate(const std::vector<Hypothesis>& hypotheses,
                       const std::vector<double>& rate_history, const Bounds& bounds);

struct PhiAmp {
  double phi = 0.0;
  double amp = 0.0;
};

/// Target phase and amplitude from a matched sign-paired pulse pair: the
/// fc*tau^2 offsets cancel in the phase average (branch chosen nearest the
/// model prediction); amplitudes are averaged.
PhiAmp recover_phase_amplitude(double psi1, double psi2, double fc1, double tau_hat,
                               double amp1, double amp2);

}  // namespace chirpident
