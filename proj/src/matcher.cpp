// SPDX-License-Identifier: Apache-2.0
#include "chirpident/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace chirpident {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Absolute floors that keep the zero-tolerance (clean) limit workable in
// floating point.
constexpr double kTauFloor = 1e-12;
constexpr double kFreqFloor = 1e-9;
constexpr double kClaimFloor = 1e-6;

struct SignPair {
  int a, b;    // pulse indices
  double fc1;  // rate of pulse a; pulse b carries -fc1
};

std::vector<SignPair> sign_pairs(const ChirpSchedule& chirps) {
  std::vector<SignPair> pairs;
  for (std::size_t m = 0; m + 1 < chirps.size(); m += 2) {
    const double fa = chirps[m].fc;
    const double fb = chirps[m + 1].fc;
    if (std::abs(fa + fb) > 1e-9 * std::max(std::abs(fa), 1.0))
      throw ValidationError("schedule is not sign-paired: pulse " + std::to_string(m + 1) +
                            " does not carry the negated rate of pulse " + std::to_string(m));
    if (fa == 0.0) throw ValidationError("sign-paired schedule needs nonzero rates");
    pairs.push_back({static_cast<int>(m), static_cast<int>(m + 1), fa});
  }
  return pairs;
}

int common_component_count(const std::vector<SinusoidEstimateSet>& estimates) {
  if (estimates.empty()) throw ValidationError("matcher: no estimate sets given");
  const int K = static_cast<int>(estimates[0].components.size());
  for (const auto& est : estimates)
    if (static_cast<int>(est.components.size()) != K)
      throw ValidationError("matcher: inconsistent component count across pulses");
  if (K < 1) throw ValidationError("matcher: estimate sets are empty");
  return K;
}

// All bipartite perfect matchings over `rows`, capped; overflow means the
// group is treated as unresolved.
void enumerate_matchings(const std::vector<Hypothesis>& edges, const std::vector<int>& rows,
                         std::size_t row_pos, std::vector<Hypothesis>& current,
                         std::set<int>& used_cols,
                         std::vector<std::vector<Hypothesis>>& out, std::size_t cap) {
  if (out.size() > cap) return;
  if (row_pos == rows.size()) {
    out.push_back(current);
    return;
  }
  const int row = rows[row_pos];
  for (const Hypothesis& h : edges) {
    if (h.k != row || used_cols.count(h.l)) continue;
    used_cols.insert(h.l);
    current.push_back(h);
    enumerate_matchings(edges, rows, row_pos + 1, current, used_cols, out, cap);
    current.pop_back();
    used_cols.erase(h.l);
  }
}

struct Engine {
  const std::vector<SinusoidEstimateSet>& estimates;
  const ChirpSchedule& chirps;
  double agree_tau;
  double agree_f;
  double nu_tol;
  double min_rate;
  int K;

  // Smallest normalized distance to a corroborating hypothesis in any other
  // pair; infinity when no pair agrees within tolerance.
  double cross_support(const Hypothesis& h, const std::vector<PairHypotheses>& pairs,
                       std::size_t skip) const {
    double best = kInf;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (p == skip) continue;
      for (const auto& other : pairs[p].hyps) {
        if (std::abs(other.tau_h - h.tau_h) <= agree_tau &&
            std::abs(other.f_h - h.f_h) <= agree_f) {
          const double d = std::hypot((other.tau_h - h.tau_h) / agree_tau,
                                      (other.f_h - h.f_h) / agree_f);
          best = std::min(best, d);
        }
      }
    }
    return best;
  }

  // Beat-frequency window for claiming a component on pulse m: the predicted
  // frequency inherits the hypothesis tau error amplified by the pulse's own
  // sweep rate.
  double claim_tol(int m) const {
    return 2.0 * nu_tol * (1.0 + std::abs(chirps[m].fc) / min_rate) + kClaimFloor;
  }

  // Greedy constraint propagation: a pairing that is the only candidate left
  // in its row or column is forced; accept it and retire both.
  void propagate(std::vector<Hypothesis>& active, std::vector<Hypothesis>& accepted,
                 std::vector<bool>& row_done, std::vector<bool>& col_done) const {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<int> row_count(K, 0), col_count(K, 0);
      for (const auto& h : active) {
        ++row_count[h.k];
        ++col_count[h.l];
      }
      for (const auto& h : active) {
        if (row_count[h.k] == 1 || col_count[h.l] == 1) {
          const Hypothesis chosen = h;
          accepted.push_back(chosen);
          row_done[chosen.k] = true;
          col_done[chosen.l] = true;
          std::erase_if(active, [&](const Hypothesis& o) {
            return o.k == chosen.k || o.l == chosen.l;
          });
          changed = true;
          break;
        }
      }
    }
  }

  // Component claims across every pulse for a candidate target list; empty on
  // failure.
  std::vector<std::vector<int>> claim_components(const std::vector<Hypothesis>& targets,
                                                 int pulse_a, int pulse_b) const {
    const int M = static_cast<int>(estimates.size());
    const int T = static_cast<int>(targets.size());
    std::vector<std::vector<int>> assignment(M, std::vector<int>(T, -1));
    for (int m = 0; m < M; ++m) {
      if (m == pulse_a) {
        for (int j = 0; j < T; ++j) assignment[m][j] = targets[j].k;
        continue;
      }
      if (m == pulse_b) {
        for (int j = 0; j < T; ++j) assignment[m][j] = targets[j].l;
        continue;
      }
      struct Claim {
        double dist;
        int target, comp;
      };
      std::vector<Claim> claims;
      const double tol = claim_tol(m);
      for (int j = 0; j < T; ++j) {
        const double nu_pred = targets[j].f_h - 2.0 * chirps[m].fc * targets[j].tau_h;
        for (int c = 0; c < K; ++c) {
          const double d = std::abs(estimates[m].components[c].nu_hat - nu_pred);
          if (d <= tol) claims.push_back({d, j, c});
        }
      }
      std::sort(claims.begin(), claims.end(), [](const Claim& x, const Claim& y) {
        if (x.dist != y.dist) return x.dist < y.dist;
        if (x.target != y.target) return x.target < y.target;
        return x.comp < y.comp;
      });
      std::vector<bool> comp_used(K, false);
      int assigned = 0;
      for (const auto& cl : claims) {
        if (assignment[m][cl.target] >= 0 || comp_used[cl.comp]) continue;
        assignment[m][cl.target] = cl.comp;
        comp_used[cl.comp] = true;
        ++assigned;
      }
      if (assigned < T) return {};
    }
    return assignment;
  }

  LsFit fit_targets(const std::vector<std::vector<int>>& assignment, int T) const {
    const int M = static_cast<int>(estimates.size());
    ConstraintSystem sub;
    sub.K = T;
    sub.chirps = chirps;
    sub.underdetermined = M < 2;
    sub.B.resize(M, 2);
    sub.A = Eigen::MatrixXd::Zero(M * T, 2 * T);
    sub.nu_stack.resize(M * T);
    for (int m = 0; m < M; ++m) {
      sub.B(m, 0) = 1.0;
      sub.B(m, 1) = -2.0 * chirps[m].fc;
      for (int j = 0; j < T; ++j) {
        sub.A(m * T + j, j) = 1.0;
        sub.A(m * T + j, T + j) = -2.0 * chirps[m].fc;
        sub.nu_stack[m * T + j] = estimates[m].components[assignment[m][j]].nu_hat;
      }
    }
    std::vector<std::vector<int>> identity(M, std::vector<int>(T));
    for (int m = 0; m < M; ++m)
      for (int j = 0; j < T; ++j) identity[m][j] = j;
    return ls_fit_parameters(sub, identity);
  }

  MatchResult run(const std::vector<PairHypotheses>& pairs) const {
    MatchResult result;
    result.pulses_used = static_cast<int>(estimates.size());
    if (pairs.empty()) {
      result.ambiguity_flags.push_back("no sign-paired pulse pairs available");
      return result;
    }

    std::vector<Hypothesis> active = pairs[0].hyps;
    std::vector<Hypothesis> accepted;
    std::vector<bool> row_done(K, false), col_done(K, false);

    propagate(active, accepted, row_done, col_done);

    // Surviving conflicts: keep only hypotheses some other pair corroborates.
    if (!active.empty() && pairs.size() > 1) {
      std::erase_if(active,
                    [&](const Hypothesis& h) { return cross_support(h, pairs, 0) == kInf; });
      propagate(active, accepted, row_done, col_done);
    }

    // Remaining conflict groups: enumerate each group's complete matchings and
    // settle the cartesian product by the stacked least-squares residual.
    std::vector<std::vector<std::vector<Hypothesis>>> group_matchings;
    if (!active.empty()) {
      std::vector<int> comp(active.size(), -1);
      int n_comp = 0;
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (comp[i] >= 0) continue;
        comp[i] = n_comp;
        bool grew = true;
        while (grew) {
          grew = false;
          for (std::size_t a = 0; a < active.size(); ++a) {
            if (comp[a] != n_comp) continue;
            for (std::size_t b = 0; b < active.size(); ++b) {
              if (comp[b] == -1 &&
                  (active[b].k == active[a].k || active[b].l == active[a].l)) {
                comp[b] = n_comp;
                grew = true;
              }
            }
          }
        }
        ++n_comp;
      }

      for (int c = 0; c < n_comp; ++c) {
        std::vector<Hypothesis> edges;
        std::set<int> rows_set;
        for (std::size_t i = 0; i < active.size(); ++i) {
          if (comp[i] == c) {
            edges.push_back(active[i]);
            rows_set.insert(active[i].k);
          }
        }
        const std::vector<int> rows(rows_set.begin(), rows_set.end());
        if (rows.size() > 4) {
          result.ambiguity_flags.push_back("conflict group of " + std::to_string(rows.size()) +
                                           " components too large to resolve");
          continue;
        }
        std::vector<std::vector<Hypothesis>> matchings;
        std::vector<Hypothesis> current;
        std::set<int> used_cols;
        enumerate_matchings(edges, rows, 0, current, used_cols, matchings, 64);
        if (matchings.empty()) {
          result.ambiguity_flags.push_back("conflict group has no complete matching");
          continue;
        }
        group_matchings.push_back(std::move(matchings));
      }
    }

    // Cartesian product of per-group choices, each completed with component
    // claims over every pulse and scored by the stacked residual.
    std::size_t combos = 1;
    for (const auto& g : group_matchings) combos *= g.size();
    if (combos > 256) {
      result.ambiguity_flags.push_back("too many candidate matchings to enumerate");
      group_matchings.clear();
      combos = 0;
    }

    struct Candidate {
      std::vector<Hypothesis> targets;
      std::vector<std::vector<int>> assignment;
      LsFit fit;
    };
    std::vector<Candidate> viable;
    double best_res = kInf;
    std::size_t best_idx = 0;
    const std::size_t n_combo = group_matchings.empty() ? 1 : combos;
    for (std::size_t combo = 0; combo < n_combo; ++combo) {
      Candidate cand;
      cand.targets = accepted;
      std::size_t rest = combo;
      bool separated = true;
      for (const auto& g : group_matchings) {
        const auto& chosen = g[rest % g.size()];
        rest /= g.size();
        for (std::size_t i = 0; i < chosen.size(); ++i)
          for (std::size_t j = i + 1; j < chosen.size(); ++j)
            if (std::abs(chosen[i].tau_h - chosen[j].tau_h) <= agree_tau &&
                std::abs(chosen[i].f_h - chosen[j].f_h) <= agree_f)
              separated = false;
        cand.targets.insert(cand.targets.end(), chosen.begin(), chosen.end());
      }
      if (!separated || cand.targets.empty()) continue;
      cand.assignment =
          claim_components(cand.targets, pairs[0].pulse_a, pairs[0].pulse_b);
      if (cand.assignment.empty()) continue;
      cand.fit = fit_targets(cand.assignment, static_cast<int>(cand.targets.size()));
      if (cand.fit.residual < best_res) {
        best_res = cand.fit.residual;
        best_idx = viable.size();
      }
      viable.push_back(std::move(cand));
    }

    if (viable.empty()) {
      if (result.ambiguity_flags.empty())
        result.ambiguity_flags.push_back(
            group_matchings.empty() && combos == 1 && accepted.empty()
                ? "no feasible matching"
                : "no candidate matching claims a component in every pulse");
      for (const Hypothesis& h : accepted) {
        Triplet trip;
        trip.tau = h.tau_h;
        trip.f = h.f_h;
        result.triplets.push_back(trip);
      }
      for (int r = 0; r < K; ++r)
        if (!row_done[r])
          result.ambiguity_flags.push_back("component " + std::to_string(r) + " of pulse " +
                                           std::to_string(pairs[0].pulse_a) +
                                           " has no accepted match");
      return result;
    }

    // Residual ties between parameter-distinct candidates are real
    // ambiguities; ties between equivalent parameter sets are not.
    const Candidate& best = viable[best_idx];
    const double res_tol = 1e-9 + 1e-6 * std::abs(best_res);
    for (std::size_t i = 0; i < viable.size(); ++i) {
      if (i == best_idx || viable[i].fit.residual > best_res + res_tol) continue;
      for (const Hypothesis& h : viable[i].targets) {
        double nearest = kInf;
        for (const Hypothesis& g : best.targets)
          nearest = std::min(nearest, std::max(std::abs(h.tau_h - g.tau_h) / agree_tau,
                                               std::abs(h.f_h - g.f_h) / agree_f));
        if (nearest > 1.0) {
          result.ambiguity_flags.push_back("conflict group irreducibly ambiguous");
          break;
        }
      }
      if (!result.ambiguity_flags.empty()) break;
    }

    for (const Hypothesis& h : best.targets) {
      row_done[h.k] = true;
      col_done[h.l] = true;
    }
    for (int r = 0; r < K; ++r)
      if (!row_done[r])
        result.ambiguity_flags.push_back("component " + std::to_string(r) + " of pulse " +
                                         std::to_string(pairs[0].pulse_a) +
                                         " has no accepted match");

    const int M = static_cast<int>(estimates.size());
    const int T = static_cast<int>(best.targets.size());
    result.residual = best.fit.residual;
    for (int j = 0; j < T; ++j) {
      Triplet trip;
      trip.f = best.fit.beta[j];
      trip.tau = best.fit.beta[T + j];
      const auto& ca = estimates[pairs[0].pulse_a].components[best.targets[j].k];
      const auto& cb = estimates[pairs[0].pulse_b].components[best.targets[j].l];
      const PhiAmp pa = recover_phase_amplitude(ca.psi_hat, cb.psi_hat, pairs[0].fc1,
                                                trip.tau, ca.amp_hat, cb.amp_hat);
      trip.phi = pa.phi;
      double amp_sum = 0.0;
      for (int m = 0; m < M; ++m)
        amp_sum += estimates[m].components[best.assignment[m][j]].amp_hat;
      trip.amp = amp_sum / M;
      result.triplets.push_back(trip);
    }
    return result;
  }
};

}  // namespace

ConstraintSystem build_constraints(const ChirpSchedule& chirps,
                                   const std::vector<SinusoidEstimateSet>& estimates) {
  if (chirps.size() != estimates.size())
    throw ValidationError("build_constraints: schedule and estimate counts differ");
  const int K = common_component_count(estimates);
  const int M = static_cast<int>(chirps.size());

  ConstraintSystem sys;
  sys.K = K;
  sys.chirps = chirps;
  sys.underdetermined = M < 2;
  sys.B.resize(M, 2);
  sys.A = Eigen::MatrixXd::Zero(M * K, 2 * K);
  sys.nu_stack.resize(M * K);
  for (int m = 0; m < M; ++m) {
    sys.B(m, 0) = 1.0;
    sys.B(m, 1) = -2.0 * chirps[m].fc;
    for (int k = 0; k < K; ++k) {
      sys.A(m * K + k, k) = sys.B(m, 0);
      sys.A(m * K + k, K + k) = sys.B(m, 1);
      sys.nu_stack[m * K + k] = estimates[m].components[k].nu_hat;
    }
  }
  return sys;
}

std::vector<Hypothesis> candidate_intersections(const SinusoidEstimateSet& est1,
                                                const SinusoidEstimateSet& est2,
                                                double fc1, const Bounds& bounds,
                                                double tau_tol, double f_tol) {
  if (fc1 == 0.0) throw ValidationError("candidate_intersections: fc1 must be nonzero");
  std::vector<Hypothesis> hyps;
  const int K1 = static_cast<int>(est1.components.size());
  const int K2 = static_cast<int>(est2.components.size());
  hyps.reserve(static_cast<std::size_t>(K1) * K2);
  for (int k = 0; k < K1; ++k) {
    for (int l = 0; l < K2; ++l) {
      const auto shift =
          invert_pair(est1.components[k].nu_hat, est2.components[l].nu_hat, fc1);
      if (shift.tau < -tau_tol || shift.tau > bounds.tau_max + tau_tol) continue;
      if (std::abs(shift.f) >= bounds.f_max + f_tol) continue;
      Hypothesis h;
      h.k = k;
      h.l = l;
      h.tau_h = shift.tau;
      h.f_h = shift.f;
      hyps.push_back(h);
    }
  }
  return hyps;
}

PhaseMatchOutcome phase_match_check(const Hypothesis& h, double psi1, double psi2,
                                    double fc1, double tol_cycles) {
  if (fc1 == 0.0) throw ValidationError("phase_match_check: fc1 must be nonzero");
  const double predicted = 2.0 * fc1 * h.tau_h * h.tau_h;
  const double residual = wrap_centered(psi1 - psi2 - predicted);
  return {std::abs(residual) <= tol_cycles, residual};
}

MatchResult resolve_ambiguities(const std::vector<PairHypotheses>& pairs,
                                const std::vector<SinusoidEstimateSet>& estimates,
                                const ChirpSchedule& chirps, const Bounds& /*bounds*/,
                                double agree_tau_tol, double agree_f_tol) {
  double min_rate = kInf;
  for (const auto& c : chirps) min_rate = std::min(min_rate, std::abs(c.fc));
  if (!std::isfinite(min_rate) || min_rate <= 0.0) min_rate = 1.0;
  const Engine engine{estimates, chirps, std::max(agree_tau_tol, kTauFloor),
                      std::max(agree_f_tol, kFreqFloor), 0.0, min_rate,
                      common_component_count(estimates)};
  return engine.run(pairs);
}

LsFit ls_fit_parameters(const ConstraintSystem& system,
                        const std::vector<std::vector<int>>& assignment) {
  const int M = static_cast<int>(system.B.rows());
  const int K = system.K;
  if (static_cast<int>(assignment.size()) != M)
    throw ValidationError("ls_fit_parameters: assignment must cover every pulse");
  for (const auto& perm : assignment)
    if (static_cast<int>(perm.size()) != K)
      throw ValidationError("ls_fit_parameters: assignment must cover every component");

  const Eigen::Matrix2d G = system.B.transpose() * system.B;
  const double det = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
  if (std::abs(det) <= 1e-12 * std::max(1.0, G(0, 0) * G(1, 1)))
    throw ValidationError("ls_fit_parameters: all chirp rates equal, system rank-deficient");
  const Eigen::Matrix2d Ginv = G.inverse();
  const Eigen::MatrixXd W = Ginv * system.B.transpose();  // 2 x M

  LsFit fit;
  fit.beta.resize(2 * K);
  Eigen::VectorXd permuted(M * K);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k)
      permuted[m * K + k] = system.nu_stack[m * K + assignment[m][k]];

  for (int k = 0; k < K; ++k) {
    double f_hat = 0.0, tau_hat = 0.0;
    for (int m = 0; m < M; ++m) {
      f_hat += W(0, m) * permuted[m * K + k];
      tau_hat += W(1, m) * permuted[m * K + k];
    }
    fit.beta[k] = f_hat;
    fit.beta[K + k] = tau_hat;
  }
  fit.residual = (system.A * fit.beta - permuted).norm();
  return fit;
}

MatchResult match_noiseless(const std::vector<SinusoidEstimateSet>& estimates,
                            const ChirpSchedule& chirps, const Bounds& bounds,
                            double phase_tol_cycles) {
  common_component_count(estimates);
  if (chirps.size() != estimates.size())
    throw ValidationError("match_noiseless: schedule and estimate counts differ");
  const auto sp = sign_pairs(chirps);

  std::vector<PairHypotheses> pairs;
  for (const auto& pr : sp) {
    PairHypotheses ph;
    ph.pulse_a = pr.a;
    ph.pulse_b = pr.b;
    ph.fc1 = pr.fc1;
    auto hyps = candidate_intersections(estimates[pr.a], estimates[pr.b], pr.fc1, bounds);
    for (auto& h : hyps) {
      const auto outcome =
          phase_match_check(h, estimates[pr.a].components[h.k].psi_hat,
                            estimates[pr.b].components[h.l].psi_hat, pr.fc1, phase_tol_cycles);
      h.phase_ok = outcome.pass ? Hypothesis::Phase::pass : Hypothesis::Phase::fail;
      h.phase_residual_cycles = outcome.residual_cycles;
      if (outcome.pass) ph.hyps.push_back(h);
    }
    pairs.push_back(std::move(ph));
  }

  const double agree_tau = std::max(1e-6 * bounds.tau_max, kTauFloor);
  const double agree_f = std::max(1e-6 * bounds.f_max, kFreqFloor);
  return resolve_ambiguities(pairs, estimates, chirps, bounds, agree_tau, agree_f);
}

MatchResult match_noisy(const std::vector<SinusoidEstimateSet>& estimates,
                        const ChirpSchedule& chirps, const Bounds& bounds,
                        double nu_tol) {
  return match_noisy(estimates, chirps, bounds, MatchTolerances{nu_tol, 0.0});
}

MatchResult match_noisy(const std::vector<SinusoidEstimateSet>& estimates,
                        const ChirpSchedule& chirps, const Bounds& bounds,
                        const MatchTolerances& tolerances) {
  const double nu_tol = tolerances.nu_tol;
  const int K = common_component_count(estimates);
  if (chirps.size() != estimates.size())
    throw ValidationError("match_noisy: schedule and estimate counts differ");
  if (nu_tol < 0.0) throw ValidationError("match_noisy: nu_tol must be nonnegative");
  const auto sp = sign_pairs(chirps);
  if (sp.empty()) throw ValidationError("match_noisy: need at least one sign-paired pair");

  double min_rate = kInf;
  for (const auto& pr : sp) min_rate = std::min(min_rate, std::abs(pr.fc1));

  std::vector<PairHypotheses> pairs;
  for (const auto& pr : sp) {
    PairHypotheses ph;
    ph.pulse_a = pr.a;
    ph.pulse_b = pr.b;
    ph.fc1 = pr.fc1;
    const double tau_tol = nu_tol / (2.0 * std::abs(pr.fc1));
    ph.hyps = candidate_intersections(estimates[pr.a], estimates[pr.b], pr.fc1, bounds,
                                      tau_tol, nu_tol);
    pairs.push_back(std::move(ph));
  }

  const Engine engine{estimates, chirps, std::max(nu_tol / min_rate, kTauFloor),
                      std::max(nu_tol, kFreqFloor), nu_tol, min_rate, K};
  MatchResult result = engine.run(pairs);

  // An assignment whose residual cannot be explained by the expected
  // per-pulse deviation is a mismatch, not a solution.
  if (tolerances.sigma_nu > 0.0 && result.complete()) {
    const double gate = 5.0 * tolerances.sigma_nu *
                        std::sqrt(static_cast<double>(chirps.size()) * K);
    if (result.residual > gate)
      result.ambiguity_flags.push_back("assignment residual inconsistent with noise level");
  }
  return result;
}

double next_chirp_rate(const std::vector<Hypothesis>& hypotheses,
                       const std::vector<double>& rate_history, const Bounds& bounds) {
  if (bounds.tau_max <= 0.0)
    throw ValidationError("next_chirp_rate: tau_max must be positive");
  const double bound = 1.0 / (bounds.tau_max * bounds.tau_max);

  std::vector<double> slopes;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    for (std::size_t j = i + 1; j < hypotheses.size(); ++j) {
      const double dtau = hypotheses[i].tau_h - hypotheses[j].tau_h;
      if (std::abs(dtau) < 1e-15) continue;
      const double s = std::abs((hypotheses[i].f_h - hypotheses[j].f_h) / (2.0 * dtau));
      if (s > 0.0 && s <= bound * (1.0 + 1e-12)) slopes.push_back(s);
    }
  }

  auto fallback = [&]() {
    if (rate_history.empty()) return bound;
    const double last = rate_history.back();
    if (rate_history.size() % 2 == 1) return -last;  // complete the sign pair
    return std::min(2.0 * std::abs(last), bound);
  };
  if (slopes.empty()) return fallback();

  constexpr int kGrid = 256;
  double best_score = -1.0, worst_score = kInf;
  double best_rate = bound;
  for (int g = 1; g <= kGrid; ++g) {
    const double r = bound * g / kGrid;
    double score = kInf;
    for (double s : slopes) score = std::min(score, std::abs(r - s));
    if (score > best_score) {
      best_score = score;
      best_rate = r;
    }
    worst_score = std::min(worst_score, score);
  }
  if (best_score - worst_score < 1e-15) return fallback();
  return best_rate;
}

PhiAmp recover_phase_amplitude(double psi1, double psi2, double fc1, double tau_hat,
                               double amp1, double amp2) {
  // Each pulse predicts the target phase once its quadratic offset is
  // removed; the circular mean settles the half-cycle branch of the naive
  // (psi1+psi2)/2 average.
  const double offset = fc1 * tau_hat * tau_hat;
  const std::complex<double> za = std::polar(1.0, two_pi * (psi1 - offset));
  const std::complex<double> zb = std::polar(1.0, two_pi * (psi2 + offset));
  PhiAmp out;
  out.phi = wrap_cycles(std::arg(za + zb) / two_pi);
  out.amp = 0.5 * (amp1 + amp2);
  return out;
}

}  // namespace chirpident
