#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabdecomp/pauli.hpp"
#include "stabdecomp/selfcorrect.hpp"
#include "stabdecomp/statevec.hpp"

namespace stabdecomp {

inline constexpr double kPrefixTol = 1e-12;

struct Coefficients {
  std::vector<cplx> c;
  std::vector<double> r;
  // alpha[j] = r[0] * ... * r[j], the residual norm after j + 1 terms.
  std::vector<double> alpha;
};

// Throws DegenerateResidual when some prefix has 1 - sum |beta|^2 <= tol.
Coefficients recompute_coeffs(const std::vector<cplx>& beta, double tol = kPrefixTol);

struct ErrorSchedule {
  double eta = 0;

  double delta() const { return eta * eta * eta / 12; }
  double delta_t(int t) const;
};

enum class LearnerKind { bruteforce_agnostic, self_correct };

std::string to_string(LearnerKind k);

struct BaseLearner {
  LearnerKind provenance = LearnerKind::bruteforce_agnostic;
  std::function<StabilizerState(const StateVector&, RngStream&, CostLedger&)> learn;
  std::function<double(double)> eta;
};

inline constexpr double kBruteForceSlack = 1e-9;

BaseLearner base_learner_bruteforce(int n_cap = kMaxBruteForceQubits);

struct SelfCorrectLearnerConfig {
  OracleSpec oracle;
  // Planted mode only: each group is tried in turn and the best candidate kept.
  std::vector<Gf2Basis> planted_groups;
  double delta = 0.05;
  SelfCorrectConfig run;
  double c1 = 1.0;  // eta(eps) = c1 * eps^(6 c2)
  double c2 = 1.0;
};

BaseLearner base_learner_self_correct(SelfCorrectLearnerConfig config);

enum class StopReason { gowers_below, alpha_below, tomography_complete, budget };

std::string to_string(StopReason r);
StopReason parse_stop_reason(const std::string& s);

enum class OverlapEstimator { exact, sampled, adversarial };

std::string to_string(OverlapEstimator e);
OverlapEstimator parse_overlap_estimator(const std::string& s);

struct DecompTerm {
  cplx beta;
  StabilizerState phi;
};

struct IterationRecord {
  int t = 0;
  double proxy = 0;            // of the residual prepared at this step
  double learned_overlap = 0;  // |<phi_t|psi_t>|^2
  double lcu_success = 1;
  std::vector<cplx> beta_est;    // beta tilde^(t)
  std::vector<cplx> beta_exact;  // the same recursion on exact overlaps
  double delta_t = 0;
  double alpha_sq = 0;        // prod r tilde^2 after this step
  double alpha_sq_exact = 0;  // 1 - sum |beta_exact|^2
  double progress = 0;          // ||Psi_t||^2 - ||Psi_{t+1}||^2 from the vectors
  double progress_formula = 0;  // |c_t|^2 prod_{j<t} r_j^2
  double orthogonality = 0;     // |<phi_t|psi_{t+1}>|
};

struct Decomposition {
  int n = 0;
  double epsilon = 0;
  double eta = 0;
  double proxy_threshold = 0;
  std::size_t t_max = 0;
  std::vector<DecompTerm> terms;
  double alpha = 0;            // residual coefficient from the coefficient recursion
  double residual_norm = 0;    // ||psi - sum beta phi|| from the vectors
  StateVector residual;        // normalized phi_perp, or the zero vector
  std::optional<StopReason> stop_reason;
  std::size_t iterations = 0;
  CostLedger ledger;
  std::vector<IterationRecord> trace;

  // sum beta_i |phi_i>
  std::vector<cplx> structured() const;
};

nlohmann::json to_json(const Decomposition& d);

struct IterateConfig {
  OverlapEstimator estimator = OverlapEstimator::exact;
  EstimatorMode proxy_mode = EstimatorMode::exact;
  std::size_t t_max = 0;        // 0 means the loop's default budget
  double proxy_threshold = -1;  // negative means eps^6
};

// All estimates exact; t_max = ceil(1 / eta^2) by default.
Decomposition iterate_error_free(const StateVector& psi, double eps, const BaseLearner& learner,
                                 RngStream& rng, CostLedger& ledger, std::size_t t_max = 0);

// Re-estimates every overlap each iteration at tolerance schedule.delta_t(t);
// t_max = ceil(9 / eta^2) + 8 by default.
Decomposition iterate_robust(const StateVector& psi, double eps, const BaseLearner& learner,
                             const ErrorSchedule& schedule, const IterateConfig& config,
                             RngStream& rng, CostLedger& ledger);

// Explicit combination sum c_i |s_i>, normalized when used as a target.
struct StabCombination {
  std::vector<cplx> coeffs;
  std::vector<StabilizerState> states;

  double l1() const;
  std::vector<cplx> vector(int n) const;
};

nlohmann::json to_json(const StabCombination& c);
StabCombination stab_combination_from_json(const nlohmann::json& j);

struct LcuRecipe {
  std::vector<cplx> coeffs;
  std::vector<CliffordCircuit> circuits;
  double success_prob = 0;  // (||sum beta phi|| / sum |beta|)^2
};

struct LowExtentResult {
  Decomposition decomposition;
  double eps = 0;  // (eps' / (2 xi))^2
  StateVector phi;
  double overlap = 0;  // |<phi|psi>|^2
  LcuRecipe recipe;
};

nlohmann::json to_json(const LowExtentResult& r);

LowExtentResult learn_low_extent(const StateVector& psi, double xi, double eps_prime,
                                 const BaseLearner& learner, const IterateConfig& config,
                                 RngStream& rng, CostLedger& ledger);

struct MimicEntry {
  cplx with_state;      // <phi|psi>
  cplx with_structure;  // <phi|psi tilde>
  double deviation = 0;
  double fidelity_gap = 0;  // | |<phi|psi>|^2 - |<phi|psi tilde>|^2 |
};

struct MimicReport {
  double eps_prime = 0;  // xi sqrt(eps)
  double xi = 0;
  std::vector<MimicEntry> entries;
  double max_deviation = 0;
  double max_fidelity_gap = 0;
};

nlohmann::json to_json(const MimicReport& r);

// Throws std::invalid_argument if a target's l1 norm exceeds xi.
MimicReport mimic_compare(const StateVector& psi, const Decomposition& dec,
                          const std::vector<StabCombination>& targets, double xi);

// iterate_robust with the proxy threshold 2^{-2t} eps^6.
Decomposition decompose_stab_dim(const StateVector& psi, double eps, int t,
                                 const BaseLearner& learner, const ErrorSchedule& schedule,
                                 const IterateConfig& config, RngStream& rng, CostLedger& ledger);

}  // namespace stabdecomp
