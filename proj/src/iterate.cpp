#include "stabdecomp/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stabdecomp {

namespace {

void check_eps(double eps) {
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("epsilon must lie in (0,1]");
}

nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx complex_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

double sum_sq(const std::vector<cplx>& v) {
  double s = 0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

// psi - sum_{i < count} beta_i phi_i
std::vector<cplx> residual_vector(const StateVector& psi, const std::vector<StateVector>& phis,
                                  const std::vector<cplx>& beta, std::size_t count) {
  std::vector<cplx> v = psi.amp;
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= beta[j] * phis[j].amp[i];
  }
  return v;
}

cplx inner_raw(const StateVector& a, const std::vector<cplx>& b) {
  cplx s = 0;
  for (std::size_t i = 0; i < b.size(); ++i) s += std::conj(a.amp[i]) * b[i];
  return s;
}

struct LoopSettings {
  double eta = 0;
  double threshold = 0;
  std::size_t t_max = 0;
  bool robust = false;
  ErrorSchedule schedule;
  OverlapEstimator estimator = OverlapEstimator::exact;
  EstimatorMode proxy_mode = EstimatorMode::exact;
};

// The overlap estimates zeta_j^(t) for j <= t. Adversarial mode places an
// error of magnitude exactly delta_t in the direction that grows the error
// already carried by the beta recursion.
std::vector<cplx> estimate_overlaps(const StateVector& psi, const std::vector<StateVector>& phis,
                                    const std::vector<cplx>& exact,
                                    const std::vector<std::vector<cplx>>& gram, int t,
                                    const LoopSettings& s, RngStream& rng, CostLedger& ledger) {
  std::vector<cplx> zeta(exact.size());
  if (!s.robust) return exact;
  const double dt = s.schedule.delta_t(t);
  const double fail = std::min(0.5, s.schedule.delta());
  std::vector<cplx> err(exact.size());
  for (std::size_t j = 0; j < exact.size(); ++j) {
    auto r = rng.child(static_cast<std::uint64_t>(j));
    switch (s.estimator) {
      case OverlapEstimator::exact:
        zeta[j] = hadamard_test_estimate(phis[j], psi, dt / std::numbers::sqrt2, fail,
                                         EstimatorMode::exact, r, ledger);
        break;
      case OverlapEstimator::sampled:
        zeta[j] = hadamard_test_estimate(phis[j], psi, dt / std::numbers::sqrt2, fail,
                                         EstimatorMode::sampled, r, ledger);
        break;
      case OverlapEstimator::adversarial: {
        hadamard_test_estimate(phis[j], psi, dt / std::numbers::sqrt2, fail, EstimatorMode::exact, r,
                               ledger);
        cplx carried = 0;
        for (std::size_t i = 0; i < j; ++i) carried -= err[i] * gram[j][i];
        cplx dir = std::abs(carried) > 0 ? carried / std::abs(carried)
                                         : std::polar(1.0, 2 * std::numbers::pi * r.uniform());
        zeta[j] = exact[j] + dt * dir;
        err[j] = dt * dir + carried;
        break;
      }
    }
  }
  return zeta;
}

std::vector<cplx> beta_recursion(const std::vector<cplx>& zeta,
                                 const std::vector<std::vector<cplx>>& gram) {
  std::vector<cplx> beta(zeta.size());
  for (std::size_t j = 0; j < zeta.size(); ++j) {
    beta[j] = zeta[j];
    for (std::size_t i = 0; i < j; ++i) beta[j] -= beta[i] * gram[j][i];
  }
  return beta;
}

double estimate_proxy(const StateVector& psi_t, const LoopSettings& s, int t, RngStream& rng,
                      CostLedger& ledger) {
  if (!s.robust) return gowers3_exact(psi_t).proxy;
  const double acc = s.threshold / 2;
  const double fail = std::min(0.5, s.schedule.delta());
  if (s.proxy_mode == EstimatorMode::sampled) {
    auto r = rng.child(static_cast<std::uint64_t>(t));
    return gowers3_sampled(psi_t, acc, fail, r, ledger).proxy;
  }
  const auto shots = hoeffding_shots(acc, fail);
  ledger.charge("gowers3", {.copies = shots > ~std::uint64_t{0} / 10 ? ~std::uint64_t{0} : 10 * shots});
  return gowers3_exact(psi_t).proxy;
}

Decomposition run_loop(const StateVector& psi, double eps, const BaseLearner& learner,
                       const LoopSettings& s, RngStream& rng, CostLedger& outer) {
  Decomposition d;
  d.n = psi.n;
  d.epsilon = eps;
  d.eta = s.eta;
  d.proxy_threshold = s.threshold;
  d.t_max = s.t_max;
  CostLedger& ledger = d.ledger;

  std::vector<StabilizerState> phis;
  std::vector<StateVector> vecs;
  std::vector<cplx> exact_overlap;
  std::vector<std::vector<cplx>> gram;
  std::vector<cplx> beta;
  double alpha = 1;  // alpha_1^(0)

  auto stop = [&](StopReason r) {
    if (d.stop_reason) throw std::logic_error("stop reason set twice");
    d.stop_reason = r;
  };

  for (std::size_t t = 1; t <= s.t_max; ++t) {
    const int ti = static_cast<int>(t);
    if (alpha * alpha < eps) {
      stop(StopReason::alpha_below);
      break;
    }
    StateVector psi_t = psi;
    double success = 1;
    if (t > 1) {
      try {
        const auto lcu = lcu_residual(psi, phis, beta, alpha, ledger);
        psi_t = lcu.residual;
        success = lcu.success_prob;
      } catch (const DegenerateResidual&) {
        stop(StopReason::tomography_complete);
        break;
      }
    }
    auto proxy_rng = rng.child("proxy");
    const double proxy = estimate_proxy(psi_t, s, ti, proxy_rng, ledger);
    if (proxy < s.threshold) {
      stop(StopReason::gowers_below);
      break;
    }
    auto learn_rng = rng.child("learner").child(t);
    StabilizerState phi = learner.learn(psi_t, learn_rng, ledger);
    StateVector v = StateVector::from_stabilizer(phi);

    IterationRecord rec;
    rec.t = ti;
    rec.proxy = proxy;
    rec.lcu_success = success;
    rec.learned_overlap = overlap_sq(v, psi_t);

    std::vector<cplx> row;
    for (const auto& u : vecs) row.push_back(inner(v, u));
    gram.push_back(row);
    phis.push_back(std::move(phi));
    vecs.push_back(std::move(v));
    exact_overlap.push_back(inner(vecs.back(), psi));

    auto est_rng = rng.child("overlap").child(t);
    const auto zeta = estimate_overlaps(psi, vecs, exact_overlap, gram, ti, s, est_rng, ledger);
    beta = beta_recursion(zeta, gram);
    rec.beta_est = beta;
    rec.beta_exact = beta_recursion(exact_overlap, gram);
    rec.delta_t = s.robust ? s.schedule.delta_t(ti) : 0.0;
    rec.alpha_sq_exact = 1 - sum_sq(rec.beta_exact);

    const auto before = residual_vector(psi, vecs, beta, t - 1);
    const auto after = residual_vector(psi, vecs, beta, t);
    double nb = 0, na = 0;
    for (const auto& z : before) nb += std::norm(z);
    for (const auto& z : after) na += std::norm(z);
    rec.progress = nb - na;
    rec.orthogonality = na > 1e-24 ? std::abs(inner_raw(vecs.back(), after)) / std::sqrt(na) : 0.0;

    bool degenerate = false;
    try {
      const auto co = recompute_coeffs(beta);
      const double prev = co.alpha.size() > 1 ? co.alpha[co.alpha.size() - 2] : 1.0;
      rec.progress_formula = std::norm(co.c.back()) * prev * prev;
      alpha = co.alpha.back();
    } catch (const DegenerateResidual&) {
      degenerate = true;
      rec.progress_formula = std::norm(beta.back());
      alpha = 0;
    }
    rec.alpha_sq = alpha * alpha;
    d.trace.push_back(std::move(rec));
    if (degenerate) {
      stop(StopReason::tomography_complete);
      break;
    }
  }
  if (!d.stop_reason) stop(StopReason::budget);

  for (std::size_t j = 0; j < phis.size(); ++j) d.terms.push_back({beta[j], phis[j]});
  d.iterations = phis.size();
  d.alpha = alpha;
  auto res = residual_vector(psi, vecs, beta, phis.size());
  double sq = 0;
  for (const auto& z : res) sq += std::norm(z);
  d.residual_norm = std::sqrt(sq);
  if (d.residual_norm > kResidualTol) {
    d.residual = StateVector::normalize(psi.n, std::move(res));
  } else {
    d.residual = StateVector(psi.n, std::vector<cplx>(psi.dim(), 0.0), false);
  }
  outer.merge(ledger);
  return d;
}

}  // namespace

Coefficients recompute_coeffs(const std::vector<cplx>& beta, double tol) {
  Coefficients out;
  double remaining = 1;  // 1 - sum_{i <= j} |beta_i|^2
  double prod = 1;
  for (const auto& b : beta) {
    const double next = remaining - std::norm(b);
    if (next <= tol) throw DegenerateResidual(std::sqrt(std::max(0.0, next)));
    const cplx c = b / std::sqrt(remaining);
    const double r = std::sqrt(next / remaining);
    prod *= r;
    out.c.push_back(c);
    out.r.push_back(r);
    out.alpha.push_back(prod);
    remaining = next;
  }
  return out;
}

double ErrorSchedule::delta_t(int t) const {
  if (t < 1) throw std::invalid_argument("delta_t: t must be positive");
  const double td = t;
  return delta() / (3 * td * td * td * td);
}

std::string to_string(LearnerKind k) {
  return k == LearnerKind::self_correct ? "self_correct" : "bruteforce_agnostic";
}

BaseLearner base_learner_bruteforce(int n_cap) {
  if (n_cap < 1 || n_cap > kMaxBruteForceQubits) {
    throw std::invalid_argument("brute-force learner: cap must lie in 1.." +
                                std::to_string(kMaxBruteForceQubits));
  }
  BaseLearner l;
  l.provenance = LearnerKind::bruteforce_agnostic;
  l.learn = [n_cap](const StateVector& psi, RngStream&, CostLedger&) {
    if (psi.n > n_cap) {
      throw std::invalid_argument("brute-force learner: " + std::to_string(psi.n) +
                                  " qubits exceeds cap " + std::to_string(n_cap));
    }
    return bruteforce_stab_fidelity(psi).argmax;
  };
  l.eta = [](double eps) { return eps - kBruteForceSlack; };
  return l;
}

BaseLearner base_learner_self_correct(SelfCorrectLearnerConfig config) {
  BaseLearner l;
  l.provenance = LearnerKind::self_correct;
  l.learn = [config](const StateVector& psi, RngStream& rng, CostLedger& ledger) {
    const double gamma = std::clamp(gowers3_exact(psi).proxy, 1e-12, 1.0);
    if (config.oracle.mode != OracleProvenance::planted || config.planted_groups.empty()) {
      return self_correct(psi, gamma, config.delta, config.oracle, config.run, rng, ledger)
          .candidate.state;
    }
    const StateAccess access(psi);
    std::optional<CandidateStabilizer> best;
    for (std::size_t i = 0; i < config.planted_groups.size(); ++i) {
      OracleSpec spec = config.oracle;
      spec.planted = config.planted_groups[i];
      auto r = rng.child(i);
      try {
        auto out = self_correct(access, gamma, config.delta, spec, config.run, r, ledger);
        if (!best || out.candidate.fidelity > best->fidelity) best = std::move(out.candidate);
      } catch (const AttemptsExhausted&) {
      }
    }
    if (!best) {
      throw AttemptsExhausted(config.run.max_attempts *
                              static_cast<int>(config.planted_groups.size()));
    }
    return best->state;
  };
  l.eta = [c1 = config.c1, c2 = config.c2](double eps) { return c1 * std::pow(eps, 6 * c2); };
  return l;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::gowers_below: return "gowers_below";
    case StopReason::alpha_below: return "alpha_below";
    case StopReason::tomography_complete: return "tomography_complete";
    case StopReason::budget: return "budget";
  }
  return "unknown";
}

StopReason parse_stop_reason(const std::string& s) {
  for (auto r : {StopReason::gowers_below, StopReason::alpha_below, StopReason::tomography_complete,
                 StopReason::budget}) {
    if (to_string(r) == s) return r;
  }
  throw std::invalid_argument("unknown stop reason: " + s);
}

std::string to_string(OverlapEstimator e) {
  switch (e) {
    case OverlapEstimator::exact: return "exact";
    case OverlapEstimator::sampled: return "sampled";
    case OverlapEstimator::adversarial: return "adversarial";
  }
  return "unknown";
}

OverlapEstimator parse_overlap_estimator(const std::string& s) {
  for (auto e : {OverlapEstimator::exact, OverlapEstimator::sampled, OverlapEstimator::adversarial}) {
    if (to_string(e) == s) return e;
  }
  throw std::invalid_argument("unknown estimator: " + s);
}

std::vector<cplx> Decomposition::structured() const {
  std::vector<cplx> v(std::size_t{1} << n, 0.0);
  for (const auto& term : terms) {
    const auto s = stabilizer_vector(term.phi);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += term.beta * s[i];
  }
  return v;
}

nlohmann::json to_json(const Decomposition& d) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& term : d.terms) {
    terms.push_back({{"beta", complex_json(term.beta)}, {"stabilizer", to_strings(term.phi)}});
  }
  return {{"n", d.n},
          {"epsilon", d.epsilon},
          {"eta", d.eta},
          {"proxy_threshold", d.proxy_threshold},
          {"t_max", d.t_max},
          {"terms", terms},
          {"alpha", d.alpha},
          {"residual_norm", d.residual_norm},
          {"stop_reason", d.stop_reason ? to_string(*d.stop_reason) : "unset"},
          {"iterations", d.iterations},
          {"ledger", to_json(d.ledger)}};
}

Decomposition iterate_error_free(const StateVector& psi, double eps, const BaseLearner& learner,
                                 RngStream& rng, CostLedger& ledger, std::size_t t_max) {
  check_eps(eps);
  LoopSettings s;
  s.eta = learner.eta(eps);
  if (!(s.eta > 0)) throw std::invalid_argument("learner promise must be positive");
  s.threshold = std::pow(eps, 6);
  s.t_max = t_max ? t_max : ceil_count(1 / (s.eta * s.eta));
  return run_loop(psi, eps, learner, s, rng, ledger);
}

Decomposition iterate_robust(const StateVector& psi, double eps, const BaseLearner& learner,
                             const ErrorSchedule& schedule, const IterateConfig& config,
                             RngStream& rng, CostLedger& ledger) {
  check_eps(eps);
  LoopSettings s;
  s.robust = true;
  s.eta = learner.eta(eps);
  if (!(s.eta > 0)) throw std::invalid_argument("learner promise must be positive");
  s.schedule = schedule.eta > 0 ? schedule : ErrorSchedule{s.eta};
  s.threshold = config.proxy_threshold >= 0 ? config.proxy_threshold : std::pow(eps, 6);
  s.t_max = config.t_max ? config.t_max : ceil_count(9 / (s.eta * s.eta)) + 8;
  s.estimator = config.estimator;
  s.proxy_mode = config.proxy_mode;
  return run_loop(psi, eps, learner, s, rng, ledger);
}

double StabCombination::l1() const {
  double s = 0;
  for (const auto& c : coeffs) s += std::abs(c);
  return s;
}

std::vector<cplx> StabCombination::vector(int n) const {
  if (coeffs.size() != states.size()) throw std::invalid_argument("combination: size mismatch");
  std::vector<cplx> v(std::size_t{1} << n, 0.0);
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (states[j].n != n) throw std::invalid_argument("combination: qubit mismatch");
    const auto s = stabilizer_vector(states[j]);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += coeffs[j] * s[i];
  }
  return v;
}

nlohmann::json to_json(const StabCombination& c) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t j = 0; j < c.states.size(); ++j) {
    terms.push_back({{"coeff", complex_json(c.coeffs[j])}, {"stabilizer", to_strings(c.states[j])}});
  }
  return terms;
}

StabCombination stab_combination_from_json(const nlohmann::json& j) {
  StabCombination c;
  for (const auto& term : j) {
    c.coeffs.push_back(complex_from_json(term.at("coeff")));
    c.states.push_back(parse_stabilizer_state(term.at("stabilizer").get<std::vector<std::string>>()));
  }
  return c;
}

nlohmann::json to_json(const LowExtentResult& r) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& c : r.recipe.coeffs) coeffs.push_back(complex_json(c));
  return {{"decomposition", to_json(r.decomposition)},
          {"epsilon", r.eps},
          {"overlap", r.overlap},
          {"lcu", {{"coeffs", coeffs}, {"success_prob", r.recipe.success_prob}}}};
}

LowExtentResult learn_low_extent(const StateVector& psi, double xi, double eps_prime,
                                 const BaseLearner& learner, const IterateConfig& config,
                                 RngStream& rng, CostLedger& ledger) {
  if (!(xi >= 1)) throw std::invalid_argument("learn_low_extent: xi must be at least 1");
  if (!(eps_prime > 0 && eps_prime < 1)) throw std::invalid_argument("learn_low_extent: eps' in (0,1)");
  LowExtentResult out;
  out.eps = std::pow(eps_prime / (2 * xi), 2);
  out.decomposition = iterate_robust(psi, out.eps, learner, {}, config, rng, ledger);
  auto s = out.decomposition.structured();
  double sq = 0, l1 = 0;
  for (const auto& z : s) sq += std::norm(z);
  for (const auto& term : out.decomposition.terms) {
    l1 += std::abs(term.beta);
    out.recipe.coeffs.push_back(term.beta);
    out.recipe.circuits.push_back(stab_state_prep(term.phi));
  }
  if (out.decomposition.terms.empty() || sq < 1e-24) {
    throw std::runtime_error("learn_low_extent: the structured part is empty");
  }
  out.recipe.success_prob = sq / (l1 * l1);
  out.phi = StateVector::normalize(psi.n, std::move(s));
  out.overlap = overlap_sq(out.phi, psi);
  return out;
}

nlohmann::json to_json(const MimicReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"with_state", complex_json(e.with_state)},
                       {"with_structure", complex_json(e.with_structure)},
                       {"deviation", e.deviation},
                       {"fidelity_gap", e.fidelity_gap}});
  }
  return {{"eps_prime", r.eps_prime},
          {"xi", r.xi},
          {"max_deviation", r.max_deviation},
          {"max_fidelity_gap", r.max_fidelity_gap},
          {"entries", entries}};
}

MimicReport mimic_compare(const StateVector& psi, const Decomposition& dec,
                          const std::vector<StabCombination>& targets, double xi) {
  if (psi.n != dec.n) throw std::invalid_argument("mimic_compare: qubit mismatch");
  MimicReport rep;
  rep.xi = xi;
  rep.eps_prime = xi * std::sqrt(dec.epsilon);
  const StateVector tilde(psi.n, dec.structured(), false);
  for (const auto& target : targets) {
    auto v = target.vector(psi.n);
    double sq = 0;
    for (const auto& z : v) sq += std::norm(z);
    // Coefficients are measured after normalizing the combination.
    if (target.l1() / std::sqrt(sq) > xi * (1 + 1e-12)) {
      throw std::invalid_argument("mimic_compare: target l1 norm exceeds xi");
    }
    const StateVector phi = StateVector::normalize(psi.n, std::move(v));
    MimicEntry e;
    e.with_state = inner(phi, psi);
    e.with_structure = inner(phi, tilde);
    e.deviation = std::abs(e.with_state - e.with_structure);
    e.fidelity_gap = std::abs(std::norm(e.with_state) - std::norm(e.with_structure));
    rep.max_deviation = std::max(rep.max_deviation, e.deviation);
    rep.max_fidelity_gap = std::max(rep.max_fidelity_gap, e.fidelity_gap);
    rep.entries.push_back(e);
  }
  return rep;
}

Decomposition decompose_stab_dim(const StateVector& psi, double eps, int t,
                                 const BaseLearner& learner, const ErrorSchedule& schedule,
                                 const IterateConfig& config, RngStream& rng, CostLedger& ledger) {
  if (t < 0 || t >= psi.n) throw std::invalid_argument("decompose_stab_dim: need 0 <= t < n");
  check_eps(eps);
  IterateConfig c = config;
  c.proxy_threshold = std::ldexp(std::pow(eps, 6), -2 * t);
  return iterate_robust(psi, eps, learner, schedule, c, rng, ledger);
}

}  // namespace stabdecomp
