#include "stabdecomp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <stdexcept>

#ifndef STABDECOMP_BUILD_ID
#define STABDECOMP_BUILD_ID "unknown"
#endif

namespace stabdecomp {

const char* build_id() { return STABDECOMP_BUILD_ID; }

namespace {

using nlohmann::json;

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

CliffordCircuit random_circuit(int n, int depth, RngStream& rng) {
  CliffordCircuit c;
  c.n = n;
  for (int i = 0; i < depth; ++i) {
    const int q = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    const auto pick = rng() % (n > 1 ? 3 : 2);
    if (pick == 0) {
      c.gates.push_back({GateKind::H, q});
    } else if (pick == 1) {
      c.gates.push_back({GateKind::S, q});
    } else {
      int r = static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
      if (r >= q) ++r;
      c.gates.push_back({GateKind::CNOT, q, r});
    }
  }
  return c;
}

int default_depth(int n) { return 4 * n * n + 8; }

StabilizerState random_stabilizer_state(int n, RngStream& rng) {
  return stabilizer_from_clifford(CliffordTableau::from_circuit(random_circuit(n, default_depth(n), rng)), 0);
}

Gf2Basis weyl_group(const StabilizerState& s) {
  std::vector<PauliLabel> labels;
  for (const auto& g : s.generators) labels.push_back(g.label);
  return rref_basis(labels, s.n);
}

json labels_json(const Gf2Basis& b) {
  json out = json::array();
  for (const auto& l : basis_labels(b)) out.push_back(to_string(l));
  return out;
}

void apply_t(std::vector<cplx>& amps, int q) {
  const cplx w = std::polar(1.0, std::numbers::pi / 4);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i >> q) & 1) amps[i] *= w;
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::string to_string(StateKind k) {
  switch (k) {
    case StateKind::basis: return "basis";
    case StateKind::random_stabilizer: return "random_stabilizer";
    case StateKind::tdoped: return "tdoped";
    case StateKind::w_family: return "w_family";
    case StateKind::combo: return "combo";
    case StateKind::haar: return "haar";
  }
  return "unknown";
}

StateKind parse_state_kind(const std::string& s) {
  for (auto k : {StateKind::basis, StateKind::random_stabilizer, StateKind::tdoped,
                 StateKind::w_family, StateKind::combo, StateKind::haar}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown state kind: " + s);
}

void StateSpec::validate() const {
  if (n < 1 || n > kMaxStateQubits) throw std::invalid_argument("state: n out of range");
  switch (kind) {
    case StateKind::basis:
      if (n < 64 && index >> n) throw std::invalid_argument("state: basis index out of range");
      break;
    case StateKind::tdoped:
      if (t < 0) throw std::invalid_argument("state: t must be non-negative");
      break;
    case StateKind::w_family:
      if (m < 1 || m > n) throw std::invalid_argument("state: need 1 <= m <= n");
      break;
    case StateKind::combo: {
      if (!coeffs.empty() || !stabilizers.empty()) {
        if (coeffs.size() != stabilizers.size() || coeffs.empty()) {
          throw std::invalid_argument("state: combo needs matching coeffs and stabilizers");
        }
      } else if (components < 1) {
        throw std::invalid_argument("state: combo needs terms or a component count");
      } else if (!weights.empty() && weights.size() != static_cast<std::size_t>(components)) {
        throw std::invalid_argument("state: combo weights must match components");
      }
      if (!(noise >= 0 && noise < 1)) throw std::invalid_argument("state: noise must lie in [0,1)");
      break;
    }
    case StateKind::random_stabilizer:
    case StateKind::haar:
      break;
  }
}

StateSpec state_spec_from_json(const json& j) {
  StateSpec s;
  s.kind = parse_state_kind(j.at("kind").get<std::string>());
  s.n = get_or(j, "n", 1);
  s.t = get_or(j, "t", 0);
  s.m = get_or(j, "m", 0);
  s.index = get_or<std::uint64_t>(j, "index", 0);
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("coeffs")) {
    for (const auto& c : j.at("coeffs")) s.coeffs.push_back(complex_from_json(c));
  }
  if (j.contains("stabilizers")) {
    s.stabilizers = j.at("stabilizers").get<std::vector<std::vector<std::string>>>();
  }
  s.components = get_or(j, "components", 0);
  if (j.contains("weights")) s.weights = j.at("weights").get<std::vector<double>>();
  s.noise = get_or(j, "noise", 0.0);
  s.validate();
  return s;
}

json to_json(const StateSpec& s) {
  json j = {{"kind", to_string(s.kind)}, {"n", s.n}};
  switch (s.kind) {
    case StateKind::basis: j["index"] = s.index; break;
    case StateKind::tdoped: j["t"] = s.t; break;
    case StateKind::w_family: j["m"] = s.m; break;
    case StateKind::combo: {
      if (!s.coeffs.empty()) {
        json c = json::array();
        for (const auto& z : s.coeffs) c.push_back(complex_json(z));
        j["coeffs"] = c;
        j["stabilizers"] = s.stabilizers;
      } else {
        j["components"] = s.components;
        if (!s.weights.empty()) j["weights"] = s.weights;
      }
      j["noise"] = s.noise;
      break;
    }
    default: break;
  }
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

GeneratedState gen_state(const StateSpec& spec, RngStream& outer) {
  spec.validate();
  RngStream rng = spec.seed ? RngStream(*spec.seed) : outer;
  GeneratedState g;
  const int n = spec.n;
  g.meta = {{"kind", to_string(spec.kind)}, {"n", n}};
  switch (spec.kind) {
    case StateKind::basis: {
      g.psi = StateVector::basis(n, spec.index);
      std::vector<PhasedPauli> gens;
      for (int q = 0; q < n; ++q) {
        gens.emplace_back(PauliLabel::z_on(n, q), ((spec.index >> q) & 1) ? 2 : 0);
      }
      g.components = {StabilizerState{n, gens}};
      g.component_coeffs = {1.0};
      g.extent_bound = 1.0;
      g.meta["stab_fidelity"] = 1.0;
      break;
    }
    case StateKind::random_stabilizer: {
      const auto s = random_stabilizer_state(n, rng);
      g.psi = StateVector::from_stabilizer(s);
      g.components = {s};
      g.component_coeffs = {1.0};
      g.extent_bound = 1.0;
      g.meta["stab_fidelity"] = 1.0;
      g.meta["stabilizer"] = to_strings(s);
      break;
    }
    case StateKind::tdoped: {
      std::vector<cplx> amps(std::size_t{1} << n, 0.0);
      amps[0] = 1.0;
      apply_gates(amps, random_circuit(n, default_depth(n), rng));
      json positions = json::array();
      for (int i = 0; i < spec.t; ++i) {
        const int q = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        apply_t(amps, q);
        positions.push_back(q);
        apply_gates(amps, random_circuit(n, default_depth(n), rng));
      }
      g.psi = StateVector::normalize(n, std::move(amps));
      g.extent_bound = std::pow(1 + 1 / std::numbers::sqrt2, spec.t);
      const double kappa = std::ldexp(1.0, spec.t);
      g.meta["t"] = spec.t;
      g.meta["t_positions"] = positions;
      g.meta["stab_rank_bound"] = kappa;
      g.meta["extent_from_rank_bound"] =
          std::sqrt(std::numbers::e) * 2 * std::pow(kappa, (kappa + 1) / 2);
      break;
    }
    case StateKind::w_family: {
      std::vector<cplx> amps(std::size_t{1} << n, 0.0);
      for (int q = n - spec.m; q < n; ++q) amps[std::size_t{1} << q] = 1 / std::sqrt(double(spec.m));
      g.psi = StateVector(n, std::move(amps));
      g.extent_bound = std::sqrt(double(spec.m));
      g.meta["m"] = spec.m;
      break;
    }
    case StateKind::combo: {
      std::vector<cplx> coeffs = spec.coeffs;
      std::vector<StabilizerState> states;
      if (!spec.stabilizers.empty()) {
        for (const auto& s : spec.stabilizers) {
          states.push_back(parse_stabilizer_state(s));
          if (states.back().n != n) throw std::invalid_argument("state: combo qubit mismatch");
        }
      } else {
        for (int i = 0; i < spec.components; ++i) {
          states.push_back(random_stabilizer_state(n, rng));
          const double w = spec.weights.empty() ? 1.0 / spec.components : spec.weights[i];
          coeffs.push_back(std::sqrt(w));
        }
      }
      const StabCombination combo{coeffs, states};
      auto v = combo.vector(n);
      double sq = 0;
      for (const auto& z : v) sq += std::norm(z);
      if (sq < 1e-24) throw std::invalid_argument("state: combo vector is zero");
      const double norm = std::sqrt(sq);
      g.extent_bound = combo.l1() / norm;
      for (auto& c : coeffs) c /= norm;
      for (auto& z : v) z /= norm;
      if (spec.noise > 0) {
        const StateVector plant(n, v);
        StateVector junk = haar_state(n, rng);
        const cplx c = inner(plant, junk);
        std::vector<cplx> perp(junk.dim());
        for (std::size_t i = 0; i < perp.size(); ++i) perp[i] = junk.amp[i] - c * plant.amp[i];
        junk = StateVector::normalize(n, std::move(perp));
        const double a = std::sqrt(1 - spec.noise), b = std::sqrt(spec.noise);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * v[i] + b * junk.amp[i];
        for (auto& co : coeffs) co *= a;
        g.extent_bound.reset();
      }
      g.psi = StateVector::normalize(n, std::move(v));
      g.components = states;
      g.component_coeffs = coeffs;
      g.meta["normalization"] = norm;
      g.meta["noise"] = spec.noise;
      json comps = json::array();
      for (std::size_t i = 0; i < states.size(); ++i) {
        comps.push_back({{"coeff", complex_json(coeffs[i])}, {"stabilizer", to_strings(states[i])}});
      }
      g.meta["components"] = comps;
      break;
    }
    case StateKind::haar:
      g.psi = haar_state(n, rng);
      break;
  }
  if (g.extent_bound) g.meta["extent_bound"] = *g.extent_bound;
  if (spec.seed) g.meta["seed"] = *spec.seed;
  return g;
}

std::string to_string(Command c) {
  switch (c) {
    case Command::analyze: return "analyze";
    case Command::test: return "test";
    case Command::selfcorrect: return "selfcorrect";
    case Command::decompose: return "decompose";
    case Command::learn_extent: return "learn-extent";
    case Command::oracle: return "oracle";
    case Command::bench: return "bench";
  }
  return "unknown";
}

Command parse_command(const std::string& s) {
  for (auto c : {Command::analyze, Command::test, Command::selfcorrect, Command::decompose,
                 Command::learn_extent, Command::oracle, Command::bench}) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown command: " + s);
}

void ExperimentConfig::validate() const {
  state.validate();
  auto unit = [](double v, const char* name) {
    if (!(v > 0 && v < 1)) throw std::invalid_argument(std::string("config: ") + name + " must lie in (0,1)");
  };
  unit(params.delta, "delta");
  unit(params.epsilon_prime, "epsilon_prime");
  unit(params.eps1, "eps1");
  unit(params.eps2, "eps2");
  if (!(params.epsilon > 0 && params.epsilon <= 1)) throw std::invalid_argument("config: epsilon must lie in (0,1]");
  if (params.gamma && !(*params.gamma > 0 && *params.gamma <= 1)) {
    throw std::invalid_argument("config: gamma must lie in (0,1]");
  }
  if (trials < 1) throw std::invalid_argument("config: trials must be at least 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be at least 1");
  parse_output_format(format);
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("command")) c.command = parse_command(j.at("command").get<std::string>());
  c.state = state_spec_from_json(j.at("state"));
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (p.contains("gamma")) c.params.gamma = p.at("gamma").get<double>();
    c.params.epsilon = get_or(p, "epsilon", c.params.epsilon);
    c.params.epsilon_prime = get_or(p, "epsilon_prime", c.params.epsilon_prime);
    if (p.contains("xi")) c.params.xi = p.at("xi").get<double>();
    c.params.t = get_or(p, "t", c.params.t);
    c.params.delta = get_or(p, "delta", c.params.delta);
    c.params.eps1 = get_or(p, "eps1", c.params.eps1);
    c.params.eps2 = get_or(p, "eps2", c.params.eps2);
    c.params.separation_constant = get_or(p, "separation_constant", c.params.separation_constant);
    c.params.exponent = get_or(p, "exponent", c.params.exponent);
    c.params.tolerance = get_or(p, "tolerance", c.params.tolerance);
    c.params.bench_naive_max = get_or(p, "bench_naive_max", c.params.bench_naive_max);
  }
  if (j.contains("oracle")) c.oracle = parse_oracle_provenance(j.at("oracle").get<std::string>());
  c.oracle_theta = get_or(j, "oracle_theta", c.oracle_theta);
  if (j.contains("estimator")) c.estimator = parse_overlap_estimator(j.at("estimator").get<std::string>());
  auto mode = [](const std::string& s) {
    if (s == "exact") return EstimatorMode::exact;
    if (s == "sampled") return EstimatorMode::sampled;
    throw std::invalid_argument("unknown estimator mode: " + s);
  };
  if (j.contains("proxy_mode")) c.proxy_mode = mode(j.at("proxy_mode").get<std::string>());
  if (j.contains("tester_mode")) c.tester_mode = mode(j.at("tester_mode").get<std::string>());
  if (j.contains("learner")) {
    const auto l = j.at("learner").get<std::string>();
    if (l == "bruteforce" || l == "bruteforce_agnostic") {
      c.learner = LearnerKind::bruteforce_agnostic;
    } else if (l == "self_correct") {
      c.learner = LearnerKind::self_correct;
    } else {
      throw std::invalid_argument("unknown learner: " + l);
    }
  }
  c.max_attempts = get_or(j, "max_attempts", c.max_attempts);
  c.trials = get_or(j, "trials", c.trials);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  c.threads = get_or(j, "threads", c.threads);
  c.output = get_or<std::string>(j, "output", c.output);
  c.format = get_or<std::string>(j, "format", c.format);
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json p = {{"epsilon", c.params.epsilon},
            {"epsilon_prime", c.params.epsilon_prime},
            {"t", c.params.t},
            {"delta", c.params.delta},
            {"eps1", c.params.eps1},
            {"eps2", c.params.eps2},
            {"separation_constant", c.params.separation_constant},
            {"exponent", c.params.exponent},
            {"tolerance", c.params.tolerance},
            {"bench_naive_max", c.params.bench_naive_max}};
  if (c.params.gamma) p["gamma"] = *c.params.gamma;
  if (c.params.xi) p["xi"] = *c.params.xi;
  auto mode = [](EstimatorMode m) { return m == EstimatorMode::exact ? "exact" : "sampled"; };
  return {{"command", to_string(c.command)},
          {"state", to_json(c.state)},
          {"params", p},
          {"oracle", to_string(c.oracle)},
          {"oracle_theta", c.oracle_theta},
          {"estimator", to_string(c.estimator)},
          {"proxy_mode", mode(c.proxy_mode)},
          {"tester_mode", mode(c.tester_mode)},
          {"learner", to_string(c.learner)},
          {"max_attempts", c.max_attempts},
          {"trials", c.trials},
          {"seed", c.seed},
          {"format", c.format}};
}

namespace {

std::optional<double> brute_optimum(const StateVector& psi) {
  if (psi.n > kMaxBruteForceQubits) return std::nullopt;
  return bruteforce_stab_fidelity(psi).value;
}

OracleSpec oracle_spec(const ExperimentConfig& c, const GeneratedState& g) {
  OracleSpec o;
  o.mode = c.oracle;
  o.theta = c.oracle_theta;
  if (c.oracle == OracleProvenance::planted) {
    if (g.components.empty()) {
      throw std::invalid_argument("planted oracle needs a state with known stabilizer components");
    }
    // The heaviest component is the plant.
    std::size_t best = 0;
    for (std::size_t i = 1; i < g.components.size(); ++i) {
      if (std::abs(g.component_coeffs[i]) > std::abs(g.component_coeffs[best])) best = i;
    }
    o.planted = weyl_group(g.components[best]);
  }
  return o;
}

BaseLearner make_learner(const ExperimentConfig& c, const GeneratedState& g) {
  if (c.learner == LearnerKind::bruteforce_agnostic) return base_learner_bruteforce();
  SelfCorrectLearnerConfig cfg;
  cfg.oracle.mode = c.oracle;
  cfg.oracle.theta = c.oracle_theta;
  cfg.delta = c.params.delta;
  cfg.run.max_attempts = c.max_attempts;
  if (c.oracle == OracleProvenance::planted) {
    if (g.components.empty()) {
      throw std::invalid_argument("planted oracle needs a state with known stabilizer components");
    }
    for (const auto& s : g.components) cfg.planted_groups.push_back(weyl_group(s));
  }
  return base_learner_self_correct(cfg);
}

json run_analyze(const GeneratedState& g) {
  const auto m = gowers3_exact(g.psi);
  json out = {{"proxy", m.proxy}, {"u3pow8", m.u3pow8}, {"identity_gap", m.identity_gap}};
  if (auto f = brute_optimum(g.psi)) out["stab_fidelity"] = *f;
  return out;
}

json run_test(const ExperimentConfig& c, const GeneratedState& g, RngStream& rng, CostLedger& ledger) {
  TesterConfig cfg{c.params.separation_constant, c.params.exponent, c.tester_mode};
  const auto r = tolerant_test(g.psi, c.params.eps1, c.params.eps2, c.params.t, c.params.delta, cfg,
                               rng, ledger);
  TesterConfig exact = cfg;
  exact.mode = EstimatorMode::exact;
  CostLedger scratch;
  auto r2 = rng.child("exact");
  const auto e = tolerant_test(g.psi, c.params.eps1, c.params.eps2, c.params.t, c.params.delta,
                               exact, r2, scratch);
  return {{"accept", r.accept},
          {"estimate", r.estimate},
          {"completeness", r.completeness},
          {"soundness", r.soundness},
          {"accuracy", r.accuracy},
          {"shots", r.shots},
          {"exact_accept", e.accept},
          {"exact_estimate", e.estimate}};
}

json run_selfcorrect(const ExperimentConfig& c, const GeneratedState& g, RngStream& rng,
                     CostLedger& ledger) {
  const double gamma = c.params.gamma.value_or(std::clamp(gowers3_exact(g.psi).proxy, 1e-12, 1.0));
  SelfCorrectConfig cfg;
  cfg.max_attempts = c.max_attempts;
  json out = {{"gamma", gamma}};
  const auto opt = brute_optimum(g.psi);
  if (opt) out["optimum"] = *opt;
  try {
    const auto r = self_correct(g.psi, gamma, c.params.delta, oracle_spec(c, g), cfg, rng, ledger);
    out["result"] = to_json(r);
    out["fidelity"] = r.candidate.fidelity;
    if (opt) out["within_tolerance"] = r.candidate.fidelity >= *opt - c.params.tolerance;
  } catch (const AttemptsExhausted& e) {
    out["error"] = e.what();
    out["fidelity"] = 0.0;
    if (opt) out["within_tolerance"] = false;
  }
  return out;
}

json run_decompose(const ExperimentConfig& c, const GeneratedState& g, RngStream& rng,
                   CostLedger& ledger) {
  IterateConfig cfg;
  cfg.estimator = c.estimator;
  cfg.proxy_mode = c.proxy_mode;
  const auto learner = make_learner(c, g);
  const auto d = decompose_stab_dim(g.psi, c.params.epsilon, c.params.t, learner, {}, cfg, rng, ledger);
  json out = {{"decomposition", to_json(d)}};
  if (g.psi.n <= kMaxBruteForceQubits) {
    double f = 0;
    if (d.residual_norm > kResidualTol) {
      f = c.params.t == 0 ? bruteforce_stab_fidelity(d.residual).value
                          : bruteforce_stab_dim_fidelity(d.residual, g.psi.n - c.params.t).value;
    }
    const double contract = d.residual_norm * d.residual_norm * f;
    out["residual_contract"] = contract;
    out["contract_ok"] = contract <= c.params.epsilon + 1e-9;
  }
  return out;
}

json run_learn_extent(const ExperimentConfig& c, const GeneratedState& g, RngStream& rng,
                      CostLedger& ledger) {
  const double xi = c.params.xi ? *c.params.xi : g.extent_bound.value_or(1.0);
  IterateConfig cfg;
  cfg.estimator = c.estimator;
  cfg.proxy_mode = c.proxy_mode;
  const auto r = learn_low_extent(g.psi, std::max(1.0, xi), c.params.epsilon_prime,
                                  make_learner(c, g), cfg, rng, ledger);
  json out = to_json(r);
  out["xi"] = std::max(1.0, xi);
  out["floor"] = 0.5 - c.params.epsilon_prime;
  out["meets_floor"] = r.overlap >= 0.5 - c.params.epsilon_prime;
  return out;
}

json run_oracle(const ExperimentConfig& c, const GeneratedState& g, RngStream& rng,
                CostLedger& ledger) {
  const StateAccess psi(g.psi);
  PfrOracle oracle;
  if (c.oracle == OracleProvenance::planted) {
    oracle = make_planted_oracle(oracle_spec(c, g).planted);
  } else {
    oracle = make_threshold_span_oracle(psi, c.oracle_theta, 256, EstimatorMode::exact, rng, ledger);
  }
  double mass = 0;
  const auto elems = span_elements(oracle.subgroup);
  for (auto x : elems) mass += psi.weight(unpack(x, g.psi.n));
  mass /= static_cast<double>(elems.size());
  json out = {{"oracle", to_string(oracle.provenance)},
              {"rank", oracle.subgroup.rank()},
              {"basis", labels_json(oracle.subgroup)},
              {"mass", mass}};
  if (!g.components.empty()) {
    json contains = json::array();
    for (const auto& s : g.components) {
      bool all = true;
      for (const auto& gen : s.generators) all = all && oracle.member(gen.label);
      contains.push_back(all);
    }
    out["contains_components"] = contains;
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json run_bench(const ExperimentConfig& c, const GeneratedState& g, RngStream& rng) {
  auto start = std::chrono::steady_clock::now();
  const auto tables = distribution_tables(g.psi);
  const double tables_s = seconds_since(start);
  double total = 0;
  for (double v : tables.q.values) total += v;

  const int nb = std::min(g.psi.n, c.params.bench_naive_max);
  const std::size_t size = std::size_t{1} << (2 * nb);
  std::vector<double> f(size), h(size);
  for (auto& v : f) v = rng.uniform();
  for (auto& v : h) v = rng.uniform();
  start = std::chrono::steady_clock::now();
  const auto fast = xor_convolution(f, h);
  const double fast_s = seconds_since(start);
  start = std::chrono::steady_clock::now();
  const auto naive = xor_convolution_naive(f, h);
  const double naive_s = seconds_since(start);
  double err = 0;
  for (std::size_t i = 0; i < size; ++i) err = std::max(err, std::abs(fast[i] - naive[i]));
  return {{"n", g.psi.n},
          {"q_total", total},
          {"convolution_n", nb},
          {"max_abs_diff", err},
          {"timing",
           {{"tables_s", tables_s},
            {"fast_s", fast_s},
            {"naive_s", naive_s},
            {"speedup", fast_s > 0 ? naive_s / fast_s : 0.0}}}};
}

json run_trial(const ExperimentConfig& c, int trial) {
  const auto start = std::chrono::steady_clock::now();
  const RngStream master(c.seed);
  const RngStream trial_rng = master.child(static_cast<std::uint64_t>(trial));
  auto state_rng = trial_rng.child("state");
  auto rng = trial_rng.child("run");
  const auto g = gen_state(c.state, state_rng);
  CostLedger ledger;
  json out;
  switch (c.command) {
    case Command::analyze: out = run_analyze(g); break;
    case Command::test: out = run_test(c, g, rng, ledger); break;
    case Command::selfcorrect: out = run_selfcorrect(c, g, rng, ledger); break;
    case Command::decompose: out = run_decompose(c, g, rng, ledger); break;
    case Command::learn_extent: out = run_learn_extent(c, g, rng, ledger); break;
    case Command::oracle: out = run_oracle(c, g, rng, ledger); break;
    case Command::bench: out = run_bench(c, g, rng); break;
  }
  return {{"schema_version", kSchemaVersion},
          {"build", build_id()},
          {"command", to_string(c.command)},
          {"trial", trial},
          {"seed", c.seed},
          {"config", to_json(c)},
          {"state", g.meta},
          {"output", out},
          {"ledger", to_json(ledger)},
          {"wall_time_s", seconds_since(start)}};
}

}  // namespace

std::vector<json> run(const ExperimentConfig& config) {
  config.validate();
  std::vector<json> records(static_cast<std::size_t>(config.trials));
  if (config.threads == 1) {
    for (int i = 0; i < config.trials; ++i) records[i] = run_trial(config, i);
    return records;
  }
  // Trials use disjoint RNG paths, so any interleaving gives the same records.
  std::vector<std::future<void>> workers;
  for (int w = 0; w < config.threads; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (int i = w; i < config.trials; i += config.threads) records[i] = run_trial(config, i);
    }));
  }
  for (auto& f : workers) f.get();
  return records;
}

OutputFormat parse_output_format(const std::string& s) {
  if (s == "jsonl") return OutputFormat::jsonl;
  if (s == "csv") return OutputFormat::csv;
  throw std::invalid_argument("unknown output format: " + s);
}

std::vector<std::pair<std::string, json>> flatten_scalars(const json& record) {
  std::vector<std::pair<std::string, json>> out;
  auto walk = [&](auto&& self, const json& j, const std::string& prefix) -> void {
    if (j.is_object()) {
      for (auto it = j.begin(); it != j.end(); ++it) {
        self(self, it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
      }
    } else if (!j.is_array()) {
      out.emplace_back(prefix, j);
    }
  };
  walk(walk, record, "");
  return out;
}

namespace {

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return s;
}

}  // namespace

void emit_results(const std::vector<json>& records, OutputFormat format, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp);
    if (format == OutputFormat::jsonl) {
      for (const auto& r : records) f << r.dump() << '\n';
    } else {
      std::vector<std::string> header;
      std::vector<std::vector<std::pair<std::string, json>>> rows;
      for (const auto& r : records) {
        rows.push_back(flatten_scalars(r));
        for (const auto& [k, v] : rows.back()) {
          if (std::find(header.begin(), header.end(), k) == header.end()) header.push_back(k);
        }
      }
      if (header.empty()) header = {"schema_version", "build", "command", "trial", "seed", "wall_time_s"};
      for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
      f << '\n';
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < header.size(); ++i) {
          if (i) f << ',';
          auto it = std::find_if(row.begin(), row.end(), [&](const auto& p) { return p.first == header[i]; });
          if (it != row.end()) f << csv_cell(it->second);
        }
        f << '\n';
      }
    }
    if (!f) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<json> out;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace stabdecomp
