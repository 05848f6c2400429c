#include "stabdecomp/selfcorrect.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

namespace stabdecomp {

namespace {

// Copies: four for Bell difference sampling, two for the retention check.
constexpr std::uint64_t kCopiesPerRound = 6;
constexpr std::uint64_t kRoundsPerSample = 64;

PauliLabel draw_round(const StateAccess& psi, RngStream& rng, bool& kept) {
  const PauliLabel x = psi.sampler().sample_q(rng);
  kept = rng.bernoulli(psi.weight(x));
  return x;
}

std::vector<PauliLabel> draw_impl(const StateAccess& psi, std::size_t count,
                                  std::uint64_t max_rounds, RngStream& rng, CostCounts& acc) {
  std::vector<PauliLabel> out;
  std::uint64_t rounds = 0;
  while (out.size() < count && rounds < max_rounds) {
    bool kept = false;
    const PauliLabel x = draw_round(psi, rng, kept);
    ++rounds;
    if (kept) out.push_back(x);
  }
  acc.copies += kCopiesPerRound * rounds;
  return out;
}

double estimate_weight(const StateAccess& psi, const PauliLabel& x, std::uint64_t shots,
                       EstimatorMode mode, RngStream& rng) {
  const double w = psi.weight(x);
  if (mode == EstimatorMode::exact) return w;
  std::binomial_distribution<std::uint64_t> draw(shots, std::clamp(w, 0.0, 1.0));
  return static_cast<double>(draw(rng)) / static_cast<double>(shots);
}

bool edge_impl(const StateAccess& psi, const PauliLabel& x, const PauliLabel& y, double zeta,
               std::uint64_t shots, EstimatorMode mode, RngStream& rng, CostCounts& acc) {
  const PauliLabel xy = x + y;
  acc.copies += 3 * 2 * shots;
  for (const PauliLabel* l : {&x, &y, &xy}) {
    if (estimate_weight(psi, *l, shots, mode, rng) < zeta) return false;
  }
  acc.copies += 2;
  return rng.bernoulli(psi.weight(xy));
}

StabilizerState from_labels(int n, const std::vector<PauliLabel>& labels, std::uint64_t signs) {
  StabilizerState s;
  s.n = n;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s.generators.emplace_back(labels[i], ((signs >> i) & 1) ? 2 : 0);
  }
  return s;
}

// Generators of phi (on qubits 0..k-1) tensored with |z> on the rest.
StabilizerState product_state(const StabilizerState& phi, int n, std::uint64_t z) {
  StabilizerState s;
  s.n = n;
  for (const auto& g : phi.generators) {
    s.generators.emplace_back(PauliLabel(n, g.label.xpart, g.label.zpart), g.phase);
  }
  for (int q = phi.n; q < n; ++q) {
    s.generators.emplace_back(PauliLabel::z_on(n, q), ((z >> (q - phi.n)) & 1) ? 2 : 0);
  }
  return s;
}

void check_unit(double v, const char* what) {
  if (!(v > 0 && v < 1)) throw std::invalid_argument(std::string(what) + " must lie in (0,1)");
}

void check_gamma(double gamma) {
  if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("gamma must lie in (0,1]");
}

}  // namespace

StateAccess::StateAccess(const StateVector& psi) : psi_(psi), sampler_(psi) {
  if (psi.n <= table_cap()) table_ = weyl_expectations(psi);
}

double StateAccess::expectation(const PauliLabel& x) const {
  if (x.n != psi_.n) throw std::invalid_argument("StateAccess: label size mismatch");
  if (!table_.empty()) return table_[table_index(x)];
  return weyl_expectation(psi_, x);
}

double StateAccess::weight(const PauliLabel& x) const {
  const double e = expectation(x);
  return e * e;
}

void BsgParams::validate() const {
  if (!(zeta2 > 0 && zeta2 <= zeta1)) throw std::invalid_argument("BsgParams: need 0 < zeta2 <= zeta1");
  if (!(zeta3 > 0 && zeta3 <= 1) || zeta1 > 1) {
    throw std::invalid_argument("BsgParams: thresholds must lie in (0,1]");
  }
  check_unit(rho1, "BsgParams rho1");
  check_unit(rho2, "BsgParams rho2");
  check_unit(delta, "BsgParams delta");
  if (r < 1 || s < 1) throw std::invalid_argument("BsgParams: r and s must be positive");
  if (edge_error < 0) throw std::invalid_argument("BsgParams: negative edge error");
  const double err = edge_error > 0 ? edge_error : rho1 / 100;
  if (err >= std::min({zeta1, zeta2, zeta3})) {
    throw std::invalid_argument("BsgParams: edge error must be below every threshold");
  }
}

BsgParams practical_bsg_params(double gamma, double delta) {
  check_gamma(gamma);
  BsgParams p;
  p.zeta1 = 0.6 * gamma / 4;
  p.zeta2 = 0.4 * gamma / 4;
  p.zeta3 = 0.5 * gamma / 4;
  p.delta = delta;
  p.validate();
  return p;
}

AnalyticBsgParams analytic_bsg_params(double gamma, double delta, long double interval) {
  check_gamma(gamma);
  check_unit(delta, "delta");
  const long double g = gamma;
  AnalyticBsgParams p;
  p.c1 = std::ldexp(1.0L, 10) * 1e2L;
  p.c2 = std::ldexp(1.0L, 39) * 1e15L;
  p.rho = std::pow(g, 5) / 20;
  p.rho1 = std::pow(g, 350) / (10240 * std::pow(p.c1, 3) * std::pow(p.c2, 5));
  p.rho2 = 9 * std::pow(g, 202) / (2560 * p.c1 * std::pow(p.c2, 3));
  p.rho3 = std::pow(g, 349) / (2560 * std::pow(p.c1, 3) * std::pow(p.c2, 5));
  p.intervals = 1 / p.rho3;
  if (interval < 0 || interval >= p.intervals) {
    throw std::invalid_argument("analytic_bsg_params: interval index out of range");
  }
  const long double width = g * p.rho3 / 20;
  p.zeta = g / 180 + (std::floor(interval) + 0.5L) * width;
  p.mu = width / 2;
  p.zeta1 = p.zeta3 = p.zeta + p.mu / 2;
  p.zeta2 = p.zeta - p.mu / 2;
  return p;
}

std::uint64_t sample_rounds(double gamma, double delta) {
  check_gamma(gamma);
  check_unit(delta, "delta");
  return ceil_count(2 * std::log(1 / delta) / (gamma * gamma));
}

std::vector<PauliLabel> sample_paulis(const StateAccess& psi, double gamma, double delta,
                                      RngStream& rng, CostLedger& ledger) {
  const std::uint64_t rounds = sample_rounds(gamma, delta);
  std::vector<PauliLabel> out;
  for (std::uint64_t m = 0; m < rounds; ++m) {
    bool kept = false;
    const PauliLabel x = draw_round(psi, rng, kept);
    if (kept) out.push_back(x);
  }
  ledger.charge("sample", {.copies = kCopiesPerRound * rounds});
  return out;
}

std::vector<PauliLabel> draw_retained(const StateAccess& psi, std::size_t count,
                                      std::uint64_t max_rounds, RngStream& rng,
                                      CostLedger& ledger) {
  CostCounts acc;
  auto out = draw_impl(psi, count, max_rounds, rng, acc);
  ledger.charge("sample", acc);
  return out;
}

bool edge_test(const StateAccess& psi, const PauliLabel& x, const PauliLabel& y, double zeta,
               double zeta_err, double delta, EstimatorMode mode, RngStream& rng,
               CostLedger& ledger) {
  if (!(zeta_err > 0 && zeta_err < zeta)) {
    throw std::invalid_argument("edge_test: need 0 < zeta_err < zeta");
  }
  CostCounts acc;
  const bool out = edge_impl(psi, x, y, zeta, hoeffding_shots(zeta_err, delta / 3), mode, rng, acc);
  ledger.charge("edge_test", acc);
  return out;
}

bool bsg_test(const StateAccess& psi, const PauliLabel& u, const PauliLabel& v,
              const BsgParams& params, RngStream& rng, CostLedger& ledger) {
  params.validate();
  const double err = params.edge_error > 0 ? params.edge_error : params.rho1 / 100;
  const auto r = static_cast<std::size_t>(params.r);
  const auto s = static_cast<std::size_t>(params.s);
  const double tests = 1.0 + static_cast<double>(r) + 2.0 * static_cast<double>(r * s);
  const std::uint64_t shots = hoeffding_shots(err, params.delta / (3 * tests));
  CostCounts edges, samples;

  // An early exit here: the flag is 0 whenever u and v are not adjacent.
  bool flag = edge_impl(psi, u, v, params.zeta1, shots, params.mode, rng, edges);
  if (flag) {
    const auto z = draw_impl(psi, r, r * kRoundsPerSample, rng, samples);
    std::size_t bad = 0;
    for (const auto& zk : z) {
      const bool x = edge_impl(psi, u, zk, params.zeta2, shots, params.mode, rng, edges);
      const auto w = draw_impl(psi, s, s * kRoundsPerSample, rng, samples);
      std::size_t common = 0;
      for (const auto& wl : w) {
        const bool y = edge_impl(psi, v, wl, params.zeta3, shots, params.mode, rng, edges);
        const bool zz = edge_impl(psi, zk, wl, params.zeta3, shots, params.mode, rng, edges);
        common += y && zz;
      }
      const bool b = w.empty() || static_cast<double>(common) <=
                                      params.rho1 * static_cast<double>(w.size());
      bad += x && b;
    }
    flag = z.empty() || static_cast<double>(bad) <= params.rho2 * static_cast<double>(z.size());
  }
  ledger.charge("edge_test", edges);
  ledger.charge("sample", samples);
  return flag;
}

std::vector<std::vector<PauliLabel>> collect_small_doubling(const StateAccess& psi, std::size_t t,
                                                            double gamma, double delta,
                                                            const CollectConfig& config,
                                                            RngStream& rng, CostLedger& ledger) {
  if (t < 1) throw std::invalid_argument("collect_small_doubling: t must be at least 1");
  const std::size_t count = config.vertices ? config.vertices : 4 * t;
  std::vector<BsgParams> params = config.param_sets;
  if (params.empty()) params.push_back(practical_bsg_params(gamma, delta));
  auto vrng = rng.child("vertices");
  const auto vertices = draw_retained(psi, count, count * kRoundsPerSample, vrng, ledger);

  std::vector<std::vector<PauliLabel>> out;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (const auto& p : params) {
      std::vector<PauliLabel> accepted;
      for (std::size_t j = 0; j < vertices.size(); ++j) {
        if (j != i && bsg_test(psi, vertices[i], vertices[j], p, rng, ledger)) {
          accepted.push_back(vertices[j]);
        }
      }
      if (accepted.size() >= t) {
        out.push_back(std::move(accepted));
        if (config.max_sets && out.size() >= config.max_sets) return out;
      }
    }
  }
  return out;
}

std::string to_string(OracleProvenance p) {
  return p == OracleProvenance::planted ? "planted" : "threshold-span";
}

OracleProvenance parse_oracle_provenance(const std::string& s) {
  if (s == "planted") return OracleProvenance::planted;
  if (s == "threshold-span") return OracleProvenance::threshold_span;
  throw std::invalid_argument("unknown oracle mode: " + s);
}

PfrOracle make_planted_oracle(const Gf2Basis& subgroup) {
  if (subgroup.width <= 0 || subgroup.width % 2) {
    throw std::invalid_argument("planted oracle needs a subgroup of F2^{2n}");
  }
  return {OracleProvenance::planted, subgroup};
}

PfrOracle make_planted_oracle(const StabilizerState& s) {
  validate(s);
  std::vector<PauliLabel> labels;
  for (const auto& g : s.generators) labels.push_back(g.label);
  return make_planted_oracle(rref_basis(labels, s.n));
}

PfrOracle make_threshold_span_oracle(const StateAccess& psi, double theta, std::uint64_t shots,
                                     EstimatorMode mode, RngStream& rng, CostLedger& ledger) {
  const int n = psi.num_qubits();
  if (n > table_cap()) throw std::invalid_argument("threshold-span oracle: n over table cap");
  if (!(theta > 0 && theta <= 1)) throw std::invalid_argument("threshold-span oracle: theta");
  if (mode == EstimatorMode::sampled && shots == 0) {
    throw std::invalid_argument("threshold-span oracle: sampled mode needs shots");
  }
  std::vector<std::uint64_t> kept;
  const std::size_t size = std::size_t{1} << (2 * n);
  for (std::size_t i = 1; i < size; ++i) {
    const PauliLabel x = table_label(i, n);
    if (estimate_weight(psi, x, shots, mode, rng) >= theta) kept.push_back(pack(x));
  }
  ledger.charge("pfr_oracle", {.copies = 2 * shots * (size - 1)});
  return {OracleProvenance::threshold_span, rref_basis(kept, 2 * n)};
}

nlohmann::json to_json(const SubgroupV& v) {
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& l : basis_labels(v.basis)) basis.push_back(to_string(l));
  return {{"basis", basis},
          {"dim", v.basis.rank()},
          {"mass", v.mass},
          {"accepted", v.accepted},
          {"oracle", to_string(v.provenance)}};
}

std::size_t pfr_t_min(int n, double delta, bool strict) {
  if (!strict) return static_cast<std::size_t>(n) + 1;
  check_unit(delta, "delta");
  return static_cast<std::size_t>(std::ceil(4.0 * n * n + std::log2(10 / delta)));
}

std::optional<SubgroupV> pfr_subgroup(const std::vector<PauliLabel>& samples,
                                      const PfrOracle& oracle, std::size_t t_min,
                                      const StateAccess& psi) {
  if (samples.size() < 2) throw std::invalid_argument("pfr_subgroup: need at least two samples");
  const int n = psi.num_qubits();
  if (oracle.subgroup.width != 2 * n) throw std::invalid_argument("pfr_subgroup: oracle size");
  std::vector<std::uint64_t> accepted;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const PauliLabel w = samples[i] + samples[j];
      // Repeated samples sum to the identity, which carries no information.
      if (!w.is_identity() && oracle.member(w)) accepted.push_back(pack(w));
    }
  }
  if (accepted.size() < t_min) return std::nullopt;
  SubgroupV v;
  v.basis = rref_basis(accepted, 2 * n);
  v.accepted = accepted.size();
  v.provenance = oracle.provenance;
  double sum = 0;
  const auto elems = span_elements(v.basis);
  for (auto e : elems) sum += psi.weight(unpack(e, n));
  v.mass = sum / static_cast<double>(elems.size());
  return v;
}

nlohmann::json to_json(const CandidateStabilizer& c) {
  return {{"generators", to_strings(c.state)},
          {"fidelity", c.fidelity},
          {"mub_index", c.mub_index},
          {"signs", c.signs},
          {"z", c.z}};
}

std::optional<CandidateStabilizer> find_stabilizer(const StateAccess& psi, const SubgroupV& v,
                                                   double gamma, double delta,
                                                   const FindConfig& config, RngStream& rng,
                                                   CostLedger& ledger) {
  check_gamma(gamma);
  check_unit(delta, "delta");
  if (config.rounds < 1) throw std::invalid_argument("find_stabilizer: rounds must be positive");
  const int n = psi.num_qubits();
  if (v.basis.width != 2 * n) throw std::invalid_argument("find_stabilizer: subgroup size");
  const auto canon = canonicalize_subgroup(basis_labels(v.basis), n);
  const int k = canon.k;
  const auto circuit = synthesize_circuit(canon.u);
  const StateVector upsi = apply_circuit(psi.state(), circuit);

  struct Candidate {
    StabilizerState phi;
    StateVector vec;
    int mub = -1;
    std::uint64_t signs = 0;
  };
  std::vector<Candidate> cands;
  if (k == 0) {
    cands.push_back({StabilizerState{0, {}}, StateVector(0, {1.0}), -1, 0});
  } else {
    const auto cover = mub_covering(k);
    for (std::size_t g = 0; g < cover.groups.size(); ++g) {
      const auto labels = basis_labels(cover.groups[g]);
      for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << k); ++signs) {
        auto phi = from_labels(k, labels, signs);
        auto vec = StateVector::from_stabilizer(phi);
        cands.push_back({std::move(phi), std::move(vec), static_cast<int>(g), signs});
      }
    }
  }

  CostCounts acc;
  std::vector<std::pair<std::size_t, std::uint64_t>> found;
  std::set<std::pair<std::size_t, std::uint64_t>> seen;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    for (int round = 0; round < config.rounds; ++round) {
      acc.copies += 1;
      acc.gates += circuit.size();
      std::uint64_t z = 0;
      if (k == 0) {
        z = measure_block(upsi, 0, n, rng).outcome;
      } else {
        BlockOutcome proj;
        try {
          proj = project_block_onto(upsi, 0, k, cands[c].vec);
        } catch (const std::domain_error&) {
          continue;
        }
        if (!rng.bernoulli(proj.prob)) continue;
        if (k < n) z = measure_block(proj.post, k, n - k, rng).outcome;
      }
      if (seen.insert({c, z}).second) found.emplace_back(c, z);
    }
  }
  if (found.empty()) {
    ledger.charge("find_stabilizer", acc);
    return std::nullopt;
  }

  // Fidelities are exact; the shadow cost is charged as if they were estimated.
  const double eps = config.shadow_error;
  acc.copies += ceil_count(2 * std::log(2 * static_cast<double>(found.size()) / delta) / (eps * eps));
  ledger.charge("find_stabilizer", acc);

  double best = -1;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < found.size(); ++i) {
    const auto& [c, z] = found[i];
    const StateVector prod =
        k == n ? cands[c].vec : tensor(cands[c].vec, StateVector::basis(n - k, z));
    const double f = overlap_sq(prod, upsi);
    if (f > best) {
      best = f;
      arg = i;
    }
  }
  const auto& [c, z] = found[arg];
  const auto uinv = canon.u.inverse();
  StabilizerState state = product_state(cands[c].phi, n, z);
  for (auto& g : state.generators) g = uinv.conjugate(g);
  return CandidateStabilizer{std::move(state), std::clamp(best, 0.0, 1.0), cands[c].mub,
                             cands[c].signs, z};
}

std::optional<HighStabDim> find_high_stab_dim(const StateAccess& psi, const SubgroupV& v,
                                              double gamma, double delta,
                                              const FindConfig& config, RngStream& rng,
                                              CostLedger& ledger) {
  check_gamma(gamma);
  check_unit(delta, "delta");
  if (config.rounds < 1) throw std::invalid_argument("find_high_stab_dim: rounds must be positive");
  const int n = psi.num_qubits();
  if (v.basis.width != 2 * n) throw std::invalid_argument("find_high_stab_dim: subgroup size");
  const auto canon = canonicalize_subgroup(basis_labels(v.basis), n);
  const int k = canon.k;
  const auto circuit = synthesize_circuit(canon.u);
  const StateVector upsi = apply_circuit(psi.state(), circuit);

  HighStabDim out;
  out.u = canon.u;
  out.k = k;
  CostCounts acc;
  if (k == n) {
    out.sigma = upsi;
    out.block_weight = 1;
  } else {
    std::vector<std::uint64_t> zs;
    for (int round = 0; round < config.rounds; ++round) {
      acc.copies += 1;
      acc.gates += circuit.size();
      const auto z = measure_block(upsi, k, n - k, rng).outcome;
      if (std::find(zs.begin(), zs.end(), z) == zs.end()) zs.push_back(z);
    }
    // Block weights are exact stand-ins for the shadow estimates.
    const auto weights = block_probabilities(upsi, k, n - k);
    double best = -1;
    for (auto z : zs) {
      if (weights[z] > best) {
        best = weights[z];
        out.z = z;
      }
    }
    if (best < 1e-12) {
      ledger.charge("find_high_stab_dim", acc);
      return std::nullopt;
    }
    out.block_weight = best;
    out.sigma = StateVector::normalize(k, conditional_block(upsi, k, n - k, out.z));
  }
  // Tomography of the k-qubit block, charged at 4^k log(1/delta) / (eps^2 weight).
  const double eps = config.shadow_error;
  acc.copies += ceil_count(std::ldexp(std::log(1 / delta), 2 * k) / (eps * eps * out.block_weight));
  ledger.charge("find_high_stab_dim", acc);
  const StateVector full = k == n ? out.sigma : tensor(out.sigma, StateVector::basis(n - k, out.z));
  out.state = apply_circuit(full, inverse(circuit));
  return out;
}

nlohmann::json to_json(const SelfCorrectResult& r) {
  return {{"candidate", to_json(r.candidate)},
          {"subgroup", to_json(r.subgroup)},
          {"attempts", r.attempts}};
}

SelfCorrectResult self_correct(const StateAccess& psi, double gamma, double delta,
                               const OracleSpec& spec, const SelfCorrectConfig& config,
                               RngStream& rng, CostLedger& ledger) {
  check_gamma(gamma);
  check_unit(delta, "delta");
  if (config.max_attempts < 1) throw std::invalid_argument("self_correct: attempt budget");
  const int n = psi.num_qubits();
  PfrOracle oracle;
  if (spec.mode == OracleProvenance::planted) {
    oracle = make_planted_oracle(spec.planted);
  } else {
    auto orng = rng.child("oracle");
    oracle = make_threshold_span_oracle(psi, spec.theta, spec.shots, spec.estimator, orng, ledger);
  }
  const std::size_t t = config.t ? config.t : 2 * (static_cast<std::size_t>(n) + 1);
  const std::size_t t_min = pfr_t_min(n, delta, config.strict_t_min);

  for (int a = 0; a < config.max_attempts; ++a) {
    auto arng = rng.child(static_cast<std::uint64_t>(a));
    const auto sets = collect_small_doubling(psi, t, gamma, delta, config.collect, arng, ledger);
    for (const auto& set : sets) {
      const auto v = pfr_subgroup(set, oracle, t_min, psi);
      if (!v) continue;
      auto cand = find_stabilizer(psi, *v, gamma, delta, config.find, arng, ledger);
      if (cand) return {std::move(*cand), *v, a + 1};
    }
  }
  throw AttemptsExhausted(config.max_attempts);
}

TolerantResult tolerant_test(const StateAccess& psi, double eps1, double eps2, int t,
                             double delta, const TesterConfig& config, RngStream& rng,
                             CostLedger& ledger) {
  if (!(eps1 > 0 && eps1 <= 1) || !(eps2 >= 0 && eps2 < 1)) {
    throw std::invalid_argument("tolerant_test: eps1 in (0,1], eps2 in [0,1)");
  }
  if (t < 0 || t > psi.num_qubits()) throw std::invalid_argument("tolerant_test: t out of range");
  check_unit(delta, "delta");
  if (!(config.separation_constant > 0) || !(config.exponent > 0)) {
    throw std::invalid_argument("tolerant_test: bad separation constants");
  }
  TolerantResult out;
  out.completeness = std::ldexp(std::pow(eps1, 6), -2 * t);
  out.soundness = config.separation_constant * std::pow(eps2, 1 / config.exponent);
  out.accuracy = (out.completeness - out.soundness) / 10;
  if (!(out.accuracy > 0)) {
    throw std::invalid_argument("tolerant_test: eps1, eps2 and t are not separable");
  }
  if (config.mode == EstimatorMode::exact) {
    out.estimate = gowers3_exact(psi.state()).proxy;
  } else {
    const auto m = gowers3_sampled(psi.state(), out.accuracy, delta, rng, ledger);
    out.estimate = m.proxy;
    out.shots = m.shots;
  }
  out.accept = out.estimate >= out.completeness - out.accuracy;
  return out;
}

}  // namespace stabdecomp
