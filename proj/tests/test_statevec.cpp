#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "stabdecomp/statevec.hpp"

using namespace stabdecomp;

namespace {

const double kR = 1 / std::sqrt(2.0);

StateVector t_state() {
  return StateVector(1, {kR, kR * std::exp(cplx(0, std::numbers::pi / 4))});
}

StateVector power(const StateVector& s, int k) {
  StateVector out = s;
  for (int i = 1; i < k; ++i) out = tensor(out, s);
  return out;
}

StabilizerState stab(std::vector<std::string> gens) { return parse_stabilizer_state(gens); }

// Independent oracle: the expectation from the explicit action on basis states.
double naive_expectation(const StateVector& psi, const PauliLabel& x) {
  cplx acc = 0;
  for (std::size_t j = 0; j < psi.dim(); ++j) {
    // Apply Z^b then X^a then the phase.
    double s = 1;
    for (int q = 0; q < psi.n; ++q) {
      if (((x.zpart >> q) & 1) && ((j >> q) & 1)) s = -s;
    }
    cplx ph = 1;
    for (int q = 0; q < psi.n; ++q) {
      if (((x.zpart >> q) & 1) && ((x.xpart >> q) & 1)) ph *= cplx(0, 1);
    }
    acc += std::conj(psi.amp[j ^ x.xpart]) * ph * s * psi.amp[j];
  }
  return acc.real();
}

// Naive tables straight from the definitions.
std::pair<std::vector<double>, std::vector<double>> naive_tables(const StateVector& psi) {
  const std::size_t size = std::size_t{1} << (2 * psi.n);
  std::vector<double> p(size), q(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    const double e = naive_expectation(psi, table_label(i, psi.n));
    p[i] = e * e / std::ldexp(1.0, psi.n);
  }
  for (std::size_t x = 0; x < size; ++x)
    for (std::size_t y = 0; y < size; ++y) q[x] += p[y] * p[x ^ y];
  return {p, q};
}

double sq_sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST(Weyl, ApplyExamples) {
  const auto zero = StateVector::basis(1, 0);
  EXPECT_NEAR(std::abs(apply_weyl(zero, parse_label("X")).amp[1] - 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(apply_weyl(zero, parse_label("Y")).amp[1] - cplx(0, 1)), 0, 1e-15);
  RngStream rng(1);
  const auto psi = haar_state(3, rng);
  const auto x = parse_label("XYZ");
  const auto back = apply_weyl(apply_weyl(psi, x), x);
  for (std::size_t i = 0; i < psi.dim(); ++i) EXPECT_NEAR(std::abs(back.amp[i] - psi.amp[i]), 0, 1e-14);
}

TEST(Weyl, ApplyCircuitExamples) {
  CostLedger ledger;
  const auto plus = apply_circuit(StateVector::basis(1, 0), {1, {{GateKind::H, 0, -1}}}, &ledger);
  EXPECT_NEAR(plus.amp[0].real(), kR, 1e-15);
  EXPECT_NEAR(plus.amp[1].real(), kR, 1e-15);
  const auto bell = apply_circuit(StateVector::basis(2, 0),
                                  {2, {{GateKind::H, 0, -1}, {GateKind::CNOT, 0, 1}}}, &ledger);
  EXPECT_NEAR(bell.amp[0].real(), kR, 1e-15);
  EXPECT_NEAR(bell.amp[3].real(), kR, 1e-15);
  EXPECT_EQ(ledger.totals().gates, 3u);
  EXPECT_THROW(apply_circuit(StateVector::basis(1, 0), {1, {{GateKind::H, 1, -1}}}),
               std::out_of_range);
}

TEST(Weyl, ExpectationExamples) {
  const auto zero = StateVector::basis(1, 0);
  EXPECT_NEAR(weyl_expectation(zero, parse_label("Z")), 1, 1e-12);
  EXPECT_NEAR(weyl_expectation(zero, parse_label("X")), 0, 1e-12);
  EXPECT_NEAR(weyl_expectation(t_state(), parse_label("X")), kR, 1e-12);
  EXPECT_NEAR(weyl_expectation(t_state(), parse_label("Y")), kR, 1e-12);
  StateVector unnorm(1, {1.0, 1.0}, false);
  EXPECT_THROW(weyl_expectation(unnorm, parse_label("Z")), std::invalid_argument);
}

TEST(Weyl, AllExpectationsMatchNaive) {
  RngStream rng(2);
  for (int n = 1; n <= 4; ++n) {
    const auto psi = haar_state(n, rng);
    const auto e = weyl_expectations(psi);
    for (std::size_t i = 0; i < e.size(); ++i) {
      EXPECT_NEAR(e[i], naive_expectation(psi, table_label(i, n)), 1e-12);
      EXPECT_NEAR(e[i], weyl_expectation(psi, table_label(i, n)), 1e-12);
    }
  }
}

TEST(Tables, Examples) {
  const auto t0 = distribution_tables(StateVector::basis(3, 0));
  for (std::size_t i = 0; i < t0.p.values.size(); ++i) {
    const bool z_type = table_label(i, 3).xpart == 0;
    EXPECT_NEAR(t0.p.values[i], z_type ? 0.125 : 0.0, 1e-15);
  }
  const auto t = distribution_tables(t_state());
  const PauliLabel I = parse_label("I"), X = parse_label("X"), Y = parse_label("Y"),
                   Z = parse_label("Z");
  EXPECT_NEAR(t.p[I], 0.5, 1e-15);
  EXPECT_NEAR(t.p[X], 0.25, 1e-15);
  EXPECT_NEAR(t.p[Y], 0.25, 1e-15);
  EXPECT_NEAR(t.p[Z], 0.0, 1e-15);
  EXPECT_NEAR(t.q[I], 3.0 / 8, 1e-15);
  EXPECT_NEAR(t.q[X], 0.25, 1e-15);
  EXPECT_NEAR(t.q[Y], 0.25, 1e-15);
  EXPECT_NEAR(t.q[Z], 1.0 / 8, 1e-15);
}

TEST(Tables, FastConvolutionMatchesNaive) {
  RngStream rng(3);
  for (int n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto psi = haar_state(n, rng);
      const auto t = distribution_tables(psi);
      const auto [p, q] = naive_tables(psi);
      for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_NEAR(t.p.values[i], p[i], 1e-12);
        EXPECT_NEAR(t.q.values[i], q[i], 1e-12);
      }
    }
  }
}

TEST(Tables, LawsOnRandomStates) {
  RngStream rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 5;
    const auto psi = haar_state(n, rng);
    const auto t = distribution_tables(psi);
    EXPECT_NEAR(sq_sum(t.p.values), 1.0, 1e-10);
    EXPECT_NEAR(sq_sum(t.q.values), 1.0, 1e-10);
    const double cap = std::ldexp(1.0, -n) + 1e-15;
    for (double v : t.p.values) EXPECT_LE(v, cap);
    for (double v : t.q.values) EXPECT_LE(v, cap);
    const auto m = gowers3_exact(psi);
    EXPECT_GE(m.u3pow8 + 1e-15, m.proxy);
    EXPECT_GE(m.proxy + 1e-15, m.u3pow8 * m.u3pow8);
    EXPECT_LT(m.identity_gap, 1e-12);
  }
  EXPECT_THROW(distribution_tables(haar_state(table_cap() + 1, rng)), std::invalid_argument);
}

TEST(Gowers, ExactExamples) {
  const auto s = gowers3_exact(StateVector::from_stabilizer(stab({"+XX", "+ZZ"})));
  EXPECT_NEAR(s.proxy, 1.0, 1e-12);
  EXPECT_NEAR(s.u3pow8, 1.0, 1e-12);
  const auto t = gowers3_exact(t_state());
  EXPECT_NEAR(t.proxy, 5.0 / 8, 1e-12);
  EXPECT_NEAR(t.u3pow8, 3.0 / 4, 1e-12);
  EXPECT_NEAR(gowers3_exact(power(t_state(), 2)).proxy, 25.0 / 64, 1e-12);
}

TEST(Gowers, Tensorization) {
  RngStream rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = haar_state(1 + trial % 2, rng), b = haar_state(1 + trial % 3, rng);
    EXPECT_NEAR(gowers3_exact(tensor(a, b)).proxy, gowers3_exact(a).proxy * gowers3_exact(b).proxy,
                1e-10);
  }
}

TEST(Gowers, SampledWithinHoeffdingBand) {
  RngStream rng(6);
  const auto psi = power(t_state(), 2);
  const double exact = 25.0 / 64;
  int misses = 0;
  for (int rep = 0; rep < 40; ++rep) {
    CostLedger ledger;
    auto r = rng.child(rep);
    const auto m = gowers3_sampled(psi, 0.05, 0.05, r, ledger);
    if (std::abs(m.proxy - exact) > 0.05) ++misses;
    EXPECT_EQ(ledger.totals().copies, m.shots * 10);
  }
  // Expected misses <= 2 at 5% failure; allow generous slack.
  EXPECT_LE(misses, 8);
}

TEST(Sampling, ZeroStateGivesZType) {
  RngStream rng(7);
  CostLedger ledger;
  const WeylSampler sampler(StateVector::basis(3, 0));
  for (int i = 0; i < 500; ++i) EXPECT_EQ(sample_weyl_dist(sampler, rng, ledger).xpart, 0u);
  EXPECT_EQ(ledger.totals().copies, 2000u);
}

TEST(Sampling, StabilizerUniformOnGroup) {
  RngStream rng(8);
  CostLedger ledger;
  const auto s = stab({"+XX", "+ZZ"});
  const WeylSampler sampler(StateVector::from_stabilizer(s));
  const auto group = rref_basis({parse_label("XX"), parse_label("ZZ")}, 2);
  std::map<std::size_t, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto x = sample_weyl_dist(sampler, rng, ledger);
    ASSERT_TRUE(basis_contains(group, x));
    ++counts[table_index(x)];
  }
  ASSERT_EQ(counts.size(), 4u);
  const double mean = draws / 4.0, sigma = std::sqrt(draws * 0.25 * 0.75);
  for (const auto& [k, c] : counts) EXPECT_LT(std::abs(c - mean), 3 * sigma);
}

namespace {

void check_t_frequencies(const WeylSampler& sampler, std::uint64_t seed) {
  RngStream rng(seed);
  CostLedger ledger;
  const int draws = 100000;
  std::map<std::string, int> counts;
  for (int i = 0; i < draws; ++i) ++counts[to_string(sample_weyl_dist(sampler, rng, ledger))];
  const std::map<std::string, double> want = {
      {"+I", 3.0 / 8}, {"+X", 0.25}, {"+Y", 0.25}, {"+Z", 1.0 / 8}};
  for (const auto& [k, p] : want) {
    const double sigma = std::sqrt(draws * p * (1 - p));
    EXPECT_LT(std::abs(counts[k] - draws * p), 3 * sigma) << k;
  }
}

}  // namespace

TEST(Sampling, TStateFrequencies) { check_t_frequencies(WeylSampler(t_state()), 9); }

TEST(Sampling, TableFreePathMatchesLaw) {
  // Force the factorized sampler by lowering the table cap.
  setenv("STABDECOMP_TABLE_MAX_QUBITS", "1", 1);
  const auto psi = power(t_state(), 2);
  const WeylSampler sampler(psi);
  unsetenv("STABDECOMP_TABLE_MAX_QUBITS");
  const auto t = distribution_tables(psi);
  RngStream rng(10);
  const int draws = 100000;
  std::vector<int> counts(t.q.values.size(), 0);
  for (int i = 0; i < draws; ++i) ++counts[table_index(sampler.sample_q(rng))];
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double p = t.q.values[i];
    const double sigma = std::sqrt(draws * p * (1 - p)) + 1e-9;
    EXPECT_LT(std::abs(counts[i] - draws * p), 4 * sigma + 1) << i;
  }
}

TEST(Retention, Rates) {
  RngStream rng(11);
  CostLedger ledger;
  const auto zero = StateVector::basis(1, 0);
  for (int i = 0; i < 200; ++i) {
    EXPECT_TRUE(two_copy_retention(zero, parse_label("Z"), rng, ledger));
    EXPECT_FALSE(two_copy_retention(zero, parse_label("X"), rng, ledger));
  }
  EXPECT_EQ(ledger.totals().copies, 800u);
  const int trials = 100000;
  int kept = 0, kept_alt = 0;
  for (int i = 0; i < trials; ++i) {
    kept += two_copy_retention(t_state(), parse_label("X"), rng, ledger);
    kept_alt += two_copy_retention(t_state(), parse_label("X"), rng, ledger, RetentionMode::eigenvalue);
  }
  const double sigma = std::sqrt(trials * 0.25);
  EXPECT_LT(std::abs(kept - trials * 0.5), 3 * sigma);
  const double sigma_alt = std::sqrt(trials * 0.75 * 0.25);
  EXPECT_LT(std::abs(kept_alt - trials * 0.75), 3 * sigma_alt);
}

TEST(HadamardTest, ExamplesAndCoverage) {
  RngStream rng(12);
  CostLedger ledger;
  const auto zero = StateVector::basis(1, 0);
  const auto plus = StateVector::from_stabilizer(stab({"+X"}));
  const auto e = hadamard_test_estimate(zero, plus, 0.05, 0.01, EstimatorMode::sampled, rng, ledger);
  EXPECT_NEAR(e.real(), kR, 0.05);
  EXPECT_NEAR(e.imag(), 0, 0.05);
  const auto self = hadamard_test_estimate(plus, plus, 0.05, 0.01, EstimatorMode::sampled, rng, ledger);
  EXPECT_NEAR(self.real(), 1, 0.05);
  EXPECT_GT(ledger.totals().queries_con_u, 0u);

  // Coverage: each run misses with probability <= delta = 0.1.
  const cplx want = inner(zero, t_state());
  int misses = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto r = rng.child(rep);
    const auto est = hadamard_test_estimate(zero, t_state(), 0.1, 0.1, EstimatorMode::sampled, r, ledger);
    if (std::abs(est.real() - want.real()) > 0.1 || std::abs(est.imag() - want.imag()) > 0.1) {
      ++misses;
    }
  }
  EXPECT_LE(misses, 40);
  const auto exact = hadamard_test_estimate(zero, t_state(), 0.1, 0.1, EstimatorMode::exact, rng, ledger);
  EXPECT_NEAR(std::abs(exact - want), 0, 1e-15);
}

TEST(Block, Examples) {
  RngStream rng(13);
  const auto bell = StateVector::from_stabilizer(stab({"+XX", "+ZZ"}));
  const auto probs = block_probabilities(bell, 0, 1);
  EXPECT_NEAR(probs[0], 0.5, 1e-12);
  EXPECT_NEAR(probs[1], 0.5, 1e-12);
  for (int i = 0; i < 20; ++i) {
    const auto o = measure_block(bell, 0, 1, rng);
    EXPECT_NEAR(o.prob, 0.5, 1e-12);
    EXPECT_NEAR(std::abs(o.post.amp[o.outcome ? 3 : 0]), 1.0, 1e-12);
  }
  const auto zp = tensor(StateVector::basis(1, 0), StateVector::from_stabilizer(stab({"+X"})));
  EXPECT_NEAR(project_block(zp, 0, 1, 0).prob, 1.0, 1e-12);
  EXPECT_THROW(project_block(zp, 0, 1, 1), std::domain_error);
  const double th = std::numbers::pi / 6;
  const StateVector cs(2, {std::cos(th), 0, 0, std::sin(th)});
  EXPECT_NEAR(project_block_onto(cs, 0, 2, StateVector::basis(2, 0)).prob, 0.75, 1e-12);
  EXPECT_NEAR(project_block_onto(cs, 0, 1, StateVector::basis(1, 1)).prob, 0.25, 1e-12);
  const auto cond = conditional_block(cs, 1, 1, 1);
  EXPECT_NEAR(std::abs(cond[1] - std::sin(th)), 0, 1e-12);
}

TEST(Lcu, Examples) {
  CostLedger ledger;
  const auto plus = stab({"+X"});
  const auto psi = t_state();
  const cplx beta = inner(StateVector::from_stabilizer(plus), psi);
  const auto r = lcu_residual(psi, {plus}, {beta}, 1.0, ledger);
  EXPECT_NEAR(std::abs(inner(StateVector::from_stabilizer(plus), r.residual)), 0, 1e-12);
  const double c1sq = (2 + std::sqrt(2.0)) / 4;
  const double r1 = std::sqrt(1 - c1sq);
  EXPECT_NEAR(r.success_prob, std::pow(r1 / (1 + std::sqrt(c1sq)), 2), 1e-12);
  EXPECT_NEAR(r.raw_norm, r1, 1e-12);
  EXPECT_EQ(ledger.breakdown().at("lcu").queries_con_u, r.attempts);
  EXPECT_THROW(lcu_residual(StateVector::from_stabilizer(plus), {plus}, {1.0}, 1.0, ledger),
               DegenerateResidual);
  EXPECT_THROW(lcu_residual(psi, {plus}, {beta}, 0.0, ledger), std::invalid_argument);
}

TEST(BruteForce, Examples) {
  EXPECT_NEAR(bruteforce_stab_fidelity(StateVector::basis(3, 0)).value, 1, 1e-12);
  const auto t = bruteforce_stab_fidelity(t_state());
  EXPECT_NEAR(t.value, (2 + std::sqrt(2.0)) / 4, 1e-12);
  EXPECT_NEAR(overlap_sq(StateVector::from_stabilizer(t.argmax), t_state()), t.value, 1e-12);
  EXPECT_NEAR(bruteforce_stab_fidelity(StateVector::from_stabilizer(stab({"+XX", "+ZZ"}))).value, 1,
              1e-12);
  RngStream rng(14);
  EXPECT_THROW(bruteforce_stab_fidelity(haar_state(6, rng)), std::invalid_argument);
}

TEST(BruteForce, MatchesEnumerationOracle) {
  RngStream rng(15);
  for (int n = 1; n <= 3; ++n) {
    const auto states = enumerate_stabilizer_states(n);
    std::vector<StateVector> vecs;
    for (const auto& s : states) vecs.push_back(StateVector::from_stabilizer(s));
    for (int rep = 0; rep < 10; ++rep) {
      const auto psi = haar_state(n, rng);
      double best = -1;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < vecs.size(); ++i) {
        const double f = overlap_sq(vecs[i], psi);
        if (f > best + 1e-12) {
          best = f;
          arg = i;
        }
      }
      const auto bf = bruteforce_stab_fidelity(psi);
      EXPECT_NEAR(bf.value, best, 1e-12);
      EXPECT_EQ(canonical_form(bf.argmax), canonical_form(states[arg]));
    }
  }
}

TEST(BruteForce, TieBreakIsDeterministic) {
  // |0> has fidelity 1/2 with |+>, |->, |+i>, |-i>; |+> tensor |0> is a tie case.
  const auto y_plus = StateVector::from_stabilizer(stab({"+Y"}));
  const auto a = bruteforce_stab_fidelity(y_plus);
  const auto b = bruteforce_stab_fidelity(y_plus);
  EXPECT_EQ(a.argmax, b.argmax);
}

TEST(BruteForce, LagrangianLowerBoundAndCompleteness) {
  RngStream rng(16);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const auto psi = haar_state(n, rng);
    const double fs = bruteforce_stab_fidelity(psi).value;
    const auto e = weyl_expectations(psi);
    for (const auto& node : isotropic_orbit(n, n).nodes) {
      EXPECT_GE(fs + 1e-12, subspace_mean_sq(e, rref_basis(node.basis_rows, 2 * n), n));
    }
    EXPECT_GE(gowers3_exact(psi).proxy + 1e-12, std::pow(fs, 6));
  }
}

TEST(BruteForce, StabilizerDimension) {
  RngStream rng(17);
  const auto psi = haar_state(3, rng);
  EXPECT_NEAR(bruteforce_stab_dim_fidelity(psi, 3).value, bruteforce_stab_fidelity(psi).value,
              1e-12);
  EXPECT_NEAR(bruteforce_stab_dim_fidelity(psi, 0).value, 1.0, 1e-12);
  double prev = 1.0;
  for (int d = 0; d <= 3; ++d) {
    const double v = bruteforce_stab_dim_fidelity(psi, d).value;
    EXPECT_LE(v, prev + 1e-12);
    prev = v;
  }
  // |0> tensor |T> has a stabilizer of dimension 1.
  const auto zt = tensor(StateVector::basis(1, 0), t_state());
  const auto f = bruteforce_stab_dim_fidelity(zt, 1);
  EXPECT_NEAR(f.value, 1.0, 1e-12);
  EXPECT_EQ(f.subspace.rank(), 1);
}

TEST(Io, RoundTrips) {
  RngStream rng(18);
  const auto psi = haar_state(3, rng);
  const std::string path = ::testing::TempDir() + "state.bin";
  write_binary(psi, path);
  const auto back = read_binary(path);
  EXPECT_EQ(back.amp, psi.amp);
  EXPECT_TRUE(back.normalized);
  std::remove(path.c_str());
  const auto j = to_json(psi);
  EXPECT_EQ(state_from_json(nlohmann::json::parse(j.dump())).amp, psi.amp);
}

TEST(Rng, DeterministicAndSplit) {
  RngStream a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
  auto c1 = RngStream(42).child("trial").child(3);
  auto c2 = RngStream(42).child("trial").child(3);
  auto c3 = RngStream(42).child("trial").child(4);
  EXPECT_EQ(c1(), c2());
  EXPECT_NE(c1(), c3());
  EXPECT_EQ(c1.path().size(), 2u);
}

TEST(Ledger, TotalsEqualBreakdownSums) {
  CostLedger a, b;
  a.charge("x", {.copies = 3});
  a.charge("y", {.gates = 5});
  b.charge("x", {.copies = 1, .queries_con_u = 2});
  a.merge(b);
  CostCounts sum;
  for (const auto& [k, c] : a.breakdown()) sum += c;
  EXPECT_EQ(sum, a.totals());
  EXPECT_EQ(a.totals().copies, 4u);
  EXPECT_EQ(to_json(a)["totals"]["gates"], 5);
}
