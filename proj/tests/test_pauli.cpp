#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "stabdecomp/pauli.hpp"

using namespace stabdecomp;

namespace {

using Mat = std::vector<std::vector<cplx>>;

Mat eye(std::size_t d) {
  Mat m(d, std::vector<cplx>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) m[i][i] = 1.0;
  return m;
}

Mat kron(const Mat& a, const Mat& b) {
  const std::size_t ra = a.size(), rb = b.size();
  Mat m(ra * rb, std::vector<cplx>(ra * rb, 0.0));
  for (std::size_t i = 0; i < ra; ++i)
    for (std::size_t j = 0; j < ra; ++j)
      for (std::size_t k = 0; k < rb; ++k)
        for (std::size_t l = 0; l < rb; ++l) m[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
  return m;
}

Mat mul(const Mat& a, const Mat& b) {
  const std::size_t d = a.size();
  Mat m(d, std::vector<cplx>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < d; ++j) m[i][j] += a[i][k] * b[k][j];
  return m;
}

Mat dagger(const Mat& a) {
  Mat m = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) m[i][j] = std::conj(a[j][i]);
  return m;
}

double dist(const Mat& a, const Mat& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
  return d;
}

const cplx I1(0, 1);

// Qubit q sits on bit q of the index, so the leftmost Kronecker factor is qubit n-1.
Mat local_op(int n, int q, const Mat& op) {
  Mat m = eye(1);
  for (int k = n - 1; k >= 0; --k) m = kron(m, k == q ? op : eye(2));
  return m;
}

Mat pauli_matrix(const PhasedPauli& p) {
  const int n = p.label.n;
  const Mat X{{0, 1}, {1, 0}}, Z{{1, 0}, {0, -1}};
  Mat m = eye(std::size_t{1} << n);
  for (int q = 0; q < n; ++q) {
    if ((p.label.xpart >> q) & 1) m = mul(m, local_op(n, q, X));
  }
  for (int q = 0; q < n; ++q) {
    if ((p.label.zpart >> q) & 1) m = mul(m, local_op(n, q, Z));
  }
  const int ab = std::popcount(p.label.xpart & p.label.zpart);
  const cplx ph = std::pow(I1, ab + p.phase);
  for (auto& row : m)
    for (auto& v : row) v *= ph;
  return m;
}

Mat gate_matrix(int n, const Gate& g) {
  const double r = 1 / std::sqrt(2.0);
  switch (g.kind) {
    case GateKind::H: return local_op(n, g.q0, Mat{{r, r}, {r, -r}});
    case GateKind::S: return local_op(n, g.q0, Mat{{1, 0}, {0, I1}});
    case GateKind::X: return local_op(n, g.q0, Mat{{0, 1}, {1, 0}});
    case GateKind::Z: return local_op(n, g.q0, Mat{{1, 0}, {0, -1}});
    case GateKind::CNOT: {
      const std::size_t d = std::size_t{1} << n;
      Mat m(d, std::vector<cplx>(d, 0.0));
      for (std::size_t j = 0; j < d; ++j) {
        const std::size_t i = ((j >> g.q0) & 1) ? j ^ (std::size_t{1} << g.q1) : j;
        m[i][j] = 1.0;
      }
      return m;
    }
  }
  return {};
}

Mat circuit_matrix(const CliffordCircuit& c) {
  Mat u = eye(std::size_t{1} << c.n);
  for (const auto& g : c.gates) u = mul(gate_matrix(c.n, g), u);
  return u;
}

// Distance between matrices up to a global phase.
double phase_dist(const Mat& a, const Mat& b) {
  cplx overlap = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) overlap += std::conj(a[i][j]) * b[i][j];
  if (std::abs(overlap) < 1e-12) return 1e9;
  const cplx ph = overlap / std::abs(overlap);
  Mat a2 = a;
  for (auto& row : a2)
    for (auto& v : row) v *= ph;
  return dist(a2, b);
}

CliffordCircuit random_circuit(std::mt19937_64& rng, int n, int len) {
  CliffordCircuit c{n, {}};
  for (int i = 0; i < len; ++i) {
    const int kind = static_cast<int>(rng() % (n > 1 ? 5 : 4));
    const int q = static_cast<int>(rng() % n);
    if (kind == 4) {
      int t = static_cast<int>(rng() % (n - 1));
      if (t >= q) ++t;
      c.gates.push_back({GateKind::CNOT, q, t});
    } else {
      const GateKind kinds[4] = {GateKind::H, GateKind::S, GateKind::X, GateKind::Z};
      c.gates.push_back({kinds[kind], q, -1});
    }
  }
  return c;
}

PhasedPauli random_pauli(std::mt19937_64& rng, int n) {
  return PhasedPauli(PauliLabel(n, rng() & low_mask(n), rng() & low_mask(n)),
                     static_cast<int>(rng() % 4));
}

PhasedPauli pp(const char* s) { return parse_phased_pauli(s); }

}  // namespace

TEST(PauliProduct, Examples) {
  EXPECT_EQ(pauli_product(pp("X"), pp("X")), pp("I"));
  EXPECT_EQ(pauli_product(pp("X"), pp("Z")), pp("-iY"));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + i % 10;
    const PhasedPauli w(PauliLabel(n, rng() & low_mask(n), rng() & low_mask(n)), 0);
    EXPECT_EQ(pauli_product(w, w), PhasedPauli(PauliLabel::identity(n), 0));
  }
  EXPECT_THROW(pauli_product(pp("X"), pp("XX")), std::invalid_argument);
}

TEST(PauliProduct, MatchesMatrices) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    const int n = 1 + i % 3;
    const auto p = random_pauli(rng, n), q = random_pauli(rng, n);
    EXPECT_LT(dist(pauli_matrix(pauli_product(p, q)), mul(pauli_matrix(p), pauli_matrix(q))),
              1e-12);
  }
}

TEST(PauliText, RoundTrip) {
  for (const char* s : {"+XIZY", "-ZZ", "+iX", "-iY"}) EXPECT_EQ(to_string(pp(s)), s);
  EXPECT_EQ(pp("XZ").phase, 0);
}

TEST(Conjugate, Examples) {
  CliffordTableau h(1);
  h.apply(Gate{GateKind::H, 0, -1});
  EXPECT_EQ(h.conjugate(pp("X")), pp("Z"));
  CliffordTableau s(1);
  s.apply(Gate{GateKind::S, 0, -1});
  EXPECT_EQ(s.conjugate(pp("X")), pp("Y"));
  CliffordTableau cx(2);
  cx.apply(Gate{GateKind::CNOT, 0, 1});
  EXPECT_EQ(cx.conjugate(pp("XI")), pp("XX"));
  EXPECT_EQ(cx.conjugate(pp("IZ")), pp("ZZ"));
}

TEST(Conjugate, MatchesDenseUnitary) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + trial % 3;
    const auto c = random_circuit(rng, n, 12);
    const auto t = CliffordTableau::from_circuit(c);
    const Mat u = circuit_matrix(c);
    for (int k = 0; k < 4; ++k) {
      const auto p = random_pauli(rng, n);
      EXPECT_LT(dist(pauli_matrix(t.conjugate(p)), mul(mul(u, pauli_matrix(p)), dagger(u))),
                1e-12);
    }
  }
}

TEST(Conjugate, PreservesSymplecticProducts) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + trial % 6;
    const auto t = CliffordTableau::from_circuit(random_circuit(rng, n, 3 * n));
    const auto p = random_pauli(rng, n), q = random_pauli(rng, n);
    ASSERT_EQ(symplectic_product(t.conjugate(p).label, t.conjugate(q).label),
              symplectic_product(p.label, q.label));
  }
}

TEST(Synthesis, Examples) {
  EXPECT_TRUE(synthesize_circuit(CliffordTableau(3)).empty());
  CliffordTableau h(1);
  h.apply(Gate{GateKind::H, 0, -1});
  const auto c = synthesize_circuit(h);
  ASSERT_EQ(c.gates.size(), 1u);
  EXPECT_EQ(c.gates[0], (Gate{GateKind::H, 0, -1}));
}

TEST(Synthesis, RoundTripExactWithSigns) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 1 + trial % 8;
    const auto t = CliffordTableau::from_circuit(random_circuit(rng, n, 6 * n));
    const auto c = synthesize_circuit(t);
    EXPECT_EQ(CliffordTableau::from_circuit(c), t);
    EXPECT_LE(c.size(), static_cast<std::size_t>(8 * n * n + 8 * n));
    const auto inv = t.inverse();
    CliffordTableau both = t;
    both.apply(synthesize_circuit(inv));
    EXPECT_EQ(both, CliffordTableau(n));
  }
}

TEST(Synthesis, SameUnitaryUpToPhase) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const auto c = random_circuit(rng, n, 15);
    const auto c2 = synthesize_circuit(CliffordTableau::from_circuit(c));
    EXPECT_LT(phase_dist(circuit_matrix(c), circuit_matrix(c2)), 1e-10);
  }
}

namespace {

bool maps_to_z_block(const CliffordTableau& u, const std::vector<PauliLabel>& labels, int lo,
                     int hi) {
  const int n = u.num_qubits();
  std::vector<PauliLabel> imgs, want;
  for (const auto& x : labels) imgs.push_back(u.conjugate(PhasedPauli(x, 0)).label);
  for (int q = lo; q < hi; ++q) want.push_back(PauliLabel::z_on(n, q));
  return rref_basis(imgs, n) == rref_basis(want, n);
}

}  // namespace

TEST(Isotropic, Examples) {
  const auto z = clifford_from_isotropic(rref_basis({parse_label("Z")}, 1));
  EXPECT_EQ(z.conjugate(pp("Z")).label, parse_label("Z"));
  const auto x = clifford_from_isotropic(rref_basis({parse_label("X")}, 1));
  EXPECT_EQ(x.conjugate(pp("X")).label, parse_label("Z"));
  EXPECT_EQ(x.conjugate(pp("Z")).label, parse_label("X"));
  const std::vector<PauliLabel> bell = {parse_label("XX"), parse_label("ZZ")};
  EXPECT_TRUE(maps_to_z_block(clifford_from_isotropic(rref_basis(bell, 2)), bell, 0, 2));
  EXPECT_THROW(clifford_from_isotropic(rref_basis({parse_label("X"), parse_label("Z")}, 1)),
               std::invalid_argument);
}

TEST(Isotropic, RandomSubspaces) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 8;
    const int d = static_cast<int>(rng() % (n + 1));
    // Random isotropic subspace: conjugate a Z block by a random Clifford.
    const auto t = CliffordTableau::from_circuit(random_circuit(rng, n, 8 * n));
    std::vector<PauliLabel> labels;
    for (int q = 0; q < d; ++q) labels.push_back(t.conjugate(PhasedPauli(PauliLabel::z_on(n, q), 0)).label);
    const auto u = clifford_from_isotropic(rref_basis(labels, n));
    EXPECT_TRUE(u.is_valid());
    EXPECT_TRUE(maps_to_z_block(u, labels, n - d, n));
  }
}

TEST(AnticommutingPair, Examples) {
  EXPECT_EQ(clifford_from_anticommuting_pair(pp("X"), pp("Z")), CliffordTableau(1));
  const auto h = clifford_from_anticommuting_pair(pp("Z"), pp("X"));
  EXPECT_EQ(h.x_image(0), pp("Z"));
  EXPECT_EQ(h.z_image(0), pp("X"));
  // Y1X2 and Z1Z2 commute, so the pair is rejected; Y1X2 with Z1X2 anticommutes.
  EXPECT_THROW(clifford_from_anticommuting_pair(pp("YX"), pp("ZZ")), std::invalid_argument);
  const auto u = clifford_from_anticommuting_pair(pp("YX"), pp("-ZX"));
  EXPECT_EQ(u.conjugate(pp("YX")), pp("XI"));
  EXPECT_EQ(u.conjugate(pp("-ZX")), pp("ZI"));
  EXPECT_THROW(clifford_from_anticommuting_pair(pp("X"), pp("X")), std::invalid_argument);
}

TEST(AnticommutingPair, RandomSignedPairs) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 7;
    PhasedPauli p = random_pauli(rng, n), q = random_pauli(rng, n);
    p.phase &= 2;
    q.phase &= 2;
    if (symplectic_product(p.label, q.label) != 1) continue;
    const auto u = clifford_from_anticommuting_pair(p, q);
    EXPECT_EQ(u.conjugate(p), PhasedPauli(PauliLabel::x_on(n, 0), 0));
    EXPECT_EQ(u.conjugate(q), PhasedPauli(PauliLabel::z_on(n, 0), 0));
  }
}

TEST(Canonicalize, Examples) {
  auto c = canonicalize_subgroup({parse_label("ZI"), parse_label("XI"), parse_label("IZ")}, 2);
  EXPECT_EQ(c.k, 1);
  EXPECT_EQ(c.m, 1);
  EXPECT_EQ(c.u.conjugate(pp("IZ")).label, parse_label("IZ"));
  c = canonicalize_subgroup({parse_label("XI"), parse_label("IZ")}, 2);
  EXPECT_EQ(c.k, 0);
  EXPECT_EQ(c.m, 2);
  EXPECT_TRUE(maps_to_z_block(c.u, {parse_label("XI"), parse_label("IZ")}, 0, 2));
  c = canonicalize_subgroup({parse_label("X"), parse_label("Z")}, 1);
  EXPECT_EQ(c.k, 1);
  EXPECT_EQ(c.m, 0);
}

TEST(Canonicalize, RandomSubgroupsExactImage) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 8;
    std::vector<PauliLabel> gens;
    for (int i = 0; i < static_cast<int>(rng() % (2 * n + 1)); ++i) {
      gens.emplace_back(n, rng() & low_mask(n), rng() & low_mask(n));
    }
    const auto c = canonicalize_subgroup(gens, n);
    const auto sgs = symplectic_gram_schmidt(gens);
    EXPECT_EQ(c.k, static_cast<int>(sgs.pairs.size()));
    EXPECT_EQ(c.m, static_cast<int>(sgs.center.size()));
    std::vector<PauliLabel> imgs, want;
    for (const auto& g : gens) imgs.push_back(c.u.conjugate(PhasedPauli(g, 0)).label);
    for (int q = 0; q < c.k; ++q) {
      want.push_back(PauliLabel::x_on(n, q));
      want.push_back(PauliLabel::z_on(n, q));
    }
    for (int q = c.k; q < c.k + c.m; ++q) want.push_back(PauliLabel::z_on(n, q));
    const auto got = rref_basis(imgs, n);
    ASSERT_EQ(got, rref_basis(want, n));
    if (got.rank() <= 12) {
      const auto a = span_elements(got), b = span_elements(rref_basis(want, n));
      EXPECT_EQ(std::set<std::uint64_t>(a.begin(), a.end()),
                std::set<std::uint64_t>(b.begin(), b.end()));
    }
  }
}

namespace {

// Independent oracle: project a fixed generic vector with prod (I + g)/2.
std::vector<cplx> projected_vector(const StabilizerState& s) {
  const std::size_t d = std::size_t{1} << s.n;
  std::vector<cplx> v(d);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  for (std::size_t i = 0; i < d; ++i) v[i] = cplx(gauss(rng), gauss(rng));
  for (const auto& g : s.generators) {
    const Mat m = pauli_matrix(g);
    std::vector<cplx> w(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) w[i] += m[i][j] * v[j];
    for (std::size_t i = 0; i < d; ++i) v[i] = 0.5 * (v[i] + w[i]);
  }
  double norm = 0;
  for (auto x : v) norm += std::norm(x);
  std::size_t first = 0;
  while (std::abs(v[first]) < 1e-9) ++first;
  const cplx ph = std::abs(v[first]) / v[first];
  for (auto& x : v) x *= ph / std::sqrt(norm);
  return v;
}

double vec_dist(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

StabilizerState state_of(std::vector<const char*> gens) {
  std::vector<std::string> s(gens.begin(), gens.end());
  return parse_stabilizer_state(s);
}

}  // namespace

TEST(StatePrep, Examples) {
  EXPECT_TRUE(stab_state_prep(zero_state(3)).empty());
  const auto plus = stab_state_prep(state_of({"+X"}));
  ASSERT_EQ(plus.gates.size(), 1u);
  EXPECT_EQ(plus.gates[0], (Gate{GateKind::H, 0, -1}));
  const auto bell = stabilizer_vector(state_of({"+XX", "+ZZ"}));
  const double r = 1 / std::sqrt(2.0);
  EXPECT_LT(vec_dist(bell, {r, 0, 0, r}), 1e-12);
  EXPECT_THROW(state_of({"+XX", "+ZI"}), std::invalid_argument);
  EXPECT_THROW(state_of({"+ZZ", "+ZZ"}), std::invalid_argument);
}

TEST(StatePrep, RandomStatesMatchProjectorOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    const auto u = CliffordTableau::from_circuit(random_circuit(rng, n, 10 * n));
    const auto s = stabilizer_from_clifford(u, rng() & low_mask(n));
    SCOPED_TRACE(::testing::PrintToString(to_strings(s)));
    const auto v = stabilizer_vector(s);
    EXPECT_LT(vec_dist(v, projected_vector(s)), 1e-12);
    const auto c = canonical_form(s);
    EXPECT_LT(vec_dist(stabilizer_vector(c), v), 1e-12);
    EXPECT_EQ(canonical_form(c), c);
  }
}

TEST(InnerProduct, Examples) {
  EXPECT_NEAR(std::abs(stabilizer_inner_product(zero_state(1), zero_state(1)) - 1.0), 0, 1e-12);
  EXPECT_NEAR(std::abs(stabilizer_inner_product(zero_state(1), state_of({"+X"})) -
                       cplx(1 / std::sqrt(2.0))),
              0, 1e-12);
  EXPECT_NEAR(std::abs(stabilizer_inner_product(zero_state(2), state_of({"+XX", "+ZZ"})) -
                       cplx(1 / std::sqrt(2.0))),
              0, 1e-12);
}

TEST(InnerProduct, AllTwoQubitPairsMatchOracle) {
  const auto states = enumerate_stabilizer_states(2);
  std::vector<std::vector<cplx>> vecs;
  for (const auto& s : states) vecs.push_back(projected_vector(s));
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = 0; j < states.size(); ++j) {
      cplx want = 0;
      for (std::size_t k = 0; k < 4; ++k) want += std::conj(vecs[i][k]) * vecs[j][k];
      ASSERT_LT(std::abs(stabilizer_inner_product(states[i], states[j]) - want), 1e-12);
    }
  }
}

TEST(Enumeration, CountsAndDistinctness) {
  const std::size_t expected[] = {0, 6, 60, 1080, 36720};
  for (int n = 1; n <= 4; ++n) {
    const auto states = enumerate_stabilizer_states(n);
    EXPECT_EQ(states.size(), expected[n]);
    if (n <= 3) {
      std::set<std::vector<std::string>> seen;
      for (const auto& s : states) seen.insert(to_strings(canonical_form(s)));
      EXPECT_EQ(seen.size(), states.size());
    }
  }
  // Pairwise distinct as rays for n = 2.
  const auto states = enumerate_stabilizer_states(2);
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      EXPECT_LT(std::abs(stabilizer_inner_product(states[i], states[j])), 1 - 1e-9);
  EXPECT_THROW(enumerate_stabilizer_states(5), std::invalid_argument);
}

TEST(Orbit, IsotropicCounts) {
  // Number of isotropic subspaces of dimension d in F2^{2n}.
  auto count = [](int n, int d) {
    double c = 1;
    for (int i = 0; i < d; ++i) c *= (std::pow(4.0, n - i) - 1) / (std::pow(2.0, i + 1) - 1);
    return static_cast<std::size_t>(std::llround(c));
  };
  for (int n = 1; n <= 3; ++n)
    for (int d = 0; d <= n; ++d) EXPECT_EQ(isotropic_orbit(n, d).nodes.size(), count(n, d));
  EXPECT_EQ(isotropic_orbit(5, 5).nodes.size(), 75735u);
}

TEST(Orbit, CircuitsReachTheirSubspace) {
  const auto& orbit = isotropic_orbit(3, 2);
  for (std::size_t i = 0; i < orbit.nodes.size(); i += 7) {
    const auto t = CliffordTableau::from_circuit(orbit_circuit(orbit, i));
    std::vector<PauliLabel> imgs;
    for (int q = 1; q < 3; ++q) imgs.push_back(t.conjugate(PhasedPauli(PauliLabel::z_on(3, q), 0)).label);
    EXPECT_EQ(rref_basis(imgs, 3).rows, orbit.nodes[i].basis_rows);
  }
}
