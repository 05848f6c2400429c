#include "stabdecomp/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>

namespace stabdecomp {

namespace {

std::uint64_t bit(int q) { return std::uint64_t{1} << q; }

PauliLabel raw_label(int n, std::uint64_t a, std::uint64_t b) {
  PauliLabel x;
  x.n = n;
  x.xpart = a;
  x.zpart = b;
  return x;
}

PhasedPauli raw(int n, std::uint64_t a, std::uint64_t b, int phase) {
  return PhasedPauli(raw_label(n, a, b), phase);
}

bool has_x(const PhasedPauli& p, int q) { return (p.label.xpart >> q) & 1; }
bool has_z(const PhasedPauli& p, int q) { return (p.label.zpart >> q) & 1; }

// Images of X_q and Z_q under a single gate.
std::pair<PhasedPauli, PhasedPauli> gate_images(const Gate& g, int n, int q) {
  const PhasedPauli xq = raw(n, bit(q), 0, 0);
  const PhasedPauli zq = raw(n, 0, bit(q), 0);
  switch (g.kind) {
    case GateKind::H:
      if (q == g.q0) return {zq, xq};
      break;
    case GateKind::S:
      if (q == g.q0) return {raw(n, bit(q), bit(q), 0), zq};
      break;
    case GateKind::X:
      if (q == g.q0) return {xq, raw(n, 0, bit(q), 2)};
      break;
    case GateKind::Z:
      if (q == g.q0) return {raw(n, bit(q), 0, 2), zq};
      break;
    case GateKind::CNOT:
      if (q == g.q0) return {raw(n, bit(g.q0) | bit(g.q1), 0, 0), zq};
      if (q == g.q1) return {xq, raw(n, 0, bit(g.q0) | bit(g.q1), 0)};
      break;
  }
  return {xq, zq};
}

void check_gate(const Gate& g, int n) {
  const bool two = g.kind == GateKind::CNOT;
  if (g.q0 < 0 || g.q0 >= n || (two && (g.q1 < 0 || g.q1 >= n || g.q1 == g.q0))) {
    throw std::out_of_range("gate qubit index out of range");
  }
}

// Applies gates to a working set of Paulis while recording them.
struct Reducer {
  int n = 0;
  std::vector<PhasedPauli> tracked;
  std::vector<Gate> gates;

  void apply(const Gate& g) {
    for (auto& p : tracked) p = conjugate(g, p);
    gates.push_back(g);
  }
  void h(int q) { apply({GateKind::H, q, -1}); }
  void s(int q) { apply({GateKind::S, q, -1}); }
  void cx(int c, int t) { apply({GateKind::CNOT, c, t}); }
};

// Brings tracked[ip] to +X_j and tracked[iq] to +Z_j using qubits >= j only.
// Both must anticommute and have no support below j.
void reduce_pair(Reducer& r, int ip, int iq, int j) {
  const int n = r.n;
  const std::uint64_t hi = low_mask(n) & ~low_mask(j);
  const auto& p = r.tracked[ip];
  const auto& q = r.tracked[iq];

  if ((p.label.xpart & hi) == 0) r.h(std::countr_zero(p.label.zpart & hi));
  if (!has_x(p, j)) r.cx(std::countr_zero(p.label.xpart & hi), j);
  for (int k = j + 1; k < n; ++k) {
    if (has_x(p, k)) r.cx(j, k);
  }
  for (int k = j + 1; k < n; ++k) {
    if (has_z(p, k)) {
      r.h(k);
      r.cx(j, k);
    }
  }
  if (has_z(p, j)) r.s(j);

  if (has_x(q, j)) {
    r.h(j);
    r.s(j);
    r.h(j);
  }
  for (int k = j + 1; k < n; ++k) {
    if (has_x(q, k)) {
      if (has_z(q, k)) r.s(k);
      r.h(k);
    }
  }
  for (int k = j + 1; k < n; ++k) {
    if (has_z(q, k)) r.cx(k, j);
  }
  if (p.phase == 2) r.apply({GateKind::Z, j, -1});
  if (q.phase == 2) r.apply({GateKind::X, j, -1});
}

// Brings tracked[idx[i]] to +-Z_{targets[i]}, multiplying generators together
// where needed. Only qubits >= lo are touched.
void reduce_to_z(Reducer& r, const std::vector<int>& idx, const std::vector<int>& targets, int lo) {
  const int n = r.n;
  std::uint64_t free = low_mask(n) & ~low_mask(lo);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    auto& g = r.tracked[idx[i]];
    for (std::size_t k = 0; k < i; ++k) {
      if (has_z(g, targets[k])) g = pauli_product(g, r.tracked[idx[k]]);
    }
    const std::uint64_t support = g.label.xpart | g.label.zpart;
    if (support & ~free) throw std::invalid_argument("generators do not commute");
    if (support == 0) throw std::invalid_argument("generators are not independent");
    for (std::uint64_t m = support; m; m &= m - 1) {
      const int k = std::countr_zero(m);
      if (has_x(g, k)) {
        if (has_z(g, k)) r.s(k);
        r.h(k);
      }
    }
    const int t = targets[i];
    const int pivot = (support >> t) & 1 ? t : std::countr_zero(support);
    for (std::uint64_t m = support & ~bit(pivot); m; m &= m - 1) {
      r.cx(std::countr_zero(m), pivot);
    }
    if (pivot != t) {
      r.cx(pivot, t);
      r.cx(t, pivot);
      r.cx(pivot, t);
    }
    free &= ~bit(t);
  }
}

std::vector<Gate> invert_gates(const std::vector<Gate>& gates) {
  std::vector<Gate> out;
  out.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    out.push_back(*it);
    if (it->kind == GateKind::S) out.push_back({GateKind::Z, it->q0, -1});
  }
  return out;
}

int pivot_column(std::uint64_t v, int width) { return width - 1 - (63 - std::countl_zero(v)); }

}  // namespace

PhasedPauli pauli_product(const PhasedPauli& p, const PhasedPauli& q) {
  if (p.label.n != q.label.n) throw std::invalid_argument("pauli_product: size mismatch");
  const auto a = p.label.xpart, b = p.label.zpart;
  const auto a2 = q.label.xpart, b2 = q.label.zpart;
  const int phase = p.phase + q.phase + std::popcount(a & b) + std::popcount(a2 & b2) +
                    2 * std::popcount(b & a2) - std::popcount((a ^ a2) & (b ^ b2));
  return raw(p.label.n, a ^ a2, b ^ b2, phase);
}

void validate(const CliffordCircuit& c) {
  for (const auto& g : c.gates) check_gate(g, c.n);
}

CliffordCircuit inverse(const CliffordCircuit& c) { return {c.n, invert_gates(c.gates)}; }

PhasedPauli conjugate(const Gate& g, const PhasedPauli& p) {
  const int n = p.label.n;
  check_gate(g, n);
  std::uint64_t mask = bit(g.q0);
  if (g.kind == GateKind::CNOT) mask |= bit(g.q1);
  const auto a = p.label.xpart, b = p.label.zpart;
  PhasedPauli acc = raw(n, 0, 0, p.phase + std::popcount(a & b & mask));
  const int qs[2] = {g.q0, g.kind == GateKind::CNOT ? g.q1 : -1};
  for (int q : qs) {
    if (q >= 0 && ((a >> q) & 1)) acc = pauli_product(acc, gate_images(g, n, q).first);
  }
  for (int q : qs) {
    if (q >= 0 && ((b >> q) & 1)) acc = pauli_product(acc, gate_images(g, n, q).second);
  }
  return pauli_product(acc, raw(n, a & ~mask, b & ~mask, 0));
}

CliffordTableau::CliffordTableau(int n) : n_(n) {
  if (n < 0 || n > kMaxQubits) throw std::invalid_argument("tableau size out of range");
  for (int q = 0; q < n; ++q) {
    x_.push_back(raw(n, bit(q), 0, 0));
    z_.push_back(raw(n, 0, bit(q), 0));
  }
}

CliffordTableau CliffordTableau::from_circuit(const CliffordCircuit& c) {
  CliffordTableau t(c.n);
  t.apply(c);
  return t;
}

void CliffordTableau::set_images(int q, const PhasedPauli& x_img, const PhasedPauli& z_img) {
  if (x_img.label.n != n_ || z_img.label.n != n_) {
    throw std::invalid_argument("set_images: size mismatch");
  }
  x_.at(q) = x_img;
  z_.at(q) = z_img;
}

void CliffordTableau::apply(const Gate& g) {
  for (auto& p : x_) p = stabdecomp::conjugate(g, p);
  for (auto& p : z_) p = stabdecomp::conjugate(g, p);
}

void CliffordTableau::apply(const CliffordCircuit& c) {
  if (c.n != n_) throw std::invalid_argument("circuit size mismatch");
  for (const auto& g : c.gates) apply(g);
}

PhasedPauli CliffordTableau::conjugate(const PhasedPauli& p) const {
  if (p.label.n != n_) throw std::invalid_argument("conjugate: size mismatch");
  const auto a = p.label.xpart, b = p.label.zpart;
  PhasedPauli acc = raw(n_, 0, 0, p.phase + std::popcount(a & b));
  for (std::uint64_t m = a; m; m &= m - 1) acc = pauli_product(acc, x_[std::countr_zero(m)]);
  for (std::uint64_t m = b; m; m &= m - 1) acc = pauli_product(acc, z_[std::countr_zero(m)]);
  return acc;
}

CliffordTableau CliffordTableau::inverse() const {
  return from_circuit(stabdecomp::inverse(synthesize_circuit(*this)));
}

bool CliffordTableau::is_valid() const {
  for (int i = 0; i < n_; ++i) {
    if (!x_[i].is_hermitian() || !z_[i].is_hermitian()) return false;
    for (int j = 0; j < n_; ++j) {
      if (symplectic_product(x_[i].label, x_[j].label) != 0) return false;
      if (symplectic_product(z_[i].label, z_[j].label) != 0) return false;
      if (symplectic_product(x_[i].label, z_[j].label) != (i == j ? 1 : 0)) return false;
    }
  }
  return true;
}

PhasedPauli conjugate(const CliffordTableau& t, const PhasedPauli& p) { return t.conjugate(p); }

CliffordTableau clifford_from_isotropic(const Gf2Basis& basis) {
  if (basis.width % 2 != 0) throw std::invalid_argument("basis width must be even");
  if (!is_isotropic(basis)) throw std::invalid_argument("clifford_from_isotropic: not isotropic");
  const int n = basis.width / 2;
  Reducer r{n, {}, {}};
  std::vector<int> idx, targets;
  const auto labels = basis_labels(basis);
  const int d = static_cast<int>(labels.size());
  for (int i = 0; i < d; ++i) {
    r.tracked.emplace_back(labels[i], 0);
    idx.push_back(i);
    targets.push_back(n - d + i);
  }
  reduce_to_z(r, idx, targets, 0);
  return CliffordTableau::from_circuit({n, r.gates});
}

CliffordTableau clifford_from_anticommuting_pair(const PhasedPauli& p, const PhasedPauli& p2) {
  if (p.label.n != p2.label.n) throw std::invalid_argument("pair size mismatch");
  if (!p.is_hermitian() || !p2.is_hermitian()) {
    throw std::invalid_argument("pair elements must be Hermitian");
  }
  if (symplectic_product(p.label, p2.label) != 1) {
    throw std::invalid_argument("clifford_from_anticommuting_pair: inputs commute");
  }
  Reducer r{p.label.n, {p, p2}, {}};
  reduce_pair(r, 0, 1, 0);
  return CliffordTableau::from_circuit({r.n, r.gates});
}

Canonicalization canonicalize_subgroup(const std::vector<PauliLabel>& generators, int n) {
  for (const auto& g : generators) {
    if (g.n != n) throw std::invalid_argument("canonicalize_subgroup: size mismatch");
  }
  const auto sgs = symplectic_gram_schmidt(generators);
  Reducer r{n, {}, {}};
  for (const auto& [g, h] : sgs.pairs) {
    r.tracked.emplace_back(g, 0);
    r.tracked.emplace_back(h, 0);
  }
  const int k = static_cast<int>(sgs.pairs.size());
  const int m = static_cast<int>(sgs.center.size());
  std::vector<int> idx, targets;
  for (int i = 0; i < m; ++i) {
    r.tracked.emplace_back(sgs.center[i], 0);
    idx.push_back(2 * k + i);
    targets.push_back(k + i);
  }
  for (int i = 0; i < k; ++i) reduce_pair(r, 2 * i, 2 * i + 1, i);
  reduce_to_z(r, idx, targets, k);
  return {CliffordTableau::from_circuit({n, r.gates}), k, m};
}

CliffordCircuit synthesize_circuit(const CliffordTableau& t) {
  if (!t.is_valid()) throw std::invalid_argument("synthesize_circuit: invalid tableau");
  const int n = t.num_qubits();
  Reducer r{n, {}, {}};
  for (int q = 0; q < n; ++q) {
    r.tracked.push_back(t.x_image(q));
    r.tracked.push_back(t.z_image(q));
  }
  for (int q = 0; q < n; ++q) reduce_pair(r, 2 * q, 2 * q + 1, q);
  return {n, invert_gates(r.gates)};
}

void validate(const StabilizerState& s) {
  if (static_cast<int>(s.generators.size()) != s.n) {
    throw std::invalid_argument("stabilizer state needs exactly n generators");
  }
  std::vector<PauliLabel> labels;
  for (const auto& g : s.generators) {
    if (g.label.n != s.n) throw std::invalid_argument("generator size mismatch");
    if (!g.is_hermitian()) throw std::invalid_argument("generator is not Hermitian");
    labels.push_back(g.label);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (symplectic_product(labels[i], labels[j])) {
        throw std::invalid_argument("generators do not commute");
      }
    }
  }
  if (rref_basis(labels, s.n).rank() != s.n) {
    throw std::invalid_argument("generators are not independent");
  }
}

StabilizerState canonical_form(const StabilizerState& s) {
  validate(s);
  const int width = 2 * s.n;
  std::vector<std::pair<int, PhasedPauli>> rows;
  for (const auto& g : s.generators) {
    PhasedPauli v = g;
    for (const auto& [col, row] : rows) {
      if ((pack(v.label) >> (width - 1 - col)) & 1) v = pauli_product(v, row);
    }
    const std::uint64_t pv = pack(v.label);
    const int col = pivot_column(pv, width);
    for (auto& [c, row] : rows) {
      if ((pack(row.label) >> (width - 1 - col)) & 1) row = pauli_product(row, v);
    }
    rows.emplace_back(col, v);
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  StabilizerState out{s.n, {}};
  for (const auto& [c, row] : rows) out.generators.push_back(row);
  return out;
}

StabilizerState zero_state(int n) {
  StabilizerState s{n, {}};
  for (int q = 0; q < n; ++q) s.generators.push_back(raw(n, 0, bit(q), 0));
  return s;
}

StabilizerState stabilizer_from_clifford(const CliffordTableau& u, std::uint64_t z) {
  const int n = u.num_qubits();
  StabilizerState s{n, {}};
  for (int q = 0; q < n; ++q) {
    s.generators.push_back(u.conjugate(raw(n, 0, bit(q), ((z >> q) & 1) ? 2 : 0)));
  }
  return s;
}

CliffordCircuit stab_state_prep(const StabilizerState& s) {
  validate(s);
  const int n = s.n;
  if (n > kMaxDenseStabilizerQubits) {
    throw std::invalid_argument("stab_state_prep: too many qubits for the phase convention");
  }
  Reducer r{n, s.generators, {}};
  std::vector<int> idx, targets;
  for (int q = 0; q < n; ++q) {
    idx.push_back(q);
    targets.push_back(q);
  }
  reduce_to_z(r, idx, targets, 0);

  CliffordCircuit c{n, {}};
  for (int q = 0; q < n; ++q) {
    if (r.tracked[q].phase == 2) c.gates.push_back({GateKind::X, q, -1});
  }
  for (const auto& g : invert_gates(r.gates)) c.gates.push_back(g);
  if (n == 0) return c;

  std::vector<cplx> amps(std::size_t{1} << n);
  amps[0] = 1.0;
  apply_gates(amps, c);
  const auto first = std::find_if(amps.begin(), amps.end(),
                                  [](const cplx& v) { return std::abs(v) > 1e-9; });
  const double angle = std::arg(*first);
  const int k = static_cast<int>(std::lround(angle / (std::numbers::pi / 4)));
  const int eighths = ((-k) % 8 + 8) % 8;
  // X S X S multiplies the state by i, and (S H)^3 by e^{i pi/4}.
  for (int i = 0; i < eighths / 2; ++i) {
    for (auto kind : {GateKind::X, GateKind::S, GateKind::X, GateKind::S}) {
      c.gates.push_back({kind, 0, -1});
    }
  }
  if (eighths % 2) {
    for (int i = 0; i < 3; ++i) {
      c.gates.push_back({GateKind::H, 0, -1});
      c.gates.push_back({GateKind::S, 0, -1});
    }
  }
  return c;
}

std::vector<cplx> stabilizer_vector(const StabilizerState& s) {
  const auto c = stab_state_prep(s);
  std::vector<cplx> amps(std::size_t{1} << s.n);
  amps[0] = 1.0;
  apply_gates(amps, c);
  return amps;
}

cplx stabilizer_inner_product(const StabilizerState& a, const StabilizerState& b) {
  if (a.n != b.n) throw std::invalid_argument("stabilizer_inner_product: size mismatch");
  const auto va = stabilizer_vector(a);
  const auto vb = stabilizer_vector(b);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) acc += std::conj(va[i]) * vb[i];
  return acc;
}

std::vector<StabilizerState> enumerate_stabilizer_states(int n) {
  if (n < 1 || n > kMaxEnumerationQubits) {
    throw std::invalid_argument("enumerate_stabilizer_states: n out of range");
  }
  const auto& orbit = isotropic_orbit(n, n);
  std::vector<const std::vector<std::uint64_t>*> bases;
  for (const auto& node : orbit.nodes) bases.push_back(&node.basis_rows);
  std::sort(bases.begin(), bases.end(), [](auto* x, auto* y) { return *x < *y; });
  std::vector<StabilizerState> out;
  out.reserve(bases.size() << n);
  for (const auto* rows : bases) {
    for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << n); ++signs) {
      StabilizerState s{n, {}};
      for (int i = 0; i < n; ++i) {
        s.generators.emplace_back(unpack((*rows)[i], n), ((signs >> i) & 1) ? 2 : 0);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

void apply_gate(std::vector<cplx>& amps, const Gate& g, bool dagger) {
  const std::size_t dim = amps.size();
  const std::size_t m0 = std::size_t{1} << g.q0;
  switch (g.kind) {
    case GateKind::H: {
      const double r = std::numbers::sqrt2 / 2;
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & m0) continue;
        const cplx a = amps[i], b = amps[i | m0];
        amps[i] = r * (a + b);
        amps[i | m0] = r * (a - b);
      }
      break;
    }
    case GateKind::S: {
      const cplx ph = dagger ? cplx(0, -1) : cplx(0, 1);
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & m0) amps[i] *= ph;
      }
      break;
    }
    case GateKind::X:
      for (std::size_t i = 0; i < dim; ++i) {
        if (!(i & m0)) std::swap(amps[i], amps[i | m0]);
      }
      break;
    case GateKind::Z:
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & m0) amps[i] = -amps[i];
      }
      break;
    case GateKind::CNOT: {
      const std::size_t m1 = std::size_t{1} << g.q1;
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & m0) && !(i & m1)) std::swap(amps[i], amps[i | m1]);
      }
      break;
    }
  }
}

void apply_gates(std::vector<cplx>& amps, const CliffordCircuit& c) {
  validate(c);
  if (amps.size() != (std::size_t{1} << c.n)) {
    throw std::invalid_argument("apply_gates: amplitude table size mismatch");
  }
  for (const auto& g : c.gates) apply_gate(amps, g);
}

const IsotropicOrbit& isotropic_orbit(int n, int dim) {
  if (n < 1 || n > kMaxOrbitQubits || dim < 0 || dim > n) {
    throw std::invalid_argument("isotropic_orbit: size out of range");
  }
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<IsotropicOrbit>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, dim}];
  if (slot) return *slot;

  auto orbit = std::make_unique<IsotropicOrbit>();
  orbit->n = n;
  orbit->dim = dim;
  std::vector<PauliLabel> ref;
  for (int q = n - dim; q < n; ++q) ref.push_back(PauliLabel::z_on(n, q));
  std::set<std::vector<std::uint64_t>> seen;
  OrbitNode root;
  root.basis_rows = rref_basis(ref, n).rows;
  seen.insert(root.basis_rows);
  orbit->nodes.push_back(root);

  std::vector<Gate> moves;
  for (int q = 0; q < n; ++q) {
    moves.push_back({GateKind::H, q, -1});
    moves.push_back({GateKind::S, q, -1});
  }
  for (int c = 0; c < n; ++c) {
    for (int t = 0; t < n; ++t) {
      if (c != t) moves.push_back({GateKind::CNOT, c, t});
    }
  }
  for (std::size_t i = 0; i < orbit->nodes.size(); ++i) {
    std::vector<PauliLabel> labels;
    for (auto v : orbit->nodes[i].basis_rows) labels.push_back(unpack(v, n));
    for (const auto& g : moves) {
      std::vector<PauliLabel> moved;
      for (const auto& x : labels) moved.push_back(conjugate(g, PhasedPauli(x, 0)).label);
      auto rows = rref_basis(moved, n).rows;
      if (seen.insert(rows).second) {
        orbit->nodes.push_back({static_cast<int>(i), g, std::move(rows)});
      }
    }
  }
  slot = std::move(orbit);
  return *slot;
}

CliffordCircuit orbit_circuit(const IsotropicOrbit& orbit, std::size_t node) {
  std::vector<Gate> path;
  for (int i = static_cast<int>(node); orbit.nodes.at(i).parent >= 0; i = orbit.nodes[i].parent) {
    path.push_back(orbit.nodes[i].gate);
  }
  std::reverse(path.begin(), path.end());
  return {orbit.n, path};
}

std::string to_string(const PhasedPauli& p) {
  static const char* prefix[4] = {"+", "+i", "-", "-i"};
  return prefix[p.phase] + to_string(p.label).substr(1);
}

PhasedPauli parse_phased_pauli(std::string_view text) {
  int phase = 0;
  if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
    if (text.front() == '-') phase = 2;
    text.remove_prefix(1);
  }
  if (!text.empty() && text.front() == 'i') {
    phase += 1;
    text.remove_prefix(1);
  }
  return PhasedPauli(parse_label(text), phase);
}

std::string gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::CNOT: return "CNOT";
    case GateKind::X: return "X";
    case GateKind::Z: return "Z";
  }
  return "?";
}

GateKind parse_gate_kind(std::string_view name) {
  if (name == "H") return GateKind::H;
  if (name == "S") return GateKind::S;
  if (name == "CNOT") return GateKind::CNOT;
  if (name == "X") return GateKind::X;
  if (name == "Z") return GateKind::Z;
  throw std::invalid_argument("unknown gate '" + std::string(name) + "'");
}

std::vector<std::string> to_strings(const StabilizerState& s) {
  std::vector<std::string> out;
  for (const auto& g : s.generators) out.push_back(to_string(g));
  return out;
}

StabilizerState parse_stabilizer_state(const std::vector<std::string>& gens) {
  StabilizerState s{static_cast<int>(gens.size()), {}};
  for (const auto& g : gens) s.generators.push_back(parse_phased_pauli(g));
  validate(s);
  return s;
}

}  // namespace stabdecomp
