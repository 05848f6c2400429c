#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stabdecomp/gf2.hpp"

namespace stabdecomp {

using cplx = std::complex<double>;

// i^phase * W_label, with W_x = i^{a.b} X^a Z^b.
struct PhasedPauli {
  PauliLabel label;
  int phase = 0;

  PhasedPauli() = default;
  PhasedPauli(PauliLabel x, int ph) : label(x), phase(((ph % 4) + 4) % 4) {}

  bool is_hermitian() const { return phase % 2 == 0; }
  // +1 or -1; only meaningful for Hermitian operators.
  int sign() const { return phase == 2 ? -1 : 1; }

  friend bool operator==(const PhasedPauli&, const PhasedPauli&) = default;
};

// Exact operator product P*Q; throws std::invalid_argument on size mismatch.
PhasedPauli pauli_product(const PhasedPauli& p, const PhasedPauli& q);

enum class GateKind { H, S, CNOT, X, Z };

struct Gate {
  GateKind kind = GateKind::H;
  int q0 = 0;
  int q1 = -1;  // target for CNOT

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct CliffordCircuit {
  int n = 0;
  std::vector<Gate> gates;

  std::size_t size() const { return gates.size(); }
  bool empty() const { return gates.empty(); }
  friend bool operator==(const CliffordCircuit&, const CliffordCircuit&) = default;
};

// Throws std::out_of_range if a gate touches a qubit outside [0, n).
void validate(const CliffordCircuit& c);
CliffordCircuit inverse(const CliffordCircuit& c);

PhasedPauli conjugate(const Gate& g, const PhasedPauli& p);

// Images of X_q and Z_q under U P U^dagger.
class CliffordTableau {
 public:
  CliffordTableau() = default;
  explicit CliffordTableau(int n);

  static CliffordTableau identity(int n) { return CliffordTableau(n); }
  static CliffordTableau from_circuit(const CliffordCircuit& c);

  int num_qubits() const { return n_; }
  const PhasedPauli& x_image(int q) const { return x_.at(q); }
  const PhasedPauli& z_image(int q) const { return z_.at(q); }
  void set_images(int q, const PhasedPauli& x_img, const PhasedPauli& z_img);

  // Replaces U by G U.
  void apply(const Gate& g);
  void apply(const CliffordCircuit& c);

  PhasedPauli conjugate(const PhasedPauli& p) const;
  CliffordTableau inverse() const;
  // Hermitian images with the symplectic commutation pattern.
  bool is_valid() const;

  friend bool operator==(const CliffordTableau&, const CliffordTableau&) = default;

 private:
  int n_ = 0;
  std::vector<PhasedPauli> x_;
  std::vector<PhasedPauli> z_;
};

PhasedPauli conjugate(const CliffordTableau& t, const PhasedPauli& p);

// Maps span(B) onto <Z_{n-d}, ..., Z_{n-1}> (0-based qubits) as unsigned groups.
CliffordTableau clifford_from_isotropic(const Gf2Basis& basis);
// U P U^dagger = +X_0 and U P' U^dagger = +Z_0.
CliffordTableau clifford_from_anticommuting_pair(const PhasedPauli& p, const PhasedPauli& p2);

struct Canonicalization {
  CliffordTableau u;
  int k = 0;  // symplectic pairs, placed on qubits 0..k-1
  int m = 0;  // center dimension, placed on qubits k..k+m-1 as Z
};

Canonicalization canonicalize_subgroup(const std::vector<PauliLabel>& generators, int n);

// Gate list whose tableau equals t exactly, signs included.
CliffordCircuit synthesize_circuit(const CliffordTableau& t);

struct StabilizerState {
  int n = 0;
  std::vector<PhasedPauli> generators;

  friend bool operator==(const StabilizerState&, const StabilizerState&) = default;
};

// Throws std::invalid_argument unless the generators are n Hermitian, commuting,
// independent Paulis that do not contain -I.
void validate(const StabilizerState& s);
// Generators rewritten in reduced row-echelon order of their labels.
StabilizerState canonical_form(const StabilizerState& s);
StabilizerState zero_state(int n);
// The state U|z> described by its signed generators.
StabilizerState stabilizer_from_clifford(const CliffordTableau& u, std::uint64_t z);

inline constexpr int kMaxDenseStabilizerQubits = 20;

// Maps |0^n> to the state with the first nonzero amplitude real positive.
CliffordCircuit stab_state_prep(const StabilizerState& s);
std::vector<cplx> stabilizer_vector(const StabilizerState& s);
cplx stabilizer_inner_product(const StabilizerState& a, const StabilizerState& b);

inline constexpr int kMaxEnumerationQubits = 4;
// All stabilizer states, ordered by Lagrangian (canonical basis) then sign pattern.
std::vector<StabilizerState> enumerate_stabilizer_states(int n);

// Dense kernels on a 2^n amplitude table, qubit q on bit q of the index.
void apply_gate(std::vector<cplx>& amps, const Gate& g, bool dagger = false);
void apply_gates(std::vector<cplx>& amps, const CliffordCircuit& c);

// Orbit of the reference isotropic subspace <Z_{n-d}, ..., Z_{n-1}> under the
// Clifford group, explored breadth first. Node i carries the Clifford
// G_i = gate * G_parent, and its subspace is G_i L0 G_i^dagger.
struct OrbitNode {
  int parent = -1;
  Gate gate;
  std::vector<std::uint64_t> basis_rows;
};

struct IsotropicOrbit {
  int n = 0;
  int dim = 0;
  std::vector<OrbitNode> nodes;
};

inline constexpr int kMaxOrbitQubits = 5;
// Cached; safe to call from several threads.
const IsotropicOrbit& isotropic_orbit(int n, int dim);
// Circuit implementing G_i.
CliffordCircuit orbit_circuit(const IsotropicOrbit& orbit, std::size_t node);

std::string to_string(const PhasedPauli& p);
PhasedPauli parse_phased_pauli(std::string_view text);
std::string gate_name(GateKind k);
GateKind parse_gate_kind(std::string_view name);
std::vector<std::string> to_strings(const StabilizerState& s);
StabilizerState parse_stabilizer_state(const std::vector<std::string>& gens);

}  // namespace stabdecomp
