#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stabdecomp {

// Labels pack one bit per qubit into a machine word, so n is capped at 32
// (a label then fits a single 64-bit vector over F2^{2n}).
inline constexpr int kMaxQubits = 32;

// A point x = (a, b) of F2^{2n}. Bit q of xpart/zpart belongs to qubit q.
struct PauliLabel {
  int n = 0;
  std::uint64_t xpart = 0;
  std::uint64_t zpart = 0;

  PauliLabel() = default;
  PauliLabel(int n_qubits, std::uint64_t a, std::uint64_t b);

  static PauliLabel identity(int n) { return PauliLabel(n, 0, 0); }
  static PauliLabel x_on(int n, int q);
  static PauliLabel z_on(int n, int q);
  static PauliLabel y_on(int n, int q);

  bool is_identity() const { return xpart == 0 && zpart == 0; }
  int weight() const;

  friend bool operator==(const PauliLabel&, const PauliLabel&) = default;
};

// Componentwise sum in F2^{2n}; throws std::invalid_argument on size mismatch.
PauliLabel operator+(const PauliLabel& x, const PauliLabel& y);
bool operator<(const PauliLabel& x, const PauliLabel& y);

// [x,y] = <a_x,b_y> + <b_x,a_y> mod 2. Throws std::invalid_argument on size mismatch.
int symplectic_product(const PauliLabel& x, const PauliLabel& y);

inline int parity(std::uint64_t v) { return __builtin_parityll(v); }
std::uint64_t low_mask(int bits);

// Packs a label into a 2n-bit vector laid out as a||b with a_1 as the most
// significant (leftmost) bit. unpack is the inverse.
std::uint64_t pack(const PauliLabel& x);
PauliLabel unpack(std::uint64_t v, int n);

// Canonical reduced row-echelon basis of a subspace of F2^width. Rows are
// sorted by pivot, leftmost pivot first; pivots are column indices counted
// from the left.
struct Gf2Basis {
  int width = 0;
  std::vector<std::uint64_t> rows;
  std::vector<int> pivots;

  int rank() const { return static_cast<int>(rows.size()); }
  friend bool operator==(const Gf2Basis&, const Gf2Basis&) = default;
};

Gf2Basis rref_basis(std::span<const std::uint64_t> vectors, int width);
Gf2Basis rref_basis(const std::vector<PauliLabel>& labels, int n);
bool basis_contains(const Gf2Basis& basis, std::uint64_t v);
bool basis_contains(const Gf2Basis& basis, const PauliLabel& x);
// Reduces v against the basis; zero iff v lies in the span.
std::uint64_t reduce(const Gf2Basis& basis, std::uint64_t v);
std::vector<PauliLabel> basis_labels(const Gf2Basis& basis);
// All 2^rank elements of the span in Gray-code order; rank must be <= 26.
std::vector<std::uint64_t> span_elements(const Gf2Basis& basis);

struct SgsDecomposition {
  std::vector<PauliLabel> center;
  std::vector<std::pair<PauliLabel, PauliLabel>> pairs;
};

SgsDecomposition symplectic_gram_schmidt(std::vector<PauliLabel> generators);

bool is_isotropic(const Gf2Basis& basis);
bool is_lagrangian(const Gf2Basis& basis, int n);

struct MubCovering {
  int k = 0;
  std::vector<Gf2Basis> groups;

  friend bool operator==(const MubCovering&, const MubCovering&) = default;
};

inline constexpr int kMaxMubQubits = 8;

// Partition of F2^{2k} \ {0} into 2^k + 1 Lagrangians, built from the trace
// form of GF(2^k). The Z-type group comes first.
MubCovering mub_covering(int k);
// Backtracking search for the same structure; only practical for k <= 3.
MubCovering mub_covering_exhaustive(int k);

// Text form: an optional '+' followed by one of I, X, Y, Z per qubit.
std::string to_string(const PauliLabel& x);
PauliLabel parse_label(std::string_view text);

}  // namespace stabdecomp
