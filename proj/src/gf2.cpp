#include "stabdecomp/gf2.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <set>
#include <stdexcept>

namespace stabdecomp {

namespace {

void check_qubits(int n) {
  if (n < 0 || n > kMaxQubits) {
    throw std::invalid_argument("qubit count out of range: " + std::to_string(n));
  }
}

void check_same_size(const PauliLabel& x, const PauliLabel& y) {
  if (x.n != y.n) {
    throw std::invalid_argument("label length mismatch: " + std::to_string(x.n) + " vs " +
                                std::to_string(y.n));
  }
}

int top_bit(std::uint64_t v) { return 63 - std::countl_zero(v); }

}  // namespace

std::uint64_t low_mask(int bits) {
  return bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
}

PauliLabel::PauliLabel(int n_qubits, std::uint64_t a, std::uint64_t b)
    : n(n_qubits), xpart(a), zpart(b) {
  check_qubits(n_qubits);
  if ((a | b) & ~low_mask(n_qubits)) {
    throw std::invalid_argument("label bits set beyond qubit count");
  }
}

PauliLabel PauliLabel::x_on(int n, int q) { return PauliLabel(n, std::uint64_t{1} << q, 0); }
PauliLabel PauliLabel::z_on(int n, int q) { return PauliLabel(n, 0, std::uint64_t{1} << q); }
PauliLabel PauliLabel::y_on(int n, int q) {
  return PauliLabel(n, std::uint64_t{1} << q, std::uint64_t{1} << q);
}

int PauliLabel::weight() const { return std::popcount(xpart | zpart); }

PauliLabel operator+(const PauliLabel& x, const PauliLabel& y) {
  check_same_size(x, y);
  PauliLabel out;
  out.n = x.n;
  out.xpart = x.xpart ^ y.xpart;
  out.zpart = x.zpart ^ y.zpart;
  return out;
}

bool operator<(const PauliLabel& x, const PauliLabel& y) {
  if (x.n != y.n) return x.n < y.n;
  return pack(x) < pack(y);
}

int symplectic_product(const PauliLabel& x, const PauliLabel& y) {
  check_same_size(x, y);
  return parity((x.xpart & y.zpart) ^ (x.zpart & y.xpart));
}

std::uint64_t pack(const PauliLabel& x) {
  std::uint64_t out = 0;
  for (int q = 0; q < x.n; ++q) {
    if ((x.xpart >> q) & 1) out |= std::uint64_t{1} << (2 * x.n - 1 - q);
    if ((x.zpart >> q) & 1) out |= std::uint64_t{1} << (x.n - 1 - q);
  }
  return out;
}

PauliLabel unpack(std::uint64_t v, int n) {
  check_qubits(n);
  PauliLabel out;
  out.n = n;
  for (int q = 0; q < n; ++q) {
    if ((v >> (2 * n - 1 - q)) & 1) out.xpart |= std::uint64_t{1} << q;
    if ((v >> (n - 1 - q)) & 1) out.zpart |= std::uint64_t{1} << q;
  }
  return out;
}

std::uint64_t reduce(const Gf2Basis& basis, std::uint64_t v) {
  for (std::size_t i = 0; i < basis.rows.size(); ++i) {
    const int bit = basis.width - 1 - basis.pivots[i];
    if ((v >> bit) & 1) v ^= basis.rows[i];
  }
  return v;
}

Gf2Basis rref_basis(std::span<const std::uint64_t> vectors, int width) {
  if (width < 0 || width > 64) throw std::invalid_argument("vector width out of range");
  Gf2Basis basis;
  basis.width = width;
  const std::uint64_t mask = low_mask(width);
  for (std::uint64_t v : vectors) {
    v = reduce(basis, v & mask);
    if (v == 0) continue;
    const int bit = top_bit(v);
    for (auto& row : basis.rows) {
      if ((row >> bit) & 1) row ^= v;
    }
    const int pivot = width - 1 - bit;
    auto pos = std::lower_bound(basis.pivots.begin(), basis.pivots.end(), pivot);
    const auto idx = pos - basis.pivots.begin();
    basis.pivots.insert(pos, pivot);
    basis.rows.insert(basis.rows.begin() + idx, v);
  }
  return basis;
}

Gf2Basis rref_basis(const std::vector<PauliLabel>& labels, int n) {
  check_qubits(n);
  std::vector<std::uint64_t> packed;
  packed.reserve(labels.size());
  for (const auto& x : labels) {
    if (x.n != n) throw std::invalid_argument("label length mismatch in rref_basis");
    packed.push_back(pack(x));
  }
  return rref_basis(packed, 2 * n);
}

bool basis_contains(const Gf2Basis& basis, std::uint64_t v) {
  if (v & ~low_mask(basis.width)) return false;
  return reduce(basis, v) == 0;
}

bool basis_contains(const Gf2Basis& basis, const PauliLabel& x) {
  if (2 * x.n != basis.width) throw std::invalid_argument("label length mismatch in basis_contains");
  return basis_contains(basis, pack(x));
}

std::vector<PauliLabel> basis_labels(const Gf2Basis& basis) {
  if (basis.width % 2 != 0) throw std::invalid_argument("basis width is not 2n");
  std::vector<PauliLabel> out;
  out.reserve(basis.rows.size());
  for (auto row : basis.rows) out.push_back(unpack(row, basis.width / 2));
  return out;
}

std::vector<std::uint64_t> span_elements(const Gf2Basis& basis) {
  const int r = basis.rank();
  if (r > 26) throw std::invalid_argument("span too large to enumerate");
  std::vector<std::uint64_t> out(std::size_t{1} << r);
  std::uint64_t acc = 0;
  out[0] = 0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    acc ^= basis.rows[std::countr_zero(i)];
    out[i] = acc;
  }
  return out;
}

SgsDecomposition symplectic_gram_schmidt(std::vector<PauliLabel> generators) {
  SgsDecomposition out;
  std::deque<PauliLabel> pool(generators.begin(), generators.end());
  int n = -1;
  for (const auto& g : pool) {
    if (n < 0) n = g.n;
    if (g.n != n) throw std::invalid_argument("label length mismatch in symplectic_gram_schmidt");
  }
  std::vector<PauliLabel> center;
  while (!pool.empty()) {
    PauliLabel g = pool.front();
    pool.pop_front();
    if (g.is_identity()) continue;
    auto it = std::find_if(pool.begin(), pool.end(),
                           [&](const PauliLabel& h) { return symplectic_product(g, h) == 1; });
    if (it == pool.end()) {
      center.push_back(g);
      continue;
    }
    PauliLabel h = *it;
    pool.erase(it);
    for (auto& x : pool) {
      const int a = symplectic_product(x, h);
      const int b = symplectic_product(x, g);
      if (a) x = x + g;
      if (b) x = x + h;
    }
    out.pairs.emplace_back(g, h);
  }
  // Redundant generators can leave dependent center elements behind.
  if (!center.empty()) {
    out.center = basis_labels(rref_basis(center, n));
  }
  return out;
}

bool is_isotropic(const Gf2Basis& basis) {
  if (basis.width % 2 != 0) return false;
  const auto labels = basis_labels(basis);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (symplectic_product(labels[i], labels[j])) return false;
    }
  }
  return true;
}

bool is_lagrangian(const Gf2Basis& basis, int n) {
  return basis.width == 2 * n && basis.rank() == n && is_isotropic(basis);
}

namespace {

// Primitive polynomials for GF(2^k), k = 1..8 (bit i is the x^i coefficient).
constexpr std::uint32_t kFieldModulus[kMaxMubQubits + 1] = {
    0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10000011, 0b100011101};

std::uint32_t gf_mul(std::uint32_t a, std::uint32_t b, int k) {
  std::uint32_t prod = 0;
  for (int i = 0; i < k; ++i) {
    if ((b >> i) & 1) prod ^= a << i;
  }
  for (int bit = 2 * k - 2; bit >= k; --bit) {
    if ((prod >> bit) & 1) prod ^= kFieldModulus[k] << (bit - k);
  }
  return prod;
}

int gf_trace(std::uint32_t y, int k) {
  std::uint32_t acc = 0;
  std::uint32_t term = y;
  for (int i = 0; i < k; ++i) {
    acc ^= term;
    term = gf_mul(term, term, k);
  }
  return static_cast<int>(acc & 1);
}

}  // namespace

MubCovering mub_covering(int k) {
  if (k < 1 || k > kMaxMubQubits) {
    throw std::invalid_argument("mub_covering: k out of range: " + std::to_string(k));
  }
  MubCovering out;
  out.k = k;
  std::vector<PauliLabel> zgroup;
  for (int q = 0; q < k; ++q) zgroup.push_back(PauliLabel::z_on(k, q));
  out.groups.push_back(rref_basis(zgroup, k));
  for (std::uint32_t c = 0; c < (1u << k); ++c) {
    std::vector<PauliLabel> gens;
    for (int i = 0; i < k; ++i) {
      std::uint64_t column = 0;
      for (int j = 0; j < k; ++j) {
        const std::uint32_t e = gf_mul(gf_mul(c, 1u << i, k), 1u << j, k);
        if (gf_trace(e, k)) column |= std::uint64_t{1} << j;
      }
      gens.emplace_back(k, std::uint64_t{1} << i, column);
    }
    out.groups.push_back(rref_basis(gens, k));
  }
  return out;
}

MubCovering mub_covering_exhaustive(int k) {
  if (k < 1 || k > 3) throw std::invalid_argument("mub_covering_exhaustive: k out of range");
  const int width = 2 * k;
  const std::uint64_t count = std::uint64_t{1} << width;
  // Every Lagrangian, keyed by its canonical basis, with its element set as a bitmask.
  std::set<std::vector<std::uint64_t>> seen;
  std::vector<Gf2Basis> lagrangians;
  std::vector<std::uint64_t> masks;
  std::function<void(std::vector<std::uint64_t>&, std::uint64_t)> grow =
      [&](std::vector<std::uint64_t>& picked, std::uint64_t start) {
        if (static_cast<int>(picked.size()) == k) {
          auto b = rref_basis(picked, width);
          if (b.rank() != k || !is_isotropic(b) || !seen.insert(b.rows).second) return;
          std::uint64_t m = 0;
          for (auto e : span_elements(b)) m |= std::uint64_t{1} << e;
          lagrangians.push_back(b);
          masks.push_back(m & ~std::uint64_t{1});
          return;
        }
        for (std::uint64_t v = start; v < count; ++v) {
          bool ok = true;
          for (auto p : picked) {
            if (symplectic_product(unpack(p, k), unpack(v, k))) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          picked.push_back(v);
          grow(picked, v + 1);
          picked.pop_back();
        }
      };
  std::vector<std::uint64_t> picked;
  grow(picked, 1);

  const std::uint64_t full = (count == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << count) - 1)) &
                             ~std::uint64_t{1};
  std::vector<std::size_t> chosen;
  std::function<bool(std::uint64_t)> cover = [&](std::uint64_t covered) {
    if (covered == full) return true;
    const int next = std::countr_zero(~covered & full);
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (!((masks[i] >> next) & 1) || (masks[i] & covered)) continue;
      chosen.push_back(i);
      if (cover(covered | masks[i])) return true;
      chosen.pop_back();
    }
    return false;
  };
  if (!cover(0)) throw std::runtime_error("mub_covering_exhaustive: no partition found");
  MubCovering out;
  out.k = k;
  for (auto i : chosen) out.groups.push_back(lagrangians[i]);
  return out;
}

std::string to_string(const PauliLabel& x) {
  std::string s = "+";
  for (int q = 0; q < x.n; ++q) {
    const int a = (x.xpart >> q) & 1;
    const int b = (x.zpart >> q) & 1;
    s += a ? (b ? 'Y' : 'X') : (b ? 'Z' : 'I');
  }
  return s;
}

PauliLabel parse_label(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const int n = static_cast<int>(text.size());
  check_qubits(n);
  PauliLabel out(n, 0, 0);
  for (int q = 0; q < n; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    switch (text[q]) {
      case 'I': break;
      case 'X': out.xpart |= bit; break;
      case 'Y': out.xpart |= bit; out.zpart |= bit; break;
      case 'Z': out.zpart |= bit; break;
      default:
        throw std::invalid_argument("invalid Pauli character in '" + std::string(text) + "'");
    }
  }
  return out;
}

}  // namespace stabdecomp
