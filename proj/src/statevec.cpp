#include "stabdecomp/statevec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>

namespace stabdecomp {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void check_qubits(int n, int cap, const char* what) {
  if (n < 0 || n > cap) {
    throw std::invalid_argument(std::string(what) + ": qubit count out of range");
  }
}

void require_normalized(const StateVector& psi, const char* what) {
  if (!psi.normalized || std::abs(psi.norm() - 1.0) > kNormTol) {
    throw std::invalid_argument(std::string(what) + ": state must be normalized");
  }
}

void check_block(const StateVector& psi, int lo, int count) {
  if (lo < 0 || count < 0 || lo + count > psi.n) {
    throw std::out_of_range("block outside the register");
  }
}

// Index with block bits s inserted at [lo, lo + count) into the remaining bits r.
std::size_t compose(std::size_t s, std::size_t r, int lo, int count) {
  const std::size_t low = r & low_mask(lo);
  const std::size_t high = r >> lo;
  return low | (s << lo) | (high << (lo + count));
}

std::size_t sample_cdf(const std::vector<double>& cdf, RngStream& rng) {
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
}

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> cdf(w.size());
  std::partial_sum(w.begin(), w.end(), cdf.begin());
  return cdf;
}

// sum_j (-1)^{b.j} conj(psi[j ^ a]) psi[j] for every b, times i^{|a&b|}; real part.
void expectations_for_shift(const StateVector& psi, std::size_t a, std::vector<double>& re,
                            std::vector<double>& im, std::vector<double>& out) {
  const std::size_t d = psi.dim();
  for (std::size_t j = 0; j < d; ++j) {
    const cplx g = std::conj(psi.amp[j ^ a]) * psi.amp[j];
    re[j] = g.real();
    im[j] = g.imag();
  }
  walsh_hadamard(re);
  walsh_hadamard(im);
  for (std::size_t b = 0; b < d; ++b) {
    // Multiply by i^{|a&b|} and keep the real part.
    switch (std::popcount(a & b) & 3) {
      case 0: out[b] = re[b]; break;
      case 1: out[b] = -im[b]; break;
      case 2: out[b] = -re[b]; break;
      default: out[b] = im[b]; break;
    }
  }
}

// Signed table indices of every element of every isotropic subspace of
// dimension d, subspaces in sorted basis order, elements indexed by their
// coordinate vector c. The top bit flags a -1 sign in the product of basis rows.
struct SubspaceElements {
  std::vector<const OrbitNode*> nodes;
  std::vector<std::uint32_t> elems;
};

constexpr std::uint32_t kSignBit = 0x80000000u;

const SubspaceElements& subspace_elements(int n, int d) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<SubspaceElements>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, d}];
  if (slot) return *slot;
  const auto& orbit = isotropic_orbit(n, d);
  auto out = std::make_unique<SubspaceElements>();
  for (const auto& node : orbit.nodes) out->nodes.push_back(&node);
  std::sort(out->nodes.begin(), out->nodes.end(),
            [](const OrbitNode* x, const OrbitNode* y) { return x->basis_rows < y->basis_rows; });
  const std::size_t size = std::size_t{1} << d;
  out->elems.resize(out->nodes.size() * size);
  for (std::size_t k = 0; k < out->nodes.size(); ++k) {
    std::vector<PhasedPauli> gens;
    for (auto row : out->nodes[k]->basis_rows) gens.emplace_back(unpack(row, n), 0);
    PhasedPauli acc(PauliLabel::identity(n), 0);
    std::size_t c = 0;
    for (std::size_t step = 0; step < size; ++step) {
      if (step > 0) {
        const int flip = std::countr_zero(step);
        c ^= std::size_t{1} << flip;
        acc = pauli_product(acc, gens[flip]);
      }
      out->elems[k * size + c] =
          static_cast<std::uint32_t>(table_index(acc.label)) | (acc.phase == 2 ? kSignBit : 0);
    }
  }
  slot = std::move(out);
  return *slot;
}

}  // namespace

StateVector::StateVector(int n_qubits, std::vector<cplx> amps, bool is_normalized)
    : n(n_qubits), amp(std::move(amps)), normalized(is_normalized) {
  check_qubits(n, kMaxStateQubits, "StateVector");
  if (amp.size() != (std::size_t{1} << n)) {
    throw std::invalid_argument("StateVector: amplitude count must be 2^n");
  }
  if (normalized && std::abs(norm() - 1.0) > kNormTol) {
    throw std::invalid_argument("StateVector: amplitudes are not normalized");
  }
}

StateVector StateVector::basis(int n, std::uint64_t index) {
  check_qubits(n, kMaxStateQubits, "basis");
  if (index >> n) throw std::invalid_argument("basis index out of range");
  std::vector<cplx> a(std::size_t{1} << n);
  a[index] = 1.0;
  return StateVector(n, std::move(a));
}

StateVector StateVector::from_stabilizer(const StabilizerState& s) {
  return StateVector(s.n, stabilizer_vector(s));
}

StateVector StateVector::normalize(int n, std::vector<cplx> amps) {
  double sq = 0;
  for (const auto& v : amps) sq += std::norm(v);
  if (!(sq > 1e-300)) throw std::invalid_argument("cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(sq);
  for (auto& v : amps) v *= inv;
  return StateVector(n, std::move(amps));
}

double StateVector::norm() const {
  double sq = 0;
  for (const auto& v : amp) sq += std::norm(v);
  return std::sqrt(sq);
}

StateVector tensor(const StateVector& low, const StateVector& high) {
  std::vector<cplx> a(low.dim() * high.dim());
  for (std::size_t h = 0; h < high.dim(); ++h)
    for (std::size_t l = 0; l < low.dim(); ++l) a[(h << low.n) | l] = low.amp[l] * high.amp[h];
  return StateVector(low.n + high.n, std::move(a), low.normalized && high.normalized);
}

cplx inner(const StateVector& a, const StateVector& b) {
  if (a.n != b.n) throw std::invalid_argument("inner: size mismatch");
  cplx acc = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a.amp[i]) * b.amp[i];
  return acc;
}

double overlap_sq(const StateVector& a, const StateVector& b) { return std::norm(inner(a, b)); }

RngStream::RngStream(std::uint64_t seed) : seed_(seed), key_(mix64(seed ^ 0x5DEECE66DULL)) {}

RngStream RngStream::child(std::uint64_t index) const {
  RngStream out = *this;
  out.path_.push_back(index);
  out.key_ = mix64(key_ ^ mix64(index + 0x632BE59BD9B4E019ULL));
  out.counter_ = 0;
  return out;
}

RngStream RngStream::child(std::string_view tag) const { return child(fnv1a(tag)); }

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double RngStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

StateVector haar_state(int n, RngStream& rng) {
  std::normal_distribution<double> gauss;
  std::vector<cplx> a(std::size_t{1} << n);
  for (auto& v : a) {
    const double re = gauss(rng);
    v = cplx(re, gauss(rng));
  }
  return StateVector::normalize(n, std::move(a));
}

std::uint64_t ceil_count(double x) {
  if (!(x > 0)) return 0;
  if (x >= 18446744073709551615.0) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::ceil(x));
}

namespace {

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  return __builtin_add_overflow(a, b, &r) ? std::numeric_limits<std::uint64_t>::max() : r;
}

}  // namespace

CostCounts& CostCounts::operator+=(const CostCounts& o) {
  copies = sat_add(copies, o.copies);
  queries_u = sat_add(queries_u, o.queries_u);
  queries_con_u = sat_add(queries_con_u, o.queries_con_u);
  gates = sat_add(gates, o.gates);
  return *this;
}

void CostLedger::charge(const std::string& subroutine, const CostCounts& c) {
  breakdown_[subroutine] += c;
  totals_ += c;
}

void CostLedger::merge(const CostLedger& other) {
  for (const auto& [name, c] : other.breakdown_) charge(name, c);
}

namespace {

nlohmann::json counts_json(const CostCounts& c) {
  return {{"copies", c.copies},
          {"queries_u", c.queries_u},
          {"queries_con_u", c.queries_con_u},
          {"gates", c.gates}};
}

}  // namespace

nlohmann::json to_json(const CostLedger& ledger) {
  nlohmann::json by = nlohmann::json::object();
  for (const auto& [name, c] : ledger.breakdown()) by[name] = counts_json(c);
  return {{"totals", counts_json(ledger.totals())}, {"by_subroutine", by}};
}

PauliLabel table_label(std::size_t index, int n) {
  return PauliLabel(n, index & low_mask(n), (index >> n) & low_mask(n));
}

StateVector apply_weyl(const StateVector& psi, const PauliLabel& x) {
  if (x.n != psi.n) throw std::invalid_argument("apply_weyl: size mismatch");
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx ph = ipow[std::popcount(x.xpart & x.zpart) & 3];
  std::vector<cplx> out(psi.dim());
  for (std::size_t j = 0; j < psi.dim(); ++j) {
    const double s = std::popcount(x.zpart & j) & 1 ? -1.0 : 1.0;
    out[j ^ x.xpart] = ph * s * psi.amp[j];
  }
  return StateVector(psi.n, std::move(out), psi.normalized);
}

StateVector apply_circuit(const StateVector& psi, const CliffordCircuit& c, CostLedger* ledger) {
  if (c.n != psi.n) throw std::invalid_argument("apply_circuit: size mismatch");
  validate(c);
  StateVector out = psi;
  apply_gates(out.amp, c);
  if (ledger) ledger->charge("apply_circuit", {.gates = c.size()});
  return out;
}

double weyl_expectation(const StateVector& psi, const PauliLabel& x) {
  require_normalized(psi, "weyl_expectation");
  if (x.n != psi.n) throw std::invalid_argument("weyl_expectation: size mismatch");
  cplx acc = 0;
  for (std::size_t j = 0; j < psi.dim(); ++j) {
    const double s = std::popcount(x.zpart & j) & 1 ? -1.0 : 1.0;
    acc += std::conj(psi.amp[j ^ x.xpart]) * psi.amp[j] * s;
  }
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return (ipow[std::popcount(x.xpart & x.zpart) & 3] * acc).real();
}

std::vector<double> weyl_expectations(const StateVector& psi) {
  require_normalized(psi, "weyl_expectations");
  const std::size_t d = psi.dim();
  std::vector<double> out(d * d), re(d), im(d), row(d);
  for (std::size_t a = 0; a < d; ++a) {
    expectations_for_shift(psi, a, re, im, row);
    for (std::size_t b = 0; b < d; ++b) out[a | (b << psi.n)] = row[b];
  }
  return out;
}

void walsh_hadamard(std::span<double> v) {
  const std::size_t n = v.size();
  if (n == 0 || (n & (n - 1))) throw std::invalid_argument("walsh_hadamard: size not a power of 2");
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = v[j], y = v[j + h];
        v[j] = x + y;
        v[j + h] = x - y;
      }
    }
  }
}

std::vector<double> xor_convolution(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) throw std::invalid_argument("xor_convolution: size mismatch");
  std::vector<double> ff(f.begin(), f.end()), gg(g.begin(), g.end());
  walsh_hadamard(ff);
  walsh_hadamard(gg);
  const double inv = 1.0 / static_cast<double>(ff.size());
  for (std::size_t i = 0; i < ff.size(); ++i) ff[i] *= gg[i] * inv;
  walsh_hadamard(ff);
  return ff;
}

std::vector<double> xor_convolution_naive(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) throw std::invalid_argument("xor_convolution_naive: size mismatch");
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t x = 0; x < f.size(); ++x)
    for (std::size_t y = 0; y < f.size(); ++y) out[x] += f[y] * g[x ^ y];
  return out;
}

int table_cap() {
  if (const char* env = std::getenv("STABDECOMP_TABLE_MAX_QUBITS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 14) return static_cast<int>(v);
  }
  return 12;
}

DistributionTables distribution_tables(const StateVector& psi) {
  if (psi.n > table_cap()) throw std::invalid_argument("distribution_tables: n over table cap");
  const auto e = weyl_expectations(psi);
  const double scale = std::ldexp(1.0, -psi.n);
  DistributionTables t;
  t.p.n = t.q.n = psi.n;
  t.p.values.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) t.p.values[i] = e[i] * e[i] * scale;
  t.q.values = xor_convolution(t.p.values, t.p.values);
  // The transform can leave tiny negative rounding residue on zero entries.
  for (auto& v : t.q.values) v = std::max(v, 0.0);
  return t;
}

WeylSampler::WeylSampler(const StateVector& psi) : n_(psi.n), psi_(psi) {
  require_normalized(psi, "WeylSampler");
  check_qubits(psi.n, kMaxSamplingQubits, "WeylSampler");
  if (n_ <= table_cap()) {
    const auto t = distribution_tables(psi);
    p_cdf_ = cumulative(t.p.values);
    q_cdf_ = cumulative(t.q.values);
  } else {
    std::vector<double> w(psi.dim());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::norm(psi.amp[j]);
    auto r = xor_convolution(w, w);
    for (auto& v : r) v = std::max(v, 0.0);
    a_cdf_ = cumulative(r);
  }
}

PauliLabel WeylSampler::sample_p(RngStream& rng) const {
  if (!p_cdf_.empty()) return table_label(sample_cdf(p_cdf_, rng), n_);
  const std::size_t a = sample_cdf(a_cdf_, rng);
  const std::size_t d = psi_.dim();
  std::vector<double> re(d), im(d), row(d);
  expectations_for_shift(psi_, a, re, im, row);
  for (auto& v : row) v *= v;
  const std::size_t b = sample_cdf(cumulative(row), rng);
  return PauliLabel(n_, a, b);
}

PauliLabel WeylSampler::sample_q(RngStream& rng) const {
  if (!q_cdf_.empty()) return table_label(sample_cdf(q_cdf_, rng), n_);
  return sample_p(rng) + sample_p(rng);
}

PauliLabel sample_weyl_dist(const WeylSampler& sampler, RngStream& rng, CostLedger& ledger) {
  ledger.charge("bell_difference_sampling", {.copies = 4});
  return sampler.sample_q(rng);
}

bool two_copy_retention(const StateVector& psi, const PauliLabel& x, RngStream& rng,
                        CostLedger& ledger, RetentionMode mode) {
  const double e = weyl_expectation(psi, x);
  ledger.charge("two_copy_retention", {.copies = 2});
  const double keep = mode == RetentionMode::squared_expectation ? e * e : (1 + e * e) / 2;
  return rng.bernoulli(keep);
}

Gowers3Metrics gowers3_exact(const StateVector& psi) {
  const auto t = distribution_tables(psi);
  const auto e = weyl_expectations(psi);
  Gowers3Metrics m;
  double sixth = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double sq = e[i] * e[i];
    m.proxy += t.q.values[i] * sq;
    m.u3pow8 += t.p.values[i] * sq;
    sixth += sq * sq * sq;
  }
  m.identity_gap = std::abs(m.proxy - std::ldexp(sixth, -psi.n));
  return m;
}

std::uint64_t hoeffding_shots(double delta, double fail) {
  if (!(delta > 0) || !(fail > 0 && fail < 1)) {
    throw std::invalid_argument("hoeffding_shots: need delta > 0 and fail in (0,1)");
  }
  return ceil_count(std::log(2.0 / fail) / (2 * delta * delta));
}

Gowers3Metrics gowers3_sampled(const StateVector& psi, double delta, double fail, RngStream& rng,
                               CostLedger& ledger) {
  const WeylSampler sampler(psi);
  const std::uint64_t shots = hoeffding_shots(delta, fail);
  std::uint64_t hits_q = 0, hits_p = 0;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const auto x = sampler.sample_q(rng);
    const double e = weyl_expectation(psi, x);
    hits_q += rng.bernoulli(e * e);
    const auto y = sampler.sample_p(rng);
    const double f = weyl_expectation(psi, y);
    hits_p += rng.bernoulli(f * f);
  }
  // Four copies for each Bell difference sample, two for each Bell sample,
  // two for each retention measurement.
  ledger.charge("gowers3", {.copies = shots * (4 + 2 + 2 + 2)});
  Gowers3Metrics m;
  m.exact = false;
  m.shots = shots;
  m.proxy = static_cast<double>(hits_q) / static_cast<double>(shots);
  m.u3pow8 = static_cast<double>(hits_p) / static_cast<double>(shots);
  return m;
}

cplx hadamard_test_estimate(const StateVector& a, const StateVector& b, double eps, double delta,
                            EstimatorMode mode, RngStream& rng, CostLedger& ledger) {
  if (a.n != b.n) throw std::invalid_argument("hadamard_test_estimate: size mismatch");
  if (!(eps > 0) || !(delta > 0 && delta < 1)) {
    throw std::invalid_argument("hadamard_test_estimate: need eps > 0 and delta in (0,1)");
  }
  // Each component is a mean of +-1 outcomes; Hoeffding with failure delta/2.
  const auto shots =
      ceil_count(2.0 * std::log(4.0 / delta) / (eps * eps));
  ledger.charge("hadamard_test", {.queries_con_u = shots > std::numeric_limits<std::uint64_t>::max() / 4
                                                     ? std::numeric_limits<std::uint64_t>::max()
                                                     : 4 * shots});
  const cplx exact = inner(a, b);
  if (mode == EstimatorMode::exact) return exact;
  auto component = [&](double mean) {
    const double p = std::clamp((1 + mean) / 2, 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> dist(shots, p);
    const auto k = dist(rng);
    return 2.0 * static_cast<double>(k) / static_cast<double>(shots) - 1.0;
  };
  const double re = component(exact.real());
  const double im = component(exact.imag());
  return {re, im};
}

std::vector<double> block_probabilities(const StateVector& psi, int lo, int count) {
  check_block(psi, lo, count);
  std::vector<double> out(std::size_t{1} << count, 0.0);
  for (std::size_t i = 0; i < psi.dim(); ++i) out[(i >> lo) & low_mask(count)] += std::norm(psi.amp[i]);
  return out;
}

BlockOutcome measure_block(const StateVector& psi, int lo, int count, RngStream& rng) {
  require_normalized(psi, "measure_block");
  const auto probs = block_probabilities(psi, lo, count);
  const std::size_t outcome = sample_cdf(cumulative(probs), rng);
  return project_block(psi, lo, count, outcome);
}

BlockOutcome project_block(const StateVector& psi, int lo, int count, std::uint64_t outcome) {
  check_block(psi, lo, count);
  if (outcome >> count) throw std::out_of_range("block outcome out of range");
  std::vector<cplx> post(psi.dim(), 0.0);
  double prob = 0;
  for (std::size_t i = 0; i < psi.dim(); ++i) {
    if (((i >> lo) & low_mask(count)) == outcome) {
      post[i] = psi.amp[i];
      prob += std::norm(psi.amp[i]);
    }
  }
  if (prob < 1e-15) throw std::domain_error("requested measurement branch has zero probability");
  return {outcome, prob, StateVector::normalize(psi.n, std::move(post))};
}

BlockOutcome project_block_onto(const StateVector& psi, int lo, int count,
                                const StateVector& target) {
  check_block(psi, lo, count);
  if (target.n != count) throw std::invalid_argument("project_block_onto: target size mismatch");
  const std::size_t rest = std::size_t{1} << (psi.n - count);
  std::vector<cplx> post(psi.dim(), 0.0);
  double prob = 0;
  for (std::size_t r = 0; r < rest; ++r) {
    cplx c = 0;
    for (std::size_t s = 0; s < target.dim(); ++s) {
      c += std::conj(target.amp[s]) * psi.amp[compose(s, r, lo, count)];
    }
    prob += std::norm(c);
    for (std::size_t s = 0; s < target.dim(); ++s) post[compose(s, r, lo, count)] = target.amp[s] * c;
  }
  if (prob < 1e-15) throw std::domain_error("requested projection has zero probability");
  return {0, prob, StateVector::normalize(psi.n, std::move(post))};
}

std::vector<cplx> conditional_block(const StateVector& psi, int lo, int count,
                                    std::uint64_t outcome) {
  check_block(psi, lo, count);
  const std::size_t rest = std::size_t{1} << (psi.n - count);
  std::vector<cplx> out(rest);
  for (std::size_t r = 0; r < rest; ++r) out[r] = psi.amp[compose(outcome, r, lo, count)];
  return out;
}

LcuResult lcu_residual(const StateVector& psi, const std::vector<StabilizerState>& phis,
                       const std::vector<cplx>& betas, double alpha, CostLedger& ledger) {
  if (!(alpha > 0)) throw std::invalid_argument("lcu_residual: normalizer must be positive");
  if (phis.size() != betas.size()) throw std::invalid_argument("lcu_residual: size mismatch");
  std::vector<cplx> v = psi.amp;
  std::uint64_t prep_gates = 0;
  double l1 = 1.0;
  for (std::size_t j = 0; j < phis.size(); ++j) {
    if (phis[j].n != psi.n) throw std::invalid_argument("lcu_residual: qubit mismatch");
    const auto c = stab_state_prep(phis[j]);
    prep_gates += c.size();
    std::vector<cplx> phi(psi.dim());
    phi[0] = 1.0;
    apply_gates(phi, c);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= betas[j] * phi[i];
    l1 += std::abs(betas[j]);
  }
  double sq = 0;
  for (const auto& x : v) sq += std::norm(x);
  const double raw = std::sqrt(sq);
  if (raw < kResidualTol) throw DegenerateResidual(raw);
  LcuResult out;
  out.raw_norm = raw;
  // V|0> = (psi - sum beta phi) / alpha and ||a||_1 = (1 + sum |beta|) / alpha.
  out.success_prob = (raw / alpha) * (raw / alpha) / ((l1 / alpha) * (l1 / alpha));
  out.attempts = ceil_count(1.0 / out.success_prob);
  out.residual = StateVector::normalize(psi.n, std::move(v));
  ledger.charge("lcu", {.queries_con_u = out.attempts, .gates = out.attempts * prep_gates});
  return out;
}

namespace {

struct SubspaceBest {
  double value = -1;
  std::size_t node = 0;
  std::uint64_t signs = 0;
};

SubspaceBest best_over_subspaces(const StateVector& psi, int d) {
  check_qubits(psi.n, kMaxBruteForceQubits, "brute-force fidelity");
  if (psi.n < 1 || d < 0 || d > psi.n) throw std::invalid_argument("brute force: bad dimension");
  const auto e = weyl_expectations(psi);
  const auto& sub = subspace_elements(psi.n, d);
  const std::size_t size = std::size_t{1} << d;
  const double scale = std::ldexp(1.0, -d);
  std::vector<double> f(size);
  SubspaceBest best;
  for (std::size_t k = 0; k < sub.nodes.size(); ++k) {
    for (std::size_t c = 0; c < size; ++c) {
      const std::uint32_t el = sub.elems[k * size + c];
      const double v = e[el & ~kSignBit];
      f[c] = (el & kSignBit) ? -v : v;
    }
    walsh_hadamard(f);
    for (std::size_t s = 0; s < size; ++s) {
      if (f[s] * scale > best.value + 1e-12) {
        best.value = f[s] * scale;
        best.node = k;
        best.signs = s;
      }
    }
  }
  return best;
}

}  // namespace

StabFidelity bruteforce_stab_fidelity(const StateVector& psi) {
  require_normalized(psi, "bruteforce_stab_fidelity");
  const auto best = best_over_subspaces(psi, psi.n);
  const auto& node = *subspace_elements(psi.n, psi.n).nodes[best.node];
  StabFidelity out;
  out.value = std::clamp(best.value, 0.0, 1.0);
  out.argmax.n = psi.n;
  for (int i = 0; i < psi.n; ++i) {
    out.argmax.generators.emplace_back(unpack(node.basis_rows[i], psi.n),
                                       ((best.signs >> i) & 1) ? 2 : 0);
  }
  return out;
}

StabDimFidelity bruteforce_stab_dim_fidelity(const StateVector& psi, int d) {
  require_normalized(psi, "bruteforce_stab_dim_fidelity");
  const auto best = best_over_subspaces(psi, d);
  const auto& node = *subspace_elements(psi.n, d).nodes[best.node];
  StabDimFidelity out;
  out.value = std::clamp(best.value, 0.0, 1.0);
  out.subspace = rref_basis(node.basis_rows, 2 * psi.n);
  out.signs = best.signs;
  return out;
}

double subspace_mean_sq(const std::vector<double>& expectations, const Gf2Basis& basis, int n) {
  const auto elems = span_elements(basis);
  double acc = 0;
  for (auto v : elems) {
    const double e = expectations[table_index(unpack(v, n))];
    acc += e * e;
  }
  return acc / static_cast<double>(elems.size());
}

void write_binary(const StateVector& psi, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::uint64_t n = static_cast<std::uint64_t>(psi.n);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (const auto& v : psi.amp) {
    const double parts[2] = {v.real(), v.imag()};
    out.write(reinterpret_cast<const char*>(parts), sizeof parts);
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

StateVector read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n > static_cast<std::uint64_t>(kMaxStateQubits)) {
    throw std::runtime_error("bad state header in " + path);
  }
  std::vector<cplx> amps(std::size_t{1} << n);
  for (auto& v : amps) {
    double parts[2];
    in.read(reinterpret_cast<char*>(parts), sizeof parts);
    v = cplx(parts[0], parts[1]);
  }
  if (!in) throw std::runtime_error("truncated state file " + path);
  StateVector psi(static_cast<int>(n), std::move(amps), false);
  psi.normalized = std::abs(psi.norm() - 1.0) <= kNormTol;
  return psi;
}

nlohmann::json to_json(const StateVector& psi) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : psi.amp) arr.push_back({v.real(), v.imag()});
  return arr;
}

StateVector state_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("state JSON must be an array of [re, im]");
  std::vector<cplx> amps;
  for (const auto& e : j) amps.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  const int n = std::countr_zero(amps.size());
  if (amps.empty() || (std::size_t{1} << n) != amps.size()) {
    throw std::invalid_argument("state JSON length must be a power of two");
  }
  StateVector psi(n, std::move(amps), false);
  psi.normalized = std::abs(psi.norm() - 1.0) <= kNormTol;
  return psi;
}

}  // namespace stabdecomp
