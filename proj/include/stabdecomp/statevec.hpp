#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stabdecomp/gf2.hpp"
#include "stabdecomp/pauli.hpp"

namespace stabdecomp {

inline constexpr double kNormTol = 1e-10;
inline constexpr int kMaxStateQubits = 20;
inline constexpr int kMaxSamplingQubits = 16;

struct StateVector {
  int n = 0;
  std::vector<cplx> amp;
  bool normalized = true;

  StateVector() = default;
  // Throws std::invalid_argument on a size mismatch or, when normalized is set,
  // on a norm outside 1 +- kNormTol.
  StateVector(int n_qubits, std::vector<cplx> amps, bool is_normalized = true);

  static StateVector basis(int n, std::uint64_t index);
  static StateVector from_stabilizer(const StabilizerState& s);
  // Rescales to unit norm; throws if the norm is below 1e-300.
  static StateVector normalize(int n, std::vector<cplx> amps);

  std::size_t dim() const { return amp.size(); }
  double norm() const;
};

// Qubits of `low` occupy bits 0..low.n-1 of the product.
StateVector tensor(const StateVector& low, const StateVector& high);
cplx inner(const StateVector& a, const StateVector& b);
double overlap_sq(const StateVector& a, const StateVector& b);

// Counter-based generator keyed by a master seed and a path of sub-stream tags.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0);

  RngStream child(std::uint64_t index) const;
  RngStream child(std::string_view tag) const;

  result_type operator()();
  double uniform();  // in [0, 1)
  bool bernoulli(double p) { return uniform() < p; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

 private:
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Normalized complex Gaussian amplitudes.
StateVector haar_state(int n, RngStream& rng);

// ceil(x) as a count, saturating at the largest uint64.
std::uint64_t ceil_count(double x);

// Addition saturates so astronomically large charges stay ordered.
struct CostCounts {
  std::uint64_t copies = 0;
  std::uint64_t queries_u = 0;
  std::uint64_t queries_con_u = 0;
  std::uint64_t gates = 0;

  CostCounts& operator+=(const CostCounts& o);
  friend bool operator==(const CostCounts&, const CostCounts&) = default;
};

class CostLedger {
 public:
  void charge(const std::string& subroutine, const CostCounts& c);
  void merge(const CostLedger& other);

  const CostCounts& totals() const { return totals_; }
  const std::map<std::string, CostCounts>& breakdown() const { return breakdown_; }

 private:
  CostCounts totals_;
  std::map<std::string, CostCounts> breakdown_;
};

nlohmann::json to_json(const CostLedger& ledger);

// Index of x = (a, b) in the 4^n tables: a | (b << n).
inline std::size_t table_index(const PauliLabel& x) {
  return static_cast<std::size_t>(x.xpart | (x.zpart << x.n));
}
PauliLabel table_label(std::size_t index, int n);

struct ProbTable {
  int n = 0;
  std::vector<double> values;

  double operator[](const PauliLabel& x) const { return values[table_index(x)]; }
};

StateVector apply_weyl(const StateVector& psi, const PauliLabel& x);
StateVector apply_circuit(const StateVector& psi, const CliffordCircuit& c,
                          CostLedger* ledger = nullptr);
// <psi|W_x|psi>; throws if psi is not normalized.
double weyl_expectation(const StateVector& psi, const PauliLabel& x);
// All 4^n expectations at once, indexed by table_index.
std::vector<double> weyl_expectations(const StateVector& psi);

// In-place unnormalized transform; size must be a power of two.
void walsh_hadamard(std::span<double> values);
// r(x) = sum_y f(y) g(x + y) via the transform.
std::vector<double> xor_convolution(std::span<const double> f, std::span<const double> g);
// The same sum evaluated term by term; O(N^2).
std::vector<double> xor_convolution_naive(std::span<const double> f, std::span<const double> g);

// Exact-table cap, read from STABDECOMP_TABLE_MAX_QUBITS (default 12).
int table_cap();

struct DistributionTables {
  ProbTable p;
  ProbTable q;
};

DistributionTables distribution_tables(const StateVector& psi);

// Draws from q_psi (the Bell difference sampling law). Uses a cumulative table
// up to table_cap() qubits and the factorization q = p * p above it.
class WeylSampler {
 public:
  explicit WeylSampler(const StateVector& psi);

  int num_qubits() const { return n_; }
  PauliLabel sample_q(RngStream& rng) const;
  PauliLabel sample_p(RngStream& rng) const;

 private:
  int n_ = 0;
  StateVector psi_;
  std::vector<double> q_cdf_;
  std::vector<double> p_cdf_;
  std::vector<double> a_cdf_;  // marginal of p on the X part, for the table-free path
};

// Four copies per draw.
PauliLabel sample_weyl_dist(const WeylSampler& sampler, RngStream& rng, CostLedger& ledger);

enum class RetentionMode {
  squared_expectation,  // keep with probability <W_x>^2
  eigenvalue,           // keep on a +1 outcome, probability (1 + <W_x>^2) / 2
};

// Two copies per call.
bool two_copy_retention(const StateVector& psi, const PauliLabel& x, RngStream& rng,
                        CostLedger& ledger,
                        RetentionMode mode = RetentionMode::squared_expectation);

struct Gowers3Metrics {
  double proxy = 0;    // E_{x~q}[<W_x>^2]
  double u3pow8 = 0;   // E_{x~p}[<W_x>^2]
  bool exact = true;
  std::uint64_t shots = 0;
  // |E_q[2^n p] - 2^{-n} sum <W>^6|; zero up to rounding for pure states.
  double identity_gap = 0;
};

Gowers3Metrics gowers3_exact(const StateVector& psi);
// Hoeffding shot count for additive error delta with failure probability fail.
std::uint64_t hoeffding_shots(double delta, double fail);
Gowers3Metrics gowers3_sampled(const StateVector& psi, double delta, double fail, RngStream& rng,
                               CostLedger& ledger);

enum class EstimatorMode { exact, sampled };

// <a|b> within eps per component with probability >= 1 - delta in sampled mode.
cplx hadamard_test_estimate(const StateVector& a, const StateVector& b, double eps, double delta,
                            EstimatorMode mode, RngStream& rng, CostLedger& ledger);

struct BlockOutcome {
  std::uint64_t outcome = 0;
  double prob = 0;
  StateVector post;
};

// Outcome probabilities of a computational measurement of qubits [lo, lo + count).
std::vector<double> block_probabilities(const StateVector& psi, int lo, int count);
BlockOutcome measure_block(const StateVector& psi, int lo, int count, RngStream& rng);
// Throws std::domain_error if the requested branch has probability below 1e-15.
BlockOutcome project_block(const StateVector& psi, int lo, int count, std::uint64_t outcome);
// Projects qubits [lo, lo + count) onto |target>; outcome is 0 for success.
BlockOutcome project_block_onto(const StateVector& psi, int lo, int count,
                                const StateVector& target);
// Unnormalized state of the remaining qubits when [lo, lo + count) reads `outcome`.
std::vector<cplx> conditional_block(const StateVector& psi, int lo, int count,
                                    std::uint64_t outcome);

class DegenerateResidual : public std::runtime_error {
 public:
  explicit DegenerateResidual(double norm)
      : std::runtime_error("residual norm below tolerance"), norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

inline constexpr double kResidualTol = 1e-9;

struct LcuResult {
  StateVector residual;   // normalized psi - sum beta_j phi_j
  double raw_norm = 0;    // ||psi - sum beta_j phi_j||
  double success_prob = 0;
  std::uint64_t attempts = 0;
};

LcuResult lcu_residual(const StateVector& psi, const std::vector<StabilizerState>& phis,
                       const std::vector<cplx>& betas, double alpha, CostLedger& ledger);

inline constexpr int kMaxBruteForceQubits = 5;

struct StabFidelity {
  double value = 0;
  StabilizerState argmax;
};

// max over stabilizer states of |<s|psi>|^2.
StabFidelity bruteforce_stab_fidelity(const StateVector& psi);

struct StabDimFidelity {
  double value = 0;
  Gf2Basis subspace;
  std::uint64_t signs = 0;  // bit i flips the sign of basis row i
};

// max over isotropic subspaces A of dimension d and sign choices of
// ||Pi_{A,s} psi||^2, the fidelity with states of stabilizer dimension >= d.
StabDimFidelity bruteforce_stab_dim_fidelity(const StateVector& psi, int d);

// Mean of <W_x>^2 over a subspace.
double subspace_mean_sq(const std::vector<double>& expectations, const Gf2Basis& basis, int n);

void write_binary(const StateVector& psi, const std::string& path);
StateVector read_binary(const std::string& path);
// JSON text form: a list of [re, im] pairs.
nlohmann::json to_json(const StateVector& psi);
StateVector state_from_json(const nlohmann::json& j);

}  // namespace stabdecomp
