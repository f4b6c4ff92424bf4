#pragma once

// Coefficient sets of embedded explicit Runge-Kutta pairs: dense Butcher
// tableaux, three-register low-storage (3S*, 3S*+) schemes, the memory-friendly
// SSP3(2)4 step, a built-in catalog and a JSON coefficient file format.

#include <array>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace lsrk {

/// Raised when a coefficient set violates one of its structural invariants.
class InvariantError : public std::runtime_error {
 public:
  InvariantError(std::string invariant, const std::string& detail)
      : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

/// Raised when a coefficient file cannot be parsed.
class CoefficientParseError : public std::runtime_error {
 public:
  CoefficientParseError(const std::string& what, std::size_t line, std::string field)
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class UnknownMethodError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MethodOrders {
  int q = 0;
  int qhat = 0;
  /// Exponent base of the PID controller.
  int k() const { return (q < qhat ? q : qhat) + 1; }
};

/// Explicit embedded pair (A, b, c, bhat). bhat has s+1 entries; the last one
/// multiplies f(t_{n+1}, u^{n+1}) and is nonzero only for FSAL pairs.
struct ButcherPair {
  std::string name;
  std::size_t s = 0;
  std::vector<double> A;  // row-major s x s
  std::vector<double> b;
  std::vector<double> c;
  std::vector<double> bhat;
  bool fsal = false;
  int q = 0;
  int qhat = 0;

  double a(std::size_t i, std::size_t j) const { return A[i * s + j]; }
  MethodOrders orders() const { return {q, qhat}; }

  /// Throws InvariantError naming the first violated invariant.
  void validate() const;

  /// Tableau with the FSAL stage appended (last row of A equals b, c = 1).
  /// Returns a copy of A, c padded to s+1 stages.
  std::pair<std::vector<double>, std::vector<double>> extended_tableau() const;
};

enum class SchemeClass { ThreeSStar, ThreeSStarPlus };

std::string_view to_string(SchemeClass cls);

/// Three-register low-storage scheme.
///
/// One step runs, for i = 1..s,
///   S2 <- S2 + delta_i S1
///   S1 <- gamma1_i S1 + gamma2_i S2 + gamma3_i S3 + beta_i dt f(t + c_i dt, S1)
/// starting from S1 = S3 = u^n, S2 = 0. For 3S*+ a fourth register accumulates
/// the embedded solution with the explicit weights bhat[0..s-1]. For 3S* the
/// embedded solution is the delta-weighted combination
///   (S2 + delta_{s+1} u^{n+1} + delta_{s+2} u^n) / sum(delta),
/// so delta has s+2 entries. In both classes bhat[s] is the FSAL weight.
struct LowStorageScheme {
  std::string name;
  SchemeClass cls = SchemeClass::ThreeSStarPlus;
  std::size_t s = 0;
  std::vector<double> gamma1, gamma2, gamma3;
  std::vector<double> beta;
  std::vector<double> delta;  // s entries (3S*+) or s+2 entries (3S*)
  std::vector<double> c;
  std::vector<double> bhat;  // s+1 entries
  int q = 0;
  int qhat = 0;

  bool fsal() const { return !bhat.empty() && bhat.back() != 0.0; }
  MethodOrders orders() const { return {q, qhat}; }
  double delta_sum() const;

  void validate() const;
};

/// The four-stage, third-order SSP method with its embedded second-order
/// estimator, stepped with the three-location sequence
///   u <- u^n + dt/2 f, u <- u + dt/2 f, u <- u + dt/2 f,
///   uhat <- u^n/3 + 2u/3, u <- 2u^n/3 + u/3, u <- u + dt/2 f, uhat <- (uhat + u)/2.
struct Ssp43Scheme {
  static constexpr std::size_t s = 4;
  static constexpr int q = 3;
  static constexpr int qhat = 2;
  std::string name = "SSP3(2)4";
};

using Method = std::variant<ButcherPair, LowStorageScheme, Ssp43Scheme>;

std::string method_name(const Method& m);
MethodOrders method_orders(const Method& m);
bool method_fsal(const Method& m);
std::size_t method_stages(const Method& m);

/// Dense tableau of a low-storage scheme, extracted by running the register
/// recurrence on coefficient vectors over {u^n, k_1, ..., k_s}.
ButcherPair to_butcher(const LowStorageScheme& scheme);
/// Row sums of the reconstructed tableau, i.e. the abscissae implied by the
/// register recurrence (the scheme's own c is ignored).
std::vector<double> low_storage_abscissae(const LowStorageScheme& scheme);
/// Dense tableau of the SSP3(2)4 low-storage sequence, tracked in exact
/// rational arithmetic and rounded once.
ButcherPair to_butcher(const Ssp43Scheme& scheme);
ButcherPair to_butcher(const Method& m);

/// Exact rational entries of the SSP3(2)4 reconstruction (numerator, denominator).
struct RationalTableau {
  std::size_t s = 0;
  std::vector<std::pair<long long, long long>> A, b, c, bhat;
};
RationalTableau to_rational_butcher(const Ssp43Scheme& scheme);

/// Build a 3S*+ scheme from the printed table layout (gamma columns, delta,
/// main Butcher weights b, embedded weights bhat_1..s). The register
/// coefficients beta are recovered from b: k_j enters S1 only once, with
/// weight beta_j, and is then propagated by the gamma/delta recurrence alone,
/// so b_j = beta_j * P_j. The FSAL weight bhat_{s+1} (when fsal) is
/// 1 - sum(bhat_1..s); c is the row sum of the reconstructed tableau.
LowStorageScheme three_s_star_plus_from_tables(std::string name, const std::vector<double>& gamma1,
                                               const std::vector<double>& gamma2,
                                               const std::vector<double>& gamma3,
                                               const std::vector<double>& delta,
                                               const std::vector<double>& b,
                                               const std::vector<double>& bhat, bool fsal, int q,
                                               int qhat);

// ---------------------------------------------------------------------------
// Catalog

struct CatalogInfo {
  std::string name;     // canonical identifier, e.g. "RK3(2)5F[3S*+]"
  std::string alias;    // short CLI identifier, e.g. "rk35-3s+fsal"
  std::string summary;  // one-line description
};

const std::vector<CatalogInfo>& catalog_list();

/// Tuned PID gains (beta1, beta2, beta3) for a catalog method, by canonical
/// name or alias; other names get the PI controller (0.6, -0.2, 0).
std::array<double, 3> default_gains(std::string_view name);

/// Look up a built-in method by canonical name or alias (case-insensitive).
/// Throws UnknownMethodError listing the valid identifiers.
Method catalog_get(std::string_view name);

// ---------------------------------------------------------------------------
// Coefficient files

/// Serialize a method to the JSON coefficient format. Numbers are written as
/// shortest round-trip decimal strings.
std::string export_coefficients(const Method& m);

/// Parse the JSON coefficient format.
Method parse_coefficients(std::string_view text);
Method load_coefficients(const std::filesystem::path& path);

/// Resolve --scheme / --coeff-file: a file wins over a catalog entry of the same
/// name; `warning` receives a message in that case.
Method resolve_method(std::string_view scheme, const std::filesystem::path& coeff_file,
                      std::string* warning = nullptr);

// ---------------------------------------------------------------------------
// Order conditions

struct OrderResidual {
  std::string condition;  // tree id, e.g. "b.A(c*Ac)"
  int order = 0;
  bool embedded = false;
  double residual = 0.0;
};

/// Residuals |Phi(t) - 1/gamma(t)| of the 17 rooted-tree conditions through
/// order `up_to` (<= 5) for the main weights and the embedded weights. The
/// embedded conditions of FSAL pairs use the extended tableau.
std::vector<OrderResidual> order_residuals(const ButcherPair& pair, int up_to);

/// Largest residual over conditions of order <= up_to for the chosen weights.
double max_order_residual(const ButcherPair& pair, int up_to, bool embedded);

}  // namespace lsrk
