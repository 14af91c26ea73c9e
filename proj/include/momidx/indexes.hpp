#pragma once

// Index sequences lambda_n, gamma_n, alpha_n and gamma_{z0,n} of the finite
// sections of a Hermitian matrix, their finite-order limit estimates, the
// inequality audit, and the Szego / density / bounded-point-evaluation
// verdicts built on them.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "momidx/hermitian_core.hpp"
#include "momidx/matrix_source.hpp"
#include "momidx/measures.hpp"

namespace momidx {

enum class IndexKind { Lambda, Gamma, Alpha, GammaAt };

std::string to_string(IndexKind kind);

/// Where an incremental factor sweep stopped.
struct Breakdown {
  std::size_t order = 0;
  double pivot = 0.0;
  std::string reason;
};

struct IndexSequence {
  IndexKind kind = IndexKind::Gamma;
  /// Evaluation point for GammaAt (0 for Gamma).
  Complex z0{0.0, 0.0};
  std::size_t requested_order = 0;
  /// values[n] for n = 0 .. order_reached().
  std::vector<double> values;
  /// Set when the sweep stopped before requested_order.
  std::optional<Breakdown> breakdown;

  bool empty() const noexcept { return values.empty(); }
  std::size_t order_reached() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double last() const { return values.back(); }
};

struct SweepOptions {
  /// When false a failing pivot throws NotPositiveDefinite; when true the
  /// sequences end at the last order that factored and carry a Breakdown.
  bool stop_at_breakdown = false;
  double pivot_tol = CholeskyFactor::kDefaultPivotTol;
};

/// Everything one incremental Cholesky sweep yields.
struct FactorSweep {
  IndexSequence gamma;
  IndexSequence alpha;
  /// One sequence per requested point, same length as gamma.
  std::vector<IndexSequence> gamma_at;
  std::optional<Breakdown> breakdown;
};

/// Fetches section(N) once and grows the factor order by order. gamma is the
/// kernel reciprocal at 0, alpha the pivots L(n,n)^2, gamma_at the kernel
/// reciprocals at `points`.
FactorSweep factor_sweep(const MatrixOracle& o, std::size_t n, std::span<const Complex> points = {},
                         const SweepOptions& opts = {});

/// values[n] = smallest eigenvalue of section n. Orders are processed in
/// parallel (MOMIDX_THREADS caps the worker count).
IndexSequence lambda_sequence(const MatrixOracle& o, std::size_t n);
IndexSequence gamma_sequence(const MatrixOracle& o, std::size_t n, const SweepOptions& opts = {});
/// Requires n >= 1.
IndexSequence alpha_sequence(const MatrixOracle& o, std::size_t n, const SweepOptions& opts = {});
IndexSequence gamma_at_sequence(const MatrixOracle& o, Complex z0, std::size_t n,
                                const SweepOptions& opts = {});

/// r[n] = min_{k <= n} values[k].
std::vector<double> running_infimum(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Limits
// ---------------------------------------------------------------------------

struct LimitConfig {
  double zero_tol = 1e-8;
  double rel_stall_tol = 1e-6;
  std::size_t window = 8;

  void validate() const;
};

enum class LimitStatus { ConvergedPositive, VanishingToZero, Inconclusive };

std::string to_string(LimitStatus status);

struct LimitEstimate {
  double value = 0.0;
  LimitStatus status = LimitStatus::Inconclusive;
  std::size_t window = 0;
  /// |v[last - window] - v[last]| / max(v[last], zero_tol).
  double residual = 0.0;
};

/// Stopping rule on the tail of a sequence. ConvergedPositive when the last
/// value is at least zero_tol and the relative change over the window is
/// below rel_stall_tol; VanishingToZero when the last value is below zero_tol
/// and the window is non-increasing; Inconclusive otherwise. Throws TooShort
/// with fewer than window + 1 values.
LimitEstimate estimate_limit(const std::vector<double>& values, const LimitConfig& cfg = {});
/// Alpha sequences are judged on their running infimum.
LimitEstimate estimate_limit(const IndexSequence& s, const LimitConfig& cfg = {});

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

struct SzegoIntegral {
  /// exp of the mean of log w over the parameter circle.
  double value = 0.0;
  /// Last change of the mean log, a relative error estimate for value.
  double error_bound = 0.0;
  std::size_t nodes = 0;
  /// The density vanished at a node; value is 0.
  bool zero_density = false;
};

/// Geometric mean of a circle density by the trapezoid rule on log w with node
/// doubling. Throws NonConvergedQuadrature when max_nodes is reached first.
SzegoIntegral szego_integral(const DensitySpec& d, const QuadratureConfig& q = {});

/// Squared M-distance from e_0 to span{e_1..e_n} by solving the normal
/// equations of the section directly. Throws SingularSystem.
double gamma_direct_ls(const HermitianSection& s);

// ---------------------------------------------------------------------------
// Inequality audit
// ---------------------------------------------------------------------------

struct AuditRow {
  std::size_t order = 0;
  double lambda = 0.0;
  double gamma = 0.0;
  /// min_{k <= order} alpha_k
  double alpha_inf = 0.0;
  bool lambda_le_gamma = true;
  bool lambda_le_alpha = true;
};

/// An index of the sum compared with the same index of one scaled part.
struct PartCheck {
  std::size_t part = 0;
  std::size_t order = 0;
  IndexKind index = IndexKind::Gamma;
  double sum_value = 0.0;
  double part_value = 0.0;
  bool passed = true;
};

struct AuditReport {
  double tol = 1e-9;
  std::size_t requested_order = 0;
  std::size_t order_reached = 0;
  std::optional<Breakdown> breakdown;
  std::vector<AuditRow> rows;
  std::vector<PartCheck> part_checks;
  bool passed = true;
};

/// lambda_n <= gamma_n and lambda_n <= min_{k<=n} alpha_k at every order that
/// factors; for Sum oracles also sum index >= scale * part index for lambda,
/// gamma and the alpha running infimum.
AuditReport audit_inequalities(const MatrixOracle& o, std::size_t n, double tol = 1e-9,
                               double pivot_tol = CholeskyFactor::kDefaultPivotTol);
/// Same audit reusing a lambda sequence and a factor sweep already computed
/// for `o`; only the parts of a Sum are swept again.
AuditReport audit_inequalities(const MatrixOracle& o, const IndexSequence& lambda, const FactorSweep& sweep,
                               double tol = 1e-9, double pivot_tol = CholeskyFactor::kDefaultPivotTol);

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

enum class Question { Szego, DensityOnJordanCurve, BoundedPointEvaluation };
enum class Answer { Yes, No, Inconclusive };

std::string to_string(Question q);
std::string to_string(Answer a);

/// A lower bound on the limiting index that does not come from the tail of
/// the sequence: superadditivity over the parts of a sum, or an atom mass.
struct Certificate {
  double lower_bound = 0.0;
  std::string reason;
};

struct Verdict {
  Question question = Question::Szego;
  Answer answer = Answer::Inconclusive;
  LimitEstimate basis;
  std::string applicability_note;
  Complex z0{0.0, 0.0};
  std::size_t requested_order = 0;
  std::size_t order_reached = 0;
  std::optional<Certificate> certificate;
  /// 1 / sqrt(gamma_{z0}) for a bounded point evaluation.
  std::optional<double> evaluation_constant;
  std::vector<std::string> warnings;
  IndexSequence sequence;
};

struct VerdictOptions {
  LimitConfig limits;
  QuadratureConfig quadrature;
  double pivot_tol = CholeskyFactor::kDefaultPivotTol;
};

/// Requires a measure on the unit circle. Yes when gamma settles at a
/// positive value or a positive certificate exists, No when it vanishes.
/// Throws NotOnCircle.
Verdict szego_verdict(const MeasureSpec& m, std::size_t n, const VerdictOptions& opts = {});

/// Density of polynomials in L2(mu). Needs a circle or curve density whose
/// curve encloses z_ref; otherwise throws NotApplicable unless `override_hypothesis`.
Verdict density_verdict(const MeasureSpec& m, Complex z_ref, std::size_t n,
                        bool override_hypothesis = false, const VerdictOptions& opts = {});

/// Bounded point evaluation at z0 from gamma_{z0,n}; an atom at z0 certifies
/// gamma_{z0} >= its mass.
Verdict bpe_verdict(const MatrixOracle& o, Complex z0, std::size_t n, const VerdictOptions& opts = {});

// ---------------------------------------------------------------------------
// Grid scan
// ---------------------------------------------------------------------------

struct GridSpec {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;
  std::size_t re_steps = 2;
  std::size_t im_steps = 2;

  void validate() const;
  /// Point of row `r` (imaginary axis) and column `c` (real axis).
  Complex point(std::size_t r, std::size_t c) const;
};

struct BpeMap {
  GridSpec grid;
  std::size_t order = 0;
  /// Row-major: values[r * re_steps + c] = gamma_{z,N} at grid.point(r, c).
  std::vector<double> values;
  /// Points whose kernel left double range; their value is 0.
  std::size_t overflow_points = 0;
};

/// gamma_{z,N} on a grid from one factor of section N; a point's value equals
/// the last entry of gamma_at_sequence there.
BpeMap bpe_map(const MatrixOracle& o, const GridSpec& grid, std::size_t n,
               double pivot_tol = CholeskyFactor::kDefaultPivotTol);

}  // namespace momidx
