#include "momidx/indexes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "momidx/errors.hpp"
#include "momidx/orthopoly.hpp"
#include "momidx/parallel.hpp"

namespace momidx {

std::string to_string(IndexKind kind) {
  switch (kind) {
    case IndexKind::Lambda: return "lambda";
    case IndexKind::Gamma: return "gamma";
    case IndexKind::Alpha: return "alpha";
    case IndexKind::GammaAt: return "gamma_at";
  }
  return "unknown";
}

std::string to_string(LimitStatus status) {
  switch (status) {
    case LimitStatus::ConvergedPositive: return "ConvergedPositive";
    case LimitStatus::VanishingToZero: return "VanishingToZero";
    case LimitStatus::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

std::string to_string(Question q) {
  switch (q) {
    case Question::Szego: return "Szego";
    case Question::DensityOnJordanCurve: return "DensityOnJordanCurve";
    case Question::BoundedPointEvaluation: return "BPE";
  }
  return "unknown";
}

std::string to_string(Answer a) {
  switch (a) {
    case Answer::Yes: return "Yes";
    case Answer::No: return "No";
    case Answer::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

namespace {

IndexSequence empty_sequence(IndexKind kind, Complex z0, std::size_t n) {
  IndexSequence s;
  s.kind = kind;
  s.z0 = z0;
  s.requested_order = n;
  s.values.reserve(n + 1);
  return s;
}

}  // namespace

FactorSweep factor_sweep(const MatrixOracle& o, std::size_t n, std::span<const Complex> points,
                         const SweepOptions& opts) {
  FactorSweep out;
  out.gamma = empty_sequence(IndexKind::Gamma, 0.0, n);
  out.alpha = empty_sequence(IndexKind::Alpha, 0.0, n);
  for (const Complex z : points) out.gamma_at.push_back(empty_sequence(IndexKind::GammaAt, z, n));

  const HermitianSection s = o.section(n);

  auto stop = [&](const NotPositiveDefinite& e) {
    if (!opts.stop_at_breakdown) throw e;
    out.breakdown = Breakdown{e.failing_order(), e.pivot(), e.what()};
    out.gamma.breakdown = out.breakdown;
    out.alpha.breakdown = out.breakdown;
    for (auto& g : out.gamma_at) g.breakdown = out.breakdown;
  };

  std::optional<CholeskyFactor> f;
  try {
    f.emplace(s(0, 0), opts.pivot_tol);
  } catch (const NotPositiveDefinite& e) {
    stop(e);
    return out;
  }
  f->reserve(n);

  KernelAccumulator at_zero(0.0);
  std::vector<KernelAccumulator> at_points;
  at_points.reserve(points.size());
  for (const Complex z : points) at_points.emplace_back(z);

  std::vector<Complex> row;
  for (std::size_t m = 0; m <= n; ++m) {
    if (m > 0) {
      row.resize(m + 1);
      for (std::size_t k = 0; k <= m; ++k) row[k] = s(m, k);
      try {
        f->extend_in_place(row);
      } catch (const NotPositiveDefinite& e) {
        stop(e);
        break;
      }
    }
    out.alpha.values.push_back(f->pivot(m));
    out.gamma.values.push_back(at_zero.advance(*f).reciprocal());
    for (std::size_t p = 0; p < at_points.size(); ++p)
      out.gamma_at[p].values.push_back(at_points[p].advance(*f).reciprocal());
  }
  return out;
}

IndexSequence lambda_sequence(const MatrixOracle& o, std::size_t n) {
  IndexSequence out = empty_sequence(IndexKind::Lambda, 0.0, n);
  const HermitianSection s = o.section(n);
  out.values.assign(n + 1, 0.0);
  // Largest orders first so the expensive solves start early.
  parallel_for(n + 1, [&](std::size_t i) {
    const std::size_t m = n - i;
    out.values[m] = smallest_eigenvalue(s.leading(m));
  });
  return out;
}

IndexSequence gamma_sequence(const MatrixOracle& o, std::size_t n, const SweepOptions& opts) {
  return factor_sweep(o, n, {}, opts).gamma;
}

IndexSequence alpha_sequence(const MatrixOracle& o, std::size_t n, const SweepOptions& opts) {
  if (n < 1) throw InvalidArgument("alpha sequence needs order >= 1");
  return factor_sweep(o, n, {}, opts).alpha;
}

IndexSequence gamma_at_sequence(const MatrixOracle& o, Complex z0, std::size_t n,
                                const SweepOptions& opts) {
  const Complex pts[] = {z0};
  return std::move(factor_sweep(o, n, pts, opts).gamma_at.front());
}

std::vector<double> running_infimum(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = m = std::min(m, values[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Limits
// ---------------------------------------------------------------------------

void LimitConfig::validate() const {
  if (!(zero_tol > 0.0) || !std::isfinite(zero_tol)) throw InvalidArgument("zero_tol must be positive");
  if (!(rel_stall_tol > 0.0) || !std::isfinite(rel_stall_tol))
    throw InvalidArgument("rel_stall_tol must be positive");
  if (window < 1) throw InvalidArgument("window must be at least 1");
}

LimitEstimate estimate_limit(const std::vector<double>& values, const LimitConfig& cfg) {
  cfg.validate();
  if (values.size() < cfg.window + 1)
    throw TooShort("limit estimate needs " + std::to_string(cfg.window + 1) + " values, got " +
                   std::to_string(values.size()));
  const std::size_t last = values.size() - 1;
  const double v = values[last];
  const double ref = values[last - cfg.window];

  LimitEstimate e;
  e.value = v;
  e.window = cfg.window;
  e.residual = std::abs(ref - v) / std::max(std::abs(v), cfg.zero_tol);
  if (v >= cfg.zero_tol) {
    if (e.residual < cfg.rel_stall_tol) e.status = LimitStatus::ConvergedPositive;
    return e;
  }
  bool monotone = true;
  for (std::size_t i = last - cfg.window; i < last; ++i)
    if (values[i + 1] > values[i]) monotone = false;
  if (monotone) e.status = LimitStatus::VanishingToZero;
  return e;
}

LimitEstimate estimate_limit(const IndexSequence& s, const LimitConfig& cfg) {
  if (s.kind == IndexKind::Alpha) return estimate_limit(running_infimum(s.values), cfg);
  return estimate_limit(s.values, cfg);
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

namespace {

// Mean of log w over `nodes` equispaced parameters; nullopt when w <= 0 somewhere.
std::optional<double> mean_log(const DensitySpec& d, std::size_t nodes) {
  const double h = 2.0 * M_PI / static_cast<double>(nodes);
  double acc = 0.0;
  for (std::size_t l = 0; l < nodes; ++l) {
    const double w = d(h * static_cast<double>(l));
    if (!(w > 0.0)) return std::nullopt;
    acc += std::log(w);
  }
  return acc / static_cast<double>(nodes);
}

}  // namespace

SzegoIntegral szego_integral(const DensitySpec& d, const QuadratureConfig& q) {
  d.validate();
  q.validate();
  SzegoIntegral out;

  std::size_t coarse;
  std::size_t fine;
  if (d.is_sampled()) {
    fine = d.sample_count();
    coarse = fine / 2;
  } else {
    coarse = std::max<std::size_t>(q.initial_nodes / 2, 1);
    fine = q.initial_nodes;
  }

  auto prev = mean_log(d, coarse);
  for (;;) {
    const auto cur = mean_log(d, fine);
    out.nodes = fine;
    if (!prev || !cur) {
      out.zero_density = true;
      out.value = 0.0;
      return out;
    }
    out.error_bound = std::abs(*cur - *prev);
    if (out.error_bound <= q.rel_tol) {
      out.value = std::exp(*cur);
      return out;
    }
    if (d.is_sampled() || fine * 2 > q.max_nodes) throw NonConvergedQuadrature(fine, out.error_bound);
    prev = cur;
    fine *= 2;
  }
}

double gamma_direct_ls(const HermitianSection& s) {
  if (s.order() < 1) throw InvalidArgument("direct least squares needs order >= 1");
  const auto n = static_cast<Eigen::Index>(s.order());
  const ComplexMatrix& m = s.matrix();

  // Minimize x M x^* over x = (1, v): sum_j x_j M(j,k) = 0 for k >= 1.
  const ComplexMatrix a = m.bottomRightCorner(n, n).transpose();
  const ComplexVector rhs = -m.row(0).tail(n).transpose();
  const Eigen::FullPivLU<ComplexMatrix> lu(a);
  if (!lu.isInvertible()) throw SingularSystem("normal equations are singular");
  const ComplexVector v = lu.solve(rhs);

  ComplexVector x(n + 1);
  x(0) = 1.0;
  x.tail(n) = v;
  return s.quadratic_form(x);
}

// ---------------------------------------------------------------------------
// Inequality audit
// ---------------------------------------------------------------------------

namespace {

struct IndexTriple {
  std::vector<double> lambda;
  std::vector<double> gamma;
  std::vector<double> alpha_inf;
  std::optional<Breakdown> breakdown;
};

IndexTriple triple(const MatrixOracle& o, std::size_t n, double pivot_tol) {
  IndexTriple t;
  FactorSweep sweep = factor_sweep(o, n, {}, {true, pivot_tol});
  t.breakdown = sweep.breakdown;
  t.gamma = std::move(sweep.gamma.values);
  t.alpha_inf = running_infimum(sweep.alpha.values);
  if (!t.gamma.empty()) t.lambda = lambda_sequence(o, t.gamma.size() - 1).values;
  return t;
}

}  // namespace

namespace {

AuditReport audit_impl(const MatrixOracle& o, const IndexTriple& whole, std::size_t n, double tol,
                       double pivot_tol) {
  AuditReport r;
  r.tol = tol;
  r.requested_order = n;
  r.breakdown = whole.breakdown;
  r.order_reached = whole.gamma.empty() ? 0 : whole.gamma.size() - 1;
  for (std::size_t m = 0; m < whole.gamma.size(); ++m) {
    AuditRow row;
    row.order = m;
    row.lambda = whole.lambda[m];
    row.gamma = whole.gamma[m];
    row.alpha_inf = whole.alpha_inf[m];
    row.lambda_le_gamma = row.lambda <= row.gamma + tol;
    row.lambda_le_alpha = row.lambda <= row.alpha_inf + tol;
    r.passed = r.passed && row.lambda_le_gamma && row.lambda_le_alpha;
    r.rows.push_back(row);
  }

  const auto parts = o.parts();
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& [part, scale] = parts[p];
    const IndexTriple t = triple(part, r.order_reached, pivot_tol);
    auto compare = [&](IndexKind kind, const std::vector<double>& sum_v, const std::vector<double>& part_v) {
      const std::size_t len = std::min(sum_v.size(), part_v.size());
      for (std::size_t m = 0; m < len; ++m) {
        PartCheck c;
        c.part = p;
        c.order = m;
        c.index = kind;
        c.sum_value = sum_v[m];
        c.part_value = scale * part_v[m];
        c.passed = c.sum_value >= c.part_value - tol;
        r.passed = r.passed && c.passed;
        r.part_checks.push_back(c);
      }
    };
    compare(IndexKind::Lambda, whole.lambda, t.lambda);
    compare(IndexKind::Gamma, whole.gamma, t.gamma);
    compare(IndexKind::Alpha, whole.alpha_inf, t.alpha_inf);
  }
  return r;
}

}  // namespace

AuditReport audit_inequalities(const MatrixOracle& o, std::size_t n, double tol, double pivot_tol) {
  if (n < 1) throw InvalidArgument("audit needs order >= 1");
  return audit_impl(o, triple(o, n, pivot_tol), n, tol, pivot_tol);
}

AuditReport audit_inequalities(const MatrixOracle& o, const IndexSequence& lambda, const FactorSweep& sweep,
                               double tol, double pivot_tol) {
  IndexTriple t;
  t.breakdown = sweep.breakdown;
  t.gamma = sweep.gamma.values;
  t.alpha_inf = running_infimum(sweep.alpha.values);
  if (lambda.values.size() < t.gamma.size())
    throw DimensionMismatch("lambda sequence is shorter than the factor sweep");
  t.lambda.assign(lambda.values.begin(), lambda.values.begin() + static_cast<std::ptrdiff_t>(t.gamma.size()));
  return audit_impl(o, t, sweep.gamma.requested_order, tol, pivot_tol);
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

namespace {

constexpr double kCircleTol = 1e-12;

bool circle_is_unit(const CircleDensity& c) {
  return std::abs(c.radius - 1.0) <= kCircleTol && std::abs(c.center) <= kCircleTol;
}

bool curve_is_unit_circle(const CurveFamily& curve) {
  const auto* c = std::get_if<CircleCurve>(&curve.shape());
  return c && std::abs(c->radius - 1.0) <= kCircleTol && std::abs(c->center) <= kCircleTol;
}

bool on_unit_circle(const MeasureSpec& m) {
  if (const auto* c = m.as<CircleDensity>()) return circle_is_unit(*c);
  if (const auto* c = m.as<CurveDensity>()) return curve_is_unit_circle(c->curve);
  if (const auto* a = m.as<AtomicMeasure>()) {
    for (const Atom& atom : a->atoms)
      if (std::abs(std::abs(atom.point) - 1.0) > kCircleTol) return false;
    return true;
  }
  if (const auto* s = m.as<SumMeasure>()) {
    for (const SumPart& p : s->parts)
      if (!on_unit_circle(p.measure)) return false;
    return true;
  }
  return false;
}

// Lower bound on gamma from the parts of a measure on the unit circle: the
// geometric mean of a density, 0 for atoms, and sums are superadditive.
double szego_lower_bound(const MeasureSpec& m, const QuadratureConfig& q) {
  if (const auto* c = m.as<CircleDensity>()) return szego_integral(c->density, q).value;
  if (const auto* c = m.as<CurveDensity>()) return szego_integral(c->density, q).value;
  if (const auto* s = m.as<SumMeasure>()) {
    double b = 0.0;
    for (const SumPart& p : s->parts) b += p.scale * szego_lower_bound(p.measure, q);
    return b;
  }
  return 0.0;
}

const DensitySpec* pure_circle_density(const MeasureSpec& m) {
  if (const auto* c = m.as<CircleDensity>()) return &c->density;
  if (const auto* c = m.as<CurveDensity>()) return &c->density;
  return nullptr;
}

// Limit estimate that degrades to Inconclusive instead of throwing when the
// sequence stopped too early to fill a window.
LimitEstimate judge(const IndexSequence& s, const LimitConfig& cfg, std::vector<std::string>& warnings) {
  try {
    return estimate_limit(s, cfg);
  } catch (const TooShort& e) {
    warnings.push_back(std::string("limit not estimated: ") + e.what());
    LimitEstimate est;
    est.value = s.empty() ? 0.0 : s.last();
    est.window = cfg.window;
    est.residual = std::numeric_limits<double>::infinity();
    return est;
  }
}

void note_breakdown(const IndexSequence& s, std::vector<std::string>& warnings) {
  if (!s.breakdown) return;
  std::ostringstream msg;
  msg << "factorization stopped at order " << s.breakdown->order << " (pivot " << s.breakdown->pivot
      << "); results use orders up to " << s.order_reached();
  warnings.push_back(msg.str());
}

Verdict start_verdict(Question q, Complex z0, IndexSequence seq, const LimitConfig& cfg) {
  Verdict v;
  v.question = q;
  v.z0 = z0;
  v.requested_order = seq.requested_order;
  v.order_reached = seq.order_reached();
  note_breakdown(seq, v.warnings);
  v.basis = judge(seq, cfg, v.warnings);
  v.sequence = std::move(seq);
  return v;
}

void append_warnings(Verdict& v, const MatrixOracle& o) {
  for (auto& w : o.warnings()) v.warnings.push_back(std::move(w));
}

}  // namespace

Verdict szego_verdict(const MeasureSpec& m, std::size_t n, const VerdictOptions& opts) {
  m.validate();
  if (!on_unit_circle(m)) throw NotOnCircle("Szego verdict needs a measure on the unit circle");

  const MatrixOracle o = MatrixOracle::moment(m, opts.quadrature);
  Verdict v = start_verdict(Question::Szego, 0.0, gamma_sequence(o, n, {true, opts.pivot_tol}), opts.limits);
  v.applicability_note = "measure on the unit circle; the Szego condition holds iff gamma > 0";
  append_warnings(v, o);

  const double bound = szego_lower_bound(m, opts.quadrature);
  if (bound > 0.0 && !pure_circle_density(m))
    v.certificate = Certificate{bound, "gamma of a sum is at least the sum of the scaled part indexes"};

  switch (v.basis.status) {
    case LimitStatus::ConvergedPositive:
      v.answer = Answer::Yes;
      break;
    case LimitStatus::VanishingToZero:
      if (v.certificate) {
        v.warnings.push_back("gamma appears to vanish but the parts give a positive lower bound");
        v.answer = Answer::Inconclusive;
      } else {
        v.answer = Answer::No;
      }
      break;
    case LimitStatus::Inconclusive:
      v.answer = v.certificate ? Answer::Yes : Answer::Inconclusive;
      break;
  }

  if (const DensitySpec* d = pure_circle_density(m);
      d && v.basis.status == LimitStatus::ConvergedPositive) {
    const double g = bound;
    const double rel = std::abs(g - v.basis.value) / std::max(std::abs(g), opts.limits.zero_tol);
    if (rel > 1e-4) {
      std::ostringstream msg;
      msg << "gamma estimate " << v.basis.value << " disagrees with the geometric mean " << g;
      v.warnings.push_back(msg.str());
    }
  }
  return v;
}

Verdict density_verdict(const MeasureSpec& m, Complex z_ref, std::size_t n, bool override_hypothesis,
                        const VerdictOptions& opts) {
  m.validate();
  std::optional<CurveFamily> curve;
  if (const auto* c = m.as<CircleDensity>()) curve = c->curve();
  if (const auto* c = m.as<CurveDensity>()) curve = c->curve;
  const bool hypothesis = curve && curve->encloses(z_ref);
  if (!hypothesis && !override_hypothesis)
    throw NotApplicable("density verdict needs a circle or curve density whose curve encloses z_ref");

  const MatrixOracle o = MatrixOracle::moment(m, opts.quadrature);
  Verdict v = start_verdict(Question::DensityOnJordanCurve, z_ref,
                            gamma_at_sequence(o, z_ref, n, {true, opts.pivot_tol}), opts.limits);
  append_warnings(v, o);
  if (hypothesis) {
    v.applicability_note =
        "density on a Jordan curve enclosing z_ref: polynomials are dense in L2(mu) iff gamma_{z_ref} = 0";
  } else {
    v.applicability_note =
        "curve hypothesis not verified (override): when z_ref lies outside the support, a vanishing "
        "gamma_{z_ref} only shows that the closure of the polynomials contains the Laurent polynomials "
        "in (z - z_ref)";
  }
  switch (v.basis.status) {
    case LimitStatus::VanishingToZero: v.answer = Answer::Yes; break;
    case LimitStatus::ConvergedPositive: v.answer = Answer::No; break;
    case LimitStatus::Inconclusive: v.answer = Answer::Inconclusive; break;
  }
  return v;
}

Verdict bpe_verdict(const MatrixOracle& o, Complex z0, std::size_t n, const VerdictOptions& opts) {
  Verdict v = start_verdict(Question::BoundedPointEvaluation, z0,
                            gamma_at_sequence(o, z0, n, {true, opts.pivot_tol}), opts.limits);
  v.applicability_note = "z0 is a bounded point evaluation iff gamma_{z0} > 0";
  append_warnings(v, o);

  const double mass = o.atom_mass_at(z0);
  if (mass > 0.0) v.certificate = Certificate{mass, "atom at z0 bounds gamma_{z0} below by its mass"};

  switch (v.basis.status) {
    case LimitStatus::ConvergedPositive:
      v.answer = Answer::Yes;
      v.evaluation_constant = 1.0 / std::sqrt(v.basis.value);
      break;
    case LimitStatus::VanishingToZero:
      if (v.certificate) {
        v.warnings.push_back("gamma_{z0} appears to vanish at an atom of positive mass");
        v.answer = Answer::Inconclusive;
      } else {
        v.answer = Answer::No;
      }
      break;
    case LimitStatus::Inconclusive:
      if (v.certificate) {
        v.answer = Answer::Yes;
        v.evaluation_constant = 1.0 / std::sqrt(v.certificate->lower_bound);
      }
      break;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Grid scan
// ---------------------------------------------------------------------------

void GridSpec::validate() const {
  if (re_steps < 2 || im_steps < 2) throw InvalidArgument("grid needs at least 2 steps per axis");
  if (!std::isfinite(re_min) || !std::isfinite(re_max) || !std::isfinite(im_min) || !std::isfinite(im_max))
    throw InvalidArgument("grid ranges must be finite");
  if (!(re_min < re_max) || !(im_min < im_max)) throw InvalidArgument("grid ranges must be increasing");
}

Complex GridSpec::point(std::size_t r, std::size_t c) const {
  const double re = re_min + (re_max - re_min) * static_cast<double>(c) / static_cast<double>(re_steps - 1);
  const double im = im_min + (im_max - im_min) * static_cast<double>(r) / static_cast<double>(im_steps - 1);
  return {re, im};
}

BpeMap bpe_map(const MatrixOracle& o, const GridSpec& grid, std::size_t n, double pivot_tol) {
  grid.validate();
  const CholeskyFactor f = cholesky(o.section(n), pivot_tol);

  BpeMap out;
  out.grid = grid;
  out.order = n;
  out.values.assign(grid.re_steps * grid.im_steps, 0.0);
  std::vector<char> overflow(out.values.size(), 0);

  // Each point replays the incremental kernel so its value matches
  // gamma_at_sequence bit for bit.
  parallel_for(out.values.size(), [&](std::size_t i) {
    KernelAccumulator acc(grid.point(i / grid.re_steps, i % grid.re_steps));
    try {
      KernelValue k;
      for (std::size_t m = 0; m <= n; ++m) k = acc.advance(f);
      out.values[i] = k.reciprocal();
    } catch (const Overflow&) {
      overflow[i] = 1;
    }
  });
  out.overflow_points = static_cast<std::size_t>(std::count(overflow.begin(), overflow.end(), 1));
  return out;
}

}  // namespace momidx
