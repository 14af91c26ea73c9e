#include "momidx/measures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "momidx/errors.hpp"

namespace momidx {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double fourier_abs_sum(const FourierDensity& f) {
  double s = 0.0;
  for (const auto& [n, c] : f.coeffs) s += std::abs(c);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// DensitySpec
// ---------------------------------------------------------------------------

DensitySpec::DensitySpec(Form form) : form_(std::move(form)) {}

DensitySpec DensitySpec::lebesgue() { return DensitySpec(NamedDensity{"lebesgue", {}}); }

DensitySpec DensitySpec::geometric(double a) {
  return DensitySpec(NamedDensity{"geometric", {a}});
}

DensitySpec DensitySpec::fourier(std::map<int, Complex> coeffs) {
  std::map<int, Complex> full = coeffs;
  for (const auto& [n, c] : coeffs)
    if (n > 0 && !full.contains(-n)) full[-n] = std::conj(c);
  return DensitySpec(FourierDensity{std::move(full)});
}

DensitySpec DensitySpec::sampled(std::vector<double> values) {
  return DensitySpec(SampledDensity{std::move(values)});
}

std::size_t DensitySpec::sample_count() const {
  if (const auto* s = std::get_if<SampledDensity>(&form_)) return s->values.size();
  return 0;
}

double DensitySpec::operator()(double t) const {
  return std::visit(
      Overloaded{
          [&](const NamedDensity& d) -> double {
            if (d.name == "lebesgue") return 1.0;
            const double a = d.params.at(0);
            return (1.0 - a * a) / (1.0 + 2.0 * a * std::cos(t) + a * a);
          },
          [&](const FourierDensity& d) -> double {
            double w = 0.0;
            for (const auto& [n, c] : d.coeffs) {
              if (n < 0) continue;
              const Complex e = std::polar(1.0, n * t);
              w += (n == 0 ? 1.0 : 2.0) * (c * e).real();
            }
            return w;
          },
          [&](const SampledDensity& d) -> double {
            const auto count = d.values.size();
            const double pos = t / kTwoPi * static_cast<double>(count);
            const double nearest = std::round(pos);
            if (std::abs(pos - nearest) > 1e-9)
              throw InvalidArgument("sampled density queried off its grid");
            auto idx = static_cast<long>(nearest) % static_cast<long>(count);
            if (idx < 0) idx += static_cast<long>(count);
            return d.values[static_cast<std::size_t>(idx)];
          }},
      form_);
}

Complex DensitySpec::fourier_coefficient(long m) const {
  return std::visit(
      Overloaded{
          [&](const NamedDensity& d) -> Complex {
            if (d.name == "lebesgue") return m == 0 ? 1.0 : 0.0;
            const double a = d.params.at(0);
            return std::pow(-a, static_cast<double>(std::labs(m)));
          },
          [&](const FourierDensity& d) -> Complex {
            auto it = d.coeffs.find(static_cast<int>(m));
            if (it != d.coeffs.end()) return it->second;
            it = d.coeffs.find(static_cast<int>(-m));
            if (it != d.coeffs.end()) return std::conj(it->second);
            return 0.0;
          },
          [&](const SampledDensity&) -> Complex {
            throw InvalidArgument("sampled densities have no closed-form Fourier coefficients");
          }},
      form_);
}

void DensitySpec::validate() const {
  std::visit(
      Overloaded{
          [](const NamedDensity& d) {
            if (d.name == "lebesgue") {
              if (!d.params.empty()) throw InvalidMeasure("lebesgue density takes no parameters");
            } else if (d.name == "geometric") {
              if (d.params.size() != 1)
                throw InvalidMeasure("geometric density takes exactly one parameter");
              if (!(std::abs(d.params[0]) < 1.0))
                throw InvalidMeasure("geometric density requires |a| < 1");
            } else {
              throw InvalidMeasure("unknown density family '" + d.name + "'");
            }
          },
          [](const FourierDensity& d) {
            auto zero = d.coeffs.find(0);
            if (zero == d.coeffs.end() || !(zero->second.real() > 0.0) ||
                std::abs(zero->second.imag()) > 1e-12 * zero->second.real())
              throw InvalidMeasure("fourier density needs a real positive coefficient of order 0");
            for (const auto& [n, c] : d.coeffs) {
              if (!finite(c)) throw InvalidMeasure("fourier coefficient is not finite");
              if (n <= 0) continue;
              auto neg = d.coeffs.find(-n);
              if (neg != d.coeffs.end() &&
                  std::abs(neg->second - std::conj(c)) > 1e-12 * std::max(1.0, std::abs(c)))
                throw InvalidMeasure("fourier coefficients are not conjugate-symmetric at order " +
                                     std::to_string(n));
            }
          },
          [](const SampledDensity& d) {
            if (d.values.size() < 2 || d.values.size() % 2 != 0)
              throw InvalidMeasure("sampled density needs an even number (>= 2) of samples");
            bool positive = false;
            for (std::size_t l = 0; l < d.values.size(); ++l) {
              const double v = d.values[l];
              if (!std::isfinite(v)) throw InvalidMeasure("sampled density value is not finite");
              if (v < 0.0)
                throw NegativeDensity(kTwoPi * static_cast<double>(l) /
                                          static_cast<double>(d.values.size()),
                                      v);
              positive = positive || v > 0.0;
            }
            if (!positive) throw InvalidMeasure("sampled density has zero mass");
          }},
      form_);
}

// ---------------------------------------------------------------------------
// CurveFamily
// ---------------------------------------------------------------------------

Complex CurveFamily::point(double t) const {
  return std::visit(
      Overloaded{[&](const CircleCurve& c) { return c.center + std::polar(c.radius, t + c.rotation); },
                 [&](const EllipseCurve& e) {
                   return e.center + std::polar(1.0, e.rotation) *
                                         Complex(e.semi_a * std::cos(t), e.semi_b * std::sin(t));
                 }},
      shape_);
}

double CurveFamily::max_modulus() const {
  return std::visit(
      Overloaded{[](const CircleCurve& c) { return std::abs(c.center) + c.radius; },
                 [](const EllipseCurve& e) {
                   return std::abs(e.center) + std::max(e.semi_a, e.semi_b);
                 }},
      shape_);
}

bool CurveFamily::encloses(Complex z) const {
  return std::visit(
      Overloaded{[&](const CircleCurve& c) { return std::abs(z - c.center) < c.radius; },
                 [&](const EllipseCurve& e) {
                   const Complex w = (z - e.center) * std::polar(1.0, -e.rotation);
                   const double x = w.real() / e.semi_a;
                   const double y = w.imag() / e.semi_b;
                   return x * x + y * y < 1.0;
                 }},
      shape_);
}

bool CurveFamily::contains(Complex z, double tol) const {
  return std::visit(
      Overloaded{[&](const CircleCurve& c) {
                   return std::abs(std::abs(z - c.center) - c.radius) <= tol * c.radius;
                 },
                 [&](const EllipseCurve& e) {
                   const Complex w = (z - e.center) * std::polar(1.0, -e.rotation);
                   const double x = w.real() / e.semi_a;
                   const double y = w.imag() / e.semi_b;
                   return std::abs(std::sqrt(x * x + y * y) - 1.0) <= tol;
                 }},
      shape_);
}

CurveFamily CurveFamily::mapped(Complex alpha, Complex beta) const {
  const double scale = std::abs(alpha);
  const double turn = std::arg(alpha);
  return std::visit(
      Overloaded{[&](const CircleCurve& c) -> CurveFamily {
                   return CircleCurve{alpha * c.center + beta, scale * c.radius, c.rotation + turn};
                 },
                 [&](const EllipseCurve& e) -> CurveFamily {
                   return EllipseCurve{alpha * e.center + beta, scale * e.semi_a, scale * e.semi_b,
                                       e.rotation + turn};
                 }},
      shape_);
}

bool CurveFamily::same_as(const CurveFamily& other, double tol) const {
  const auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(a)); };
  const auto close_z = [tol](Complex a, Complex b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(a)); };
  // Compare as point sets: parametrization offsets do not matter.
  if (const auto* a = std::get_if<CircleCurve>(&shape_)) {
    if (const auto* b = std::get_if<CircleCurve>(&other.shape_))
      return close_z(a->center, b->center) && close(a->radius, b->radius);
    return false;
  }
  const auto& a = std::get<EllipseCurve>(shape_);
  const auto* b = std::get_if<EllipseCurve>(&other.shape_);
  if (b == nullptr || !close_z(a.center, b->center)) return false;
  const double dr = std::remainder(a.rotation - b->rotation, std::numbers::pi);
  if (close(a.semi_a, b->semi_a) && close(a.semi_b, b->semi_b) && std::abs(dr) <= tol) return true;
  const double dq = std::remainder(a.rotation - b->rotation - std::numbers::pi / 2, std::numbers::pi);
  return close(a.semi_a, b->semi_b) && close(a.semi_b, b->semi_a) && std::abs(dq) <= tol;
}

void CurveFamily::validate() const {
  std::visit(Overloaded{[](const CircleCurve& c) {
                          if (!(c.radius > 0.0) || !std::isfinite(c.radius) || !finite(c.center) ||
                              !std::isfinite(c.rotation))
                            throw InvalidMeasure("circle needs a finite positive radius");
                        },
                        [](const EllipseCurve& e) {
                          if (!(e.semi_a > 0.0) || !(e.semi_b > 0.0) || !std::isfinite(e.semi_a) ||
                              !std::isfinite(e.semi_b) || !finite(e.center) ||
                              !std::isfinite(e.rotation))
                            throw InvalidMeasure("ellipse needs finite positive semiaxes");
                        }},
             shape_);
}

// ---------------------------------------------------------------------------
// MeasureSpec
// ---------------------------------------------------------------------------

void MeasureSpec::validate() const {
  std::visit(
      Overloaded{
          [](const CircleDensity& m) {
            if (!(m.radius > 0.0) || !std::isfinite(m.radius) || !finite(m.center))
              throw InvalidMeasure("circle density needs a finite positive radius");
            m.density.validate();
          },
          [](const CurveDensity& m) {
            m.curve.validate();
            m.density.validate();
          },
          [](const AtomicMeasure& m) {
            if (m.atoms.empty()) throw InvalidMeasure("atomic measure has no atoms");
            if (!(m.declared_tail_mass >= 0.0) || !std::isfinite(m.declared_tail_mass))
              throw InvalidMeasure("declared tail mass must be finite and nonnegative");
            if (!(m.support_radius_bound > 0.0) || !std::isfinite(m.support_radius_bound))
              throw InvalidMeasure("support radius bound must be finite and positive");
            for (const auto& a : m.atoms) {
              if (!(a.weight > 0.0) || !std::isfinite(a.weight))
                throw InvalidMeasure("atom weights must be finite and positive");
              if (!finite(a.point)) throw InvalidMeasure("atom location is not finite");
              if (std::abs(a.point) > m.support_radius_bound * (1.0 + 1e-12))
                throw InvalidMeasure("atom lies outside the declared support radius");
            }
          },
          [](const SumMeasure& m) {
            if (m.parts.empty()) throw InvalidMeasure("sum measure has no parts");
            for (const auto& p : m.parts) {
              if (!(p.scale > 0.0) || !std::isfinite(p.scale))
                throw InvalidMeasure("sum scales must be finite and positive");
              p.measure.validate();
            }
          }},
      v_);
}

MeasureSpec lebesgue_circle() { return CircleDensity{DensitySpec::lebesgue(), 1.0, {0.0, 0.0}, 0.0}; }

void QuadratureConfig::validate() const {
  const auto pow2 = [](std::size_t n) { return n > 0 && std::has_single_bit(n); };
  if (!pow2(initial_nodes) || !pow2(max_nodes))
    throw InvalidArgument("quadrature node counts must be powers of two");
  if (initial_nodes > max_nodes) throw InvalidArgument("initial_nodes exceeds max_nodes");
  if (initial_nodes < 2) throw InvalidArgument("initial_nodes must be at least 2");
  if (!(rel_tol > 0.0)) throw InvalidArgument("rel_tol must be positive");
}

// ---------------------------------------------------------------------------
// MomentTriangle
// ---------------------------------------------------------------------------

MomentTriangle::MomentTriangle(std::size_t first_row, std::size_t last_row)
    : first_(first_row), last_(last_row) {
  if (first_row > last_row) throw InvalidArgument("empty moment row range");
  data_.resize(offset(last_row, last_row) + 1);
}

std::size_t MomentTriangle::offset(std::size_t j, std::size_t k) const {
  return (j * (j + 1) - first_ * (first_ + 1)) / 2 + k;
}

MomentValue& MomentTriangle::at(std::size_t j, std::size_t k) {
  if (j < first_ || j > last_ || k > j) throw IndexOutOfRange("moment triangle index");
  return data_[offset(j, k)];
}

const MomentValue& MomentTriangle::at(std::size_t j, std::size_t k) const {
  if (j < first_ || j > last_ || k > j) throw IndexOutOfRange("moment triangle index");
  return data_[offset(j, k)];
}

std::size_t MomentTriangle::nonconverged() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](const MomentValue& v) { return !v.converged; }));
}

double MomentTriangle::max_error_bound() const {
  double e = 0.0;
  for (const auto& v : data_) e = std::max(e, v.error_bound);
  return e;
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kNodeChunk = 2048;

/// Running trapezoid sums sum_l w_l z_l^j conj(z_l)^k over a node set, for
/// the rows of a MomentTriangle.
class TrapezoidSums {
 public:
  TrapezoidSums(const CurveFamily& curve, const DensitySpec& density, std::size_t first,
                std::size_t last)
      : curve_(curve),
        density_(density),
        first_(first),
        last_(last),
        fourier_slack_(0.0),
        sums_(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(last - first + 1),
                                     static_cast<Eigen::Index>(last + 1))) {
    if (const auto* f = std::get_if<FourierDensity>(&density.form()))
      fourier_slack_ = 1e-13 * fourier_abs_sum(*f);
  }

  /// Adds nodes l = start, start + step, ... < level on the grid of size `level`.
  void add(std::size_t level, std::size_t start, std::size_t step) {
    std::vector<std::size_t> idx;
    for (std::size_t l = start; l < level; l += step) idx.push_back(l);
    const auto cols = static_cast<Eigen::Index>(last_ + 1);
    const auto rows = static_cast<Eigen::Index>(last_ - first_ + 1);
    for (std::size_t begin = 0; begin < idx.size(); begin += kNodeChunk) {
      const std::size_t count = std::min(kNodeChunk, idx.size() - begin);
      Eigen::MatrixXcd powers(static_cast<Eigen::Index>(count), cols);
      Eigen::MatrixXcd weighted(static_cast<Eigen::Index>(count), cols);
      for (std::size_t r = 0; r < count; ++r) {
        const std::size_t l = idx[begin + r];
        const double t = kTwoPi * static_cast<double>(l) / static_cast<double>(level);
        const double w = density_at(l, level, t);
        mass_ += w;
        const Complex z = curve_.point(t);
        Complex p = 1.0;
        const auto row = static_cast<Eigen::Index>(r);
        for (Eigen::Index c = 0; c < cols; ++c) {
          powers(row, c) = p;
          weighted(row, c) = w * std::conj(p);
          p *= z;
        }
      }
      sums_.noalias() += powers.middleCols(static_cast<Eigen::Index>(first_), rows).transpose() * weighted;
    }
  }

  Complex mean(std::size_t j, std::size_t k, std::size_t level) const {
    return sums_(static_cast<Eigen::Index>(j - first_), static_cast<Eigen::Index>(k)) /
           static_cast<double>(level);
  }
  double mass(std::size_t level) const { return mass_ / static_cast<double>(level); }

 private:
  double density_at(std::size_t l, std::size_t level, double t) const {
    double w;
    if (const auto* s = std::get_if<SampledDensity>(&density_.form())) {
      w = s->values[l * (s->values.size() / level)];
    } else {
      w = density_(t);
    }
    if (w < 0.0) {
      if (w < -fourier_slack_) throw NegativeDensity(t, w);
      w = 0.0;
    }
    return w;
  }

  const CurveFamily& curve_;
  const DensitySpec& density_;
  std::size_t first_;
  std::size_t last_;
  double fourier_slack_;
  double mass_ = 0.0;
  Eigen::MatrixXcd sums_;
};

MomentTriangle density_rows(const CurveFamily& curve, const DensitySpec& density, std::size_t first,
                            std::size_t last, const QuadratureConfig& q) {
  MomentTriangle out(first, last);
  TrapezoidSums sums(curve, density, first, last);

  std::size_t coarse = 0;
  std::size_t level = 0;
  std::size_t level_max = 0;
  if (density.is_sampled()) {
    level = density.sample_count();
    coarse = level / 2;
    level_max = level;
  } else {
    // Both grids must resolve the polynomial part z^j conj(z)^k exactly
    // (trigonometric degree <= 2 * last), otherwise aliasing can fake agreement.
    const std::size_t needed = std::bit_ceil(2 * (2 * last + 1));
    level = std::max(q.initial_nodes, needed);
    if (level > q.max_nodes)
      throw InvalidArgument("moment degree " + std::to_string(2 * last) + " needs at least " +
                            std::to_string(level) + " quadrature nodes (max_nodes = " +
                            std::to_string(q.max_nodes) + ")");
    coarse = level / 2;
    level_max = q.max_nodes;
  }

  sums.add(coarse, 0, 1);
  std::vector<Complex> previous;
  previous.reserve((last + 1) * (last + 2) / 2);
  for (std::size_t j = first; j <= last; ++j)
    for (std::size_t k = 0; k <= j; ++k) previous.push_back(sums.mean(j, k, coarse));

  std::vector<char> done(previous.size(), 0);
  for (;;) {
    sums.add(level, 1, 2);
    const double mass = sums.mass(level);
    bool all_done = true;
    std::size_t i = 0;
    for (std::size_t j = first; j <= last; ++j) {
      for (std::size_t k = 0; k <= j; ++k, ++i) {
        if (done[i]) continue;
        const Complex current = sums.mean(j, k, level);
        const double diff = std::abs(current - previous[i]);
        auto& slot = out.at(j, k);
        slot.value = current;
        slot.error_bound = diff;
        if (diff < q.rel_tol * (std::abs(current) + mass)) {
          slot.converged = true;
          done[i] = 1;
        } else {
          slot.converged = false;
          all_done = false;
        }
        previous[i] = current;
      }
    }
    if (all_done || level >= level_max) break;
    level *= 2;
  }
  return out;
}

MomentTriangle atomic_rows(const AtomicMeasure& m, std::size_t first, std::size_t last) {
  MomentTriangle out(first, last);
  std::vector<Complex> powers(last + 1);
  for (const auto& atom : m.atoms) {
    Complex p = 1.0;
    for (auto& slot : powers) {
      slot = p;
      p *= atom.point;
    }
    for (std::size_t j = first; j <= last; ++j)
      for (std::size_t k = 0; k <= j; ++k)
        out.at(j, k).value += atom.weight * powers[j] * std::conj(powers[k]);
  }
  for (std::size_t j = first; j <= last; ++j)
    for (std::size_t k = 0; k <= j; ++k)
      out.at(j, k).error_bound =
          m.declared_tail_mass * std::pow(m.support_radius_bound, static_cast<double>(j + k));
  return out;
}

MomentTriangle rows_impl(const MeasureSpec& m, std::size_t first, std::size_t last,
                         const QuadratureConfig& q) {
  return std::visit(
      Overloaded{
          [&](const CircleDensity& c) { return density_rows(c.curve(), c.density, first, last, q); },
          [&](const CurveDensity& c) { return density_rows(c.curve, c.density, first, last, q); },
          [&](const AtomicMeasure& a) { return atomic_rows(a, first, last); },
          [&](const SumMeasure& s) {
            MomentTriangle out(first, last);
            for (const auto& part : s.parts) {
              const MomentTriangle sub = rows_impl(part.measure, first, last, q);
              for (std::size_t j = first; j <= last; ++j) {
                for (std::size_t k = 0; k <= j; ++k) {
                  auto& slot = out.at(j, k);
                  const auto& v = sub.at(j, k);
                  slot.value += part.scale * v.value;
                  slot.error_bound += part.scale * v.error_bound;
                  slot.converged = slot.converged && v.converged;
                }
              }
            }
            return out;
          }},
      m.variant());
}

}  // namespace

MomentTriangle moment_rows(const MeasureSpec& m, std::size_t first_row, std::size_t last_row,
                           const QuadratureConfig& q) {
  q.validate();
  return rows_impl(m, first_row, last_row, q);
}

MomentValue moment(const MeasureSpec& m, std::size_t j, std::size_t k, const QuadratureConfig& q) {
  if (j < k) {
    MomentValue v = moment(m, k, j, q);
    v.value = std::conj(v.value);
    return v;
  }
  return moment_rows(m, j, j, q).at(j, k);
}

double total_mass(const MeasureSpec& m, const QuadratureConfig& q) {
  return moment(m, 0, 0, q).value.real();
}

MeasureSpec pushforward(const MeasureSpec& m, Complex alpha, Complex beta) {
  if (alpha == Complex(0.0, 0.0)) throw InvalidArgument("pushforward needs a nonzero alpha");
  return std::visit(
      Overloaded{
          [&](const CircleDensity& c) -> MeasureSpec {
            return CircleDensity{c.density, std::abs(alpha) * c.radius, alpha * c.center + beta,
                                 c.rotation + std::arg(alpha)};
          },
          [&](const CurveDensity& c) -> MeasureSpec {
            return CurveDensity{c.curve.mapped(alpha, beta), c.density};
          },
          [&](const AtomicMeasure& a) -> MeasureSpec {
            AtomicMeasure out;
            out.declared_tail_mass = a.declared_tail_mass;
            out.support_radius_bound = std::abs(alpha) * a.support_radius_bound + std::abs(beta);
            out.atoms.reserve(a.atoms.size());
            for (const auto& atom : a.atoms) out.atoms.push_back({alpha * atom.point + beta, atom.weight});
            return out;
          },
          [&](const SumMeasure& s) -> MeasureSpec {
            SumMeasure out;
            for (const auto& part : s.parts)
              out.parts.push_back({pushforward(part.measure, alpha, beta), part.scale});
            return out;
          }},
      m.variant());
}

double atom_mass_at(const MeasureSpec& m, Complex z, double tol) {
  if (const auto* a = m.as<AtomicMeasure>()) {
    double mass = 0.0;
    for (const auto& atom : a->atoms)
      if (std::abs(atom.point - z) <= tol * std::max(1.0, std::abs(z))) mass += atom.weight;
    return mass;
  }
  if (const auto* s = m.as<SumMeasure>()) {
    double mass = 0.0;
    for (const auto& part : s->parts) mass += part.scale * atom_mass_at(part.measure, z, tol);
    return mass;
  }
  return 0.0;
}

}  // namespace momidx
