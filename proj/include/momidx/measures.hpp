#pragma once

// Compactly supported measures on the complex plane and their complex
// moments c_{j,k} = \int z^j \bar{z}^k d\mu.
//
// Densities on circles and curves are taken against the normalized parameter
// measure dt / (2 pi), t in [0, 2 pi). With that convention the Lebesgue
// density w = 1 on the unit circle has total mass 1 and an identity moment
// matrix. A curve density already includes any |z'(t)| factor the caller
// wants; nothing is differentiated here.

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace momidx {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Densities on the parameter circle
// ---------------------------------------------------------------------------

/// Built-in density family: `lebesgue` (w = 1) or `geometric` with one
/// parameter a, |a| < 1, w(t) = sum_n (-a)^{|n|} e^{int}.
struct NamedDensity {
  std::string name;
  std::vector<double> params;
};

/// w(t) = sum_n c_n e^{int}, with c_{-n} = conj(c_n).
struct FourierDensity {
  std::map<int, Complex> coeffs;
};

/// Nonnegative values on the uniform grid t_l = 2 pi l / K. K must be even so
/// that the half grid gives an error estimate.
struct SampledDensity {
  std::vector<double> values;
};

class DensitySpec {
 public:
  using Form = std::variant<NamedDensity, FourierDensity, SampledDensity>;

  DensitySpec() : form_(NamedDensity{"lebesgue", {}}) {}
  explicit DensitySpec(Form form);

  static DensitySpec lebesgue();
  static DensitySpec geometric(double a);
  /// Missing negative orders are filled with conjugates of the positive ones.
  static DensitySpec fourier(std::map<int, Complex> coeffs);
  static DensitySpec sampled(std::vector<double> values);

  const Form& form() const noexcept { return form_; }
  bool is_sampled() const noexcept {
    return std::holds_alternative<SampledDensity>(form_);
  }
  std::size_t sample_count() const;

  /// Density value at parameter t. Sampled densities only answer on grid
  /// nodes of their own grid or a subgrid of it.
  double operator()(double t) const;

  /// Fourier coefficient of order m, when the density has a closed form
  /// (lebesgue, geometric, fourier). Throws InvalidArgument for samples.
  Complex fourier_coefficient(long m) const;

  /// Throws InvalidMeasure when the invariants fail.
  void validate() const;

 private:
  Form form_;
};

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

/// z(t) = center + radius e^{i(t + rotation)}.
struct CircleCurve {
  Complex center{0.0, 0.0};
  double radius = 1.0;
  double rotation = 0.0;
};

/// z(t) = center + e^{i rotation} (a cos t + i b sin t).
struct EllipseCurve {
  Complex center{0.0, 0.0};
  double semi_a = 1.0;
  double semi_b = 1.0;
  double rotation = 0.0;
};

class CurveFamily {
 public:
  using Shape = std::variant<CircleCurve, EllipseCurve>;

  CurveFamily() = default;
  CurveFamily(CircleCurve c) : shape_(c) {}
  CurveFamily(EllipseCurve e) : shape_(e) {}

  const Shape& shape() const noexcept { return shape_; }

  Complex point(double t) const;
  /// Largest |z| over the curve.
  double max_modulus() const;
  /// True when z lies strictly inside the bounded component.
  bool encloses(Complex z) const;
  /// True when z lies on the curve up to `tol` (relative to curve size).
  bool contains(Complex z, double tol = 1e-10) const;
  /// Image under z -> alpha z + beta; stays in the same family.
  CurveFamily mapped(Complex alpha, Complex beta) const;
  bool same_as(const CurveFamily& other, double tol = 1e-12) const;

  void validate() const;

 private:
  Shape shape_ = CircleCurve{};
};

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

struct CircleDensity {
  DensitySpec density;
  double radius = 1.0;
  Complex center{0.0, 0.0};
  double rotation = 0.0;

  CurveFamily curve() const { return CircleCurve{center, radius, rotation}; }
};

struct CurveDensity {
  CurveFamily curve;
  DensitySpec density;
};

struct Atom {
  Complex point;
  double weight = 0.0;
};

/// Finite truncation of a (possibly countable) atomic measure. The user
/// declares the mass left out and a radius bounding every atom, including the
/// omitted ones; moments carry error_bound = tail * R^{j+k}.
struct AtomicMeasure {
  std::vector<Atom> atoms;
  double declared_tail_mass = 0.0;
  double support_radius_bound = 1.0;
};

struct SumPart;

struct SumMeasure {
  std::vector<SumPart> parts;
};

class MeasureSpec {
 public:
  using Variant = std::variant<CircleDensity, CurveDensity, AtomicMeasure, SumMeasure>;

  MeasureSpec() : v_(CircleDensity{}) {}
  MeasureSpec(CircleDensity m) : v_(std::move(m)) {}
  MeasureSpec(CurveDensity m) : v_(std::move(m)) {}
  MeasureSpec(AtomicMeasure m) : v_(std::move(m)) {}
  MeasureSpec(SumMeasure m) : v_(std::move(m)) {}

  const Variant& variant() const noexcept { return v_; }

  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&v_);
  }

  /// Throws InvalidMeasure (or NegativeDensity for sampled data).
  void validate() const;

 private:
  Variant v_;
};

struct SumPart {
  MeasureSpec measure;
  double scale = 1.0;
};

/// Lebesgue measure d\theta / 2\pi on the unit circle.
MeasureSpec lebesgue_circle();

// ---------------------------------------------------------------------------
// Quadrature and moments
// ---------------------------------------------------------------------------

struct QuadratureConfig {
  std::size_t initial_nodes = 512;
  std::size_t max_nodes = 65536;
  double rel_tol = 1e-12;

  void validate() const;
};

struct MomentValue {
  Complex value{0.0, 0.0};
  double error_bound = 0.0;
  bool converged = true;
};

/// Lower-triangular block of moments c_{j,k}, k <= j, first_row <= j <= last_row.
class MomentTriangle {
 public:
  MomentTriangle(std::size_t first_row, std::size_t last_row);

  std::size_t first_row() const noexcept { return first_; }
  std::size_t last_row() const noexcept { return last_; }

  MomentValue& at(std::size_t j, std::size_t k);
  const MomentValue& at(std::size_t j, std::size_t k) const;

  std::size_t nonconverged() const;
  double max_error_bound() const;

 private:
  std::size_t offset(std::size_t j, std::size_t k) const;

  std::size_t first_;
  std::size_t last_;
  std::vector<MomentValue> data_;
};

/// \int z^j \bar{z}^k d\mu. Density variants use the composite trapezoid rule
/// on the uniform parameter grid, doubling nodes until successive values agree
/// to rel_tol * (|value| + mass); a value that never settles comes back with
/// converged = false and the last difference as error bound.
MomentValue moment(const MeasureSpec& m, std::size_t j, std::size_t k,
                   const QuadratureConfig& q = {});

/// All c_{j,k} with k <= j for first_row <= j <= last_row, sharing quadrature
/// nodes across entries. Each entry follows the same stopping rule as moment().
MomentTriangle moment_rows(const MeasureSpec& m, std::size_t first_row,
                           std::size_t last_row, const QuadratureConfig& q = {});

double total_mass(const MeasureSpec& m, const QuadratureConfig& q = {});

/// Image measure under z -> alpha z + beta. Mass is preserved.
MeasureSpec pushforward(const MeasureSpec& m, Complex alpha, Complex beta);

/// Total weight of atoms located within `tol` of z (scales applied in sums).
double atom_mass_at(const MeasureSpec& m, Complex z, double tol = 1e-12);

}  // namespace momidx
