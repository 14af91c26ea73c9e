#include "momidx/matrix_source.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "momidx/errors.hpp"
#include "momidx/similarity.hpp"

namespace momidx {

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::Moment: return "moment";
    case OracleKind::ToeplitzSymbol: return "toeplitz";
    case OracleKind::Explicit: return "explicit";
    case OracleKind::Conjugated: return "conjugated";
    case OracleKind::Sum: return "sum";
  }
  return "unknown";
}

namespace detail {

class OracleImpl {
 public:
  virtual ~OracleImpl() = default;

  virtual OracleKind kind() const = 0;
  virtual std::string description() const = 0;
  virtual Complex entry(std::size_t j, std::size_t k) const = 0;
  virtual HermitianSection section(std::size_t n) const = 0;
  virtual std::optional<std::size_t> max_order() const { return std::nullopt; }
  virtual double atom_mass_at(Complex, double) const { return 0.0; }
  virtual void collect_warnings(std::vector<std::string>&) const {}
  virtual double max_error_bound() const { return 0.0; }
};

}  // namespace detail

namespace {

using detail::OracleImpl;

class MomentImpl final : public OracleImpl {
 public:
  MomentImpl(MeasureSpec measure, QuadratureConfig quad)
      : measure_(std::move(measure)), quad_(quad) {
    measure_.validate();
    quad_.validate();
  }

  OracleKind kind() const override { return OracleKind::Moment; }
  std::string description() const override { return "moment matrix of a measure"; }

  Complex entry(std::size_t j, std::size_t k) const override {
    std::lock_guard lock(mutex_);
    ensure(std::max(j, k));
    if (j == k) return {rows_[j][j].real(), 0.0};
    return j > k ? rows_[j][k] : std::conj(rows_[k][j]);
  }

  HermitianSection section(std::size_t n) const override {
    std::lock_guard lock(mutex_);
    ensure(n);
    return HermitianSection::from_lower(n, [&](std::size_t j, std::size_t k) { return rows_[j][k]; });
  }

  double atom_mass_at(Complex z0, double tol) const override {
    return momidx::atom_mass_at(measure_, z0, tol);
  }

  void collect_warnings(std::vector<std::string>& out) const override {
    std::lock_guard lock(mutex_);
    if (nonconverged_ > 0) {
      std::ostringstream msg;
      msg << "moment quadrature did not reach rel_tol for " << nonconverged_
          << " entries (largest successive difference " << max_error_ << ")";
      out.push_back(msg.str());
    }
  }

  double max_error_bound() const override {
    std::lock_guard lock(mutex_);
    return max_error_;
  }

  const MeasureSpec& measure() const { return measure_; }

 private:
  // Caller holds mutex_. Rows are written once and never revised.
  void ensure(std::size_t n) const {
    if (rows_.size() > n) return;
    const std::size_t first = rows_.size();
    const MomentTriangle tri = moment_rows(measure_, first, n, quad_);
    for (std::size_t j = first; j <= n; ++j) {
      std::vector<Complex> row(j + 1);
      for (std::size_t k = 0; k <= j; ++k) {
        const MomentValue& v = tri.at(j, k);
        row[k] = v.value;
        if (!v.converged) ++nonconverged_;
        max_error_ = std::max(max_error_, v.error_bound);
      }
      rows_.push_back(std::move(row));
    }
  }

  MeasureSpec measure_;
  QuadratureConfig quad_;
  mutable std::mutex mutex_;
  mutable std::vector<std::vector<Complex>> rows_;
  mutable std::size_t nonconverged_ = 0;
  mutable double max_error_ = 0.0;
};

class ToeplitzImpl final : public OracleImpl {
 public:
  ToeplitzImpl(MatrixOracle::Coefficients coeff, std::string description)
      : coeff_(std::move(coeff)), description_(std::move(description)) {
    if (!coeff_) throw InvalidArgument("toeplitz oracle needs a coefficient function");
  }

  OracleKind kind() const override { return OracleKind::ToeplitzSymbol; }
  std::string description() const override { return description_; }

  Complex entry(std::size_t j, std::size_t k) const override {
    if (j == k) return {coeff_(0).real(), 0.0};
    if (j > k) return coeff_(static_cast<long>(j - k));
    return std::conj(coeff_(static_cast<long>(k - j)));
  }

  HermitianSection section(std::size_t n) const override {
    std::vector<Complex> c(n + 1);
    for (std::size_t m = 0; m <= n; ++m) c[m] = coeff_(static_cast<long>(m));
    return HermitianSection::from_lower(n, [&](std::size_t j, std::size_t k) { return c[j - k]; });
  }

 private:
  MatrixOracle::Coefficients coeff_;
  std::string description_;
};

class ExplicitImpl final : public OracleImpl {
 public:
  explicit ExplicitImpl(HermitianSection s) : s_(std::move(s)) {
    if (s_.empty()) throw InvalidArgument("explicit matrix is empty");
  }

  OracleKind kind() const override { return OracleKind::Explicit; }
  std::string description() const override {
    return "explicit matrix of order " + std::to_string(s_.order());
  }

  Complex entry(std::size_t j, std::size_t k) const override {
    if (j > s_.order() || k > s_.order())
      throw IndexOutOfRange("explicit matrix index (" + std::to_string(j) + "," + std::to_string(k) +
                            ") beyond order " + std::to_string(s_.order()));
    return s_(j, k);
  }

  HermitianSection section(std::size_t n) const override {
    if (n > s_.order())
      throw IndexOutOfRange("explicit matrix has order " + std::to_string(s_.order()) +
                            ", requested " + std::to_string(n));
    return s_.leading(n);
  }

  std::optional<std::size_t> max_order() const override { return s_.order(); }

 private:
  HermitianSection s_;
};

class ConjugatedImpl final : public OracleImpl {
 public:
  ConjugatedImpl(MatrixOracle inner, AffineMap map) : inner_(std::move(inner)), map_(map) {}

  OracleKind kind() const override { return OracleKind::Conjugated; }
  std::string description() const override { return "conjugated " + inner_.description(); }

  Complex entry(std::size_t j, std::size_t k) const override {
    return section(std::max(j, k))(j, k);
  }

  HermitianSection section(std::size_t n) const override {
    if (n > kMaxBinomialOrder)
      throw InvalidArgument("conjugation is limited to order " + std::to_string(kMaxBinomialOrder));
    return conjugate_section(inner_.section(n), map_);
  }

  std::optional<std::size_t> max_order() const override { return inner_.max_order(); }

  double atom_mass_at(Complex z0, double tol) const override {
    return inner_.atom_mass_at(map_.inverse()(z0), tol);
  }

  void collect_warnings(std::vector<std::string>& out) const override {
    const auto w = inner_.warnings();
    out.insert(out.end(), w.begin(), w.end());
  }

  double max_error_bound() const override { return inner_.max_error_bound(); }

 private:
  MatrixOracle inner_;
  AffineMap map_;
};

class SumImpl final : public OracleImpl {
 public:
  explicit SumImpl(std::vector<std::pair<MatrixOracle, double>> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw InvalidArgument("sum oracle needs at least one part");
    for (const auto& [o, scale] : parts_)
      if (!(scale > 0.0) || !std::isfinite(scale))
        throw InvalidArgument("sum oracle scales must be finite and positive");
  }

  OracleKind kind() const override { return OracleKind::Sum; }
  std::string description() const override {
    return "sum of " + std::to_string(parts_.size()) + " matrices";
  }

  Complex entry(std::size_t j, std::size_t k) const override {
    Complex s = 0.0;
    for (const auto& [o, scale] : parts_) s += scale * o.entry(j, k);
    return s;
  }

  HermitianSection section(std::size_t n) const override {
    std::vector<HermitianSection> sections;
    sections.reserve(parts_.size());
    for (const auto& [o, scale] : parts_) sections.push_back(o.section(n));
    return HermitianSection::from_lower(n, [&](std::size_t j, std::size_t k) {
      Complex s = 0.0;
      for (std::size_t p = 0; p < parts_.size(); ++p) s += parts_[p].second * sections[p](j, k);
      return s;
    });
  }

  std::optional<std::size_t> max_order() const override {
    std::optional<std::size_t> out;
    for (const auto& [o, scale] : parts_)
      if (auto m = o.max_order()) out = out ? std::min(*out, *m) : *m;
    return out;
  }

  double atom_mass_at(Complex z0, double tol) const override {
    double m = 0.0;
    for (const auto& [o, scale] : parts_) m += scale * o.atom_mass_at(z0, tol);
    return m;
  }

  void collect_warnings(std::vector<std::string>& out) const override {
    for (const auto& [o, scale] : parts_) {
      const auto w = o.warnings();
      out.insert(out.end(), w.begin(), w.end());
    }
  }

  double max_error_bound() const override {
    double e = 0.0;
    for (const auto& [o, scale] : parts_) e += scale * o.max_error_bound();
    return e;
  }

  const std::vector<std::pair<MatrixOracle, double>>& parts() const { return parts_; }

 private:
  std::vector<std::pair<MatrixOracle, double>> parts_;
};

}  // namespace

MatrixOracle MatrixOracle::moment(MeasureSpec measure, QuadratureConfig quad) {
  return MatrixOracle(std::make_shared<MomentImpl>(std::move(measure), quad));
}

MatrixOracle MatrixOracle::toeplitz(Coefficients coeff, std::string description) {
  return MatrixOracle(std::make_shared<ToeplitzImpl>(std::move(coeff), std::move(description)));
}

MatrixOracle MatrixOracle::toeplitz(const std::map<int, Complex>& coeffs) {
  const DensitySpec symbol = DensitySpec::fourier(coeffs);
  symbol.validate();
  return toeplitz(symbol);
}

MatrixOracle MatrixOracle::toeplitz(const DensitySpec& symbol) {
  symbol.validate();
  if (symbol.is_sampled())
    throw InvalidArgument("a Toeplitz symbol must have closed-form Fourier coefficients");
  return toeplitz([symbol](long m) { return symbol.fourier_coefficient(m); }, "toeplitz symbol");
}

MatrixOracle MatrixOracle::explicit_matrix(HermitianSection entries) {
  return MatrixOracle(std::make_shared<ExplicitImpl>(std::move(entries)));
}

MatrixOracle MatrixOracle::conjugated(MatrixOracle inner, Complex alpha, Complex beta) {
  return MatrixOracle(std::make_shared<ConjugatedImpl>(std::move(inner), AffineMap(alpha, beta)));
}

MatrixOracle MatrixOracle::sum(std::vector<std::pair<MatrixOracle, double>> parts) {
  return MatrixOracle(std::make_shared<SumImpl>(std::move(parts)));
}

OracleKind MatrixOracle::kind() const { return impl_->kind(); }
std::string MatrixOracle::description() const { return impl_->description(); }
Complex MatrixOracle::entry(std::size_t j, std::size_t k) const { return impl_->entry(j, k); }
HermitianSection MatrixOracle::section(std::size_t n) const { return impl_->section(n); }
std::optional<std::size_t> MatrixOracle::max_order() const { return impl_->max_order(); }

double MatrixOracle::atom_mass_at(Complex z0, double tol) const {
  return impl_->atom_mass_at(z0, tol);
}

const MeasureSpec* MatrixOracle::measure() const {
  if (const auto* m = dynamic_cast<const MomentImpl*>(impl_.get())) return &m->measure();
  return nullptr;
}

std::vector<std::pair<MatrixOracle, double>> MatrixOracle::parts() const {
  if (const auto* s = dynamic_cast<const SumImpl*>(impl_.get())) return s->parts();
  return {};
}

std::vector<std::string> MatrixOracle::warnings() const {
  std::vector<std::string> out;
  impl_->collect_warnings(out);
  return out;
}

double MatrixOracle::max_error_bound() const { return impl_->max_error_bound(); }

}  // namespace momidx
