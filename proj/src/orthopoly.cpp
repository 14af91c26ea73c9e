#include "momidx/orthopoly.hpp"

#include <cmath>

#include "momidx/errors.hpp"

namespace momidx {

double KernelValue::reciprocal() const { return std::exp(-log_value); }

OrthonormalBasis orthonormal_coeffs(const CholeskyFactor& f) {
  const std::size_t n = f.size();
  OrthonormalBasis b;
  b.order = f.order();
  b.rows = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  // Column c of L^{-1}: forward substitution against e_c.
  for (std::size_t c = 0; c < n; ++c) {
    const auto cc = static_cast<Eigen::Index>(c);
    b.rows(cc, cc) = 1.0 / f(c, c).real();
    for (std::size_t i = c + 1; i < n; ++i) {
      Complex s = 0.0;
      for (std::size_t t = c; t < i; ++t) s -= f(i, t) * b.rows(static_cast<Eigen::Index>(t), cc);
      b.rows(static_cast<Eigen::Index>(i), cc) = s / f(i, i).real();
    }
  }
  return b;
}

ComplexVector eval_phi(const OrthonormalBasis& b, Complex z) {
  const auto n = b.rows.rows();
  ComplexVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex acc = 0.0;
    for (Eigen::Index j = i; j >= 0; --j) acc = acc * z + b.rows(i, j);
    out(i) = acc;
  }
  return out;
}

KernelValue kernel_diag(const CholeskyFactor& f, Complex z0) {
  const std::size_t n = f.order();
  const double scale = std::max(1.0, std::abs(z0));
  const double log_scale = std::log(scale);
  if (static_cast<double>(n) * log_scale > kMaxLogPower) throw Overflow(n);

  // k_j / scale^n = (z0/scale)^j * scale^{-(n-j)}
  const Complex unit = z0 / scale;
  ComplexVector rhs(static_cast<Eigen::Index>(n + 1));
  Complex p = 1.0;
  for (std::size_t j = 0; j <= n; ++j) {
    rhs(static_cast<Eigen::Index>(j)) = p * std::exp(-static_cast<double>(n - j) * log_scale);
    p *= unit;
  }
  const ComplexVector x = forward_solve(f, rhs);

  KernelValue out;
  out.z0 = z0;
  out.order = n;
  const double shift = 2.0 * static_cast<double>(n) * log_scale;
  out.log_value = shift + std::log(x.squaredNorm());
  out.value = std::exp(out.log_value);
  const double tail = std::norm(x(static_cast<Eigen::Index>(n)));
  out.phi_tail = tail > 0.0 ? std::exp(shift + std::log(tail)) : 0.0;
  return out;
}

std::vector<double> monic_norms(const CholeskyFactor& f) {
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f.pivot(k);
  return out;
}

KernelAccumulator::KernelAccumulator(Complex z0)
    : z0_(z0),
      scale_(std::max(1.0, std::abs(z0))),
      log_scale_(std::log(std::max(1.0, std::abs(z0)))),
      unit_power_(1.0, 0.0) {}

KernelValue KernelAccumulator::advance(const CholeskyFactor& f) {
  const std::size_t n = scaled_.size();
  if (f.order() < n) throw InvalidArgument("factor has not reached the next kernel order");
  if (static_cast<double>(n) * log_scale_ > kMaxLogPower) throw Overflow(n);

  if (n > 0 && scale_ > 1.0) {
    for (auto& x : scaled_) x /= scale_;
    scaled_norm2_ /= scale_ * scale_;
  }
  Complex s = unit_power_;
  for (std::size_t t = 0; t < n; ++t) s -= f(n, t) * scaled_[t];
  const Complex xn = s / f(n, n).real();
  scaled_.push_back(xn);
  scaled_norm2_ += std::norm(xn);
  unit_power_ *= z0_ / scale_;

  KernelValue out;
  out.z0 = z0_;
  out.order = n;
  const double shift = 2.0 * static_cast<double>(n) * log_scale_;
  out.log_value = shift + std::log(scaled_norm2_);
  out.value = std::exp(out.log_value);
  const double tail = std::norm(xn);
  out.phi_tail = tail > 0.0 ? std::exp(shift + std::log(tail)) : 0.0;
  return out;
}

}  // namespace momidx
