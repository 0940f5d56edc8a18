#pragma once

#include <cmath>
#include <stdexcept>

namespace itr {

enum class KernelKind { Epanechnikov, Uniform, Gaussian };

namespace detail {

template <typename Scalar>
Scalar normal_pdf(Scalar u) {
  return std::exp(Scalar(-0.5) * u * u) /
         std::sqrt(Scalar(2) * Scalar(M_PI));
}

template <typename Scalar>
Scalar normal_cdf(Scalar u) {
  return Scalar(0.5) * std::erfc(-u / std::sqrt(Scalar(2)));
}

}  // namespace detail

/// Kernel density K(u). Symmetric, nonnegative, integrates to one.
template <typename Scalar>
Scalar kernel_density(KernelKind kind, Scalar u) {
  switch (kind) {
    case KernelKind::Epanechnikov:
      return (u < Scalar(-1) || u > Scalar(1))
                 ? Scalar(0)
                 : Scalar(0.75) * (Scalar(1) - u * u);
    case KernelKind::Uniform:
      return (u < Scalar(-1) || u > Scalar(1)) ? Scalar(0) : Scalar(0.5);
    case KernelKind::Gaussian:
      return detail::normal_pdf(u);
  }
  return Scalar(0);
}

/// Kernel CDF, integral of the density up to u.
template <typename Scalar>
Scalar kernel_cdf(KernelKind kind, Scalar u) {
  switch (kind) {
    case KernelKind::Epanechnikov: {
      if (u <= Scalar(-1)) return Scalar(0);
      if (u >= Scalar(1)) return Scalar(1);
      return Scalar(0.5) + Scalar(0.75) * (u - u * u * u / Scalar(3));
    }
    case KernelKind::Uniform: {
      if (u <= Scalar(-1)) return Scalar(0);
      if (u >= Scalar(1)) return Scalar(1);
      return (u + Scalar(1)) / Scalar(2);
    }
    case KernelKind::Gaussian:
      return detail::normal_cdf(u);
  }
  return Scalar(0);
}

template <typename Scalar>
Scalar kernel_sup(KernelKind kind) {
  switch (kind) {
    case KernelKind::Epanechnikov:
      return Scalar(0.75);
    case KernelKind::Uniform:
      return Scalar(0.5);
    case KernelKind::Gaussian:
      return Scalar(1) / std::sqrt(Scalar(2) * Scalar(M_PI));
  }
  return Scalar(0);
}

/// Hinge loss convolved with a scaled kernel, phi_h(t) = int phi(u) K_h(u-t) du,
/// together with its first two derivatives in closed form.
///
/// Writing s = (1-t)/h, the loss is h * (s*F(s) - G(s)) with F the kernel CDF
/// and G(s) the partial first moment; for kernels supported on [-1,1] this
/// reduces to 1-t for t <= 1-h and 0 for t >= 1+h, with a polynomial bridge in
/// between.
template <typename Scalar = double>
class SmoothedLoss {
 public:
  SmoothedLoss(KernelKind kernel, Scalar bandwidth)
      : kernel_(kernel), h_(bandwidth) {
    if (!(h_ > Scalar(0)))
      throw std::invalid_argument("SmoothedLoss: bandwidth must be positive");
  }

  KernelKind kernel() const { return kernel_; }
  Scalar bandwidth() const { return h_; }

  Scalar loss(Scalar t) const {
    const Scalar s = (Scalar(1) - t) / h_;
    switch (kernel_) {
      case KernelKind::Epanechnikov: {
        if (s >= Scalar(1)) return Scalar(1) - t;
        if (s <= Scalar(-1)) return Scalar(0);
        const Scalar s2 = s * s;
        return h_ * (Scalar(3) * s2 / Scalar(8) - s2 * s2 / Scalar(16) +
                     s / Scalar(2) + Scalar(3) / Scalar(16));
      }
      case KernelKind::Uniform: {
        if (s >= Scalar(1)) return Scalar(1) - t;
        if (s <= Scalar(-1)) return Scalar(0);
        const Scalar sp = s + Scalar(1);
        return h_ * sp * sp / Scalar(4);
      }
      case KernelKind::Gaussian:
        // s*Phi(s) + phi_N(s), scaled by h; tends to 1-t as s -> +inf and
        // underflows cleanly to 0 as s -> -inf.
        return h_ * (s * detail::normal_cdf(s) + detail::normal_pdf(s));
    }
    return Scalar(0);
  }

  /// phi_h'(t) = -F((1-t)/h), in [-1, 0].
  Scalar deriv(Scalar t) const {
    return -kernel_cdf(kernel_, (Scalar(1) - t) / h_);
  }

  /// phi_h''(t) = K((1-t)/h)/h >= 0.
  Scalar second_deriv(Scalar t) const {
    return kernel_density(kernel_, (Scalar(1) - t) / h_) / h_;
  }

  /// Lipschitz constant of phi_h', sup K / h.
  Scalar lipschitz_constant() const { return kernel_sup<Scalar>(kernel_) / h_; }

 private:
  KernelKind kernel_;
  Scalar h_;
};

}  // namespace itr
