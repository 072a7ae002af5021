#pragma once

// Inverse link functions and the constants k_mu / c_mu that enter every
// estimator and confidence radius.

#include <cmath>
#include <string_view>

#include "glbandit/errors.hpp"

namespace glb {

enum class LinkKind { logistic, identity };

/// Inverse link mu together with its derivative. Value type; cheap to copy.
class LinkFunction {
 public:
  constexpr explicit LinkFunction(LinkKind kind = LinkKind::logistic) noexcept : kind_(kind) {}

  static constexpr LinkFunction logistic() noexcept { return LinkFunction(LinkKind::logistic); }
  static constexpr LinkFunction identity() noexcept { return LinkFunction(LinkKind::identity); }

  constexpr LinkKind kind() const noexcept { return kind_; }

  double evaluate(double x) const noexcept {
    if (kind_ == LinkKind::identity) return x;
    // split on sign so exp never overflows
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }

  double derivative(double x) const noexcept {
    if (kind_ == LinkKind::identity) return 1.0;
    const double s = evaluate(x);
    return s * (1.0 - s);
  }

  double operator()(double x) const noexcept { return evaluate(x); }

  std::string_view name() const noexcept {
    return kind_ == LinkKind::logistic ? "logistic" : "identity";
  }

  friend constexpr bool operator==(LinkFunction, LinkFunction) = default;

 private:
  LinkKind kind_;
};

/// Global Lipschitz constant of mu.
inline double compute_k_mu(const LinkFunction& link) noexcept {
  return link.kind() == LinkKind::logistic ? 0.25 : 1.0;
}

namespace detail {

/// Golden-section minimization of f on [lo, hi] for a unimodal f.
template <typename F>
double golden_section_min(F&& f, double lo, double hi, double tol = 1e-12) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // endpoints matter when the minimum sits on the boundary
  double best = f(0.5 * (a + b));
  best = std::min(best, f(lo));
  best = std::min(best, f(hi));
  return best;
}

}  // namespace detail

/// Infimum of mu' over |x| <= L*S.
///
/// The logistic derivative is symmetric and decreasing in |x|, so the minimum
/// is attained at x = L*S. Other links fall back to golden-section search on
/// [0, L*S], which assumes the derivative is symmetric and unimodal.
inline double compute_c_mu(const LinkFunction& link, double L, double S) {
  if (!(L >= 0.0) || !(S >= 0.0)) throw InvalidArgument("compute_c_mu: L and S must be non-negative");
  const double radius = L * S;
  double c_mu = 0.0;
  switch (link.kind()) {
    case LinkKind::logistic:
      c_mu = link.derivative(radius);
      break;
    case LinkKind::identity:
      c_mu = 1.0;
      break;
    default:
      c_mu = detail::golden_section_min([&](double x) { return link.derivative(x); }, 0.0, radius);
  }
  if (!(c_mu > 0.0)) throw InvalidArgument("compute_c_mu: mu' vanishes on the admissible region");
  return c_mu;
}

/// Problem-level bounds and link constants shared by estimators and policies.
struct GlmConstants {
  double k_mu = 0.25;
  double c_mu = 0.0;
  double L = 1.0;
  double S = 1.0;
  double m = 1.0;

  static GlmConstants make(const LinkFunction& link, double L, double S, double m) {
    if (!(L > 0.0) || !(S > 0.0) || !(m > 0.0))
      throw InvalidArgument("GlmConstants: L, S and m must be positive");
    return GlmConstants{compute_k_mu(link), compute_c_mu(link, L, S), L, S, m};
  }
};

}  // namespace glb
