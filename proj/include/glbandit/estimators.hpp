#pragma once

// Penalized maximum-likelihood estimation for generalized linear bandits:
// sliding-window and discounted data containers, the damped Newton solver
// for the (weighted) score equation, and the constrained "projection" of the
// unconstrained estimate onto the S-ball.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>

#include "glbandit/errors.hpp"
#include "glbandit/link.hpp"
#include "glbandit/linalg.hpp"

namespace glb {

/// Read-only view of weighted observations: actions are the columns of a
/// d x n block, with matching reward and weight vectors.
struct SampleView {
  Eigen::Map<const Matrix> actions;
  Eigen::Map<const Vector> rewards;
  Eigen::Map<const Vector> weights;

  Eigen::Index dim() const noexcept { return actions.rows(); }
  Eigen::Index size() const noexcept { return actions.cols(); }
};

/// FIFO of (action, reward, weight) triples stored contiguously so that score
/// evaluations run over a single dense block.
class SampleBuffer {
 public:
  explicit SampleBuffer(Eigen::Index dim, Eigen::Index capacity = 16)
      : dim_(dim), actions_(dim, std::max<Eigen::Index>(capacity, 1)),
        rewards_(std::max<Eigen::Index>(capacity, 1)), weights_(std::max<Eigen::Index>(capacity, 1)) {}

  Eigen::Index dim() const noexcept { return dim_; }
  Eigen::Index size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  void push_back(const Vector& action, double reward, double weight) {
    if (head_ + size_ == actions_.cols()) make_room();
    const Eigen::Index slot = head_ + size_;
    actions_.col(slot) = action;
    rewards_[slot] = reward;
    weights_[slot] = weight;
    ++size_;
  }

  void pop_front() noexcept {
    if (size_ == 0) return;
    ++head_;
    if (--size_ == 0) head_ = 0;
  }

  Vector action(Eigen::Index i) const { return actions_.col(head_ + i); }
  double reward(Eigen::Index i) const { return rewards_[head_ + i]; }
  double weight(Eigen::Index i) const { return weights_[head_ + i]; }

  void scale_weights(double factor) { weights_.segment(head_, size_) *= factor; }

  SampleView view() const {
    return SampleView{Eigen::Map<const Matrix>(actions_.data() + head_ * dim_, dim_, size_),
                      Eigen::Map<const Vector>(rewards_.data() + head_, size_),
                      Eigen::Map<const Vector>(weights_.data() + head_, size_)};
  }

 private:
  void make_room() {
    Eigen::Index cap = actions_.cols();
    if (2 * size_ > cap) cap *= 2;
    Matrix a(dim_, cap);
    Vector r(cap), w(cap);
    a.leftCols(size_) = actions_.middleCols(head_, size_);
    r.head(size_) = rewards_.segment(head_, size_);
    w.head(size_) = weights_.segment(head_, size_);
    actions_.swap(a);
    rewards_.swap(r);
    weights_.swap(w);
    head_ = 0;
  }

  Eigen::Index dim_;
  Matrix actions_;
  Vector rewards_;
  Vector weights_;
  Eigen::Index head_ = 0;
  Eigen::Index size_ = 0;
};

namespace detail {

inline void check_observation(const Vector& action, double reward, Eigen::Index dim, double L, double m) {
  if (action.size() != dim) throw InvalidArgument("observation: action dimension mismatch");
  if (!action.allFinite()) throw InvalidArgument("observation: non-finite action");
  if (action.norm() > L * (1.0 + 1e-9)) throw InvalidArgument("observation: action norm exceeds L");
  if (!(reward >= 0.0 && reward <= m)) throw InvalidArgument("observation: reward outside [0, m]");
}

/// mu(z) and mu'(z) element-wise.
inline void link_arrays(const LinkFunction& link, const Eigen::ArrayXd& z, Eigen::ArrayXd& mu, Eigen::ArrayXd& mu_dot) {
  if (link.kind() == LinkKind::identity) {
    mu = z;
    mu_dot = Eigen::ArrayXd::Ones(z.size());
    return;
  }
  // 1/(1+e^{-z}); e^{-z} = inf gives 0, never NaN
  mu = (1.0 + (-z).exp()).inverse();
  mu_dot = mu * (1.0 - mu);
}

}  // namespace detail

/// Sliding-window container: the tau most recent pairs and
/// V = sum A A^T + (lambda/c_mu) I over the window.
class SlidingWindowState {
 public:
  static constexpr std::size_t unbounded = std::numeric_limits<std::size_t>::max();

  SlidingWindowState(Eigen::Index dim, std::size_t tau, double lambda_over_cmu,
                     double L = std::numeric_limits<double>::infinity(),
                     double m = std::numeric_limits<double>::infinity())
      : tau_(tau), lambda_over_cmu_(lambda_over_cmu), L_(L), m_(m),
        buffer_(dim, tau == unbounded ? 64 : static_cast<Eigen::Index>(std::min<std::size_t>(2 * tau, 1 << 20))),
        V_(lambda_over_cmu * Matrix::Identity(dim, dim)) {
    if (dim < 1) throw InvalidArgument("SlidingWindowState: dimension must be positive");
    if (tau < 1) throw InvalidArgument("SlidingWindowState: window must be positive");
    if (!(lambda_over_cmu > 0.0)) throw InvalidArgument("SlidingWindowState: lambda/c_mu must be positive");
  }

  /// Append a pair; evicts the oldest pair once more than tau are held.
  void update(const Vector& action, double reward) {
    detail::check_observation(action, reward, dim(), L_, m_);
    buffer_.push_back(action, reward, 1.0);
    V_.noalias() += action * action.transpose();
    if (static_cast<std::size_t>(buffer_.size()) > tau_) {
      const Vector old = buffer_.action(0);
      V_.noalias() -= old * old.transpose();
      buffer_.pop_front();
    }
  }

  Eigen::Index dim() const noexcept { return buffer_.dim(); }
  std::size_t tau() const noexcept { return tau_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(buffer_.size()); }
  double lambda_over_cmu() const noexcept { return lambda_over_cmu_; }
  const Matrix& V() const noexcept { return V_; }
  const SampleBuffer& buffer() const noexcept { return buffer_; }
  SampleView view() const { return buffer_.view(); }

  /// V recomputed from the buffer contents.
  Matrix batch_V() const {
    const SampleView v = view();
    return v.actions * v.actions.transpose() + lambda_over_cmu_ * Matrix::Identity(dim(), dim());
  }

 private:
  std::size_t tau_;
  double lambda_over_cmu_;
  double L_;
  double m_;
  SampleBuffer buffer_;
  Matrix V_;
};

/// Discounted container: history with weights gamma^{age}, and the two
/// design matrices W (weights gamma^age) and W~ (weights gamma^{2 age}).
class DiscountedState {
 public:
  /// History entries whose weight falls below this are dropped from score evaluations.
  static constexpr double prune_weight = 1e-12;

  DiscountedState(Eigen::Index dim, double gamma, double lambda_over_cmu,
                  double L = std::numeric_limits<double>::infinity(),
                  double m = std::numeric_limits<double>::infinity())
      : gamma_(gamma), lambda_over_cmu_(lambda_over_cmu), L_(L), m_(m), buffer_(dim, 64),
        W_(lambda_over_cmu * Matrix::Identity(dim, dim)), W_tilde_(W_) {
    if (dim < 1) throw InvalidArgument("DiscountedState: dimension must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("DiscountedState: gamma must lie in (0, 1)");
    if (!(lambda_over_cmu > 0.0)) throw InvalidArgument("DiscountedState: lambda/c_mu must be positive");
  }

  void update(const Vector& action, double reward) {
    detail::check_observation(action, reward, dim(), L_, m_);
    const Eigen::Index d = dim();
    const Matrix outer = action * action.transpose();
    const double g2 = gamma_ * gamma_;
    W_ = outer + gamma_ * W_ + lambda_over_cmu_ * (1.0 - gamma_) * Matrix::Identity(d, d);
    W_tilde_ = outer + g2 * W_tilde_ + lambda_over_cmu_ * (1.0 - g2) * Matrix::Identity(d, d);

    buffer_.scale_weights(gamma_);
    while (!buffer_.empty() && buffer_.weight(0) < prune_weight) buffer_.pop_front();
    buffer_.push_back(action, reward, 1.0);
    ++rounds_;
  }

  Eigen::Index dim() const noexcept { return buffer_.dim(); }
  double gamma() const noexcept { return gamma_; }
  double lambda_over_cmu() const noexcept { return lambda_over_cmu_; }
  std::size_t rounds() const noexcept { return rounds_; }
  /// Number of retained (unpruned) history entries.
  std::size_t size() const noexcept { return static_cast<std::size_t>(buffer_.size()); }
  const Matrix& W() const noexcept { return W_; }
  const Matrix& W_tilde() const noexcept { return W_tilde_; }
  const SampleBuffer& buffer() const noexcept { return buffer_; }
  SampleView view() const { return buffer_.view(); }

 private:
  double gamma_;
  double lambda_over_cmu_;
  double L_;
  double m_;
  SampleBuffer buffer_;
  Matrix W_;
  Matrix W_tilde_;
  std::size_t rounds_ = 0;
};

/// Value of g, or of the score, together with the Jacobian of g.
///
/// g(theta) = sum w_s mu(A_s^T theta) A_s + lambda theta and
/// J(theta) = sum w_s mu'(A_s^T theta) A_s A_s^T + lambda I, which is also the
/// negated Hessian of the penalized log-likelihood.
struct GEvaluation {
  Vector g;
  Matrix jacobian;
};

/// g(theta) alone.
inline Vector g_function(const Vector& theta, const SampleView& data, const LinkFunction& link, double lambda) {
  Vector g = lambda * theta;
  if (data.size() == 0) return g;
  const Eigen::ArrayXd z = (data.actions.transpose() * theta).array();
  Eigen::ArrayXd mu, mu_dot;
  detail::link_arrays(link, z, mu, mu_dot);
  g.noalias() += data.actions * (data.weights.array() * mu).matrix();
  return g;
}

inline GEvaluation evaluate_g(const Vector& theta, const SampleView& data, const LinkFunction& link, double lambda) {
  const Eigen::Index d = theta.size();
  GEvaluation out{lambda * theta, lambda * Matrix::Identity(d, d)};
  if (data.size() == 0) return out;
  const Eigen::ArrayXd z = (data.actions.transpose() * theta).array();
  Eigen::ArrayXd mu, mu_dot;
  detail::link_arrays(link, z, mu, mu_dot);
  const Eigen::ArrayXd& w = data.weights.array();
  out.g.noalias() += data.actions * (w * mu).matrix();
  out.jacobian.noalias() += data.actions * (w * mu_dot).matrix().asDiagonal() * data.actions.transpose();
  return out;
}

/// Weighted reward sum sum w_s X_s A_s; equals g(theta_hat) at the MLE.
inline Vector weighted_reward_sum(const SampleView& data) {
  if (data.size() == 0) return Vector::Zero(data.dim());
  return data.actions * (data.weights.array() * data.rewards.array()).matrix();
}

/// Score of the penalized log-likelihood: sum w_s (X_s - mu(A_s^T theta)) A_s - lambda theta.
inline Vector score(const Vector& theta, const SampleView& data, const LinkFunction& link, double lambda) {
  return weighted_reward_sum(data) - g_function(theta, data, link, lambda);
}

struct MleFit {
  Vector theta;
  double residual_norm = 0.0;
  int iterations = 0;
};

struct NewtonOptions {
  int max_iterations = 100;
  /// Stop once ||score|| <= tolerance * max(1, ||sum w X A||).
  double tolerance = 1e-11;
  /// Largest residual (same scale) accepted when no further decrease is possible.
  double accept_tolerance = 1e-10;
  int max_halvings = 60;
};

/// Unique root of the weighted penalized score equation by damped Newton.
///
/// Each step solves J(theta) p = score(theta) with J SPD; the step is halved
/// until the score norm decreases. `start` is a warm start; an empty or
/// mis-sized start falls back to zero.
inline MleFit solve_mle(const SampleView& data, const LinkFunction& link, double lambda,
                        const Vector& start = Vector(), const NewtonOptions& opt = {}) {
  if (!(lambda > 0.0)) throw NonConvergence("solve_mle: lambda must be positive");
  const Eigen::Index d = data.dim();
  Vector theta = (start.size() == d && start.allFinite()) ? start : Vector::Zero(d);

  const Vector target = weighted_reward_sum(data);
  const double scale = std::max(1.0, target.norm());

  GEvaluation ev = evaluate_g(theta, data, link, lambda);
  Vector s = target - ev.g;
  double res = s.norm();
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (res <= opt.tolerance * scale) return MleFit{theta, res, it};
    Eigen::LLT<Matrix> llt(ev.jacobian);
    if (llt.info() != Eigen::Success) throw NonConvergence("solve_mle: Hessian not positive definite");
    const Vector step = llt.solve(s);

    double alpha = 1.0;
    bool improved = false;
    for (int h = 0; h < opt.max_halvings; ++h, alpha *= 0.5) {
      const Vector trial = theta + alpha * step;
      GEvaluation trial_ev = evaluate_g(trial, data, link, lambda);
      Vector trial_s = target - trial_ev.g;
      const double trial_res = trial_s.norm();
      if (trial_res < res) {
        theta = trial;
        ev = std::move(trial_ev);
        s = std::move(trial_s);
        res = trial_res;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (res <= opt.accept_tolerance * scale) return MleFit{theta, res, it};
  throw NonConvergence("solve_mle: score residual " + std::to_string(res) + " after " + std::to_string(it) +
                       " Newton iterations");
}

inline MleFit solve_mle_sw(const SlidingWindowState& state, const LinkFunction& link, double lambda,
                           const Vector& start = Vector()) {
  return solve_mle(state.view(), link, lambda, start);
}

inline MleFit solve_mle_discounted(const DiscountedState& state, const LinkFunction& link, double lambda,
                                   const Vector& start = Vector()) {
  return solve_mle(state.view(), link, lambda, start);
}

namespace detail {

/// argmin x^T Q x - 2 b^T x subject to ||x|| <= radius, Q SPD.
inline Vector ball_constrained_quadratic(const Matrix& Q, const Vector& b, double radius) {
  Eigen::LLT<Matrix> llt(Q);
  if (llt.info() == Eigen::Success) {
    Vector x = llt.solve(b);
    if (x.norm() <= radius) return x;
  }
  // On the boundary: x(nu) = (Q + nu I)^{-1} b with ||x(nu)|| = radius.
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
  const Vector evals = es.eigenvalues().cwiseMax(0.0);
  const Vector beta = es.eigenvectors().transpose() * b;
  auto norm_at = [&](double nu) { return (beta.array() / (evals.array() + nu)).matrix().norm(); };
  double lo = 0.0;
  double hi = beta.norm() / radius + 1e-300;
  while (norm_at(hi) > radius) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (norm_at(mid) > radius ? lo : hi) = mid;
  }
  Vector x = es.eigenvectors() * (beta.array() / (evals.array() + hi)).matrix();
  const double n = x.norm();
  if (n > radius) x *= radius / n;
  return x;
}

/// Norm of the projected gradient for minimization over the ball ||x|| <= radius.
inline double projected_gradient_norm(const Vector& x, const Vector& grad, double radius) {
  const double n = x.norm();
  if (n < radius * (1.0 - 1e-12)) return grad.norm();
  const Vector normal = x / n;
  const double outward = grad.dot(normal);
  // a negative outward component means the gradient pushes outside: the
  // constraint absorbs it
  if (outward < 0.0) return (grad - outward * normal).norm();
  return grad.norm();
}

}  // namespace detail

struct ProjectionResult {
  Vector theta;
  /// ||g(theta_hat) - g(theta)||^2 in the metric's inverse norm.
  double objective = 0.0;
  double projected_gradient = 0.0;
  bool projected = false;
  bool converged = true;
  int iterations = 0;
};

struct ProjectionOptions {
  int max_iterations = 200;
  /// Stationarity: projected-gradient norm <= tolerance * max(1, ||grad f(theta_0)||).
  double tolerance = 1e-8;
};

/// Feasible point minimizing f(theta) = ||g(theta_hat) - g(theta)||^2_{M^{-1}}
/// over ||theta|| <= S.
///
/// Interior estimates are returned unchanged. Otherwise each iteration
/// linearizes g, solves the ball-constrained least-squares subproblem exactly
/// and backtracks on f along the segment toward its solution; when that makes
/// no progress a projected-gradient step is tried instead. f may be
/// nonconvex; the first stationary point reached is returned. After
/// max_iterations the best iterate is returned with converged = false.
inline ProjectionResult project_theta(const Vector& theta_hat, const SampleView& data, const LinkFunction& link,
                                      double lambda, double S, const Matrix& metric,
                                      const ProjectionOptions& opt = {}) {
  if (!(S > 0.0)) throw InvalidArgument("project_theta: S must be positive");
  if (theta_hat.norm() <= S) return ProjectionResult{theta_hat, 0.0, 0.0, false, true, 0};

  const SpdFactor M(metric);
  const Vector target = g_function(theta_hat, data, link, lambda);

  struct Point {
    Vector theta;
    GEvaluation ev;
    Vector u;  // M^{-1} r
    Vector r;  // g(theta_hat) - g(theta)
    double f;
  };
  auto make_point = [&](Vector theta) {
    GEvaluation ev = evaluate_g(theta, data, link, lambda);
    Vector r = target - ev.g;
    Vector u = M.solve(r);
    const double f = r.dot(u);
    return Point{std::move(theta), std::move(ev), std::move(u), std::move(r), f};
  };

  Point cur = make_point(S * theta_hat / theta_hat.norm());
  Vector grad = -2.0 * cur.ev.jacobian * cur.u;
  const double tol = opt.tolerance * std::max(1.0, grad.norm());
  double pg = detail::projected_gradient_norm(cur.theta, grad, S);

  // Backtracking from `to` toward cur.theta, with a few ulps of slack in the
  // sufficient-decrease test so steps still register once f is flat to rounding.
  auto backtrack = [&](auto&& trial_at, double slope) -> bool {
    double alpha = 1.0;
    for (int h = 0; h < 60; ++h, alpha *= 0.5) {
      Point next = make_point(trial_at(alpha));
      if (next.f <= cur.f + 1e-4 * alpha * slope + 8.0 * std::numeric_limits<double>::epsilon() * cur.f &&
          !(next.f == cur.f && next.theta == cur.theta)) {
        cur = std::move(next);
        return true;
      }
    }
    return false;
  };
  auto onto_ball = [S](Vector v) {
    const double n = v.norm();
    if (n > S) v *= S / n;
    return v;
  };

  int it = 0;
  for (; it < opt.max_iterations && pg > tol; ++it) {
    const Matrix& J = cur.ev.jacobian;
    Matrix Q = J * M.solve_matrix(J);
    Q = 0.5 * (Q + Q.transpose());
    const Vector b = J * cur.u + Q * cur.theta;
    const Vector direction = detail::ball_constrained_quadratic(Q, b, S) - cur.theta;
    const double slope = grad.dot(direction);
    // Rounding level of f: r is a difference of two sums of size ~||g||.
    const double f_noise =
        64.0 * std::numeric_limits<double>::epsilon() * cur.u.norm() * (target.norm() + cur.ev.g.norm());
    bool moved = false;
    if (slope < 0.0 && -slope <= f_noise) {
      // the predicted decrease cannot be observed in f, so take the (tiny)
      // model step as is
      Point next = make_point(onto_ball(cur.theta + direction));
      moved = next.theta != cur.theta;
      if (moved) cur = std::move(next);
    } else if (slope < 0.0) {
      moved = backtrack([&](double a) { return onto_ball(cur.theta + a * direction); }, slope);
    }
    if (!moved) {
      // Gauss-Newton stalls at rounding level near the boundary; take a
      // projected-gradient step sized by the model curvature instead.
      const double step = 0.5 / std::max(Q.norm(), 1e-300);
      const Vector from = cur.theta;
      const Vector g0 = grad;
      moved = backtrack([&](double a) { return onto_ball(from - a * step * g0); },
                        -detail::projected_gradient_norm(from, g0, S) * detail::projected_gradient_norm(from, g0, S) * step);
    }
    if (!moved) break;
    grad = -2.0 * cur.ev.jacobian * cur.u;
    pg = detail::projected_gradient_norm(cur.theta, grad, S);
  }
  return ProjectionResult{cur.theta, cur.f, pg, true, pg <= tol, it};
}

/// Unconstrained estimate, its projection, and diagnostics.
struct MleSolution {
  Vector theta_hat;
  Vector theta_tilde;
  double residual_norm = 0.0;
  bool projected = false;
  bool projection_converged = true;
  int newton_iterations = 0;
};

/// Solve, then project onto the S-ball in the given metric when ||theta_hat|| > S.
inline MleSolution estimate(const SampleView& data, const LinkFunction& link, double lambda, double S,
                            const Matrix& projection_metric, const Vector& warm_start = Vector()) {
  MleFit fit = solve_mle(data, link, lambda, warm_start);
  MleSolution out;
  out.residual_norm = fit.residual_norm;
  out.newton_iterations = fit.iterations;
  if (fit.theta.norm() <= S) {
    out.theta_tilde = fit.theta;
  } else {
    ProjectionResult p = project_theta(fit.theta, data, link, lambda, S, projection_metric);
    out.theta_tilde = std::move(p.theta);
    out.projected = true;
    out.projection_converged = p.converged;
  }
  out.theta_hat = std::move(fit.theta);
  return out;
}

}  // namespace glb
