// Copyright 2026 The vfmh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfmh/metrics/bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vfmh/core/errors.hpp"
#include "vfmh/optim/optimizer.hpp"

namespace vfmh::metrics {
namespace {

double squared_norm(std::span<const double> v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw NumericError(std::string(what) + " must be finite and non-negative");
  }
}

}  // namespace

bool BoundParams::informative() const {
  const double rate = strong_convexity * sigma2 * learning_rate;
  return rate > 0.0 && rate < 1.0;
}

double BoundParams::fixed_point() const {
  const double rate = strong_convexity * sigma2 * learning_rate;
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * learning_rate * learning_rate * smoothness * grad_bound / rate;
}

void BoundParams::validate() const {
  require_finite(smoothness, "L");
  require_finite(strong_convexity, "mu");
  require_finite(grad_bound, "G");
  require_finite(sigma2, "sigma2");
  require_finite(initial_gap, "initial gap");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw NumericError("learning rate must be positive");
  }
  if (strong_convexity > smoothness) {
    throw NumericError("mu exceeds L");
  }
}

std::vector<double> bound_trajectory(const BoundParams& params,
                                     std::size_t steps) {
  params.validate();
  std::vector<double> b(steps + 1);
  b[0] = params.initial_gap;
  const double factor = params.contraction();
  const double drift = 0.5 * params.learning_rate * params.learning_rate *
                       params.smoothness * params.grad_bound;
  for (std::size_t t = 0; t < steps; ++t) b[t + 1] = factor * b[t] + drift;
  return b;
}

QuadraticProblem::QuadraticProblem(std::vector<double> curvature)
    : curvature_(std::move(curvature)) {
  if (curvature_.empty()) throw NumericError("quadratic needs a dimension");
  for (double a : curvature_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw NumericError("quadratic curvature must be positive");
    }
  }
}

double QuadraticProblem::value(std::span<const double> theta) const {
  double f = 0.0;
  for (std::size_t i = 0; i < curvature_.size(); ++i) {
    f += 0.5 * curvature_[i] * theta[i] * theta[i];
  }
  return f;
}

void QuadraticProblem::gradient(std::span<const double> theta,
                                std::span<double> grad) const {
  for (std::size_t i = 0; i < curvature_.size(); ++i) {
    grad[i] = curvature_[i] * theta[i];
  }
}

double QuadraticProblem::smoothness() const {
  return *std::max_element(curvature_.begin(), curvature_.end());
}

double QuadraticProblem::strong_convexity() const {
  return *std::min_element(curvature_.begin(), curvature_.end());
}

SoftmaxRegression::SoftmaxRegression(Tensor features, std::vector<int> labels,
                                     std::size_t classes, double l2)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      classes_(classes),
      width_(0),
      l2_(l2) {
  if (features_.rank() != 2 || features_.rows() != labels_.size() ||
      labels_.empty()) {
    throw ShapeError("softmax regression needs N x D features and N labels");
  }
  if (classes_ < 2) throw ShapeError("softmax regression needs two classes");
  if (!(l2_ >= 0.0)) throw NumericError("l2 must be non-negative");
  for (int y : labels_) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes_) {
      throw ShapeError("label out of range");
    }
  }
  width_ = features_.cols();
  smoothness_ = 0.5 * top_eigenvalue(gram()) + l2_;
}

Tensor SoftmaxRegression::gram() const {
  const std::size_t n = features_.rows();
  const std::size_t d = width_ + 1;
  Tensor g = Tensor::matrix(d, d);
  std::vector<double> x(d, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = features_.row(r);
    std::copy(row.begin(), row.end(), x.begin());
    for (std::size_t i = 0; i < d; ++i) {
      double* gi = g.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) gi[j] += x[i] * x[j];
    }
  }
  for (double& v : g.storage()) v /= static_cast<double>(n);
  return g;
}

double SoftmaxRegression::smoothness() const { return smoothness_; }

double SoftmaxRegression::evaluate(std::span<const double> theta,
                                   std::span<double> grad) const {
  const std::size_t n = features_.rows();
  const std::size_t m = classes_;
  const std::size_t d = width_;
  const double* w = theta.data();
  const double* b = theta.data() + m * d;
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> z(m);
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = features_.data() + r * d;
    for (std::size_t c = 0; c < m; ++c) {
      double acc = b[c];
      const double* wc = w + c * d;
      for (std::size_t i = 0; i < d; ++i) acc += wc[i] * x[i];
      z[c] = acc;
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < m; ++c) sum += std::exp(z[c] - zmax);
    const auto y = static_cast<std::size_t>(labels_[r]);
    loss += zmax + std::log(sum) - z[y];
    if (!want_grad) continue;
    for (std::size_t c = 0; c < m; ++c) {
      const double g = (std::exp(z[c] - zmax) / sum - (c == y ? 1.0 : 0.0)) /
                       static_cast<double>(n);
      double* gw = grad.data() + c * d;
      for (std::size_t i = 0; i < d; ++i) gw[i] += g * x[i];
      grad[m * d + c] += g;
    }
  }
  loss /= static_cast<double>(n);
  loss += 0.5 * l2_ * squared_norm(theta);
  if (want_grad) {
    for (std::size_t i = 0; i < theta.size(); ++i) grad[i] += l2_ * theta[i];
  }
  return loss;
}

double SoftmaxRegression::value(std::span<const double> theta) const {
  if (theta.size() != dim()) throw ShapeError("parameter length mismatch");
  return evaluate(theta, {});
}

void SoftmaxRegression::gradient(std::span<const double> theta,
                                 std::span<double> grad) const {
  if (theta.size() != dim() || grad.size() != dim()) {
    throw ShapeError("parameter length mismatch");
  }
  evaluate(theta, grad);
}

double top_eigenvalue(const Tensor& sym, std::size_t max_iters, double tol) {
  if (sym.rank() != 2 || sym.rows() != sym.cols() || sym.rows() == 0) {
    throw ShapeError("top_eigenvalue needs a square matrix");
  }
  const std::size_t d = sym.rows();
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  std::vector<double> next(d);
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      const double* row = sym.data() + i * d;
      next[i] = std::inner_product(row, row + d, v.begin(), 0.0);
    }
    const double norm = std::sqrt(squared_norm(next));
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < d; ++i) next[i] /= norm;
    const double prev = lambda;
    lambda = norm;
    v.swap(next);
    if (it > 0 && std::abs(lambda - prev) <= tol * lambda) break;
  }
  return lambda;
}

Optimum solve_optimum(const ConvexProblem& problem, std::vector<double> start,
                      double tol, std::size_t max_iters) {
  if (start.size() != problem.dim()) throw ShapeError("start length mismatch");
  const double step = 1.0 / problem.smoothness();
  Optimum out;
  out.theta = std::move(start);
  std::vector<double> g(problem.dim());
  for (out.iterations = 0; out.iterations < max_iters; ++out.iterations) {
    problem.gradient(out.theta, g);
    out.grad_norm = std::sqrt(squared_norm(g));
    if (out.grad_norm < tol) break;
    for (std::size_t i = 0; i < g.size(); ++i) out.theta[i] -= step * g[i];
  }
  if (out.grad_norm >= tol) {
    throw NumericError("optimum solve did not reach gradient norm " +
                       std::to_string(tol));
  }
  out.value = problem.value(out.theta);
  return out;
}

BoundParams estimate_constants(const ConvexProblem& problem,
                               std::span<const double> theta0, double eta,
                               std::size_t calibration_steps, double f_star,
                               double safety) {
  BoundParams p;
  p.smoothness = problem.smoothness();
  p.strong_convexity = problem.strong_convexity();
  p.sigma2 = 1.0;
  p.learning_rate = eta;
  p.initial_gap = std::max(0.0, problem.value(theta0) - f_star);
  std::vector<double> theta(theta0.begin(), theta0.end());
  std::vector<double> g(problem.dim());
  double max_sq = 0.0;
  for (std::size_t t = 0; t <= calibration_steps; ++t) {
    problem.gradient(theta, g);
    max_sq = std::max(max_sq, squared_norm(g));
    for (std::size_t i = 0; i < g.size(); ++i) theta[i] -= eta * g[i];
  }
  p.grad_bound = safety * max_sq;
  p.validate();
  return p;
}

double BoundCheck::violation_rate() const {
  return gaps.empty() ? 0.0
                      : static_cast<double>(violations) /
                            static_cast<double>(gaps.size());
}

BoundCheck check_bound(const ConvexProblem& problem,
                       std::span<const double> theta0, double eta,
                       std::size_t steps) {
  const Optimum opt =
      solve_optimum(problem, std::vector<double>(theta0.begin(), theta0.end()));
  BoundCheck out;
  out.optimum_value = opt.value;
  out.params = estimate_constants(problem, theta0, eta, steps, opt.value);
  out.bounds = bound_trajectory(out.params, steps);

  optim::OptimizerConfig sgd;
  sgd.kind = optim::Kind::kSgd;
  sgd.learning_rate = eta;
  std::vector<Tensor> params{
      Tensor({problem.dim()},
             std::vector<double>(theta0.begin(), theta0.end()))};
  std::vector<Tensor> grads{Tensor({problem.dim()})};
  optim::OptimizerState state = optim::init_state(sgd, params);
  // Rounding in f(theta_t) - f* is on the order of eps * |f*|.
  const double slack =
      8.0 * std::numeric_limits<double>::epsilon() * std::abs(opt.value);
  for (std::size_t t = 0; t <= steps; ++t) {
    const double gap = problem.value(params[0].values()) - opt.value;
    out.gaps.push_back(gap);
    if (gap > out.bounds[t] + slack) ++out.violations;
    if (t == steps) break;
    problem.gradient(params[0].values(), grads[0].storage());
    optim::step(sgd, state, params, grads);
  }
  return out;
}

}  // namespace vfmh::metrics
