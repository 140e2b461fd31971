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

#ifndef VFMH_METRICS_BOUND_HPP_
#define VFMH_METRICS_BOUND_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "vfmh/core/tensor.hpp"

namespace vfmh::metrics {

// Constants of the convergence recursion
//   b_{t+1} = (1 - mu * sigma2 * eta) * b_t + 0.5 * eta^2 * L * G.
struct BoundParams {
  double smoothness = 0.0;        // L
  double strong_convexity = 0.0;  // mu
  double grad_bound = 0.0;        // G, bound on ||grad f||^2
  double sigma2 = 1.0;
  double learning_rate = 0.0;  // eta
  double initial_gap = 0.0;    // b_0 = f(theta_0) - f(theta*)

  double contraction() const {
    return 1.0 - strong_convexity * sigma2 * learning_rate;
  }
  // True when 0 < mu * sigma2 * eta < 1.
  bool informative() const;
  // Limit of b_t: 0.5 * eta^2 * L * G / (mu * sigma2 * eta).
  double fixed_point() const;
  // Throws NumericError on negative or non-finite constants, eta <= 0, or
  // mu > L.
  void validate() const;
};

// b_0 .. b_steps.
std::vector<double> bound_trajectory(const BoundParams& params,
                                     std::size_t steps);

class ConvexProblem {
 public:
  virtual ~ConvexProblem() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> theta) const = 0;
  virtual void gradient(std::span<const double> theta,
                        std::span<double> grad) const = 0;
  // Upper bound on the Hessian spectrum.
  virtual double smoothness() const = 0;
  // Lower bound on the Hessian spectrum.
  virtual double strong_convexity() const = 0;
};

// f(theta) = 0.5 * sum_i a_i * theta_i^2.
class QuadraticProblem : public ConvexProblem {
 public:
  explicit QuadraticProblem(std::vector<double> curvature);
  std::size_t dim() const override { return curvature_.size(); }
  double value(std::span<const double> theta) const override;
  void gradient(std::span<const double> theta,
                std::span<double> grad) const override;
  double smoothness() const override;
  double strong_convexity() const override;

 private:
  std::vector<double> curvature_;
};

// Mean softmax cross-entropy of a dense layer on fixed features plus
// 0.5 * l2 * ||theta||^2. theta holds W (classes x D, row-major) then b.
class SoftmaxRegression : public ConvexProblem {
 public:
  SoftmaxRegression(Tensor features, std::vector<int> labels,
                    std::size_t classes, double l2);
  std::size_t dim() const override { return classes_ * (width_ + 1); }
  double value(std::span<const double> theta) const override;
  void gradient(std::span<const double> theta,
                std::span<double> grad) const override;
  // 0.5 * lambda_max([X, 1]^T [X, 1] / N) + l2.
  double smoothness() const override;
  double strong_convexity() const override { return l2_; }

  // [X, 1]^T [X, 1] / N, (D+1) x (D+1).
  Tensor gram() const;
  std::size_t classes() const { return classes_; }
  std::size_t width() const { return width_; }

 private:
  double evaluate(std::span<const double> theta, std::span<double> grad) const;

  Tensor features_;
  std::vector<int> labels_;
  std::size_t classes_;
  std::size_t width_;
  double l2_;
  double smoothness_;
};

// Largest eigenvalue of a symmetric positive semi-definite matrix.
double top_eigenvalue(const Tensor& sym, std::size_t max_iters = 100000,
                      double tol = 1e-13);

struct Optimum {
  std::vector<double> theta;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
};

// Gradient descent at step 1/L until ||grad|| < tol.
Optimum solve_optimum(const ConvexProblem& problem,
                      std::vector<double> start, double tol = 1e-10,
                      std::size_t max_iters = 5000000);

// L and mu from the problem, sigma2 = 1 for exact gradients, G as
// `safety` times the largest ||grad f||^2 along `calibration_steps` of
// gradient descent at `eta` from theta0, b_0 = f(theta0) - f_star.
BoundParams estimate_constants(const ConvexProblem& problem,
                               std::span<const double> theta0, double eta,
                               std::size_t calibration_steps, double f_star,
                               double safety = 1.5);

struct BoundCheck {
  BoundParams params;
  double optimum_value = 0.0;
  std::vector<double> gaps;    // f(theta_t) - f*, t = 0..steps
  std::vector<double> bounds;  // b_t
  std::size_t violations = 0;

  std::size_t checked() const { return gaps.size(); }
  double violation_rate() const;
};

// Runs `steps` full-batch SGD updates at `eta` from theta0 and compares
// each gap against the recursion.
BoundCheck check_bound(const ConvexProblem& problem,
                       std::span<const double> theta0, double eta,
                       std::size_t steps);

}  // namespace vfmh::metrics

#endif  // VFMH_METRICS_BOUND_HPP_
