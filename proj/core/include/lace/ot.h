/*
 * Copyright 2026 The LACE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Entropic optimal transport between uniformly or arbitrarily weighted point
// sets. Costs are Euclidean distances; the solver is a log-domain Sinkhorn
// with epsilon annealing.

#ifndef LACE_OT_H_
#define LACE_OT_H_

#include <Eigen/Core>

namespace lace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct OtConfig {
  // Entropic regularization strength, in cost units. 0.05 corresponds to an
  // inverse-temperature of 20.
  double epsilon = 0.05;
  int max_iters = 1000;
  // Maximum absolute marginal violation accepted as converged.
  double convergence_tol = 1e-6;

  // Throws kInvalidInput when a field is out of range.
  void Validate() const;
};

// Nonnegative, finite m x n cost matrix.
class CostMatrix {
 public:
  explicit CostMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const {
    return entries_(i, j);
  }

 private:
  Matrix entries_;
};

// Source (row) and target (column) probability vectors.
class MarginalPair {
 public:
  MarginalPair(Vector a, Vector b);

  static MarginalPair Uniform(Eigen::Index m, Eigen::Index n);

  const Vector& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  Vector a_;
  Vector b_;
};

class TransportPlan {
 public:
  TransportPlan(Matrix entries, MarginalPair marginals, int iterations,
                double violation);

  const Matrix& entries() const { return entries_; }
  const MarginalPair& marginals() const { return marginals_; }
  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  // Sinkhorn iterations spent; 0 for closed-form plans.
  int iterations() const { return iterations_; }
  // max(|rowsum - a|, |colsum - b|) measured on the returned entries.
  double marginal_violation() const { return violation_; }

 private:
  Matrix entries_;
  MarginalPair marginals_;
  int iterations_;
  double violation_;
};

// Row-to-row Euclidean distances. Throws kInvalidInput on a column-count
// mismatch.
CostMatrix PairwiseL2(const Matrix& a, const Matrix& b);

// Entropic OT plan for (cost, marginals, cfg.epsilon). Throws
// NonConvergenceError when max_iters is exhausted before the marginal
// violation drops to cfg.convergence_tol.
TransportPlan Sinkhorn(const CostMatrix& cost, const MarginalPair& marginals,
                       const OtConfig& cfg);

// Frobenius inner product <C, Q>.
double TransportCost(const CostMatrix& cost, const TransportPlan& plan);

// Entropic Wasserstein cost between two uniformly weighted point sets.
double Wasserstein(const Matrix& a, const Matrix& b, const OtConfig& cfg);

// Largest absolute deviation of the plan's row/column sums from marginals.
double MarginalViolation(const Matrix& plan, const MarginalPair& marginals);

}  // namespace lace

#endif  // LACE_OT_H_
