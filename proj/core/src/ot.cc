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

#include "lace/ot.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "lace/error.h"

namespace lace {
namespace {

constexpr double kMarginalSumTol = 1e-9;
// Geometric factor applied to epsilon between annealing stages.
constexpr double kAnnealFactor = 0.5;
// Iterations spent at each intermediate epsilon before moving on.
constexpr int kStageIters = 8;
// Plain sweeps at the target epsilon before switching to Newton steps.
constexpr int kPlainSweeps = 16;
constexpr int kMaxLineSearchHalvings = 40;

void CheckProbabilityVector(const Vector& v, const char* name) {
  if (v.size() == 0) {
    throw Error(ErrorCode::kInvalidInput,
                std::string("marginal ") + name + " is empty");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw Error(ErrorCode::kInvalidInput,
                  std::string("marginal ") + name +
                      " has a negative or non-finite entry");
    }
  }
  if (std::abs(v.sum() - 1.0) > kMarginalSumTol) {
    std::ostringstream msg;
    msg << "marginal " << name << " sums to " << v.sum() << ", expected 1";
    throw Error(ErrorCode::kInvalidInput, msg.str());
  }
}

double LogSumExp(const double* values, Eigen::Index n) {
  double max_v = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) max_v = std::max(max_v, values[i]);
  if (!std::isfinite(max_v)) return max_v;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(values[i] - max_v);
  return max_v + std::log(acc);
}

// Dual potentials for the log-domain iteration. `f` pairs with rows, `g`
// with columns; plan_ij = exp((f_i + g_j - C_ij) / eps).
struct Potentials {
  Vector f;
  Vector g;
};

class LogSinkhorn {
 public:
  LogSinkhorn(const Matrix& cost, const MarginalPair& marginals)
      : cost_(cost),
        m_(cost.rows()),
        n_(cost.cols()),
        log_a_(marginals.a().array().log()),
        log_b_(marginals.b().array().log()),
        scratch_(std::max(m_, n_)) {}

  void UpdateColumns(Potentials& p, double eps) {
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (Eigen::Index i = 0; i < m_; ++i) {
        scratch_[i] = (p.f[i] - cost_(i, j)) / eps;
      }
      p.g[j] = eps * (log_b_[j] - LogSumExp(scratch_.data(), m_));
    }
  }

  void UpdateRows(Potentials& p, double eps) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      for (Eigen::Index j = 0; j < n_; ++j) {
        scratch_[j] = (p.g[j] - cost_(i, j)) / eps;
      }
      p.f[i] = eps * (log_a_[i] - LogSumExp(scratch_.data(), n_));
    }
  }

  // Semi-dual objective G(g) = sum_i a_i f_i(g) + sum_j b_j g_j, with f
  // recomputed from g. Leaves the row-optimal f in `p`.
  double SemiDual(Potentials& p, double eps) {
    UpdateRows(p, eps);
    return p.f.dot(log_a_.array().exp().matrix()) +
           p.g.dot(log_b_.array().exp().matrix());
  }

  // One damped Newton ascent step on the semi-dual in g (last coordinate
  // pinned, the objective is shift invariant). Expects f row-optimal for g
  // on entry and restores that on exit. Returns false when no progress
  // could be made.
  bool NewtonStep(Potentials& p, double eps) {
    const Matrix plan = Plan(p, eps);
    const Vector col_sums = plan.colwise().sum().transpose();
    const Vector grad = log_b_.array().exp().matrix() - col_sums;
    const Eigen::Index k = n_ - 1;
    Matrix hess = Matrix::Zero(k, k);
    const Vector a = log_a_.array().exp();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const auto row = plan.row(i).head(k);
      hess.noalias() -= row.transpose() * row / a[i];
    }
    hess.diagonal() += col_sums.head(k);
    hess.diagonal().array() += 1e-14 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
    const Eigen::LDLT<Matrix> ldlt(hess);
    if (ldlt.info() != Eigen::Success) return false;
    Vector step = Vector::Zero(n_);
    step.head(k) = ldlt.solve(eps * grad.head(k));
    if (!step.allFinite()) return false;

    const double base = p.f.dot(a) + p.g.dot(log_b_.array().exp().matrix());
    const double slope = grad.dot(step);
    const double base_grad = grad.cwiseAbs().maxCoeff();
    const Vector g0 = p.g;
    double t = 1.0;
    for (int h = 0; h < kMaxLineSearchHalvings; ++h, t *= 0.5) {
      p.g = g0 + t * step;
      const double value = SemiDual(p, eps);
      if (value >= base + 1e-4 * t * slope) return true;
      // Near the optimum G is flat to rounding; fall back to the residual.
      const Matrix trial = Plan(p, eps);
      const double trial_grad =
          (log_b_.array().exp().matrix() - trial.colwise().sum().transpose())
              .cwiseAbs()
              .maxCoeff();
      if (trial_grad < base_grad) return true;
    }
    p.g = g0;
    UpdateRows(p, eps);
    return false;
  }

  Matrix Plan(const Potentials& p, double eps) const {
    Matrix plan(m_, n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      for (Eigen::Index i = 0; i < m_; ++i) {
        plan(i, j) = std::exp((p.f[i] + p.g[j] - cost_(i, j)) / eps);
      }
    }
    return plan;
  }

 private:
  const Matrix& cost_;
  Eigen::Index m_;
  Eigen::Index n_;
  Vector log_a_;
  Vector log_b_;
  std::vector<double> scratch_;
};

}  // namespace

void OtConfig::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidInput, "ot epsilon must be positive");
  }
  if (max_iters < 1) {
    throw Error(ErrorCode::kInvalidInput, "ot max_iters must be >= 1");
  }
  if (!(convergence_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidInput,
                "ot convergence_tol must be positive");
  }
}

CostMatrix::CostMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.cols() == 0) {
    throw Error(ErrorCode::kInvalidInput, "cost matrix must be non-empty");
  }
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      const double c = entries_(i, j);
      if (!std::isfinite(c)) {
        throw Error(ErrorCode::kInvalidInput,
                    "cost matrix contains NaN or Inf");
      }
      if (c < 0.0) {
        throw Error(ErrorCode::kInvalidInput,
                    "cost matrix contains a negative entry");
      }
    }
  }
}

MarginalPair::MarginalPair(Vector a, Vector b)
    : a_(std::move(a)), b_(std::move(b)) {
  CheckProbabilityVector(a_, "a");
  CheckProbabilityVector(b_, "b");
}

MarginalPair MarginalPair::Uniform(Eigen::Index m, Eigen::Index n) {
  if (m < 1 || n < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "uniform marginals need positive sizes");
  }
  return MarginalPair(Vector::Constant(m, 1.0 / static_cast<double>(m)),
                      Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

TransportPlan::TransportPlan(Matrix entries, MarginalPair marginals,
                             int iterations, double violation)
    : entries_(std::move(entries)),
      marginals_(std::move(marginals)),
      iterations_(iterations),
      violation_(violation) {}

double MarginalViolation(const Matrix& plan, const MarginalPair& marginals) {
  const Vector rows = plan.rowwise().sum();
  const Vector cols = plan.colwise().sum().transpose();
  return std::max((rows - marginals.a()).cwiseAbs().maxCoeff(),
                  (cols - marginals.b()).cwiseAbs().maxCoeff());
}

CostMatrix PairwiseL2(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "pairwise_l2 dimension mismatch: left has " << a.cols()
        << " columns, right has " << b.cols();
    throw Error(ErrorCode::kInvalidInput, msg.str());
  }
  if (a.cols() < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "pairwise_l2 needs at least one column");
  }
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(i, j) = (a.row(i) - b.row(j)).norm();
    }
  }
  return CostMatrix(std::move(out));
}

TransportPlan Sinkhorn(const CostMatrix& cost, const MarginalPair& marginals,
                       const OtConfig& cfg) {
  cfg.Validate();
  const Eigen::Index m = cost.rows();
  const Eigen::Index n = cost.cols();
  if (marginals.a().size() != m || marginals.b().size() != n) {
    std::ostringstream msg;
    msg << "marginal sizes (" << marginals.a().size() << ", "
        << marginals.b().size() << ") do not match cost shape (" << m << ", "
        << n << ")";
    throw Error(ErrorCode::kInvalidInput, msg.str());
  }

  // One side is a single point: the product measure is the only feasible
  // plan.
  if (m == 1 || n == 1) {
    Matrix plan = marginals.a() * marginals.b().transpose();
    const double violation = MarginalViolation(plan, marginals);
    return TransportPlan(std::move(plan), marginals, 0, violation);
  }

  LogSinkhorn solver(cost.entries(), marginals);
  Potentials p{Vector::Zero(m), Vector::Zero(n)};

  int iters = 0;
  const double c_max = cost.entries().maxCoeff();
  double eps = std::max(cfg.epsilon, c_max);
  while (eps > cfg.epsilon) {
    for (int k = 0; k < kStageIters && iters < cfg.max_iters; ++k, ++iters) {
      solver.UpdateColumns(p, eps);
      solver.UpdateRows(p, eps);
    }
    eps = std::max(cfg.epsilon, eps * kAnnealFactor);
  }

  // Rows are exact after UpdateRows, so the column residual is the
  // violation. Sinkhorn sweeps take care of well-conditioned problems; the
  // slow tail (near-tied assignments at small epsilon) is finished with
  // Newton steps on the semi-dual.
  double violation = std::numeric_limits<double>::infinity();
  Matrix plan;
  int plain = 0;
  while (true) {
    plan = solver.Plan(p, cfg.epsilon);
    violation = MarginalViolation(plan, marginals);
    if (violation <= cfg.convergence_tol) break;
    if (iters >= cfg.max_iters) throw NonConvergenceError(violation, iters);
    if (plain < kPlainSweeps || !solver.NewtonStep(p, cfg.epsilon)) {
      solver.UpdateColumns(p, cfg.epsilon);
      solver.UpdateRows(p, cfg.epsilon);
      ++plain;
    }
    ++iters;
  }
  return TransportPlan(std::move(plan), marginals, iters, violation);
}

double TransportCost(const CostMatrix& cost, const TransportPlan& plan) {
  if (cost.rows() != plan.rows() || cost.cols() != plan.cols()) {
    std::ostringstream msg;
    msg << "transport_cost shape mismatch: cost is " << cost.rows() << "x"
        << cost.cols() << ", plan is " << plan.rows() << "x" << plan.cols();
    throw Error(ErrorCode::kInvalidInput, msg.str());
  }
  return cost.entries().cwiseProduct(plan.entries()).sum();
}

double Wasserstein(const Matrix& a, const Matrix& b, const OtConfig& cfg) {
  const CostMatrix cost = PairwiseL2(a, b);
  const TransportPlan plan =
      Sinkhorn(cost, MarginalPair::Uniform(a.rows(), b.rows()), cfg);
  return TransportCost(cost, plan);
}

}  // namespace lace
