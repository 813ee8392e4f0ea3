#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "deptrail/errors.hpp"

namespace deptrail {

/// l2-regularized collaborative representation dictionary: training vectors
/// as columns, a dense class label 1..C per column, and the regularization
/// weight. The Gram matrix is cached; the Tikhonov term depends on the query
/// so the full system cannot be pre-factored.
class CrcModel {
 public:
  CrcModel(Eigen::MatrixXd dictionary, std::vector<int> labels, double mu)
      : dictionary_(std::move(dictionary)), labels_(std::move(labels)), mu_(mu) {
    require(mu_ > 0.0, ErrorCode::InvalidArgument, "mu must be positive");
    require(dictionary_.cols() > 0, ErrorCode::EmptyInput, "dictionary has no columns");
    require(static_cast<std::size_t>(dictionary_.cols()) == labels_.size(),
            ErrorCode::LengthMismatch, "one label per dictionary column required");
    num_classes_ = *std::max_element(labels_.begin(), labels_.end());
    std::set<int> seen(labels_.begin(), labels_.end());
    require(*seen.begin() >= 1, ErrorCode::LabelOutOfRange, "labels must be >= 1");
    require(static_cast<int>(seen.size()) == num_classes_, ErrorCode::LabelOutOfRange,
            "every class id in 1..C must appear at least once");
    gram_ = dictionary_.transpose() * dictionary_;
  }

  const Eigen::MatrixXd& dictionary() const { return dictionary_; }
  const std::vector<int>& labels() const { return labels_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  double mu() const { return mu_; }
  int num_classes() const { return num_classes_; }
  int feature_dim() const { return static_cast<int>(dictionary_.rows()); }
  int size() const { return static_cast<int>(dictionary_.cols()); }

 private:
  Eigen::MatrixXd dictionary_;  // D_f x N
  std::vector<int> labels_;     // N entries in 1..C
  double mu_ = 1e-4;
  int num_classes_ = 0;
  Eigen::MatrixXd gram_;        // cached P^T P
};

struct CrcDecision {
  int predicted_class = 0;
  std::vector<double> residuals;   // q_j, index j-1
  Eigen::VectorXd coefficients;    // beta-hat
  bool ridge_fallback = false;     // solver needed the epsilon ridge
};

/// Diagonal of the query-dependent Tikhonov matrix: A_ii = ||s - p_i||_2,
/// so training vectors far from the query are penalized harder.
inline Eigen::VectorXd build_tikhonov(const Eigen::VectorXd& query, const CrcModel& model) {
  require(query.size() == model.dictionary().rows(), ErrorCode::LengthMismatch,
          "query length does not match dictionary");
  Eigen::VectorXd diag(model.size());
  for (int i = 0; i < model.size(); ++i)
    diag(i) = (query - model.dictionary().col(i)).norm();
  return diag;
}

inline constexpr double kNormalEquationTolerance = 1e-8;

/// Ridge solve of the collaborative representation:
///   beta = (P^T P + mu A^T A)^{-1} P^T s
/// via an LDLT factorization of the symmetric system. The result must satisfy
/// the normal equations to 1e-8 relative; if the factorization degenerates, a
/// 1e-10 ridge is added once and the fallback is reported to the caller.
inline Eigen::VectorXd solve_coefficients(const CrcModel& model, const Eigen::VectorXd& query,
                                          const Eigen::VectorXd& tikhonov_diag,
                                          bool* used_fallback = nullptr) {
  require(query.size() == model.dictionary().rows(), ErrorCode::LengthMismatch,
          "query length does not match dictionary");
  require(tikhonov_diag.size() == model.size(), ErrorCode::LengthMismatch,
          "tikhonov diagonal needs one entry per column");
  if (used_fallback) *used_fallback = false;

  const Eigen::VectorXd rhs = model.dictionary().transpose() * query;
  Eigen::MatrixXd system = model.gram();
  system.diagonal() += model.mu() * tikhonov_diag.array().square().matrix();

  const auto residual_of = [&](const Eigen::VectorXd& beta) {
    const double scale = std::max(rhs.norm(), 1e-300);
    return (system * beta - rhs).norm() / scale;
  };

  Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd beta = ldlt.solve(rhs);
    if (residual_of(beta) <= kNormalEquationTolerance) return beta;
  }

  // epsilon ridge fallback
  system.diagonal().array() += 1e-10;
  Eigen::LDLT<Eigen::MatrixXd> retry(system);
  require(retry.info() == Eigen::Success, ErrorCode::SingularSystem,
          "regularized system could not be factored");
  Eigen::VectorXd beta = retry.solve(rhs);
  require(residual_of(beta) <= kNormalEquationTolerance, ErrorCode::SingularSystem,
          "normal-equation residual above tolerance");
  if (used_fallback) *used_fallback = true;
  return beta;
}

/// Per-class residual decision: q_j = ||s - P_j beta_j||_2 with beta
/// partitioned by class; smallest class id wins ties.
inline CrcDecision classify(const CrcModel& model, const Eigen::VectorXd& query) {
  CrcDecision decision;
  const Eigen::VectorXd tikhonov = build_tikhonov(query, model);
  decision.coefficients =
      solve_coefficients(model, query, tikhonov, &decision.ridge_fallback);

  decision.residuals.assign(static_cast<std::size_t>(model.num_classes()), 0.0);
  for (int j = 1; j <= model.num_classes(); ++j) {
    Eigen::VectorXd reconstruction = Eigen::VectorXd::Zero(model.feature_dim());
    for (int i = 0; i < model.size(); ++i) {
      if (model.labels()[i] == j)
        reconstruction += model.dictionary().col(i) * decision.coefficients(i);
    }
    decision.residuals[j - 1] = (query - reconstruction).norm();
  }

  int best = 1;
  for (int j = 2; j <= model.num_classes(); ++j)
    if (decision.residuals[j - 1] < decision.residuals[best - 1]) best = j;
  decision.predicted_class = best;
  return decision;
}

}  // namespace deptrail
