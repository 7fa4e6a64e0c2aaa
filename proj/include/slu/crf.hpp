#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "slu/autodiff.hpp"

namespace slu {

// Linear-chain CRF scores. transitions(i, j) scores tag i followed by tag j.
struct CrfParams {
  Eigen::MatrixXd transitions;  // K x K
  Eigen::RowVectorXd start;     // K
  Eigen::RowVectorXd end;       // K

  static CrfParams zeros(int num_tags);
  int num_tags() const { return static_cast<int>(transitions.rows()); }
};

// start[y0] + sum_t emissions(t, y_t) + sum_t transitions(y_{t-1}, y_t) + end[y_last].
double crf_path_score(const Eigen::MatrixXd& emissions, const CrfParams& crf, std::span<const int> tags);

// log sum over all tag paths of exp(path score), by the forward algorithm.
double crf_log_partition(const Eigen::MatrixXd& emissions, const CrfParams& crf);

// Highest-scoring path; ties resolve to the lowest tag index.
std::vector<int> crf_viterbi(const Eigen::MatrixXd& emissions, const CrfParams& crf);

struct CrfMarginals {
  Eigen::MatrixXd unary;                 // N x K, P(y_t = k)
  std::vector<Eigen::MatrixXd> pairwise;  // N-1 of K x K, P(y_t = i, y_{t+1} = j)
  double log_partition = 0.0;
};

CrfMarginals crf_marginals(const Eigen::MatrixXd& emissions, const CrfParams& crf);

namespace ad {

// log Z - score(tags) as a differentiable 1x1 node. start and end are 1 x K.
Var crf_nll(Var emissions, Var transitions, Var start, Var end, std::span<const int> tags);

}  // namespace ad

}  // namespace slu
