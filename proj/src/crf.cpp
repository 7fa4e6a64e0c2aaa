#include "slu/crf.hpp"

#include <cmath>
#include <limits>

#include "slu/error.hpp"

namespace slu {

namespace {

void check_shapes(const Eigen::MatrixXd& emissions, const CrfParams& crf) {
  const auto k = crf.transitions.rows();
  if (emissions.rows() < 1) throw DimensionError("CRF needs at least one position");
  if (crf.transitions.cols() != k || emissions.cols() != k || crf.start.size() != k || crf.end.size() != k)
    throw DimensionError("CRF emission/transition shapes disagree");
}

double log_sum_exp(const Eigen::ArrayXd& v) {
  const double mx = v.maxCoeff();
  return mx + std::log((v - mx).exp().sum());
}

// alpha(t, j): log total score of prefixes ending in tag j at t.
Eigen::MatrixXd forward_table(const Eigen::MatrixXd& e, const CrfParams& crf) {
  const auto n = e.rows();
  const auto k = e.cols();
  Eigen::MatrixXd alpha(n, k);
  alpha.row(0) = crf.start + e.row(0);
  for (Eigen::Index t = 1; t < n; ++t)
    for (Eigen::Index j = 0; j < k; ++j)
      alpha(t, j) = log_sum_exp(alpha.row(t - 1).transpose().array() + crf.transitions.col(j).array()) + e(t, j);
  return alpha;
}

// beta(t, i): log total score of suffixes after tag i at t, end score included.
Eigen::MatrixXd backward_table(const Eigen::MatrixXd& e, const CrfParams& crf) {
  const auto n = e.rows();
  const auto k = e.cols();
  Eigen::MatrixXd beta(n, k);
  beta.row(n - 1) = crf.end;
  for (Eigen::Index t = n - 2; t >= 0; --t)
    for (Eigen::Index i = 0; i < k; ++i)
      beta(t, i) = log_sum_exp(crf.transitions.row(i).transpose().array() + e.row(t + 1).transpose().array() +
                               beta.row(t + 1).transpose().array());
  return beta;
}

}  // namespace

CrfParams CrfParams::zeros(int num_tags) {
  return {Eigen::MatrixXd::Zero(num_tags, num_tags), Eigen::RowVectorXd::Zero(num_tags),
          Eigen::RowVectorXd::Zero(num_tags)};
}

double crf_path_score(const Eigen::MatrixXd& emissions, const CrfParams& crf, std::span<const int> tags) {
  check_shapes(emissions, crf);
  if (static_cast<Eigen::Index>(tags.size()) != emissions.rows())
    throw DimensionError("tag path length differs from emission length");
  for (int y : tags)
    if (y < 0 || y >= crf.num_tags()) throw ValidationError("tag id " + std::to_string(y) + " out of range");
  double s = crf.start(tags[0]) + crf.end(tags.back());
  for (std::size_t t = 0; t < tags.size(); ++t) {
    s += emissions(static_cast<Eigen::Index>(t), tags[t]);
    if (t > 0) s += crf.transitions(tags[t - 1], tags[t]);
  }
  return s;
}

double crf_log_partition(const Eigen::MatrixXd& emissions, const CrfParams& crf) {
  check_shapes(emissions, crf);
  const auto alpha = forward_table(emissions, crf);
  return log_sum_exp(alpha.row(alpha.rows() - 1).transpose().array() + crf.end.transpose().array());
}

std::vector<int> crf_viterbi(const Eigen::MatrixXd& emissions, const CrfParams& crf) {
  check_shapes(emissions, crf);
  const auto n = emissions.rows();
  const auto k = emissions.cols();
  Eigen::RowVectorXd score = crf.start + emissions.row(0);
  std::vector<int> history(static_cast<std::size_t>((n - 1) * k));
  for (Eigen::Index t = 1; t < n; ++t) {
    Eigen::RowVectorXd next(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int best_i = 0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const double s = score(i) + crf.transitions(i, j);
        if (s > best) {
          best = s;
          best_i = static_cast<int>(i);
        }
      }
      next(j) = best + emissions(t, j);
      history[static_cast<std::size_t>((t - 1) * k + j)] = best_i;
    }
    score = next;
  }
  score += crf.end;
  int last = 0;
  for (Eigen::Index j = 1; j < k; ++j)
    if (score(j) > score(last)) last = static_cast<int>(j);

  std::vector<int> path(static_cast<std::size_t>(n));
  path.back() = last;
  for (Eigen::Index t = n - 2; t >= 0; --t)
    path[static_cast<std::size_t>(t)] = history[static_cast<std::size_t>(t * k + path[static_cast<std::size_t>(t + 1)])];
  return path;
}

CrfMarginals crf_marginals(const Eigen::MatrixXd& emissions, const CrfParams& crf) {
  check_shapes(emissions, crf);
  const auto n = emissions.rows();
  const auto k = emissions.cols();
  const auto alpha = forward_table(emissions, crf);
  const auto beta = backward_table(emissions, crf);
  CrfMarginals m;
  m.log_partition = log_sum_exp(alpha.row(n - 1).transpose().array() + crf.end.transpose().array());
  m.unary = ((alpha + beta).array() - m.log_partition).exp().matrix();
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    Eigen::MatrixXd p(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        p(i, j) = std::exp(alpha(t, i) + crf.transitions(i, j) + emissions(t + 1, j) + beta(t + 1, j) -
                           m.log_partition);
    m.pairwise.push_back(std::move(p));
  }
  return m;
}

namespace ad {

Var crf_nll(Var emissions, Var transitions, Var start, Var end, std::span<const int> tags) {
  CrfParams crf{transitions.value(), start.value().row(0), end.value().row(0)};
  const double score = crf_path_score(emissions.value(), crf, tags);
  auto marg = crf_marginals(emissions.value(), crf);
  Mat out(1, 1);
  out(0, 0) = marg.log_partition - score;

  auto& t = emissions.tape();
  const int ie = emissions.id(), it = transitions.id(), is = start.id(), iend = end.id();
  std::vector<int> path(tags.begin(), tags.end());
  return t.push(
      std::move(out), {ie, it, is, iend},
      [ie, it, is, iend, path = std::move(path), marg = std::move(marg)](Tape& t, int self) {
        const double g = t.grad_ref(self)(0, 0);
        const auto n = static_cast<Eigen::Index>(path.size());
        if (t.requires_grad(ie)) {
          Mat d = marg.unary;
          for (Eigen::Index p = 0; p < n; ++p) d(p, path[static_cast<std::size_t>(p)]) -= 1.0;
          t.grad_ref(ie) += g * d;
        }
        if (t.requires_grad(it)) {
          Mat d = Mat::Zero(marg.unary.cols(), marg.unary.cols());
          for (const auto& pw : marg.pairwise) d += pw;
          for (Eigen::Index p = 1; p < n; ++p) d(path[static_cast<std::size_t>(p - 1)], path[static_cast<std::size_t>(p)]) -= 1.0;
          t.grad_ref(it) += g * d;
        }
        if (t.requires_grad(is)) {
          Mat d = marg.unary.row(0);
          d(0, path.front()) -= 1.0;
          t.grad_ref(is) += g * d;
        }
        if (t.requires_grad(iend)) {
          Mat d = marg.unary.row(n - 1);
          d(0, path.back()) -= 1.0;
          t.grad_ref(iend) += g * d;
        }
      },
      "crf_nll");
}

}  // namespace ad

}  // namespace slu
