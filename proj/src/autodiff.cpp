#include "slu/autodiff.hpp"

#include <cmath>

#include "slu/error.hpp"

namespace slu::ad {

const Mat& Var::value() const { return tape_->value(id_); }

Var Tape::variable(Mat value, std::string name) {
  nodes_.push_back({std::move(value), {}, true, {}, {}, std::move(name)});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Mat value, std::string name) {
  nodes_.push_back({std::move(value), {}, false, {}, {}, std::move(name)});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::push(Mat value, std::vector<int> parents, Backprop backprop, const char* op) {
  if (!value.allFinite()) throw NumericError(std::string("non-finite value produced by ") + op);
  bool needs = false;
  for (int p : parents) needs = needs || requires_grad(p);
  Node node{std::move(value), {}, needs, std::move(parents), needs ? std::move(backprop) : Backprop{}, op};
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Mat& Tape::grad_ref(int id) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0 && n.value.size() != 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols())
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Mat Tape::grad(Var v) const {
  const auto& n = nodes_[static_cast<std::size_t>(v.id())];
  if (n.grad.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var out) {
  if (out.rows() != 1 || out.cols() != 1) throw DimensionError("backward() needs a scalar output");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  grad_ref(out.id())(0, 0) = 1.0;
  for (int id = out.id(); id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || !n.backprop || n.grad.size() == 0) continue;
    if (!n.grad.allFinite()) throw NumericError("non-finite gradient at " + n.name);
    n.backprop(*this, id);
  }
}

namespace {

void check_same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw std::logic_error("vars live on different tapes");
}

// The parents captured by value in each backprop closure are node ids.
bool tracks(Tape& t, int id) { return t.requires_grad(id); }

}  // namespace

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  if (a.cols() != b.rows())
    throw DimensionError("matmul shape mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  auto& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() * b.value(), {ia, ib},
                [ia, ib](Tape& t, int self) {
                  const Mat& g = t.grad_ref(self);
                  if (tracks(t, ia)) t.grad_ref(ia).noalias() += g * t.value(ib).transpose();
                  if (tracks(t, ib)) t.grad_ref(ib).noalias() += t.value(ia).transpose() * g;
                },
                "matmul");
}

Var transpose(Var a) {
  auto& t = a.tape();
  const int ia = a.id();
  return t.push(a.value().transpose(), {ia},
                [ia](Tape& t, int self) { t.grad_ref(ia) += t.grad_ref(self).transpose(); }, "transpose");
}

Var add(Var a, Var b) {
  check_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("add shape mismatch");
  auto& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() + b.value(), {ia, ib},
                [ia, ib](Tape& t, int self) {
                  const Mat& g = t.grad_ref(self);
                  if (tracks(t, ia)) t.grad_ref(ia) += g;
                  if (tracks(t, ib)) t.grad_ref(ib) += g;
                },
                "add");
}

Var add_row(Var m, Var row) {
  check_same_tape(m, row);
  if (row.rows() != 1 || row.cols() != m.cols()) throw DimensionError("add_row shape mismatch");
  auto& t = m.tape();
  const int im = m.id(), ir = row.id();
  Mat out = m.value();
  out.rowwise() += row.value().row(0);
  return t.push(std::move(out), {im, ir},
                [im, ir](Tape& t, int self) {
                  const Mat& g = t.grad_ref(self);
                  if (tracks(t, im)) t.grad_ref(im) += g;
                  if (tracks(t, ir)) t.grad_ref(ir) += g.colwise().sum();
                },
                "add_row");
}

Var scale(Var a, double s) {
  auto& t = a.tape();
  const int ia = a.id();
  return t.push(a.value() * s, {ia}, [ia, s](Tape& t, int self) { t.grad_ref(ia) += s * t.grad_ref(self); },
                "scale");
}

Var tanh(Var a) {
  auto& t = a.tape();
  const int ia = a.id();
  return t.push(a.value().array().tanh().matrix(), {ia},
                [ia](Tape& t, int self) {
                  const auto y = t.value(self).array();
                  t.grad_ref(ia).array() += t.grad_ref(self).array() * (1.0 - y * y);
                },
                "tanh");
}

Var softmax_rows(Var a) {
  auto& t = a.tape();
  const int ia = a.id();
  Mat y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double mx = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - mx).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return t.push(std::move(y), {ia},
                [ia](Tape& t, int self) {
                  const Mat& y = t.value(self);
                  const Mat& g = t.grad_ref(self);
                  const Eigen::VectorXd dots = (g.array() * y.array()).rowwise().sum();
                  Mat d = g;
                  d.colwise() -= dots;
                  t.grad_ref(ia).array() += y.array() * d.array();
                },
                "softmax_rows");
}

Var concat_cols(Var a, Var b) {
  check_same_tape(a, b);
  if (a.rows() != b.rows()) throw DimensionError("concat_cols row mismatch");
  auto& t = a.tape();
  const int ia = a.id(), ib = b.id();
  const Eigen::Index ca = a.cols(), cb = b.cols();
  Mat out(a.rows(), ca + cb);
  out.leftCols(ca) = a.value();
  out.rightCols(cb) = b.value();
  return t.push(std::move(out), {ia, ib},
                [ia, ib, ca, cb](Tape& t, int self) {
                  const Mat& g = t.grad_ref(self);
                  if (tracks(t, ia)) t.grad_ref(ia) += g.leftCols(ca);
                  if (tracks(t, ib)) t.grad_ref(ib) += g.rightCols(cb);
                },
                "concat_cols");
}

Var concat_rows(Var a, Var b) {
  check_same_tape(a, b);
  if (a.cols() != b.cols()) throw DimensionError("concat_rows column mismatch");
  auto& t = a.tape();
  const int ia = a.id(), ib = b.id();
  const Eigen::Index ra = a.rows(), rb = b.rows();
  Mat out(ra + rb, a.cols());
  out.topRows(ra) = a.value();
  out.bottomRows(rb) = b.value();
  return t.push(std::move(out), {ia, ib},
                [ia, ib, ra, rb](Tape& t, int self) {
                  const Mat& g = t.grad_ref(self);
                  if (tracks(t, ia)) t.grad_ref(ia) += g.topRows(ra);
                  if (tracks(t, ib)) t.grad_ref(ib) += g.bottomRows(rb);
                },
                "concat_rows");
}

Var slice_rows(Var a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) throw DimensionError("slice_rows out of range");
  auto& t = a.tape();
  const int ia = a.id();
  return t.push(a.value().middleRows(begin, count), {ia},
                [ia, begin, count](Tape& t, int self) {
                  t.grad_ref(ia).middleRows(begin, count) += t.grad_ref(self);
                },
                "slice_rows");
}

Var gather_rows(Var table, std::span<const int> ids) {
  auto& t = table.tape();
  const int it = table.id();
  std::vector<int> idx(ids.begin(), ids.end());
  Mat out(static_cast<Eigen::Index>(idx.size()), table.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= table.rows())
      throw DimensionError("gather_rows index " + std::to_string(idx[i]) + " outside table of " +
                           std::to_string(table.rows()) + " rows");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(idx[i]);
  }
  return t.push(std::move(out), {it},
                [it, idx = std::move(idx)](Tape& t, int self) {
                  const Mat& g = t.grad_ref(self);
                  Mat& dt = t.grad_ref(it);
                  for (std::size_t i = 0; i < idx.size(); ++i) dt.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
                },
                "gather_rows");
}

Var mean_rows(Var a) {
  if (a.rows() == 0) throw DimensionError("mean_rows of an empty matrix");
  auto& t = a.tape();
  const int ia = a.id();
  const double inv = 1.0 / static_cast<double>(a.rows());
  return t.push(a.value().colwise().mean(), {ia},
                [ia, inv](Tape& t, int self) {
                  const Mat g = t.grad_ref(self);
                  t.grad_ref(ia).rowwise() += inv * g.row(0);
                },
                "mean_rows");
}

Var stop_gradient(Var a) { return a.tape().push(a.value(), {}, {}, "stop_gradient"); }

Var cross_entropy(Var logits, std::span<const int> targets, double epsilon, Reduction reduction) {
  const Eigen::Index rows = logits.rows();
  const Eigen::Index k = logits.cols();
  if (static_cast<std::size_t>(rows) != targets.size())
    throw DimensionError("cross_entropy: " + std::to_string(rows) + " rows but " + std::to_string(targets.size()) +
                         " targets");
  if (reduction == Reduction::kMean && rows == 0) throw DimensionError("mean cross-entropy over zero rows");

  const Mat& x = logits.value();
  Mat probs(rows, k);
  double total = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const int y = targets[static_cast<std::size_t>(r)];
    if (y < 0 || y >= k) throw ValidationError("target id " + std::to_string(y) + " outside " + std::to_string(k) + " classes");
    const double mx = x.row(r).maxCoeff();
    const double lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    const Eigen::RowVectorXd logp = x.row(r).array() - lse;
    probs.row(r) = logp.array().exp().matrix();
    total += -(1.0 - epsilon) * logp(y) - epsilon / static_cast<double>(k) * logp.sum();
  }
  const double norm = reduction == Reduction::kMean ? 1.0 / static_cast<double>(rows) : 1.0;
  Mat out(1, 1);
  out(0, 0) = total * norm;

  auto& t = logits.tape();
  const int il = logits.id();
  std::vector<int> tgt(targets.begin(), targets.end());
  return t.push(std::move(out), {il},
                [il, tgt = std::move(tgt), probs = std::move(probs), epsilon, norm, k](Tape& t, int self) {
                  const double g = t.grad_ref(self)(0, 0) * norm;
                  Mat d = probs.array() - epsilon / static_cast<double>(k);
                  for (std::size_t r = 0; r < tgt.size(); ++r) d(static_cast<Eigen::Index>(r), tgt[r]) -= 1.0 - epsilon;
                  t.grad_ref(il) += g * d;
                },
                "cross_entropy");
}

Var checked(Var v, const char* name) {
  if (!v.value().allFinite()) throw NumericError(std::string("non-finite values in ") + name);
  return v;
}

}  // namespace slu::ad
