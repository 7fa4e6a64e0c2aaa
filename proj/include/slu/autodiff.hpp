#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace slu::ad {

using Mat = Eigen::MatrixXd;

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Mat& value() const;
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape over dense double matrices. Nodes are appended in
// evaluation order, so a reverse sweep visits every node after all of its
// consumers.
class Tape {
 public:
  using Backprop = std::function<void(Tape&, int self)>;

  // A leaf whose gradient is tracked.
  Var variable(Mat value, std::string name = {});
  // A leaf that never receives a gradient.
  Var constant(Mat value, std::string name = {});

  // Appends an op result. Throws NumericError if `value` is not finite.
  Var push(Mat value, std::vector<int> parents, Backprop backprop, const char* op);

  const Mat& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  // Seeds d(out)/d(out) = 1 for a 1x1 node and sweeps backwards.
  void backward(Var out);

  // Gradient accumulated at a node; zeros if nothing flowed into it.
  Mat grad(Var v) const;
  // Accumulation target for op implementations.
  Mat& grad_ref(int id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;  // empty until something flows in
    bool requires_grad = false;
    std::vector<int> parents;
    Backprop backprop;
    std::string name;
  };
  std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
// m + ones * row, row is 1 x cols(m).
Var add_row(Var m, Var row);
Var scale(Var a, double s);
Var tanh(Var a);
Var softmax_rows(Var a);
Var concat_cols(Var a, Var b);
Var concat_rows(Var a, Var b);
Var slice_rows(Var a, Eigen::Index begin, Eigen::Index count);
// Row lookup, as in an embedding table.
Var gather_rows(Var table, std::span<const int> ids);
// 1 x cols mean over rows.
Var mean_rows(Var a);
// Identity on the value, blocks every gradient.
Var stop_gradient(Var a);

enum class Reduction { kMean, kSum };

// Row-wise softmax cross-entropy against integer targets, with label
// smoothing weight epsilon spread uniformly over the classes. 1x1 result.
Var cross_entropy(Var logits, std::span<const int> targets, double epsilon, Reduction reduction);

// Throws NumericError naming `name` when v holds a non-finite entry.
Var checked(Var v, const char* name);

}  // namespace slu::ad
