#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace cestfit::neural {

class Tape;

// Handle to one tape node. Valid as long as its tape lives; value() is
// available immediately, grad() after Tape::backward.
class Var {
public:
    Var() = default;

    const Eigen::MatrixXd& value() const;
    const Eigen::MatrixXd& grad() const;
    std::size_t index() const { return idx_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t idx) : tape_(tape), idx_(idx) {}
    Tape* tape_ = nullptr;
    std::size_t idx_ = 0;
};

// Reverse-mode autodiff over 2-D double matrices. Nodes are appended in
// evaluation order (parents always precede children), so the reverse sweep
// in backward() is a topological order and touches each node exactly once.
class Tape {
public:
    // Gradient-tracked input (weights, anything optimized).
    Var leaf(Eigen::MatrixXd value);
    // Input with no gradient flow (data, precomputed grids).
    Var constant(Eigen::MatrixXd value);

    // Elementwise on equal shapes.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var div(Var a, Var b);

    Var scalar_mul(Var a, double s);
    Var scalar_add(Var a, double s);

    Var matmul(Var a, Var b);    // a (m,k) x b (k,n)
    Var matmul_nt(Var a, Var b); // a (m,k) x b^T, b (n,k)

    Var tanh(Var a);
    Var gelu(Var a); // exact form, x/2 * (1 + erf(x/sqrt 2))

    Var row_softmax(Var a);
    Var layer_norm_rows(Var a, double eps = 1e-5);

    Var broadcast_scalar(Var a, Eigen::Index rows, Eigen::Index cols); // a is 1x1
    Var add_rowvec(Var a, Var b); // b is 1 x cols(a)
    Var mul_rowvec(Var a, Var b);

    Var slice_cols(Var a, Eigen::Index first, Eigen::Index count);
    // Rows moved down by `shift` (negative: up); vacated rows are zero.
    Var shift_rows(Var a, Eigen::Index shift);

    Var col_mean(Var a); // (m,n) -> (1,n)
    Var sum_all(Var a);  // (m,n) -> (1,1)

    // Seeds d(root)/d(root) = 1 and sweeps the whole tape in reverse
    // creation order. root must be 1x1.
    void backward(Var root);

    std::size_t size() const { return nodes_.size(); }

    const Eigen::MatrixXd& value(std::size_t idx) const { return nodes_[idx].value; }
    const Eigen::MatrixXd& grad(std::size_t idx) const { return nodes_[idx].grad; }

private:
    friend class Var;

    struct Node {
        Eigen::MatrixXd value;
        Eigen::MatrixXd grad;
        bool track = false;         // gradient reaches a leaf
        std::function<void()> back; // accumulates into parent grads
    };

    Var push(Eigen::MatrixXd value, bool track, std::function<void()> back = {});
    Eigen::MatrixXd& grad_ref(std::size_t idx) { return nodes_[idx].grad; }
    bool tracked(Var v) const { return nodes_[v.idx_].track; }

    std::vector<Node> nodes_;
};

} // namespace cestfit::neural
