#include "cestfit/neural/tape.hpp"

#include <cmath>
#include <utility>

#include "cestfit/errors.hpp"

namespace cestfit::neural {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeMismatch(std::string(op) + ": operand shapes differ");
}

} // namespace

const Eigen::MatrixXd& Var::value() const { return tape_->value(idx_); }
const Eigen::MatrixXd& Var::grad() const { return tape_->grad(idx_); }

Var Tape::push(Eigen::MatrixXd value, bool track, std::function<void()> back) {
    Node node;
    node.grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
    node.value = std::move(value);
    node.track = track;
    node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Eigen::MatrixXd value) { return push(std::move(value), true); }

Var Tape::constant(Eigen::MatrixXd value) { return push(std::move(value), false); }

Var Tape::add(Var a, Var b) {
    require_same_shape(a.value(), b.value(), "add");
    Eigen::MatrixXd v = a.value() + b.value();
    std::size_t ia = a.idx_, ib = b.idx_;
    Var out = push(std::move(v), tracked(a) || tracked(b));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, ib, io] {
        const Eigen::MatrixXd& g = nodes_[io].grad;
        if (nodes_[ia].track) grad_ref(ia) += g;
        if (nodes_[ib].track) grad_ref(ib) += g;
    };
    return out;
}

Var Tape::sub(Var a, Var b) {
    require_same_shape(a.value(), b.value(), "sub");
    Eigen::MatrixXd v = a.value() - b.value();
    std::size_t ia = a.idx_, ib = b.idx_;
    Var out = push(std::move(v), tracked(a) || tracked(b));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, ib, io] {
        const Eigen::MatrixXd& g = nodes_[io].grad;
        if (nodes_[ia].track) grad_ref(ia) += g;
        if (nodes_[ib].track) grad_ref(ib) -= g;
    };
    return out;
}

Var Tape::mul(Var a, Var b) {
    require_same_shape(a.value(), b.value(), "mul");
    Eigen::MatrixXd v = a.value().cwiseProduct(b.value());
    std::size_t ia = a.idx_, ib = b.idx_;
    Var out = push(std::move(v), tracked(a) || tracked(b));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, ib, io] {
        const Eigen::MatrixXd& g = nodes_[io].grad;
        if (nodes_[ia].track) grad_ref(ia) += g.cwiseProduct(nodes_[ib].value);
        if (nodes_[ib].track) grad_ref(ib) += g.cwiseProduct(nodes_[ia].value);
    };
    return out;
}

Var Tape::div(Var a, Var b) {
    require_same_shape(a.value(), b.value(), "div");
    Eigen::MatrixXd v = a.value().cwiseQuotient(b.value());
    std::size_t ia = a.idx_, ib = b.idx_;
    Var out = push(std::move(v), tracked(a) || tracked(b));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, ib, io] {
        const Eigen::MatrixXd& g = nodes_[io].grad;
        if (nodes_[ia].track) grad_ref(ia) += g.cwiseQuotient(nodes_[ib].value);
        if (nodes_[ib].track)
            grad_ref(ib) -=
                g.cwiseProduct(nodes_[io].value).cwiseQuotient(nodes_[ib].value);
    };
    return out;
}

Var Tape::scalar_mul(Var a, double s) {
    Eigen::MatrixXd v = a.value() * s;
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io, s] {
        if (nodes_[ia].track) grad_ref(ia) += s * nodes_[io].grad;
    };
    return out;
}

Var Tape::scalar_add(Var a, double s) {
    Eigen::MatrixXd v = a.value().array() + s;
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io] {
        if (nodes_[ia].track) grad_ref(ia) += nodes_[io].grad;
    };
    return out;
}

Var Tape::matmul(Var a, Var b) {
    if (a.value().cols() != b.value().rows())
        throw ShapeMismatch("matmul: inner dimensions differ");
    Eigen::MatrixXd v = a.value() * b.value();
    std::size_t ia = a.idx_, ib = b.idx_;
    Var out = push(std::move(v), tracked(a) || tracked(b));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, ib, io] {
        const Eigen::MatrixXd& g = nodes_[io].grad;
        if (nodes_[ia].track) grad_ref(ia) += g * nodes_[ib].value.transpose();
        if (nodes_[ib].track) grad_ref(ib) += nodes_[ia].value.transpose() * g;
    };
    return out;
}

Var Tape::matmul_nt(Var a, Var b) {
    if (a.value().cols() != b.value().cols())
        throw ShapeMismatch("matmul_nt: inner dimensions differ");
    Eigen::MatrixXd v = a.value() * b.value().transpose();
    std::size_t ia = a.idx_, ib = b.idx_;
    Var out = push(std::move(v), tracked(a) || tracked(b));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, ib, io] {
        const Eigen::MatrixXd& g = nodes_[io].grad;
        if (nodes_[ia].track) grad_ref(ia) += g * nodes_[ib].value;
        if (nodes_[ib].track) grad_ref(ib) += g.transpose() * nodes_[ia].value;
    };
    return out;
}

Var Tape::tanh(Var a) {
    Eigen::MatrixXd v = a.value().array().tanh();
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io] {
        if (!nodes_[ia].track) return;
        const Eigen::MatrixXd& y = nodes_[io].value;
        grad_ref(ia).array() +=
            nodes_[io].grad.array() * (1.0 - y.array().square());
    };
    return out;
}

Var Tape::gelu(Var a) {
    Eigen::MatrixXd v = a.value().unaryExpr(
        [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io] {
        if (!nodes_[ia].track) return;
        Eigen::MatrixXd slope = nodes_[ia].value.unaryExpr([](double x) {
            const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            return cdf + x * pdf;
        });
        grad_ref(ia).array() += nodes_[io].grad.array() * slope.array();
    };
    return out;
}

Var Tape::row_softmax(Var a) {
    Eigen::MatrixXd v = a.value();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        const double mx = v.row(r).maxCoeff();
        v.row(r) = (v.row(r).array() - mx).exp().matrix();
        v.row(r) /= v.row(r).sum();
    }
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io] {
        if (!nodes_[ia].track) return;
        const Eigen::MatrixXd& y = nodes_[io].value;
        const Eigen::MatrixXd& g = nodes_[io].grad;
        Eigen::MatrixXd& ga = grad_ref(ia);
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
            double dot = y.row(r).dot(g.row(r));
            ga.row(r).array() +=
                y.row(r).array() * (g.row(r).array() - dot);
        }
    };
    return out;
}

Var Tape::layer_norm_rows(Var a, double eps) {
    const Eigen::MatrixXd& x = a.value();
    Eigen::MatrixXd v(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        v.row(r) = ((x.row(r).array() - mean) / std::sqrt(var + eps)).matrix();
    }
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io, eps] {
        if (!nodes_[ia].track) return;
        const Eigen::MatrixXd& x = nodes_[ia].value;
        const Eigen::MatrixXd& y = nodes_[io].value;
        const Eigen::MatrixXd& g = nodes_[io].grad;
        Eigen::MatrixXd& ga = grad_ref(ia);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const double mean = x.row(r).mean();
            const double sd = std::sqrt((x.row(r).array() - mean).square().mean() + eps);
            const double g_mean = g.row(r).mean();
            const double gy_mean = g.row(r).cwiseProduct(y.row(r)).mean();
            ga.row(r).array() +=
                (g.row(r).array() - g_mean - y.row(r).array() * gy_mean) / sd;
        }
    };
    return out;
}

Var Tape::broadcast_scalar(Var a, Eigen::Index rows, Eigen::Index cols) {
    if (a.value().rows() != 1 || a.value().cols() != 1)
        throw ShapeMismatch("broadcast_scalar: source must be 1x1");
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(rows, cols, a.value()(0, 0));
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io] {
        if (nodes_[ia].track) grad_ref(ia)(0, 0) += nodes_[io].grad.sum();
    };
    return out;
}

Var Tape::add_rowvec(Var a, Var b) {
    if (b.value().rows() != 1 || b.value().cols() != a.value().cols())
        throw ShapeMismatch("add_rowvec: vector must be 1 x cols(matrix)");
    Eigen::MatrixXd v = a.value().rowwise() + b.value().row(0);
    std::size_t ia = a.idx_, ib = b.idx_;
    Var out = push(std::move(v), tracked(a) || tracked(b));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, ib, io] {
        const Eigen::MatrixXd& g = nodes_[io].grad;
        if (nodes_[ia].track) grad_ref(ia) += g;
        if (nodes_[ib].track) grad_ref(ib) += g.colwise().sum();
    };
    return out;
}

Var Tape::mul_rowvec(Var a, Var b) {
    if (b.value().rows() != 1 || b.value().cols() != a.value().cols())
        throw ShapeMismatch("mul_rowvec: vector must be 1 x cols(matrix)");
    Eigen::MatrixXd v =
        a.value().array().rowwise() * b.value().row(0).array();
    std::size_t ia = a.idx_, ib = b.idx_;
    Var out = push(std::move(v), tracked(a) || tracked(b));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, ib, io] {
        const Eigen::MatrixXd& g = nodes_[io].grad;
        if (nodes_[ia].track)
            grad_ref(ia).array() +=
                g.array().rowwise() * nodes_[ib].value.row(0).array();
        if (nodes_[ib].track)
            grad_ref(ib) += g.cwiseProduct(nodes_[ia].value).colwise().sum();
    };
    return out;
}

Var Tape::slice_cols(Var a, Eigen::Index first, Eigen::Index count) {
    if (first < 0 || count < 1 || first + count > a.value().cols())
        throw ShapeMismatch("slice_cols: range outside matrix");
    Eigen::MatrixXd v = a.value().middleCols(first, count);
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io, first, count] {
        if (nodes_[ia].track)
            grad_ref(ia).middleCols(first, count) += nodes_[io].grad;
    };
    return out;
}

Var Tape::shift_rows(Var a, Eigen::Index shift) {
    const Eigen::Index rows = a.value().rows();
    auto shifted = [rows](const Eigen::MatrixXd& m, Eigen::Index by) {
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(rows, m.cols());
        for (Eigen::Index r = 0; r < rows; ++r) {
            Eigen::Index src = r - by;
            if (src >= 0 && src < rows) v.row(r) = m.row(src);
        }
        return v;
    };
    Eigen::MatrixXd v = shifted(a.value(), shift);
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io, shift, shifted] {
        if (nodes_[ia].track) grad_ref(ia) += shifted(nodes_[io].grad, -shift);
    };
    return out;
}

Var Tape::col_mean(Var a) {
    const Eigen::Index rows = a.value().rows();
    Eigen::MatrixXd v = a.value().colwise().mean();
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io, rows] {
        if (nodes_[ia].track)
            grad_ref(ia) += nodes_[io].grad.replicate(rows, 1) /
                            static_cast<double>(rows);
    };
    return out;
}

Var Tape::sum_all(Var a) {
    Eigen::MatrixXd v(1, 1);
    v(0, 0) = a.value().sum();
    std::size_t ia = a.idx_;
    Var out = push(std::move(v), tracked(a));
    std::size_t io = out.idx_;
    nodes_[io].back = [this, ia, io] {
        if (nodes_[ia].track)
            grad_ref(ia).array() += nodes_[io].grad(0, 0);
    };
    return out;
}

void Tape::backward(Var root) {
    if (root.tape_ != this)
        throw ConfigError("backward: root belongs to a different tape");
    if (root.value().rows() != 1 || root.value().cols() != 1)
        throw ShapeMismatch("backward: root must be 1x1");
    nodes_[root.idx_].grad(0, 0) = 1.0;
    for (std::size_t i = root.idx_ + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (node.track && node.back) node.back();
    }
}

} // namespace cestfit::neural
