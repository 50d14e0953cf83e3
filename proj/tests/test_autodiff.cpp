#include <cmath>
#include <vector>

#include <doctest.h>

#include "cestfit/errors.hpp"
#include "cestfit/models/forward.hpp"
#include "cestfit/neural/model_graph.hpp"
#include "cestfit/neural/tape.hpp"
#include "cestfit/rng.hpp"
#include "cestfit/units.hpp"

using namespace cestfit;
using namespace cestfit::neural;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0,
                              double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = rng.uniform(lo, hi);
    return m;
}

bool grad_close(double analytic, double fd, double tol = 1e-4) {
    const double scale = std::max({1.0, std::abs(analytic), std::abs(fd)});
    return std::abs(analytic - fd) <= tol * scale;
}

// Contracts an op output against fixed weights so the check covers every
// output element, then compares each input gradient to central differences.
template <typename BuildFn>
void gradcheck(const std::vector<Eigen::MatrixXd>& inputs, BuildFn build,
               std::uint64_t seed = 99) {
    Eigen::MatrixXd contraction;
    auto eval = [&](const std::vector<Eigen::MatrixXd>& vals,
                    std::vector<Eigen::MatrixXd>* grads) {
        Tape t;
        std::vector<Var> leaves;
        leaves.reserve(vals.size());
        for (const Eigen::MatrixXd& m : vals)
            leaves.push_back(t.leaf(m));
        Var out = build(t, leaves);
        if (contraction.size() == 0) {
            Rng rng(seed);
            contraction = random_matrix(out.value().rows(), out.value().cols(), rng, 0.5, 1.5);
        }
        Var loss = t.sum_all(t.mul(out, t.constant(contraction)));
        if (grads) {
            t.backward(loss);
            grads->clear();
            for (const Var& leaf : leaves)
                grads->push_back(leaf.grad());
        }
        return loss.value()(0, 0);
    };

    std::vector<Eigen::MatrixXd> analytic;
    eval(inputs, &analytic);

    std::vector<Eigen::MatrixXd> probe = inputs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (Eigen::Index r = 0; r < inputs[i].rows(); ++r)
            for (Eigen::Index c = 0; c < inputs[i].cols(); ++c) {
                const double x0 = inputs[i](r, c);
                const double h = 1e-6 * std::max(1.0, std::abs(x0));
                probe[i](r, c) = x0 + h;
                const double fp = eval(probe, nullptr);
                probe[i](r, c) = x0 - h;
                const double fm = eval(probe, nullptr);
                probe[i](r, c) = x0;
                const double fd = (fp - fm) / (2.0 * h);
                CAPTURE(i);
                CAPTURE(r);
                CAPTURE(c);
                CHECK(grad_close(analytic[i](r, c), fd));
            }
    }
}

} // namespace

TEST_CASE("elementwise op values and gradients") {
    Rng rng(1);
    Eigen::MatrixXd a = random_matrix(3, 4, rng);
    Eigen::MatrixXd b = random_matrix(3, 4, rng, 0.5, 2.0); // away from 0 for div

    gradcheck({a, b}, [](Tape& t, const std::vector<Var>& in) { return t.add(in[0], in[1]); });
    gradcheck({a, b}, [](Tape& t, const std::vector<Var>& in) { return t.sub(in[0], in[1]); });
    gradcheck({a, b}, [](Tape& t, const std::vector<Var>& in) { return t.mul(in[0], in[1]); });
    gradcheck({a, b}, [](Tape& t, const std::vector<Var>& in) { return t.div(in[0], in[1]); });
    gradcheck({a}, [](Tape& t, const std::vector<Var>& in) { return t.scalar_mul(in[0], -2.5); });
    gradcheck({a}, [](Tape& t, const std::vector<Var>& in) { return t.scalar_add(in[0], 0.7); });
    gradcheck({a}, [](Tape& t, const std::vector<Var>& in) { return t.tanh(in[0]); });
    gradcheck({a}, [](Tape& t, const std::vector<Var>& in) { return t.gelu(in[0]); });

    Tape t;
    Var sum = t.add(t.leaf(a), t.constant(b));
    CHECK(sum.value() == a + b);
    CHECK_THROWS_AS(t.add(t.leaf(a), t.leaf(random_matrix(2, 2, rng))), ShapeMismatch);
}

TEST_CASE("matmul values and gradients") {
    Rng rng(2);
    Eigen::MatrixXd a = random_matrix(3, 5, rng);
    Eigen::MatrixXd b = random_matrix(5, 2, rng);
    Eigen::MatrixXd c = random_matrix(4, 5, rng);

    gradcheck({a, b}, [](Tape& t, const std::vector<Var>& in) { return t.matmul(in[0], in[1]); });
    gradcheck({a, c},
              [](Tape& t, const std::vector<Var>& in) { return t.matmul_nt(in[0], in[1]); });

    Tape t;
    CHECK(t.matmul(t.leaf(a), t.leaf(b)).value() == a * b);
    CHECK(t.matmul_nt(t.leaf(a), t.leaf(c)).value() == a * c.transpose());
    CHECK_THROWS_AS(t.matmul(t.leaf(a), t.leaf(c)), ShapeMismatch);
}

TEST_CASE("softmax rows normalize and backprop") {
    Rng rng(3);
    Eigen::MatrixXd a = random_matrix(4, 6, rng, -3.0, 3.0);

    Tape t;
    Var y = t.row_softmax(t.leaf(a));
    for (Eigen::Index r = 0; r < y.value().rows(); ++r) {
        CHECK(y.value().row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(y.value().row(r).minCoeff() > 0.0);
    }
    // Shift invariance: softmax(x + const) == softmax(x).
    Tape t2;
    Var y2 = t2.row_softmax(t2.leaf((a.array() + 7.5).matrix()));
    CHECK((y.value() - y2.value()).cwiseAbs().maxCoeff() < 1e-12);

    gradcheck({a},
              [](Tape& t3, const std::vector<Var>& in) { return t3.row_softmax(in[0]); });
}

TEST_CASE("layer norm rows normalize and backprop") {
    Rng rng(4);
    Eigen::MatrixXd a = random_matrix(3, 8, rng, -2.0, 5.0);

    Tape t;
    Var y = t.layer_norm_rows(t.leaf(a));
    for (Eigen::Index r = 0; r < y.value().rows(); ++r) {
        CHECK(std::abs(y.value().row(r).mean()) < 1e-14);
        const double var = y.value().row(r).array().square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4)); // eps in the denominator
    }

    gradcheck({a},
              [](Tape& t2, const std::vector<Var>& in) { return t2.layer_norm_rows(in[0]); });
}

TEST_CASE("broadcast, slice, shift, reduction ops") {
    Rng rng(5);
    Eigen::MatrixXd a = random_matrix(4, 6, rng);
    Eigen::MatrixXd row = random_matrix(1, 6, rng);
    Eigen::MatrixXd one = random_matrix(1, 1, rng);

    gradcheck({one}, [](Tape& t, const std::vector<Var>& in) {
        return t.broadcast_scalar(in[0], 3, 5);
    });
    gradcheck({a, row},
              [](Tape& t, const std::vector<Var>& in) { return t.add_rowvec(in[0], in[1]); });
    gradcheck({a, row},
              [](Tape& t, const std::vector<Var>& in) { return t.mul_rowvec(in[0], in[1]); });
    gradcheck({a},
              [](Tape& t, const std::vector<Var>& in) { return t.slice_cols(in[0], 1, 3); });
    gradcheck({a}, [](Tape& t, const std::vector<Var>& in) { return t.shift_rows(in[0], 1); });
    gradcheck({a}, [](Tape& t, const std::vector<Var>& in) { return t.shift_rows(in[0], -2); });
    gradcheck({a}, [](Tape& t, const std::vector<Var>& in) { return t.col_mean(in[0]); });
    gradcheck({a}, [](Tape& t, const std::vector<Var>& in) { return t.sum_all(in[0]); });

    Tape t;
    Var shifted = t.shift_rows(t.leaf(a), 1);
    CHECK(shifted.value().row(0).isZero(0.0));
    CHECK(shifted.value().row(1) == a.row(0));
    CHECK(shifted.value().row(3) == a.row(2));
    CHECK(t.slice_cols(t.leaf(a), 2, 2).value() == a.middleCols(2, 2));
    CHECK_THROWS_AS(t.slice_cols(t.leaf(a), 5, 3), ShapeMismatch);
    CHECK_THROWS_AS(t.broadcast_scalar(t.leaf(a), 2, 2), ShapeMismatch);
}

TEST_CASE("shared subexpressions accumulate gradients once per use") {
    // y = sum(x + x): each node is visited exactly once in the reverse sweep,
    // so the leaf gradient is exactly 2 everywhere (4 with two adds).
    Tape t;
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 3, 1.25);
    Var leaf = t.leaf(x);
    Var doubled = t.add(leaf, leaf);
    Var quadrupled = t.add(doubled, doubled);
    Var loss = t.sum_all(quadrupled);
    t.backward(loss);
    CHECK(loss.value()(0, 0) == doctest::Approx(4.0 * 1.25 * 6).epsilon(1e-15));
    CHECK(leaf.grad() == Eigen::MatrixXd::Constant(2, 3, 4.0));
}

TEST_CASE("constants block gradient flow") {
    Tape t;
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 2, 3.0);
    Var c = t.constant(x);
    Var leaf = t.leaf(x);
    Var loss = t.sum_all(t.mul(leaf, c));
    t.backward(loss);
    CHECK(leaf.grad() == x);
    CHECK(c.grad().isZero(0.0));
    CHECK_THROWS_AS(t.backward(t.leaf(x)), ShapeMismatch); // not 1x1
}

TEST_CASE("composite expression matches finite differences") {
    // A little network-shaped pipeline: matmul, bias, gelu, layer norm,
    // softmax attention, pooling.
    Rng rng(6);
    Eigen::MatrixXd x = random_matrix(5, 3, rng);
    Eigen::MatrixXd w = random_matrix(3, 4, rng);
    Eigen::MatrixXd b = random_matrix(1, 4, rng);
    Eigen::MatrixXd wq = random_matrix(4, 2, rng);
    Eigen::MatrixXd wk = random_matrix(4, 2, rng);

    gradcheck({x, w, b, wq, wk}, [](Tape& t, const std::vector<Var>& in) {
        Var tok = t.gelu(t.add_rowvec(t.matmul(in[0], in[1]), in[2]));
        Var ln = t.layer_norm_rows(tok);
        Var q = t.matmul(ln, in[3]);
        Var k = t.matmul(ln, in[4]);
        Var probs = t.row_softmax(t.scalar_mul(t.matmul_nt(q, k), 0.7071));
        return t.col_mean(t.matmul(probs, ln));
    });
}

TEST_CASE("differentiable model forward matches the plain forward") {
    const FieldContext ctx;
    std::vector<double> offsets;
    for (int i = 0; i <= 16; ++i)
        offsets.push_back(-4.0 + 8.0 * i / 16.0);
    const double w1 = b1_to_radps(1.2, ctx);
    const double w2 = b1_to_radps(2.0, ctx);

    SUBCASE("analytical Z") {
        models::ZModelParams zp;
        zp.r2a_over_r1a = 1.4;
        zp.pools = {{0.002, 600.0, 40.0, 2.1}, {0.001, 500.0, 30.0, 0.8}};
        const std::vector<double> flat = models::flatten(zp);
        Tape t;
        Var p = t.leaf(Eigen::Map<const Eigen::RowVectorXd>(flat.data(), 9));
        auto curves =
            model_curves(t, p, models::ModelKind::AnalyticalZ, offsets, {w1, w2}, 2, ctx);
        REQUIRE(curves.size() == 2);
        const std::vector<double> ref = models::z_forward(zp, offsets, w2, ctx);
        for (std::size_t j = 0; j < offsets.size(); ++j)
            CHECK(curves[1].value()(0, static_cast<Eigen::Index>(j)) ==
                  doctest::Approx(ref[j]).epsilon(1e-12));
    }

    SUBCASE("mtr_rex") {
        models::ZModelParams zp;
        zp.r2a_over_r1a = 0.0;
        zp.pools = {{0.003, 700.0, 35.0, 2.1}};
        std::vector<double> pos(offsets.begin() + 9, offsets.end());
        const std::vector<double> flat = models::flatten(zp);
        Tape t;
        Var p = t.leaf(Eigen::Map<const Eigen::RowVectorXd>(flat.data(), 5));
        auto curves = model_curves(t, p, models::ModelKind::MtrRex, pos, {w1}, 1, ctx);
        const std::vector<double> ref = models::mtr_rex_forward(zp, pos, w1, ctx);
        for (std::size_t j = 0; j < pos.size(); ++j)
            CHECK(curves[0].value()(0, static_cast<Eigen::Index>(j)) ==
                  doctest::Approx(ref[j]).epsilon(1e-12));
    }

    SUBCASE("lorentzian") {
        models::LorentzianParams lp;
        lp.pools = {{0.3, 5e5, 2.1}, {0.1, 2e5, -1.0}};
        const std::vector<double> flat = models::flatten(lp);
        Tape t;
        Var p = t.leaf(Eigen::Map<const Eigen::RowVectorXd>(flat.data(), 6));
        auto curves = model_curves(t, p, models::ModelKind::Lorentzian, offsets, {0.0}, 2, ctx);
        const std::vector<double> ref = models::lorentzian_forward(lp, offsets, ctx);
        for (std::size_t j = 0; j < offsets.size(); ++j)
            CHECK(curves[0].value()(0, static_cast<Eigen::Index>(j)) ==
                  doctest::Approx(ref[j]).epsilon(1e-12));
    }
}

TEST_CASE("model forward gradients match central differences") {
    const FieldContext ctx;
    std::vector<double> offsets;
    for (int i = 0; i < 11; ++i)
        offsets.push_back(0.5 + 4.0 * i / 10.0);
    const double w1 = b1_to_radps(1.6, ctx);

    auto check_kind = [&](models::ModelKind kind, const std::vector<double>& flat,
                          std::size_t pools) {
        auto eval = [&](const std::vector<double>& v, Eigen::RowVectorXd* grad) {
            Tape t;
            Var p = t.leaf(Eigen::Map<const Eigen::RowVectorXd>(
                v.data(), static_cast<Eigen::Index>(v.size())));
            auto curves = model_curves(t, p, kind, offsets, {w1}, pools, ctx);
            Var total;
            for (std::size_t c = 0; c < curves.size(); ++c)
                total = (c == 0) ? t.sum_all(curves[c]) : t.add(total, t.sum_all(curves[c]));
            if (grad) {
                t.backward(total);
                *grad = p.grad();
            }
            return total.value()(0, 0);
        };

        Eigen::RowVectorXd analytic;
        eval(flat, &analytic);
        std::vector<double> probe = flat;
        for (std::size_t j = 0; j < flat.size(); ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(flat[j]));
            probe[j] = flat[j] + h;
            const double fp = eval(probe, nullptr);
            probe[j] = flat[j] - h;
            const double fm = eval(probe, nullptr);
            probe[j] = flat[j];
            const double fd = (fp - fm) / (2.0 * h);
            const double a = analytic(static_cast<Eigen::Index>(j));
            CAPTURE(j);
            CHECK(std::abs(a - fd) <= 1e-4 * std::max(std::abs(a), std::abs(fd)) + 1e-12);
        }
    };

    check_kind(models::ModelKind::AnalyticalZ,
               models::flatten(models::ZModelParams{1.4, {{0.002, 600.0, 40.0, 2.1}}}), 1);
    check_kind(models::ModelKind::MtrRex,
               models::flatten(models::ZModelParams{
                   0.0, {{0.002, 600.0, 40.0, 2.1}, {0.001, 500.0, 30.0, 0.8}}}),
               2);
    check_kind(models::ModelKind::Lorentzian,
               models::flatten(models::LorentzianParams{{{0.3, 5e5, 2.1}}}), 1);
}

TEST_CASE("model graph input validation") {
    const FieldContext ctx;
    Tape t;
    Var p = t.leaf(Eigen::MatrixXd::Constant(1, 5, 0.5));
    CHECK_THROWS_AS(model_curves(t, p, models::ModelKind::AnalyticalZ, {1.0}, {100.0}, 2, ctx),
                    ShapeMismatch); // 2 pools need 9 columns
    CHECK_THROWS_AS(model_curves(t, p, models::ModelKind::AnalyticalZ, {}, {100.0}, 1, ctx),
                    ShapeMismatch);
    CHECK_THROWS_AS(model_curves(t, p, models::ModelKind::AnalyticalZ, {1.0}, {}, 1, ctx),
                    ShapeMismatch);
}
