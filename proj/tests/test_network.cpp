#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "cestfit/errors.hpp"
#include "cestfit/metrics.hpp"
#include "cestfit/models/forward.hpp"
#include "cestfit/neural/model_graph.hpp"
#include "cestfit/neural/network.hpp"
#include "cestfit/rng.hpp"
#include "cestfit/units.hpp"

using namespace cestfit;
using namespace cestfit::neural;

namespace {

// Small but structurally complete network used throughout these tests.
NetworkConfig tiny_config(int tokens, int channels, int params) {
    NetworkConfig cfg;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.hidden = 8;
    cfg.mlp_dim = 8;
    cfg.decoder_channels = {4};
    cfg.tokens = tokens;
    cfg.channels = channels;
    cfg.params = params;
    return cfg;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

// Two-B1 set whose Z values follow the analytical model plus optional noise.
SpectrumSet z_model_set(const models::ZModelParams& zp, const FieldContext& ctx,
                        std::uint64_t noise_seed = 0, double sigma = 0.0) {
    const std::vector<double> offsets = linspace(-4.0, 4.0, 17);
    Rng rng(noise_seed);
    std::vector<Spectrum> spectra;
    for (double b1 : {1.2, 2.0}) {
        std::vector<double> z = models::z_forward(zp, offsets, b1_to_radps(b1, ctx), ctx);
        if (sigma > 0.0)
            for (double& v : z)
                v += rng.normal(0.0, sigma);
        spectra.emplace_back(offsets, z, b1);
    }
    return SpectrumSet(std::move(spectra));
}

bool all_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

} // namespace

TEST_CASE("network config presets and validation") {
    NetworkConfig desk = NetworkConfig::desk();
    CHECK(desk.layers == 2);
    CHECK(desk.heads == 4);
    CHECK(desk.hidden == 64);
    CHECK(desk.mlp_dim == 64);
    CHECK(desk.decoder_channels == std::vector<int>{32, 16});

    NetworkConfig paper = NetworkConfig::paper();
    CHECK(paper.layers == 8);
    CHECK(paper.heads == 8);
    CHECK(paper.hidden == 1024);
    CHECK(paper.mlp_dim == 1024);
    CHECK(paper.decoder_channels == std::vector<int>{512, 256, 128, 64});
    CHECK(paper.head_dim() == 128);

    NetworkConfig bad = desk;
    bad.heads = 5; // does not divide 64
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = desk;
    bad.layers = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = desk;
    bad.decoder_channels.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    // Data dimensions must be bound before a state can exist.
    CHECK_THROWS_AS(init_network(desk, 1), ConfigError);
}

TEST_CASE("network init is seeded and scaled") {
    const NetworkConfig cfg = tiny_config(9, 2, 5);
    NetworkState a = init_network(cfg, 42);
    NetworkState b = init_network(cfg, 42);
    NetworkState c = init_network(cfg, 43);

    REQUIRE(a.names.size() == a.weights.size());
    CHECK(a.step == 0);
    bool all_same = true, any_diff = false;
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        all_same = all_same && all_equal(a.weights[i], b.weights[i]);
        any_diff = any_diff || !all_equal(a.weights[i], c.weights[i]);
        CHECK(a.adam_m[i].isZero(0.0));
        CHECK(a.adam_v[i].isZero(0.0));
    }
    CHECK(all_same);
    CHECK(any_diff);

    CHECK(a.weight("enc0.ln1.g") == Eigen::MatrixXd::Ones(1, 8));
    CHECK(a.weight("enc0.ln1.b").isZero(0.0));
    CHECK(a.weight("embed.b").isZero(0.0));
    CHECK(a.weight("pos").rows() == 9);
    CHECK(a.weight("head.w2").cols() == 5);
    // fan-in scaling: embed.w has fan 2
    CHECK(a.weight("embed.w").cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(2.0));
    CHECK_THROWS_AS(a.index_of("nope"), IndexOutOfRange);
}

TEST_CASE("encode_input builds the model-domain channels") {
    const FieldContext ctx;
    const std::vector<double> offsets = {-2.0, -1.0, 0.0, 1.0, 2.0};
    const std::vector<double> z1 = {0.95, 0.9, 0.2, 0.85, 0.9};
    const std::vector<double> z2 = {0.9, 0.85, 0.15, 0.8, 0.88};
    SpectrumSet set({Spectrum(offsets, z1, 1.2), Spectrum(offsets, z2, 2.0)});

    SUBCASE("analytical Z uses raw Z per channel") {
        SampleData s = encode_input(models::ModelKind::AnalyticalZ, set, ctx);
        CHECK(s.x.rows() == 5);
        CHECK(s.x.cols() == 2);
        CHECK(s.x(1, 0) == 0.9);
        CHECK(s.x(2, 1) == 0.15);
        CHECK(s.offsets_ppm == offsets);
        CHECK(s.omega1_radps[1] == b1_to_radps(2.0, ctx));
    }

    SUBCASE("lorentzian wants one spectrum and uses MTR") {
        CHECK_THROWS_AS(encode_input(models::ModelKind::Lorentzian, set, ctx), ShapeMismatch);
        SpectrumSet single({Spectrum(offsets, z1, 1.2)});
        SampleData s = encode_input(models::ModelKind::Lorentzian, single, ctx);
        CHECK(s.x.cols() == 1);
        CHECK(s.x(0, 0) == 1.0 - 0.95);
        CHECK(s.x(2, 0) == 1.0 - 0.2);
    }

    SUBCASE("mtr_rex uses the rescaled ratio on positive offsets") {
        SampleData s = encode_input(models::ModelKind::MtrRex, set, ctx);
        CHECK(s.x.rows() == 2); // offsets 1 and 2
        CHECK(s.x.cols() == 2);
        CHECK(s.offsets_ppm == std::vector<double>{1.0, 2.0});
        const MetricCurve ref = mtr_rex_lhs(set.spectra()[0], ctx);
        CHECK(s.x(0, 0) == ref.values[0]);
        CHECK(s.x(1, 0) == ref.values[1]);
    }
}

TEST_CASE("encode_decode shape, purity and batch independence") {
    const FieldContext ctx;
    models::ZModelParams zp{1.4, {{0.002, 600.0, 40.0, 2.1}}};
    std::vector<SampleData> batch = encode_inputs(
        models::ModelKind::AnalyticalZ,
        {z_model_set(zp, ctx, 1, 0.01), z_model_set(zp, ctx, 2, 0.01)}, ctx);

    const NetworkConfig cfg = tiny_config(17, 2, 5);
    NetworkState state = init_network(cfg, 7);

    Eigen::MatrixXd out = encode_decode(state, batch);
    CHECK(out.rows() == 2);
    CHECK(out.cols() == 5);
    CHECK(out.allFinite());

    // Purity and determinism.
    CHECK(all_equal(encode_decode(state, batch), out));

    // Duplicated sample rows produce identical outputs.
    std::vector<SampleData> dup = {batch[0], batch[1], batch[0]};
    Eigen::MatrixXd out3 = encode_decode(state, dup);
    CHECK(out3.row(0) == out3.row(2));
    CHECK(out3.row(0) == out.row(0));
    CHECK(out3.row(1) == out.row(1));

    // Weight sensitivity: nudging one weight moves the output.
    NetworkState poked = state;
    poked.weight("head.w2")(0, 0) += 1e-3;
    CHECK_FALSE(all_equal(encode_decode(poked, batch), out));

    // Shape contract against the config.
    SampleData bad = batch[0];
    bad.x = bad.x.topRows(10).eval();
    CHECK_THROWS_AS(encode_decode(state, {bad}), ShapeMismatch);
}

TEST_CASE("bound_map maps raw outputs into the box") {
    models::ParamBounds bounds;
    bounds.center = {0.5, 0.5};
    bounds.deviation = {0.5, 0.5};
    bounds.names = {"a", "b"};

    SUBCASE("zero maps to the center exactly") {
        std::vector<double> p = bound_map(std::vector<double>{0.0, 0.0}, bounds);
        CHECK(p[0] == 0.5);
        CHECK(p[1] == 0.5);
    }

    SUBCASE("unit raw values hit the tanh(1) points") {
        std::vector<double> p = bound_map(std::vector<double>{1.0, -1.0}, bounds);
        const double t1 = 0.7615941559557649;
        CHECK(p[0] == doctest::Approx(0.5 + 0.5 * t1).epsilon(1e-15));
        CHECK(p[1] == doctest::Approx(0.5 - 0.5 * t1).epsilon(1e-15));
    }

    SUBCASE("saturated raw values never leave the closed box") {
        std::vector<double> p = bound_map(std::vector<double>{500.0, -500.0}, bounds);
        CHECK(p[0] <= 1.0);
        CHECK(p[1] >= 0.0);
        CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(bounds.contains(p));
    }

    SUBCASE("length and matrix row mapping") {
        CHECK_THROWS_AS(bound_map(std::vector<double>{1.0}, bounds), LengthMismatch);
        Eigen::MatrixXd raw(2, 2);
        raw << 0.0, 1.0, -1.0, 0.0;
        Eigen::MatrixXd p = bound_map(raw, bounds);
        CHECK(p(0, 0) == 0.5);
        CHECK(p(1, 1) == 0.5);
        CHECK(p(0, 1) == doctest::Approx(0.5 + 0.5 * 0.7615941559557649).epsilon(1e-15));
        Eigen::MatrixXd wide(1, 3);
        wide.setZero();
        CHECK_THROWS_AS(bound_map(wide, bounds), LengthMismatch);
    }
}

TEST_CASE("reconstruction loss is zero at the model and epsilon^2 off it") {
    const FieldContext ctx;
    models::ZModelParams zp{1.4, {{0.002, 600.0, 40.0, 2.1}}};
    SpectrumSet set = z_model_set(zp, ctx); // noiseless: x == M(p)
    std::vector<SampleData> batch =
        encode_inputs(models::ModelKind::AnalyticalZ, {set}, ctx);
    const std::vector<double> flat = models::flatten(zp);

    CHECK(reconstruction_loss({flat}, batch, models::ModelKind::AnalyticalZ, ctx) == 0.0);

    const double eps = 1e-3;
    std::vector<SampleData> shifted = batch;
    shifted[0].x.array() += eps;
    CHECK(reconstruction_loss({flat}, shifted, models::ModelKind::AnalyticalZ, ctx) ==
          doctest::Approx(eps * eps).epsilon(1e-12));

    CHECK_THROWS_AS(reconstruction_loss({flat, flat}, batch, models::ModelKind::AnalyticalZ, ctx),
                    ShapeMismatch);
}

TEST_CASE("batch_loss agrees with the plain reconstruction loss") {
    const FieldContext ctx;
    models::ModelBounds mb = models::exchange_bounds(models::ModelKind::AnalyticalZ,
                                                     {{"amide", 2.1}});
    models::ZModelParams zp{1.4, {{0.002, 600.0, 40.0, 2.1}}};
    std::vector<SampleData> batch = encode_inputs(
        models::ModelKind::AnalyticalZ,
        {z_model_set(zp, ctx, 3, 0.02), z_model_set(zp, ctx, 4, 0.02)}, ctx);

    const NetworkConfig cfg = tiny_config(17, 2, static_cast<int>(mb.bounds.size()));
    NetworkState state = init_network(cfg, 11);

    Tape t;
    std::vector<Var> weights;
    for (const Eigen::MatrixXd& w : state.weights)
        weights.push_back(t.constant(w));
    Var loss = batch_loss(t, cfg, weights, batch, mb, ctx);

    Eigen::MatrixXd raw = encode_decode(state, batch);
    std::vector<std::vector<double>> params;
    for (Eigen::Index r = 0; r < raw.rows(); ++r) {
        std::vector<double> row(raw.row(r).begin(), raw.row(r).end());
        params.push_back(bound_map(row, mb.bounds));
    }
    const double plain =
        reconstruction_loss(params, batch, models::ModelKind::AnalyticalZ, ctx);
    CHECK(loss.value()(0, 0) == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("loss gradient w.r.t. every weight matches central differences") {
    const FieldContext ctx;
    models::ModelBounds mb = models::exchange_bounds(models::ModelKind::AnalyticalZ,
                                                     {{"amide", 2.1}});
    models::ZModelParams zp{1.4, {{0.003, 700.0, 50.0, 2.1}}};
    std::vector<SampleData> batch = encode_inputs(
        models::ModelKind::AnalyticalZ,
        {z_model_set(zp, ctx, 5, 0.05), z_model_set(zp, ctx, 6, 0.05)}, ctx);

    const NetworkConfig cfg = tiny_config(17, 2, static_cast<int>(mb.bounds.size()));
    NetworkState state = init_network(cfg, 21);

    auto loss_value = [&](const NetworkState& s) {
        Tape t;
        std::vector<Var> weights;
        for (const Eigen::MatrixXd& w : s.weights)
            weights.push_back(t.constant(w));
        return batch_loss(t, cfg, weights, batch, mb, ctx).value()(0, 0);
    };

    Tape t;
    std::vector<Var> weights = weight_leaves(t, state);
    Var loss = batch_loss(t, cfg, weights, batch, mb, ctx);
    t.backward(loss);

    std::size_t checked = 0;
    for (std::size_t i = 0; i < state.weights.size(); ++i) {
        const Eigen::MatrixXd& g = weights[i].grad();
        for (Eigen::Index r = 0; r < g.rows(); ++r)
            for (Eigen::Index c = 0; c < g.cols(); ++c) {
                NetworkState probe = state;
                const double w0 = probe.weights[i](r, c);
                const double h = 1e-6 * std::max(1.0, std::abs(w0));
                probe.weights[i](r, c) = w0 + h;
                const double fp = loss_value(probe);
                probe.weights[i](r, c) = w0 - h;
                const double fm = loss_value(probe);
                const double fd = (fp - fm) / (2.0 * h);
                const double a = g(r, c);
                CAPTURE(state.names[i]);
                CAPTURE(r);
                CAPTURE(c);
                CHECK(std::abs(a - fd) <=
                      1e-4 * std::max({std::abs(a), std::abs(fd)}) + 1e-10);
                ++checked;
            }
    }
    CHECK(checked > 500); // every entry of every array was compared
}

TEST_CASE("adam_step follows the textbook update") {
    const NetworkConfig cfg = tiny_config(9, 2, 5);
    TrainConfig tc;
    tc.learning_rate = 1e-3;

    SUBCASE("zero gradients leave weights untouched") {
        NetworkState state = init_network(cfg, 3);
        const NetworkState before = state;
        std::vector<Eigen::MatrixXd> zeros;
        for (const Eigen::MatrixXd& w : state.weights)
            zeros.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        adam_step(state, zeros, tc);
        CHECK(state.step == 1);
        for (std::size_t i = 0; i < state.weights.size(); ++i)
            CHECK(all_equal(state.weights[i], before.weights[i]));
    }

    SUBCASE("first step from zero moments is -lr*g/(|g|+eps)") {
        NetworkState state = init_network(cfg, 3);
        const NetworkState before = state;
        std::vector<Eigen::MatrixXd> grads;
        Rng rng(17);
        for (const Eigen::MatrixXd& w : state.weights) {
            Eigen::MatrixXd g(w.rows(), w.cols());
            for (Eigen::Index r = 0; r < g.rows(); ++r)
                for (Eigen::Index c = 0; c < g.cols(); ++c)
                    g(r, c) = rng.uniform(-2.0, 2.0);
            grads.push_back(g);
        }
        adam_step(state, grads, tc);
        for (std::size_t i = 0; i < state.weights.size(); ++i)
            for (Eigen::Index r = 0; r < grads[i].rows(); ++r)
                for (Eigen::Index c = 0; c < grads[i].cols(); ++c) {
                    const double g = grads[i](r, c);
                    const double want = -tc.learning_rate * g / (std::abs(g) + tc.epsilon);
                    const double got = state.weights[i](r, c) - before.weights[i](r, c);
                    CHECK(got == doctest::Approx(want).epsilon(1e-12));
                }
    }

    SUBCASE("constant gradient drives steps toward lr magnitude") {
        NetworkState state = init_network(cfg, 3);
        std::vector<Eigen::MatrixXd> grads;
        for (const Eigen::MatrixXd& w : state.weights)
            grads.push_back(Eigen::MatrixXd::Constant(w.rows(), w.cols(), 0.37));
        double prev = state.weights[0](0, 0);
        for (int s = 0; s < 400; ++s)
            adam_step(state, grads, tc);
        // After warm-up the per-step movement settles at lr * sign(g).
        prev = state.weights[0](0, 0);
        adam_step(state, grads, tc);
        const double delta = state.weights[0](0, 0) - prev;
        CHECK(delta == doctest::Approx(-tc.learning_rate).epsilon(1e-3));
        CHECK(state.step == 401);
    }

    SUBCASE("shape mismatch is rejected") {
        NetworkState state = init_network(cfg, 3);
        std::vector<Eigen::MatrixXd> grads(state.weights.size(),
                                           Eigen::MatrixXd::Zero(1, 1));
        CHECK_THROWS_AS(adam_step(state, grads, tc), ShapeMismatch);
        grads.clear();
        CHECK_THROWS_AS(adam_step(state, grads, tc), ShapeMismatch);
    }
}

namespace {

// Synthetic single-B1 Lorentzian dataset with varying amplitude.
std::vector<SpectrumSet> lorentzian_sets(int count, const FieldContext& ctx,
                                         bool with_labels = false) {
    const std::vector<double> offsets = linspace(-4.0, 4.0, 33);
    std::vector<SpectrumSet> sets;
    Rng rng(404);
    for (int i = 0; i < count; ++i) {
        models::LorentzianParams lp;
        const double amp = 0.05 + 0.3 * i / (count - 1);
        lp.pools = {{amp, gamma_sq_ppm2_to_over4_radps(0.4, ctx), 2.1}};
        std::vector<double> mtr_values = models::lorentzian_forward(lp, offsets, ctx);
        std::vector<double> z(mtr_values.size());
        for (std::size_t j = 0; j < z.size(); ++j)
            z[j] = 1.0 - mtr_values[j] + rng.normal(0.0, 0.002);
        std::optional<LabelMap> label;
        if (with_labels)
            label = LabelMap{{"solute", amp * 100.0}};
        sets.emplace_back(std::vector<Spectrum>{Spectrum(offsets, z, 1.2)}, label);
    }
    return sets;
}

} // namespace

TEST_CASE("training reduces the reconstruction loss and is reproducible") {
    const FieldContext ctx;
    models::ModelBounds mb = models::lorentzian_bounds({{"solute", 2.1}}, 0.1, 1.0, ctx);

    NetworkConfig cfg = tiny_config(0, 0, 0); // bound from the data
    TrainConfig tc;
    tc.epochs = 30;
    tc.folds = 5;
    tc.batch_size = 16;
    tc.learning_rate = 1e-3;
    tc.seed = 5;

    std::vector<SpectrumSet> data = lorentzian_sets(50, ctx);
    std::vector<FoldResult> folds = train(models::ModelKind::Lorentzian, data, mb, cfg, tc, ctx);
    REQUIRE(folds.size() == 5);

    SUBCASE("loss decreases and history is complete") {
        for (const FoldResult& fr : folds) {
            REQUIRE(fr.history.size() == 30);
            CHECK(fr.history.back().train_loss < fr.history.front().train_loss);
            CHECK(fr.history.front().epoch == 1);
            CHECK(fr.history.back().epoch == 30);
            CHECK(fr.state.step > 0);
        }
    }

    SUBCASE("folds partition the dataset") {
        std::vector<int> seen(50, 0);
        for (const FoldResult& fr : folds)
            for (std::size_t idx : fr.held_out)
                seen[idx] += 1;
        for (int s : seen)
            CHECK(s == 1);
    }

    SUBCASE("same seed reproduces the loss history bitwise") {
        std::vector<FoldResult> again =
            train(models::ModelKind::Lorentzian, data, mb, cfg, tc, ctx);
        for (std::size_t f = 0; f < folds.size(); ++f)
            for (std::size_t e = 0; e < folds[f].history.size(); ++e) {
                CHECK(folds[f].history[e].train_loss == again[f].history[e].train_loss);
                CHECK(folds[f].history[e].val_loss == again[f].history[e].val_loss);
            }
    }

    SUBCASE("concentration labels are never consulted") {
        std::vector<SpectrumSet> labeled = lorentzian_sets(50, ctx, true);
        std::vector<FoldResult> with_labels =
            train(models::ModelKind::Lorentzian, labeled, mb, cfg, tc, ctx);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            CHECK(folds[f].history.back().train_loss ==
                  with_labels[f].history.back().train_loss);
            CHECK(folds[f].history.back().val_loss == with_labels[f].history.back().val_loss);
        }
    }

    SUBCASE("prediction from a trained fold stays in bounds and reconstructs") {
        const NetworkState& state = folds[0].state;
        Prediction pred = predict(state, data, mb, ctx);
        CHECK(pred.raw.rows() == 50);
        for (const std::vector<double>& p : pred.params)
            CHECK(mb.bounds.contains(p, 1e-12));
        REQUIRE(pred.reconstructions.size() == 50);
        CHECK(pred.reconstructions[0].rows() == 33);
        CHECK(pred.reconstructions[0].cols() == 1);
        // Purity.
        Prediction again = predict(state, data, mb, ctx);
        CHECK(all_equal(again.raw, pred.raw));
    }
}

TEST_CASE("train validates its inputs") {
    const FieldContext ctx;
    models::ModelBounds mb = models::lorentzian_bounds({{"solute", 2.1}}, 0.1, 1.0, ctx);
    TrainConfig tc;
    tc.epochs = 1;
    std::vector<SpectrumSet> data = lorentzian_sets(4, ctx);
    CHECK_THROWS_AS(
        train(models::ModelKind::Lorentzian, data, mb, NetworkConfig::desk(), tc, ctx),
        InsufficientData);

    data = lorentzian_sets(6, ctx);
    NetworkConfig wrong = tiny_config(12, 1, 3); // dataset has 33 tokens
    CHECK_THROWS_AS(train(models::ModelKind::Lorentzian, data, mb, wrong, tc, ctx),
                    ShapeMismatch);

    models::ModelBounds zmb = models::exchange_bounds(models::ModelKind::AnalyticalZ,
                                                      {{"amide", 2.1}});
    CHECK_THROWS_AS(
        train(models::ModelKind::Lorentzian, data, zmb, tiny_config(0, 0, 0), tc, ctx),
        ConfigError);

    TrainConfig bad = tc;
    bad.folds = 1;
    CHECK_THROWS_AS(
        train(models::ModelKind::Lorentzian, data, mb, tiny_config(0, 0, 0), bad, ctx),
        ConfigError);
}

TEST_CASE("checkpoint round trip preserves the state bitwise") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cestfit_ckpt_test";
    fs::create_directories(dir);
    const std::string path = (dir / "state.ckpt").string();

    const NetworkConfig cfg = tiny_config(9, 2, 5);
    NetworkState state = init_network(cfg, 12);
    // Touch the optimizer state so moments and the counter are nontrivial.
    TrainConfig tc;
    std::vector<Eigen::MatrixXd> grads;
    Rng rng(3);
    for (const Eigen::MatrixXd& w : state.weights) {
        Eigen::MatrixXd g(w.rows(), w.cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r)
            for (Eigen::Index c = 0; c < g.cols(); ++c)
                g(r, c) = rng.uniform(-1.0, 1.0);
        grads.push_back(g);
    }
    adam_step(state, grads, tc);
    adam_step(state, grads, tc);

    save_checkpoint(state, path);
    NetworkState loaded = load_checkpoint(path);

    CHECK(loaded.config == state.config);
    CHECK(loaded.step == 2);
    REQUIRE(loaded.names == state.names);
    for (std::size_t i = 0; i < state.weights.size(); ++i) {
        CHECK(all_equal(loaded.weights[i], state.weights[i]));
        CHECK(all_equal(loaded.adam_m[i], state.adam_m[i]));
        CHECK(all_equal(loaded.adam_v[i], state.adam_v[i]));
    }

    // Loaded states are directly usable.
    models::ZModelParams zp{1.4, {{0.002, 600.0, 40.0, 2.1}}};
    const FieldContext ctx;
    std::vector<SampleData> batch =
        encode_inputs(models::ModelKind::AnalyticalZ, {z_model_set(zp, ctx, 9, 0.01)}, ctx);
    // 17-token samples do not fit a 9-token config.
    CHECK_THROWS_AS(encode_decode(loaded, batch), ShapeMismatch);

    SUBCASE("corrupted files are rejected") {
        std::ofstream bad(path, std::ios::binary);
        bad << "not a checkpoint";
        bad.close();
        CHECK_THROWS_AS(load_checkpoint(path), IoError);
        CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string()), IoError);
    }

    fs::remove_all(dir);
}

TEST_CASE("loss history serializes as fold,epoch CSV") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cestfit_losscsv_test";
    fs::create_directories(dir);
    const std::string path = (dir / "loss.csv").string();

    std::vector<FoldResult> folds(2);
    folds[0].fold = 0;
    folds[0].history = {{0, 1, 0.5, 0.6}, {0, 2, 0.25, 0.3}};
    folds[1].fold = 1;
    folds[1].history = {{1, 1, 0.4, 0.5}};
    write_loss_csv(folds, path);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "fold,epoch,train_loss,val_loss");
    std::getline(in, line);
    CHECK(line == "0,1,0.5,0.6");
    int rows = 1;
    while (std::getline(in, line))
        if (!line.empty())
            ++rows;
    CHECK(rows == 3);

    fs::remove_all(dir);
}
