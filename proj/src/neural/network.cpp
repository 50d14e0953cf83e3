#include "cestfit/neural/network.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cestfit/errors.hpp"
#include "cestfit/metrics.hpp"
#include "cestfit/models/forward.hpp"
#include "cestfit/neural/model_graph.hpp"
#include "cestfit/rng.hpp"
#include "cestfit/units.hpp"

namespace cestfit::neural {

namespace {

// fan > 0: uniform in +-1/sqrt(fan); fan == 0: zeros; fan == -1: ones.
struct ArraySpec {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    int fan = 0;
};

std::vector<ArraySpec> array_specs(const NetworkConfig& cfg) {
    cfg.validate();
    if (cfg.tokens < 1 || cfg.channels < 1 || cfg.params < 1)
        throw ConfigError("NetworkConfig: tokens, channels and params must be bound before use");
    const int dh = cfg.head_dim();
    std::vector<ArraySpec> specs;
    specs.push_back({"embed.w", cfg.channels, cfg.hidden, cfg.channels});
    specs.push_back({"embed.b", 1, cfg.hidden, 0});
    specs.push_back({"pos", cfg.tokens, cfg.hidden, cfg.hidden});
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string p = "enc" + std::to_string(l) + ".";
        specs.push_back({p + "ln1.g", 1, cfg.hidden, -1});
        specs.push_back({p + "ln1.b", 1, cfg.hidden, 0});
        for (int h = 0; h < cfg.heads; ++h) {
            const std::string q = p + "h" + std::to_string(h) + ".";
            specs.push_back({q + "q", cfg.hidden, dh, cfg.hidden});
            specs.push_back({q + "k", cfg.hidden, dh, cfg.hidden});
            specs.push_back({q + "v", cfg.hidden, dh, cfg.hidden});
            specs.push_back({q + "o", dh, cfg.hidden, dh});
        }
        specs.push_back({p + "ln2.g", 1, cfg.hidden, -1});
        specs.push_back({p + "ln2.b", 1, cfg.hidden, 0});
        specs.push_back({p + "mlp.w1", cfg.hidden, cfg.mlp_dim, cfg.hidden});
        specs.push_back({p + "mlp.b1", 1, cfg.mlp_dim, 0});
        specs.push_back({p + "mlp.w2", cfg.mlp_dim, cfg.hidden, cfg.mlp_dim});
        specs.push_back({p + "mlp.b2", 1, cfg.hidden, 0});
    }
    int in_ch = cfg.hidden;
    for (std::size_t c = 0; c < cfg.decoder_channels.size(); ++c) {
        const std::string p = "dec" + std::to_string(c) + ".";
        const int out_ch = cfg.decoder_channels[c];
        for (int tap = 0; tap < 3; ++tap)
            specs.push_back({p + "w" + std::to_string(tap), in_ch, out_ch, 3 * in_ch});
        specs.push_back({p + "b", 1, out_ch, 0});
        in_ch = out_ch;
    }
    specs.push_back({"head.w1", in_ch, cfg.mlp_dim, in_ch});
    specs.push_back({"head.b1", 1, cfg.mlp_dim, 0});
    specs.push_back({"head.w2", cfg.mlp_dim, cfg.params, cfg.mlp_dim});
    specs.push_back({"head.b2", 1, cfg.params, 0});
    return specs;
}

nlohmann::json config_to_json(const NetworkConfig& cfg) {
    return {{"layers", cfg.layers},
            {"heads", cfg.heads},
            {"hidden", cfg.hidden},
            {"mlp_dim", cfg.mlp_dim},
            {"decoder_channels", cfg.decoder_channels},
            {"tokens", cfg.tokens},
            {"channels", cfg.channels},
            {"params", cfg.params}};
}

NetworkConfig config_from_json(const nlohmann::json& j) {
    NetworkConfig cfg;
    cfg.layers = j.at("layers").get<int>();
    cfg.heads = j.at("heads").get<int>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.mlp_dim = j.at("mlp_dim").get<int>();
    cfg.decoder_channels = j.at("decoder_channels").get<std::vector<int>>();
    cfg.tokens = j.at("tokens").get<int>();
    cfg.channels = j.at("channels").get<int>();
    cfg.params = j.at("params").get<int>();
    return cfg;
}

} // namespace

NetworkConfig NetworkConfig::desk() { return NetworkConfig{}; }

NetworkConfig NetworkConfig::paper() {
    NetworkConfig cfg;
    cfg.layers = 8;
    cfg.heads = 8;
    cfg.hidden = 1024;
    cfg.mlp_dim = 1024;
    cfg.decoder_channels = {512, 256, 128, 64};
    return cfg;
}

void NetworkConfig::validate() const {
    if (layers < 1 || heads < 1 || hidden < 1 || mlp_dim < 1)
        throw ConfigError("NetworkConfig: all dimensions must be >= 1");
    if (hidden % heads != 0)
        throw ConfigError("NetworkConfig: heads must divide hidden size");
    if (decoder_channels.empty())
        throw ConfigError("NetworkConfig: need at least one decoder channel");
    for (int c : decoder_channels)
        if (c < 1)
            throw ConfigError("NetworkConfig: decoder channels must be >= 1");
    if (tokens < 0 || channels < 0 || params < 0)
        throw ConfigError("NetworkConfig: data dimensions must not be negative");
}

void TrainConfig::validate() const {
    if (epochs < 0)
        throw ConfigError("TrainConfig: epochs must be >= 0");
    if (!(learning_rate > 0.0))
        throw ConfigError("TrainConfig: learning rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("TrainConfig: betas must lie in [0, 1)");
    if (!(epsilon > 0.0))
        throw ConfigError("TrainConfig: epsilon must be > 0");
    if (folds < 2)
        throw ConfigError("TrainConfig: need at least 2 folds");
    if (batch_size < 1)
        throw ConfigError("TrainConfig: batch size must be >= 1");
}

int TrainConfig::epochs_for(models::ModelKind kind) const {
    if (epochs > 0)
        return epochs;
    return kind == models::ModelKind::Lorentzian ? 200 : 1000;
}

std::size_t NetworkState::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return i;
    throw IndexOutOfRange("NetworkState: no array named " + name);
}

Eigen::MatrixXd& NetworkState::weight(const std::string& name) {
    return weights[index_of(name)];
}

const Eigen::MatrixXd& NetworkState::weight(const std::string& name) const {
    return weights[index_of(name)];
}

NetworkState init_network(const NetworkConfig& cfg, std::uint64_t seed) {
    const std::vector<ArraySpec> specs = array_specs(cfg);
    NetworkState state;
    state.config = cfg;
    Rng rng(seed);
    for (const ArraySpec& spec : specs) {
        Eigen::MatrixXd w(spec.rows, spec.cols);
        if (spec.fan == 0) {
            w.setZero();
        } else if (spec.fan == -1) {
            w.setOnes();
        } else {
            const double s = 1.0 / std::sqrt(static_cast<double>(spec.fan));
            for (Eigen::Index r = 0; r < spec.rows; ++r)
                for (Eigen::Index c = 0; c < spec.cols; ++c)
                    w(r, c) = rng.uniform(-s, s);
        }
        state.names.push_back(spec.name);
        state.adam_m.push_back(Eigen::MatrixXd::Zero(spec.rows, spec.cols));
        state.adam_v.push_back(Eigen::MatrixXd::Zero(spec.rows, spec.cols));
        state.weights.push_back(std::move(w));
    }
    return state;
}

SampleData encode_input(models::ModelKind kind, const SpectrumSet& set,
                        const FieldContext& ctx) {
    SampleData sample;
    switch (kind) {
    case models::ModelKind::Lorentzian: {
        if (set.size() != 1)
            throw ShapeMismatch("Lorentzian network input expects exactly one spectrum, got " +
                                std::to_string(set.size()));
        const Spectrum& s = set.spectra().front();
        const MetricCurve curve = mtr(s);
        sample.offsets_ppm = curve.offsets_ppm;
        sample.omega1_radps = {b1_to_radps(s.b1_ut(), ctx)};
        sample.x = Eigen::Map<const Eigen::VectorXd>(
            curve.values.data(), static_cast<Eigen::Index>(curve.values.size()));
        return sample;
    }
    case models::ModelKind::AnalyticalZ: {
        sample.offsets_ppm = set.offsets_ppm();
        const Eigen::Index n = static_cast<Eigen::Index>(sample.offsets_ppm.size());
        sample.x.resize(n, static_cast<Eigen::Index>(set.size()));
        for (std::size_t c = 0; c < set.size(); ++c) {
            const Spectrum& s = set.spectra()[c];
            sample.omega1_radps.push_back(b1_to_radps(s.b1_ut(), ctx));
            sample.x.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(
                s.z().data(), static_cast<Eigen::Index>(s.z().size()));
        }
        return sample;
    }
    case models::ModelKind::MtrRex: {
        for (std::size_t c = 0; c < set.size(); ++c) {
            const Spectrum& s = set.spectra()[c];
            MetricCurve curve;
            try {
                curve = mtr_rex_lhs(s, ctx);
            } catch (const AsymmetricSupport& e) {
                throw ShapeMismatch(std::string("MTR_Rex network input: ") + e.what());
            }
            if (c == 0) {
                sample.offsets_ppm = curve.offsets_ppm;
                sample.x.resize(static_cast<Eigen::Index>(curve.values.size()),
                                static_cast<Eigen::Index>(set.size()));
            }
            sample.omega1_radps.push_back(b1_to_radps(s.b1_ut(), ctx));
            sample.x.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(
                curve.values.data(), static_cast<Eigen::Index>(curve.values.size()));
        }
        return sample;
    }
    }
    throw ConfigError("encode_input: unknown model kind");
}

std::vector<SampleData> encode_inputs(models::ModelKind kind,
                                      const std::vector<SpectrumSet>& sets,
                                      const FieldContext& ctx) {
    std::vector<SampleData> batch;
    batch.reserve(sets.size());
    for (const SpectrumSet& set : sets)
        batch.push_back(encode_input(kind, set, ctx));
    return batch;
}

Var network_forward(Tape& t, const NetworkConfig& cfg, std::span<const Var> weights,
                    const Eigen::MatrixXd& x) {
    if (x.rows() != cfg.tokens || x.cols() != cfg.channels)
        throw ShapeMismatch("network_forward: input is " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()) + ", config wants " +
                            std::to_string(cfg.tokens) + "x" + std::to_string(cfg.channels));
    // Weights are consumed in array_specs order.
    std::size_t cursor = 0;
    auto next = [&]() -> Var {
        if (cursor >= weights.size())
            throw ShapeMismatch("network_forward: weight list shorter than the config needs");
        return weights[cursor++];
    };

    Var w_embed = next(), b_embed = next(), pos = next();
    Var tok = t.add(t.add_rowvec(t.matmul(t.constant(x), w_embed), b_embed), pos);

    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim()));
    for (int l = 0; l < cfg.layers; ++l) {
        Var g1 = next(), b1 = next();
        Var ln = t.add_rowvec(t.mul_rowvec(t.layer_norm_rows(tok), g1), b1);
        Var att;
        for (int h = 0; h < cfg.heads; ++h) {
            Var wq = next(), wk = next(), wv = next(), wo = next();
            Var q = t.matmul(ln, wq);
            Var k = t.matmul(ln, wk);
            Var v = t.matmul(ln, wv);
            Var probs = t.row_softmax(t.scalar_mul(t.matmul_nt(q, k), inv_sqrt_dh));
            Var head = t.matmul(t.matmul(probs, v), wo);
            att = (h == 0) ? head : t.add(att, head);
        }
        tok = t.add(tok, att);
        Var g2 = next(), b2 = next();
        Var ln2 = t.add_rowvec(t.mul_rowvec(t.layer_norm_rows(tok), g2), b2);
        Var w1 = next(), bm1 = next(), w2 = next(), bm2 = next();
        Var mlp = t.add_rowvec(
            t.matmul(t.gelu(t.add_rowvec(t.matmul(ln2, w1), bm1)), w2), bm2);
        tok = t.add(tok, mlp);
    }

    // 1-D convolutions of kernel 3 over the token axis, zero-padded.
    Var feat = tok;
    for (std::size_t c = 0; c < cfg.decoder_channels.size(); ++c) {
        Var w0 = next(), w1 = next(), w2 = next(), b = next();
        Var sum = t.add(t.add(t.matmul(t.shift_rows(feat, 1), w0), t.matmul(feat, w1)),
                        t.matmul(t.shift_rows(feat, -1), w2));
        feat = t.gelu(t.add_rowvec(sum, b));
    }

    Var pooled = t.col_mean(feat);
    Var hw1 = next(), hb1 = next(), hw2 = next(), hb2 = next();
    Var raw = t.add_rowvec(
        t.matmul(t.gelu(t.add_rowvec(t.matmul(pooled, hw1), hb1)), hw2), hb2);
    if (cursor != weights.size())
        throw ShapeMismatch("network_forward: weight list longer than the config needs");
    return raw;
}

std::vector<Var> weight_leaves(Tape& t, const NetworkState& state) {
    std::vector<Var> vars;
    vars.reserve(state.weights.size());
    for (const Eigen::MatrixXd& w : state.weights)
        vars.push_back(t.leaf(w));
    return vars;
}

Eigen::MatrixXd encode_decode(const NetworkState& state, const std::vector<SampleData>& batch) {
    const NetworkConfig& cfg = state.config;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(batch.size()), cfg.params);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        // Fresh tape per sample: prediction needs no gradients and no
        // cross-sample state, so memory stays bounded.
        Tape t;
        std::vector<Var> weights;
        weights.reserve(state.weights.size());
        for (const Eigen::MatrixXd& w : state.weights)
            weights.push_back(t.constant(w));
        Var raw = network_forward(t, cfg, weights, batch[i].x);
        out.row(static_cast<Eigen::Index>(i)) = raw.value().row(0);
    }
    return out;
}

std::vector<double> bound_map(std::span<const double> raw, const models::ParamBounds& bounds) {
    if (raw.size() != bounds.size())
        throw LengthMismatch("bound_map: raw vector length " + std::to_string(raw.size()) +
                             " does not match bounds size " + std::to_string(bounds.size()));
    std::vector<double> p(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j)
        p[j] = bounds.center[j] + bounds.deviation[j] * std::tanh(raw[j]);
    return p;
}

Eigen::MatrixXd bound_map(const Eigen::MatrixXd& raw, const models::ParamBounds& bounds) {
    if (static_cast<std::size_t>(raw.cols()) != bounds.size())
        throw LengthMismatch("bound_map: raw has " + std::to_string(raw.cols()) +
                             " columns, bounds size is " + std::to_string(bounds.size()));
    Eigen::MatrixXd p(raw.rows(), raw.cols());
    for (Eigen::Index r = 0; r < raw.rows(); ++r)
        for (Eigen::Index c = 0; c < raw.cols(); ++c)
            p(r, c) = bounds.center[static_cast<std::size_t>(c)] +
                      bounds.deviation[static_cast<std::size_t>(c)] * std::tanh(raw(r, c));
    return p;
}

namespace {

// Plain (non-tape) model reconstruction of one sample, tokens x channels.
Eigen::MatrixXd reconstruct(std::span<const double> params, const SampleData& sample,
                            models::ModelKind kind, const FieldContext& ctx) {
    const Eigen::Index n = sample.x.rows();
    Eigen::MatrixXd m(n, sample.x.cols());
    for (Eigen::Index c = 0; c < sample.x.cols(); ++c) {
        std::vector<double> values;
        switch (kind) {
        case models::ModelKind::Lorentzian:
            values = models::lorentzian_forward(models::unflatten_lorentzian(params),
                                                sample.offsets_ppm, ctx);
            break;
        case models::ModelKind::AnalyticalZ:
            values = models::z_forward(models::unflatten_z(params), sample.offsets_ppm,
                                       sample.omega1_radps[static_cast<std::size_t>(c)], ctx);
            break;
        case models::ModelKind::MtrRex:
            values = models::mtr_rex_forward(models::unflatten_z(params), sample.offsets_ppm,
                                             sample.omega1_radps[static_cast<std::size_t>(c)], ctx);
            break;
        }
        m.col(c) = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
    }
    return m;
}

} // namespace

double reconstruction_loss(const std::vector<std::vector<double>>& params,
                           const std::vector<SampleData>& batch, models::ModelKind kind,
                           const FieldContext& ctx) {
    if (params.size() != batch.size())
        throw ShapeMismatch("reconstruction_loss: one parameter vector per sample required");
    if (batch.empty())
        throw ShapeMismatch("reconstruction_loss: empty batch");
    double sse = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Eigen::MatrixXd m = reconstruct(params[i], batch[i], kind, ctx);
        sse += (m - batch[i].x).squaredNorm();
        count += static_cast<double>(batch[i].x.size());
    }
    return sse / count;
}

Var batch_loss(Tape& t, const NetworkConfig& cfg, std::span<const Var> weights,
               const std::vector<SampleData>& batch, const models::ModelBounds& mb,
               const FieldContext& ctx) {
    if (batch.empty())
        throw ShapeMismatch("batch_loss: empty batch");
    if (static_cast<std::size_t>(cfg.params) != mb.bounds.size())
        throw ShapeMismatch("batch_loss: config params do not match the bounds layout");
    Eigen::RowVectorXd center = Eigen::Map<const Eigen::RowVectorXd>(
        mb.bounds.center.data(), static_cast<Eigen::Index>(mb.bounds.size()));
    Eigen::RowVectorXd deviation = Eigen::Map<const Eigen::RowVectorXd>(
        mb.bounds.deviation.data(), static_cast<Eigen::Index>(mb.bounds.size()));
    Var c_row = t.constant(center);
    Var d_row = t.constant(deviation);

    Var total;
    double count = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const SampleData& sample = batch[i];
        Var raw = network_forward(t, cfg, weights, sample.x);
        Var p = t.add(t.mul(t.tanh(raw), d_row), c_row);
        std::vector<Var> curves = model_curves(t, p, mb.kind, sample.offsets_ppm,
                                               sample.omega1_radps, mb.pool_names.size(), ctx);
        for (std::size_t c = 0; c < curves.size(); ++c) {
            Var target = t.constant(sample.x.col(static_cast<Eigen::Index>(c)).transpose());
            Var res = t.sub(curves[c], target);
            Var sse = t.sum_all(t.mul(res, res));
            total = (i == 0 && c == 0) ? sse : t.add(total, sse);
        }
        count += static_cast<double>(sample.x.size());
    }
    return t.scalar_mul(total, 1.0 / count);
}

void adam_step(NetworkState& state, const std::vector<Eigen::MatrixXd>& grads,
               const TrainConfig& cfg) {
    if (grads.size() != state.weights.size())
        throw ShapeMismatch("adam_step: gradient count does not match weight count");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (grads[i].rows() != state.weights[i].rows() ||
            grads[i].cols() != state.weights[i].cols())
            throw ShapeMismatch("adam_step: gradient shape mismatch at " + state.names[i]);
    const double t = static_cast<double>(state.step + 1);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        state.adam_m[i] = cfg.beta1 * state.adam_m[i] + (1.0 - cfg.beta1) * grads[i];
        state.adam_v[i] = (cfg.beta2 * state.adam_v[i].array() +
                           (1.0 - cfg.beta2) * grads[i].array().square())
                              .matrix();
        state.weights[i].array() -= cfg.learning_rate * (state.adam_m[i].array() / bc1) /
                                    ((state.adam_v[i].array() / bc2).sqrt() + cfg.epsilon);
    }
    state.step += 1;
}

Prediction predict(const NetworkState& state, const std::vector<SampleData>& batch,
                   const models::ModelBounds& mb, const FieldContext& ctx) {
    if (static_cast<std::size_t>(state.config.params) != mb.bounds.size())
        throw ShapeMismatch("predict: config params do not match the bounds layout");
    Prediction out;
    out.raw = encode_decode(state, batch);
    for (Eigen::Index r = 0; r < out.raw.rows(); ++r) {
        std::vector<double> raw(out.raw.row(r).begin(), out.raw.row(r).end());
        out.params.push_back(bound_map(raw, mb.bounds));
        out.reconstructions.push_back(
            reconstruct(out.params.back(), batch[static_cast<std::size_t>(r)], mb.kind, ctx));
    }
    return out;
}

Prediction predict(const NetworkState& state, const std::vector<SpectrumSet>& sets,
                   const models::ModelBounds& mb, const FieldContext& ctx) {
    return predict(state, encode_inputs(mb.kind, sets, ctx), mb, ctx);
}

namespace {

constexpr char kMagic[4] = {'C', 'F', 'N', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct ByteReader {
    const std::string& data;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > data.size())
            throw IoError("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data.substr(pos, n);
        pos += n;
        return s;
    }
};

void put_matrix(std::string& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            put_f64(out, m(r, c));
}

Eigen::MatrixXd read_matrix(ByteReader& in, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = in.f64();
    return m;
}

} // namespace

void save_checkpoint(const NetworkState& state, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    const std::string cfg = config_to_json(state.config).dump();
    put_u32(out, static_cast<std::uint32_t>(cfg.size()));
    out += cfg;
    put_u64(out, static_cast<std::uint64_t>(state.step));
    put_u32(out, static_cast<std::uint32_t>(state.weights.size()));
    for (std::size_t i = 0; i < state.weights.size(); ++i) {
        put_u32(out, static_cast<std::uint32_t>(state.names[i].size()));
        out += state.names[i];
        put_u64(out, static_cast<std::uint64_t>(state.weights[i].rows()));
        put_u64(out, static_cast<std::uint64_t>(state.weights[i].cols()));
        put_matrix(out, state.weights[i]);
        put_matrix(out, state.adam_m[i]);
        put_matrix(out, state.adam_v[i]);
    }
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw IoError("checkpoint: cannot open " + path + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file)
        throw IoError("checkpoint: write failed for " + path);
}

NetworkState load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw IoError("checkpoint: cannot open " + path);
    std::ostringstream buf;
    buf << file.rdbuf();
    const std::string data = buf.str();
    ByteReader in{data};
    if (in.bytes(4) != std::string(kMagic, 4))
        throw IoError("checkpoint: bad magic in " + path);
    if (in.u32() != kVersion)
        throw IoError("checkpoint: unsupported format version in " + path);
    NetworkState state;
    const std::size_t cfg_len = in.u32();
    state.config = config_from_json(nlohmann::json::parse(in.bytes(cfg_len)));
    state.step = static_cast<std::int64_t>(in.u64());
    const std::uint32_t count = in.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t name_len = in.u32();
        state.names.push_back(in.bytes(name_len));
        const Eigen::Index rows = static_cast<Eigen::Index>(in.u64());
        const Eigen::Index cols = static_cast<Eigen::Index>(in.u64());
        if (rows < 0 || cols < 0 || rows * cols > (1LL << 32))
            throw IoError("checkpoint: implausible array shape in " + path);
        state.weights.push_back(read_matrix(in, rows, cols));
        state.adam_m.push_back(read_matrix(in, rows, cols));
        state.adam_v.push_back(read_matrix(in, rows, cols));
    }
    if (in.pos != data.size())
        throw IoError("checkpoint: trailing bytes in " + path);
    // The stored arrays must be exactly what the config dictates.
    const std::vector<ArraySpec> specs = array_specs(state.config);
    if (specs.size() != state.weights.size())
        throw IoError("checkpoint: array count does not match config in " + path);
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (specs[i].name != state.names[i] || specs[i].rows != state.weights[i].rows() ||
            specs[i].cols != state.weights[i].cols())
            throw IoError("checkpoint: array " + state.names[i] + " does not match config");
    return state;
}

void write_loss_csv(const std::vector<FoldResult>& folds, const std::string& path) {
    std::ofstream file(path);
    if (!file)
        throw IoError("loss csv: cannot open " + path + " for writing");
    // Shortest representation that round-trips to the same double.
    auto fmt = [](double v) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, end);
    };
    file << "fold,epoch,train_loss,val_loss\n";
    for (const FoldResult& fr : folds)
        for (const EpochLoss& e : fr.history)
            file << e.fold << ',' << e.epoch << ',' << fmt(e.train_loss) << ','
                 << fmt(e.val_loss) << '\n';
    if (!file)
        throw IoError("loss csv: write failed for " + path);
}

} // namespace cestfit::neural
