#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cestfit/field_context.hpp"
#include "cestfit/models/bounds.hpp"
#include "cestfit/neural/tape.hpp"
#include "cestfit/spectrum.hpp"

namespace cestfit::neural {

// Encoder-decoder dimensions. tokens/channels/params describe the data the
// network was built for and are bound at init time (one token per frequency
// offset, one input channel per B1 curve, one output per layout parameter).
struct NetworkConfig {
    int layers = 2;
    int heads = 4;
    int hidden = 64;
    int mlp_dim = 64;
    std::vector<int> decoder_channels{32, 16};
    int tokens = 0;
    int channels = 0;
    int params = 0;

    static NetworkConfig desk();  // small, trainable in minutes on a CPU
    static NetworkConfig paper(); // 8 layers, 8 heads, 1024/1024, [512,256,128,64]

    int head_dim() const { return hidden / heads; }
    // Throws ConfigError unless all dims >= 1 and heads divides hidden.
    void validate() const;
    bool operator==(const NetworkConfig&) const = default;
};

struct EpochLoss;

struct TrainConfig {
    int epochs = 0; // 0 picks the model default: 200 Lorentzian, 1000 otherwise
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int folds = 5;
    int batch_size = 32;
    std::uint64_t seed = 0;
    // Invoked after every epoch (progress reporting, incremental logging).
    // Must not mutate training state.
    std::function<void(const EpochLoss&)> on_epoch;

    void validate() const;
    int epochs_for(models::ModelKind kind) const;
};

// All learnable arrays plus optimizer state. Arrays are addressed by name;
// the order in `names` is the canonical serialization and update order.
struct NetworkState {
    NetworkConfig config;
    std::vector<std::string> names;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::MatrixXd> adam_m;
    std::vector<Eigen::MatrixXd> adam_v;
    std::int64_t step = 0;

    std::size_t index_of(const std::string& name) const; // IndexOutOfRange if absent
    Eigen::MatrixXd& weight(const std::string& name);
    const Eigen::MatrixXd& weight(const std::string& name) const;
};

// Uniform init in +-1/sqrt(fan-in) for matrices, zeros for biases, ones for
// layer-norm gains. Deterministic in the seed.
NetworkState init_network(const NetworkConfig& cfg, std::uint64_t seed);

// Per-sample network input: tokens x channels values in the model's output
// domain (MTR / Z / rescaled relaxation ratio), plus the grids the physical
// model is evaluated on for reconstruction.
struct SampleData {
    Eigen::MatrixXd x;
    std::vector<double> offsets_ppm;
    std::vector<double> omega1_radps;
};

// Lorentzian: single spectrum required, channel is its MTR. AnalyticalZ: one
// channel of raw Z per spectrum. MtrRex: one channel of the rescaled
// relaxation ratio per spectrum, tokens are the positive offsets.
SampleData encode_input(models::ModelKind kind, const SpectrumSet& set,
                        const FieldContext& ctx);
std::vector<SampleData> encode_inputs(models::ModelKind kind,
                                      const std::vector<SpectrumSet>& sets,
                                      const FieldContext& ctx);

// Network forward for one sample on an existing tape: x is tokens x channels,
// weights are tape vars in NetworkState order. Returns the raw 1 x params row.
Var network_forward(Tape& tape, const NetworkConfig& cfg, std::span<const Var> weights,
                    const Eigen::MatrixXd& x);

// Places every weight array on the tape as a gradient-tracked leaf.
std::vector<Var> weight_leaves(Tape& tape, const NetworkState& state);

// Raw outputs f(x), one row per sample. Deterministic given state and batch.
Eigen::MatrixXd encode_decode(const NetworkState& state,
                              const std::vector<SampleData>& batch);

// p = center + deviation .* tanh(raw), elementwise; rows map independently.
std::vector<double> bound_map(std::span<const double> raw,
                              const models::ParamBounds& bounds);
Eigen::MatrixXd bound_map(const Eigen::MatrixXd& raw, const models::ParamBounds& bounds);

// Mean over batch, curves, and offsets of (M(p) - x)^2.
double reconstruction_loss(const std::vector<std::vector<double>>& params,
                           const std::vector<SampleData>& batch, models::ModelKind kind,
                           const FieldContext& ctx);

// Differentiable pipeline for one batch on an existing tape: raw rows from
// network_forward, bound map against `bounds`, physical reconstruction, MSE
// against each sample's own input. Returns the scalar loss node.
Var batch_loss(Tape& tape, const NetworkConfig& cfg, std::span<const Var> weights,
               const std::vector<SampleData>& batch, const models::ModelBounds& mb,
               const FieldContext& ctx);

// Standard Adam with bias correction; increments the step counter. Gradient
// list must match the weight list elementwise.
void adam_step(NetworkState& state, const std::vector<Eigen::MatrixXd>& grads,
               const TrainConfig& cfg);

struct EpochLoss {
    int fold = 0;
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct FoldResult {
    int fold = 0;
    NetworkState state;
    std::vector<EpochLoss> history;
    std::vector<std::size_t> held_out; // dataset indices of the validation fold
};

// Self-supervised k-fold training. Consumes curves only; concentration labels
// are never read. net_cfg.tokens/channels/params are bound from the data and
// bounds automatically when left at 0.
std::vector<FoldResult> train(models::ModelKind kind, const std::vector<SpectrumSet>& dataset,
                              const models::ModelBounds& mb, NetworkConfig net_cfg,
                              const TrainConfig& train_cfg, const FieldContext& ctx);

struct Prediction {
    Eigen::MatrixXd raw;                           // samples x params
    std::vector<std::vector<double>> params;       // bound-mapped rows
    std::vector<Eigen::MatrixXd> reconstructions;  // per sample, tokens x channels
};

Prediction predict(const NetworkState& state, const std::vector<SampleData>& batch,
                   const models::ModelBounds& mb, const FieldContext& ctx);
Prediction predict(const NetworkState& state, const std::vector<SpectrumSet>& sets,
                   const models::ModelBounds& mb, const FieldContext& ctx);

// Single-file binary checkpoint: magic, format version, config snapshot,
// step counter, then named arrays (weights and both Adam moments) row-major
// 64-bit little-endian. load(save(s)) reproduces s exactly.
void save_checkpoint(const NetworkState& state, const std::string& path);
NetworkState load_checkpoint(const std::string& path);

// CSV `fold,epoch,train_loss,val_loss`, one row per epoch per fold.
void write_loss_csv(const std::vector<FoldResult>& folds, const std::string& path);

} // namespace cestfit::neural
