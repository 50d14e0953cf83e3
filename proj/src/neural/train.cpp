#include <algorithm>

#include "cestfit/errors.hpp"
#include "cestfit/neural/model_graph.hpp"
#include "cestfit/neural/network.hpp"
#include "cestfit/rng.hpp"

namespace cestfit::neural {

namespace {

// Binds the data-dependent config dimensions; nonzero values must agree
// with the batch.
NetworkConfig bind_config(NetworkConfig cfg, const std::vector<SampleData>& batch,
                          const models::ModelBounds& mb) {
    const int tokens = static_cast<int>(batch.front().x.rows());
    const int channels = static_cast<int>(batch.front().x.cols());
    const int params = static_cast<int>(mb.bounds.size());
    if (cfg.tokens == 0) cfg.tokens = tokens;
    if (cfg.channels == 0) cfg.channels = channels;
    if (cfg.params == 0) cfg.params = params;
    if (cfg.tokens != tokens || cfg.channels != channels || cfg.params != params)
        throw ShapeMismatch("train: config dimensions do not match the dataset");
    for (const SampleData& s : batch)
        if (s.x.rows() != tokens || s.x.cols() != channels)
            throw ShapeMismatch("train: samples are not on a common grid");
    cfg.validate();
    return cfg;
}

// Forward-only mean loss over samples, chunked to bound tape memory.
double evaluate_loss(const NetworkState& state, const std::vector<SampleData>& samples,
                     const std::vector<std::size_t>& indices, const models::ModelBounds& mb,
                     const FieldContext& ctx, std::size_t chunk) {
    double sum = 0.0;
    std::size_t done = 0;
    while (done < indices.size()) {
        const std::size_t take = std::min(chunk, indices.size() - done);
        std::vector<SampleData> part;
        part.reserve(take);
        for (std::size_t i = 0; i < take; ++i)
            part.push_back(samples[indices[done + i]]);
        Tape t;
        std::vector<Var> weights;
        weights.reserve(state.weights.size());
        for (const Eigen::MatrixXd& w : state.weights)
            weights.push_back(t.constant(w));
        Var loss = batch_loss(t, state.config, weights, part, mb, ctx);
        // Samples share a grid, so the element-mean over the whole list is
        // the sample-count weighted mean of chunk losses.
        sum += loss.value()(0, 0) * static_cast<double>(take);
        done += take;
    }
    return sum / static_cast<double>(indices.size());
}

} // namespace

std::vector<FoldResult> train(models::ModelKind kind, const std::vector<SpectrumSet>& dataset,
                              const models::ModelBounds& mb, NetworkConfig net_cfg,
                              const TrainConfig& train_cfg, const FieldContext& ctx) {
    train_cfg.validate();
    mb.validate();
    if (mb.kind != kind)
        throw ConfigError("train: bounds are for a different model kind");
    if (dataset.size() < static_cast<std::size_t>(train_cfg.folds))
        throw InsufficientData("train: dataset has " + std::to_string(dataset.size()) +
                               " samples, need at least " + std::to_string(train_cfg.folds));

    // Curves only from here on; concentration labels are never consulted.
    const std::vector<SampleData> samples = encode_inputs(kind, dataset, ctx);
    const NetworkConfig cfg = bind_config(std::move(net_cfg), samples, mb);

    const int epochs = train_cfg.epochs_for(kind);
    const std::vector<int> fold_of =
        kfold_assignments(samples.size(), train_cfg.folds, train_cfg.seed);

    std::vector<FoldResult> results;
    results.reserve(static_cast<std::size_t>(train_cfg.folds));
    for (int fold = 0; fold < train_cfg.folds; ++fold) {
        std::vector<std::size_t> train_idx, val_idx;
        for (std::size_t i = 0; i < samples.size(); ++i)
            (fold_of[i] == fold ? val_idx : train_idx).push_back(i);

        FoldResult fr;
        fr.fold = fold;
        fr.held_out = val_idx;
        fr.state = init_network(
            cfg, train_cfg.seed + 1000003ull * static_cast<std::uint64_t>(fold + 1));
        Rng order_rng(train_cfg.seed + 7919ull * static_cast<std::uint64_t>(fold + 1));

        const std::size_t bs = static_cast<std::size_t>(train_cfg.batch_size);
        for (int epoch = 1; epoch <= epochs; ++epoch) {
            std::vector<std::size_t> order = train_idx;
            order_rng.shuffle(order);

            double train_sum = 0.0;
            for (std::size_t at = 0; at < order.size(); at += bs) {
                const std::size_t take = std::min(bs, order.size() - at);
                std::vector<SampleData> part;
                part.reserve(take);
                for (std::size_t i = 0; i < take; ++i)
                    part.push_back(samples[order[at + i]]);
                Tape t;
                std::vector<Var> weights = weight_leaves(t, fr.state);
                Var loss = batch_loss(t, cfg, weights, part, mb, ctx);
                t.backward(loss);
                std::vector<Eigen::MatrixXd> grads;
                grads.reserve(weights.size());
                for (const Var& w : weights)
                    grads.push_back(w.grad());
                adam_step(fr.state, grads, train_cfg);
                train_sum += loss.value()(0, 0) * static_cast<double>(take);
            }
            EpochLoss row;
            row.fold = fold;
            row.epoch = epoch;
            row.train_loss = train_sum / static_cast<double>(order.size());
            row.val_loss = evaluate_loss(fr.state, samples, val_idx, mb, ctx, bs);
            fr.history.push_back(row);
            if (train_cfg.on_epoch)
                train_cfg.on_epoch(row);
        }
        results.push_back(std::move(fr));
    }
    return results;
}

} // namespace cestfit::neural
