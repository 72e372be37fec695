#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "relprop/network.hpp"

namespace relprop {

enum class NumericPrecision { F32, F64 };

struct TrainConfig {
    std::size_t batch_size = 25;
    double learning_rate = 0.001;
    std::size_t iterations = 50000;
    std::uint64_t rng_seed = 0;
    NumericPrecision precision = NumericPrecision::F32;

    void validate() const;
};

template <typename T>
struct LabeledExample {
    Tensor<T> input;
    std::size_t label = 0;
};

/// -log(probs[label]), with the probability floored at 1e-12 inside the log.
template <typename T>
T cross_entropy(const Tensor<T>& probs, std::size_t label);

/// Per-layer parameter gradients, shaped exactly like the network's params.
template <typename T>
struct Gradients {
    std::vector<LayerParams<T>> layers;

    static Gradients zeros_like(const Network<T>& net);
    void add(const Gradients& other);
    void scale(T factor);
};

/// Exact reverse-mode gradients of the cross-entropy loss at `label` with
/// respect to every weight and bias, given the trace of a forward pass on the
/// same input.
template <typename T>
Gradients<T> backward(const Network<T>& net, const ForwardTrace<T>& trace, std::size_t label);

/// Sum of per-example gradients over a batch (callers divide by batch size
/// for the mean).
template <typename T>
Gradients<T> accumulate_gradients(const Network<T>& net,
                                  const std::vector<LabeledExample<T>>& batch);

template <typename T>
struct TrainResult {
    Network<T> net;
    std::vector<double> loss_history;  // batch mean loss, one entry per iteration
};

/// Called after each iteration; used for checkpointing.
template <typename T>
using IterationCallback = std::function<void(std::size_t iteration, const Network<T>& net)>;

/// Plain SGD: w <- w - lr * (batch mean gradient). Examples are reshuffled at
/// every epoch boundary with a seed derived from cfg.rng_seed and the epoch
/// index, so runs are bit-reproducible.
template <typename T>
TrainResult<T> sgd_train(Network<T> net, const std::vector<LabeledExample<T>>& data,
                         const TrainConfig& cfg, const IterationCallback<T>& on_iteration = {});

}  // namespace relprop
