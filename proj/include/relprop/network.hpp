#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "relprop/layers.hpp"
#include "relprop/tensor.hpp"

namespace relprop {

struct Conv2dSpec {
    std::size_t filter_h = 0;
    std::size_t filter_w = 0;
    std::size_t filters = 0;
    std::size_t stride = 1;
    Padding padding = Padding::SameZero;
};

/// Fixed 2×2 window with stride 2; the only pooling this stack uses.
struct MaxPool2dSpec {};
struct ReluSpec {};
struct FlattenSpec {};

struct DenseSpec {
    std::size_t units = 0;
};

struct SoftmaxSpec {};

using LayerSpec =
    std::variant<Conv2dSpec, MaxPool2dSpec, ReluSpec, FlattenSpec, DenseSpec, SoftmaxSpec>;

const char* layer_kind_name(const LayerSpec& spec);

struct Shape3 {
    std::size_t h = 0;
    std::size_t w = 0;
    std::size_t c = 0;

    friend bool operator==(const Shape3&, const Shape3&) = default;
};

/// Weight and bias tensors of one layer; both null for parameter-free layers.
template <typename T>
struct LayerParams {
    Tensor<T> weights;
    Tensor<T> bias;

    bool has_params() const { return !weights.empty(); }
};

/// A sequential network: ordered layer specs plus their parameters. The
/// constructor chases shapes through every layer and rejects incompatible
/// stacks, so a constructed Network always satisfies the shape invariant.
/// Immutable layer structure; parameters are mutable for training.
template <typename T>
class Network {
public:
    Network(Shape3 input_shape, std::vector<LayerSpec> layers);

    const std::vector<LayerSpec>& layers() const { return layers_; }
    Shape3 input_shape() const { return input_shape_; }
    std::size_t num_classes() const { return num_classes_; }

    /// Input shape of layer k, for k in [0, layer_count]; the last entry is
    /// the output shape.
    const std::vector<std::vector<std::size_t>>& shape_chain() const { return shape_chain_; }

    LayerParams<T>& params(std::size_t layer) { return params_[layer]; }
    const LayerParams<T>& params(std::size_t layer) const { return params_[layer]; }
    std::vector<LayerParams<T>>& params() { return params_; }
    const std::vector<LayerParams<T>>& params() const { return params_; }

    /// Glorot-uniform weights in ±sqrt(6/(fan_in+fan_out)), zero biases.
    void init_params(std::uint64_t seed);

    /// Drop all bias terms (used by conservation-critical tests).
    void strip_biases();

    template <typename U>
    Network<U> cast() const {
        Network<U> other(input_shape_, layers_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            if (!params_[i].has_params()) continue;
            other.params(i).weights = params_[i].weights.template cast<U>();
            if (!params_[i].bias.empty())
                other.params(i).bias = params_[i].bias.template cast<U>();
        }
        return other;
    }

private:
    Shape3 input_shape_;
    std::vector<LayerSpec> layers_;
    std::vector<LayerParams<T>> params_;
    std::vector<std::vector<std::size_t>> shape_chain_;
    std::size_t num_classes_ = 0;
};

/// The six-conv classifier: conv5×5×10 ×3, conv4×4×25, conv3×3×50,
/// conv1×1×100, each followed by ReLU and (except the last) a 2×2 pool, then
/// flatten, dense(num_classes), softmax. Input 112×112×3, same-zero padding,
/// spatial trace 112→56→28→14→7→3→3. Parameters are zero until init_params.
template <typename T>
Network<T> build_paper_network(std::size_t num_classes);

/// Per-layer inputs recorded during forward, plus pool argmax maps, exactly
/// what relevance propagation and backprop consume. inputs[k] feeds layer k;
/// probs is the softmax output and logits its input.
template <typename T>
struct ForwardTrace {
    std::vector<Tensor<T>> inputs;
    std::vector<PoolIndexMap> pool_maps;  // aligned with layers; empty unless maxpool
    Tensor<T> logits;
    Tensor<T> probs;
};

template <typename T>
ForwardTrace<T> forward(const Network<T>& net, const Tensor<T>& input);

/// Runs one layer on the given input (parameters taken from the network).
/// Shared by forward() and the trace-replay determinism test.
template <typename T>
Tensor<T> apply_layer(const Network<T>& net, std::size_t layer, const Tensor<T>& input,
                      PoolIndexMap* pool_map = nullptr);

}  // namespace relprop
