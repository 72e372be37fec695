#include "relprop/network.hpp"

#include <cmath>
#include <stdexcept>

#include "relprop/rng.hpp"

namespace relprop {

const char* layer_kind_name(const LayerSpec& spec) {
    struct Namer {
        const char* operator()(const Conv2dSpec&) const { return "conv2d"; }
        const char* operator()(const MaxPool2dSpec&) const { return "maxpool2d"; }
        const char* operator()(const ReluSpec&) const { return "relu"; }
        const char* operator()(const FlattenSpec&) const { return "flatten"; }
        const char* operator()(const DenseSpec&) const { return "dense"; }
        const char* operator()(const SoftmaxSpec&) const { return "softmax"; }
    };
    return std::visit(Namer{}, spec);
}

namespace {

std::size_t volume(const std::vector<std::size_t>& shape) {
    std::size_t v = 1;
    for (std::size_t d : shape) v *= d;
    return v;
}

}  // namespace

template <typename T>
Network<T>::Network(Shape3 input_shape, std::vector<LayerSpec> layers)
    : input_shape_(input_shape), layers_(std::move(layers)) {
    if (input_shape_.h == 0 || input_shape_.w == 0 || input_shape_.c == 0) {
        throw std::invalid_argument("network input shape dims must be positive");
    }
    if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");

    std::size_t softmax_count = 0;
    std::vector<std::size_t> shape = {input_shape_.h, input_shape_.w, input_shape_.c};
    shape_chain_.push_back(shape);
    params_.resize(layers_.size());

    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const std::string where = "layer " + std::to_string(k) + " (" +
                                  layer_kind_name(layers_[k]) + ")";
        if (const auto* conv = std::get_if<Conv2dSpec>(&layers_[k])) {
            if (conv->filter_h == 0 || conv->filter_w == 0 || conv->filters == 0)
                throw std::invalid_argument(where + ": filter dims and count must be positive");
            if (conv->stride == 0)
                throw std::invalid_argument(where + ": stride must be >= 1");
            if (shape.size() != 3)
                throw std::invalid_argument(where + ": expects a rank-3 input, got " +
                                            shape_string(shape));
            const ConvGeometry g = conv2d_geometry(shape[0], shape[1], conv->filter_h,
                                                   conv->filter_w, conv->stride, conv->padding);
            params_[k].weights =
                Tensor<T>({conv->filter_h, conv->filter_w, shape[2], conv->filters});
            params_[k].bias = Tensor<T>({conv->filters});
            shape = {g.out_h, g.out_w, conv->filters};
        } else if (std::holds_alternative<MaxPool2dSpec>(layers_[k])) {
            if (shape.size() != 3 || shape[0] < 2 || shape[1] < 2)
                throw std::invalid_argument(where + ": needs rank-3 input with spatial dims >= 2, got " +
                                            shape_string(shape));
            shape = {shape[0] / 2, shape[1] / 2, shape[2]};
        } else if (std::holds_alternative<ReluSpec>(layers_[k])) {
            // shape preserved
        } else if (std::holds_alternative<FlattenSpec>(layers_[k])) {
            shape = {volume(shape)};
        } else if (const auto* dense = std::get_if<DenseSpec>(&layers_[k])) {
            if (dense->units == 0)
                throw std::invalid_argument(where + ": unit count must be positive");
            if (shape.size() != 1)
                throw std::invalid_argument(where + ": expects a flat input, got " +
                                            shape_string(shape));
            params_[k].weights = Tensor<T>({shape[0], dense->units});
            params_[k].bias = Tensor<T>({dense->units});
            shape = {dense->units};
        } else if (std::holds_alternative<SoftmaxSpec>(layers_[k])) {
            ++softmax_count;
            if (shape.size() != 1)
                throw std::invalid_argument(where + ": expects a flat input, got " +
                                            shape_string(shape));
        }
        shape_chain_.push_back(shape);
    }

    if (softmax_count != 1 || !std::holds_alternative<SoftmaxSpec>(layers_.back())) {
        throw std::invalid_argument("network must contain exactly one softmax layer, as the last layer");
    }
    num_classes_ = shape.back();
}

template <typename T>
void Network<T>::init_params(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        if (!params_[k].has_params()) continue;
        auto& w = params_[k].weights;
        std::size_t fan_in = 0, fan_out = 0;
        if (const auto* conv = std::get_if<Conv2dSpec>(&layers_[k])) {
            fan_in = conv->filter_h * conv->filter_w * w.dim(2);
            fan_out = conv->filter_h * conv->filter_w * conv->filters;
        } else {
            fan_in = w.dim(0);
            fan_out = w.dim(1);
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = static_cast<T>(rng.uniform(-limit, limit));
        for (std::size_t i = 0; i < params_[k].bias.size(); ++i) params_[k].bias[i] = T{};
    }
}

template <typename T>
void Network<T>::strip_biases() {
    for (auto& p : params_) p.bias = Tensor<T>();
}

template <typename T>
Network<T> build_paper_network(std::size_t num_classes) {
    if (num_classes < 2) throw std::invalid_argument("build_paper_network: num_classes must be >= 2");
    std::vector<LayerSpec> layers;
    const auto conv = [&](std::size_t k, std::size_t filters) {
        layers.push_back(Conv2dSpec{k, k, filters, 1, Padding::SameZero});
        layers.push_back(ReluSpec{});
    };
    conv(5, 10);
    layers.push_back(MaxPool2dSpec{});
    conv(5, 10);
    layers.push_back(MaxPool2dSpec{});
    conv(5, 10);
    layers.push_back(MaxPool2dSpec{});
    conv(4, 25);
    layers.push_back(MaxPool2dSpec{});
    conv(3, 50);
    layers.push_back(MaxPool2dSpec{});
    conv(1, 100);
    layers.push_back(FlattenSpec{});
    layers.push_back(DenseSpec{num_classes});
    layers.push_back(SoftmaxSpec{});
    return Network<T>({112, 112, 3}, std::move(layers));
}

template <typename T>
Tensor<T> apply_layer(const Network<T>& net, std::size_t layer, const Tensor<T>& input,
                      PoolIndexMap* pool_map) {
    const LayerSpec& spec = net.layers()[layer];
    if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
        return conv2d_forward(input, net.params(layer).weights, net.params(layer).bias,
                              conv->stride, conv->padding);
    }
    if (std::holds_alternative<MaxPool2dSpec>(spec)) {
        auto [out, map] = maxpool2d_forward(input);
        if (pool_map) *pool_map = std::move(map);
        return std::move(out);
    }
    if (std::holds_alternative<ReluSpec>(spec)) return relu_forward(input);
    if (std::holds_alternative<FlattenSpec>(spec)) return input.reshaped({input.size()});
    if (std::holds_alternative<DenseSpec>(spec)) {
        return dense_forward(input, net.params(layer).weights, net.params(layer).bias);
    }
    return softmax_forward(input);
}

template <typename T>
ForwardTrace<T> forward(const Network<T>& net, const Tensor<T>& input) {
    const Shape3 want = net.input_shape();
    if (input.rank() != 3 || input.dim(0) != want.h || input.dim(1) != want.w ||
        input.dim(2) != want.c) {
        throw std::invalid_argument("forward: input shape " + shape_string(input.shape()) +
                                    " does not match network input " +
                                    shape_string({want.h, want.w, want.c}));
    }
    ForwardTrace<T> trace;
    const std::size_t layer_count = net.layers().size();
    trace.inputs.reserve(layer_count);
    trace.pool_maps.resize(layer_count);

    Tensor<T> current = input;
    for (std::size_t k = 0; k < layer_count; ++k) {
        trace.inputs.push_back(current);
        if (k + 1 == layer_count) trace.logits = current;
        current = apply_layer(net, k, current, &trace.pool_maps[k]);
    }
    trace.probs = std::move(current);
    return trace;
}

template class Network<float>;
template class Network<double>;
template Network<float> build_paper_network<float>(std::size_t);
template Network<double> build_paper_network<double>(std::size_t);
template ForwardTrace<float> forward(const Network<float>&, const Tensor<float>&);
template ForwardTrace<double> forward(const Network<double>&, const Tensor<double>&);
template Tensor<float> apply_layer(const Network<float>&, std::size_t, const Tensor<float>&,
                                   PoolIndexMap*);
template Tensor<double> apply_layer(const Network<double>&, std::size_t, const Tensor<double>&,
                                    PoolIndexMap*);

}  // namespace relprop
