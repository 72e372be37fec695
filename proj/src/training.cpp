#include "relprop/training.hpp"

#include <cmath>
#include <stdexcept>

#include "relprop/rng.hpp"

namespace relprop {

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    // lr == 0 is accepted here as a degenerate no-op config; the CLI insists on > 0
    if (learning_rate < 0.0 || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning_rate must be > 0");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
}

template <typename T>
T cross_entropy(const Tensor<T>& probs, std::size_t label) {
    if (probs.rank() != 1 || label >= probs.dim(0)) {
        throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                    " out of range for " + std::to_string(probs.size()) +
                                    " classes");
    }
    const T floored = std::max(probs[label], static_cast<T>(1e-12));
    return -std::log(floored);
}

template <typename T>
Gradients<T> Gradients<T>::zeros_like(const Network<T>& net) {
    Gradients g;
    g.layers.resize(net.layers().size());
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        const auto& p = net.params(k);
        if (!p.has_params()) continue;
        g.layers[k].weights = Tensor<T>(p.weights.shape());
        g.layers[k].bias = p.bias.empty() ? Tensor<T>() : Tensor<T>(p.bias.shape());
    }
    return g;
}

template <typename T>
void Gradients<T>::add(const Gradients& other) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
        for (std::size_t i = 0; i < layers[k].weights.size(); ++i)
            layers[k].weights[i] += other.layers[k].weights[i];
        for (std::size_t i = 0; i < layers[k].bias.size(); ++i)
            layers[k].bias[i] += other.layers[k].bias[i];
    }
}

template <typename T>
void Gradients<T>::scale(T factor) {
    for (auto& layer : layers) {
        for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] *= factor;
        for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] *= factor;
    }
}

namespace {

template <typename T>
Tensor<T> conv2d_backward(const Conv2dSpec& spec, const Tensor<T>& input,
                          const Tensor<T>& weights, const Tensor<T>& upstream,
                          LayerParams<T>& grad) {
    const std::size_t in_h = input.dim(0), in_w = input.dim(1), in_c = input.dim(2);
    const std::size_t kh = weights.dim(0), kw = weights.dim(1), filters = weights.dim(3);
    const ConvGeometry g =
        conv2d_geometry(in_h, in_w, kh, kw, spec.stride, spec.padding);

    Tensor<T> downstream(input.shape());
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * spec.stride) - g.pad_top;
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * spec.stride) - g.pad_left;
            for (std::size_t f = 0; f < filters; ++f) {
                const T up = upstream.at3(oy, ox, f);
                if (!grad.bias.empty()) grad.bias[f] += up;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    const std::ptrdiff_t iy = y0 + static_cast<std::ptrdiff_t>(ky);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::ptrdiff_t ix = x0 + static_cast<std::ptrdiff_t>(kx);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
                        for (std::size_t c = 0; c < in_c; ++c) {
                            const std::size_t uy = static_cast<std::size_t>(iy);
                            const std::size_t ux = static_cast<std::size_t>(ix);
                            grad.weights.at4(ky, kx, c, f) += input.at3(uy, ux, c) * up;
                            downstream.at3(uy, ux, c) += weights.at4(ky, kx, c, f) * up;
                        }
                    }
                }
            }
        }
    }
    return downstream;
}

}  // namespace

template <typename T>
Gradients<T> backward(const Network<T>& net, const ForwardTrace<T>& trace, std::size_t label) {
    const std::size_t layer_count = net.layers().size();
    if (trace.inputs.size() != layer_count) {
        throw std::invalid_argument("backward: trace does not match network layer count");
    }
    if (label >= net.num_classes()) {
        throw std::invalid_argument("backward: label out of range");
    }
    Gradients<T> grads = Gradients<T>::zeros_like(net);

    // softmax + cross-entropy combine to probs - one_hot(label) at the logits
    Tensor<T> upstream = trace.probs;
    upstream[label] -= T{1};

    // the last layer is the softmax itself, already folded into `upstream`
    for (std::size_t k = layer_count - 1; k-- > 0;) {
        const LayerSpec& spec = net.layers()[k];
        const Tensor<T>& input = trace.inputs[k];
        if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
            upstream = conv2d_backward(*conv, input, net.params(k).weights, upstream,
                                       grads.layers[k]);
        } else if (std::holds_alternative<MaxPool2dSpec>(spec)) {
            Tensor<T> downstream(input.shape());
            const auto& argmax = trace.pool_maps[k].argmax;
            for (std::size_t i = 0; i < argmax.size(); ++i)
                downstream[argmax[i]] += upstream[i];
            upstream = std::move(downstream);
        } else if (std::holds_alternative<ReluSpec>(spec)) {
            Tensor<T> downstream(input.shape());
            for (std::size_t i = 0; i < input.size(); ++i)
                downstream[i] = input[i] > T{} ? upstream[i] : T{};
            upstream = std::move(downstream);
        } else if (std::holds_alternative<FlattenSpec>(spec)) {
            upstream = upstream.reshaped(input.shape());
        } else if (std::holds_alternative<DenseSpec>(spec)) {
            const Tensor<T>& w = net.params(k).weights;
            auto& grad = grads.layers[k];
            const std::size_t n = w.dim(0), m = w.dim(1);
            Tensor<T> downstream({n});
            for (std::size_t j = 0; j < m; ++j) {
                if (!grad.bias.empty()) grad.bias[j] += upstream[j];
            }
            for (std::size_t i = 0; i < n; ++i) {
                T acc{};
                for (std::size_t j = 0; j < m; ++j) {
                    grad.weights.at2(i, j) += input[i] * upstream[j];
                    acc += w.at2(i, j) * upstream[j];
                }
                downstream[i] = acc;
            }
            upstream = std::move(downstream);
        }
    }
    return grads;
}

template <typename T>
Gradients<T> accumulate_gradients(const Network<T>& net,
                                  const std::vector<LabeledExample<T>>& batch) {
    Gradients<T> total = Gradients<T>::zeros_like(net);
    for (const auto& example : batch) {
        const ForwardTrace<T> trace = forward(net, example.input);
        total.add(backward(net, trace, example.label));
    }
    return total;
}

template <typename T>
TrainResult<T> sgd_train(Network<T> net, const std::vector<LabeledExample<T>>& data,
                         const TrainConfig& cfg, const IterationCallback<T>& on_iteration) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("sgd_train: data must be non-empty");

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const Rng base(cfg.rng_seed);
    std::vector<double> loss_history;
    loss_history.reserve(cfg.iterations);

    std::size_t epoch = 0;
    std::size_t cursor = data.size();  // forces a shuffle on the first batch
    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        if (cursor >= data.size()) {
            Rng epoch_rng = base.fork(epoch++);
            epoch_rng.shuffle(order);
            cursor = 0;
        }
        const std::size_t take = std::min(cfg.batch_size, data.size() - cursor);

        Gradients<T> total = Gradients<T>::zeros_like(net);
        double batch_loss = 0.0;
        for (std::size_t b = 0; b < take; ++b) {
            const auto& example = data[order[cursor + b]];
            const ForwardTrace<T> trace = forward(net, example.input);
            batch_loss += static_cast<double>(cross_entropy(trace.probs, example.label));
            total.add(backward(net, trace, example.label));
        }
        cursor += take;

        const T step = static_cast<T>(cfg.learning_rate / static_cast<double>(take));
        for (std::size_t k = 0; k < net.layers().size(); ++k) {
            auto& p = net.params(k);
            if (!p.has_params()) continue;
            const auto& g = total.layers[k];
            for (std::size_t i = 0; i < p.weights.size(); ++i)
                p.weights[i] -= step * g.weights[i];
            for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= step * g.bias[i];
        }

        loss_history.push_back(batch_loss / static_cast<double>(take));
        if (on_iteration) on_iteration(iter + 1, net);
    }
    return {std::move(net), std::move(loss_history)};
}

template float cross_entropy(const Tensor<float>&, std::size_t);
template double cross_entropy(const Tensor<double>&, std::size_t);
template struct Gradients<float>;
template struct Gradients<double>;
template Gradients<float> backward(const Network<float>&, const ForwardTrace<float>&,
                                   std::size_t);
template Gradients<double> backward(const Network<double>&, const ForwardTrace<double>&,
                                    std::size_t);
template Gradients<float> accumulate_gradients(const Network<float>&,
                                               const std::vector<LabeledExample<float>>&);
template Gradients<double> accumulate_gradients(const Network<double>&,
                                                const std::vector<LabeledExample<double>>&);
template TrainResult<float> sgd_train(Network<float>, const std::vector<LabeledExample<float>>&,
                                      const TrainConfig&, const IterationCallback<float>&);
template TrainResult<double> sgd_train(Network<double>,
                                       const std::vector<LabeledExample<double>>&,
                                       const TrainConfig&, const IterationCallback<double>&);

}  // namespace relprop
