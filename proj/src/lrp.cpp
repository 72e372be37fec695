#include "relprop/lrp.hpp"

#include <stdexcept>

namespace relprop {

namespace {

/// Part-sum bookkeeping for one output unit. Shares are z_part / part_sum
/// weighted by alpha, beta, or 1 when the other part is empty.
template <typename T>
struct PartCoefficients {
    T pos = 0;  // multiplier applied to z+ / pos_sum
    T neg = 0;  // multiplier applied to z- / neg_sum
    bool pos_alive = false;
    bool neg_alive = false;
};

template <typename T>
PartCoefficients<T> part_coefficients(T pos_sum, T neg_sum, const AlphaBeta& ab) {
    PartCoefficients<T> c;
    const bool has_pos = pos_sum != T{};
    const bool has_neg = neg_sum != T{};
    if (has_pos && has_neg) {
        c.pos = static_cast<T>(ab.alpha);
        c.neg = static_cast<T>(ab.beta);
        c.pos_alive = c.neg_alive = true;
    } else if (has_pos) {
        c.pos = T{1};
        c.pos_alive = true;
    } else if (has_neg) {
        c.neg = T{1};
        c.neg_alive = true;
    }
    // both parts empty: nothing survives, the unit's relevance is dropped
    return c;
}

template <typename T>
inline T positive_part(T v) {
    return v > T{} ? v : T{};
}

template <typename T>
inline T negative_part(T v) {
    return v < T{} ? v : T{};
}

}  // namespace

template <typename T>
Tensor<T> relevance_dense(const Tensor<T>& input, const Tensor<T>& weights,
                          const Tensor<T>& bias, const Tensor<T>& r_out, const AlphaBeta& ab,
                          ConservationLedger<T>* ledger) {
    if (input.rank() != 1 || weights.rank() != 2 || r_out.rank() != 1) {
        throw std::invalid_argument("relevance_dense: input and r_out must be vectors, weights a matrix");
    }
    const std::size_t n = input.dim(0), m = weights.dim(1);
    if (weights.dim(0) != n || r_out.dim(0) != m) {
        throw std::invalid_argument("relevance_dense: shape mismatch, input " +
                                    shape_string(input.shape()) + " weights " +
                                    shape_string(weights.shape()) + " r_out " +
                                    shape_string(r_out.shape()));
    }
    if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != m)) {
        throw std::invalid_argument("relevance_dense: bias length mismatch");
    }

    Tensor<T> r_in({n});
    for (std::size_t j = 0; j < m; ++j) {
        const T r_j = r_out[j];
        const T b = bias.empty() ? T{} : bias[j];
        T pos_sum = positive_part(b);
        T neg_sum = negative_part(b);
        for (std::size_t i = 0; i < n; ++i) {
            const T z = input[i] * weights.at2(i, j);
            pos_sum += positive_part(z);
            neg_sum += negative_part(z);
        }
        const PartCoefficients<T> c = part_coefficients(pos_sum, neg_sum, ab);
        for (std::size_t i = 0; i < n; ++i) {
            const T z = input[i] * weights.at2(i, j);
            T share{};
            if (c.pos_alive && z > T{}) share += c.pos * (z / pos_sum) * r_j;
            if (c.neg_alive && z < T{}) share += c.neg * (z / neg_sum) * r_j;
            r_in[i] += share;
        }
        if (ledger) {
            T bias_share{};
            if (c.pos_alive && b > T{}) bias_share += c.pos * (b / pos_sum) * r_j;
            if (c.neg_alive && b < T{}) bias_share += c.neg * (b / neg_sum) * r_j;
            ledger->absorbed_bias += bias_share;
        }
    }
    return r_in;
}

template <typename T>
Tensor<T> relevance_conv(const Tensor<T>& input, const Tensor<T>& weights,
                         const Tensor<T>& bias, std::size_t stride, Padding padding,
                         const Tensor<T>& r_out, const AlphaBeta& ab,
                         ConservationLedger<T>* ledger) {
    if (input.rank() != 3 || weights.rank() != 4 || r_out.rank() != 3) {
        throw std::invalid_argument("relevance_conv: input/r_out must be rank 3, weights rank 4");
    }
    const std::size_t in_h = input.dim(0), in_w = input.dim(1), in_c = input.dim(2);
    const std::size_t kh = weights.dim(0), kw = weights.dim(1), filters = weights.dim(3);
    if (weights.dim(2) != in_c) {
        throw std::invalid_argument("relevance_conv: weight channels do not match input");
    }
    const ConvGeometry g = conv2d_geometry(in_h, in_w, kh, kw, stride, padding);
    if (r_out.dim(0) != g.out_h || r_out.dim(1) != g.out_w || r_out.dim(2) != filters) {
        throw std::invalid_argument("relevance_conv: r_out shape " +
                                    shape_string(r_out.shape()) +
                                    " does not match conv output geometry");
    }
    if (!bias.empty() && (bias.rank() != 1 || bias.dim(0) != filters)) {
        throw std::invalid_argument("relevance_conv: bias length mismatch");
    }

    Tensor<T> r_in(input.shape());
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * stride) - g.pad_top;
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * stride) - g.pad_left;
            for (std::size_t f = 0; f < filters; ++f) {
                const T r_j = r_out.at3(oy, ox, f);
                const T b = bias.empty() ? T{} : bias[f];
                T pos_sum = positive_part(b);
                T neg_sum = negative_part(b);
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    const std::ptrdiff_t iy = y0 + static_cast<std::ptrdiff_t>(ky);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::ptrdiff_t ix = x0 + static_cast<std::ptrdiff_t>(kx);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
                        for (std::size_t c = 0; c < in_c; ++c) {
                            const T z = input.at3(static_cast<std::size_t>(iy),
                                                  static_cast<std::size_t>(ix), c) *
                                        weights.at4(ky, kx, c, f);
                            pos_sum += positive_part(z);
                            neg_sum += negative_part(z);
                        }
                    }
                }
                const PartCoefficients<T> c = part_coefficients(pos_sum, neg_sum, ab);
                if (!c.pos_alive && !c.neg_alive) continue;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    const std::ptrdiff_t iy = y0 + static_cast<std::ptrdiff_t>(ky);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::ptrdiff_t ix = x0 + static_cast<std::ptrdiff_t>(kx);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
                        for (std::size_t ch = 0; ch < in_c; ++ch) {
                            const std::size_t uy = static_cast<std::size_t>(iy);
                            const std::size_t ux = static_cast<std::size_t>(ix);
                            const T z = input.at3(uy, ux, ch) * weights.at4(ky, kx, ch, f);
                            T share{};
                            if (c.pos_alive && z > T{}) share += c.pos * (z / pos_sum) * r_j;
                            if (c.neg_alive && z < T{}) share += c.neg * (z / neg_sum) * r_j;
                            r_in.at3(uy, ux, ch) += share;
                        }
                    }
                }
                if (ledger) {
                    T bias_share{};
                    if (c.pos_alive && b > T{}) bias_share += c.pos * (b / pos_sum) * r_j;
                    if (c.neg_alive && b < T{}) bias_share += c.neg * (b / neg_sum) * r_j;
                    ledger->absorbed_bias += bias_share;
                }
            }
        }
    }
    return r_in;
}

template <typename T>
Tensor<T> relevance_maxpool(const PoolIndexMap& argmax, const Tensor<T>& r_out,
                            const std::vector<std::size_t>& input_shape) {
    if (argmax.argmax.size() != r_out.size()) {
        throw std::invalid_argument("relevance_maxpool: argmax map does not match r_out");
    }
    Tensor<T> r_in(input_shape);
    for (std::size_t i = 0; i < r_out.size(); ++i) r_in[argmax.argmax[i]] += r_out[i];
    return r_in;
}

template <typename T>
Tensor<T> relevance_relu(const Tensor<T>& r_out) {
    return r_out;
}

template <typename T>
Tensor<T> propagate_relevance(const Network<T>& net, const ForwardTrace<T>& trace,
                              const Tensor<T>& seed, const AlphaBeta& ab,
                              ConservationLedger<T>* ledger) {
    const std::size_t layer_count = net.layers().size();
    if (trace.inputs.size() != layer_count) {
        throw std::invalid_argument("propagate_relevance: trace does not match network");
    }
    if (!seed.same_shape(trace.logits)) {
        throw std::invalid_argument("propagate_relevance: seed must be logit-shaped");
    }

    // start below the softmax: the seed already lives in logit space
    Tensor<T> relevance = seed;
    for (std::size_t k = layer_count - 1; k-- > 0;) {
        const LayerSpec& spec = net.layers()[k];
        const Tensor<T>& input = trace.inputs[k];
        if (const auto* conv = std::get_if<Conv2dSpec>(&spec)) {
            relevance = relevance_conv(input, net.params(k).weights, net.params(k).bias,
                                       conv->stride, conv->padding, relevance, ab, ledger);
        } else if (std::holds_alternative<MaxPool2dSpec>(spec)) {
            relevance = relevance_maxpool(trace.pool_maps[k], relevance, input.shape());
        } else if (std::holds_alternative<ReluSpec>(spec)) {
            relevance = relevance_relu(relevance);
        } else if (std::holds_alternative<FlattenSpec>(spec)) {
            relevance = relevance.reshaped(input.shape());
        } else if (std::holds_alternative<DenseSpec>(spec)) {
            relevance = relevance_dense(input, net.params(k).weights, net.params(k).bias,
                                        relevance, ab, ledger);
        }
    }
    return relevance;
}

template <typename T>
RelevanceMap<T> explain(const Network<T>& net, const Tensor<T>& input,
                        std::size_t target_class, const AlphaBeta& ab) {
    if (target_class >= net.num_classes()) {
        throw std::invalid_argument("explain: target class " + std::to_string(target_class) +
                                    " out of range for " + std::to_string(net.num_classes()) +
                                    " classes");
    }
    const ForwardTrace<T> trace = forward(net, input);

    Tensor<T> seed(trace.logits.shape());
    seed[target_class] = trace.logits[target_class];

    RelevanceMap<T> map;
    map.target_class = target_class;
    map.start_score = trace.logits[target_class];
    map.values = propagate_relevance(net, trace, seed, ab, &map.ledger);
    return map;
}

template <typename T>
Tensor<T> channel_collapse(const Tensor<T>& values) {
    if (values.rank() != 3) {
        throw std::invalid_argument("channel_collapse: expected a rank-3 map, got " +
                                    shape_string(values.shape()));
    }
    const std::size_t h = values.dim(0), w = values.dim(1), c = values.dim(2);
    Tensor<T> collapsed({h, w});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            T acc{};
            for (std::size_t ch = 0; ch < c; ++ch) acc += values.at3(y, x, ch);
            collapsed.at2(y, x) = acc;
        }
    }
    return collapsed;
}

#define RELPROP_INSTANTIATE_LRP(T)                                                         \
    template Tensor<T> relevance_dense(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                       const Tensor<T>&, const AlphaBeta&,                 \
                                       ConservationLedger<T>*);                            \
    template Tensor<T> relevance_conv(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                      std::size_t, Padding, const Tensor<T>&,              \
                                      const AlphaBeta&, ConservationLedger<T>*);           \
    template Tensor<T> relevance_maxpool(const PoolIndexMap&, const Tensor<T>&,            \
                                         const std::vector<std::size_t>&);                 \
    template Tensor<T> relevance_relu(const Tensor<T>&);                                   \
    template Tensor<T> propagate_relevance(const Network<T>&, const ForwardTrace<T>&,      \
                                           const Tensor<T>&, const AlphaBeta&,             \
                                           ConservationLedger<T>*);                        \
    template RelevanceMap<T> explain(const Network<T>&, const Tensor<T>&, std::size_t,     \
                                     const AlphaBeta&);                                    \
    template Tensor<T> channel_collapse(const Tensor<T>&);

RELPROP_INSTANTIATE_LRP(float)
RELPROP_INSTANTIATE_LRP(double)

#undef RELPROP_INSTANTIATE_LRP

}  // namespace relprop
