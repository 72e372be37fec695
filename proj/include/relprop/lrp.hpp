#pragma once

#include "relprop/lrp_types.hpp"
#include "relprop/network.hpp"

namespace relprop {

// Backward relevance decomposition. Each weighted contribution a_i*w_ij is
// split into its positive and negative part; part sums over i normalize the
// shares and alpha/beta weight them. When one part's sum is exactly zero for
// an output unit, that term is dropped and the surviving term's coefficient
// becomes 1, which keeps the per-unit conservation identity exact. If both
// sums are zero the unit's relevance cannot be redistributed and is dropped
// (in a composed pass such units carry zero relevance to begin with).
//
// Biases take part in the forward pre-activation, so they participate in the
// part sums as a pseudo-input; the share they attract is not propagated but
// recorded in the ledger as absorbed_bias. Zero-padding cells contribute
// a*w = 0, so their share is identically zero; padding_loss records exactly
// that and exists to keep the extended conservation identity explicit.

/// input a (n), weights n×m, bias m or null, r_out m -> r_in n.
template <typename T>
Tensor<T> relevance_dense(const Tensor<T>& input, const Tensor<T>& weights,
                          const Tensor<T>& bias, const Tensor<T>& r_out, const AlphaBeta& ab,
                          ConservationLedger<T>* ledger = nullptr);

/// Same rule applied over convolution receptive fields; equals
/// relevance_dense on the unrolled convolution matrix.
template <typename T>
Tensor<T> relevance_conv(const Tensor<T>& input, const Tensor<T>& weights,
                         const Tensor<T>& bias, std::size_t stride, Padding padding,
                         const Tensor<T>& r_out, const AlphaBeta& ab,
                         ConservationLedger<T>* ledger = nullptr);

/// Winner-take-all: each window's relevance routes to the recorded argmax
/// position, everything else gets zero.
template <typename T>
Tensor<T> relevance_maxpool(const PoolIndexMap& argmax, const Tensor<T>& r_out,
                            const std::vector<std::size_t>& input_shape);

/// ReLU is transparent to relevance; the activation's sign is already encoded
/// in the (a_i w_ij) parts of the rule.
template <typename T>
Tensor<T> relevance_relu(const Tensor<T>& r_out);

/// Walks the layers in reverse from an arbitrary relevance seed in logit
/// space. The rule is linear in the seed.
template <typename T>
Tensor<T> propagate_relevance(const Network<T>& net, const ForwardTrace<T>& trace,
                              const Tensor<T>& seed, const AlphaBeta& ab,
                              ConservationLedger<T>* ledger = nullptr);

/// Runs forward, seeds relevance with the target class's pre-softmax logit
/// (all other logits zero) and propagates back to the input.
template <typename T>
RelevanceMap<T> explain(const Network<T>& net, const Tensor<T>& input,
                        std::size_t target_class, const AlphaBeta& ab);

/// H×W×C -> H×W by summing over channels.
template <typename T>
Tensor<T> channel_collapse(const Tensor<T>& values);

}  // namespace relprop
