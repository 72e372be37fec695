#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "relprop/tensor.hpp"

namespace relprop {

/// Weights of the positive / negative decomposition parts. alpha + beta must
/// equal 1 or the layer-wise conservation identity cannot hold.
struct AlphaBeta {
    double alpha;
    double beta;

    AlphaBeta(double a, double b) : alpha(a), beta(b) {
        if (std::abs(a + b - 1.0) > 1e-9) {
            throw std::invalid_argument("alpha + beta must equal 1");
        }
    }

    /// alpha=2, beta=-1: emphasizes activating contributions, the right
    /// setting for ReLU networks.
    static AlphaBeta standard() { return AlphaBeta(2.0, -1.0); }
};

/// Relevance that left the propagated budget: shares attributed to bias
/// terms, and shares that would have landed on zero-padding cells. Tracked so
/// the extended conservation identity (map sum + absorbed + padding loss =
/// start score) stays checkable for networks with biases.
template <typename T>
struct ConservationLedger {
    T absorbed_bias{};
    T padding_loss{};

    ConservationLedger& operator+=(const ConservationLedger& other) {
        absorbed_bias += other.absorbed_bias;
        padding_loss += other.padding_loss;
        return *this;
    }
};

/// Per-element relevance for one explained input, in the input's shape.
/// start_score is the explained pre-softmax logit.
template <typename T>
struct RelevanceMap {
    Tensor<T> values;
    std::size_t target_class = 0;
    T start_score{};
    ConservationLedger<T> ledger;
};

}  // namespace relprop
