#ifndef FACET_NETWORK_HPP
#define FACET_NETWORK_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "facet/rng.hpp"
#include "facet/tensor.hpp"

// Minimal sequence-classification engine: a dense encoder applied per frame,
// a stack of GRU layers over time, and a linear output layer on the final
// hidden state. Forward and backward passes are exact and hand-derived; a
// finite-difference checker validates them.

namespace facet {

enum class Activation { relu, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
    Tensor w; // out x in
    Tensor b; // out
    Activation act = Activation::relu;
};

// Gates: update z, reset r, candidate hc (tanh). New state is the convex
// combination h = (1 - z) * h_prev + z * hc.
struct GruLayer {
    Tensor wz, uz, bz; // w: hidden x in, u: hidden x hidden
    Tensor wr, ur, br;
    Tensor wh, uh, bh;

    std::size_t hidden() const { return bz.size(); }
    std::size_t input() const { return wz.cols(); }
};

struct OutputLayer {
    Tensor w; // classes x representation
    Tensor b; // classes
};

struct NetworkSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> encoder_widths;
    std::vector<Activation> encoder_activations; // empty = all relu
    std::vector<std::size_t> gru_widths;
    std::size_t class_count = 0;

    // Width of the vector feeding the output layer.
    std::size_t representation_dim() const;
    void validate() const;

    bool operator==(const NetworkSpec&) const = default;
};

struct NetworkState {
    NetworkSpec spec;
    std::vector<DenseLayer> encoder;
    std::vector<GruLayer> gru;
    OutputLayer output;

    std::size_t representation_dim() const { return spec.representation_dim(); }
    std::size_t class_count() const { return spec.class_count; }
    std::size_t input_dim() const { return spec.input_dim; }

    // Visits every parameter tensor in a fixed order; the same order is used
    // by initialization, checkpoints, optimizers and the gradient checker.
    void for_each_param(const std::function<void(const std::string&, Tensor&)>& fn);
    void for_each_param(const std::function<void(const std::string&, const Tensor&)>& fn) const;
};

// Same structure as the network, tensors zeroed; used as the gradient carrier.
NetworkState zeros_like(const NetworkState& net);

inline constexpr double kDefaultInitStd = 0.31622776601683794; // sqrt(0.1)

// Weights from a zero-mean normal truncated at +-2*init_std, biases constant.
// Deterministic for a fixed (spec, seed).
NetworkState init_network(const NetworkSpec& spec, std::uint64_t seed,
                          double init_std = kDefaultInitStd, double bias_init = 1.0);

struct GruCache {
    Tensor z, r, hc, h;
};

struct ForwardTrace {
    std::size_t steps = 0;
    Tensor frames;                               // T x input_dim copy
    std::vector<std::vector<Tensor>> dense_pre;  // [t][layer] pre-activation
    std::vector<std::vector<Tensor>> dense_out;  // [t][layer] post-activation
    std::vector<Tensor> encoder_out;             // [t] gru input (after dropout)
    std::vector<Tensor> dropout_mask;            // [t], empty when disabled
    std::vector<std::vector<GruCache>> gru;      // [t][layer]
    Tensor representation;                       // X, final top hidden state
    Tensor output;                               // O, linear logits
};

// frames is T x input_dim, T >= 1.
ForwardTrace forward(const NetworkState& net, const Tensor& frames);

// Training-mode forward with inverted dropout on the encoder output.
ForwardTrace forward_dropout(const NetworkState& net, const Tensor& frames,
                             double dropout_rate, Rng& rng);

// Gradients of a scalar loss receiving grad_output at O and
// grad_representation at X. Returns a network-shaped gradient structure.
NetworkState backward(const NetworkState& net, const ForwardTrace& trace,
                      const Tensor& grad_output, const Tensor& grad_representation);

struct LossEval {
    double value = 0.0;
    Tensor grad_output;
    Tensor grad_representation;
};

using LossFn = std::function<LossEval(const Tensor& output, const Tensor& representation)>;

// Worst-case relative error between analytic gradients and central finite
// differences over every parameter: |a - b| / max(|a|, |b|, 1e-8).
double grad_check(const NetworkState& net, const Tensor& frames, const LossFn& loss,
                  double fd_step = 1e-6);

} // namespace facet

#endif
