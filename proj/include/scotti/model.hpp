#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "scotti/graph.hpp"
#include "scotti/rng.hpp"
#include "scotti/tensor.hpp"

namespace scotti {

// A neuron is one output unit of a trainable layer: a dense row or a conv
// filter, together with its bias element. `layer` is the trainable-layer
// ordinal counted from the input side; `unit` indexes within the layer.
struct NeuronId {
    int layer = 0;
    int unit = 0;
    auto operator<=>(const NeuronId&) const = default;
};

struct DenseSpec {
    int in = 0, out = 0;
};
struct Conv2dSpec {
    int in_ch = 0, out_ch = 0, in_h = 0, in_w = 0;
    int out_h() const { return in_h - 2; }
    int out_w() const { return in_w - 2; }
};
struct ReluSpec {
    std::size_t width = 0;  // activations per sample
};
struct FlattenSpec {
    std::size_t width = 0;  // flattened width per sample
};
using LayerSpec = std::variant<DenseSpec, Conv2dSpec, ReluSpec, FlattenSpec>;

// Where a neuron's parameters live: a contiguous row/filter block of the
// layer's weight tensor plus one bias element.
struct ParamSlice {
    int weight_param = -1;
    std::size_t weight_begin = 0, weight_len = 0;
    int bias_param = -1;
    std::size_t bias_index = 0;
};

// Node ids of one forward build.
struct ForwardNodes {
    int input = -1;
    int logits = -1;
    std::vector<int> param_nodes;    // one per parameter tensor
    std::vector<int> layer_outputs;  // post-activation node per trainable layer
};

// Shape of a convolutional classifier: conv stages, then dense stages.
struct CnnShape {
    int in_ch = 0, in_h = 0, in_w = 0;
    std::vector<int> conv_filters;
    std::vector<int> dense_widths;  // hidden widths; classes appended separately
    int classes = 0;
};

// Feed-forward classifier whose parameters are owned here and fed into a
// fresh Graph per forward build. Parameter order: W0, b0, W1, b1, ... in
// trainable-layer order; weights are Glorot-uniform, biases zero.
class Model {
public:
    // widths[0] is the input width, the rest are dense layer outputs.
    static Model mlp(const std::vector<int>& widths, Rng& rng);
    static Model cnn(const CnnShape& shape, Rng& rng);

    const std::vector<LayerSpec>& layers() const { return layers_; }
    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }

    int trainable_count() const { return static_cast<int>(units_.size()); }
    int units_in(int trainable_layer) const;
    std::size_t input_width() const { return input_width_; }
    int classes() const { return classes_; }

    // Stable neuron enumeration: layer-major, unit-minor.
    const std::vector<NeuronId>& neurons() const { return neurons_; }
    int neuron_count() const { return static_cast<int>(neurons_.size()); }
    // Flat ordinal of a neuron in neurons() order.
    int neuron_ordinal(NeuronId id) const;
    ParamSlice neuron_params(NeuronId id) const;

    // Flat view over all parameter scalars, in parameter order.
    std::size_t param_scalar_count() const { return total_scalars_; }
    std::size_t flat_offset(int param_index) const;

    // Builds the forward graph for x[B, input_width]. Conv models reshape x
    // to [B,C,H,W] internally. Parameters become grad-requiring leaves.
    ForwardNodes forward(Graph& g, const Tensor& x) const;

    // Gradient of every parameter scalar after a backward sweep, zeros where
    // no gradient was produced. `out` is resized to param_scalar_count().
    void flat_grads(const Graph& g, const ForwardNodes& f, std::vector<double>& out) const;

    // GradSkip entries for the given per-neuron-ordinal frozen flags.
    GradSkip grad_skip(const ForwardNodes& f, const std::vector<unsigned char>& frozen) const;

    // Per-parameter-scalar update mask from per-neuron frozen flags:
    // 1 = trainable, 0 = frozen slice.
    void scalar_mask(const std::vector<unsigned char>& frozen, std::vector<unsigned char>& out) const;

private:
    std::vector<LayerSpec> layers_;
    std::vector<Tensor> params_;
    std::vector<int> units_;            // output units per trainable layer
    std::vector<int> neuron_offset_;    // prefix sums of units_
    std::vector<NeuronId> neurons_;
    std::vector<std::size_t> flat_offsets_;
    std::size_t total_scalars_ = 0;
    std::size_t input_width_ = 0;
    int classes_ = 0;
    bool image_input_ = false;
    int in_ch_ = 0, in_h_ = 0, in_w_ = 0;

    void finalize();
};

// Builds a model from its config string:
//   "mlp:64,32,16,4"        input width 64, dense layers 32, 16, 4 (classes)
//   "cnn:1x8x8:4,8:16,10"   input 1x8x8, conv filters 4 and 8, dense 16, 10 classes
// Malformed specs throw config_error.
Model model_from_spec(const std::string& spec, Rng& rng);

}  // namespace scotti
