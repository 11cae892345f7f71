#include "scotti/model.hpp"

#include <cmath>
#include <stdexcept>

#include "scotti/error.hpp"

namespace scotti {

namespace {

Tensor glorot_weight(std::vector<std::size_t> shape, double fan_in, double fan_out, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.data) v = rng.uniform(-a, a);
    return t;
}

}  // namespace

Model Model::mlp(const std::vector<int>& widths, Rng& rng) {
    if (widths.size() < 2)
        throw validation_error("mlp needs an input width and at least one layer width");
    for (int w : widths)
        if (w < 1) throw validation_error("mlp widths must be positive");

    Model m;
    m.input_width_ = static_cast<std::size_t>(widths[0]);
    m.classes_ = widths.back();
    const int layers = static_cast<int>(widths.size()) - 1;
    for (int l = 0; l < layers; ++l) {
        const int in = widths[static_cast<std::size_t>(l)];
        const int out = widths[static_cast<std::size_t>(l) + 1];
        m.layers_.push_back(DenseSpec{in, out});
        m.params_.push_back(glorot_weight({static_cast<std::size_t>(out),
                                           static_cast<std::size_t>(in)},
                                          in, out, rng));
        m.params_.push_back(Tensor::zeros({static_cast<std::size_t>(out)}));
        m.units_.push_back(out);
        if (l + 1 < layers) m.layers_.push_back(ReluSpec{static_cast<std::size_t>(out)});
    }
    m.finalize();
    return m;
}

Model Model::cnn(const CnnShape& shape, Rng& rng) {
    if (shape.in_ch < 1 || shape.in_h < 1 || shape.in_w < 1)
        throw validation_error("cnn input shape must be positive");
    if (shape.classes < 1) throw validation_error("cnn needs a positive class count");
    for (int f : shape.conv_filters)
        if (f < 1) throw validation_error("cnn filter counts must be positive");
    for (int w : shape.dense_widths)
        if (w < 1) throw validation_error("cnn dense widths must be positive");

    Model m;
    m.image_input_ = true;
    m.in_ch_ = shape.in_ch;
    m.in_h_ = shape.in_h;
    m.in_w_ = shape.in_w;
    m.input_width_ =
        static_cast<std::size_t>(shape.in_ch) * shape.in_h * shape.in_w;
    m.classes_ = shape.classes;

    int c = shape.in_ch, h = shape.in_h, w = shape.in_w;
    for (int f : shape.conv_filters) {
        if (h < 3 || w < 3)
            throw validation_error("conv stage input " + std::to_string(h) + "×" +
                                   std::to_string(w) + " too small for a 3×3 window");
        m.layers_.push_back(Conv2dSpec{c, f, h, w});
        m.params_.push_back(glorot_weight({static_cast<std::size_t>(f),
                                           static_cast<std::size_t>(c), 3, 3},
                                          c * 9.0, f * 9.0, rng));
        m.params_.push_back(Tensor::zeros({static_cast<std::size_t>(f)}));
        m.units_.push_back(f);
        h -= 2;
        w -= 2;
        c = f;
        m.layers_.push_back(ReluSpec{static_cast<std::size_t>(c) * h * w});
    }
    const std::size_t flat = static_cast<std::size_t>(c) * h * w;
    m.layers_.push_back(FlattenSpec{flat});

    std::vector<int> widths = shape.dense_widths;
    widths.push_back(shape.classes);
    int in = static_cast<int>(flat);
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const int out = widths[l];
        m.layers_.push_back(DenseSpec{in, out});
        m.params_.push_back(glorot_weight({static_cast<std::size_t>(out),
                                           static_cast<std::size_t>(in)},
                                          in, out, rng));
        m.params_.push_back(Tensor::zeros({static_cast<std::size_t>(out)}));
        m.units_.push_back(out);
        if (l + 1 < widths.size()) m.layers_.push_back(ReluSpec{static_cast<std::size_t>(out)});
        in = out;
    }
    m.finalize();
    return m;
}

void Model::finalize() {
    neuron_offset_.assign(units_.size() + 1, 0);
    for (std::size_t t = 0; t < units_.size(); ++t)
        neuron_offset_[t + 1] = neuron_offset_[t] + units_[t];
    neurons_.clear();
    for (std::size_t t = 0; t < units_.size(); ++t)
        for (int u = 0; u < units_[t]; ++u)
            neurons_.push_back(NeuronId{static_cast<int>(t), u});
    flat_offsets_.assign(params_.size(), 0);
    std::size_t at = 0;
    for (std::size_t p = 0; p < params_.size(); ++p) {
        flat_offsets_[p] = at;
        at += params_[p].numel();
    }
    total_scalars_ = at;
}

int Model::units_in(int trainable_layer) const {
    if (trainable_layer < 0 || trainable_layer >= trainable_count())
        throw index_error("trainable layer " + std::to_string(trainable_layer) + " out of range");
    return units_[static_cast<std::size_t>(trainable_layer)];
}

int Model::neuron_ordinal(NeuronId id) const {
    if (id.layer < 0 || id.layer >= trainable_count() || id.unit < 0 ||
        id.unit >= units_[static_cast<std::size_t>(id.layer)])
        throw index_error("neuron (" + std::to_string(id.layer) + "," + std::to_string(id.unit) +
                          ") does not exist");
    return neuron_offset_[static_cast<std::size_t>(id.layer)] + id.unit;
}

ParamSlice Model::neuron_params(NeuronId id) const {
    neuron_ordinal(id);  // bounds check
    const int w_param = 2 * id.layer;
    const Tensor& w = params_[static_cast<std::size_t>(w_param)];
    const std::size_t row = w.numel() / w.shape[0];  // dense row or filter block
    ParamSlice s;
    s.weight_param = w_param;
    s.weight_begin = static_cast<std::size_t>(id.unit) * row;
    s.weight_len = row;
    s.bias_param = w_param + 1;
    s.bias_index = static_cast<std::size_t>(id.unit);
    return s;
}

std::size_t Model::flat_offset(int param_index) const {
    if (param_index < 0 || static_cast<std::size_t>(param_index) >= params_.size())
        throw index_error("parameter index " + std::to_string(param_index) + " out of range");
    return flat_offsets_[static_cast<std::size_t>(param_index)];
}

ForwardNodes Model::forward(Graph& g, const Tensor& x) const {
    if (x.ndim() != 2 || x.shape[1] != input_width_)
        throw dim_error("model expects input [B," + std::to_string(input_width_) + "], got " +
                        x.shape_str());
    const std::size_t batch = x.shape[0];

    ForwardNodes f;
    f.param_nodes.reserve(params_.size());
    for (const Tensor& p : params_) f.param_nodes.push_back(g.add_input(p, true));

    Tensor input = x;
    if (image_input_)
        input = x.reshaped({batch, static_cast<std::size_t>(in_ch_),
                            static_cast<std::size_t>(in_h_), static_cast<std::size_t>(in_w_)});
    f.input = g.add_input(std::move(input), false);

    int cur = f.input;
    int trainable = -1;
    for (const LayerSpec& layer : layers_) {
        if (std::holds_alternative<DenseSpec>(layer)) {
            ++trainable;
            cur = g.linear(cur, f.param_nodes[static_cast<std::size_t>(2 * trainable)],
                           f.param_nodes[static_cast<std::size_t>(2 * trainable) + 1]);
            f.layer_outputs.push_back(cur);
        } else if (std::holds_alternative<Conv2dSpec>(layer)) {
            ++trainable;
            cur = g.conv2d(cur, f.param_nodes[static_cast<std::size_t>(2 * trainable)],
                           f.param_nodes[static_cast<std::size_t>(2 * trainable) + 1]);
            f.layer_outputs.push_back(cur);
        } else if (std::holds_alternative<ReluSpec>(layer)) {
            cur = g.relu(cur);
            // the layer's observable output is post-activation
            f.layer_outputs.back() = cur;
        } else {
            cur = g.flatten(cur);
        }
    }
    f.logits = cur;
    return f;
}

void Model::flat_grads(const Graph& g, const ForwardNodes& f, std::vector<double>& out) const {
    out.assign(total_scalars_, 0.0);
    for (std::size_t p = 0; p < params_.size(); ++p) {
        const std::vector<double>& gr = g.grad(f.param_nodes[p]);
        if (gr.empty()) continue;
        std::copy(gr.begin(), gr.end(), out.begin() + static_cast<std::ptrdiff_t>(flat_offsets_[p]));
    }
}

GradSkip Model::grad_skip(const ForwardNodes& f, const std::vector<unsigned char>& frozen) const {
    if (frozen.size() != neurons_.size())
        throw contract_error("frozen flags: got " + std::to_string(frozen.size()) +
                             ", expected one per neuron (" + std::to_string(neurons_.size()) + ")");
    GradSkip skip;
    for (int t = 0; t < trainable_count(); ++t) {
        const int n = units_[static_cast<std::size_t>(t)];
        const int base = neuron_offset_[static_cast<std::size_t>(t)];
        bool any = false;
        std::vector<unsigned char> mask(static_cast<std::size_t>(n), 0);
        for (int u = 0; u < n; ++u) {
            mask[static_cast<std::size_t>(u)] = frozen[static_cast<std::size_t>(base + u)];
            any = any || frozen[static_cast<std::size_t>(base + u)];
        }
        if (!any) continue;
        skip.unit_masks[f.param_nodes[static_cast<std::size_t>(2 * t)]] = mask;
        skip.unit_masks[f.param_nodes[static_cast<std::size_t>(2 * t) + 1]] = std::move(mask);
    }
    return skip;
}

void Model::scalar_mask(const std::vector<unsigned char>& frozen,
                        std::vector<unsigned char>& out) const {
    if (frozen.size() != neurons_.size())
        throw contract_error("frozen flags: got " + std::to_string(frozen.size()) +
                             ", expected one per neuron (" + std::to_string(neurons_.size()) + ")");
    out.assign(total_scalars_, 1);
    for (const NeuronId& id : neurons_) {
        if (!frozen[static_cast<std::size_t>(neuron_ordinal(id))]) continue;
        const ParamSlice s = neuron_params(id);
        const std::size_t w0 = flat_offsets_[static_cast<std::size_t>(s.weight_param)] + s.weight_begin;
        for (std::size_t i = 0; i < s.weight_len; ++i) out[w0 + i] = 0;
        out[flat_offsets_[static_cast<std::size_t>(s.bias_param)] + s.bias_index] = 0;
    }
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        parts.push_back(s.substr(pos, next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return parts;
}

int spec_int(const std::string& spec, const std::string& piece) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(piece, &used);
        if (used != piece.size()) throw std::invalid_argument(piece);
        return v;
    } catch (const std::exception&) {
        throw config_error("model spec '" + spec + "': expected an integer, got '" + piece + "'");
    }
}

std::vector<int> spec_int_list(const std::string& spec, const std::string& piece) {
    std::vector<int> out;
    for (const std::string& p : split_on(piece, ',')) out.push_back(spec_int(spec, p));
    return out;
}

}  // namespace

Model model_from_spec(const std::string& spec, Rng& rng) {
    try {
        if (spec.rfind("mlp:", 0) == 0)
            return Model::mlp(spec_int_list(spec, spec.substr(4)), rng);
        if (spec.rfind("cnn:", 0) == 0) {
            const std::vector<std::string> parts = split_on(spec.substr(4), ':');
            if (parts.size() != 3)
                throw config_error("model spec '" + spec +
                                   "': want cnn:CxHxW:filters:dense,classes");
            const std::vector<int> img = spec_int_list(spec, [&] {
                std::string s = parts[0];
                for (char& ch : s)
                    if (ch == 'x') ch = ',';
                return s;
            }());
            if (img.size() != 3)
                throw config_error("model spec '" + spec + "': input shape must be CxHxW");
            CnnShape shape;
            shape.in_ch = img[0];
            shape.in_h = img[1];
            shape.in_w = img[2];
            shape.conv_filters = spec_int_list(spec, parts[1]);
            std::vector<int> dense = spec_int_list(spec, parts[2]);
            if (dense.empty())
                throw config_error("model spec '" + spec + "': missing class count");
            shape.classes = dense.back();
            dense.pop_back();
            shape.dense_widths = std::move(dense);
            return Model::cnn(shape, rng);
        }
        throw config_error("model spec '" + spec + "': want mlp:... or cnn:...");
    } catch (const validation_error& e) {
        throw config_error("model spec '" + spec + "': " + e.what());
    }
}

}  // namespace scotti
