#include "scotti/graph.hpp"

#include <string>

#include "scotti/error.hpp"
#include "scotti/kernels.hpp"

namespace scotti {

const unsigned char* GradSkip::mask_for(int node) const {
    auto it = unit_masks.find(node);
    return it == unit_masks.end() ? nullptr : it->second.data();
}

bool GradSkip::fully_skipped(int node, std::size_t units) const {
    auto it = unit_masks.find(node);
    if (it == unit_masks.end()) return false;
    if (it->second.size() != units)
        throw contract_error("skip mask for node " + std::to_string(node) + " has " +
                             std::to_string(it->second.size()) + " flags, expected " +
                             std::to_string(units));
    for (unsigned char u : it->second)
        if (!u) return false;
    return units > 0;
}

std::size_t GradSkip::count_skipped(const unsigned char* mask, std::size_t units) {
    if (!mask) return 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < units; ++i) n += mask[i] ? 1 : 0;
    return n;
}

const Node& Graph::checked(int id, const char* ctx) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw index_error(std::string(ctx) + ": node id " + std::to_string(id) + " out of range");
    return nodes_[static_cast<std::size_t>(id)];
}

const Node& Graph::node(int id) const { return checked(id, "node"); }

int Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Graph::add_input(Tensor t, bool requires_grad) {
    if (!t.all_finite()) throw validation_error("input tensor contains non-finite values");
    Node n;
    n.op = Op::input;
    n.value = std::move(t);
    n.value.requires_grad = requires_grad;
    n.requires_grad = requires_grad;
    return push(n);
}

int Graph::matmul(int a, int b) {
    const Node& na = checked(a, "matmul");
    const Node& nb = checked(b, "matmul");
    if (na.value.ndim() != 2 || nb.value.ndim() != 2)
        throw dim_error("matmul needs 2-D operands, got " + na.value.shape_str() + " and " +
                        nb.value.shape_str());
    const std::size_t m = na.value.shape[0], k = na.value.shape[1];
    const std::size_t k2 = nb.value.shape[0], nn = nb.value.shape[1];
    if (k != k2)
        throw dim_error("matmul inner dims differ: " + na.value.shape_str() + " vs " +
                        nb.value.shape_str());
    Node n;
    n.op = Op::matmul;
    n.a = a;
    n.b = b;
    n.requires_grad = na.requires_grad || nb.requires_grad;
    n.value = Tensor::zeros({m, nn});
    kernels::matmul_nn(n.value.data.data(), na.value.data.data(), nb.value.data.data(),
                       static_cast<int>(m), static_cast<int>(k), static_cast<int>(nn));
    return push(n);
}

int Graph::linear(int x, int w, int b) {
    const Node& nx = checked(x, "linear");
    const Node& nw = checked(w, "linear");
    const Node& nb = checked(b, "linear");
    if (nx.value.ndim() != 2 || nw.value.ndim() != 2 || nb.value.ndim() != 1)
        throw dim_error("linear wants x[B,in], w[out,in], b[out]; got " + nx.value.shape_str() +
                        ", " + nw.value.shape_str() + ", " + nb.value.shape_str());
    const std::size_t batch = nx.value.shape[0], in = nx.value.shape[1];
    const std::size_t out = nw.value.shape[0];
    if (nw.value.shape[1] != in)
        throw dim_error("linear weight " + nw.value.shape_str() + " does not match input " +
                        nx.value.shape_str());
    if (nb.value.shape[0] != out)
        throw dim_error("linear bias " + nb.value.shape_str() + " does not match weight " +
                        nw.value.shape_str());
    Node n;
    n.op = Op::linear;
    n.a = x;
    n.b = w;
    n.c = b;
    n.requires_grad = nx.requires_grad || nw.requires_grad || nb.requires_grad;
    n.value = Tensor::zeros({batch, out});
    kernels::linear_fwd(n.value.data.data(), nx.value.data.data(), nw.value.data.data(),
                        nb.value.data.data(), static_cast<int>(batch), static_cast<int>(in),
                        static_cast<int>(out));
    return push(n);
}

int Graph::conv2d(int x, int k, int b) {
    const Node& nx = checked(x, "conv2d");
    const Node& nk = checked(k, "conv2d");
    if (nx.value.ndim() != 4 || nk.value.ndim() != 4)
        throw dim_error("conv2d wants x[N,C,H,W] and k[F,C,3,3]; got " + nx.value.shape_str() +
                        " and " + nk.value.shape_str());
    if (nk.value.shape[2] != 3 || nk.value.shape[3] != 3)
        throw dim_error("conv2d kernel must be 3×3, got " + nk.value.shape_str());
    const std::size_t N = nx.value.shape[0], C = nx.value.shape[1];
    const std::size_t H = nx.value.shape[2], W = nx.value.shape[3];
    const std::size_t F = nk.value.shape[0];
    if (nk.value.shape[1] != C)
        throw dim_error("conv2d kernel channels " + nk.value.shape_str() +
                        " do not match input " + nx.value.shape_str());
    if (H < 3 || W < 3)
        throw dim_error("conv2d input " + nx.value.shape_str() + " too small for a 3×3 window");
    const double* bias = nullptr;
    bool b_rg = false;
    if (b >= 0) {
        const Node& nb = checked(b, "conv2d");
        if (nb.value.ndim() != 1 || nb.value.shape[0] != F)
            throw dim_error("conv2d bias " + nb.value.shape_str() + " does not match kernel " +
                            nk.value.shape_str());
        bias = nb.value.data.data();
        b_rg = nb.requires_grad;
    }
    Node n;
    n.op = Op::conv2d;
    n.a = x;
    n.b = k;
    n.c = b;
    n.requires_grad = nx.requires_grad || nk.requires_grad || b_rg;
    n.value = Tensor::zeros({N, F, H - 2, W - 2});
    kernels::conv3x3_fwd(n.value.data.data(), nx.value.data.data(), nk.value.data.data(), bias,
                         static_cast<int>(N), static_cast<int>(C), static_cast<int>(H),
                         static_cast<int>(W), static_cast<int>(F));
    return push(n);
}

int Graph::relu(int x) {
    const Node& nx = checked(x, "relu");
    Node n;
    n.op = Op::relu;
    n.a = x;
    n.requires_grad = nx.requires_grad;
    n.value = Tensor::zeros(nx.value.shape);
    kernels::relu_fwd(n.value.data.data(), nx.value.data.data(), nx.value.numel());
    return push(n);
}

int Graph::flatten(int x) {
    const Node& nx = checked(x, "flatten");
    if (nx.value.ndim() < 2)
        throw dim_error("flatten wants at least 2-D input, got " + nx.value.shape_str());
    const std::size_t rows = nx.value.shape[0];
    const std::size_t cols = nx.value.numel() / rows;
    Node n;
    n.op = Op::flatten;
    n.a = x;
    n.requires_grad = nx.requires_grad;
    n.value = nx.value.reshaped({rows, cols});
    n.value.grad.clear();
    return push(n);
}

int Graph::sum(int x) {
    const Node& nx = checked(x, "sum");
    double total = 0.0;
    for (double v : nx.value.data) total += v;
    Node n;
    n.op = Op::sum;
    n.a = x;
    n.requires_grad = nx.requires_grad;
    n.value = Tensor({1}, {total});
    return push(n);
}

int Graph::softmax_xent(int logits, std::vector<int> labels) {
    const Node& nl = checked(logits, "softmax_xent");
    if (nl.value.ndim() != 2)
        throw dim_error("softmax_xent wants 2-D logits, got " + nl.value.shape_str());
    const std::size_t rows = nl.value.shape[0], classes = nl.value.shape[1];
    if (rows == 0) throw dim_error("softmax_xent needs at least one row");
    if (labels.size() != rows)
        throw dim_error("softmax_xent got " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(rows) + " rows");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
            throw index_error("label " + std::to_string(labels[i]) + " at row " +
                              std::to_string(i) + " outside [0," + std::to_string(classes) + ")");
    Node n;
    n.op = Op::softmax_xent;
    n.a = logits;
    n.requires_grad = nl.requires_grad;
    n.labels = std::move(labels);
    const double loss =
        kernels::softmax_xent_fwd(nl.value.data.data(), n.labels.data(), static_cast<int>(rows),
                                  static_cast<int>(classes), nullptr);
    n.value = Tensor({1}, {loss});
    return push(n);
}

namespace {

// Unit count of a leaf: dense weights skip by row, conv kernels by filter,
// biases by element — the leading dimension in every case.
std::size_t unit_count(const Tensor& leaf) {
    return leaf.shape.empty() ? 1 : leaf.shape[0];
}

}  // namespace

void Graph::backward(int loss, const GradSkip* skip, BackwardStats* stats) {
    const Node& top = checked(loss, "backward");
    if (top.value.numel() != 1)
        throw contract_error("backward needs a scalar node, got shape " + top.value.shape_str());

    static const GradSkip no_skip;
    const GradSkip& sk = skip ? *skip : no_skip;

    // A node "needs" a gradient when an unskipped grad-requiring leaf sits at
    // or below it. Fully skipped leaves drop out, and that absence propagates
    // upward, pruning whole input-gradient chains.
    std::vector<char> needs(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Node& n = nodes_[i];
        n.value.grad.clear();
        if (n.op == Op::input) {
            needs[i] = n.requires_grad &&
                       !sk.fully_skipped(static_cast<int>(i), unit_count(n.value));
        } else {
            for (int in : {n.a, n.b, n.c})
                if (in >= 0 && needs[static_cast<std::size_t>(in)]) needs[i] = 1;
        }
    }

    if (!needs[static_cast<std::size_t>(loss)]) return;  // nothing below requires gradients

    auto grad_buf = [&](int id) -> double* {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        n.value.ensure_grad();
        return n.value.grad.data();
    };

    nodes_[static_cast<std::size_t>(loss)].value.ensure_grad();
    nodes_[static_cast<std::size_t>(loss)].value.grad[0] = 1.0;

    for (int id = loss; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!needs[static_cast<std::size_t>(id)] || n.op == Op::input) continue;
        if (n.value.grad.empty()) continue;  // no consumer fed this node a gradient
        const double* g = n.value.grad.data();

        switch (n.op) {
            case Op::matmul: {
                const Tensor& A = nodes_[n.a].value;
                const Tensor& B = nodes_[n.b].value;
                const int m = static_cast<int>(A.shape[0]);
                const int k = static_cast<int>(A.shape[1]);
                const int nn = static_cast<int>(B.shape[1]);
                if (needs[n.a])
                    kernels::matmul_nt_acc(grad_buf(n.a), g, B.data.data(), m, nn, k);
                if (needs[n.b])
                    kernels::matmul_tn_acc(grad_buf(n.b), A.data.data(), g, m, k, nn);
                break;
            }
            case Op::linear: {
                const Tensor& X = nodes_[n.a].value;
                const Tensor& W = nodes_[n.b].value;
                const int batch = static_cast<int>(X.shape[0]);
                const int in = static_cast<int>(X.shape[1]);
                const int out = static_cast<int>(W.shape[0]);
                if (needs[n.b]) {
                    const unsigned char* m = sk.mask_for(n.b);
                    if (m && sk.unit_masks.at(n.b).size() != static_cast<std::size_t>(out))
                        throw contract_error("dense weight skip mask length mismatch");
                    kernels::linear_grad_w(grad_buf(n.b), g, X.data.data(), batch, in, out, m);
                    if (stats) {
                        const std::uint64_t rows =
                            out - GradSkip::count_skipped(m, static_cast<std::size_t>(out));
                        stats->weight_grad_flops += rows * 2ull * in * batch;
                    }
                }
                if (needs[n.c]) {
                    const unsigned char* m = sk.mask_for(n.c);
                    if (m && sk.unit_masks.at(n.c).size() != static_cast<std::size_t>(out))
                        throw contract_error("dense bias skip mask length mismatch");
                    kernels::bias_grad(grad_buf(n.c), g, batch, out, m);
                    if (stats) {
                        const std::uint64_t units =
                            out - GradSkip::count_skipped(m, static_cast<std::size_t>(out));
                        stats->weight_grad_flops += units * static_cast<std::uint64_t>(batch);
                    }
                }
                if (needs[n.a]) {
                    kernels::matmul_nn_acc(grad_buf(n.a), g, W.data.data(), batch, out, in);
                    if (stats)
                        stats->input_grad_flops += 2ull * in * out * batch;
                }
                break;
            }
            case Op::conv2d: {
                const Tensor& X = nodes_[n.a].value;
                const Tensor& K = nodes_[n.b].value;
                const int N = static_cast<int>(X.shape[0]);
                const int C = static_cast<int>(X.shape[1]);
                const int H = static_cast<int>(X.shape[2]);
                const int W = static_cast<int>(X.shape[3]);
                const int F = static_cast<int>(K.shape[0]);
                const int OH = H - 2, OW = W - 2;
                if (needs[n.b]) {
                    const unsigned char* m = sk.mask_for(n.b);
                    if (m && sk.unit_masks.at(n.b).size() != static_cast<std::size_t>(F))
                        throw contract_error("conv kernel skip mask length mismatch");
                    kernels::conv3x3_grad_k(grad_buf(n.b), g, X.data.data(), N, C, H, W, F, m);
                    if (stats) {
                        const std::uint64_t filts =
                            F - GradSkip::count_skipped(m, static_cast<std::size_t>(F));
                        stats->weight_grad_flops += filts * 2ull * C * 9ull * OH * OW * N;
                    }
                }
                if (n.c >= 0 && needs[n.c]) {
                    const unsigned char* m = sk.mask_for(n.c);
                    if (m && sk.unit_masks.at(n.c).size() != static_cast<std::size_t>(F))
                        throw contract_error("conv bias skip mask length mismatch");
                    kernels::conv3x3_grad_b(grad_buf(n.c), g, N, F, OH, OW, m);
                    if (stats) {
                        const std::uint64_t filts =
                            F - GradSkip::count_skipped(m, static_cast<std::size_t>(F));
                        stats->weight_grad_flops += filts * static_cast<std::uint64_t>(OH) * OW * N;
                    }
                }
                if (needs[n.a]) {
                    kernels::conv3x3_grad_x(grad_buf(n.a), g, K.data.data(), N, C, H, W, F);
                    if (stats)
                        stats->input_grad_flops += 2ull * C * 9ull * F * OH * OW * N;
                }
                break;
            }
            case Op::relu: {
                const Tensor& X = nodes_[n.a].value;
                if (needs[n.a]) {
                    kernels::relu_bwd(grad_buf(n.a), g, X.data.data(), X.numel());
                    if (stats) stats->input_grad_flops += X.numel();
                }
                break;
            }
            case Op::flatten: {
                if (needs[n.a]) {
                    double* gx = grad_buf(n.a);
                    const std::size_t count = n.value.numel();
                    for (std::size_t i = 0; i < count; ++i) gx[i] += g[i];
                }
                break;
            }
            case Op::sum: {
                if (needs[n.a]) {
                    double* gx = grad_buf(n.a);
                    const std::size_t count = nodes_[n.a].value.numel();
                    for (std::size_t i = 0; i < count; ++i) gx[i] += g[0];
                }
                break;
            }
            case Op::softmax_xent: {
                const Tensor& L = nodes_[n.a].value;
                if (needs[n.a])
                    kernels::softmax_xent_bwd(grad_buf(n.a), L.data.data(), n.labels.data(),
                                              static_cast<int>(L.shape[0]),
                                              static_cast<int>(L.shape[1]), g[0]);
                break;
            }
            case Op::input:
                break;
        }
    }
}

}  // namespace scotti
