#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "scotti/tensor.hpp"

namespace scotti {

// Reverse-mode autodiff on an append-only tape. Forward values are computed
// eagerly as ops are added; backward() walks the tape in exact reverse
// construction order, which makes gradient accumulation order — and thus
// every floating-point result — deterministic.

enum class Op : std::uint8_t { input, matmul, linear, conv2d, relu, flatten, sum, softmax_xent };

// Structural gradient skipping. For a leaf consumed as a dense weight the
// mask has one flag per output row; for a dense bias one per element; for a
// conv kernel one per filter; for a conv bias one per filter. A set flag
// means: do not compute this unit's gradient at all (it stays exactly zero,
// and the kernel work never happens). A fully-set mask makes the leaf behave
// as if it did not require gradients, which in turn prunes every
// input-gradient kernel that existed only to reach it.
struct GradSkip {
    std::unordered_map<int, std::vector<unsigned char>> unit_masks;

    bool empty() const { return unit_masks.empty(); }
    // Pointer to the mask for `node`, or nullptr if the node is unmasked.
    const unsigned char* mask_for(int node) const;
    bool fully_skipped(int node, std::size_t units) const;
    static std::size_t count_skipped(const unsigned char* mask, std::size_t units);
};

// FLOP counts of the backward kernels that actually executed, split the same
// way the cost ledger splits them. Multiply-accumulate counts as 2 FLOPs.
struct BackwardStats {
    std::uint64_t weight_grad_flops = 0;  // dense/conv weight + bias gradients
    std::uint64_t input_grad_flops = 0;   // dense/conv input gradients + relu backward
    std::uint64_t total() const { return weight_grad_flops + input_grad_flops; }
};

struct Node {
    Op op = Op::input;
    int a = -1, b = -1, c = -1;  // input node ids (-1 = unused)
    Tensor value;                // forward result; value.grad filled by backward()
    bool requires_grad = false;  // static reachability from a grad-requiring leaf
    std::vector<int> labels;     // softmax_xent only
};

class Graph {
public:
    // Leaves. Rejects non-finite data.
    int add_input(Tensor t, bool requires_grad = false);

    // Ops (eager). All throw dim_error on shape mismatch.
    int matmul(int a, int b);                  // [m,k]·[k,n] → [m,n]
    int linear(int x, int w, int b);           // x[B,in]·w[out,in]ᵀ + b[out]
    int conv2d(int x, int k, int b = -1);      // 3×3 valid, stride 1
    int relu(int x);
    int flatten(int x);                        // [N,...] → [N, prod]
    int sum(int x);                            // scalar
    int softmax_xent(int logits, std::vector<int> labels);  // scalar mean loss

    std::size_t size() const { return nodes_.size(); }
    const Node& node(int id) const;
    const Tensor& value(int id) const { return node(id).value; }
    // Gradient of a node after backward(); empty if none was accumulated.
    const std::vector<double>& grad(int id) const { return node(id).value.grad; }

    // Reverse sweep from a scalar node. Gradient kernels run only where some
    // unskipped grad-requiring leaf lies below; skipped units stay zero.
    void backward(int loss, const GradSkip* skip = nullptr, BackwardStats* stats = nullptr);

private:
    int push(Node n);
    const Node& checked(int id, const char* ctx) const;

    std::vector<Node> nodes_;
};

}  // namespace scotti
