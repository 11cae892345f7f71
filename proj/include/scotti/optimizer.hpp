#pragma once

#include <cstdint>
#include <vector>

#include "scotti/equilibrium.hpp"
#include "scotti/graph.hpp"
#include "scotti/model.hpp"
#include "scotti/tensor.hpp"

namespace scotti {

// Which way the learned threshold moves against its hypergradient. `paper`
// is the printed closed form (ε_{t+1} = ε_t − η_ε·(g_t·g_{t−1})·α_t);
// `flipped` negates the step for experimentation.
enum class EpsilonSign { paper, flipped };

// SGD-with-momentum state plus the two learned scalars (step size α and
// freeze threshold ε) and the previous masked gradient their updates need.
struct HyperState {
    double alpha = 0.1;
    double epsilon = 0.0;
    double eta_alpha = 0.0;
    double eta_epsilon = 0.0;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    EpsilonSign epsilon_sign = EpsilonSign::paper;

    std::vector<double> prev_masked_grad;  // zeros until the first iteration ran
    std::vector<double> momentum_buf;
    bool warned_nonpositive_alpha = false;

    void init(std::size_t scalar_count);
};

// Hard step function used as the freezing indicator: Θ(x) = 1 for x > 0,
// else 0 (Θ(0) = 0 matches the inclusive freeze comparison |v| ≤ ε).
double ste_theta(double x);
// Straight-through surrogate derivative: the upstream value passes through.
double ste_theta_grad(double upstream);

// α_{t+1} = α_t + η_α · Σ_i g_t[i]·g_prev[i]·θ[i], θ being the per-scalar
// active mask (1 = the parameter was updatable this iteration). Returns the
// masked dot product. Warns on stderr (once) if α leaves (0, ∞).
double hyperstep_alpha(const std::vector<double>& grad, const std::vector<unsigned char>& theta,
                       HyperState& h);

// ε_{t+1} = ε_t ∓ η_ε · (Σ_i g_t[i]·g_prev[i]) · α_t. The closed form reads
// the same α_t the α-update starts from, so call this before hyperstep_alpha
// within an iteration. Returns the unmasked dot.
double hyperstep_epsilon(const std::vector<double>& grad, HyperState& h);

// One SGD-with-momentum step over the scalars with mask[i] == 1:
//   g = grad + wd·w;  buf = μ·buf + g;  w −= α·buf.
// Masked-out scalars keep their weight, momentum buffer, and decay untouched.
void masked_sgd_step(Model& m, const std::vector<double>& flat_grad,
                     const std::vector<unsigned char>& active, HyperState& h);

struct IterationResult {
    double loss = 0.0;
    int correct = 0;  // top-1 hits on the batch, measured before the update
    double dot_alpha = 0.0;
    double dot_epsilon = 0.0;
    BackwardStats backward_stats;
};

// One full training iteration under the given freeze mask:
// forward/backward with frozen slices skipped, both hyper-updates, then the
// masked weight update with the fresh α, then the gradient is stored for the
// next iteration's hyper-updates.
IterationResult train_iteration(Model& m, const Tensor& x, const std::vector<int>& labels,
                                const FreezeMask& mask, HyperState& h);

}  // namespace scotti
