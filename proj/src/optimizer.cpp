#include "scotti/optimizer.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "scotti/error.hpp"

namespace scotti {

void HyperState::init(std::size_t scalar_count) {
    prev_masked_grad.assign(scalar_count, 0.0);
    momentum_buf.assign(scalar_count, 0.0);
}

double ste_theta(double x) { return x > 0.0 ? 1.0 : 0.0; }

double ste_theta_grad(double upstream) { return upstream; }

double hyperstep_alpha(const std::vector<double>& grad, const std::vector<unsigned char>& theta,
                       HyperState& h) {
    if (grad.size() != h.prev_masked_grad.size() || grad.size() != theta.size())
        throw contract_error("hyperstep_alpha: gradient/theta/state sizes differ");
    double dot = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (theta[i]) dot += grad[i] * h.prev_masked_grad[i];
    h.alpha += h.eta_alpha * dot;
    if (h.alpha <= 0.0 && !h.warned_nonpositive_alpha) {
        std::fprintf(stderr, "warning: learned step size reached %.17g (non-positive)\n", h.alpha);
        h.warned_nonpositive_alpha = true;
    }
    return dot;
}

double hyperstep_epsilon(const std::vector<double>& grad, HyperState& h) {
    if (grad.size() != h.prev_masked_grad.size())
        throw contract_error("hyperstep_epsilon: gradient/state sizes differ");
    double dot = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) dot += grad[i] * h.prev_masked_grad[i];
    const double step = h.eta_epsilon * dot * h.alpha;
    h.epsilon -= h.epsilon_sign == EpsilonSign::paper ? step : -step;
    return dot;
}

void masked_sgd_step(Model& m, const std::vector<double>& flat_grad,
                     const std::vector<unsigned char>& active, HyperState& h) {
    if (flat_grad.size() != m.param_scalar_count() || active.size() != flat_grad.size() ||
        h.momentum_buf.size() != flat_grad.size())
        throw contract_error("masked_sgd_step: size mismatch against model scalars");
    std::size_t at = 0;
    for (Tensor& p : m.params()) {
        for (std::size_t i = 0; i < p.numel(); ++i, ++at) {
            if (!active[at]) continue;
            const double g = flat_grad[at] + h.weight_decay * p.data[i];
            h.momentum_buf[at] = h.momentum * h.momentum_buf[at] + g;
            p.data[i] -= h.alpha * h.momentum_buf[at];
        }
    }
}

IterationResult train_iteration(Model& m, const Tensor& x, const std::vector<int>& labels,
                                const FreezeMask& mask, HyperState& h) {
    if (h.prev_masked_grad.size() != m.param_scalar_count())
        throw contract_error("train_iteration: HyperState not initialised for this model");

    const std::vector<unsigned char> frozen = frozen_flags(m, mask);

    Graph g;
    const ForwardNodes f = m.forward(g, x);
    const int loss_node = g.softmax_xent(f.logits, labels);

    IterationResult r;
    r.loss = g.value(loss_node).data[0];
    if (!std::isfinite(r.loss))
        throw numeric_error("loss became non-finite (" + std::to_string(r.loss) + ")");

    const GradSkip skip = m.grad_skip(f, frozen);
    g.backward(loss_node, &skip, &r.backward_stats);

    std::vector<double> grad;
    m.flat_grads(g, f, grad);

    std::vector<unsigned char> active;
    m.scalar_mask(frozen, active);

    // Both scalar updates read this iteration's pre-update α (the closed
    // forms use α_t on the right-hand side), so the ε step — whose update
    // rule multiplies by α_t — runs while α still holds it. The weight update
    // then uses the freshly advanced α.
    r.dot_epsilon = hyperstep_epsilon(grad, h);
    r.dot_alpha = hyperstep_alpha(grad, active, h);
    masked_sgd_step(m, grad, active, h);
    h.prev_masked_grad = std::move(grad);

    // batch accuracy from the pre-update logits
    const Tensor& logits = g.value(f.logits);
    const std::size_t rows = logits.shape[0], classes = logits.shape[1];
    for (std::size_t row = 0; row < rows; ++row) {
        const double* l = logits.data.data() + row * classes;
        std::size_t best = 0;
        for (std::size_t k = 1; k < classes; ++k)
            if (l[k] > l[best]) best = k;
        if (static_cast<int>(best) == labels[row]) ++r.correct;
    }
    return r;
}

}  // namespace scotti
