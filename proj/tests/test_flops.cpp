// Cost accounting: per-layer FLOP formulas, mask-aware backward booking, the
// ledger's saved-percent arithmetic, and the consistency between what the
// ledger books and what the backward pass actually executes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <vector>

#include "scotti/equilibrium.hpp"
#include "scotti/error.hpp"
#include "scotti/flops.hpp"
#include "scotti/graph.hpp"
#include "scotti/model.hpp"
#include "scotti/rng.hpp"
#include "scotti/tensor.hpp"

using namespace scotti;

namespace {

Tensor random_batch(std::size_t rows, std::size_t width, Rng& rng) {
    Tensor t = Tensor::zeros({rows, width});
    for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
    return t;
}

// BackwardStats of one real backward sweep under the mask.
BackwardStats measured_backward(const Model& m, const FreezeMask& mask, std::size_t batch,
                                Rng& rng) {
    Graph g;
    const Tensor x = random_batch(batch, m.input_width(), rng);
    const ForwardNodes f = m.forward(g, x);
    std::vector<int> labels(batch);
    for (int& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(m.classes())));
    const int loss = g.softmax_xent(f.logits, labels);
    const GradSkip skip = m.grad_skip(f, frozen_flags(m, mask));
    BackwardStats stats;
    g.backward(loss, &skip, &stats);
    return stats;
}

FreezeMask random_mask(const Model& m, Rng& rng, double p_frozen) {
    FreezeMask mask;
    for (const NeuronId& id : m.neurons())
        if (rng.uniform() < p_frozen) mask.frozen.insert(id);
    return mask;
}

}  // namespace

TEST_CASE("per-layer flop formulas") {
    const FlopsTriple d = layer_flops(DenseSpec{4, 3}, 2);
    CHECK(d.forward == 54);  // 2·4·3·2 multiply-adds + 3·2 bias adds
    CHECK(d.backward_weight == 54);
    CHECK(d.backward_input == 48);

    for (const LayerSpec& l : std::vector<LayerSpec>{DenseSpec{4, 3}, Conv2dSpec{1, 1, 8, 8},
                                                     ReluSpec{16}, FlattenSpec{16}}) {
        const FlopsTriple z = layer_flops(l, 0);
        CHECK(z.forward == 0);
        CHECK(z.backward_weight == 0);
        CHECK(z.backward_input == 0);
    }

    // one 1→1 filter on 8×8: 9 MACs at each of the 36 output positions + bias
    const FlopsTriple c = layer_flops(Conv2dSpec{1, 1, 8, 8}, 1);
    CHECK(c.forward == 684);
    CHECK(c.backward_weight == 684);
    CHECK(c.backward_input == 648);

    const FlopsTriple r = layer_flops(ReluSpec{10}, 3);
    CHECK(r.forward == 30);
    CHECK(r.backward_weight == 0);
    CHECK(r.backward_input == 30);

    const FlopsTriple f = layer_flops(FlattenSpec{64}, 5);
    CHECK(f.total() == 0);
}

TEST_CASE("model forward cost sums the layers") {
    Rng rng(41);
    const Model m = Model::mlp({4, 3, 2}, rng);
    // dense 4→3 (plus relu 3) then dense 3→2, at B = 2
    const std::uint64_t want = (2 * 4 * 3 * 2 + 3 * 2) + (3 * 2) + (2 * 3 * 2 * 2 + 2 * 2);
    CHECK(forward_flops(m, 2) == want);
    CHECK(forward_flops(m, 0) == 0);
}

TEST_CASE("backward booking: empty, full, and half-layer masks") {
    Rng rng(42);
    const Model m = Model::mlp({4, 6, 4}, rng);
    const std::size_t B = 3;

    const BackwardBooking full = backward_flops(m, FreezeMask{}, B);
    // layer 0 weights: 6 rows·(2·4·B + B); layer 1: 4·(2·6·B + B)
    CHECK(full.weight == 6 * (2 * 4 * B + B) + 4 * (2 * 6 * B + B));
    // input gradients: only layer 1's flows (nothing consumes layer 0's input
    // gradient), plus the relu between them
    CHECK(full.input == 2 * 6 * 4 * B + 6 * B);

    FreezeMask all;
    for (const NeuronId& id : m.neurons()) all.frozen.insert(id);
    const BackwardBooking none = backward_flops(m, all, B);
    CHECK(none.weight == 0);
    CHECK(none.input == 0);

    // half the last layer frozen: that layer's weight cost halves, every
    // input-gradient term stays
    FreezeMask half;
    half.frozen.insert({1, 0});
    half.frozen.insert({1, 2});
    const BackwardBooking h = backward_flops(m, half, B);
    CHECK(h.weight == 6 * (2 * 4 * B + B) + 2 * (2 * 6 * B + B));
    CHECK(h.input == full.input);

    FreezeMask bogus;
    bogus.frozen.insert({9, 9});
    CHECK_THROWS_AS(backward_flops(m, bogus, B), index_error);
}

TEST_CASE("backward booking truncates below the deepest unfrozen layer") {
    Rng rng(43);
    const Model m = Model::mlp({4, 3, 2}, rng);
    const std::size_t B = 2;

    // all of layer 0 frozen → gradients stop at layer 1's weights: no input
    // gradient flows anywhere, the relu backward is skipped too
    FreezeMask lower;
    for (int u = 0; u < 3; ++u) lower.frozen.insert({0, u});
    const BackwardBooking b = backward_flops(m, lower, B);
    CHECK(b.weight == 2 * (2 * 3 * B + B));
    CHECK(b.input == 0);

    // one unfrozen unit deep down keeps the full input-gradient chain
    FreezeMask almost = lower;
    almost.frozen.erase({0, 1});
    const BackwardBooking a = backward_flops(m, almost, B);
    CHECK(a.weight == 1 * (2 * 4 * B + B) + 2 * (2 * 3 * B + B));
    CHECK(a.input == 2 * 3 * 2 * B + 3 * B);
}

TEST_CASE("booked backward equals the kernels the backward pass really runs") {
    Rng rng(44);
    const std::size_t B = 4;

    Model mlp = Model::mlp({5, 4, 3}, rng);
    Model cnn = model_from_spec("cnn:1x6x6:3:4,3", rng);

    for (Model* m : {&mlp, &cnn}) {
        {
            const BackwardBooking booked = backward_flops(*m, FreezeMask{}, B);
            const BackwardStats run = measured_backward(*m, FreezeMask{}, B, rng);
            CHECK(booked.weight == run.weight_grad_flops);
            CHECK(booked.input == run.input_grad_flops);
        }
        for (int trial = 0; trial < 20; ++trial) {
            const FreezeMask mask = random_mask(*m, rng, 0.4);
            const BackwardBooking booked = backward_flops(*m, mask, B);
            const BackwardStats run = measured_backward(*m, mask, B, rng);
            CHECK(booked.weight == run.weight_grad_flops);
            CHECK(booked.input == run.input_grad_flops);
        }
        {
            FreezeMask all;
            for (const NeuronId& id : m->neurons()) all.frozen.insert(id);
            const BackwardStats run = measured_backward(*m, all, B, rng);
            CHECK(run.weight_grad_flops == 0);
            CHECK(run.input_grad_flops == 0);
        }
    }
}

TEST_CASE("saved percent closed forms") {
    // nothing ever frozen → exactly 0.00%
    {
        FlopsLedger ledger;
        EpochFlops e;
        e.forward = 1000;
        e.backward_weight = 700;
        e.backward_input = 500;
        for (int epoch = 0; epoch < 6; ++epoch) ledger.add_epoch(e, e);
        CHECK(ledger.saved_percent() == 0.0);
    }

    // full freeze for the second half of a run whose forward cost equals its
    // backward cost → exactly 25.00%
    {
        FlopsLedger ledger;
        EpochFlops full, frozen;
        full.forward = 1000;
        full.backward_weight = 600;
        full.backward_input = 400;
        frozen.forward = 1000;
        for (int epoch = 0; epoch < 8; ++epoch)
            ledger.add_epoch(epoch < 4 ? full : frozen, full);
        CHECK(ledger.saved_percent() == 25.0);
    }

    // freeze everything after the two warm-up epochs: the saving approaches
    // the backward share of the budget as (E−2)/E
    {
        const std::uint64_t fwd = 3000, bww = 1200, bwi = 800;
        const int E = 10;
        FlopsLedger ledger;
        EpochFlops full, frozen;
        full.forward = fwd;
        full.backward_weight = bww;
        full.backward_input = bwi;
        frozen.forward = fwd;
        for (int epoch = 0; epoch < E; ++epoch)
            ledger.add_epoch(epoch < 2 ? full : frozen, full);
        const double backward_share =
            static_cast<double>(bww + bwi) / static_cast<double>(fwd + bww + bwi);
        const double want = 100.0 * backward_share * (E - 2) / E;
        CHECK(ledger.saved_percent() == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("saved percent bounds and failure modes") {
    CHECK_THROWS_AS(flops_saved_percent(1, 0), contract_error);
    CHECK(flops_saved_percent(0, 5000) == 100.0);
    CHECK(flops_saved_percent(5000, 5000) == 0.0);

    FlopsLedger empty;
    CHECK_THROWS_AS(empty.saved_percent(), contract_error);
    CHECK_THROWS_AS(empty.book_hyper(10), contract_error);
    CHECK_THROWS_AS(empty.epoch_spent(0), index_error);

    Rng rng(45);
    for (int trial = 0; trial < 50; ++trial) {
        FlopsLedger ledger;
        for (int epoch = 0; epoch < 4; ++epoch) {
            EpochFlops base;
            base.forward = 1 + rng.below(10000);
            base.backward_weight = rng.below(10000);
            base.backward_input = rng.below(10000);
            EpochFlops spent = base;
            spent.backward_weight = rng.below(base.backward_weight + 1);
            spent.backward_input = rng.below(base.backward_input + 1);
            ledger.add_epoch(spent, base);
        }
        const double saved = ledger.saved_percent();
        CHECK(saved >= 0.0);
        CHECK(saved <= 100.0);
    }
}

TEST_CASE("larger masks never save less") {
    Rng rng(46);
    Model m = Model::mlp({6, 5, 4}, rng);
    const std::size_t B = 4;

    for (int trial = 0; trial < 20; ++trial) {
        const FreezeMask small = random_mask(m, rng, 0.3);
        FreezeMask big = small;
        for (const NeuronId& id : m.neurons())
            if (!big.contains(id) && rng.uniform() < 0.5) big.frozen.insert(id);

        FlopsLedger ls, lb;
        for (int epoch = 0; epoch < 3; ++epoch) {
            ls.begin_epoch();
            lb.begin_epoch();
            for (int it = 0; it < 5; ++it) {
                ls.book_iteration(m, small, B);
                lb.book_iteration(m, big, B);
            }
        }
        CHECK(lb.saved_percent() >= ls.saved_percent());
    }
}

TEST_CASE("iteration booking matches the baseline when nothing is frozen") {
    Rng rng(47);
    Model m = model_from_spec("cnn:1x6x6:3:4,3", rng);
    FlopsLedger ledger;
    ledger.begin_epoch();
    for (int it = 0; it < 4; ++it) ledger.book_iteration(m, FreezeMask{}, 8);
    CHECK(ledger.epochs()[0].forward == ledger.baseline()[0].forward);
    CHECK(ledger.epochs()[0].backward_weight == ledger.baseline()[0].backward_weight);
    CHECK(ledger.epochs()[0].backward_input == ledger.baseline()[0].backward_input);
    CHECK(ledger.saved_percent() == 0.0);

    // full freeze books the forward only
    FreezeMask all;
    for (const NeuronId& id : m.neurons()) all.frozen.insert(id);
    FlopsLedger fl;
    fl.begin_epoch();
    fl.book_iteration(m, all, 8);
    CHECK(fl.epochs()[0].backward_weight == 0);
    CHECK(fl.epochs()[0].backward_input == 0);
    CHECK(fl.epochs()[0].forward == forward_flops(m, 8));
    CHECK(fl.baseline()[0].backward_weight > 0);
}

TEST_CASE("probe and hyper overhead stay out of the headline by default") {
    Rng rng(48);
    Model m = Model::mlp({4, 3, 2}, rng);

    FlopsLedger headline(false);
    headline.begin_epoch();
    headline.book_iteration(m, FreezeMask{}, 4);
    headline.book_probe(m, 50);
    headline.book_hyper(m.param_scalar_count());
    CHECK(headline.probe_total() == forward_flops(m, 50));
    CHECK(headline.hyper_total() == 4 * m.param_scalar_count() + 8);
    CHECK(headline.spent_total() == headline.baseline_total());
    CHECK(headline.saved_percent() == 0.0);
    CHECK(headline.epoch_spent(0) == headline.baseline_total());

    FlopsLedger net(true);
    net.begin_epoch();
    net.book_iteration(m, FreezeMask{}, 4);
    net.book_probe(m, 50);
    net.book_hyper(m.param_scalar_count());
    CHECK(net.spent_total() ==
          net.baseline_total() + forward_flops(m, 50) + 4 * m.param_scalar_count() + 8);
    CHECK(net.saved_percent() < 0.0 + 1e-12);  // overhead with no freezing costs extra
    // the baseline never absorbs overhead, with or without the flag
    CHECK(net.baseline_total() == headline.baseline_total());
    CHECK(net.epoch_spent(0) == net.spent_total());
}

TEST_CASE("hyper work is booked per call at the documented rate") {
    FlopsLedger ledger;
    ledger.begin_epoch();
    ledger.book_hyper(100);
    ledger.book_hyper(100);
    CHECK(ledger.hyper_total() == 2 * (4 * 100 + 8));
}
