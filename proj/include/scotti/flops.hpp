#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "scotti/equilibrium.hpp"
#include "scotti/model.hpp"

namespace scotti {

// FLOP accounting conventions (used consistently on both the booked and the
// measured side): a multiply-accumulate is 2 FLOPs; dense forward costs
// 2·in·out·B + out·B (the bias adds), conv forward 2·(C·9)·F·OH·OW·B +
// F·OH·OW·B, relu n·B; flatten is free; the loss layer is excluded
// everywhere; evaluation forwards are excluded everywhere.
struct FlopsTriple {
    std::uint64_t forward = 0;
    std::uint64_t backward_weight = 0;  // weight + bias gradient kernels
    std::uint64_t backward_input = 0;   // input gradients + relu backward
    std::uint64_t total() const { return forward + backward_weight + backward_input; }
};

// Full (unmasked) per-layer cost at the given batch size.
FlopsTriple layer_flops(const LayerSpec& layer, std::size_t batch);

// Structural booking of one backward sweep under a freeze mask. Frozen units
// lose their weight-gradient share; a layer's input gradient is booked only
// when some unfrozen trainable layer sits strictly below it; a relu backward
// is booked only when the trainable layer it feeds from — or anything below —
// is unfrozen. An all-frozen model books zero backward cost.
struct BackwardBooking {
    std::uint64_t weight = 0;
    std::uint64_t input = 0;
};
BackwardBooking backward_flops(const Model& m, const FreezeMask& mask, std::size_t batch);

std::uint64_t forward_flops(const Model& m, std::size_t batch);

// 100·(1 − spent/baseline); baseline must be non-zero.
double flops_saved_percent(std::uint64_t spent, std::uint64_t baseline);

struct EpochFlops {
    std::uint64_t forward = 0;
    std::uint64_t backward_weight = 0;
    std::uint64_t backward_input = 0;
    std::uint64_t probe = 0;  // equilibrium probe forwards
    std::uint64_t hyper = 0;  // hyper-update dot products (informational)
    std::uint64_t train_total() const { return forward + backward_weight + backward_input; }
};

// Books actual and baseline cost side by side, epoch by epoch. The baseline
// is the identical run with nothing frozen. Probe and hyper overhead are
// tracked separately and enter the headline number only when
// count_probe_overhead is set; the baseline never includes them.
class FlopsLedger {
public:
    explicit FlopsLedger(bool count_probe_overhead = false)
        : count_probe_overhead_(count_probe_overhead) {}

    void begin_epoch();
    void book_iteration(const Model& m, const FreezeMask& mask, std::size_t batch);
    void book_probe(const Model& m, std::size_t probe_size);
    void book_hyper(std::size_t scalar_count);

    // Books one whole epoch from precomputed totals (spent vs baseline), for
    // building ledgers directly from cost models rather than a live run.
    void add_epoch(const EpochFlops& spent, const EpochFlops& baseline);

    const std::vector<EpochFlops>& epochs() const { return spent_; }
    const std::vector<EpochFlops>& baseline() const { return base_; }

    std::uint64_t spent_total() const;     // includes probe+hyper only when counting overhead
    std::uint64_t baseline_total() const;  // never includes overhead
    std::uint64_t probe_total() const;
    std::uint64_t hyper_total() const;
    double saved_percent() const { return flops_saved_percent(spent_total(), baseline_total()); }

    // What one epoch costs under the headline convention.
    std::uint64_t epoch_spent(std::size_t epoch) const;
    bool counts_probe_overhead() const { return count_probe_overhead_; }

    nlohmann::json to_json() const;

private:
    EpochFlops& current();
    EpochFlops& current_base();

    bool count_probe_overhead_;
    std::vector<EpochFlops> spent_;
    std::vector<EpochFlops> base_;
};

}  // namespace scotti
