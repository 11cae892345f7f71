#include "scotti/flops.hpp"

#include <limits>

#include "scotti/error.hpp"

namespace scotti {

FlopsTriple layer_flops(const LayerSpec& layer, std::size_t batch) {
    const std::uint64_t B = batch;
    FlopsTriple t;
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
        const std::uint64_t in = static_cast<std::uint64_t>(d->in);
        const std::uint64_t out = static_cast<std::uint64_t>(d->out);
        t.forward = 2 * in * out * B + out * B;
        t.backward_weight = 2 * in * out * B + out * B;
        t.backward_input = 2 * in * out * B;
    } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
        const std::uint64_t win = 9ull * static_cast<std::uint64_t>(c->in_ch);
        const std::uint64_t f = static_cast<std::uint64_t>(c->out_ch);
        const std::uint64_t plane =
            static_cast<std::uint64_t>(c->out_h()) * static_cast<std::uint64_t>(c->out_w());
        t.forward = 2 * win * f * plane * B + f * plane * B;
        t.backward_weight = 2 * win * f * plane * B + f * plane * B;
        t.backward_input = 2 * win * f * plane * B;
    } else if (const auto* r = std::get_if<ReluSpec>(&layer)) {
        t.forward = static_cast<std::uint64_t>(r->width) * B;
        t.backward_input = static_cast<std::uint64_t>(r->width) * B;
    }
    // flatten: all zero
    return t;
}

std::uint64_t forward_flops(const Model& m, std::size_t batch) {
    std::uint64_t total = 0;
    for (const LayerSpec& l : m.layers()) total += layer_flops(l, batch).forward;
    return total;
}

BackwardBooking backward_flops(const Model& m, const FreezeMask& mask, std::size_t batch) {
    const std::uint64_t B = batch;

    // unfrozen units per trainable layer
    std::vector<std::uint64_t> unfrozen(static_cast<std::size_t>(m.trainable_count()));
    for (int t = 0; t < m.trainable_count(); ++t)
        unfrozen[static_cast<std::size_t>(t)] = static_cast<std::uint64_t>(m.units_in(t));
    for (const NeuronId& id : mask.frozen) {
        m.neuron_ordinal(id);  // bounds check
        --unfrozen[static_cast<std::size_t>(id.layer)];
    }

    // deepest (closest to the input) trainable layer with any unfrozen unit
    int lstar = std::numeric_limits<int>::max();
    for (int t = 0; t < m.trainable_count(); ++t)
        if (unfrozen[static_cast<std::size_t>(t)] > 0) {
            lstar = t;
            break;
        }

    BackwardBooking b;
    int ordinal = -1;
    for (const LayerSpec& layer : m.layers()) {
        if (const auto* d = std::get_if<DenseSpec>(&layer)) {
            ++ordinal;
            const std::uint64_t in = static_cast<std::uint64_t>(d->in);
            b.weight += unfrozen[static_cast<std::size_t>(ordinal)] * (2 * in * B + B);
            if (lstar < ordinal)
                b.input += 2 * in * static_cast<std::uint64_t>(d->out) * B;
        } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
            ++ordinal;
            const std::uint64_t win = 9ull * static_cast<std::uint64_t>(c->in_ch);
            const std::uint64_t plane =
                static_cast<std::uint64_t>(c->out_h()) * static_cast<std::uint64_t>(c->out_w());
            b.weight += unfrozen[static_cast<std::size_t>(ordinal)] * (2 * win * plane * B + plane * B);
            if (lstar < ordinal)
                b.input += 2 * win * static_cast<std::uint64_t>(c->out_ch) * plane * B;
        } else if (const auto* r = std::get_if<ReluSpec>(&layer)) {
            if (ordinal >= 0 && lstar <= ordinal)
                b.input += static_cast<std::uint64_t>(r->width) * B;
        }
    }
    return b;
}

double flops_saved_percent(std::uint64_t spent, std::uint64_t baseline) {
    if (baseline == 0) throw contract_error("flops_saved_percent: baseline is zero");
    return 100.0 * (1.0 - static_cast<double>(spent) / static_cast<double>(baseline));
}

void FlopsLedger::begin_epoch() {
    spent_.emplace_back();
    base_.emplace_back();
}

void FlopsLedger::add_epoch(const EpochFlops& spent, const EpochFlops& baseline) {
    spent_.push_back(spent);
    base_.push_back(baseline);
}

EpochFlops& FlopsLedger::current() {
    if (spent_.empty()) throw contract_error("ledger: book before begin_epoch");
    return spent_.back();
}

EpochFlops& FlopsLedger::current_base() {
    if (base_.empty()) throw contract_error("ledger: book before begin_epoch");
    return base_.back();
}

void FlopsLedger::book_iteration(const Model& m, const FreezeMask& mask, std::size_t batch) {
    const std::uint64_t fwd = forward_flops(m, batch);
    const BackwardBooking bw = backward_flops(m, mask, batch);
    const BackwardBooking full = backward_flops(m, FreezeMask{}, batch);
    if (bw.weight + bw.input > full.weight + full.input)
        throw contract_error("ledger: masked backward booked above baseline");
    EpochFlops& s = current();
    s.forward += fwd;
    s.backward_weight += bw.weight;
    s.backward_input += bw.input;
    EpochFlops& b = current_base();
    b.forward += fwd;
    b.backward_weight += full.weight;
    b.backward_input += full.input;
}

void FlopsLedger::book_probe(const Model& m, std::size_t probe_size) {
    current().probe += forward_flops(m, probe_size);
    current_base();  // baseline books no probe
}

void FlopsLedger::book_hyper(std::size_t scalar_count) {
    current().hyper += 4ull * scalar_count + 8ull;
}

std::uint64_t FlopsLedger::spent_total() const {
    std::uint64_t total = 0;
    for (const EpochFlops& e : spent_) {
        total += e.train_total();
        if (count_probe_overhead_) total += e.probe + e.hyper;
    }
    return total;
}

std::uint64_t FlopsLedger::baseline_total() const {
    std::uint64_t total = 0;
    for (const EpochFlops& e : base_) total += e.train_total();
    return total;
}

std::uint64_t FlopsLedger::probe_total() const {
    std::uint64_t total = 0;
    for (const EpochFlops& e : spent_) total += e.probe;
    return total;
}

std::uint64_t FlopsLedger::hyper_total() const {
    std::uint64_t total = 0;
    for (const EpochFlops& e : spent_) total += e.hyper;
    return total;
}

std::uint64_t FlopsLedger::epoch_spent(std::size_t epoch) const {
    if (epoch >= spent_.size()) throw index_error("ledger has no epoch " + std::to_string(epoch));
    const EpochFlops& e = spent_[epoch];
    return e.train_total() + (count_probe_overhead_ ? e.probe + e.hyper : 0);
}

nlohmann::json FlopsLedger::to_json() const {
    nlohmann::json j;
    j["convention"] = {{"mac_flops", 2},
                       {"loss_layer_counted", false},
                       {"eval_forward_counted", false},
                       {"probe_overhead_in_headline", count_probe_overhead_}};
    auto dump = [](const std::vector<EpochFlops>& rows, bool overhead) {
        nlohmann::json out = nlohmann::json::array();
        for (const EpochFlops& e : rows) {
            nlohmann::json r = {{"forward", e.forward},
                                {"backward_weight", e.backward_weight},
                                {"backward_input", e.backward_input}};
            if (overhead) {
                r["probe"] = e.probe;
                r["hyper"] = e.hyper;
            }
            out.push_back(std::move(r));
        }
        return out;
    };
    j["epochs"] = dump(spent_, true);
    j["baseline_epochs"] = dump(base_, false);
    j["spent_total"] = spent_total();
    j["baseline_total"] = baseline_total();
    j["probe_total"] = probe_total();
    j["hyper_total"] = hyper_total();
    j["saved_percent"] = saved_percent();
    return j;
}

}  // namespace scotti
