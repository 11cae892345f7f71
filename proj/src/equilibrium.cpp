#include "scotti/equilibrium.hpp"

#include <cmath>

#include "scotti/error.hpp"
#include "scotti/graph.hpp"

namespace scotti {

namespace {

bool is_silent(const std::vector<double>& v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}

}  // namespace

OutputSnapshot capture_probe_outputs(const Model& m, const Tensor& probe_inputs, int epoch) {
    if (probe_inputs.ndim() != 2 || probe_inputs.shape[0] == 0)
        throw contract_error("probe batch must be [P, features] with P ≥ 1, got " +
                             probe_inputs.shape_str());
    Graph g;
    const ForwardNodes f = m.forward(g, probe_inputs);
    const std::size_t P = probe_inputs.shape[0];

    OutputSnapshot snap;
    snap.epoch = epoch;
    snap.units.reserve(static_cast<std::size_t>(m.neuron_count()));

    for (int t = 0; t < m.trainable_count(); ++t) {
        const Tensor& y = g.value(f.layer_outputs[static_cast<std::size_t>(t)]);
        const int units = m.units_in(t);
        // dense output [P, out] → column per unit; conv output [P, F, OH, OW]
        // → per-filter block, flattened sample-major.
        const std::size_t per_unit = y.numel() / (P * static_cast<std::size_t>(units));
        for (int u = 0; u < units; ++u) {
            std::vector<double> vec(P * per_unit);
            if (y.ndim() == 2) {
                for (std::size_t p = 0; p < P; ++p)
                    vec[p] = y.data[p * static_cast<std::size_t>(units) + static_cast<std::size_t>(u)];
            } else {
                const std::size_t plane = per_unit;  // OH·OW
                for (std::size_t p = 0; p < P; ++p) {
                    const double* src = y.data.data() +
                                        (p * static_cast<std::size_t>(units) +
                                         static_cast<std::size_t>(u)) * plane;
                    for (std::size_t i = 0; i < plane; ++i) vec[p * plane + i] = src[i];
                }
            }
            double sq = 0.0;
            for (double x : vec) sq += x * x;
            const double norm = std::sqrt(sq);
            if (norm == 0.0) {
                vec.assign(vec.size(), 0.0);  // silent-unit sentinel
            } else {
                for (double& x : vec) x /= norm;
            }
            snap.units.push_back(std::move(vec));
        }
    }
    return snap;
}

double cosine_phi(const OutputSnapshot& current, const OutputSnapshot& previous, int ordinal) {
    if (ordinal < 0 || static_cast<std::size_t>(ordinal) >= current.units.size() ||
        static_cast<std::size_t>(ordinal) >= previous.units.size())
        throw index_error("snapshot has no neuron ordinal " + std::to_string(ordinal));
    const std::vector<double>& a = current.units[static_cast<std::size_t>(ordinal)];
    const std::vector<double>& b = previous.units[static_cast<std::size_t>(ordinal)];
    if (a.size() != b.size())
        throw contract_error("snapshot vectors of neuron " + std::to_string(ordinal) +
                             " differ in length: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    const bool sa = is_silent(a), sb = is_silent(b);
    if (sa && sb) return 1.0;  // still silent → unchanged
    if (sa || sb) return 0.0;  // silence appeared or vanished → fully changed
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    // rounding can push the dot of two unit vectors past ±1 by an ulp
    if (dot > 1.0) dot = 1.0;
    if (dot < -1.0) dot = -1.0;
    return dot;
}

double velocity_step(double phi_e, double phi_prev, double v_prev, double mu_eq) {
    return (phi_e - phi_prev) - mu_eq * v_prev;
}

FreezeMask compute_freeze_mask(const std::map<NeuronId, double>& velocity, double epsilon,
                               int for_epoch) {
    FreezeMask mask;
    mask.epoch = for_epoch;
    for (const auto& [id, v] : velocity)
        if (std::fabs(v) <= epsilon) mask.frozen.insert(id);
    return mask;
}

std::vector<unsigned char> frozen_flags(const Model& m, const FreezeMask& mask) {
    std::vector<unsigned char> flags(static_cast<std::size_t>(m.neuron_count()), 0);
    for (const NeuronId& id : mask.frozen)
        flags[static_cast<std::size_t>(m.neuron_ordinal(id))] = 1;
    return flags;
}

EquilibriumTracker::EquilibriumTracker(const Model& m, Tensor probe_inputs, double mu_eq)
    : probe_(std::move(probe_inputs)), mu_eq_(mu_eq) {
    if (probe_.ndim() != 2 || probe_.shape[0] == 0)
        throw contract_error("probe batch must be [P, features] with P ≥ 1");
    if (probe_.shape[1] != m.input_width())
        throw contract_error("probe width " + std::to_string(probe_.shape[1]) +
                             " does not match model input " + std::to_string(m.input_width()));
    phi_prev_.assign(static_cast<std::size_t>(m.neuron_count()), 0.0);
    v_.assign(static_cast<std::size_t>(m.neuron_count()), 0.0);
}

const std::vector<double>& EquilibriumTracker::velocities() const {
    if (!has_velocities())
        throw contract_error("velocities requested before the third snapshot");
    return v_;
}

FreezeMask EquilibriumTracker::end_of_epoch(const Model& m, int epoch, double epsilon) {
    if (static_cast<std::size_t>(m.neuron_count()) != v_.size())
        throw contract_error("tracker was built for a different model");
    OutputSnapshot snap = capture_probe_outputs(m, probe_, epoch);

    if (snapshots_ >= 1) {
        std::vector<double> phi(v_.size());
        for (std::size_t o = 0; o < v_.size(); ++o)
            phi[o] = cosine_phi(snap, prev_, static_cast<int>(o));
        if (snapshots_ >= 2)
            for (std::size_t o = 0; o < v_.size(); ++o)
                v_[o] = velocity_step(phi[o], phi_prev_[o], v_[o], mu_eq_);
        phi_prev_ = std::move(phi);
    }
    prev_ = std::move(snap);
    ++snapshots_;

    if (!has_velocities()) return FreezeMask{{}, epoch + 1};

    std::map<NeuronId, double> vel;
    for (const NeuronId& id : m.neurons())
        vel[id] = v_[static_cast<std::size_t>(m.neuron_ordinal(id))];
    return compute_freeze_mask(vel, epsilon, epoch + 1);
}

}  // namespace scotti
