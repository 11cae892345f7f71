#pragma once

#include <map>
#include <set>
#include <vector>

#include "scotti/model.hpp"
#include "scotti/tensor.hpp"

namespace scotti {

// Per-neuron output snapshot over a fixed probe batch, taken at the end of
// an epoch. Each unit's response vector is L2-normalized; a unit that was
// exactly silent on every probe sample keeps an all-zero vector as a
// sentinel. Indexed by neuron ordinal (Model::neuron_ordinal order).
struct OutputSnapshot {
    int epoch = -1;
    std::vector<std::vector<double>> units;
};

// The set of neurons whose updates are skipped during one epoch.
struct FreezeMask {
    std::set<NeuronId> frozen;
    int epoch = 0;

    bool contains(NeuronId id) const { return frozen.count(id) != 0; }
    std::size_t size() const { return frozen.size(); }
};

// Forward the probe batch through the model and record normalized
// post-activation responses of every neuron. Does not modify the model.
OutputSnapshot capture_probe_outputs(const Model& m, const Tensor& probe_inputs, int epoch);

// Similarity of one neuron's responses across two consecutive snapshots.
// Both vectors unit-length → dot product, clamped to [−1, 1] against ulp
// overshoot. Sentinel rules: two silent snapshots are "unchanged" (1.0);
// silence appearing or disappearing is "fully changed" (0.0).
double cosine_phi(const OutputSnapshot& current, const OutputSnapshot& previous, int ordinal);

// One velocity update: v_e = (φ_e − φ_{e−1}) − μ_eq · v_{e−1}.
double velocity_step(double phi_e, double phi_prev, double v_prev, double mu_eq);

// Freeze every neuron whose |velocity| ≤ epsilon (inclusive). Neurons absent
// from the map (no velocity yet) are never frozen.
FreezeMask compute_freeze_mask(const std::map<NeuronId, double>& velocity, double epsilon,
                               int for_epoch);

// Per-neuron-ordinal flags (1 = frozen) for mask consumers.
std::vector<unsigned char> frozen_flags(const Model& m, const FreezeMask& mask);

// Owns the probe batch and the φ/velocity history. Drive it once at the end
// of every epoch; it returns the mask to apply to the NEXT epoch. Warm-up
// falls out of the history depth: the first snapshot exists after epoch 0,
// the first φ after epoch 1, the first velocity after epoch 2, so the first
// non-empty mask can take effect at epoch 3.
class EquilibriumTracker {
public:
    EquilibriumTracker(const Model& m, Tensor probe_inputs, double mu_eq);

    FreezeMask end_of_epoch(const Model& m, int epoch, double epsilon);

    int snapshots_taken() const { return snapshots_; }
    bool has_velocities() const { return snapshots_ >= 3; }
    // Latest velocities by neuron ordinal; contract_error before warm-up.
    const std::vector<double>& velocities() const;
    const Tensor& probe_inputs() const { return probe_; }
    double mu_eq() const { return mu_eq_; }

private:
    Tensor probe_;
    double mu_eq_;
    int snapshots_ = 0;
    OutputSnapshot prev_;
    std::vector<double> phi_prev_;
    std::vector<double> v_;
};

}  // namespace scotti
