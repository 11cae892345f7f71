#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "scotti/config.hpp"
#include "scotti/dataset.hpp"

namespace scotti {

// Scalar state at the top of one training iteration plus the two hypergradient
// dot products it produced. Replaying the closed forms over these rows must
// reproduce the alpha/epsilon sequences bitwise.
struct HyperTraceRow {
    double alpha = 0.0;        // α_t before this iteration's updates
    double epsilon = 0.0;      // ε_t before this iteration's updates
    double dot_alpha = 0.0;    // Σ g_t·g_{t−1}·θ (frozen scalars excluded)
    double dot_epsilon = 0.0;  // Σ g_t·g_{t−1} (unmasked)
};

// Everything one training run produced. All per-epoch series have exactly
// `config.epochs` entries; hyper_trace has one row per training iteration.
struct RunReport {
    TrainConfig config;

    std::vector<double> loss;        // mean training loss per epoch
    std::vector<double> train_acc;   // top-1 on training batches (pre-update logits)
    std::vector<double> test_acc;    // top-1 on the held-out test split
    std::vector<double> alpha;       // α at epoch end
    std::vector<double> epsilon;     // ε at epoch end
    std::vector<int> frozen_count;   // size of the mask applied during the epoch
    std::vector<std::uint64_t> epoch_flops;  // headline spend per epoch
    std::vector<double> vel_min, vel_mean, vel_max;  // |velocity| summary (0 until warm)
    std::vector<std::uint64_t> param_digest;  // FNV-1a over all parameters at epoch end

    std::vector<HyperTraceRow> hyper_trace;

    double final_train_acc = 0.0;
    double final_test_acc = 0.0;
    double flops_saved = 0.0;  // headline percentage
    nlohmann::json flops;      // full ledger report

    nlohmann::json to_json() const;
    static RunReport from_json(const nlohmann::json& j);
};

// Runs the full training loop: per epoch, iterate minibatches under the
// current freeze mask, capture the probe snapshot, advance the equilibrium
// tracker, and record metrics. The mask computed at the end of epoch e
// applies to epoch e+1; modes without freezing keep the applied mask empty
// (the tracker still runs, so velocity series stay comparable). Baseline
// mode replaces the hyper-updates with the step-decay schedule.
RunReport run_training(const TrainConfig& config);

// Writes metrics.csv (epoch,loss,train_acc,test_acc,alpha,epsilon,
// frozen_count,epoch_flops) and report.json into dir, creating it if
// needed. Both files are byte-stable for a fixed report.
void emit_metrics(const RunReport& report, const std::string& dir);

// Reads report.json back from a run directory.
RunReport load_report(const std::string& run_dir);

// Table-style summary of several runs: one row per run in input order with
// mode, headline FLOPs-saved percentage, and final test accuracy. Runs whose
// dataset or model spec differs from the first run's are annotated with a
// warning (in `text` and `warnings`), never rejected.
struct Comparison {
    std::string text;
    std::string csv;
    std::vector<std::string> warnings;
};
Comparison compare_runs(const std::vector<RunReport>& reports);

}  // namespace scotti
