#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scotti/optimizer.hpp"

namespace scotti {

// Training regimes. baseline: plain SGD recipe with the step-decay schedule,
// no freezing, no hyper-updates. fixed_eps: freezing at a constant threshold
// (ε hyper-update off). ultimate: learned α only, freezing off. scotti:
// everything on.
enum class Mode { baseline, fixed_eps, ultimate, scotti };

std::string mode_name(Mode m);

struct TrainConfig {
    std::uint64_t seed = 1;
    std::string model = "mlp:64,32,16,4";
    std::string dataset = "synthetic-blobs{4,64,2000}";
    int epochs = 60;
    int batch_size = 32;
    double alpha0 = 0.1;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    Mode mode = Mode::scotti;
    double epsilon0 = 0.0;
    double eta_alpha = 1e-4;
    double eta_epsilon = 5e-5;  // η_α/2 unless set explicitly
    double mu_eq = 0.5;
    int probe_size = 50;
    EpsilonSign epsilon_update_sign = EpsilonSign::paper;
    bool count_probe_overhead = false;
    std::vector<double> lr_milestones = {0.4, 0.6};  // fractions of the run; baseline only
    std::string output_dir = "scotti_run";

    bool freezing_enabled() const { return mode == Mode::fixed_eps || mode == Mode::scotti; }
};

// Parse the flat `key = value` text (# starts a comment). Unknown keys,
// duplicate keys, malformed values, and mode-invariant violations all throw
// config_error naming the key and line.
TrainConfig parse_config_text(const std::string& text);

// parse_config_text over a file, then apply the SCOTTI_OUTPUT_DIR
// environment override if set.
TrainConfig load_config(const std::string& path);

}  // namespace scotti
