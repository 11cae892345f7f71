#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scotti/tensor.hpp"

namespace scotti {

// One split: row-major sample matrix plus integer labels.
struct Split {
    Tensor x;              // [N, features]
    std::vector<int> y;
    std::size_t size() const { return y.size(); }
};

struct Dataset {
    int features = 0;
    int classes = 0;
    Split train, val, test;
};

// Load a dataset from its config spec string:
//   "synthetic-blobs"              — Gaussian clusters, defaults {4, 64, 2000}
//   "synthetic-blobs{C, D, N}"     — C classes, D features, N samples
//   "file:PATH"                    — CSV: header "n_samples,n_features,n_classes",
//                                    then "f1,...,fD,label" per line
// The split is a deterministic seeded shuffle into 80/10/10 train/val/test.
Dataset load_dataset(const std::string& spec, std::uint64_t seed);

}  // namespace scotti
