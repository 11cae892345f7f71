#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scotti/graph.hpp"
#include "scotti/tensor.hpp"

namespace scotti {

// Builds a scalar-valued graph over the given leaf node ids.
using GraphBuilder = std::function<int(Graph&, const std::vector<int>&)>;

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t coords_checked = 0;
};

// Compares reverse-mode gradients against central differences at one point.
// For every coordinate of every leaf: |analytic − numeric| / max(1, |analytic|),
// maximised over coordinates. h must be positive.
GradCheckReport grad_check(const GraphBuilder& f, const std::vector<Tensor>& point, double h);

// Named gradient checks covering every differentiable op plus a small MLP
// composite, each at `points` random points drawn from `seed`. Returns
// (name, max rel err over all points) pairs. Used by tests and the CLI.
std::vector<std::pair<std::string, double>> gradcheck_suite(std::uint64_t seed, int points,
                                                            double h);

}  // namespace scotti
