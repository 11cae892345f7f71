#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace scotti {

// Dense row-major double tensor. Shapes are explicit; there is no
// broadcasting. `grad` is either empty or exactly data.size() long.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in);

    static Tensor zeros(std::vector<std::size_t> shape_in);
    static Tensor full(std::vector<std::size_t> shape_in, double value);

    std::size_t numel() const { return data.size(); }
    std::size_t ndim() const { return shape.size(); }
    std::size_t dim(std::size_t axis) const;

    // Reinterpret the same data with a new shape of equal element count.
    Tensor reshaped(std::vector<std::size_t> new_shape) const;

    void ensure_grad();  // allocate zero-filled grad if absent
    void zero_grad();

    bool all_finite() const;
    std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

}  // namespace scotti
