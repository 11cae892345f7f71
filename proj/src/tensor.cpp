#include "scotti/tensor.hpp"

#include <cmath>
#include <sstream>

#include "scotti/error.hpp"

namespace scotti {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
    if (shape_numel(shape) != data.size())
        throw dim_error("tensor data has " + std::to_string(data.size()) +
                        " elements but shape " + shape_to_string(shape) + " wants " +
                        std::to_string(shape_numel(shape)));
}

Tensor Tensor::zeros(std::vector<std::size_t> shape_in) {
    const std::size_t n = shape_numel(shape_in);
    return Tensor(std::move(shape_in), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape_in, double value) {
    const std::size_t n = shape_numel(shape_in);
    return Tensor(std::move(shape_in), std::vector<double>(n, value));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape.size())
        throw index_error("axis " + std::to_string(axis) + " out of range for shape " + shape_str());
    return shape[axis];
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
    if (shape_numel(new_shape) != numel())
        throw dim_error("cannot reshape " + shape_str() + " to " + shape_to_string(new_shape));
    Tensor t(std::move(new_shape), data);
    return t;
}

void Tensor::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(data.size(), 0.0); }

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const { return shape_to_string(shape); }

}  // namespace scotti
