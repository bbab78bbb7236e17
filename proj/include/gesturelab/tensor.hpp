#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gesturelab {

/// Dense float tensor, row-major. Shapes are small (max rank 4 in practice),
/// so no view machinery: every tensor owns its storage.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;

    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(element_count(shape)), 0.0f);
    }

    Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::int64_t>(data.size()) != element_count(shape))
            throw std::invalid_argument("Tensor: data size does not match shape");
    }

    static std::int64_t element_count(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    int dim(std::size_t i) const { return shape.at(i); }
    std::size_t rank() const { return shape.size(); }

    float* begin() { return data.data(); }
    float* end() { return data.data() + data.size(); }
    const float* begin() const { return data.data(); }
    const float* end() const { return data.data() + data.size(); }

    float& operator[](std::size_t i) { return data[i]; }
    float operator[](std::size_t i) const { return data[i]; }

    std::string shape_string() const {
        std::string out = "[";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) out += "x";
            out += std::to_string(shape[i]);
        }
        return out + "]";
    }
};

}  // namespace gesturelab
