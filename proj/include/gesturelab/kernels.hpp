#pragma once

#include <vector>

#include "gesturelab/tensor.hpp"

namespace gesturelab::kernels {

/// Execution mode for the hot loops. `parallel` uses OpenMP over independent
/// output elements; `serial` is the reference implementation. Both variants
/// use the same per-element summation order, so outputs are bitwise equal.
enum class Mode { serial, parallel };

Mode mode();
void set_mode(Mode m);

/// Scoped override, used by the benchmark harness to pin serial execution.
class ModeGuard {
public:
    explicit ModeGuard(Mode m) : saved_(mode()) { set_mode(m); }
    ~ModeGuard() { set_mode(saved_); }
    ModeGuard(const ModeGuard&) = delete;
    ModeGuard& operator=(const ModeGuard&) = delete;

private:
    Mode saved_;
};

// All image tensors below are channel-planar: shape {C, H, W}.
// Conv weights are {out_c, in_c, kh, kw}; zero padding of kh/2, kw/2.

Tensor conv2d_serial(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride);
Tensor conv2d_parallel(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride);
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride);

/// y = W x + b with W shaped {out, in}.
void dense_serial(const Tensor& weight, const Tensor& bias, const float* x, float* y);
void dense_parallel(const Tensor& weight, const Tensor& bias, const float* x, float* y);
void dense(const Tensor& weight, const Tensor& bias, const float* x, float* y);

/// Per-channel spatial mean of a {C, H, W} tensor.
std::vector<float> global_avg_pool_serial(const Tensor& input);
std::vector<float> global_avg_pool_parallel(const Tensor& input);
std::vector<float> global_avg_pool(const Tensor& input);

void relu_inplace(Tensor& t);
void relu_inplace(std::vector<float>& v);

/// Numerically stable softmax.
std::vector<float> softmax(const std::vector<float>& logits);

int conv_output_extent(int in, int kernel, int stride);

}  // namespace gesturelab::kernels
