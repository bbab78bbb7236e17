#include "gesturelab/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace gesturelab::kernels {

namespace {
std::atomic<Mode> g_mode{Mode::parallel};

void check_conv_args(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride) {
    if (input.rank() != 3) throw std::invalid_argument("conv2d: input must be {C,H,W}, got " + input.shape_string());
    if (weight.rank() != 4) throw std::invalid_argument("conv2d: weight must be {O,I,Kh,Kw}, got " + weight.shape_string());
    if (bias.rank() != 1 || bias.dim(0) != weight.dim(0))
        throw std::invalid_argument("conv2d: bias shape does not match out channels");
    if (weight.dim(1) != input.dim(0))
        throw std::invalid_argument("conv2d: weight in-channels " + std::to_string(weight.dim(1)) +
                                    " != input channels " + std::to_string(input.dim(0)));
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
}

// One output element. Summation order (ic, ky, kx) is fixed so the serial and
// OpenMP variants produce bitwise-identical results.
inline float conv_point(const Tensor& input, const Tensor& weight, int oc, int oy, int ox, int stride,
                        int pad_h, int pad_w) {
    const int in_c = input.dim(0);
    const int in_h = input.dim(1);
    const int in_w = input.dim(2);
    const int kh = weight.dim(2);
    const int kw = weight.dim(3);

    const float* wbase = weight.data.data() + static_cast<std::size_t>(oc) * in_c * kh * kw;
    float acc = 0.0f;
    for (int ic = 0; ic < in_c; ++ic) {
        const float* in_plane = input.data.data() + static_cast<std::size_t>(ic) * in_h * in_w;
        const float* w_plane = wbase + static_cast<std::size_t>(ic) * kh * kw;
        for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride + ky - pad_h;
            if (iy < 0 || iy >= in_h) continue;
            const float* in_row = in_plane + static_cast<std::size_t>(iy) * in_w;
            const float* w_row = w_plane + static_cast<std::size_t>(ky) * kw;
            for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride + kx - pad_w;
                if (ix < 0 || ix >= in_w) continue;
                acc += w_row[kx] * in_row[ix];
            }
        }
    }
    return acc;
}

template <bool UseOmp>
Tensor conv2d_impl(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride) {
    check_conv_args(input, weight, bias, stride);
    const int out_c = weight.dim(0);
    const int kh = weight.dim(2);
    const int kw = weight.dim(3);
    const int pad_h = kh / 2;
    const int pad_w = kw / 2;
    const int out_h = conv_output_extent(input.dim(1), kh, stride);
    const int out_w = conv_output_extent(input.dim(2), kw, stride);

    Tensor out({out_c, out_h, out_w});
    const std::int64_t plane = static_cast<std::int64_t>(out_h) * out_w;
    const std::int64_t n = static_cast<std::int64_t>(out_c) * plane;

#pragma omp parallel for schedule(static) if (UseOmp)
    for (std::int64_t idx = 0; idx < n; ++idx) {
        const int oc = static_cast<int>(idx / plane);
        const int rem = static_cast<int>(idx % plane);
        const int oy = rem / out_w;
        const int ox = rem % out_w;
        out.data[static_cast<std::size_t>(idx)] =
            bias[static_cast<std::size_t>(oc)] + conv_point(input, weight, oc, oy, ox, stride, pad_h, pad_w);
    }
    return out;
}

template <bool UseOmp>
void dense_impl(const Tensor& weight, const Tensor& bias, const float* x, float* y) {
    if (weight.rank() != 2) throw std::invalid_argument("dense: weight must be {out,in}");
    const int rows = weight.dim(0);
    const int cols = weight.dim(1);

#pragma omp parallel for schedule(static) if (UseOmp)
    for (int r = 0; r < rows; ++r) {
        const float* wrow = weight.data.data() + static_cast<std::size_t>(r) * cols;
        float acc = bias[static_cast<std::size_t>(r)];
        for (int c = 0; c < cols; ++c) acc += wrow[c] * x[c];
        y[r] = acc;
    }
}

template <bool UseOmp>
std::vector<float> gap_impl(const Tensor& input) {
    if (input.rank() != 3) throw std::invalid_argument("global_avg_pool: input must be {C,H,W}");
    const int c = input.dim(0);
    const std::int64_t plane = static_cast<std::int64_t>(input.dim(1)) * input.dim(2);
    std::vector<float> out(static_cast<std::size_t>(c), 0.0f);

#pragma omp parallel for schedule(static) if (UseOmp)
    for (int ch = 0; ch < c; ++ch) {
        const float* p = input.data.data() + static_cast<std::size_t>(ch) * plane;
        float acc = 0.0f;
        for (std::int64_t i = 0; i < plane; ++i) acc += p[i];
        out[static_cast<std::size_t>(ch)] = acc / static_cast<float>(plane);
    }
    return out;
}

}  // namespace

Mode mode() { return g_mode.load(std::memory_order_relaxed); }
void set_mode(Mode m) { g_mode.store(m, std::memory_order_relaxed); }

int conv_output_extent(int in, int kernel, int stride) {
    const int pad = kernel / 2;
    return (in + 2 * pad - kernel) / stride + 1;
}

Tensor conv2d_serial(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride) {
    return conv2d_impl<false>(input, weight, bias, stride);
}

Tensor conv2d_parallel(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride) {
    return conv2d_impl<true>(input, weight, bias, stride);
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride) {
    return mode() == Mode::parallel ? conv2d_parallel(input, weight, bias, stride)
                                    : conv2d_serial(input, weight, bias, stride);
}

void dense_serial(const Tensor& weight, const Tensor& bias, const float* x, float* y) {
    dense_impl<false>(weight, bias, x, y);
}

void dense_parallel(const Tensor& weight, const Tensor& bias, const float* x, float* y) {
    dense_impl<true>(weight, bias, x, y);
}

void dense(const Tensor& weight, const Tensor& bias, const float* x, float* y) {
    if (mode() == Mode::parallel)
        dense_parallel(weight, bias, x, y);
    else
        dense_serial(weight, bias, x, y);
}

std::vector<float> global_avg_pool_serial(const Tensor& input) { return gap_impl<false>(input); }
std::vector<float> global_avg_pool_parallel(const Tensor& input) { return gap_impl<true>(input); }

std::vector<float> global_avg_pool(const Tensor& input) {
    return mode() == Mode::parallel ? gap_impl<true>(input) : gap_impl<false>(input);
}

void relu_inplace(Tensor& t) {
    for (float& v : t.data) v = std::max(v, 0.0f);
}

void relu_inplace(std::vector<float>& v) {
    for (float& x : v) x = std::max(x, 0.0f);
}

std::vector<float> softmax(const std::vector<float>& logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    const float m = *std::max_element(logits.begin(), logits.end());
    std::vector<float> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (float& v : out) v = static_cast<float>(v / sum);
    return out;
}

}  // namespace gesturelab::kernels
