#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gesturelab/model.hpp"

namespace gesturelab::bench {

struct TimingProtocol {
    int batch_size = 1;
    int batches = 30;
    int repetitions = 10;
};

struct BenchmarkResult {
    std::string model_name;
    double size_mb = 0.0;              // measured artifact size
    std::optional<int> depth;          // registry metadata
    double mean_ms_per_inference = 0.0;
    double std_ms = 0.0;
    int batches = 0;
    int repetitions = 0;
    int batch_size = 0;
    std::string execution_mode;        // timing runs pin the serial kernels

    // Registry reference values printed alongside measurements.
    double reference_cpu_ms = 0.0;
    double reference_size_mb = 0.0;
};

/// Times a single-inference callable under the protocol: one untimed warm-up
/// batch, then `repetitions` timed passes of `batches` x `batch_size` calls.
/// Mean/std are per-inference milliseconds over the repetition means.
BenchmarkResult time_callable(const std::function<void()>& inference, const TimingProtocol& protocol,
                              const std::string& name);

/// Same protocol applied to a classifier on fixed random input at its native
/// input size.
BenchmarkResult time_inference(const model::Classifier& model, const TimingProtocol& protocol = {});

/// Assembles each named backbone (fresh default head) and times it; rows keep
/// the requested order and carry registry metadata for context.
std::vector<BenchmarkResult> compare_models(const std::vector<std::string>& names, const TimingProtocol& protocol,
                                            const std::filesystem::path& weights_dir);

std::string render_comparison_text(const std::vector<BenchmarkResult>& rows);
void export_comparison_csv(const std::vector<BenchmarkResult>& rows, const std::filesystem::path& out_path);

}  // namespace gesturelab::bench
