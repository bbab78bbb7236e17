#include "gesturelab/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "gesturelab/kernels.hpp"
#include "gesturelab/rng.hpp"

namespace gesturelab::bench {

namespace {
using Clock = std::chrono::steady_clock;

void check_protocol(const TimingProtocol& protocol) {
    if (protocol.batch_size < 1) throw std::invalid_argument("timing protocol: batch_size must be >= 1");
    if (protocol.batches < 1) throw std::invalid_argument("timing protocol: batches must be >= 1");
    if (protocol.repetitions < 1) throw std::invalid_argument("timing protocol: repetitions must be >= 1");
}
}  // namespace

BenchmarkResult time_callable(const std::function<void()>& inference, const TimingProtocol& protocol,
                              const std::string& name) {
    check_protocol(protocol);

    // Timing runs on the serial reference kernels so results do not depend on
    // the thread configuration; the mode is recorded in the result.
    kernels::ModeGuard guard(kernels::Mode::serial);

    // One untimed warm-up batch absorbs cold-start effects (page faults,
    // lazy allocations) that would otherwise skew the first repetition.
    for (int i = 0; i < protocol.batch_size; ++i) inference();

    const int per_rep = protocol.batches * protocol.batch_size;
    std::vector<double> per_inference_ms(static_cast<std::size_t>(protocol.repetitions));
    for (int rep = 0; rep < protocol.repetitions; ++rep) {
        const auto start = Clock::now();
        for (int i = 0; i < per_rep; ++i) inference();
        const auto stop = Clock::now();
        const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
        per_inference_ms[static_cast<std::size_t>(rep)] = ms / static_cast<double>(per_rep);
    }

    double mean = 0.0;
    for (double v : per_inference_ms) mean += v;
    mean /= static_cast<double>(protocol.repetitions);

    double variance = 0.0;
    if (protocol.repetitions > 1) {
        for (double v : per_inference_ms) variance += (v - mean) * (v - mean);
        variance /= static_cast<double>(protocol.repetitions - 1);
    }

    BenchmarkResult result;
    result.model_name = name;
    result.mean_ms_per_inference = mean;
    result.std_ms = std::sqrt(variance);
    result.batches = protocol.batches;
    result.repetitions = protocol.repetitions;
    result.batch_size = protocol.batch_size;
    result.execution_mode = "serial";
    return result;
}

BenchmarkResult time_inference(const model::Classifier& model, const TimingProtocol& protocol) {
    check_protocol(protocol);
    const model::PreprocessSpec& pre = model.preprocess();

    Tensor input({pre.input_h, pre.input_w, 3});
    Rng rng(0x62656e63 /* "benc" */);
    for (float& v : input.data) v = static_cast<float>(rng.normal(0.0, 64.0));

    return time_callable([&]() { volatile float sink = model.predict(input)[0]; (void)sink; }, protocol,
                         "classifier");
}

std::vector<BenchmarkResult> compare_models(const std::vector<std::string>& names, const TimingProtocol& protocol,
                                            const std::filesystem::path& weights_dir) {
    check_protocol(protocol);

    std::vector<BenchmarkResult> rows;
    for (const auto& name : names) {
        const model::BackboneSpec& spec = model::lookup_backbone(name);

        dataset::LabelCodec codec({"class_a", "class_b", "class_c"});
        model::HeadSpec head;
        head.num_classes = codec.dimension();
        const model::ClassifierModel classifier =
            model::assemble_classifier(spec, head, std::move(codec), weights_dir);

        BenchmarkResult row = time_inference(classifier, protocol);
        row.model_name = spec.name;
        row.size_mb = static_cast<double>(classifier.weights_byte_size()) / (1024.0 * 1024.0);
        row.depth = spec.depth;
        row.reference_cpu_ms = spec.reference_cpu_ms;
        row.reference_size_mb = spec.size_mb;
        rows.push_back(row);
    }
    return rows;
}

std::string render_comparison_text(const std::vector<BenchmarkResult>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "model" << std::right << std::setw(12) << "size_mb" << std::setw(8)
        << "depth" << std::setw(12) << "mean_ms" << std::setw(10) << "std_ms" << std::setw(10) << "batches"
        << std::setw(6) << "reps" << std::setw(12) << "ref_ms" << std::setw(12) << "ref_size" << "\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(14) << r.model_name << std::right << std::fixed << std::setprecision(2)
            << std::setw(12) << r.size_mb << std::setw(8) << (r.depth ? std::to_string(*r.depth) : "-")
            << std::setw(12) << r.mean_ms_per_inference << std::setw(10) << r.std_ms << std::setw(10) << r.batches
            << std::setw(6) << r.repetitions << std::setw(12) << r.reference_cpu_ms << std::setw(12)
            << r.reference_size_mb << "\n";
        out.unsetf(std::ios::fixed);
    }
    return out.str();
}

void export_comparison_csv(const std::vector<BenchmarkResult>& rows, const std::filesystem::path& out_path) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write benchmark CSV '" + out_path.string() + "'");
    out << "model,size_mb,depth,mean_ms,std_ms,batches,repetitions\n";
    for (const auto& r : rows) {
        out << r.model_name << "," << r.size_mb << "," << (r.depth ? std::to_string(*r.depth) : "-") << ","
            << r.mean_ms_per_inference << "," << r.std_ms << "," << r.batches << "," << r.repetitions << "\n";
    }
}

}  // namespace gesturelab::bench
