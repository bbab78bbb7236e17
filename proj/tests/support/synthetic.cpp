#include "synthetic.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <opencv2/videoio.hpp>

#include "gesturelab/rng.hpp"
#include "gesturelab/tensor_archive.hpp"

namespace gesturelab::testsupport {

namespace fs = std::filesystem;

std::vector<dataset::FrameRecord> make_tiny_records(const std::vector<std::string>& class_names,
                                                    const std::vector<int>& counts) {
    if (class_names.size() != counts.size())
        throw std::invalid_argument("make_tiny_records: class/count size mismatch");
    std::vector<dataset::FrameRecord> records;
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        for (int i = 0; i < counts[c]; ++i) {
            dataset::FrameRecord record;
            record.image = cv::Mat(2, 2, CV_8UC3, cv::Scalar(int(c) * 40, 100, 150));
            record.class_name = class_names[c];
            record.source_video = class_names[c] + "_video";
            record.frame_index = i;
            records.push_back(std::move(record));
        }
    }
    return records;
}

void write_color_video(const fs::path& file, int frames, double fps, cv::Size size,
                       const std::function<cv::Scalar(int)>& color_for) {
    cv::VideoWriter writer(file.string(), cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), fps, size);
    if (!writer.isOpened()) throw std::runtime_error("cannot open test video for writing: " + file.string());
    for (int i = 0; i < frames; ++i) {
        cv::Mat frame(size, CV_8UC3, color_for(i));
        writer.write(frame);
    }
}

model::ClassifierModel make_tiny_classifier(const std::vector<std::string>& class_names, std::uint64_t seed,
                                            int input_size, int feature_dim, int hidden_units) {
    Rng rng(mix_seed(seed, 0x74696e79u /* "tiny" */));
    auto random_tensor = [&rng](std::vector<int> shape, double stddev) {
        Tensor t(std::move(shape));
        for (float& v : t.data) v = static_cast<float>(rng.normal(0.0, stddev));
        return t;
    };

    TensorArchive archive;
    archive.put_meta("num_layers", "2");
    archive.put("conv1.weight", random_tensor({8, 3, 3, 3}, std::sqrt(2.0 / 27.0)));
    archive.put("conv1.bias", Tensor({8}));
    archive.put_meta("conv1.stride", "2");
    archive.put("conv2.weight", random_tensor({16, 8, 3, 3}, std::sqrt(2.0 / 72.0)));
    archive.put("conv2.bias", Tensor({16}));
    archive.put_meta("conv2.stride", "2");
    archive.put("proj.weight", random_tensor({feature_dim, 16}, std::sqrt(2.0 / 16.0)));
    archive.put("proj.bias", Tensor({feature_dim}));

    model::FeatureExtractor backbone = model::FeatureExtractor::from_archive(archive, "tiny-test-backbone");

    model::HeadSpec head_spec;
    head_spec.hidden_units = hidden_units;
    head_spec.num_classes = static_cast<int>(class_names.size());
    model::Head head = model::Head::initialize(head_spec, feature_dim, seed);

    model::PreprocessSpec preprocess;
    preprocess.input_h = input_size;
    preprocess.input_w = input_size;
    preprocess.channel_means = {0.0f, 0.0f, 0.0f};

    return model::ClassifierModel("tiny", std::move(backbone), std::move(head), dataset::LabelCodec(class_names),
                                  preprocess);
}

ScriptedClassifier::ScriptedClassifier(std::vector<std::string> class_names, std::vector<std::vector<float>> script,
                                       int input_size)
    : codec_(std::move(class_names)), script_(std::move(script)) {
    if (script_.empty()) throw std::invalid_argument("ScriptedClassifier: empty script");
    preprocess_.input_h = input_size;
    preprocess_.input_w = input_size;
    preprocess_.channel_means = {0.0f, 0.0f, 0.0f};
}

std::vector<float> ScriptedClassifier::predict(const Tensor&) const {
    const auto& out = script_[next_ % script_.size()];
    ++next_;
    return out;
}

LatencyStub::LatencyStub(double latency_ms, double first_call_factor, int input_size)
    : codec_({"a", "b"}), latency_ms_(latency_ms), first_call_factor_(first_call_factor) {
    preprocess_.input_h = input_size;
    preprocess_.input_w = input_size;
    preprocess_.channel_means = {0.0f, 0.0f, 0.0f};
}

std::vector<float> LatencyStub::predict(const Tensor&) const {
    double wait_ms = latency_ms_;
    if (!first_call_done_) {
        wait_ms *= first_call_factor_;
        first_call_done_ = true;
    }
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double, std::milli>(wait_ms);
    while (std::chrono::steady_clock::now() < deadline) {
        // spin; sleeping would add scheduler jitter well above the tested band
    }
    return {0.5f, 0.5f};
}

}  // namespace gesturelab::testsupport
