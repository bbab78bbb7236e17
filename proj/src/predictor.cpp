#include "gesturelab/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include "gesturelab/dataset.hpp"

namespace gesturelab::predictor {

namespace fs = std::filesystem;

PredictionQueue::PredictionQueue(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw std::invalid_argument("PredictionQueue: capacity must be >= 1");
}

void PredictionQueue::push(std::vector<float> probabilities) {
    if (!entries_.empty() && probabilities.size() != entries_.front().size())
        throw std::invalid_argument("PredictionQueue: inconsistent probability vector length");
    double sum = 0.0;
    for (float v : probabilities) sum += v;
    if (std::abs(sum - 1.0) > 1e-4)
        throw std::invalid_argument("PredictionQueue: entry sums to " + std::to_string(sum) +
                                    ", expected a probability vector");
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(std::move(probabilities));
}

std::pair<std::vector<double>, int> rolling_average(const PredictionQueue& queue) {
    if (queue.empty()) throw std::invalid_argument("rolling_average: empty queue");

    const std::size_t k = queue.entries().front().size();
    std::vector<double> mean(k, 0.0);
    for (const auto& entry : queue.entries())
        for (std::size_t i = 0; i < k; ++i) mean[i] += entry[i];
    for (double& v : mean) v /= static_cast<double>(queue.size());

    int argmax = 0;
    for (std::size_t i = 1; i < k; ++i)
        if (mean[i] > mean[static_cast<std::size_t>(argmax)]) argmax = static_cast<int>(i);
    return {std::move(mean), argmax};
}

namespace {

int fourcc_for(const fs::path& out_path) {
    std::string ext = out_path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".mp4" || ext == ".m4v") return cv::VideoWriter::fourcc('m', 'p', '4', 'v');
    return cv::VideoWriter::fourcc('M', 'J', 'P', 'G');
}

void annotate(cv::Mat& frame, const std::string& label) {
    const double scale = std::max(0.5, frame.cols / 640.0);
    const int thickness = std::max(1, static_cast<int>(scale * 2));
    const cv::Point origin(10, 24 + static_cast<int>(10 * scale));
    cv::putText(frame, label, origin, cv::FONT_HERSHEY_SIMPLEX, scale, cv::Scalar(0, 0, 0), thickness + 2,
                cv::LINE_AA);
    cv::putText(frame, label, origin, cv::FONT_HERSHEY_SIMPLEX, scale, cv::Scalar(80, 255, 80), thickness,
                cv::LINE_AA);
}

}  // namespace

VideoPrediction predict_video(const model::Classifier& model, const fs::path& video_path, std::size_t queue_capacity,
                              const fs::path& out_path, const std::optional<fs::path>& csv_path) {
    cv::VideoCapture capture(video_path.string());
    if (!capture.isOpened()) throw std::runtime_error("cannot open video '" + video_path.string() + "'");

    double fps = capture.get(cv::CAP_PROP_FPS);
    if (!(fps > 0.0)) fps = 30.0;

    const model::PreprocessSpec& pre = model.preprocess();
    const auto& class_names = model.codec().class_names();

    PredictionQueue queue(queue_capacity);
    VideoPrediction result;
    result.output_path = out_path;

    cv::VideoWriter writer;
    std::ofstream csv;
    if (csv_path) {
        csv.open(*csv_path);
        if (!csv) throw std::runtime_error("cannot write per-frame CSV '" + csv_path->string() + "'");
        csv << "frame_index,per_frame_label,smoothed_label\n";
    }

    cv::Mat frame;
    int frame_index = 0;
    while (capture.read(frame)) {
        const Tensor x = dataset::preprocess_frame(frame, pre.input_h, pre.input_w, pre.channel_means);
        const std::vector<float> probs = model.predict(x);

        const int frame_arg =
            static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
        queue.push(probs);
        const auto [mean, smoothed_arg] = rolling_average(queue);

        const std::string& frame_label = class_names[static_cast<std::size_t>(frame_arg)];
        const std::string& smoothed_label = class_names[static_cast<std::size_t>(smoothed_arg)];
        result.per_frame_labels.push_back(frame_label);
        result.smoothed_labels.push_back(smoothed_label);

        annotate(frame, smoothed_label);

        if (!writer.isOpened()) {
            writer.open(out_path.string(), fourcc_for(out_path), fps, frame.size());
            if (!writer.isOpened())
                throw std::runtime_error("cannot open output video '" + out_path.string() + "' for writing");
        }
        writer.write(frame);

        if (csv) csv << frame_index << "," << frame_label << "," << smoothed_label << "\n";
        ++frame_index;
    }

    if (frame_index == 0) throw std::runtime_error("no decodable frames in video '" + video_path.string() + "'");
    return result;
}

}  // namespace gesturelab::predictor
