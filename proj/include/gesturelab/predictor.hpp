#pragma once

#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gesturelab/model.hpp"

namespace gesturelab::predictor {

/// Fixed-capacity rolling buffer of per-frame probability vectors. On
/// overflow the oldest entry is evicted.
class PredictionQueue {
public:
    explicit PredictionQueue(std::size_t capacity);

    void push(std::vector<float> probabilities);
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    const std::deque<std::vector<float>>& entries() const { return entries_; }

private:
    std::size_t capacity_;
    std::deque<std::vector<float>> entries_;
};

/// Element-wise mean of the queue entries plus its argmax; ties break toward
/// the lowest index. Throws on an empty queue.
std::pair<std::vector<double>, int> rolling_average(const PredictionQueue& queue);

struct VideoPrediction {
    std::vector<std::string> per_frame_labels;
    std::vector<std::string> smoothed_labels;
    std::filesystem::path output_path;
};

/// Classifies every frame of `video_path`, smooths with a rolling queue of
/// `queue_capacity`, writes an annotated video at the source fps/resolution
/// to `out_path`, and optionally a per-frame CSV
/// (frame_index,per_frame_label,smoothed_label).
VideoPrediction predict_video(const model::Classifier& model, const std::filesystem::path& video_path,
                              std::size_t queue_capacity, const std::filesystem::path& out_path,
                              const std::optional<std::filesystem::path>& csv_path = std::nullopt);

}  // namespace gesturelab::predictor
