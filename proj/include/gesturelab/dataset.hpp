#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "gesturelab/tensor.hpp"

namespace gesturelab::dataset {

/// One labeled frame. `image` is an 8-bit or float 3-channel Mat in OpenCV's
/// native BGR channel order.
struct FrameRecord {
    cv::Mat image;
    std::string class_name;
    std::string source_video;
    int frame_index = 0;
};

struct DatasetManifest {
    std::vector<std::string> classes;       // lexicographic
    std::vector<std::int64_t> counts;       // aligned with classes
    std::int64_t total = 0;
    double balance_ratio = 1.0;             // max count / min count
    std::optional<std::string> warning;     // set when balance exceeds tolerance
};

/// Bidirectional mapping between class names and one-hot rows. Class order is
/// fixed at construction (callers pass lexicographically sorted names).
class LabelCodec {
public:
    LabelCodec() = default;
    explicit LabelCodec(std::vector<std::string> class_names);

    int dimension() const { return static_cast<int>(class_names_.size()); }
    const std::vector<std::string>& class_names() const { return class_names_; }

    int index_of(const std::string& name) const;         // throws on unknown name
    std::vector<float> encode(const std::string& name) const;
    std::string decode(const std::vector<float>& one_hot) const;

private:
    std::vector<std::string> class_names_;
};

struct DataSplit {
    std::vector<FrameRecord> train;
    std::vector<FrameRecord> test;
    double ratio = 0.25;
    std::uint64_t seed = 0;
};

struct AugmentationConfig {
    double rotation_degrees = 30.0;
    double zoom_fraction = 0.15;
    double width_shift_fraction = 0.20;
    double height_shift_fraction = 0.20;
    double shear_fraction = 0.15;
    bool horizontal_flip = true;

    static AugmentationConfig none() { return {0.0, 0.0, 0.0, 0.0, 0.0, false}; }
    void validate() const;  // throws on out-of-range fields
};

/// Walks `<video_dir>/<class>/`, decoding every stride-th frame of each video
/// file. Image files (pre-extracted frames) in a class directory are treated
/// as one frame sequence ordered by filename.
std::vector<FrameRecord> ingest_videos(const std::filesystem::path& video_dir, int stride = 1);

DatasetManifest build_manifest(const std::vector<FrameRecord>& records, double balance_tolerance = 1.05);

void export_manifest_csv(const DatasetManifest& manifest, const std::filesystem::path& out_path);

/// N x K one-hot matrix; row i encodes class_names[i].
Tensor encode_labels(const std::vector<std::string>& class_names, const LabelCodec& codec);

/// Per-class test quota is round-half-away-from-zero(ratio * class count);
/// membership is drawn with a seeded shuffle, so fixed seeds reproduce splits.
DataSplit stratified_split(const std::vector<FrameRecord>& records, double ratio, std::uint64_t seed);

/// Bilinear resize to (target_h, target_w), BGR -> RGB, then per-channel mean
/// subtraction. Output is a {H, W, 3} float tensor in RGB order.
Tensor preprocess_frame(const cv::Mat& frame, int target_h, int target_w, const std::array<float, 3>& channel_means);

/// Random affine jitter within the config bounds; deterministic per seed.
/// Output shape and type equal the input's.
cv::Mat augment_frame(const cv::Mat& frame, const AugmentationConfig& config, std::uint64_t seed);

/// ImageNet channel means, RGB order.
inline constexpr std::array<float, 3> kDefaultChannelMeans{123.68f, 116.779f, 103.939f};

}  // namespace gesturelab::dataset
