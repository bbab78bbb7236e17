#include "gesturelab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include "gesturelab/rng.hpp"

namespace gesturelab::dataset {

namespace fs = std::filesystem;

LabelCodec::LabelCodec(std::vector<std::string> class_names) : class_names_(std::move(class_names)) {
    if (class_names_.empty()) throw std::invalid_argument("LabelCodec: empty class list");
    std::set<std::string> unique(class_names_.begin(), class_names_.end());
    if (unique.size() != class_names_.size()) throw std::invalid_argument("LabelCodec: duplicate class names");
}

int LabelCodec::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < class_names_.size(); ++i)
        if (class_names_[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("unknown class name '" + name + "'");
}

std::vector<float> LabelCodec::encode(const std::string& name) const {
    std::vector<float> row(class_names_.size(), 0.0f);
    row[static_cast<std::size_t>(index_of(name))] = 1.0f;
    return row;
}

std::string LabelCodec::decode(const std::vector<float>& one_hot) const {
    if (one_hot.size() != class_names_.size())
        throw std::invalid_argument("LabelCodec::decode: vector length " + std::to_string(one_hot.size()) +
                                    " != dimension " + std::to_string(class_names_.size()));
    int hot = -1;
    for (std::size_t i = 0; i < one_hot.size(); ++i) {
        if (one_hot[i] == 1.0f) {
            if (hot >= 0) throw std::invalid_argument("LabelCodec::decode: more than one hot entry");
            hot = static_cast<int>(i);
        } else if (one_hot[i] != 0.0f) {
            throw std::invalid_argument("LabelCodec::decode: entry is neither 0 nor 1");
        }
    }
    if (hot < 0) throw std::invalid_argument("LabelCodec::decode: no hot entry");
    return class_names_[static_cast<std::size_t>(hot)];
}

void AugmentationConfig::validate() const {
    auto check_fraction = [](double v, const char* name) {
        if (v < 0.0 || v > 1.0) throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
    };
    if (rotation_degrees < 0.0 || rotation_degrees > 180.0)
        throw std::invalid_argument("rotation_degrees must be in [0, 180]");
    check_fraction(zoom_fraction, "zoom_fraction");
    check_fraction(width_shift_fraction, "width_shift_fraction");
    check_fraction(height_shift_fraction, "height_shift_fraction");
    check_fraction(shear_fraction, "shear_fraction");
}

namespace {

bool has_extension(const fs::path& p, std::initializer_list<const char*> exts) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const char* e : exts)
        if (ext == e) return true;
    return false;
}

bool is_video_file(const fs::path& p) { return has_extension(p, {".avi", ".mp4", ".mov", ".mkv", ".webm"}); }
bool is_image_file(const fs::path& p) { return has_extension(p, {".jpg", ".jpeg", ".png", ".bmp", ".ppm"}); }

void ingest_one_video(const fs::path& file, const std::string& class_name, int stride,
                      std::vector<FrameRecord>& out) {
    cv::VideoCapture capture(file.string());
    if (!capture.isOpened()) throw std::runtime_error("cannot open video '" + file.string() + "'");

    int index = 0;
    int kept = 0;
    cv::Mat frame;
    while (capture.read(frame)) {
        if (index % stride == 0) {
            FrameRecord record;
            record.image = frame.clone();
            record.class_name = class_name;
            record.source_video = file.filename().string();
            record.frame_index = index;
            out.push_back(std::move(record));
            ++kept;
        }
        ++index;
    }
    if (kept == 0) throw std::runtime_error("no decodable frames in video '" + file.string() + "'");
}

}  // namespace

std::vector<FrameRecord> ingest_videos(const fs::path& video_dir, int stride) {
    if (stride < 1) throw std::invalid_argument("ingest_videos: stride must be >= 1");
    if (!fs::is_directory(video_dir))
        throw std::runtime_error("dataset root '" + video_dir.string() + "' is not a directory");

    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(video_dir))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    if (class_dirs.empty()) throw std::runtime_error("dataset root '" + video_dir.string() + "' has no class directories");
    std::sort(class_dirs.begin(), class_dirs.end());

    std::vector<FrameRecord> records;
    for (const auto& class_dir : class_dirs) {
        const std::string class_name = class_dir.filename().string();

        std::vector<fs::path> videos, images;
        for (const auto& entry : fs::directory_iterator(class_dir)) {
            if (!entry.is_regular_file()) continue;
            if (is_video_file(entry.path())) videos.push_back(entry.path());
            else if (is_image_file(entry.path())) images.push_back(entry.path());
        }
        if (videos.empty() && images.empty())
            throw std::runtime_error("empty class '" + class_name + "': no videos or frame images in '" +
                                     class_dir.string() + "'");
        std::sort(videos.begin(), videos.end());
        std::sort(images.begin(), images.end());

        for (const auto& video : videos) ingest_one_video(video, class_name, stride, records);

        // Pre-extracted frames form one sequence ordered by filename.
        for (std::size_t i = 0; i < images.size(); ++i) {
            if (static_cast<int>(i) % stride != 0) continue;
            cv::Mat image = cv::imread(images[i].string(), cv::IMREAD_COLOR);
            if (image.empty()) throw std::runtime_error("cannot decode image '" + images[i].string() + "'");
            FrameRecord record;
            record.image = std::move(image);
            record.class_name = class_name;
            record.source_video = class_name + "/images";
            record.frame_index = static_cast<int>(i);
            records.push_back(std::move(record));
        }
    }
    return records;
}

DatasetManifest build_manifest(const std::vector<FrameRecord>& records, double balance_tolerance) {
    if (records.empty()) throw std::invalid_argument("build_manifest: no records");

    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& r : records) ++counts[r.class_name];

    DatasetManifest manifest;
    for (const auto& [name, count] : counts) manifest.classes.push_back(name);
    std::sort(manifest.classes.begin(), manifest.classes.end());
    for (const auto& name : manifest.classes) manifest.counts.push_back(counts[name]);

    manifest.total = std::accumulate(manifest.counts.begin(), manifest.counts.end(), std::int64_t{0});
    const auto [min_it, max_it] = std::minmax_element(manifest.counts.begin(), manifest.counts.end());
    manifest.balance_ratio = static_cast<double>(*max_it) / static_cast<double>(*min_it);

    if (manifest.balance_ratio > balance_tolerance) {
        std::ostringstream warn;
        warn << "class imbalance " << manifest.balance_ratio << " exceeds tolerance " << balance_tolerance;
        manifest.warning = warn.str();
    }
    return manifest;
}

void export_manifest_csv(const DatasetManifest& manifest, const fs::path& out_path) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write manifest CSV '" + out_path.string() + "'");
    out << "class,count\n";
    for (std::size_t i = 0; i < manifest.classes.size(); ++i)
        out << manifest.classes[i] << "," << manifest.counts[i] << "\n";
}

Tensor encode_labels(const std::vector<std::string>& class_names, const LabelCodec& codec) {
    const int n = static_cast<int>(class_names.size());
    const int k = codec.dimension();
    Tensor matrix({n, k});
    for (int i = 0; i < n; ++i)
        matrix.data[static_cast<std::size_t>(i) * k + codec.index_of(class_names[i])] = 1.0f;
    return matrix;
}

DataSplit stratified_split(const std::vector<FrameRecord>& records, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("stratified_split: ratio must be in (0, 1)");
    if (records.empty()) throw std::invalid_argument("stratified_split: no records");

    std::unordered_map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < records.size(); ++i) by_class[records[i].class_name].push_back(i);

    std::vector<std::string> classes;
    for (const auto& [name, idx] : by_class) classes.push_back(name);
    std::sort(classes.begin(), classes.end());

    DataSplit split;
    split.ratio = ratio;
    split.seed = seed;
    for (const auto& name : classes) {
        auto& indices = by_class[name];
        // Input order is already (class, video, frame); keep the per-class
        // block stable before drawing so the quota sees a canonical order.
        std::sort(indices.begin(), indices.end());

        // Round half away from zero.
        const auto quota =
            static_cast<std::size_t>(std::floor(ratio * static_cast<double>(indices.size()) + 0.5));

        std::vector<std::size_t> drawn = indices;
        Rng rng(mix_seed(seed, stable_hash(name)));
        rng.shuffle(drawn);

        std::vector<bool> in_test(indices.size(), false);
        std::unordered_map<std::size_t, std::size_t> position;
        for (std::size_t i = 0; i < indices.size(); ++i) position[indices[i]] = i;
        for (std::size_t i = 0; i < quota && i < drawn.size(); ++i) in_test[position[drawn[i]]] = true;

        for (std::size_t i = 0; i < indices.size(); ++i) {
            const FrameRecord& record = records[indices[i]];
            (in_test[i] ? split.test : split.train).push_back(record);
        }
    }
    return split;
}

Tensor preprocess_frame(const cv::Mat& frame, int target_h, int target_w, const std::array<float, 3>& channel_means) {
    if (frame.empty()) throw std::invalid_argument("preprocess_frame: empty frame");
    if (frame.channels() != 3)
        throw std::invalid_argument("preprocess_frame: expected 3 channels, got " + std::to_string(frame.channels()));

    cv::Mat resized;
    if (frame.rows == target_h && frame.cols == target_w)
        resized = frame;
    else
        cv::resize(frame, resized, cv::Size(target_w, target_h), 0.0, 0.0, cv::INTER_LINEAR);

    cv::Mat as_float;
    if (resized.depth() == CV_32F)
        as_float = resized;
    else
        resized.convertTo(as_float, CV_32F);

    Tensor out({target_h, target_w, 3});
    float* dst = out.data.data();
    for (int y = 0; y < target_h; ++y) {
        const auto* row = as_float.ptr<cv::Vec3f>(y);
        for (int x = 0; x < target_w; ++x) {
            // BGR -> RGB while subtracting the per-channel means.
            dst[0] = row[x][2] - channel_means[0];
            dst[1] = row[x][1] - channel_means[1];
            dst[2] = row[x][0] - channel_means[2];
            dst += 3;
        }
    }
    return out;
}

cv::Mat augment_frame(const cv::Mat& frame, const AugmentationConfig& config, std::uint64_t seed) {
    config.validate();
    if (frame.empty()) throw std::invalid_argument("augment_frame: empty frame");

    Rng rng(mix_seed(seed, 0x617567u /* "aug" */));
    const double rotation = rng.uniform(-config.rotation_degrees, config.rotation_degrees);
    const double zoom = 1.0 + rng.uniform(-config.zoom_fraction, config.zoom_fraction);
    const double shift_x = rng.uniform(-config.width_shift_fraction, config.width_shift_fraction) * frame.cols;
    const double shift_y = rng.uniform(-config.height_shift_fraction, config.height_shift_fraction) * frame.rows;
    const double shear = rng.uniform(-config.shear_fraction, config.shear_fraction);
    const bool flip = config.horizontal_flip && rng.bernoulli(0.5);

    const bool any_affine = config.rotation_degrees > 0.0 || config.zoom_fraction > 0.0 ||
                            config.width_shift_fraction > 0.0 || config.height_shift_fraction > 0.0 ||
                            config.shear_fraction > 0.0;

    if (!any_affine) {
        if (!flip) return frame.clone();
        cv::Mat flipped;
        cv::flip(frame, flipped, 1);  // exact column reversal, an involution
        return flipped;
    }

    const double cx = (frame.cols - 1) * 0.5;
    const double cy = (frame.rows - 1) * 0.5;
    const double theta = rotation * CV_PI / 180.0;
    const double flip_sign = flip ? -1.0 : 1.0;

    // Rotation * shear * zoom about the image center, then translation.
    const double a = zoom * std::cos(theta);
    const double b = zoom * std::sin(theta);
    double m00 = a, m01 = a * shear - b, m10 = b, m11 = b * shear + a;
    m00 *= flip_sign;
    m10 *= flip_sign;

    cv::Mat affine(2, 3, CV_64F);
    affine.at<double>(0, 0) = m00;
    affine.at<double>(0, 1) = m01;
    affine.at<double>(0, 2) = cx - m00 * cx - m01 * cy + shift_x;
    affine.at<double>(1, 0) = m10;
    affine.at<double>(1, 1) = m11;
    affine.at<double>(1, 2) = cy - m10 * cx - m11 * cy + shift_y;

    cv::Mat out;
    cv::warpAffine(frame, out, affine, frame.size(), cv::INTER_LINEAR, cv::BORDER_REPLICATE);
    return out;
}

}  // namespace gesturelab::dataset
