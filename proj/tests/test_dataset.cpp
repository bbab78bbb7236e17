#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "gesturelab/dataset.hpp"
#include "gesturelab/rng.hpp"
#include "synthetic.hpp"

using namespace gesturelab;
namespace ds = gesturelab::dataset;
namespace ts = gesturelab::testsupport;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("gesturelab_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

bool mats_equal(const cv::Mat& a, const cv::Mat& b) {
    if (a.size() != b.size() || a.type() != b.type()) return false;
    cv::Mat diff;
    cv::absdiff(a, b, diff);
    return cv::countNonZero(diff.reshape(1)) == 0;
}

}  // namespace

TEST_CASE("ingest keeps every frame of a 25 s video at stride 1") {
    TempDir tmp("ingest750");
    fs::create_directories(tmp.path / "wave");
    // 25 s at 30 fps
    ts::write_color_video(tmp.path / "wave" / "clip.avi", 750, 30.0, {64, 48},
                          [](int) { return cv::Scalar(10, 20, 30); });

    const auto records = ds::ingest_videos(tmp.path, 1);
    CHECK(records.size() == 750);
    CHECK(records.front().class_name == "wave");
    CHECK(records.front().source_video == "clip.avi");
    CHECK(records.front().frame_index == 0);
    CHECK(records.back().frame_index == 749);
}

TEST_CASE("ingest stride 5 keeps indices 0,5,10,...") {
    TempDir tmp("ingest_stride");
    fs::create_directories(tmp.path / "wave");
    ts::write_color_video(tmp.path / "wave" / "clip.avi", 750, 30.0, {64, 48},
                          [](int) { return cv::Scalar(40, 40, 40); });

    const auto records = ds::ingest_videos(tmp.path, 5);
    REQUIRE(records.size() == 150);
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].frame_index == static_cast<int>(i) * 5);
}

TEST_CASE("ingest orders classes lexicographically and reads image sequences") {
    TempDir tmp("ingest_images");
    for (const char* cls : {"beta", "alpha"}) {
        fs::create_directories(tmp.path / cls);
        for (int i = 0; i < 4; ++i) {
            cv::Mat img(8, 8, CV_8UC3, cv::Scalar(i * 10, 0, 0));
            cv::imwrite((tmp.path / cls / ("f" + std::to_string(i) + ".png")).string(), img);
        }
    }

    const auto records = ds::ingest_videos(tmp.path, 1);
    REQUIRE(records.size() == 8);
    CHECK(records[0].class_name == "alpha");
    CHECK(records[4].class_name == "beta");
    CHECK(records[0].frame_index == 0);
    CHECK(records[3].frame_index == 3);

    const auto strided = ds::ingest_videos(tmp.path, 2);
    CHECK(strided.size() == 4);  // indices 0 and 2 per class
}

TEST_CASE("ingest errors name the offending class or file") {
    TempDir tmp("ingest_errors");
    fs::create_directories(tmp.path / "empty_one");
    CHECK_THROWS_WITH_AS(ds::ingest_videos(tmp.path, 1), doctest::Contains("empty class 'empty_one'"),
                         std::runtime_error);

    std::ofstream bad(tmp.path / "empty_one" / "broken.avi");
    bad << "this is not a video";
    bad.close();
    CHECK_THROWS_WITH_AS(ds::ingest_videos(tmp.path, 1), doctest::Contains("broken.avi"), std::runtime_error);
}

TEST_CASE("manifest reproduces the published class counts") {
    const auto records = ts::make_tiny_records({"FingersInterlaced", "FingersInterlocked", "Palm2Palm"},
                                               {1346, 1349, 1329});
    const auto manifest = ds::build_manifest(records);
    CHECK(manifest.classes ==
          std::vector<std::string>({"FingersInterlaced", "FingersInterlocked", "Palm2Palm"}));
    CHECK(manifest.counts == std::vector<std::int64_t>({1346, 1349, 1329}));
    CHECK(manifest.total == 4024);
    CHECK(manifest.balance_ratio == doctest::Approx(1349.0 / 1329.0));
    CHECK_FALSE(manifest.warning.has_value());  // 1.015 within the 1.05 default
}

TEST_CASE("manifest balance edge cases") {
    const auto single = ds::build_manifest(ts::make_tiny_records({"only"}, {17}));
    CHECK(single.balance_ratio == doctest::Approx(1.0));
    CHECK_FALSE(single.warning.has_value());

    const auto skewed = ds::build_manifest(ts::make_tiny_records({"A", "B"}, {200, 100}), 1.05);
    CHECK(skewed.balance_ratio == doctest::Approx(2.0));
    REQUIRE(skewed.warning.has_value());
    CHECK(skewed.warning->find("imbalance") != std::string::npos);

    CHECK_THROWS_AS(ds::build_manifest({}), std::invalid_argument);
}

TEST_CASE("manifest total equals record count for random inputs") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::string> names;
        std::vector<int> counts;
        const int k = 1 + static_cast<int>(rng.uniform_index(5));
        std::int64_t total = 0;
        for (int c = 0; c < k; ++c) {
            names.push_back("cls" + std::to_string(c));
            counts.push_back(1 + static_cast<int>(rng.uniform_index(40)));
            total += counts.back();
        }
        CHECK(ds::build_manifest(ts::make_tiny_records(names, counts)).total == total);
    }
}

TEST_CASE("manifest CSV export") {
    TempDir tmp("manifest_csv");
    const auto manifest = ds::build_manifest(ts::make_tiny_records({"a", "b"}, {3, 4}));
    ds::export_manifest_csv(manifest, tmp.path / "manifest.csv");

    std::ifstream in(tmp.path / "manifest.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "class,count");
    std::getline(in, line);
    CHECK(line == "a,3");
    std::getline(in, line);
    CHECK(line == "b,4");
}

TEST_CASE("one-hot encoding over the published classes") {
    const ds::LabelCodec codec({"FingersInterlaced", "FingersInterlocked", "Palm2Palm"});
    CHECK(codec.encode("FingersInterlocked") == std::vector<float>({0, 1, 0}));

    const Tensor matrix = ds::encode_labels({"Palm2Palm", "FingersInterlaced"}, codec);
    REQUIRE(matrix.shape == std::vector<int>({2, 3}));
    CHECK(matrix.data == std::vector<float>({0, 0, 1, 1, 0, 0}));

    for (const auto& name : codec.class_names()) {
        CHECK(codec.decode(codec.encode(name)) == name);
        float sum = 0;
        int nonzero = 0;
        for (float v : codec.encode(name)) {
            sum += v;
            nonzero += v != 0.0f;
        }
        CHECK(sum == 1.0f);
        CHECK(nonzero == 1);
    }

    CHECK_THROWS_WITH_AS(ds::encode_labels({"Elbow2Elbow"}, codec), doctest::Contains("Elbow2Elbow"),
                         std::invalid_argument);
}

TEST_CASE("one-hot encoding with a single class") {
    const ds::LabelCodec codec({"only"});
    CHECK(codec.encode("only") == std::vector<float>({1}));
    CHECK(codec.decode({1}) == "only");
}

TEST_CASE("stratified split reproduces the published supports for any seed") {
    const auto records = ts::make_tiny_records({"FingersInterlaced", "FingersInterlocked", "Palm2Palm"},
                                               {1346, 1349, 1329});
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 1234567ULL, 0xdeadbeefULL}) {
        const auto split = ds::stratified_split(records, 0.25, seed);
        std::map<std::string, int> support;
        for (const auto& r : split.test) ++support[r.class_name];
        CHECK(support["FingersInterlaced"] == 337);
        CHECK(support["FingersInterlocked"] == 337);
        CHECK(support["Palm2Palm"] == 332);
        CHECK(split.test.size() == 1006);
        CHECK(split.train.size() == 4024 - 1006);
    }
}

TEST_CASE("split is deterministic for a fixed seed") {
    const auto records = ts::make_tiny_records({"a", "b"}, {40, 60});
    const auto s1 = ds::stratified_split(records, 0.25, 7);
    const auto s2 = ds::stratified_split(records, 0.25, 7);
    REQUIRE(s1.test.size() == s2.test.size());
    for (std::size_t i = 0; i < s1.test.size(); ++i) {
        CHECK(s1.test[i].class_name == s2.test[i].class_name);
        CHECK(s1.test[i].frame_index == s2.test[i].frame_index);
    }

    const auto s3 = ds::stratified_split(records, 0.25, 8);
    bool any_difference = s3.test.size() != s1.test.size();
    for (std::size_t i = 0; !any_difference && i < s1.test.size(); ++i)
        any_difference = s1.test[i].frame_index != s3.test[i].frame_index ||
                         s1.test[i].class_name != s3.test[i].class_name;
    CHECK(any_difference);  // different seed should draw a different subset
}

TEST_CASE("split rounding: 4 records at ratio 0.25 put exactly 1 in test") {
    const auto records = ts::make_tiny_records({"solo"}, {4});
    const auto split = ds::stratified_split(records, 0.25, 3);
    CHECK(split.test.size() == 1);
    CHECK(split.train.size() == 3);
}

TEST_CASE("split partition is disjoint and exhaustive as a multiset") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::string> names;
        std::vector<int> counts;
        const int k = 1 + static_cast<int>(rng.uniform_index(4));
        for (int c = 0; c < k; ++c) {
            names.push_back("c" + std::to_string(c));
            counts.push_back(1 + static_cast<int>(rng.uniform_index(50)));
        }
        const auto records = ts::make_tiny_records(names, counts);
        const auto split = ds::stratified_split(records, 0.3, rng.next_u64());

        using Key = std::tuple<std::string, std::string, int>;
        std::map<Key, int> input_counts, output_counts;
        for (const auto& r : records) ++input_counts[{r.class_name, r.source_video, r.frame_index}];
        for (const auto& r : split.train) ++output_counts[{r.class_name, r.source_video, r.frame_index}];
        for (const auto& r : split.test) ++output_counts[{r.class_name, r.source_video, r.frame_index}];
        CHECK(input_counts == output_counts);
        CHECK(split.train.size() + split.test.size() == records.size());
    }
}

TEST_CASE("split validates its preconditions") {
    const auto records = ts::make_tiny_records({"a"}, {4});
    CHECK_THROWS_AS(ds::stratified_split(records, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ds::stratified_split(records, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ds::stratified_split({}, 0.25, 1), std::invalid_argument);
}

TEST_CASE("preprocess subtracts channel means exactly") {
    // Float frame whose BGR values equal the RGB means reversed.
    cv::Mat frame(5, 7, CV_32FC3, cv::Scalar(103.939, 116.779, 123.68));
    const Tensor out = ds::preprocess_frame(frame, 5, 7, ds::kDefaultChannelMeans);
    REQUIRE(out.shape == std::vector<int>({5, 7, 3}));
    for (float v : out.data) CHECK(v == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("preprocess resizes to the target shape") {
    cv::Mat frame(480, 640, CV_8UC3, cv::Scalar(1, 2, 3));
    const Tensor out = ds::preprocess_frame(frame, 224, 224, {0, 0, 0});
    CHECK(out.shape == std::vector<int>({224, 224, 3}));
}

TEST_CASE("preprocess with zero means and matching size is the identity") {
    Rng rng(13);
    cv::Mat frame(6, 6, CV_8UC3);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            frame.at<cv::Vec3b>(y, x) = cv::Vec3b(static_cast<uchar>(rng.uniform_index(256)),
                                                  static_cast<uchar>(rng.uniform_index(256)),
                                                  static_cast<uchar>(rng.uniform_index(256)));

    const Tensor out = ds::preprocess_frame(frame, 6, 6, {0, 0, 0});
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
            const auto& px = frame.at<cv::Vec3b>(y, x);
            const std::size_t base = (static_cast<std::size_t>(y) * 6 + x) * 3;
            CHECK(out.data[base + 0] == static_cast<float>(px[2]));  // R
            CHECK(out.data[base + 1] == static_cast<float>(px[1]));  // G
            CHECK(out.data[base + 2] == static_cast<float>(px[0]));  // B
        }
}

TEST_CASE("preprocess rejects non-3-channel input") {
    cv::Mat gray(4, 4, CV_8UC1, cv::Scalar(9));
    CHECK_THROWS_WITH_AS(ds::preprocess_frame(gray, 4, 4, {0, 0, 0}), doctest::Contains("3 channels"),
                         std::invalid_argument);
}

TEST_CASE("augment with an all-zero config is the identity for any seed") {
    const cv::Mat image = ts::make_texture_image(0, 123, 64);
    for (std::uint64_t seed : {0ULL, 9ULL, 777ULL})
        CHECK(mats_equal(ds::augment_frame(image, ds::AugmentationConfig::none(), seed), image));
}

TEST_CASE("horizontal-flip-only augmentation is an exact involution") {
    const cv::Mat image = ts::make_texture_image(2, 9, 64);
    ds::AugmentationConfig config = ds::AugmentationConfig::none();
    config.horizontal_flip = true;

    // Find a seed whose draw actually flips.
    std::uint64_t flip_seed = 0;
    bool found = false;
    for (std::uint64_t seed = 0; seed < 64 && !found; ++seed) {
        if (!mats_equal(ds::augment_frame(image, config, seed), image)) {
            flip_seed = seed;
            found = true;
        }
    }
    REQUIRE(found);

    const cv::Mat flipped = ds::augment_frame(image, config, flip_seed);
    cv::Mat expected;
    cv::flip(image, expected, 1);
    CHECK(mats_equal(flipped, expected));
    CHECK(mats_equal(ds::augment_frame(flipped, config, flip_seed), image));
}

TEST_CASE("augmentation is deterministic and shape-preserving") {
    const cv::Mat image = ts::make_texture_image(1, 4, 96);
    ds::AugmentationConfig config;  // defaults: rotation 30, zoom, shifts, shear, flip
    const cv::Mat a = ds::augment_frame(image, config, 31);
    const cv::Mat b = ds::augment_frame(image, config, 31);
    CHECK(mats_equal(a, b));
    CHECK(a.size() == image.size());
    CHECK(a.type() == image.type());

    const cv::Mat c = ds::augment_frame(image, config, 32);
    CHECK_FALSE(mats_equal(a, c));
}

TEST_CASE("augmentation config validation") {
    ds::AugmentationConfig config;
    config.zoom_fraction = 1.5;
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("zoom_fraction"), std::invalid_argument);
    config = ds::AugmentationConfig{};
    config.rotation_degrees = 200.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
