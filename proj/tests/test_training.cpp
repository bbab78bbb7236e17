#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gesturelab/kernels.hpp"
#include "gesturelab/rng.hpp"
#include "gesturelab/training.hpp"
#include "synthetic.hpp"

using namespace gesturelab;
namespace tr = gesturelab::training;
namespace ts = gesturelab::testsupport;
namespace fs = std::filesystem;

namespace {

// Small split over the synthetic texture classes, images shrunk to the tiny
// classifier's 32x32 input.
dataset::DataSplit make_tiny_split(int per_class, double ratio = 0.25, std::uint64_t seed = 9) {
    std::vector<dataset::FrameRecord> records;
    const auto& names = ts::synthetic_class_names();
    for (std::size_t c = 0; c < names.size(); ++c) {
        for (int i = 0; i < per_class; ++i) {
            dataset::FrameRecord record;
            record.image = ts::make_texture_image(static_cast<int>(c),
                                                  mix_seed(seed, c, static_cast<std::uint64_t>(i)), 48);
            record.class_name = names[c];
            record.source_video = names[c];
            record.frame_index = i;
            records.push_back(std::move(record));
        }
    }
    return dataset::stratified_split(records, ratio, seed);
}

tr::TrainingConfig quick_config(int epochs, std::uint64_t seed = 42) {
    tr::TrainingConfig config;
    config.epochs = epochs;
    config.batch_size = 8;
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("uniform prediction loss equals ln 3") {
    // Zero-weight head => zero logits => uniform softmax.
    model::HeadSpec spec;
    spec.hidden_units = 4;
    spec.num_classes = 3;
    model::Head head;
    head.spec = spec;
    head.w1 = Tensor({4, 8});
    head.b1 = Tensor({4});
    head.w2 = Tensor({3, 4});
    head.b2 = Tensor({3});

    const std::vector<float> features(8, 0.37f);
    const auto probs = kernels::softmax(head.logits(features));
    for (int label = 0; label < 3; ++label)
        CHECK(tr::cross_entropy(probs, label) == doctest::Approx(std::log(3.0)).epsilon(1e-3));
}

TEST_CASE("history has one row per epoch with consecutive indices") {
    auto model = ts::make_tiny_classifier(ts::synthetic_class_names(), 1);
    const auto split = make_tiny_split(8);
    const auto history = tr::fit(model, split, quick_config(4));
    REQUIRE(history.rows.size() == 4);
    for (std::size_t i = 0; i < history.rows.size(); ++i) {
        CHECK(history.rows[i].epoch == static_cast<int>(i) + 1);
        CHECK(history.rows[i].train_loss >= 0.0);
        CHECK(history.rows[i].val_loss >= 0.0);
        CHECK(history.rows[i].train_accuracy >= 0.0);
        CHECK(history.rows[i].train_accuracy <= 1.0);
        CHECK(history.rows[i].val_accuracy >= 0.0);
        CHECK(history.rows[i].val_accuracy <= 1.0);
    }
}

TEST_CASE("zero learning rate leaves head parameters exactly unchanged") {
    auto model = ts::make_tiny_classifier(ts::synthetic_class_names(), 2);
    const auto split = make_tiny_split(6);

    const auto w1_before = model.head().w1.data;
    const auto b1_before = model.head().b1.data;
    const auto w2_before = model.head().w2.data;
    const auto b2_before = model.head().b2.data;

    auto config = quick_config(1);
    config.optimizer.learning_rate = 0.0;
    tr::fit(model, split, config);

    CHECK(model.head().w1.data == w1_before);
    CHECK(model.head().b1.data == b1_before);
    CHECK(model.head().w2.data == w2_before);
    CHECK(model.head().b2.data == b2_before);
}

TEST_CASE("backbone digest is bit-identical across training") {
    auto model = ts::make_tiny_classifier(ts::synthetic_class_names(), 3);
    const auto split = make_tiny_split(8);

    const std::string digest_before = model.backbone_digest();
    tr::fit(model, split, quick_config(2));
    CHECK(model.backbone_digest() == digest_before);
}

TEST_CASE("training actually updates the head") {
    auto model = ts::make_tiny_classifier(ts::synthetic_class_names(), 4);
    const auto split = make_tiny_split(8);
    const auto w1_before = model.head().w1.data;

    auto config = quick_config(2);
    config.optimizer.learning_rate = 0.01;
    tr::fit(model, split, config);
    CHECK(model.head().w1.data != w1_before);
}

TEST_CASE("fit is reproducible for a fixed seed") {
    const auto split = make_tiny_split(8);
    auto run = [&split]() {
        auto model = ts::make_tiny_classifier(ts::synthetic_class_names(), 5);
        return tr::fit(model, split, quick_config(3, 77));
    };
    const auto h1 = run();
    const auto h2 = run();
    REQUIRE(h1.rows.size() == h2.rows.size());
    for (std::size_t i = 0; i < h1.rows.size(); ++i) {
        CHECK(h1.rows[i].train_loss == doctest::Approx(h2.rows[i].train_loss).epsilon(1e-6));
        CHECK(h1.rows[i].train_accuracy == doctest::Approx(h2.rows[i].train_accuracy).epsilon(1e-6));
        CHECK(h1.rows[i].val_loss == doctest::Approx(h2.rows[i].val_loss).epsilon(1e-6));
        CHECK(h1.rows[i].val_accuracy == doctest::Approx(h2.rows[i].val_accuracy).epsilon(1e-6));
    }
}

TEST_CASE("fit rejects splits whose classes are not in the codec") {
    auto model = ts::make_tiny_classifier({"left", "right"}, 6);
    const auto split = make_tiny_split(4);  // blobs/checks/stripes
    CHECK_THROWS_WITH_AS(tr::fit(model, split, quick_config(1)), doctest::Contains("label codec"),
                         std::invalid_argument);
}

TEST_CASE("diverging loss reports the epoch") {
    auto model = ts::make_tiny_classifier(ts::synthetic_class_names(), 7);
    const auto split = make_tiny_split(6);
    auto config = quick_config(3);
    config.optimizer.learning_rate = 1e18;  // drives weights to overflow
    CHECK_THROWS_WITH_AS(tr::fit(model, split, config), doctest::Contains("epoch"), std::runtime_error);
}

TEST_CASE("config validation") {
    tr::TrainingConfig config;
    config.epochs = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = tr::TrainingConfig{};
    config.batch_size = 0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = tr::TrainingConfig{};
    config.optimizer.momentum = 1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("export_history writes the CSV and plot") {
    tr::EpochHistory history;
    for (int e = 1; e <= 25; ++e)
        history.rows.push_back({e, 1.0 / e, 0.5 + 0.02 * e, 1.2 / e, 0.45 + 0.02 * e});

    const fs::path dir = fs::temp_directory_path() / "gesturelab_history_test";
    fs::create_directories(dir);
    tr::export_history(history, dir / "history.csv", dir / "curves.png");

    std::ifstream csv(dir / "history.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "epoch,train_loss,train_acc,val_loss,val_acc");
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 25);

    CHECK(fs::exists(dir / "curves.png"));
    CHECK(fs::file_size(dir / "curves.png") > 1000);
    fs::remove_all(dir);
}

TEST_CASE("single-epoch history still renders a plot") {
    tr::EpochHistory history;
    history.rows.push_back({1, 0.9, 0.4, 1.0, 0.35});
    const fs::path dir = fs::temp_directory_path() / "gesturelab_history_single";
    fs::create_directories(dir);
    tr::export_history(history, dir / "history.csv", dir / "curves.png");
    CHECK(fs::exists(dir / "curves.png"));
    fs::remove_all(dir);
}

TEST_CASE("accuracies in the emitted CSV stay within [0,1]") {
    auto model = ts::make_tiny_classifier(ts::synthetic_class_names(), 8);
    const auto split = make_tiny_split(6);
    const auto history = tr::fit(model, split, quick_config(2));

    const fs::path dir = fs::temp_directory_path() / "gesturelab_history_range";
    fs::create_directories(dir);
    tr::export_history(history, dir / "history.csv", dir / "curves.png");

    std::ifstream csv(dir / "history.csv");
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        double epoch, tl, ta, vl, va;
        char comma;
        std::istringstream row(line);
        row >> epoch >> comma >> tl >> comma >> ta >> comma >> vl >> comma >> va;
        CHECK(ta >= 0.0);
        CHECK(ta <= 1.0);
        CHECK(va >= 0.0);
        CHECK(va <= 1.0);
    }
    fs::remove_all(dir);
}
