#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gesturelab/bench.hpp"
#include "gesturelab/kernels.hpp"
#include "synthetic.hpp"

using namespace gesturelab;
namespace bn = gesturelab::bench;
namespace ts = gesturelab::testsupport;
namespace fs = std::filesystem;

TEST_CASE("default protocol records 30 batches and 10 repetitions") {
    const ts::LatencyStub stub(0.0);
    const auto result = bn::time_inference(stub);
    CHECK(result.batches == 30);
    CHECK(result.repetitions == 10);
    CHECK(result.batch_size == 1);
    CHECK(result.execution_mode == "serial");
}

TEST_CASE("invalid protocols are rejected") {
    const ts::LatencyStub stub(0.0);
    CHECK_THROWS_AS(bn::time_inference(stub, {1, 0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(bn::time_inference(stub, {1, 30, 0}), std::invalid_argument);
    CHECK_THROWS_AS(bn::time_inference(stub, {0, 30, 10}), std::invalid_argument);
}

TEST_CASE("measured mean tracks an injected 5 ms latency within 20%") {
    const ts::LatencyStub stub(5.0);
    const auto result = bn::time_inference(stub, {1, 8, 3});
    CHECK(result.mean_ms_per_inference > 4.0);
    CHECK(result.mean_ms_per_inference < 6.0);
}

TEST_CASE("stub ordering matches injected latencies") {
    const ts::LatencyStub fast(2.0);
    const ts::LatencyStub slow(8.0);
    const bn::TimingProtocol protocol{1, 3, 2};
    for (int trial = 0; trial < 10; ++trial) {
        const auto fast_result = bn::time_inference(fast, protocol);
        const auto slow_result = bn::time_inference(slow, protocol);
        CHECK(fast_result.mean_ms_per_inference < slow_result.mean_ms_per_inference);
    }
}

TEST_CASE("warm-up absorbs a 10x slower first call") {
    const ts::LatencyStub cold(3.0, 10.0);  // first call takes 30 ms
    const auto result = bn::time_inference(cold, {1, 8, 3});
    CHECK(result.mean_ms_per_inference > 2.4);
    CHECK(result.mean_ms_per_inference < 3.6);
}

TEST_CASE("timing restores the previous kernel mode") {
    kernels::set_mode(kernels::Mode::parallel);
    const ts::LatencyStub stub(0.0);
    bn::time_inference(stub, {1, 2, 2});
    CHECK(kernels::mode() == kernels::Mode::parallel);
}

TEST_CASE("compare_models keeps order and carries registry metadata") {
    const fs::path weights = fs::temp_directory_path() / "gesturelab_bench_weights";
    for (const auto& spec : model::backbone_registry()) {
        const auto file = model::checkpoint_path(weights, spec.name);
        if (!fs::exists(file)) model::write_backbone_checkpoint(spec, file);
    }

    const bn::TimingProtocol quick{1, 1, 2};
    const auto rows = bn::compare_models({"xception", "resnet50", "inception_v3"}, quick, weights);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].model_name == "xception");
    CHECK(rows[0].reference_size_mb == 88.0);
    CHECK(rows[0].reference_cpu_ms == 109.42);
    CHECK(rows[0].depth == 126);
    CHECK(rows[1].model_name == "resnet50");
    CHECK(rows[1].reference_size_mb == 98.0);
    CHECK_FALSE(rows[1].depth.has_value());
    CHECK(rows[2].model_name == "inception_v3");
    CHECK(rows[2].reference_cpu_ms == 42.25);
    for (const auto& row : rows) {
        CHECK(row.mean_ms_per_inference > 0.0);
        CHECK(row.size_mb > 0.0);  // measured artifact size
        CHECK(row.batches == 1);
        CHECK(row.repetitions == 2);
    }

    const auto single = bn::compare_models({"resnet50"}, quick, weights);
    CHECK(single.size() == 1);

    CHECK_THROWS_WITH_AS(bn::compare_models({"vgg16"}, quick, weights), doctest::Contains("unknown backbone"),
                         std::invalid_argument);
}

TEST_CASE("comparison table and CSV carry the protocol") {
    std::vector<bn::BenchmarkResult> rows(2);
    rows[0] = {"xception", 5.31, 126, 31.25, 0.41, 30, 10, 1, "serial", 109.42, 88.0};
    rows[1] = {"resnet50", 5.31, std::nullopt, 18.5, 0.2, 30, 10, 1, "serial", 58.20, 98.0};

    const std::string text = bn::render_comparison_text(rows);
    CHECK(text.find("xception") != std::string::npos);
    CHECK(text.find("109.42") != std::string::npos);
    CHECK(text.find("-") != std::string::npos);  // blank depth cell

    const fs::path csv_path = fs::temp_directory_path() / "gesturelab_bench.csv";
    bn::export_comparison_csv(rows, csv_path);
    std::ifstream csv(csv_path);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "model,size_mb,depth,mean_ms,std_ms,batches,repetitions");
    std::getline(csv, line);
    CHECK(line.find("xception") == 0);
    CHECK(line.find(",126,") != std::string::npos);
    std::getline(csv, line);
    CHECK(line.find(",-,") != std::string::npos);
    fs::remove(csv_path);
}
