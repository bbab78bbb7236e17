#include "gesturelab/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "gesturelab/bench.hpp"
#include "gesturelab/dataset.hpp"
#include "gesturelab/metrics.hpp"
#include "gesturelab/model.hpp"
#include "gesturelab/predictor.hpp"
#include "gesturelab/training.hpp"

namespace gesturelab::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

template <class T>
T parse_number(const std::string& value, const std::string& key) {
    std::istringstream stream(value);
    T out{};
    stream >> out;
    if (stream.fail() || !stream.eof()) throw std::invalid_argument("config value for '" + key + "' is not numeric");
    return out;
}

void apply_key(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "data_root") config.data_root = value;
    else if (key == "model_name") config.model_name = value;
    else if (key == "epochs") config.epochs = parse_number<int>(value, key);
    else if (key == "batch_size") config.batch_size = parse_number<int>(value, key);
    else if (key == "split_ratio") config.split_ratio = parse_number<double>(value, key);
    else if (key == "seed") config.seed = parse_number<std::uint64_t>(value, key);
    else if (key == "queue_capacity") config.queue_capacity = parse_number<int>(value, key);
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "weights_dir") config.weights_dir = value;
    else if (key == "stride") config.stride = parse_number<int>(value, key);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

void validate_config(const RunConfig& config) {
    if (config.epochs < 1) throw std::invalid_argument("epochs out of range (must be >= 1)");
    if (config.batch_size < 1) throw std::invalid_argument("batch_size out of range (must be >= 1)");
    if (!(config.split_ratio > 0.0 && config.split_ratio < 1.0))
        throw std::invalid_argument("split_ratio out of range (must be in (0, 1))");
    if (config.queue_capacity < 1) throw std::invalid_argument("queue_capacity out of range (must be >= 1)");
    if (config.stride < 1) throw std::invalid_argument("stride out of range (must be >= 1)");
}

struct EvaluationOutput {
    metrics::ConfusionMatrix matrix;
    metrics::ClassificationReport report;
};

EvaluationOutput score_records(const model::Classifier& classifier,
                               const std::vector<dataset::FrameRecord>& records) {
    const model::PreprocessSpec& pre = classifier.preprocess();
    const auto& class_names = classifier.codec().class_names();

    std::vector<std::string> y_true, y_pred;
    y_true.reserve(records.size());
    y_pred.reserve(records.size());

    std::vector<std::string> predicted(records.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(records.size()); ++i) {
        const Tensor x = dataset::preprocess_frame(records[static_cast<std::size_t>(i)].image, pre.input_h,
                                                   pre.input_w, pre.channel_means);
        const std::vector<float> probs = classifier.predict(x);
        const auto arg = std::max_element(probs.begin(), probs.end()) - probs.begin();
        predicted[static_cast<std::size_t>(i)] = class_names[static_cast<std::size_t>(arg)];
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        y_true.push_back(records[i].class_name);
        y_pred.push_back(predicted[i]);
    }

    EvaluationOutput out;
    out.matrix = metrics::confusion_matrix(y_true, y_pred, class_names);
    out.report = metrics::classification_report(out.matrix);
    return out;
}

void write_report_files(const EvaluationOutput& evaluation, const fs::path& out_dir) {
    {
        std::ofstream txt(out_dir / "report.txt");
        if (!txt) throw std::runtime_error("cannot write '" + (out_dir / "report.txt").string() + "'");
        txt << metrics::render_report_text(evaluation.report) << "\nconfusion matrix\n"
            << metrics::render_confusion_text(evaluation.matrix);
    }
    {
        nlohmann::ordered_json j = metrics::report_to_json(evaluation.report);
        j["confusion_matrix"] = metrics::confusion_to_json(evaluation.matrix);
        std::ofstream json_out(out_dir / "report.json");
        if (!json_out) throw std::runtime_error("cannot write '" + (out_dir / "report.json").string() + "'");
        json_out << j.dump(2) << "\n";
    }
}

fs::path require_output_dir(const RunConfig& config) {
    if (config.output_dir.empty()) throw std::invalid_argument("output_dir is required (--out)");
    fs::path out(config.output_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!fs::is_directory(out)) throw std::runtime_error("cannot create output directory '" + out.string() + "'");
    return out;
}

fs::path require_weights_dir(const RunConfig& config) {
    if (config.weights_dir.empty())
        throw std::invalid_argument(
            "weights_dir is required: pass --weights-dir, set weights_dir in the config file, or export "
            "GESTURELAB_WEIGHTS_DIR");
    return fs::path(config.weights_dir);
}

dataset::DataSplit ingest_and_split(const RunConfig& config, std::optional<fs::path> manifest_csv,
                                    std::vector<std::string>* classes_out) {
    if (config.data_root.empty()) throw std::invalid_argument("data_root is required (--data)");

    const auto records = dataset::ingest_videos(config.data_root, config.stride);
    const auto manifest = dataset::build_manifest(records);
    if (manifest.warning) std::cerr << "warning: " << *manifest.warning << "\n";
    if (manifest_csv) dataset::export_manifest_csv(manifest, *manifest_csv);
    if (classes_out) *classes_out = manifest.classes;

    return dataset::stratified_split(records, config.split_ratio, config.seed);
}

int command_train(const RunConfig& config) {
    const fs::path out_dir = require_output_dir(config);
    const fs::path weights_dir = require_weights_dir(config);

    std::vector<std::string> classes;
    const dataset::DataSplit split = ingest_and_split(config, out_dir / "manifest.csv", &classes);
    dataset::LabelCodec codec(classes);

    const model::BackboneSpec& spec = model::lookup_backbone(config.model_name);
    model::HeadSpec head;
    head.num_classes = codec.dimension();
    model::ClassifierModel classifier = model::assemble_classifier(spec, head, codec, weights_dir, config.seed);

    training::TrainingConfig train_config;
    train_config.epochs = config.epochs;
    train_config.batch_size = config.batch_size;
    train_config.seed = config.seed;
    train_config.optimizer.decay = train_config.optimizer.learning_rate / config.epochs;

    std::cout << "training " << spec.name << " head on " << split.train.size() << " frames ("
              << split.test.size() << " validation) for " << config.epochs << " epochs\n";
    const training::EpochHistory history = training::fit(classifier, split, train_config);

    model::persist_model(classifier, out_dir);
    training::export_history(history, out_dir / "history.csv", out_dir / "curves.png");

    const EvaluationOutput evaluation = score_records(classifier, split.test);
    write_report_files(evaluation, out_dir);

    const auto& last = history.rows.back();
    std::cout << "final epoch: train_acc " << last.train_accuracy << ", val_acc " << last.val_accuracy
              << "\ntest accuracy " << evaluation.report.overall_accuracy << "\nartifacts in " << out_dir.string()
              << "\n";
    return 0;
}

int command_evaluate(const RunConfig& config, const std::string& artifact_dir) {
    const fs::path out_dir = require_output_dir(config);
    const model::ClassifierModel classifier = model::restore_model(artifact_dir);
    const dataset::DataSplit split = ingest_and_split(config, std::nullopt, nullptr);

    const EvaluationOutput evaluation = score_records(classifier, split.test);
    write_report_files(evaluation, out_dir);

    std::cout << metrics::render_report_text(evaluation.report) << "\nconfusion matrix\n"
              << metrics::render_confusion_text(evaluation.matrix);
    return 0;
}

int command_predict(const RunConfig& config, const std::string& artifact_dir, const std::string& video,
                    const std::string& out_video) {
    if (out_video.empty()) throw std::invalid_argument("output video path is required (--out)");
    const model::ClassifierModel classifier = model::restore_model(artifact_dir);

    fs::path out_path(out_video);
    if (out_path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out_path.parent_path(), ec);
    }
    const fs::path csv_path = out_path.has_parent_path() ? out_path.parent_path() / "frames.csv"
                                                         : fs::path("frames.csv");

    const auto prediction = predictor::predict_video(classifier, video, static_cast<std::size_t>(config.queue_capacity),
                                                     out_path, csv_path);

    std::cout << "processed " << prediction.per_frame_labels.size() << " frames -> " << out_path.string()
              << " (per-frame labels in " << csv_path.string() << ")\n";
    if (!prediction.smoothed_labels.empty())
        std::cout << "final smoothed label: " << prediction.smoothed_labels.back() << "\n";
    return 0;
}

int command_benchmark(const RunConfig& config, std::vector<std::string> names, const bench::TimingProtocol& protocol,
                      const std::string& csv_out) {
    const fs::path weights_dir = require_weights_dir(config);
    if (names.empty())
        for (const auto& spec : model::backbone_registry()) names.push_back(spec.name);

    const auto rows = bench::compare_models(names, protocol, weights_dir);
    std::cout << bench::render_comparison_text(rows);
    if (!csv_out.empty()) bench::export_comparison_csv(rows, csv_out);
    return 0;
}

}  // namespace

RunConfig load_config(const fs::path& path, const std::map<std::string, std::string>& overrides) {
    RunConfig config;
    if (const char* env = std::getenv("GESTURELAB_WEIGHTS_DIR")) config.weights_dir = env;

    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string stripped = trim(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config file '" + path.string() + "' line " + std::to_string(line_no) +
                                            ": expected key=value");
            apply_key(config, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        }
    }

    for (const auto& [key, value] : overrides) apply_key(config, key, value);
    validate_config(config);
    return config;
}

int run_command(const std::vector<std::string>& argv) {
    CLI::App app{"gesture video classification toolkit"};
    app.require_subcommand(1);

    std::string config_file;
    std::map<std::string, std::string> overrides;
    auto track = [&overrides](const std::string& key) {
        return [&overrides, key](const std::string& value) { overrides[key] = value; };
    };

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option_function<std::string>("--config", [&](const std::string& v) { config_file = v; },
                                              "flat key=value config file");
        cmd->add_option_function<std::string>("--seed", track("seed"), "random seed");
        cmd->add_option_function<std::string>("--out", track("output_dir"), "output directory");
    };

    CLI::App* train = app.add_subcommand("train", "ingest, split, fit, and export a model artifact");
    add_common(train);
    train->add_option_function<std::string>("--data", track("data_root"), "dataset root (class subdirectories)");
    train->add_option_function<std::string>("--model", track("model_name"), "backbone name");
    train->add_option_function<std::string>("--epochs", track("epochs"), "training epochs");
    train->add_option_function<std::string>("--batch", track("batch_size"), "batch size");
    train->add_option_function<std::string>("--split-ratio", track("split_ratio"), "test fraction");
    train->add_option_function<std::string>("--stride", track("stride"), "keep every stride-th frame");
    train->add_option_function<std::string>("--weights-dir", track("weights_dir"), "pretrained checkpoint directory");

    std::string artifact_dir;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a saved model on the test split");
    add_common(evaluate);
    evaluate->add_option("--model", artifact_dir, "model artifact directory")->required();
    evaluate->add_option_function<std::string>("--data", track("data_root"), "dataset root");
    evaluate->add_option_function<std::string>("--split-ratio", track("split_ratio"), "test fraction");
    evaluate->add_option_function<std::string>("--stride", track("stride"), "keep every stride-th frame");

    std::string video_path, out_video;
    CLI::App* predict = app.add_subcommand("predict", "annotate an unseen video with smoothed labels");
    predict->add_option_function<std::string>("--config", [&](const std::string& v) { config_file = v; },
                                              "flat key=value config file");
    predict->add_option("--model", artifact_dir, "model artifact directory")->required();
    predict->add_option("--video", video_path, "input video file")->required();
    predict->add_option("--out", out_video, "annotated output video path")->required();
    predict->add_option_function<std::string>("--queue", track("queue_capacity"), "rolling queue capacity");

    std::vector<std::string> bench_models;
    bench::TimingProtocol protocol;
    std::string bench_csv;
    CLI::App* benchmark = app.add_subcommand("benchmark", "compare backbone inference latency");
    benchmark->add_option_function<std::string>("--config", [&](const std::string& v) { config_file = v; },
                                                "flat key=value config file");
    benchmark->add_option("--models", bench_models, "backbone names (default: all)")->delimiter(',');
    benchmark->add_option("--batch-size", protocol.batch_size, "inferences per batch");
    benchmark->add_option("--batches", protocol.batches, "batches per repetition");
    benchmark->add_option("--reps", protocol.repetitions, "repetitions");
    benchmark->add_option("--csv", bench_csv, "write the comparison CSV here");
    benchmark->add_option_function<std::string>("--weights-dir", track("weights_dir"),
                                                "pretrained checkpoint directory");

    std::vector<std::string> args = argv;
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const RunConfig config = load_config(config_file, overrides);
        if (train->parsed()) return command_train(config);
        if (evaluate->parsed()) return command_evaluate(config, artifact_dir);
        if (predict->parsed()) return command_predict(config, artifact_dir, video_path, out_video);
        if (benchmark->parsed()) return command_benchmark(config, bench_models, protocol, bench_csv);
        throw std::invalid_argument("no subcommand given");
    } catch (const std::exception& e) {
        std::cerr << "gesturelab: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace gesturelab::cli
