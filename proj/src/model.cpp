#include "gesturelab/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gesturelab/kernels.hpp"
#include "gesturelab/rng.hpp"
#include "gesturelab/sha256.hpp"

namespace gesturelab::model {

namespace fs = std::filesystem;

const std::vector<BackboneSpec>& backbone_registry() {
    static const std::vector<BackboneSpec> registry = {
        {"xception", 299, 299, 2048, 88.0, 0.790, 0.945, 126, 109.42},
        {"resnet50", 224, 224, 2048, 98.0, 0.749, 0.921, std::nullopt, 58.20},
        {"inception_v3", 299, 299, 2048, 92.0, 0.779, 0.937, 159, 42.25},
    };
    return registry;
}

const BackboneSpec& lookup_backbone(const std::string& name) {
    for (const auto& spec : backbone_registry())
        if (spec.name == name) return spec;
    std::ostringstream msg;
    msg << "unknown backbone '" << name << "'; available:";
    for (const auto& spec : backbone_registry()) msg << " " << spec.name;
    throw std::invalid_argument(msg.str());
}

fs::path checkpoint_path(const fs::path& weights_dir, const std::string& backbone_name) {
    return weights_dir / (backbone_name + ".weights");
}

// ---------------------------------------------------------------------------
// FeatureExtractor

FeatureExtractor FeatureExtractor::from_archive(const TensorArchive& archive, const std::string& source_name) {
    auto fail = [&](const std::string& what) -> void {
        throw std::runtime_error("backbone checkpoint '" + source_name + "': " + what);
    };

    if (!archive.has_meta("num_layers")) fail("missing num_layers metadata");
    const int num_layers = std::stoi(archive.meta("num_layers"));
    if (num_layers < 1) fail("num_layers must be >= 1");

    FeatureExtractor extractor;
    int channels = 3;
    for (int i = 1; i <= num_layers; ++i) {
        const std::string base = "conv" + std::to_string(i);
        if (!archive.contains(base + ".weight") || !archive.contains(base + ".bias"))
            fail("missing tensors for layer " + base);
        ConvLayer layer;
        layer.weight = archive.get(base + ".weight");
        layer.bias = archive.get(base + ".bias");
        layer.stride = std::stoi(archive.meta(base + ".stride"));
        if (layer.weight.rank() != 4 || layer.weight.dim(1) != channels)
            fail("layer " + base + " has shape " + layer.weight.shape_string() + ", expected in-channels " +
                 std::to_string(channels));
        channels = layer.weight.dim(0);
        extractor.layers_.push_back(std::move(layer));
    }

    if (!archive.contains("proj.weight") || !archive.contains("proj.bias")) fail("missing projection tensors");
    extractor.proj_weight_ = archive.get("proj.weight");
    extractor.proj_bias_ = archive.get("proj.bias");
    if (extractor.proj_weight_.rank() != 2 || extractor.proj_weight_.dim(1) != channels)
        fail("projection shape " + extractor.proj_weight_.shape_string() + " does not match conv output channels " +
             std::to_string(channels));
    return extractor;
}

std::vector<float> FeatureExtractor::features(const Tensor& preprocessed) const {
    if (preprocessed.rank() != 3 || preprocessed.dim(2) != 3)
        throw std::invalid_argument("FeatureExtractor: input must be {H,W,3}, got " + preprocessed.shape_string());

    const int h = preprocessed.dim(0);
    const int w = preprocessed.dim(1);

    // HWC -> planar CHW for the conv kernels.
    Tensor planar({3, h, w});
    const float* src = preprocessed.data.data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t pixel = (static_cast<std::size_t>(y) * w + x);
            planar.data[0 * static_cast<std::size_t>(h) * w + pixel] = src[pixel * 3 + 0];
            planar.data[1 * static_cast<std::size_t>(h) * w + pixel] = src[pixel * 3 + 1];
            planar.data[2 * static_cast<std::size_t>(h) * w + pixel] = src[pixel * 3 + 2];
        }
    }

    Tensor activations = std::move(planar);
    for (const auto& layer : layers_) {
        activations = kernels::conv2d(activations, layer.weight, layer.bias, layer.stride);
        kernels::relu_inplace(activations);
    }

    const std::vector<float> pooled = kernels::global_avg_pool(activations);
    std::vector<float> projected(static_cast<std::size_t>(proj_weight_.dim(0)));
    kernels::dense(proj_weight_, proj_bias_, pooled.data(), projected.data());
    kernels::relu_inplace(projected);
    return projected;
}

std::int64_t FeatureExtractor::parameter_count() const {
    std::int64_t n = proj_weight_.size() + proj_bias_.size();
    for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
    return n;
}

std::string FeatureExtractor::parameter_digest() const {
    Sha256 digest;
    for (const auto& layer : layers_) {
        digest.update(layer.weight.data.data(), layer.weight.data.size() * sizeof(float));
        digest.update(layer.bias.data.data(), layer.bias.data.size() * sizeof(float));
    }
    digest.update(proj_weight_.data.data(), proj_weight_.data.size() * sizeof(float));
    digest.update(proj_bias_.data.data(), proj_bias_.data.size() * sizeof(float));
    return digest.hex_digest();
}

void FeatureExtractor::store(TensorArchive& archive, const std::string& prefix) const {
    archive.put_meta("num_layers", std::to_string(layers_.size()));
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string base = "conv" + std::to_string(i + 1);
        archive.put(prefix + base + ".weight", layers_[i].weight);
        archive.put(prefix + base + ".bias", layers_[i].bias);
        archive.put_meta(base + ".stride", std::to_string(layers_[i].stride));
    }
    archive.put(prefix + "proj.weight", proj_weight_);
    archive.put(prefix + "proj.bias", proj_bias_);
}

// ---------------------------------------------------------------------------
// Head

Head Head::initialize(const HeadSpec& spec, int feature_dim, std::uint64_t seed) {
    if (spec.hidden_units < 1) throw std::invalid_argument("HeadSpec: hidden_units must be >= 1");
    if (spec.num_classes < 1) throw std::invalid_argument("HeadSpec: num_classes must be >= 1");
    if (spec.dropout_rate < 0.0f || spec.dropout_rate >= 1.0f)
        throw std::invalid_argument("HeadSpec: dropout_rate must be in [0, 1)");

    Head head;
    head.spec = spec;
    head.w1 = Tensor({spec.hidden_units, feature_dim});
    head.b1 = Tensor({spec.hidden_units});
    head.w2 = Tensor({spec.num_classes, spec.hidden_units});
    head.b2 = Tensor({spec.num_classes});

    Rng rng(mix_seed(seed, 0x68656164u /* "head" */));
    auto glorot_fill = [&rng](Tensor& t, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (float& v : t.data) v = static_cast<float>(rng.uniform(-limit, limit));
    };
    glorot_fill(head.w1, feature_dim, spec.hidden_units);
    glorot_fill(head.w2, spec.hidden_units, spec.num_classes);
    return head;
}

std::vector<float> Head::logits(const std::vector<float>& features) const {
    std::vector<float> hidden(static_cast<std::size_t>(spec.hidden_units));
    kernels::dense(w1, b1, features.data(), hidden.data());
    kernels::relu_inplace(hidden);
    std::vector<float> out(static_cast<std::size_t>(spec.num_classes));
    kernels::dense(w2, b2, hidden.data(), out.data());
    return out;
}

std::int64_t Head::trainable_parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
}

// ---------------------------------------------------------------------------
// ClassifierModel

ClassifierModel::ClassifierModel(std::string backbone_name, FeatureExtractor backbone, Head head,
                                 dataset::LabelCodec codec, PreprocessSpec preprocess)
    : backbone_name_(std::move(backbone_name)),
      backbone_(std::move(backbone)),
      head_(std::move(head)),
      codec_(std::move(codec)),
      preprocess_(preprocess) {
    if (head_.spec.num_classes != codec_.dimension())
        throw std::invalid_argument("head num_classes " + std::to_string(head_.spec.num_classes) +
                                    " does not match label codec dimension " + std::to_string(codec_.dimension()));
}

std::vector<float> ClassifierModel::predict(const Tensor& preprocessed) const {
    return kernels::softmax(head_.logits(backbone_.features(preprocessed)));
}

TensorArchive ClassifierModel::weights_archive() const {
    TensorArchive archive;
    backbone_.store(archive, "backbone.");
    archive.put("head.w1", head_.w1);
    archive.put("head.b1", head_.b1);
    archive.put("head.w2", head_.w2);
    archive.put("head.b2", head_.b2);
    return archive;
}

std::size_t ClassifierModel::weights_byte_size() const { return weights_archive().serialized_size(); }

ClassifierModel assemble_classifier(const BackboneSpec& spec, HeadSpec head_spec, dataset::LabelCodec codec,
                                    const fs::path& weights_dir, std::uint64_t head_seed) {
    if (head_spec.num_classes == 0) head_spec.num_classes = codec.dimension();
    if (head_spec.num_classes != codec.dimension())
        throw std::invalid_argument("head num_classes " + std::to_string(head_spec.num_classes) +
                                    " does not match label codec dimension " + std::to_string(codec.dimension()));

    const fs::path file = checkpoint_path(weights_dir, spec.name);
    if (!fs::exists(file))
        throw std::runtime_error("pretrained weights not found: '" + file.string() +
                                 "' (generate checkpoints with weightgen or set GESTURELAB_WEIGHTS_DIR)");

    const TensorArchive archive = TensorArchive::load(file);
    FeatureExtractor backbone = FeatureExtractor::from_archive(archive, file.string());
    if (backbone.feature_dim() != spec.feature_dim)
        throw std::runtime_error("pretrained weights '" + file.string() + "' have feature_dim " +
                                 std::to_string(backbone.feature_dim()) + ", registry expects " +
                                 std::to_string(spec.feature_dim));

    Head head = Head::initialize(head_spec, backbone.feature_dim(), head_seed);
    PreprocessSpec preprocess;
    preprocess.input_h = spec.input_h;
    preprocess.input_w = spec.input_w;
    return ClassifierModel(spec.name, std::move(backbone), std::move(head), std::move(codec), preprocess);
}

void persist_model(const ClassifierModel& model, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir))
        throw std::runtime_error("cannot create artifact directory '" + out_dir.string() + "'");

    model.weights_archive().save(out_dir / "model.weights");

    {
        nlohmann::ordered_json labels = model.codec().class_names();
        std::ofstream out(out_dir / "labels.json");
        if (!out) throw std::runtime_error("cannot write '" + (out_dir / "labels.json").string() + "'");
        out << labels.dump(2) << "\n";
    }
    {
        nlohmann::ordered_json spec;
        spec["backbone"] = model.backbone_name();
        spec["head"] = {{"pooling", model.head().spec.pooling},
                        {"hidden_units", model.head().spec.hidden_units},
                        {"dropout_rate", model.head().spec.dropout_rate},
                        {"num_classes", model.head().spec.num_classes}};
        spec["input_size"] = {model.preprocess().input_h, model.preprocess().input_w};
        spec["channel_means"] = model.preprocess().channel_means;
        std::ofstream out(out_dir / "spec.json");
        if (!out) throw std::runtime_error("cannot write '" + (out_dir / "spec.json").string() + "'");
        out << spec.dump(2) << "\n";
    }
}

ClassifierModel restore_model(const fs::path& artifact_dir) {
    const fs::path weights_file = artifact_dir / "model.weights";
    const fs::path labels_file = artifact_dir / "labels.json";
    const fs::path spec_file = artifact_dir / "spec.json";

    if (!fs::exists(labels_file))
        throw std::runtime_error("label codec not found: '" + labels_file.string() + "'");
    if (!fs::exists(spec_file)) throw std::runtime_error("model spec not found: '" + spec_file.string() + "'");
    if (!fs::exists(weights_file))
        throw std::runtime_error("model weights not found: '" + weights_file.string() + "'");

    std::vector<std::string> class_names;
    {
        std::ifstream in(labels_file);
        nlohmann::json labels;
        try {
            in >> labels;
            class_names = labels.get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("invalid labels.json: " + std::string(e.what()));
        }
    }

    nlohmann::json spec;
    {
        std::ifstream in(spec_file);
        try {
            in >> spec;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("invalid spec.json: " + std::string(e.what()));
        }
    }

    HeadSpec head_spec;
    head_spec.pooling = spec.at("head").at("pooling").get<std::string>();
    head_spec.hidden_units = spec.at("head").at("hidden_units").get<int>();
    head_spec.dropout_rate = spec.at("head").at("dropout_rate").get<float>();
    head_spec.num_classes = spec.at("head").at("num_classes").get<int>();

    PreprocessSpec preprocess;
    preprocess.input_h = spec.at("input_size").at(0).get<int>();
    preprocess.input_w = spec.at("input_size").at(1).get<int>();
    const auto means = spec.at("channel_means").get<std::vector<float>>();
    if (means.size() != 3) throw std::runtime_error("invalid spec.json: channel_means must have 3 entries");
    preprocess.channel_means = {means[0], means[1], means[2]};

    const TensorArchive archive = TensorArchive::load(weights_file);

    // The backbone loader expects unprefixed names; re-key the stored subset.
    TensorArchive backbone_archive;
    backbone_archive.put_meta("num_layers", archive.meta("num_layers"));
    const int num_layers = std::stoi(archive.meta("num_layers"));
    for (int i = 1; i <= num_layers; ++i) {
        const std::string base = "conv" + std::to_string(i);
        backbone_archive.put(base + ".weight", archive.get("backbone." + base + ".weight"));
        backbone_archive.put(base + ".bias", archive.get("backbone." + base + ".bias"));
        backbone_archive.put_meta(base + ".stride", archive.meta(base + ".stride"));
    }
    backbone_archive.put("proj.weight", archive.get("backbone.proj.weight"));
    backbone_archive.put("proj.bias", archive.get("backbone.proj.bias"));

    FeatureExtractor backbone = FeatureExtractor::from_archive(backbone_archive, weights_file.string());

    Head head;
    head.spec = head_spec;
    head.w1 = archive.get("head.w1");
    head.b1 = archive.get("head.b1");
    head.w2 = archive.get("head.w2");
    head.b2 = archive.get("head.b2");

    return ClassifierModel(spec.at("backbone").get<std::string>(), std::move(backbone), std::move(head),
                           dataset::LabelCodec(class_names), preprocess);
}

// ---------------------------------------------------------------------------
// Checkpoint generation

void write_backbone_checkpoint(const BackboneSpec& spec, const fs::path& file) {
    struct StageDef {
        int out_channels;
        int kernel;
        int stride;
    };
    // Small stack: stem stride 4, then three stride-2 stages, GAP, projection.
    const std::vector<StageDef> stages = {{16, 5, 4}, {32, 3, 2}, {64, 3, 2}, {128, 3, 2}};

    Rng rng(mix_seed(stable_hash(spec.name), 0x636b7074u /* "ckpt" */));

    std::vector<FeatureExtractor::ConvLayer> layers;
    int in_channels = 3;
    for (const auto& stage : stages) {
        FeatureExtractor::ConvLayer layer;
        layer.weight = Tensor({stage.out_channels, in_channels, stage.kernel, stage.kernel});
        layer.bias = Tensor({stage.out_channels});
        layer.stride = stage.stride;
        const double he_std = std::sqrt(2.0 / (in_channels * stage.kernel * stage.kernel));
        for (float& v : layer.weight.data) v = static_cast<float>(rng.normal(0.0, he_std));
        layers.push_back(std::move(layer));
        in_channels = stage.out_channels;
    }

    Tensor proj_weight({spec.feature_dim, in_channels});
    Tensor proj_bias({spec.feature_dim});
    const double proj_std = std::sqrt(2.0 / in_channels);
    for (float& v : proj_weight.data) v = static_cast<float>(rng.normal(0.0, proj_std));

    TensorArchive archive;
    archive.put_meta("kind", "conv_gap_v1");
    archive.put_meta("backbone", spec.name);
    archive.put_meta("num_layers", std::to_string(layers.size()));
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string base = "conv" + std::to_string(i + 1);
        archive.put(base + ".weight", layers[i].weight);
        archive.put(base + ".bias", layers[i].bias);
        archive.put_meta(base + ".stride", std::to_string(layers[i].stride));
    }
    archive.put("proj.weight", proj_weight);
    archive.put("proj.bias", proj_bias);

    // Calibrate the projection scale on fixed noise inputs so feature
    // magnitudes are O(1) regardless of stack depth.
    FeatureExtractor probe = FeatureExtractor::from_archive(archive, spec.name + " (calibration)");
    Rng noise(mix_seed(stable_hash(spec.name), 0x63616cu /* "cal" */));
    double sum_sq = 0.0;
    std::int64_t n = 0;
    for (int sample = 0; sample < 3; ++sample) {
        Tensor input({spec.input_h, spec.input_w, 3});
        for (float& v : input.data) v = static_cast<float>(noise.normal(0.0, 64.0));
        const auto feats = probe.features(input);
        for (float f : feats) {
            sum_sq += static_cast<double>(f) * f;
            ++n;
        }
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(n));
    const float scale = rms > 1e-12 ? static_cast<float>(1.0 / rms) : 1.0f;
    for (float& v : proj_weight.data) v *= scale;
    archive.put("proj.weight", proj_weight);

    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    archive.save(file);
}

}  // namespace gesturelab::model
