#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gesturelab/dataset.hpp"
#include "gesturelab/tensor.hpp"
#include "gesturelab/tensor_archive.hpp"

namespace gesturelab::model {

/// Registry metadata for a pretrained backbone. Published reference numbers
/// (size, top-1/top-5, depth, CPU ms) are carried for reporting next to
/// locally measured values.
struct BackboneSpec {
    std::string name;
    int input_h = 0;
    int input_w = 0;
    int feature_dim = 0;
    double size_mb = 0.0;
    double top1 = 0.0;
    double top5 = 0.0;
    std::optional<int> depth;       // unset where the published table leaves it blank
    double reference_cpu_ms = 0.0;
};

const std::vector<BackboneSpec>& backbone_registry();
const BackboneSpec& lookup_backbone(const std::string& name);

struct HeadSpec {
    std::string pooling = "global_average";
    int hidden_units = 512;
    float dropout_rate = 0.5f;
    int num_classes = 0;
};

struct PreprocessSpec {
    int input_h = 0;
    int input_w = 0;
    std::array<float, 3> channel_means = dataset::kDefaultChannelMeans;  // RGB order
};

/// Frozen feature extractor: a conv stack with ReLU, global average pooling
/// and a projection to feature_dim. Topology comes entirely from the
/// checkpoint file; no parameter here is ever trainable.
class FeatureExtractor {
public:
    struct ConvLayer {
        Tensor weight;  // {out_c, in_c, kh, kw}
        Tensor bias;    // {out_c}
        int stride = 1;
    };

    static FeatureExtractor from_archive(const TensorArchive& archive, const std::string& source_name);

    /// Input is a preprocessed {H, W, 3} tensor (RGB); returns feature_dim values.
    std::vector<float> features(const Tensor& preprocessed) const;

    int feature_dim() const { return proj_weight_.dim(0); }
    std::int64_t parameter_count() const;
    /// SHA-256 over all parameter bytes in layer order.
    std::string parameter_digest() const;

    void store(TensorArchive& archive, const std::string& prefix) const;

    const std::vector<ConvLayer>& conv_layers() const { return layers_; }
    const Tensor& proj_weight() const { return proj_weight_; }
    const Tensor& proj_bias() const { return proj_bias_; }

private:
    std::vector<ConvLayer> layers_;
    Tensor proj_weight_;  // {feature_dim, last_c}
    Tensor proj_bias_;    // {feature_dim}
};

/// Trainable classification head: dense(hidden) + ReLU + dropout + dense(K).
/// Softmax is applied by the caller.
struct Head {
    HeadSpec spec;
    Tensor w1;  // {hidden, feature_dim}
    Tensor b1;  // {hidden}
    Tensor w2;  // {num_classes, hidden}
    Tensor b2;  // {num_classes}

    static Head initialize(const HeadSpec& spec, int feature_dim, std::uint64_t seed);

    std::vector<float> logits(const std::vector<float>& features) const;
    std::int64_t trainable_parameter_count() const;
};

/// Anything that turns a preprocessed frame into class probabilities. The
/// video predictor and benchmark harness accept this interface so tests can
/// substitute deterministic stubs.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int num_classes() const = 0;
    virtual const PreprocessSpec& preprocess() const = 0;
    virtual const dataset::LabelCodec& codec() const = 0;
    /// Probability vector over classes; sums to 1 within 1e-6.
    virtual std::vector<float> predict(const Tensor& preprocessed) const = 0;
};

class ClassifierModel final : public Classifier {
public:
    ClassifierModel(std::string backbone_name, FeatureExtractor backbone, Head head, dataset::LabelCodec codec,
                    PreprocessSpec preprocess);

    int num_classes() const override { return codec_.dimension(); }
    const PreprocessSpec& preprocess() const override { return preprocess_; }
    const dataset::LabelCodec& codec() const override { return codec_; }
    std::vector<float> predict(const Tensor& preprocessed) const override;

    std::vector<float> features(const Tensor& preprocessed) const { return backbone_.features(preprocessed); }

    const std::string& backbone_name() const { return backbone_name_; }
    const FeatureExtractor& backbone() const { return backbone_; }
    Head& head() { return head_; }
    const Head& head() const { return head_; }

    std::int64_t trainable_parameter_count() const { return head_.trainable_parameter_count(); }
    std::int64_t trainable_backbone_parameter_count() const { return 0; }
    std::int64_t frozen_parameter_count() const { return backbone_.parameter_count(); }
    std::string backbone_digest() const { return backbone_.parameter_digest(); }

    /// In-memory serialized size of the weights archive, in bytes.
    std::size_t weights_byte_size() const;

private:
    TensorArchive weights_archive() const;
    friend void persist_model(const ClassifierModel& model, const std::filesystem::path& out_dir);

    std::string backbone_name_;
    FeatureExtractor backbone_;
    Head head_;
    dataset::LabelCodec codec_;
    PreprocessSpec preprocess_;
};

/// Loads `<weights_dir>/<spec.name>.weights` and attaches a fresh head with a
/// fixed-seed uniform initialization.
ClassifierModel assemble_classifier(const BackboneSpec& spec, HeadSpec head, dataset::LabelCodec codec,
                                    const std::filesystem::path& weights_dir, std::uint64_t head_seed = 42);

/// Writes model.weights + labels.json + spec.json into out_dir.
void persist_model(const ClassifierModel& model, const std::filesystem::path& out_dir);

ClassifierModel restore_model(const std::filesystem::path& artifact_dir);

/// Generates the deterministic checkpoint for a registry backbone. The seed
/// derives from the backbone name; the projection is scale-calibrated on
/// fixed synthetic inputs so downstream features are O(1).
void write_backbone_checkpoint(const BackboneSpec& spec, const std::filesystem::path& file);

/// Checkpoint path convention under a weights directory.
std::filesystem::path checkpoint_path(const std::filesystem::path& weights_dir, const std::string& backbone_name);

}  // namespace gesturelab::model
