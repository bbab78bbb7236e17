#include "gesturelab/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gesturelab/kernels.hpp"
#include "gesturelab/plot.hpp"
#include "gesturelab/rng.hpp"

namespace gesturelab::training {

void TrainingConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (optimizer.learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
    if (optimizer.momentum < 0.0 || optimizer.momentum >= 1.0)
        throw std::invalid_argument("momentum must be in [0, 1)");
    if (optimizer.decay < 0.0) throw std::invalid_argument("decay must be >= 0");
    augmentation.validate();
}

double cross_entropy(const std::vector<float>& probabilities, int true_index) {
    const double p = std::max(static_cast<double>(probabilities.at(static_cast<std::size_t>(true_index))), 1e-12);
    return -std::log(p);
}

namespace {

struct HeadGradients {
    Tensor w1, b1, w2, b2;

    explicit HeadGradients(const model::Head& head)
        : w1(head.w1.shape), b1(head.b1.shape), w2(head.w2.shape), b2(head.b2.shape) {}

    void zero() {
        std::fill(w1.data.begin(), w1.data.end(), 0.0f);
        std::fill(b1.data.begin(), b1.data.end(), 0.0f);
        std::fill(w2.data.begin(), w2.data.end(), 0.0f);
        std::fill(b2.data.begin(), b2.data.end(), 0.0f);
    }
};

class SgdState {
public:
    SgdState(const model::Head& head, const OptimizerConfig& config)
        : config_(config), vw1_(head.w1.shape), vb1_(head.b1.shape), vw2_(head.w2.shape), vb2_(head.b2.shape) {}

    void apply(model::Head& head, const HeadGradients& grads) {
        const double lr = config_.learning_rate / (1.0 + config_.decay * static_cast<double>(iterations_));
        update(head.w1, vw1_, grads.w1, lr);
        update(head.b1, vb1_, grads.b1, lr);
        update(head.w2, vw2_, grads.w2, lr);
        update(head.b2, vb2_, grads.b2, lr);
        ++iterations_;
    }

private:
    void update(Tensor& weights, Tensor& velocity, const Tensor& grad, double lr) {
        const float m = static_cast<float>(config_.momentum);
        const float step = static_cast<float>(lr);
        for (std::size_t i = 0; i < weights.data.size(); ++i) {
            velocity.data[i] = m * velocity.data[i] - step * grad.data[i];
            weights.data[i] += velocity.data[i];
        }
    }

    OptimizerConfig config_;
    std::uint64_t iterations_ = 0;
    Tensor vw1_, vb1_, vw2_, vb2_;
};

struct SampleResult {
    double loss = 0.0;
    bool correct = false;
};

/// Forward with inverted dropout, cross-entropy backward, gradients
/// accumulated into `grads`. Returns per-sample loss/accuracy.
SampleResult train_step(model::Head& head, const std::vector<float>& features, int label, Rng& dropout_rng,
                        HeadGradients& grads) {
    const int hidden_n = head.spec.hidden_units;
    const int classes = head.spec.num_classes;
    const int feat_n = head.w1.dim(1);
    const float rate = head.spec.dropout_rate;
    const float keep_scale = rate > 0.0f ? 1.0f / (1.0f - rate) : 1.0f;

    std::vector<float> hidden_pre(static_cast<std::size_t>(hidden_n));
    kernels::dense(head.w1, head.b1, features.data(), hidden_pre.data());

    std::vector<float> hidden(static_cast<std::size_t>(hidden_n));
    std::vector<float> mask(static_cast<std::size_t>(hidden_n), 1.0f);
    for (int i = 0; i < hidden_n; ++i) {
        const float activated = std::max(hidden_pre[static_cast<std::size_t>(i)], 0.0f);
        if (rate > 0.0f)
            mask[static_cast<std::size_t>(i)] = dropout_rng.bernoulli(rate) ? 0.0f : keep_scale;
        hidden[static_cast<std::size_t>(i)] = activated * mask[static_cast<std::size_t>(i)];
    }

    std::vector<float> logits(static_cast<std::size_t>(classes));
    kernels::dense(head.w2, head.b2, hidden.data(), logits.data());
    const std::vector<float> probs = kernels::softmax(logits);

    SampleResult result;
    result.loss = cross_entropy(probs, label);
    const int arg = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    result.correct = (arg == label);

    // dL/dz for softmax + cross-entropy.
    std::vector<float> dz(probs);
    dz[static_cast<std::size_t>(label)] -= 1.0f;

    for (int c = 0; c < classes; ++c) {
        float* grad_row = grads.w2.data.data() + static_cast<std::size_t>(c) * hidden_n;
        const float d = dz[static_cast<std::size_t>(c)];
        for (int h = 0; h < hidden_n; ++h) grad_row[h] += d * hidden[static_cast<std::size_t>(h)];
        grads.b2.data[static_cast<std::size_t>(c)] += d;
    }

    std::vector<float> dhidden(static_cast<std::size_t>(hidden_n), 0.0f);
    for (int c = 0; c < classes; ++c) {
        const float d = dz[static_cast<std::size_t>(c)];
        const float* w_row = head.w2.data.data() + static_cast<std::size_t>(c) * hidden_n;
        for (int h = 0; h < hidden_n; ++h) dhidden[static_cast<std::size_t>(h)] += d * w_row[h];
    }

    for (int h = 0; h < hidden_n; ++h) {
        const bool active = hidden_pre[static_cast<std::size_t>(h)] > 0.0f;
        const float d = active ? dhidden[static_cast<std::size_t>(h)] * mask[static_cast<std::size_t>(h)] : 0.0f;
        if (d == 0.0f) continue;
        float* grad_row = grads.w1.data.data() + static_cast<std::size_t>(h) * feat_n;
        for (int f = 0; f < feat_n; ++f) grad_row[f] += d * features[static_cast<std::size_t>(f)];
        grads.b1.data[static_cast<std::size_t>(h)] += d;
    }

    return result;
}

}  // namespace

EpochHistory fit(model::ClassifierModel& model, const dataset::DataSplit& split, const TrainingConfig& config) {
    config.validate();
    if (split.train.empty()) throw std::invalid_argument("fit: empty training split");

    const dataset::LabelCodec& codec = model.codec();
    const model::PreprocessSpec& pre = model.preprocess();

    auto label_indices = [&codec](const std::vector<dataset::FrameRecord>& records) {
        std::vector<int> out(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            try {
                out[i] = codec.index_of(records[i].class_name);
            } catch (const std::invalid_argument&) {
                throw std::invalid_argument("fit: split class '" + records[i].class_name +
                                            "' is not in the model's label codec");
            }
        }
        return out;
    };

    const std::vector<int> train_labels = label_indices(split.train);
    const std::vector<int> val_labels = label_indices(split.test);

    // The backbone is frozen and validation gets preprocessing only, so
    // validation features are constant across epochs; compute them once.
    std::vector<std::vector<float>> val_features(split.test.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(split.test.size()); ++i) {
        const Tensor x = dataset::preprocess_frame(split.test[static_cast<std::size_t>(i)].image, pre.input_h,
                                                   pre.input_w, pre.channel_means);
        val_features[static_cast<std::size_t>(i)] = model.features(x);
    }

    const std::size_t train_n = split.train.size();
    std::vector<std::size_t> order(train_n);
    std::iota(order.begin(), order.end(), 0);

    HeadGradients grads(model.head());
    SgdState sgd(model.head(), config.optimizer);
    EpochHistory history;

    std::vector<std::vector<float>> batch_features(static_cast<std::size_t>(config.batch_size));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch), 0x73687566u /* "shuf" */));
        shuffle_rng.shuffle(order);

        double train_loss_sum = 0.0;
        std::int64_t train_correct = 0;

        for (std::size_t start = 0; start < train_n; start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t batch_n = std::min(static_cast<std::size_t>(config.batch_size), train_n - start);

#pragma omp parallel for schedule(dynamic)
            for (std::int64_t b = 0; b < static_cast<std::int64_t>(batch_n); ++b) {
                const std::size_t idx = order[start + static_cast<std::size_t>(b)];
                const cv::Mat augmented =
                    dataset::augment_frame(split.train[idx].image, config.augmentation,
                                           mix_seed(config.seed, static_cast<std::uint64_t>(epoch), idx));
                const Tensor x = dataset::preprocess_frame(augmented, pre.input_h, pre.input_w, pre.channel_means);
                batch_features[static_cast<std::size_t>(b)] = model.features(x);
            }

            grads.zero();
            for (std::size_t b = 0; b < batch_n; ++b) {
                const std::size_t idx = order[start + b];
                Rng dropout_rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch),
                                         idx ^ 0xd70b0574ULL));
                const SampleResult r =
                    train_step(model.head(), batch_features[b], train_labels[idx], dropout_rng, grads);
                train_loss_sum += r.loss;
                train_correct += r.correct ? 1 : 0;
            }

            const float inv_batch = 1.0f / static_cast<float>(batch_n);
            for (float& g : grads.w1.data) g *= inv_batch;
            for (float& g : grads.b1.data) g *= inv_batch;
            for (float& g : grads.w2.data) g *= inv_batch;
            for (float& g : grads.b2.data) g *= inv_batch;
            sgd.apply(model.head(), grads);
        }

        double val_loss_sum = 0.0;
        std::int64_t val_correct = 0;
        for (std::size_t i = 0; i < val_features.size(); ++i) {
            const std::vector<float> probs = kernels::softmax(model.head().logits(val_features[i]));
            val_loss_sum += cross_entropy(probs, val_labels[i]);
            const int arg = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
            val_correct += (arg == val_labels[i]) ? 1 : 0;
        }

        EpochRow row;
        row.epoch = epoch;
        row.train_loss = train_loss_sum / static_cast<double>(train_n);
        row.train_accuracy = static_cast<double>(train_correct) / static_cast<double>(train_n);
        row.val_loss = val_features.empty() ? 0.0 : val_loss_sum / static_cast<double>(val_features.size());
        row.val_accuracy =
            val_features.empty() ? 0.0 : static_cast<double>(val_correct) / static_cast<double>(val_features.size());

        if (!std::isfinite(row.train_loss) || !std::isfinite(row.val_loss))
            throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch));
        history.rows.push_back(row);
    }

    return history;
}

void export_history(const EpochHistory& history, const std::filesystem::path& csv_path,
                    const std::filesystem::path& plot_path) {
    if (history.rows.empty()) throw std::invalid_argument("export_history: empty history");

    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write history CSV '" + csv_path.string() + "'");
    csv << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (const auto& row : history.rows)
        csv << row.epoch << "," << row.train_loss << "," << row.train_accuracy << "," << row.val_loss << ","
            << row.val_accuracy << "\n";
    csv.close();

    plot::render_curves(history, plot_path);
}

}  // namespace gesturelab::training
