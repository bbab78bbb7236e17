#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gesturelab/dataset.hpp"
#include "gesturelab/model.hpp"

namespace gesturelab::training {

/// Stochastic gradient descent with momentum and time-based decay:
/// lr_t = lr / (1 + decay * iterations).
struct OptimizerConfig {
    double learning_rate = 1e-4;
    double momentum = 0.9;
    double decay = 1e-4 / 25.0;
};

struct TrainingConfig {
    int epochs = 25;
    int batch_size = 32;
    std::uint64_t seed = 42;
    OptimizerConfig optimizer;
    dataset::AugmentationConfig augmentation;

    void validate() const;
};

struct EpochRow {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct EpochHistory {
    std::vector<EpochRow> rows;
};

/// Trains the head on split.train, scoring split.test as the per-epoch
/// validation set. Backbone parameters are never touched. Augmentation
/// applies to training samples only.
EpochHistory fit(model::ClassifierModel& model, const dataset::DataSplit& split, const TrainingConfig& config);

/// Cross-entropy of a probability vector against a true class index.
double cross_entropy(const std::vector<float>& probabilities, int true_index);

/// Writes the history CSV (epoch,train_loss,train_acc,val_loss,val_acc) and a
/// rendered loss/accuracy plot PNG.
void export_history(const EpochHistory& history, const std::filesystem::path& csv_path,
                    const std::filesystem::path& plot_path);

}  // namespace gesturelab::training
