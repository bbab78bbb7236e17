#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace gesturelab::metrics {

/// Row-major confusion counts: rows are true classes, columns predictions.
struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<std::int64_t>> counts;

    std::int64_t total() const;
    std::int64_t at(std::size_t true_idx, std::size_t pred_idx) const { return counts[true_idx][pred_idx]; }
};

struct ClassMetrics {
    std::string class_name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
    double sensitivity = 0.0;   // equals recall
    double specificity = 0.0;
};

struct AverageRow {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ClassificationReport {
    std::vector<ClassMetrics> per_class;
    AverageRow micro;
    AverageRow macro;
    AverageRow weighted;
    double overall_accuracy = 0.0;
    std::int64_t total_support = 0;
};

struct SensitivitySpecificity {
    std::vector<std::string> classes;
    std::vector<double> sensitivity;
    std::vector<double> specificity;
    double overall_accuracy = 0.0;
};

ConfusionMatrix confusion_matrix(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                                 const std::vector<std::string>& classes);

ClassificationReport classification_report(const ConfusionMatrix& matrix);

/// Macro (unweighted mean) and support-weighted mean over per-class rows.
/// Exposed separately so published per-class tables can be re-aggregated.
AverageRow macro_average(const std::vector<ClassMetrics>& per_class);
AverageRow weighted_average(const std::vector<ClassMetrics>& per_class);

SensitivitySpecificity sensitivity_specificity(const ConfusionMatrix& matrix);

/// Aligned plain-text rendering in the usual report layout: per-class rows,
/// then micro/macro/weighted average rows, then sensitivity/specificity.
std::string render_report_text(const ClassificationReport& report);
std::string render_confusion_text(const ConfusionMatrix& matrix);

nlohmann::ordered_json report_to_json(const ClassificationReport& report);
nlohmann::ordered_json confusion_to_json(const ConfusionMatrix& matrix);

}  // namespace gesturelab::metrics
