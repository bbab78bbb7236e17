#include "gesturelab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace gesturelab::metrics {

namespace {
inline double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }
}  // namespace

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (const auto& row : counts)
        for (std::int64_t v : row) n += v;
    return n;
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                                 const std::vector<std::string>& classes) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("confusion_matrix: y_true has " + std::to_string(y_true.size()) +
                                    " labels but y_pred has " + std::to_string(y_pred.size()));

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;

    ConfusionMatrix m;
    m.classes = classes;
    m.counts.assign(classes.size(), std::vector<std::int64_t>(classes.size(), 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        auto ti = index.find(y_true[i]);
        if (ti == index.end()) throw std::invalid_argument("confusion_matrix: unknown true label '" + y_true[i] + "'");
        auto pi = index.find(y_pred[i]);
        if (pi == index.end())
            throw std::invalid_argument("confusion_matrix: unknown predicted label '" + y_pred[i] + "'");
        ++m.counts[ti->second][pi->second];
    }
    return m;
}

ClassificationReport classification_report(const ConfusionMatrix& matrix) {
    const std::size_t k = matrix.classes.size();
    const std::int64_t total = matrix.total();

    ClassificationReport report;
    report.total_support = total;
    report.per_class.reserve(k);

    std::int64_t diagonal = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::int64_t tp = matrix.counts[c][c];
        std::int64_t row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += matrix.counts[c][j];
            col += matrix.counts[j][c];
        }
        diagonal += tp;

        ClassMetrics cm;
        cm.class_name = matrix.classes[c];
        cm.support = row;
        cm.precision = safe_div(static_cast<double>(tp), static_cast<double>(col));
        cm.recall = safe_div(static_cast<double>(tp), static_cast<double>(row));
        cm.f1 = (cm.precision + cm.recall) > 0.0 ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall) : 0.0;
        cm.sensitivity = cm.recall;
        const std::int64_t fp = col - tp;
        const std::int64_t tn = total - row - fp;
        cm.specificity = safe_div(static_cast<double>(tn), static_cast<double>(tn + fp));
        report.per_class.push_back(cm);
    }

    report.overall_accuracy = safe_div(static_cast<double>(diagonal), static_cast<double>(total));
    // Single-label multiclass: pooled TP+FP and TP+FN both equal the sample
    // count, so micro precision/recall/F1 all collapse to overall accuracy.
    report.micro = {report.overall_accuracy, report.overall_accuracy, report.overall_accuracy};
    report.macro = macro_average(report.per_class);
    report.weighted = weighted_average(report.per_class);
    return report;
}

AverageRow macro_average(const std::vector<ClassMetrics>& per_class) {
    AverageRow avg;
    if (per_class.empty()) return avg;
    for (const auto& cm : per_class) {
        avg.precision += cm.precision;
        avg.recall += cm.recall;
        avg.f1 += cm.f1;
    }
    const double k = static_cast<double>(per_class.size());
    avg.precision /= k;
    avg.recall /= k;
    avg.f1 /= k;
    return avg;
}

AverageRow weighted_average(const std::vector<ClassMetrics>& per_class) {
    AverageRow avg;
    double total = 0.0;
    for (const auto& cm : per_class) total += static_cast<double>(cm.support);
    if (total <= 0.0) return avg;
    for (const auto& cm : per_class) {
        const double w = static_cast<double>(cm.support) / total;
        avg.precision += w * cm.precision;
        avg.recall += w * cm.recall;
        avg.f1 += w * cm.f1;
    }
    return avg;
}

SensitivitySpecificity sensitivity_specificity(const ConfusionMatrix& matrix) {
    const auto report = classification_report(matrix);
    SensitivitySpecificity out;
    out.classes = matrix.classes;
    out.overall_accuracy = report.overall_accuracy;
    for (const auto& cm : report.per_class) {
        out.sensitivity.push_back(cm.sensitivity);
        out.specificity.push_back(cm.specificity);
    }
    return out;
}

namespace {
std::string fixed2(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
}

void append_row(std::ostringstream& out, const std::string& label, const std::string& p, const std::string& r,
                const std::string& f1, const std::string& support, int label_width) {
    out << std::setw(label_width) << label << std::setw(11) << p << std::setw(11) << r << std::setw(11) << f1
        << std::setw(11) << support << "\n";
}
}  // namespace

std::string render_report_text(const ClassificationReport& report) {
    int label_width = 16;
    for (const auto& cm : report.per_class)
        label_width = std::max(label_width, static_cast<int>(cm.class_name.size()) + 2);

    std::ostringstream out;
    append_row(out, "", "precision", "recall", "f1-score", "support", label_width);
    out << "\n";
    for (const auto& cm : report.per_class)
        append_row(out, cm.class_name, fixed2(cm.precision), fixed2(cm.recall), fixed2(cm.f1),
                   std::to_string(cm.support), label_width);
    out << "\n";
    const std::string total = std::to_string(report.total_support);
    append_row(out, "micro avg", fixed2(report.micro.precision), fixed2(report.micro.recall),
               fixed2(report.micro.f1), total, label_width);
    append_row(out, "macro avg", fixed2(report.macro.precision), fixed2(report.macro.recall),
               fixed2(report.macro.f1), total, label_width);
    append_row(out, "weighted avg", fixed2(report.weighted.precision), fixed2(report.weighted.recall),
               fixed2(report.weighted.f1), total, label_width);
    out << "\n";
    out << std::setw(label_width) << "accuracy" << std::setw(11) << fixed2(report.overall_accuracy) << "\n\n";

    out << std::setw(label_width) << "" << std::setw(13) << "sensitivity" << std::setw(13) << "specificity" << "\n";
    for (const auto& cm : report.per_class)
        out << std::setw(label_width) << cm.class_name << std::setw(13) << fixed2(cm.sensitivity) << std::setw(13)
            << fixed2(cm.specificity) << "\n";
    return out.str();
}

std::string render_confusion_text(const ConfusionMatrix& matrix) {
    int label_width = 12;
    for (const auto& c : matrix.classes)
        label_width = std::max(label_width, static_cast<int>(c.size()) + 2);

    std::ostringstream out;
    out << std::setw(label_width) << "true\\pred";
    for (const auto& c : matrix.classes) out << std::setw(label_width) << c;
    out << "\n";
    for (std::size_t i = 0; i < matrix.classes.size(); ++i) {
        out << std::setw(label_width) << matrix.classes[i];
        for (std::size_t j = 0; j < matrix.classes.size(); ++j) out << std::setw(label_width) << matrix.counts[i][j];
        out << "\n";
    }
    return out.str();
}

nlohmann::ordered_json report_to_json(const ClassificationReport& report) {
    nlohmann::ordered_json j;
    j["per_class"] = nlohmann::ordered_json::array();
    for (const auto& cm : report.per_class) {
        nlohmann::ordered_json row;
        row["class"] = cm.class_name;
        row["precision"] = cm.precision;
        row["recall"] = cm.recall;
        row["f1"] = cm.f1;
        row["support"] = cm.support;
        row["sensitivity"] = cm.sensitivity;
        row["specificity"] = cm.specificity;
        j["per_class"].push_back(row);
    }
    auto avg = [](const AverageRow& a) {
        nlohmann::ordered_json row;
        row["precision"] = a.precision;
        row["recall"] = a.recall;
        row["f1"] = a.f1;
        return row;
    };
    j["micro"] = avg(report.micro);
    j["macro"] = avg(report.macro);
    j["weighted"] = avg(report.weighted);
    j["overall_accuracy"] = report.overall_accuracy;
    j["total_support"] = report.total_support;
    return j;
}

nlohmann::ordered_json confusion_to_json(const ConfusionMatrix& matrix) {
    nlohmann::ordered_json j;
    j["classes"] = matrix.classes;
    j["counts"] = matrix.counts;
    return j;
}

}  // namespace gesturelab::metrics
