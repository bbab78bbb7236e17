#include "gesturelab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gesturelab/training.hpp"

namespace gesturelab::plot {

namespace {
constexpr int kWidth = 960;
constexpr int kHeight = 640;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 70;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 60;

struct Series {
    std::string name;
    cv::Scalar color;  // BGR
    std::vector<double> values;
    bool right_axis = false;  // accuracy series use the 0..1 right axis
};

std::string format_tick(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}
}  // namespace

void render_curves(const training::EpochHistory& history, const std::filesystem::path& png_path) {
    if (history.rows.empty()) throw std::invalid_argument("render_curves: empty history");

    std::vector<Series> series = {
        {"train loss", cv::Scalar(180, 60, 20), {}, false},
        {"val loss", cv::Scalar(230, 150, 60), {}, false},
        {"train acc", cv::Scalar(40, 110, 210), {}, true},
        {"val acc", cv::Scalar(60, 180, 75), {}, true},
    };
    for (const auto& row : history.rows) {
        series[0].values.push_back(row.train_loss);
        series[1].values.push_back(row.val_loss);
        series[2].values.push_back(row.train_accuracy);
        series[3].values.push_back(row.val_accuracy);
    }

    double loss_max = 0.0;
    for (int s = 0; s < 2; ++s)
        for (double v : series[s].values) loss_max = std::max(loss_max, v);
    if (loss_max <= 0.0) loss_max = 1.0;
    loss_max *= 1.05;

    const int epochs = static_cast<int>(history.rows.size());
    const int plot_w = kWidth - kMarginLeft - kMarginRight;
    const int plot_h = kHeight - kMarginTop - kMarginBottom;

    cv::Mat canvas(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));

    auto x_for = [&](int epoch_index) {
        if (epochs == 1) return kMarginLeft + plot_w / 2;
        return kMarginLeft + static_cast<int>(std::lround(static_cast<double>(epoch_index) / (epochs - 1) * plot_w));
    };
    auto y_for_loss = [&](double v) {
        return kMarginTop + static_cast<int>(std::lround((1.0 - v / loss_max) * plot_h));
    };
    auto y_for_acc = [&](double v) { return kMarginTop + static_cast<int>(std::lround((1.0 - v) * plot_h)); };

    // Grid and axes.
    const cv::Scalar grid(230, 230, 230), axis(60, 60, 60), text(40, 40, 40);
    for (int tick = 0; tick <= 5; ++tick) {
        const int y = kMarginTop + plot_h * tick / 5;
        cv::line(canvas, {kMarginLeft, y}, {kMarginLeft + plot_w, y}, grid, 1);
        const double loss_v = loss_max * (5 - tick) / 5.0;
        const double acc_v = (5 - tick) / 5.0;
        cv::putText(canvas, format_tick(loss_v), {6, y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.42, text, 1);
        cv::putText(canvas, format_tick(acc_v), {kWidth - kMarginRight + 8, y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.42,
                    text, 1);
    }
    cv::rectangle(canvas, {kMarginLeft, kMarginTop}, {kMarginLeft + plot_w, kMarginTop + plot_h}, axis, 1);

    const int x_ticks = std::min(epochs, 10);
    for (int t = 0; t < x_ticks; ++t) {
        const int epoch_index = x_ticks == 1 ? 0 : t * (epochs - 1) / (x_ticks - 1);
        const int x = x_for(epoch_index);
        cv::line(canvas, {x, kMarginTop + plot_h}, {x, kMarginTop + plot_h + 5}, axis, 1);
        cv::putText(canvas, std::to_string(epoch_index + 1), {x - 8, kMarginTop + plot_h + 22},
                    cv::FONT_HERSHEY_SIMPLEX, 0.42, text, 1);
    }
    cv::putText(canvas, "epoch", {kMarginLeft + plot_w / 2 - 24, kHeight - 14}, cv::FONT_HERSHEY_SIMPLEX, 0.5, text,
                1);
    cv::putText(canvas, "loss", {8, kMarginTop - 12}, cv::FONT_HERSHEY_SIMPLEX, 0.5, text, 1);
    cv::putText(canvas, "accuracy", {kWidth - kMarginRight - 20, kMarginTop - 12}, cv::FONT_HERSHEY_SIMPLEX, 0.5,
                text, 1);
    cv::putText(canvas, "training curves", {kMarginLeft, 26}, cv::FONT_HERSHEY_SIMPLEX, 0.65, text, 1);

    for (const auto& s : series) {
        cv::Point previous;
        for (int i = 0; i < epochs; ++i) {
            const cv::Point p(x_for(i), s.right_axis ? y_for_acc(s.values[static_cast<std::size_t>(i)])
                                                     : y_for_loss(s.values[static_cast<std::size_t>(i)]));
            cv::circle(canvas, p, 2, s.color, cv::FILLED);
            if (i > 0) cv::line(canvas, previous, p, s.color, 2, cv::LINE_AA);
            previous = p;
        }
    }

    // Legend.
    int ly = kMarginTop + 12;
    for (const auto& s : series) {
        cv::line(canvas, {kMarginLeft + 12, ly}, {kMarginLeft + 40, ly}, s.color, 2);
        cv::putText(canvas, s.name, {kMarginLeft + 48, ly + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.45, text, 1);
        ly += 18;
    }

    if (!cv::imwrite(png_path.string(), canvas))
        throw std::runtime_error("cannot write plot '" + png_path.string() + "'");
}

}  // namespace gesturelab::plot
