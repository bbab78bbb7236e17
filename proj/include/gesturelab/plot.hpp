#pragma once

#include <filesystem>

namespace gesturelab::training {
struct EpochHistory;
}

namespace gesturelab::plot {

/// Renders train/val loss and train/val accuracy curves into one PNG.
/// Loss uses the left axis (autoscaled), accuracy the right axis (0..1).
void render_curves(const training::EpochHistory& history, const std::filesystem::path& png_path);

}  // namespace gesturelab::plot
