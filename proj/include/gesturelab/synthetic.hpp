#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace gesturelab::synthetic {

/// Class names of the generated texture dataset, lexicographic.
const std::vector<std::string>& texture_class_names();

/// Renders one image of the given class. The three classes differ in dominant
/// palette and structure (red blobs, green checkerboard, blue stripes), so
/// they stay separable under rotation/shift/zoom/flip jitter. Per-image
/// geometry is randomized from the seed.
cv::Mat make_texture_image(int class_index, std::uint64_t seed, int size = 256);

/// Writes `<root>/<class>/img_####.png` for each class; returns the number of
/// images written. Useful for smoke-testing the full pipeline without real
/// gesture recordings.
int write_texture_dataset(const std::filesystem::path& root, int per_class, int size = 256, std::uint64_t seed = 1);

}  // namespace gesturelab::synthetic
