#include "gesturelab/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gesturelab/rng.hpp"

namespace gesturelab::synthetic {

namespace fs = std::filesystem;

const std::vector<std::string>& texture_class_names() {
    static const std::vector<std::string> names = {"blobs", "checks", "stripes"};
    return names;
}

cv::Mat make_texture_image(int class_index, std::uint64_t seed, int size) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(class_index), 0x746578u));
    cv::Mat image(size, size, CV_8UC3);

    switch (class_index) {
        case 0: {
            // blobs: warm red palette, filled circles on a dark background
            image.setTo(cv::Scalar(20 + rng.uniform_index(20), 20 + rng.uniform_index(20), 60 + rng.uniform_index(30)));
            const int blobs = 6 + static_cast<int>(rng.uniform_index(6));
            for (int i = 0; i < blobs; ++i) {
                const cv::Point center(static_cast<int>(rng.uniform_index(size)),
                                       static_cast<int>(rng.uniform_index(size)));
                const int radius = size / 14 + static_cast<int>(rng.uniform_index(size / 8));
                const cv::Scalar color(10 + rng.uniform_index(40), 20 + rng.uniform_index(60),
                                       170 + rng.uniform_index(85));
                cv::circle(image, center, radius, color, cv::FILLED, cv::LINE_AA);
            }
            break;
        }
        case 1: {
            // checks: green/white checkerboard, randomized cell size and offset
            const int cell = size / 16 + static_cast<int>(rng.uniform_index(size / 12));
            const int off_x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cell)));
            const int off_y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cell)));
            const cv::Scalar dark(40 + rng.uniform_index(30), 120 + rng.uniform_index(60), 30 + rng.uniform_index(30));
            const cv::Scalar light(190 + rng.uniform_index(60), 225 + rng.uniform_index(30),
                                   190 + rng.uniform_index(60));
            for (int y = 0; y < size; ++y) {
                auto* row = image.ptr<cv::Vec3b>(y);
                const int cy = (y + off_y) / cell;
                for (int x = 0; x < size; ++x) {
                    const int cx = (x + off_x) / cell;
                    const cv::Scalar& c = ((cx + cy) % 2 == 0) ? dark : light;
                    row[x] = cv::Vec3b(static_cast<uchar>(c[0]), static_cast<uchar>(c[1]), static_cast<uchar>(c[2]));
                }
            }
            break;
        }
        case 2: {
            // stripes: blue palette, parallel bands at a random orientation
            const double angle = rng.uniform(0.0, 3.14159265358979);
            const double period = size / 10.0 + rng.uniform(0.0, size / 8.0);
            const double phase = rng.uniform(0.0, period);
            const double nx = std::cos(angle), ny = std::sin(angle);
            const cv::Vec3b a(200 + rng.uniform_index(55), 120 + rng.uniform_index(40), 20 + rng.uniform_index(40));
            const cv::Vec3b b(90 + rng.uniform_index(40), 40 + rng.uniform_index(30), 10 + rng.uniform_index(20));
            for (int y = 0; y < size; ++y) {
                auto* row = image.ptr<cv::Vec3b>(y);
                for (int x = 0; x < size; ++x) {
                    const double t = std::fmod(x * nx + y * ny + phase, period);
                    row[x] = (t < period / 2.0) ? a : b;
                }
            }
            break;
        }
        default:
            throw std::invalid_argument("make_texture_image: class_index must be 0..2");
    }

    // Mild pixel noise so no two images are equal.
    cv::Mat noise(size, size, CV_8UC3);
    cv::theRNG().state = mix_seed(seed, static_cast<std::uint64_t>(class_index), 0x6e6f69u);
    cv::randn(noise, 0, 8);
    cv::add(image, noise, image);
    return image;
}

int write_texture_dataset(const fs::path& root, int per_class, int size, std::uint64_t seed) {
    const auto& names = texture_class_names();
    int written = 0;
    for (std::size_t c = 0; c < names.size(); ++c) {
        const fs::path dir = root / names[c];
        fs::create_directories(dir);
        for (int i = 0; i < per_class; ++i) {
            char file[32];
            std::snprintf(file, sizeof(file), "img_%04d.png", i);
            const cv::Mat image =
                make_texture_image(static_cast<int>(c), mix_seed(seed, c, static_cast<std::uint64_t>(i)), size);
            if (!cv::imwrite((dir / file).string(), image))
                throw std::runtime_error("cannot write image " + (dir / file).string());
            ++written;
        }
    }
    return written;
}

}  // namespace gesturelab::synthetic
