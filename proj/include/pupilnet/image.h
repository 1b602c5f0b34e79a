#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pupilnet {

/// Raised for malformed or unsupported PGM input.
class ImageFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a requested window does not lie fully inside the image.
class PatchOutOfBounds : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Row-major grayscale raster with intensities in [0, 1].
///
/// Pixel (x, y) covers the unit square centered on the integer coordinate
/// (x, y); every coordinate in this library uses that convention.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);
    /// Takes ownership of `pixels`; throws if the count or range is wrong.
    GrayImage(int width, int height, std::vector<double> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return pixels_.empty(); }

    double at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const double> pixels() const { return pixels_; }
    std::span<const double> row(int y) const {
        return std::span<const double>(pixels_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    bool operator==(const GrayImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> pixels_;
};

/// Square window described by its (possibly fractional) center.
///
/// For a window of side `size` with integer top-left t, the center is
/// t + (size - 1) / 2; odd sizes therefore center on a pixel and even sizes
/// on a pixel corner.
struct PatchSpec {
    double center_x = 0.0;
    double center_y = 0.0;
    int size = 0;

    static PatchSpec from_top_left(int left, int top, int size);
    /// Integer top-left; throws std::invalid_argument if the center is off the window grid.
    int left() const;
    int top() const;
};

/// Half-offset of a window center from its top-left corner.
inline double center_offset(int size) { return (size - 1) / 2.0; }

/// Positive rational rescale factor num/den.
struct ScaleFactor {
    int num = 1;
    int den = 1;
};

GrayImage load_pgm(const std::filesystem::path& path);
GrayImage read_pgm(std::istream& in);
void save_pgm(const GrayImage& image, const std::filesystem::path& path);
void write_pgm(const GrayImage& image, std::ostream& out);

/// 8-bit quantization used by the PGM writer (round half up).
unsigned char to_byte(double intensity);

/// Catmull-Rom (a = -0.5) bicubic rescale with edge replication.
///
/// Sample positions follow the pixel-center convention: output pixel u maps to
/// source coordinate (u + 0.5) / factor - 0.5. When shrinking, the kernel is
/// stretched by 1/factor so every source pixel contributes (antialiasing).
/// Output dimensions are round(width * factor), round(height * factor).
GrayImage bicubic_resize(const GrayImage& image, ScaleFactor factor);

/// Copies the spec's size x size window in row-major order.
std::vector<double> extract_patch(const GrayImage& image, const PatchSpec& spec);

/// Same as extract_patch, addressed by integer top-left, writing into `out`.
void extract_window(const GrayImage& image, int left, int top, int size, std::span<double> out);

}  // namespace pupilnet
