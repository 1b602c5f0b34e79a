#include "pupilnet/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pupilnet {

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(width, height,
                std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)),
                                    fill)) {}

GrayImage::GrayImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 0 || height < 0)
        throw std::invalid_argument("GrayImage: negative dimensions");
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("GrayImage: pixel count does not match dimensions");
    for (double v : pixels_)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("GrayImage: intensity outside [0,1]");
}

PatchSpec PatchSpec::from_top_left(int left, int top, int size) {
    return {left + center_offset(size), top + center_offset(size), size};
}

namespace {

int grid_origin(double center, int size) {
    const double origin = center - center_offset(size);
    const double rounded = std::round(origin);
    if (std::abs(origin - rounded) > 1e-9)
        throw std::invalid_argument("PatchSpec: center is not on the integer window grid");
    return static_cast<int>(rounded);
}

}  // namespace

int PatchSpec::left() const { return grid_origin(center_x, size); }
int PatchSpec::top() const { return grid_origin(center_y, size); }

// --- PGM ------------------------------------------------------------------

namespace {

// Skips whitespace and '#' comments between header tokens.
void skip_separators(std::istream& in) {
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string discard;
            std::getline(in, discard);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
            in.get();
        } else {
            return;
        }
    }
}

int read_header_int(std::istream& in, const char* what) {
    skip_separators(in);
    int value = 0;
    if (!(in >> value) || value <= 0)
        throw ImageFormatError(std::string("PGM: bad or missing ") + what);
    return value;
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5')
        throw ImageFormatError("PGM: not a binary P5 file");
    const int width = read_header_int(in, "width");
    const int height = read_header_int(in, "height");
    const int maxval = read_header_int(in, "maxval");
    if (maxval != 255)
        throw ImageFormatError("PGM: maxval " + std::to_string(maxval) + " unsupported (need 255)");
    // exactly one whitespace byte separates the header from the raster
    const int sep = in.get();
    if (sep == std::char_traits<char>::eof() || !std::isspace(sep))
        throw ImageFormatError("PGM: missing header terminator");

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw ImageFormatError("PGM: truncated payload");

    std::vector<double> pixels(count);
    std::transform(raw.begin(), raw.end(), pixels.begin(),
                   [](unsigned char b) { return b / 255.0; });
    return GrayImage(width, height, std::move(pixels));
}

GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageFormatError("cannot open " + path.string());
    try {
        return read_pgm(in);
    } catch (const ImageFormatError& e) {
        throw ImageFormatError(path.string() + ": " + e.what());
    }
}

unsigned char to_byte(double intensity) {
    const double scaled = std::floor(std::clamp(intensity, 0.0, 1.0) * 255.0 + 0.5);
    return static_cast<unsigned char>(scaled);
}

void write_pgm(const GrayImage& image, std::ostream& out) {
    out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    std::vector<unsigned char> raw(image.pixels().size());
    std::transform(image.pixels().begin(), image.pixels().end(), raw.begin(), to_byte);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_pgm(image, out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// --- bicubic ----------------------------------------------------------------

namespace {

double catmull_rom(double t) {
    constexpr double a = -0.5;
    t = std::abs(t);
    if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    return 0.0;
}

struct Taps {
    int first = 0;
    std::vector<double> weights;
};

// One tap table per output coordinate; indices may fall outside the source and are clamped by the caller.
std::vector<Taps> axis_taps(int out_len, double scale) {
    std::vector<Taps> table(static_cast<std::size_t>(out_len));
    const double stretch = scale < 1.0 ? scale : 1.0;  // kernel compression when shrinking
    const double support = 2.0 / stretch;
    for (int u = 0; u < out_len; ++u) {
        const double src = (u + 0.5) / scale - 0.5;
        const int lo = static_cast<int>(std::floor(src - support)) + 1;
        const int hi = static_cast<int>(std::floor(src + support));
        Taps& taps = table[static_cast<std::size_t>(u)];
        taps.first = lo;
        double sum = 0.0;
        for (int k = lo; k <= hi; ++k) {
            const double w = catmull_rom((src - k) * stretch);
            taps.weights.push_back(w);
            sum += w;
        }
        for (double& w : taps.weights) w /= sum;
    }
    return table;
}

int clamp_index(int i, int len) { return std::clamp(i, 0, len - 1); }

}  // namespace

GrayImage bicubic_resize(const GrayImage& image, ScaleFactor factor) {
    if (factor.num <= 0 || factor.den <= 0)
        throw std::invalid_argument("bicubic_resize: factor must be positive");
    const double scale = static_cast<double>(factor.num) / factor.den;
    const int in_w = image.width();
    const int in_h = image.height();
    // round half up of in * num / den, in exact integer arithmetic
    const auto scaled_len = [&](int len) {
        const long long n = static_cast<long long>(len) * factor.num;
        return static_cast<int>((2 * n + factor.den) / (2LL * factor.den));
    };
    const int out_w = scaled_len(in_w);
    const int out_h = scaled_len(in_h);
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("bicubic_resize: output would be empty");

    const auto x_taps = axis_taps(out_w, scale);
    const auto y_taps = axis_taps(out_h, scale);

    // horizontal pass: in_h rows x out_w columns
    std::vector<double> horizontal(static_cast<std::size_t>(in_h) * out_w);
    for (int y = 0; y < in_h; ++y) {
        const auto src = image.row(y);
        for (int u = 0; u < out_w; ++u) {
            const Taps& t = x_taps[static_cast<std::size_t>(u)];
            double acc = 0.0;
            for (std::size_t k = 0; k < t.weights.size(); ++k)
                acc += t.weights[k] * src[static_cast<std::size_t>(clamp_index(t.first + static_cast<int>(k), in_w))];
            horizontal[static_cast<std::size_t>(y) * out_w + u] = acc;
        }
    }

    std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
    for (int v = 0; v < out_h; ++v) {
        const Taps& t = y_taps[static_cast<std::size_t>(v)];
        for (int u = 0; u < out_w; ++u) {
            double acc = 0.0;
            for (std::size_t k = 0; k < t.weights.size(); ++k) {
                const int y = clamp_index(t.first + static_cast<int>(k), in_h);
                acc += t.weights[k] * horizontal[static_cast<std::size_t>(y) * out_w + u];
            }
            out[static_cast<std::size_t>(v) * out_w + u] = std::clamp(acc, 0.0, 1.0);
        }
    }
    return GrayImage(out_w, out_h, std::move(out));
}

// --- patches ----------------------------------------------------------------

void extract_window(const GrayImage& image, int left, int top, int size, std::span<double> out) {
    if (size < 1 || left < 0 || top < 0 || left + size > image.width() || top + size > image.height()) {
        std::ostringstream msg;
        msg << "window " << size << "x" << size << " at (" << left << "," << top
            << ") outside " << image.width() << "x" << image.height() << " image";
        throw PatchOutOfBounds(msg.str());
    }
    if (out.size() != static_cast<std::size_t>(size) * size)
        throw std::invalid_argument("extract_window: output span has wrong length");
    for (int r = 0; r < size; ++r) {
        const auto src = image.row(top + r).subspan(static_cast<std::size_t>(left), static_cast<std::size_t>(size));
        std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(r) * size);
    }
}

std::vector<double> extract_patch(const GrayImage& image, const PatchSpec& spec) {
    std::vector<double> patch(static_cast<std::size_t>(spec.size) * std::max(spec.size, 0));
    extract_window(image, spec.left(), spec.top(), spec.size, patch);
    return patch;
}

}  // namespace pupilnet
