#include "pupilnet/model_io.h"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

namespace pupilnet {

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'N', 'E', 'T'};

std::string kind_text(ModelFormatError::Kind kind) {
    using K = ModelFormatError::Kind;
    switch (kind) {
        case K::BadMagic: return "bad magic";
        case K::VersionMismatch: return "version mismatch";
        case K::DimensionMismatch: return "dimension mismatch";
        case K::TruncatedStream: return "truncated stream";
        case K::Io: return "i/o error";
    }
    return "model format error";
}

template <typename T>
void put_le(std::ostream& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(value);
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw ModelFormatError(ModelFormatError::Kind::TruncatedStream, "stream ended early");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

}  // namespace

ModelFormatError::ModelFormatError(Kind kind, const std::string& detail)
    : std::runtime_error(kind_text(kind) + (detail.empty() ? "" : ": " + detail)), kind_(kind) {}

void write_model(const CnnModel& model, std::ostream& out) {
    model.validate();
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kModelFormatVersion);
    const CnnConfig& c = model.config;
    for (int v : {c.input_size, c.kernel_size, c.conv_stride, c.num_filters, c.pool_window,
                  c.pool_stride, c.num_perceptrons})
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v));
    for (Layer l : kAllLayers)
        for (double w : model.weights.layer(l)) put_le<double>(out, w);
}

CnnModel read_model(std::istream& in) {
    using K = ModelFormatError::Kind;
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != static_cast<std::streamsize>(magic.size()))
        throw ModelFormatError(K::TruncatedStream, "missing header");
    if (magic != kMagic) throw ModelFormatError(K::BadMagic, "expected \"PNET\"");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kModelFormatVersion)
        throw ModelFormatError(K::VersionMismatch, "file version " + std::to_string(version) +
                                                       ", supported " + std::to_string(kModelFormatVersion));
    std::array<std::uint32_t, 7> dims{};
    for (auto& d : dims) d = get_le<std::uint32_t>(in);
    for (auto d : dims)
        if (d > 1u << 20) throw ModelFormatError(K::DimensionMismatch, "implausible layer size");
    CnnModel model;
    model.config = {static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                    static_cast<int>(dims[3]), static_cast<int>(dims[4]), static_cast<int>(dims[5]),
                    static_cast<int>(dims[6])};
    try {
        model.config.validate();
    } catch (const InvalidConfig& e) {
        throw ModelFormatError(K::DimensionMismatch, e.what());
    }
    model.weights = Parameters::zeros(model.config);
    for (Layer l : kAllLayers)
        for (double& w : model.weights.layer(l)) w = get_le<double>(in);
    if (in.peek() != std::char_traits<char>::eof())
        throw ModelFormatError(K::DimensionMismatch, "trailing bytes after the weights the config implies");
    if (!model.weights.all_finite()) throw ModelFormatError(K::DimensionMismatch, "non-finite weight");
    return model;
}

void save_model(const CnnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelFormatError(ModelFormatError::Kind::Io, "cannot write " + path.string());
    write_model(model, out);
    if (!out) throw ModelFormatError(ModelFormatError::Kind::Io, "write failed: " + path.string());
}

CnnModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError(ModelFormatError::Kind::Io, "cannot open " + path.string());
    try {
        return read_model(in);
    } catch (const ModelFormatError& e) {
        throw ModelFormatError(e.kind(), path.string());
    }
}

}  // namespace pupilnet
