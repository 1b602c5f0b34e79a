#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "pupilnet/cnn.h"

namespace pupilnet {

/// Model file layout (little-endian):
///   "PNET" | u32 version = 1 | 7 x u32 config | f64 weights
/// with weights ordered conv kernels, conv biases, fc weights, fc biases,
/// out weights, out bias.
class ModelFormatError : public std::runtime_error {
public:
    enum class Kind { BadMagic, VersionMismatch, DimensionMismatch, TruncatedStream, Io };

    ModelFormatError(Kind kind, const std::string& detail);
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_model(const CnnModel& model, std::ostream& out);
CnnModel read_model(std::istream& in);

void save_model(const CnnModel& model, const std::filesystem::path& path);
CnnModel load_model(const std::filesystem::path& path);

}  // namespace pupilnet
