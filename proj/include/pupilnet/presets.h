#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pupilnet/cnn.h"

namespace pupilnet {

class UnknownPreset : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Stage { Coarse, Fine, Single };

/// Named architectures: C_K4P8, C_K8P8, C_K8P16, C_K16P32 (coarse, 24x24),
/// F_K8P8 (fine, 89x89) and S_K8P8 (single stage, 25x25).
CnnConfig preset(std::string_view name);

/// Stage a preset belongs to, from its name prefix.
Stage preset_stage(std::string_view name);

std::vector<std::string> preset_names();

std::string stage_name(Stage stage);
Stage parse_stage(std::string_view name);

}  // namespace pupilnet
