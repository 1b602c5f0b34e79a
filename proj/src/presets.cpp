#include "pupilnet/presets.h"

#include <array>
#include <utility>

namespace pupilnet {

namespace {

struct Entry {
    std::string_view name;
    Stage stage;
    CnnConfig config;
};

// input, kernel, stride, filters, pool window, pool stride, perceptrons
constexpr std::array<Entry, 6> kPresets = {{
    {"C_K4P8", Stage::Coarse, {24, 5, 1, 4, 4, 4, 8}},
    {"C_K8P8", Stage::Coarse, {24, 5, 1, 8, 4, 4, 8}},
    {"C_K8P16", Stage::Coarse, {24, 5, 1, 8, 4, 4, 16}},
    {"C_K16P32", Stage::Coarse, {24, 5, 1, 16, 4, 4, 32}},
    {"F_K8P8", Stage::Fine, {89, 20, 1, 8, 5, 5, 8}},
    {"S_K8P8", Stage::Single, {25, 20, 1, 8, 2, 1, 8}},
}};

const Entry& lookup(std::string_view name) {
    for (const auto& e : kPresets)
        if (e.name == name) return e;
    throw UnknownPreset("unknown preset '" + std::string(name) + "'");
}

}  // namespace

CnnConfig preset(std::string_view name) { return lookup(name).config; }

Stage preset_stage(std::string_view name) { return lookup(name).stage; }

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& e : kPresets) names.emplace_back(e.name);
    return names;
}

std::string stage_name(Stage stage) {
    switch (stage) {
        case Stage::Coarse: return "coarse";
        case Stage::Fine: return "fine";
        case Stage::Single: return "single";
    }
    return "unknown";
}

Stage parse_stage(std::string_view name) {
    if (name == "coarse") return Stage::Coarse;
    if (name == "fine") return Stage::Fine;
    if (name == "single") return Stage::Single;
    throw std::invalid_argument("unknown stage '" + std::string(name) + "'");
}

}  // namespace pupilnet
