#include <gtest/gtest.h>

#include <sstream>

#include "oracles.h"
#include "pupilnet/model_io.h"
#include "pupilnet/presets.h"

namespace pupilnet {
namespace {

std::string serialized(const CnnModel& m) {
    std::ostringstream out;
    write_model(m, out);
    return out.str();
}

ModelFormatError::Kind failure_kind(const std::string& bytes) {
    std::istringstream in(bytes);
    try {
        read_model(in);
    } catch (const ModelFormatError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "read_model accepted bad input";
    return ModelFormatError::Kind::Io;
}

TEST(ModelIo, RoundTripIsBitExact) {
    for (const auto& name : preset_names()) {
        const CnnModel m = oracle::random_model(preset(name), 42);
        std::istringstream in(serialized(m));
        EXPECT_EQ(read_model(in), m) << name;
    }
}

TEST(ModelIo, HeaderLayout) {
    const std::string bytes = serialized(init_model(preset("C_K8P8"), 1));
    EXPECT_EQ(bytes.substr(0, 4), "PNET");
    EXPECT_EQ(bytes[4], 1);
    const std::size_t weights = 8 * 25 + 8 + 8 * 200 + 8 + 8 + 1;
    EXPECT_EQ(bytes.size(), 4 + 4 + 7 * 4 + 8 * weights);
}

TEST(ModelIo, DetectsCorruption) {
    const std::string good = serialized(init_model(preset("C_K4P8"), 1));
    std::string bad = good;
    bad[0] = 'X';
    EXPECT_EQ(failure_kind(bad), ModelFormatError::Kind::BadMagic);
    bad = good;
    bad[4] = 2;
    EXPECT_EQ(failure_kind(bad), ModelFormatError::Kind::VersionMismatch);
    EXPECT_EQ(failure_kind(good.substr(0, good.size() - 3)), ModelFormatError::Kind::TruncatedStream);
    EXPECT_EQ(failure_kind(good.substr(0, 10)), ModelFormatError::Kind::TruncatedStream);
    EXPECT_EQ(failure_kind(good + "x"), ModelFormatError::Kind::DimensionMismatch);
    bad = good;
    bad[8] = 0;  // input_size 0
    EXPECT_EQ(failure_kind(bad), ModelFormatError::Kind::DimensionMismatch);
}

TEST(ModelIo, MissingFileIsIoError) {
    try {
        load_model("/nonexistent/model.pnet");
        FAIL();
    } catch (const ModelFormatError& e) {
        EXPECT_EQ(e.kind(), ModelFormatError::Kind::Io);
    }
}

}  // namespace
}  // namespace pupilnet
