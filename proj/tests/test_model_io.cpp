#include <gtest/gtest.h>

#include <cctype>
#include <regex>

#include "support.hpp"
#include "wavedbn/error.hpp"
#include "wavedbn/model_io.hpp"

using namespace wavedbn;
using testing_support::random_ensemble;
using testing_support::TempDir;

namespace {

ModelFile sample_file(std::uint64_t seed = 3)
{
    return ModelFile{random_ensemble(16, 2, {3, 2}, 4, seed), Provenance{"0123456789abcdef", seed, "2026-01-02T03:04:05Z"}};
}

std::string io_error_of(std::string_view text)
{
    try {
        parse_model(text);
    } catch(const IoError& e) {
        return e.what();
    }
    return "";
}

std::string without_timestamp(std::string text)
{
    return std::regex_replace(text, std::regex("timestamp \\S+"), "timestamp _");
}

} // namespace

TEST(ModelIo, RoundTripIsExact)
{
    for(std::uint64_t seed : {1, 2, 3}) {
        const ModelFile file = sample_file(seed);
        const std::string text = format_model(file);
        const ModelFile back = parse_model(text);
        EXPECT_TRUE(back.model == file.model);
        EXPECT_EQ(back.provenance, file.provenance);
        EXPECT_EQ(format_model(back), text);
    }
}

TEST(ModelIo, ExtremeValuesSurvive)
{
    ModelFile file = sample_file();
    file.model.dbns[5].layers[0].weights(0, 0) = 4.9406564584124654e-324;
    file.model.dbns[5].layers[0].weights(1, 0) = -1.7976931348623157e308;
    file.model.dbns[5].softmax_bias[1] = 0.1 + 0.2;
    file.model.scalers[2] = {-0.0, 0.0};
    const ModelFile back = parse_model(format_model(file));
    EXPECT_TRUE(back.model == file.model);
}

TEST(ModelIo, SaveLoadSaveMatchesExceptTimestamp)
{
    TempDir dir;
    ModelFile file = sample_file();
    save_model(dir / "m.wdbn", file);
    EXPECT_FALSE(std::filesystem::exists(dir / "m.wdbn.tmp"));
    ModelFile loaded = load_model(dir / "m.wdbn");
    loaded.provenance.timestamp = utc_timestamp();
    save_model(dir / "n.wdbn", loaded);
    EXPECT_EQ(without_timestamp(testing_support::read_text(dir / "m.wdbn")),
              without_timestamp(testing_support::read_text(dir / "n.wdbn")));
    EXPECT_TRUE(std::regex_match(utc_timestamp(), std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
}

TEST(ModelIo, EveryTruncationReportsByteOffset)
{
    const std::string text = format_model(ModelFile{random_ensemble(4, 1, {1}, 2, 9), Provenance{"ab", 9, "t"}});
    std::size_t last = text.size();
    while(last > 0 && std::isspace(static_cast<unsigned char>(text[last - 1])))
        --last;
    // Any cut before the final token is complete must be refused.
    for(std::size_t cut = 0; cut < last; ++cut) {
        const std::string message = io_error_of(std::string_view(text).substr(0, cut));
        ASSERT_NE(message.find("byte offset"), std::string::npos) << "cut at " << cut << ": '" << message << "'";
    }
    EXPECT_NO_THROW(parse_model(text.substr(0, last)));
}

TEST(ModelIo, CorruptTokenOffsetPointsAtIt)
{
    std::string text = format_model(sample_file());
    const auto at = text.find("scaler 7 ") + 9;
    text.replace(at, 1, "x");
    const std::string message = io_error_of(text);
    EXPECT_NE(message.find("byte offset " + std::to_string(at)), std::string::npos) << message;
}

TEST(ModelIo, RefusesOtherVersionsAndMagic)
{
    std::string text = format_model(sample_file());
    std::string v2 = text;
    v2.replace(v2.find("version 1"), 9, "version 2");
    const std::string message = io_error_of(v2);
    EXPECT_NE(message.find("version 2"), std::string::npos) << message;
    EXPECT_NE(message.find("not supported"), std::string::npos) << message;

    EXPECT_NE(io_error_of("WAVEDBM\nversion 1\n").find("bad magic"), std::string::npos);
    EXPECT_NE(io_error_of(text + "extra\n").find("trailing"), std::string::npos);
}

TEST(ModelIo, InconsistentModelsAreRefused)
{
    std::string text = format_model(sample_file());
    text.replace(text.find("n_classes 4"), 11, "n_classes 5");
    EXPECT_THROW(parse_model(text), IoError);

    std::string weight = format_model(sample_file());
    const auto at = weight.find("weights ") + 8;
    weight.replace(at, weight.find(' ', at) - at, "1.5");
    EXPECT_NE(io_error_of(weight).find("inconsistent"), std::string::npos);
}

TEST(ModelIo, LoadErrorsNamePath)
{
    TempDir dir;
    try {
        load_model(dir / "missing.wdbn");
        FAIL();
    } catch(const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("missing.wdbn"), std::string::npos);
    }
    EXPECT_THROW(save_model(dir / "no" / "such" / "dir.wdbn", sample_file()), IoError);
}
