#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "wavedbn/ensemble.hpp"

namespace wavedbn {

inline constexpr std::string_view kModelMagic = "WAVEDBN";
inline constexpr int kModelFormatVersion = 1;

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string timestamp;  // UTC, ISO 8601

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ModelFile {
    EnsembleModel model;
    Provenance provenance;
};

/// Serializes a model as versioned plain text. Every real number is written
/// in scientific notation with 17 significant digits, so parsing the text
/// gives back the identical binary64 values.
///
/// Layout (whitespace separated tokens, one record per line):
///
///     WAVEDBN
///     version 1
///     input_width W / input_height H / downsample D / wavelet NAME
///     n_classes C
///     weights w0 .. w15
///     scaler J MIN MAX                        (16 lines)
///     dbn J / layers L
///       rbm NV NH KIND / weights (NV rows of NH) / visible_bias / hidden_bias
///       softmax NH C / softmax_weights (NH rows of C) / softmax_bias
///     end_dbn
///     provenance config_hash HEX / seed N / timestamp ISO
///     end
std::string format_model(const ModelFile& file);

/// Parses text produced by format_model. Throws IoError with the byte offset
/// of the first violation; a version other than kModelFormatVersion is
/// refused.
ModelFile parse_model(std::string_view text);

/// Writes via a temporary file and rename, so a failed save leaves nothing
/// behind at `path`.
void save_model(const std::filesystem::path& path, const ModelFile& file);

ModelFile load_model(const std::filesystem::path& path);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

} // namespace wavedbn
