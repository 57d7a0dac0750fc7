#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wavedbn/dataset.hpp"
#include "wavedbn/dbn.hpp"

namespace wavedbn {

enum class DatasetKind { coil20, usps, generic_pgm_dir };

std::string to_string(DatasetKind kind);

/// Everything one experiment needs. Serialized as an INI-style text file:
///
///     # comment
///     [section]
///     key = value
///
/// Sections and keys are fixed (see default_config_text()); unknown or
/// repeated keys are errors. Lists are comma separated.
struct RunConfig {
    DatasetKind dataset = DatasetKind::coil20;
    std::filesystem::path data_path;   // coil20 and generic-pgm-dir
    std::filesystem::path train_path;  // usps
    std::filesystem::path test_path;   // usps
    std::vector<int> classes;          // empty keeps all classes

    int downsample = 2;
    std::string wavelet = "haar";

    std::vector<int> hidden_sizes{40, 20, 20};
    VisibleKind visible_kind = VisibleKind::bernoulli_real;

    DbnTrainConfig train;  // train.seed mirrors `seed`

    double train_fraction = 0.7;
    bool stratified = true;
    std::optional<std::uint64_t> split_seed;  // defaults to `seed`

    std::uint64_t seed = 1;
    int workers = 0;  // 0: one per hardware thread
    std::filesystem::path output_dir = "out";

    SplitSpec split_spec() const { return {train_fraction, split_seed.value_or(seed), stratified}; }

    /// Checks every field against the preconditions of the modules it feeds.
    /// Throws ValidationError naming the offending key.
    void validate() const;
};

/// Parses and validates configuration text; `source` names it in messages.
RunConfig parse_run_config(std::string_view text, const std::string& source = "config");

RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical text form. Round-trips through parse_run_config. Paths are
/// kept as written (relative paths resolve against the working directory).
std::string format_run_config(const RunConfig& config);

/// The defaults, as printed by --print-defaults.
std::string default_config_text();

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

} // namespace wavedbn
