#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "wavedbn/ensemble.hpp"

namespace wavedbn {

/// 100 * (1 - accuracy).
inline double error_percent(double accuracy) { return 100.0 * (1.0 - accuracy); }

struct SplitReport {
    std::string name;  // "train", "test", "eval"
    EvaluationMetrics metrics;
};

/// One run's results. Written as `key=value` lines (one flat record, keys
/// dotted and zero-padded so they sort) and as a plain-text table.
struct ReportRecord {
    std::string command;
    bool has_training = false;
    std::array<DbnTiming, kSubbandCount> dbn_timings{};
    double total_wall_seconds = 0.0;
    std::vector<double> weights;
    std::vector<SplitReport> splits;
    std::string config_text;

    const SplitReport* split(const std::string& name) const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues to_key_values(const ReportRecord& report);

/// Serializes `key=value` lines; values never contain newlines.
std::string format_key_values(const KeyValues& kv);

/// Parses the output of format_key_values.
KeyValues parse_key_values(const std::string& text);

std::string format_table(const ReportRecord& report);

/// The monolithic-vs-ensemble comparison of the bench command.
struct BenchReport {
    ReportRecord ensemble;  // from the sequential run
    double sequential_wall_seconds = 0.0;
    double parallel_wall_seconds = 0.0;
    int parallel_workers = 0;
    bool parallel_matches_sequential = false;

    std::size_t subband_dbn_parameters = 0;
    std::size_t subband_input_dim = 0;
    std::size_t monolithic_parameters = 0;
    std::size_t monolithic_input_dim = 0;
    DbnTiming monolithic_timing;
    double monolithic_train_accuracy = 0.0;
    double monolithic_test_accuracy = 0.0;

    double mean_dbn_seconds() const;
    double max_dbn_seconds() const;
    /// Monolithic training time over mean per-DBN training time.
    double per_dbn_speedup() const;
};

KeyValues to_key_values(const BenchReport& bench);
std::string format_table(const BenchReport& bench);

/// Writes `<stem>.kv` and `<stem>.txt` under `dir`.
void write_report_files(const std::filesystem::path& dir, const std::string& stem, const KeyValues& kv,
                        const std::string& table);

} // namespace wavedbn
