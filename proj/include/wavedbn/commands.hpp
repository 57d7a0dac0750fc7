#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wavedbn/config.hpp"
#include "wavedbn/dataset.hpp"
#include "wavedbn/model_io.hpp"
#include "wavedbn/report.hpp"

namespace wavedbn {

struct ExperimentData {
    LabeledDataset train;
    LabeledDataset test;
};

/// Loads the configured dataset, keeps the configured classes and splits it
/// (USPS uses its standard train/test files instead of a hold-out split).
ExperimentData load_experiment_data(const RunConfig& config);

/// Loads a labelled set for evaluation: a regular file is read as USPS text,
/// a directory holding obj<k>__<angle>.pgm files as COIL-20, and any other
/// directory as one sub-directory per class.
LabeledDataset load_dataset_auto(const std::filesystem::path& path);

/// Preprocessing descriptor for images of `sample`'s size under `config`.
Preprocessing preprocessing_for(const RunConfig& config, const Image& sample);

EnsembleTrainOptions ensemble_options(const RunConfig& config);

struct TrainOutcome {
    ModelFile model;
    ReportRecord report;
};

/// load -> split -> train_ensemble -> evaluate on both splits. Writes
/// train_report.kv and train_report.txt into config.output_dir, then the
/// model to `model_path` (default: <output_dir>/model.wdbn).
TrainOutcome cmd_train(const RunConfig& config, const std::optional<std::filesystem::path>& model_path,
                       std::ostream& log);

/// Evaluates a saved model. With a config, reports both configured splits;
/// with a data path, reports the whole set as split "eval". Reports are
/// written to `out_dir` when given.
ReportRecord cmd_eval(const std::filesystem::path& model_path, const std::optional<RunConfig>& config,
                      const std::optional<std::filesystem::path>& data_path,
                      const std::optional<std::filesystem::path>& out_dir, std::ostream& log);

struct BandScale {
    double max_abs = 0.0;  // coefficient mapped to 255 (and its negative to 0)
};

/// Writes band_00.pgm .. band_15.pgm. Each band is mapped symmetrically so
/// that 0 becomes mid-gray: pixel = 127.5 * (1 + coefficient / max_abs).
std::vector<BandScale> cmd_decompose(const std::filesystem::path& image_path, const std::string& wavelet,
                                     const std::filesystem::path& out_dir, std::ostream& log);

/// Trains the ensemble sequentially and with `config.workers` workers, plus
/// one DBN on the raw (downsampled) pixels with the same hidden sizes, and
/// compares sizes, times and accuracies. Writes bench_report.{kv,txt}.
BenchReport cmd_bench(const RunConfig& config, std::ostream& log);

/// Prints architecture, weights, scalers and provenance.
void cmd_inspect(const std::filesystem::path& model_path, std::ostream& out);

} // namespace wavedbn
