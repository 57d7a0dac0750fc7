#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavedbn/dbn.hpp"
#include "wavedbn/image.hpp"
#include "wavedbn/wavelet.hpp"

namespace wavedbn {

/// Affine map of one sub-band's coefficients onto [0,1], fitted on the
/// training set. Values outside the fitted range are clamped; a degenerate
/// range (max == min) maps everything to 0.
struct SubbandScaler {
    double min = 0.0;
    double max = 0.0;

    double apply(double value) const;

    friend bool operator==(const SubbandScaler&, const SubbandScaler&) = default;
};

/// How raw images become DBN inputs.
struct Preprocessing {
    int input_width = 0;
    int input_height = 0;
    int downsample = 1;  // 1 (none) or 2 (2x2 box mean)
    std::string wavelet = "haar";

    void validate() const;

    /// Side lengths of each sub-band after downsampling and decomposition.
    int band_width() const { return input_width / downsample / 4; }
    int band_height() const { return input_height / downsample / 4; }
    int band_size() const { return band_width() * band_height(); }

    friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

/// Sixteen DBNs, one per sub-band, with their voting weights.
struct EnsembleModel {
    std::vector<Dbn> dbns;         // index j is sub-band j
    std::vector<double> weights;   // training accuracy of dbns[j]
    int n_classes = 0;
    std::array<SubbandScaler, kSubbandCount> scalers{};
    Preprocessing preprocessing;

    void validate() const;

    friend bool operator==(const EnsembleModel&, const EnsembleModel&) = default;
};

struct VoteTally {
    std::vector<double> totals;  // accumulated weight per class
    int predicted = 0;
};

/// 1 - misclassified / total on the given set.
double compute_weight(const Dbn& dbn, const Matrix& data, std::span<const int> labels);

/// Adds weights[j] to the tally of predictions[j] (16 of each) and returns the class with
/// the largest total, lowest index on ties. If every weight is zero the
/// tally degenerates, and the unweighted plurality decides instead.
VoteTally weighted_vote(std::span<const int> predictions, std::span<const double> weights, int n_classes);

/// Downsample (if configured) and decompose one image, before scaling.
SubbandSet preprocess_image(const Preprocessing& prep, const Image& image);

/// Per-sub-band feature matrices (one flattened sub-band per row), scaled
/// with `scalers` when given and raw otherwise.
std::array<Matrix, kSubbandCount> subband_features(const Preprocessing& prep, std::span<const Image> images,
                                                   const std::array<SubbandScaler, kSubbandCount>* scalers);

/// Fits min/max scalers over every coefficient of each sub-band matrix.
std::array<SubbandScaler, kSubbandCount> fit_scalers(const std::array<Matrix, kSubbandCount>& raw);

struct DbnTiming {
    double pretrain_seconds = 0.0;
    double finetune_seconds = 0.0;

    double total() const { return pretrain_seconds + finetune_seconds; }
};

struct EnsembleTrainResult {
    EnsembleModel model;
    std::array<DbnTiming, kSubbandCount> timings{};
    double wall_seconds = 0.0;
};

struct EnsembleTrainOptions {
    std::vector<int> hidden_sizes;
    DbnTrainConfig train;  // train.seed is the master seed
    Preprocessing preprocessing;
    VisibleKind visible_kind = VisibleKind::bernoulli_real;
    /// Concurrent DBN trainings; 0 means one per hardware thread.
    int workers = 0;
};

/// Seed of DBN j: master + j.
inline std::uint64_t dbn_seed(std::uint64_t master, std::size_t j) { return master + j; }

/// Trains the 16 sub-band DBNs (build, pretrain, finetune) and weights each
/// by its training accuracy. The result does not depend on `workers`.
EnsembleTrainResult train_ensemble(std::span<const Image> images, std::span<const int> labels, int n_classes,
                                   const EnsembleTrainOptions& options);

struct EnsemblePrediction {
    int predicted = 0;
    VoteTally tally;
    std::array<int, kSubbandCount> per_dbn{};
};

EnsemblePrediction predict_ensemble(const EnsembleModel& model, const Image& image);

struct EvaluationMetrics {
    std::size_t total = 0;
    double accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
    std::vector<double> per_dbn_accuracy;
    std::vector<double> weights;
    std::vector<double> per_dbn_seconds;  // inference time of each DBN
    double total_seconds = 0.0;
    std::vector<int> predictions;
};

EvaluationMetrics evaluate_ensemble(const EnsembleModel& model, std::span<const Image> images,
                                    std::span<const int> labels);

} // namespace wavedbn
