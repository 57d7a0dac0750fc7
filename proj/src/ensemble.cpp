#include "wavedbn/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include "wavedbn/error.hpp"

namespace wavedbn {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kInitStream = 0x3000;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_image_size(const Preprocessing& prep, const Image& image)
{
    if(image.width != prep.input_width || image.height != prep.input_height)
        throw ValidationError("image is " + std::to_string(image.width) + "x" + std::to_string(image.height)
                              + ", model expects " + std::to_string(prep.input_width) + "x"
                              + std::to_string(prep.input_height));
}

// Runs task(j) for j in [0, count) on up to `workers` threads and rethrows
// the first failure (lowest j) after all threads have joined.
template <typename Task>
void run_indexed(std::size_t count, int workers, Task task)
{
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for(std::size_t j = next++; j < count; j = next++) {
            try {
                task(j);
            } catch(...) {
                errors[j] = std::current_exception();
            }
        }
    };

    std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                      : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if(threads <= 1) {
        drain();
    } else {
        std::vector<std::jthread> pool;
        for(std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(drain);
    }

    for(const auto& e : errors)
        if(e)
            std::rethrow_exception(e);
}

} // namespace

double SubbandScaler::apply(double value) const
{
    if(!(min < max))
        return 0.0;
    return (std::clamp(value, min, max) - min) / (max - min);
}

void Preprocessing::validate() const
{
    detail::require(downsample == 1 || downsample == 2, "downsample factor must be 1 or 2");
    detail::require(input_width > 0 && input_height > 0, "input dimensions must be positive");
    detail::require(input_width % (4 * downsample) == 0 && input_height % (4 * downsample) == 0,
                    "input " + std::to_string(input_width) + "x" + std::to_string(input_height)
                        + " is not divisible by 4 after downsampling by " + std::to_string(downsample));
    filter_by_name(wavelet);
}

void EnsembleModel::validate() const
{
    preprocessing.validate();
    detail::require(dbns.size() == kSubbandCount, "an ensemble needs exactly 16 DBNs");
    detail::require(weights.size() == kSubbandCount, "an ensemble needs exactly 16 weights");
    detail::require(n_classes > 0, "n_classes must be positive");
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        dbns[j].validate();
        detail::require(weights[j] >= 0.0 && weights[j] <= 1.0, "ensemble weight outside [0,1]");
        detail::require(dbns[j].n_classes() == n_classes, "DBN class count differs from the ensemble's");
        detail::require(dbns[j].input_dim() == preprocessing.band_size(), "DBN input size does not match the sub-band size");
        detail::require(dbns[j].hidden_sizes() == dbns[0].hidden_sizes(), "ensemble DBNs must share one architecture");
    }
}

double compute_weight(const Dbn& dbn, const Matrix& data, std::span<const int> labels)
{
    return accuracy(dbn, data, labels);
}

VoteTally weighted_vote(std::span<const int> predictions, std::span<const double> weights, int n_classes)
{
    detail::require(n_classes > 0, "n_classes must be positive");
    detail::require(predictions.size() == kSubbandCount && weights.size() == kSubbandCount,
                    "weighted_vote needs 16 predictions and 16 weights");

    VoteTally tally;
    tally.totals.assign(static_cast<std::size_t>(n_classes), 0.0);
    std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
    bool any_weight = false;
    for(std::size_t j = 0; j < predictions.size(); ++j) {
        const int p = predictions[j];
        if(p < 0 || p >= n_classes)
            throw ValidationError("prediction " + std::to_string(p) + " outside [0, " + std::to_string(n_classes) + ")");
        detail::require(weights[j] >= 0.0, "vote weights must be nonnegative");
        tally.totals[static_cast<std::size_t>(p)] += weights[j];
        counts[static_cast<std::size_t>(p)] += 1.0;
        any_weight = any_weight || weights[j] > 0.0;
    }
    tally.predicted = argmax(any_weight ? tally.totals : counts);
    return tally;
}

SubbandSet preprocess_image(const Preprocessing& prep, const Image& image)
{
    require_image_size(prep, image);
    const WaveletFilter filter = filter_by_name(prep.wavelet);
    if(prep.downsample == 2)
        return decompose_full_2level(downsample_2x(image), filter);
    return decompose_full_2level(image, filter);
}

std::array<Matrix, kSubbandCount> subband_features(const Preprocessing& prep, std::span<const Image> images,
                                                   const std::array<SubbandScaler, kSubbandCount>* scalers)
{
    prep.validate();
    const auto rows = static_cast<Eigen::Index>(images.size());
    const Eigen::Index cols = prep.band_size();

    std::array<Matrix, kSubbandCount> out;
    for(Matrix& m : out)
        m.resize(rows, cols);

    for(Eigen::Index i = 0; i < rows; ++i) {
        const SubbandSet set = preprocess_image(prep, images[static_cast<std::size_t>(i)]);
        for(std::size_t j = 0; j < kSubbandCount; ++j) {
            const std::vector<double> flat = flatten(set.subbands[j]);
            for(Eigen::Index c = 0; c < cols; ++c) {
                const double value = flat[static_cast<std::size_t>(c)];
                out[j](i, c) = scalers != nullptr ? (*scalers)[j].apply(value) : value;
            }
        }
    }
    return out;
}

std::array<SubbandScaler, kSubbandCount> fit_scalers(const std::array<Matrix, kSubbandCount>& raw)
{
    std::array<SubbandScaler, kSubbandCount> scalers{};
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        detail::require(raw[j].size() > 0, "cannot fit scalers on an empty set");
        scalers[j] = {raw[j].minCoeff(), raw[j].maxCoeff()};
    }
    return scalers;
}

EnsembleTrainResult train_ensemble(std::span<const Image> images, std::span<const int> labels, int n_classes,
                                   const EnsembleTrainOptions& options)
{
    const auto start = Clock::now();
    const Preprocessing& prep = options.preprocessing;
    prep.validate();
    options.train.validate();
    detail::require(!images.empty(), "train_ensemble needs training images");
    detail::require(images.size() == labels.size(), "one label per training image is required");
    detail::require(n_classes > 0, "n_classes must be positive");
    detail::require(!options.hidden_sizes.empty(), "hidden_sizes must not be empty");
    for(int label : labels)
        detail::require(label >= 0 && label < n_classes, "training label " + std::to_string(label) + " out of range");
    for(const Image& img : images)
        require_image_size(prep, img);

    std::array<Matrix, kSubbandCount> features = subband_features(prep, images, nullptr);
    EnsembleTrainResult result;
    EnsembleModel& model = result.model;
    model.n_classes = n_classes;
    model.preprocessing = prep;
    model.scalers = fit_scalers(features);
    for(std::size_t j = 0; j < kSubbandCount; ++j)
        features[j] = features[j].unaryExpr([&s = model.scalers[j]](double v) { return s.apply(v); });

    model.dbns.resize(kSubbandCount);
    run_indexed(kSubbandCount, options.workers, [&](std::size_t j) {
        DbnTrainConfig cfg = options.train;
        cfg.seed = dbn_seed(options.train.seed, j);
        Dbn dbn = build_dbn(prep.band_size(), options.hidden_sizes, n_classes, derive_seed(cfg.seed, kInitStream),
                            options.visible_kind);

        auto phase = Clock::now();
        dbn = pretrain(std::move(dbn), features[j], cfg).dbn;
        result.timings[j].pretrain_seconds = seconds_since(phase);

        phase = Clock::now();
        dbn = finetune(std::move(dbn), features[j], labels, cfg).dbn;
        result.timings[j].finetune_seconds = seconds_since(phase);

        model.dbns[j] = std::move(dbn);
    });

    model.weights.resize(kSubbandCount);
    for(std::size_t j = 0; j < kSubbandCount; ++j)
        model.weights[j] = compute_weight(model.dbns[j], features[j], labels);

    result.wall_seconds = seconds_since(start);
    return result;
}

EnsemblePrediction predict_ensemble(const EnsembleModel& model, const Image& image)
{
    const SubbandSet set = preprocess_image(model.preprocessing, image);
    EnsemblePrediction out;
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        Vector v(static_cast<Eigen::Index>(set.subbands[j].size()));
        for(Eigen::Index c = 0; c < v.size(); ++c)
            v[c] = model.scalers[j].apply(set.subbands[j].pixels[static_cast<std::size_t>(c)]);
        out.per_dbn[j] = predict(model.dbns[j], v);
    }
    out.tally = weighted_vote(out.per_dbn, model.weights, model.n_classes);
    out.predicted = out.tally.predicted;
    return out;
}

EvaluationMetrics evaluate_ensemble(const EnsembleModel& model, std::span<const Image> images,
                                    std::span<const int> labels)
{
    detail::require(!images.empty(), "evaluation needs a nonempty test set");
    detail::require(images.size() == labels.size(), "one label per test image is required");
    for(int label : labels)
        detail::require(label >= 0 && label < model.n_classes,
                        "test label " + std::to_string(label) + " outside [0, " + std::to_string(model.n_classes) + ")");

    const auto start = Clock::now();
    const std::array<Matrix, kSubbandCount> features = subband_features(model.preprocessing, images, &model.scalers);

    EvaluationMetrics m;
    m.total = images.size();
    m.weights = model.weights;
    std::array<std::vector<int>, kSubbandCount> per_dbn;
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        const auto t0 = Clock::now();
        per_dbn[j] = predict_batch(model.dbns[j], features[j]);
        m.per_dbn_seconds.push_back(seconds_since(t0));

        std::size_t correct = 0;
        for(std::size_t i = 0; i < labels.size(); ++i)
            correct += per_dbn[j][i] == labels[i] ? 1 : 0;
        m.per_dbn_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(labels.size()));
    }

    const auto n = static_cast<std::size_t>(model.n_classes);
    m.confusion.assign(n, std::vector<std::size_t>(n, 0));
    std::array<int, kSubbandCount> votes{};
    std::size_t correct = 0;
    for(std::size_t i = 0; i < images.size(); ++i) {
        for(std::size_t j = 0; j < kSubbandCount; ++j)
            votes[j] = per_dbn[j][i];
        const int predicted = weighted_vote(votes, model.weights, model.n_classes).predicted;
        m.predictions.push_back(predicted);
        ++m.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predicted)];
        correct += predicted == labels[i] ? 1 : 0;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(images.size());

    for(std::size_t c = 0; c < n; ++c) {
        std::size_t row_total = 0;
        for(std::size_t p = 0; p < n; ++p)
            row_total += m.confusion[c][p];
        m.per_class_accuracy.push_back(row_total == 0 ? 0.0
                                                      : static_cast<double>(m.confusion[c][c]) / static_cast<double>(row_total));
    }
    m.total_seconds = seconds_since(start);
    return m;
}

} // namespace wavedbn
