#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wavedbn/rbm.hpp"

namespace wavedbn {

/// A stack of RBMs topped by a softmax classifier. Layer l's hidden size is
/// layer l+1's visible size; the head maps the last hidden layer to classes.
struct Dbn {
    std::vector<Rbm> layers;
    Matrix softmax_weights;  // last hidden x n_classes
    Vector softmax_bias;     // n_classes

    int input_dim() const { return layers.front().n_visible(); }
    int n_classes() const { return static_cast<int>(softmax_bias.size()); }
    std::vector<int> hidden_sizes() const;

    /// Parameters of the discriminative network: every RBM's weights and
    /// hidden biases plus the head. RBM visible biases only matter for
    /// pre-training and are not counted.
    std::size_t parameter_count() const;

    /// Throws ValidationError if dimensions do not chain.
    void validate() const;

    bool all_finite() const;

    friend bool operator==(const Dbn& a, const Dbn& b)
    {
        return a.layers == b.layers && a.softmax_weights == b.softmax_weights
               && a.softmax_bias == b.softmax_bias;
    }
};

/// Builds an untrained DBN. RBM weights and head weights are N(0, 0.01^2),
/// biases zero. `visible_kind` applies to the first layer only.
Dbn build_dbn(int input_dim, std::span<const int> hidden_sizes, int n_classes, std::uint64_t seed,
              VisibleKind visible_kind = VisibleKind::bernoulli_real);

struct DbnTrainConfig {
    /// Per-layer CD settings. Its seed is ignored; see layer_pretrain_config.
    RbmTrainConfig pretrain;
    double finetune_learning_rate = 0.1;
    int finetune_epochs = 300;
    int finetune_batch_size = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

/// The RBM configuration used for layer `layer`: cfg.pretrain with a seed
/// derived from cfg.seed.
RbmTrainConfig layer_pretrain_config(const DbnTrainConfig& cfg, std::size_t layer);

struct PretrainResult {
    Dbn dbn;
    std::vector<std::vector<double>> reconstruction_error;  // per layer, per epoch
};

/// Greedy layer-wise CD training. Layer l+1 trains on the hidden
/// probabilities of the trained layer l. The head is left untouched.
PretrainResult pretrain(Dbn dbn, const Matrix& data, const DbnTrainConfig& cfg);

/// Numerically stable softmax (max subtraction).
Vector softmax(const Vector& logits);

/// Index of the largest element, lowest index on ties.
int argmax(std::span<const double> values);

/// Class probabilities for one input: sigmoid hidden layers, softmax head.
Vector forward(const Dbn& dbn, const Vector& v);

/// Row-wise batch version of forward.
Matrix forward_batch(const Dbn& dbn, const Matrix& data);

int predict(const Dbn& dbn, const Vector& v);
std::vector<int> predict_batch(const Dbn& dbn, const Matrix& data);

/// Fraction of rows whose prediction matches the label.
double accuracy(const Dbn& dbn, const Matrix& data, std::span<const int> labels);

/// Gradient of the mean cross-entropy with respect to every parameter that
/// fine-tuning updates.
struct DbnGradient {
    std::vector<Matrix> weights;
    std::vector<Vector> hidden_bias;
    Matrix softmax_weights;
    Vector softmax_bias;
};

/// Mean cross-entropy over the rows of `data`; fills `grad` when non-null.
double loss_and_gradient(const Dbn& dbn, const Matrix& data, std::span<const int> labels,
                         DbnGradient* grad = nullptr);

struct FinetuneResult {
    Dbn dbn;
    std::vector<double> loss;  // mean cross-entropy per epoch
};

/// Called after every epoch with the 0-based epoch index; return false to
/// stop early.
using EpochCallback = std::function<bool(int epoch, const Dbn& dbn)>;

/// Mini-batch SGD on the cross-entropy through all layers, using the
/// momentum schedule of cfg.pretrain. Shuffling is seeded from cfg.seed.
FinetuneResult finetune(Dbn dbn, const Matrix& data, std::span<const int> labels,
                        const DbnTrainConfig& cfg, const EpochCallback& on_epoch = {});

} // namespace wavedbn
