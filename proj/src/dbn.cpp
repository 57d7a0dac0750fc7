#include "wavedbn/dbn.hpp"

#include <cmath>
#include <string>

#include "wavedbn/error.hpp"

namespace wavedbn {

namespace {

constexpr std::uint64_t kPretrainStream = 0x1000;
constexpr std::uint64_t kFinetuneStream = 0x2000;

void require_input(const Dbn& dbn, Eigen::Index n)
{
    if(n != dbn.input_dim())
        throw ValidationError("input has dimension " + std::to_string(n) + ", DBN expects "
                              + std::to_string(dbn.input_dim()));
}

void require_labels(const Dbn& dbn, const Matrix& data, std::span<const int> labels)
{
    if(data.rows() == 0)
        throw ValidationError("empty data set");
    if(static_cast<std::size_t>(data.rows()) != labels.size())
        throw ValidationError("data has " + std::to_string(data.rows()) + " rows but "
                              + std::to_string(labels.size()) + " labels");
    for(int label : labels) {
        if(label < 0 || label >= dbn.n_classes())
            throw ValidationError("label " + std::to_string(label) + " outside [0, "
                                  + std::to_string(dbn.n_classes()) + ")");
    }
}

void sigmoid_inplace(Matrix& m)
{
    m = m.unaryExpr([](double a) { return sigmoid(a); });
}

// Activations of every hidden layer; activations[0] is the input.
std::vector<Matrix> hidden_activations(const Dbn& dbn, const Matrix& data)
{
    std::vector<Matrix> acts;
    acts.reserve(dbn.layers.size() + 1);
    acts.push_back(data);
    for(const Rbm& layer : dbn.layers) {
        Matrix next = acts.back() * layer.weights;
        next.rowwise() += layer.hidden_bias.transpose();
        sigmoid_inplace(next);
        acts.push_back(std::move(next));
    }
    return acts;
}

Matrix logits_of(const Dbn& dbn, const Matrix& top)
{
    Matrix logits = top * dbn.softmax_weights;
    logits.rowwise() += dbn.softmax_bias.transpose();
    return logits;
}

void softmax_rows(Matrix& logits)
{
    for(Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double top = logits.row(i).maxCoeff();
        logits.row(i) = (logits.row(i).array() - top).exp().matrix();
        logits.row(i) /= logits.row(i).sum();
    }
}

Matrix gather_rows(const Matrix& data, const std::vector<Eigen::Index>& order,
                   std::size_t begin, std::size_t end)
{
    Matrix out(static_cast<Eigen::Index>(end - begin), data.cols());
    for(std::size_t i = begin; i < end; ++i)
        out.row(static_cast<Eigen::Index>(i - begin)) = data.row(order[i]);
    return out;
}

} // namespace

std::vector<int> Dbn::hidden_sizes() const
{
    std::vector<int> sizes;
    for(const Rbm& layer : layers)
        sizes.push_back(layer.n_hidden());
    return sizes;
}

std::size_t Dbn::parameter_count() const
{
    std::size_t count = 0;
    for(const Rbm& layer : layers)
        count += static_cast<std::size_t>(layer.weights.size() + layer.hidden_bias.size());
    return count + static_cast<std::size_t>(softmax_weights.size() + softmax_bias.size());
}

void Dbn::validate() const
{
    detail::require(!layers.empty(), "a DBN needs at least one RBM layer");
    for(std::size_t l = 0; l < layers.size(); ++l) {
        const Rbm& layer = layers[l];
        detail::require(layer.visible_bias.size() == layer.weights.rows()
                            && layer.hidden_bias.size() == layer.weights.cols(),
                        "RBM layer " + std::to_string(l) + " has inconsistent bias sizes");
        if(l + 1 < layers.size())
            detail::require(layer.n_hidden() == layers[l + 1].n_visible(),
                            "layer " + std::to_string(l) + " does not chain into layer " + std::to_string(l + 1));
    }
    detail::require(softmax_weights.rows() == layers.back().n_hidden(), "softmax head does not match the last hidden layer");
    detail::require(softmax_weights.cols() == softmax_bias.size() && softmax_bias.size() > 0,
                    "softmax head has inconsistent class count");
}

bool Dbn::all_finite() const
{
    for(const Rbm& layer : layers)
        if(!layer.all_finite())
            return false;
    return softmax_weights.allFinite() && softmax_bias.allFinite();
}

Dbn build_dbn(int input_dim, std::span<const int> hidden_sizes, int n_classes, std::uint64_t seed,
              VisibleKind visible_kind)
{
    detail::require(input_dim > 0, "input dimension must be positive");
    detail::require(!hidden_sizes.empty(), "hidden_sizes must not be empty");
    detail::require(n_classes > 0, "n_classes must be positive");
    for(int size : hidden_sizes)
        detail::require(size > 0, "hidden layer sizes must be positive");

    Rng rng(seed);
    Dbn dbn;
    int visible = input_dim;
    for(std::size_t l = 0; l < hidden_sizes.size(); ++l) {
        const VisibleKind kind = l == 0 ? visible_kind : VisibleKind::bernoulli_real;
        dbn.layers.push_back(Rbm::random(visible, hidden_sizes[l], rng, 0.01, kind));
        visible = hidden_sizes[l];
    }

    dbn.softmax_weights = Matrix::Zero(visible, n_classes);
    for(Eigen::Index j = 0; j < dbn.softmax_weights.cols(); ++j)
        for(Eigen::Index i = 0; i < dbn.softmax_weights.rows(); ++i)
            dbn.softmax_weights(i, j) = 0.01 * rng.normal();
    dbn.softmax_bias = Vector::Zero(n_classes);
    return dbn;
}

void DbnTrainConfig::validate() const
{
    pretrain.validate();
    detail::require(finetune_learning_rate > 0.0 && std::isfinite(finetune_learning_rate),
                    "finetune learning_rate must be positive");
    detail::require(finetune_epochs > 0, "finetune epochs must be a positive integer");
    detail::require(finetune_batch_size > 0, "finetune batch_size must be a positive integer");
}

RbmTrainConfig layer_pretrain_config(const DbnTrainConfig& cfg, std::size_t layer)
{
    RbmTrainConfig out = cfg.pretrain;
    out.seed = derive_seed(cfg.seed, kPretrainStream + layer);
    return out;
}

PretrainResult pretrain(Dbn dbn, const Matrix& data, const DbnTrainConfig& cfg)
{
    cfg.validate();
    dbn.validate();
    require_input(dbn, data.cols());

    PretrainResult result;
    Matrix layer_input = data;
    for(std::size_t l = 0; l < dbn.layers.size(); ++l) {
        RbmTrainResult trained = train_rbm(std::move(dbn.layers[l]), layer_input, layer_pretrain_config(cfg, l));
        dbn.layers[l] = std::move(trained.rbm);
        result.reconstruction_error.push_back(std::move(trained.reconstruction_error));
        if(l + 1 < dbn.layers.size())
            layer_input = hidden_probabilities(dbn.layers[l], layer_input);
    }
    result.dbn = std::move(dbn);
    return result;
}

Vector softmax(const Vector& logits)
{
    const double top = logits.maxCoeff();
    Vector out = (logits.array() - top).exp().matrix();
    return out / out.sum();
}

int argmax(std::span<const double> values)
{
    detail::require(!values.empty(), "argmax of an empty sequence");
    std::size_t best = 0;
    for(std::size_t i = 1; i < values.size(); ++i)
        if(values[i] > values[best])
            best = i;
    return static_cast<int>(best);
}

Vector forward(const Dbn& dbn, const Vector& v)
{
    require_input(dbn, v.size());
    Matrix row = v.transpose();
    return forward_batch(dbn, row).row(0).transpose();
}

Matrix forward_batch(const Dbn& dbn, const Matrix& data)
{
    require_input(dbn, data.cols());
    Matrix act = data;
    for(const Rbm& layer : dbn.layers) {
        Matrix next = act * layer.weights;
        next.rowwise() += layer.hidden_bias.transpose();
        sigmoid_inplace(next);
        act = std::move(next);
    }
    Matrix probs = logits_of(dbn, act);
    softmax_rows(probs);
    return probs;
}

int predict(const Dbn& dbn, const Vector& v)
{
    const Vector probs = forward(dbn, v);
    return argmax(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())));
}

std::vector<int> predict_batch(const Dbn& dbn, const Matrix& data)
{
    const Matrix probs = forward_batch(dbn, data);
    std::vector<int> out(static_cast<std::size_t>(probs.rows()));
    std::vector<double> row(static_cast<std::size_t>(probs.cols()));
    for(Eigen::Index i = 0; i < probs.rows(); ++i) {
        for(Eigen::Index j = 0; j < probs.cols(); ++j)
            row[static_cast<std::size_t>(j)] = probs(i, j);
        out[static_cast<std::size_t>(i)] = argmax(row);
    }
    return out;
}

double accuracy(const Dbn& dbn, const Matrix& data, std::span<const int> labels)
{
    require_labels(dbn, data, labels);
    const std::vector<int> predicted = predict_batch(dbn, data);
    std::size_t correct = 0;
    for(std::size_t i = 0; i < predicted.size(); ++i)
        if(predicted[i] == labels[i])
            ++correct;
    return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

double loss_and_gradient(const Dbn& dbn, const Matrix& data, std::span<const int> labels, DbnGradient* grad)
{
    require_input(dbn, data.cols());
    require_labels(dbn, data, labels);

    const std::vector<Matrix> acts = hidden_activations(dbn, data);
    const Matrix logits = logits_of(dbn, acts.back());
    const auto n = static_cast<double>(data.rows());

    double loss = 0.0;
    Matrix delta(logits.rows(), logits.cols());
    for(Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double top = logits.row(i).maxCoeff();
        const auto shifted = (logits.row(i).array() - top).eval();
        const double log_norm = std::log(shifted.exp().sum());
        const int y = labels[static_cast<std::size_t>(i)];
        loss += log_norm - shifted(y);
        delta.row(i) = (shifted - log_norm).exp().matrix();
        delta(i, y) -= 1.0;
    }
    loss /= n;
    if(grad == nullptr)
        return loss;

    delta /= n;
    grad->softmax_weights = acts.back().transpose() * delta;
    grad->softmax_bias = delta.colwise().sum().transpose();

    const std::size_t depth = dbn.layers.size();
    grad->weights.assign(depth, Matrix());
    grad->hidden_bias.assign(depth, Vector());

    Matrix upstream = delta * dbn.softmax_weights.transpose();
    for(std::size_t l = depth; l-- > 0;) {
        const Matrix& out = acts[l + 1];
        const Matrix local = upstream.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix()));
        grad->weights[l] = acts[l].transpose() * local;
        grad->hidden_bias[l] = local.colwise().sum().transpose();
        if(l > 0)
            upstream = local * dbn.layers[l].weights.transpose();
    }
    return loss;
}

FinetuneResult finetune(Dbn dbn, const Matrix& data, std::span<const int> labels,
                        const DbnTrainConfig& cfg, const EpochCallback& on_epoch)
{
    cfg.validate();
    dbn.validate();
    require_input(dbn, data.cols());
    require_labels(dbn, data, labels);

    Rng rng(derive_seed(cfg.seed, kFinetuneStream));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
    for(std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<Eigen::Index>(i);

    DbnGradient velocity;
    for(const Rbm& layer : dbn.layers) {
        velocity.weights.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
        velocity.hidden_bias.push_back(Vector::Zero(layer.hidden_bias.size()));
    }
    velocity.softmax_weights = Matrix::Zero(dbn.softmax_weights.rows(), dbn.softmax_weights.cols());
    velocity.softmax_bias = Vector::Zero(dbn.softmax_bias.size());

    FinetuneResult result;
    const auto batch = static_cast<std::size_t>(cfg.finetune_batch_size);
    const double lr = cfg.finetune_learning_rate;
    std::vector<int> batch_labels;
    DbnGradient grad;

    for(int epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
        const double momentum =
            epoch < cfg.pretrain.momentum_switch_epoch ? cfg.pretrain.momentum_initial : cfg.pretrain.momentum_final;
        rng.shuffle(order);

        double epoch_loss = 0.0;
        for(std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(begin + batch, order.size());
            const Matrix mini = gather_rows(data, order, begin, end);
            batch_labels.clear();
            for(std::size_t i = begin; i < end; ++i)
                batch_labels.push_back(labels[static_cast<std::size_t>(order[i])]);

            const double loss = loss_and_gradient(dbn, mini, batch_labels, &grad);
            epoch_loss += loss * static_cast<double>(end - begin);

            for(std::size_t l = 0; l < dbn.layers.size(); ++l) {
                velocity.weights[l] = momentum * velocity.weights[l] - lr * grad.weights[l];
                velocity.hidden_bias[l] = momentum * velocity.hidden_bias[l] - lr * grad.hidden_bias[l];
                dbn.layers[l].weights += velocity.weights[l];
                dbn.layers[l].hidden_bias += velocity.hidden_bias[l];
            }
            velocity.softmax_weights = momentum * velocity.softmax_weights - lr * grad.softmax_weights;
            velocity.softmax_bias = momentum * velocity.softmax_bias - lr * grad.softmax_bias;
            dbn.softmax_weights += velocity.softmax_weights;
            dbn.softmax_bias += velocity.softmax_bias;
        }

        epoch_loss /= static_cast<double>(order.size());
        if(!std::isfinite(epoch_loss) || !dbn.all_finite())
            throw NumericalError("fine-tuning diverged at epoch " + std::to_string(epoch + 1));
        result.loss.push_back(epoch_loss);

        if(on_epoch && !on_epoch(epoch, dbn))
            break;
    }

    result.dbn = std::move(dbn);
    return result;
}

} // namespace wavedbn
