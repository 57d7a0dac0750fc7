#include "wavedbn/rbm.hpp"

#include <cmath>

#include "wavedbn/error.hpp"

namespace wavedbn {

namespace {

void require_visible(const Rbm& rbm, Eigen::Index n)
{
    if(n != rbm.weights.rows())
        throw ValidationError("visible vector has length " + std::to_string(n) + ", expected "
                              + std::to_string(rbm.weights.rows()));
}

void require_hidden(const Rbm& rbm, Eigen::Index n)
{
    if(n != rbm.weights.cols())
        throw ValidationError("hidden vector has length " + std::to_string(n) + ", expected "
                              + std::to_string(rbm.weights.cols()));
}

void require_enumerable(const Rbm& rbm)
{
    if(rbm.visible_kind != VisibleKind::bernoulli_real)
        throw ValidationError("exact enumeration needs binary (bernoulli_real) visible units");
    if(rbm.n_visible() + rbm.n_hidden() > kMaxEnumerationUnits)
        throw ValidationError("exact enumeration limited to " + std::to_string(kMaxEnumerationUnits)
                              + " units in total");
}

Vector bits_to_vector(std::uint64_t bits, int n)
{
    Vector v(n);
    for(int i = 0; i < n; ++i)
        v[i] = static_cast<double>((bits >> i) & 1u);
    return v;
}

Matrix logistic(const Matrix& x)
{
    return x.unaryExpr([](double a) { return sigmoid(a); });
}

// Gathers rows `order[begin, end)` of `data`.
Matrix gather_rows(const Matrix& data, const std::vector<Eigen::Index>& order,
                   std::size_t begin, std::size_t end)
{
    Matrix out(static_cast<Eigen::Index>(end - begin), data.cols());
    for(std::size_t i = begin; i < end; ++i)
        out.row(static_cast<Eigen::Index>(i - begin)) = data.row(order[i]);
    return out;
}

} // namespace

std::string to_string(VisibleKind kind)
{
    return kind == VisibleKind::gaussian ? "gaussian" : "bernoulli_real";
}

VisibleKind visible_kind_from_string(const std::string& name)
{
    if(name == "bernoulli_real")
        return VisibleKind::bernoulli_real;
    if(name == "gaussian")
        return VisibleKind::gaussian;
    throw ValidationError("unknown visible kind '" + name + "' (expected bernoulli_real or gaussian)");
}

Rbm Rbm::zeros(int n_visible, int n_hidden, VisibleKind kind)
{
    detail::require(n_visible > 0 && n_hidden > 0, "RBM layer sizes must be positive");
    return Rbm{Matrix::Zero(n_visible, n_hidden), Vector::Zero(n_visible), Vector::Zero(n_hidden), kind};
}

Rbm Rbm::random(int n_visible, int n_hidden, Rng& rng, double stddev, VisibleKind kind)
{
    Rbm rbm = zeros(n_visible, n_hidden, kind);
    // Column-major fill order; fixed for reproducibility.
    for(Eigen::Index j = 0; j < rbm.weights.cols(); ++j)
        for(Eigen::Index i = 0; i < rbm.weights.rows(); ++i)
            rbm.weights(i, j) = stddev * rng.normal();
    return rbm;
}

bool Rbm::all_finite() const
{
    return weights.allFinite() && visible_bias.allFinite() && hidden_bias.allFinite();
}

double sigmoid(double x)
{
    if(x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x)
{
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double energy(const Rbm& rbm, const Vector& v, const Vector& h)
{
    require_visible(rbm, v.size());
    require_hidden(rbm, h.size());

    const double interaction = v.dot(rbm.weights * h);
    const double hidden_term = rbm.hidden_bias.dot(h);
    if(rbm.visible_kind == VisibleKind::gaussian)
        return 0.5 * (v - rbm.visible_bias).squaredNorm() - hidden_term - interaction;
    return -rbm.visible_bias.dot(v) - hidden_term - interaction;
}

double free_energy(const Rbm& rbm, const Vector& v)
{
    require_visible(rbm, v.size());

    const Vector pre = rbm.hidden_bias + rbm.weights.transpose() * v;
    double hidden_term = 0.0;
    for(Eigen::Index t = 0; t < pre.size(); ++t)
        hidden_term += softplus(pre[t]);

    if(rbm.visible_kind == VisibleKind::gaussian)
        return 0.5 * (v - rbm.visible_bias).squaredNorm() - hidden_term;
    return -rbm.visible_bias.dot(v) - hidden_term;
}

double partition_function_exact(const Rbm& rbm)
{
    require_enumerable(rbm);
    const int nv = rbm.n_visible();
    const int nh = rbm.n_hidden();

    double z = 0.0;
    for(std::uint64_t vb = 0; vb < (std::uint64_t{1} << nv); ++vb) {
        const Vector v = bits_to_vector(vb, nv);
        for(std::uint64_t hb = 0; hb < (std::uint64_t{1} << nh); ++hb)
            z += std::exp(-energy(rbm, v, bits_to_vector(hb, nh)));
    }
    return z;
}

double joint_probability_exact(const Rbm& rbm, const Vector& v, const Vector& h)
{
    require_enumerable(rbm);
    return std::exp(-energy(rbm, v, h)) / partition_function_exact(rbm);
}

Vector prob_h_given_v(const Rbm& rbm, const Vector& v)
{
    require_visible(rbm, v.size());
    const Vector pre = rbm.hidden_bias + rbm.weights.transpose() * v;
    return pre.unaryExpr([](double a) { return sigmoid(a); });
}

Vector prob_v_given_h(const Rbm& rbm, const Vector& h)
{
    require_hidden(rbm, h.size());
    const Vector pre = rbm.visible_bias + rbm.weights * h;
    if(rbm.visible_kind == VisibleKind::gaussian)
        return pre;
    return pre.unaryExpr([](double a) { return sigmoid(a); });
}

Matrix hidden_probabilities(const Rbm& rbm, const Matrix& visible)
{
    require_visible(rbm, visible.cols());
    Matrix pre = visible * rbm.weights;
    pre.rowwise() += rbm.hidden_bias.transpose();
    return logistic(pre);
}

Matrix visible_probabilities(const Rbm& rbm, const Matrix& hidden)
{
    require_hidden(rbm, hidden.cols());
    Matrix pre = hidden * rbm.weights.transpose();
    pre.rowwise() += rbm.visible_bias.transpose();
    if(rbm.visible_kind == VisibleKind::gaussian)
        return pre;
    return logistic(pre);
}

Vector sample_bernoulli(const Vector& probs, Rng& rng)
{
    Vector out(probs.size());
    for(Eigen::Index i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if(!(p >= 0.0 && p <= 1.0))
            throw ValidationError("Bernoulli probability outside [0,1]");
        out[i] = rng.uniform() < p ? 1.0 : 0.0;
    }
    return out;
}

Matrix sample_bernoulli(const Matrix& probs, Rng& rng)
{
    Matrix out(probs.rows(), probs.cols());
    for(Eigen::Index j = 0; j < probs.cols(); ++j) {
        for(Eigen::Index i = 0; i < probs.rows(); ++i) {
            const double p = probs(i, j);
            if(!(p >= 0.0 && p <= 1.0))
                throw ValidationError("Bernoulli probability outside [0,1]");
            out(i, j) = rng.uniform() < p ? 1.0 : 0.0;
        }
    }
    return out;
}

CdGradient cd_gradient(const Rbm& rbm, const Matrix& batch, int cd_steps, Rng& rng)
{
    if(batch.rows() == 0)
        throw ValidationError("cd_gradient needs a nonempty batch");
    detail::require(cd_steps >= 1, "cd_steps must be at least 1");
    require_visible(rbm, batch.cols());

    const Matrix positive_hidden = hidden_probabilities(rbm, batch);

    Matrix hidden_state = sample_bernoulli(positive_hidden, rng);
    Matrix recon;
    Matrix negative_hidden;
    for(int step = 0; step < cd_steps; ++step) {
        recon = visible_probabilities(rbm, hidden_state);
        negative_hidden = hidden_probabilities(rbm, recon);
        if(step + 1 < cd_steps)
            hidden_state = sample_bernoulli(negative_hidden, rng);
    }

    const double inv_n = 1.0 / static_cast<double>(batch.rows());
    CdGradient grad;
    grad.weights = (batch.transpose() * positive_hidden - recon.transpose() * negative_hidden) * inv_n;
    grad.visible_bias = (batch - recon).colwise().sum().transpose() * inv_n;
    grad.hidden_bias = (positive_hidden - negative_hidden).colwise().sum().transpose() * inv_n;
    grad.reconstruction_error = (batch - recon).squaredNorm() / static_cast<double>(batch.size());
    return grad;
}

void RbmTrainConfig::validate() const
{
    detail::require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
    detail::require(epochs > 0, "epochs must be a positive integer");
    detail::require(batch_size > 0, "batch_size must be a positive integer");
    detail::require(cd_steps > 0, "cd_steps must be a positive integer");
    detail::require(momentum_initial >= 0.0 && momentum_initial < 1.0, "momentum_initial must lie in [0,1)");
    detail::require(momentum_final >= 0.0 && momentum_final < 1.0, "momentum_final must lie in [0,1)");
    detail::require(momentum_switch_epoch > 0, "momentum_switch_epoch must be a positive integer");
    detail::require(weight_decay >= 0.0 && std::isfinite(weight_decay), "weight_decay must be nonnegative");
}

RbmTrainResult train_rbm(Rbm rbm, const Matrix& data, const RbmTrainConfig& cfg)
{
    cfg.validate();
    if(data.rows() == 0)
        throw ValidationError("train_rbm needs nonempty data");
    require_visible(rbm, data.cols());

    Rng rng(cfg.seed);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
    for(std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<Eigen::Index>(i);

    Matrix velocity_w = Matrix::Zero(rbm.weights.rows(), rbm.weights.cols());
    Vector velocity_v = Vector::Zero(rbm.visible_bias.size());
    Vector velocity_h = Vector::Zero(rbm.hidden_bias.size());

    RbmTrainResult result;
    result.reconstruction_error.reserve(static_cast<std::size_t>(cfg.epochs));

    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    for(int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double momentum = epoch < cfg.momentum_switch_epoch ? cfg.momentum_initial : cfg.momentum_final;
        rng.shuffle(order);

        double squared_error = 0.0;
        for(std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(begin + batch, order.size());
            const Matrix mini = gather_rows(data, order, begin, end);
            const CdGradient grad = cd_gradient(rbm, mini, cfg.cd_steps, rng);

            velocity_w = momentum * velocity_w + cfg.learning_rate * (grad.weights - cfg.weight_decay * rbm.weights);
            velocity_v = momentum * velocity_v + cfg.learning_rate * grad.visible_bias;
            velocity_h = momentum * velocity_h + cfg.learning_rate * grad.hidden_bias;
            rbm.weights += velocity_w;
            rbm.visible_bias += velocity_v;
            rbm.hidden_bias += velocity_h;

            squared_error += grad.reconstruction_error * static_cast<double>(mini.size());
        }

        if(!rbm.all_finite())
            throw NumericalError("RBM parameters became non-finite at epoch " + std::to_string(epoch + 1));
        result.reconstruction_error.push_back(squared_error / static_cast<double>(data.size()));
    }

    result.rbm = std::move(rbm);
    return result;
}

} // namespace wavedbn
