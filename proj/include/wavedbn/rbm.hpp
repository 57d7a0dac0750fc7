#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavedbn/random.hpp"

namespace wavedbn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// How visible units are modelled.
///
/// bernoulli_real: real inputs in [0,1] read as Bernoulli probabilities; the
/// energy is linear in v. gaussian: unit-variance Gaussian visibles, which
/// adds the quadratic term sum_s (v_s - b_s)^2 / 2 to the energy.
enum class VisibleKind { bernoulli_real, gaussian };

std::string to_string(VisibleKind kind);
VisibleKind visible_kind_from_string(const std::string& name);

struct Rbm {
    Matrix weights;       // n_visible x n_hidden
    Vector visible_bias;  // n_visible
    Vector hidden_bias;   // n_hidden
    VisibleKind visible_kind = VisibleKind::bernoulli_real;

    /// All parameters zero.
    static Rbm zeros(int n_visible, int n_hidden, VisibleKind kind = VisibleKind::bernoulli_real);

    /// Weights i.i.d. N(0, stddev^2), biases zero.
    static Rbm random(int n_visible, int n_hidden, Rng& rng, double stddev = 0.01,
                      VisibleKind kind = VisibleKind::bernoulli_real);

    int n_visible() const { return static_cast<int>(weights.rows()); }
    int n_hidden() const { return static_cast<int>(weights.cols()); }

    bool all_finite() const;

    friend bool operator==(const Rbm& a, const Rbm& b)
    {
        return a.visible_kind == b.visible_kind && a.weights == b.weights
               && a.visible_bias == b.visible_bias && a.hidden_bias == b.hidden_bias;
    }
};

double sigmoid(double x);

/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// E(v,h) = -b_v.v - b_h.h - v^T W h (plus the quadratic visible term for
/// gaussian visibles).
double energy(const Rbm& rbm, const Vector& v, const Vector& h);

/// F(v) such that P(v) = exp(-F(v)) / Z.
double free_energy(const Rbm& rbm, const Vector& v);

/// Largest n_visible + n_hidden accepted by the enumeration routines.
inline constexpr int kMaxEnumerationUnits = 20;

/// Z by enumerating all 2^(n_v + n_h) binary states. Bernoulli visibles only.
double partition_function_exact(const Rbm& rbm);

/// exp(-E(v,h)) / Z with Z from exhaustive enumeration.
double joint_probability_exact(const Rbm& rbm, const Vector& v, const Vector& h);

/// sigmoid(b_h + W^T v), element-wise.
Vector prob_h_given_v(const Rbm& rbm, const Vector& v);

/// sigmoid(b_v + W h) for bernoulli_real visibles, the mean b_v + W h for
/// gaussian visibles.
Vector prob_v_given_h(const Rbm& rbm, const Vector& h);

/// Row-wise batch versions: one sample per row.
Matrix hidden_probabilities(const Rbm& rbm, const Matrix& visible);
Matrix visible_probabilities(const Rbm& rbm, const Matrix& hidden);

/// Independent Bernoulli draws, one uniform per element in storage order.
Vector sample_bernoulli(const Vector& probs, Rng& rng);
Matrix sample_bernoulli(const Matrix& probs, Rng& rng);

struct CdGradient {
    Matrix weights;
    Vector visible_bias;
    Vector hidden_bias;
    /// Mean squared difference between data and final reconstruction.
    double reconstruction_error = 0.0;
};

/// CD-k estimate of the log-likelihood gradient over a batch (one sample per
/// row). Hidden states in the chain are binary samples; visible
/// reconstructions and the final hidden statistics use probabilities.
CdGradient cd_gradient(const Rbm& rbm, const Matrix& batch, int cd_steps, Rng& rng);

struct RbmTrainConfig {
    double learning_rate = 0.1;
    int epochs = 50;
    int batch_size = 10;
    int cd_steps = 1;
    double momentum_initial = 0.5;
    double momentum_final = 0.9;
    int momentum_switch_epoch = 5;
    double weight_decay = 2e-4;
    std::uint64_t seed = 0;

    /// Throws ValidationError naming the first out-of-range field.
    void validate() const;
};

struct RbmTrainResult {
    Rbm rbm;
    /// Mean squared reconstruction error of each epoch.
    std::vector<double> reconstruction_error;
};

/// Mini-batch CD training with momentum and L2 decay on the weights only.
/// Momentum is momentum_initial for epochs [0, momentum_switch_epoch) and
/// momentum_final afterwards. Batch order is reshuffled every epoch.
RbmTrainResult train_rbm(Rbm rbm, const Matrix& data, const RbmTrainConfig& cfg);

} // namespace wavedbn
