#pragma once

#include "goaltrack/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace goaltrack {

struct DenseLayer {
    Eigen::MatrixXd w; // out x in
    Eigen::VectorXd b; // out
};

/// Fully-connected Q-network: ReLU hidden layers, linear output head.
/// Gradients and optimizer accumulators reuse the same layout.
struct QNetParams {
    std::vector<DenseLayer> layers;

    /// Zero-filled network with the given layer widths (input first, output last).
    static QNetParams zeros(const std::vector<int>& sizes);
    /// Glorot-uniform weights in +/- sqrt(6 / (fan_in + fan_out)), zero biases.
    static QNetParams glorot(const std::vector<int>& sizes, Rng& rng);

    std::vector<int> sizes() const;
    int input_size() const;
    int output_size() const;
    std::size_t parameter_count() const;

    /// Parameters in a fixed order (per layer: w column-major, then b).
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    bool all_finite() const;
    friend bool operator==(const QNetParams& a, const QNetParams& b);
};

/// Q-values for one state. Throws std::invalid_argument on an input-size mismatch.
Eigen::VectorXd forward(const QNetParams& params, std::span<const double> state);

/// Q-values for a batch; inputs and outputs are one column per sample.
Eigen::MatrixXd forward_batch(const QNetParams& params, const Eigen::MatrixXd& inputs);

struct Transition {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

struct TdLossGrad {
    double loss = 0.0;
    QNetParams grads;
};

/// Scratch buffers reused across td_loss_grad calls.
struct TdWorkspace {
    Eigen::MatrixXd x, x_next;
    std::vector<Eigen::MatrixXd> acts, pre, target_acts, deltas;
};

/// Mean squared TD error against y = r + gamma * max_a Q(s', a; theta_star)
/// (y = r on terminal transitions) and its gradient with respect to theta.
TdLossGrad td_loss_grad(std::span<const Transition> batch, const QNetParams& theta, const QNetParams& theta_star,
                        double gamma);
/// Same, writing into `out` and reusing `ws` so steady-state training does not allocate.
void td_loss_grad(std::span<const Transition> batch, const QNetParams& theta, const QNetParams& theta_star,
                  double gamma, TdWorkspace& ws, TdLossGrad& out);

struct OptimState {
    QNetParams sq_avg; // running mean of squared gradients
    double rho = 0.99;
    double eps = 1e-8;
    double lr = 1e-4;

    static OptimState for_params(const QNetParams& theta, double lr, double rho = 0.99, double eps = 1e-8);
};

/// RMSprop: v <- rho v + (1 - rho) g^2; theta <- theta - lr g / sqrt(v + eps).
void rmsprop_step(QNetParams& theta, const QNetParams& grads, OptimState& opt);

/// Versioned text checkpoint. Doubles are written in shortest round-trip form.
void save_checkpoint(std::ostream& os, const QNetParams& params, const OptimState* opt = nullptr);
struct Checkpoint {
    QNetParams params;
    bool has_optimizer = false;
    OptimState optimizer;
};
/// Throws std::runtime_error on a malformed or unsupported file.
Checkpoint load_checkpoint(std::istream& is);

/// FNV-1a over the raw parameter bytes; a cheap identity for determinism checks.
std::uint64_t checksum(const QNetParams& params);

} // namespace goaltrack
