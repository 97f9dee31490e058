#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace sgreen {

/// Value, gradient and Hessian of a scalar network output with respect to
/// its inputs. The Hessian is stored densely and kept exactly symmetric
/// (computed once per unordered pair, mirrored on write-back).
struct Jet2 {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

/// Per-layer gradients, shape-congruent with MlpNetwork parameters.
struct ParamGradient {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    void set_zero();
    void axpy(double alpha, const ParamGradient& other);
    bool all_finite() const;
};

/// Fully-connected tanh network with scalar output. `depth` counts hidden
/// layers; the linear maps are
///   W[0]: width x input_dim, W[1..depth-1]: width x width, W[depth]: 1 x width,
/// with tanh after every map except the last.
struct MlpNetwork {
    int input_dim = 0;
    int depth = 0;
    int width = 0;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    int num_layers() const { return depth + 1; }
    std::size_t num_parameters() const;

    ParamGradient zero_gradient() const;
    bool all_finite() const;
};

/// Uniform init on (-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases.
/// Deterministic for a given seed. Throws std::invalid_argument on
/// non-positive sizes.
MlpNetwork init_network(int input_dim, int depth, int width, std::uint64_t seed);

/// Plain forward pass.
double forward(const MlpNetwork& net, const Eigen::VectorXd& x);

/// Forward pass on a batch of column points (input_dim x n). Used by the
/// kernel-matrix builders where throughput matters.
Eigen::VectorXd forward_batch(const MlpNetwork& net, const Eigen::MatrixXd& x);

/// Exact first and second input derivatives, propagated layer by layer
/// through tanh', tanh''.
Jet2 forward_jet2(const MlpNetwork& net, const Eigen::VectorXd& x);

/// Derivative order carried through the network by the loss evaluator.
enum class JetOrder { Value = 0, First = 1, Second = 2 };

/// One collocation point inside a loss group: the network input plus the
/// coefficients of a linear functional over the output jet components.
/// Component layout: [value, grad(active...), upper-tri hess(active...)],
/// truncated to the group's jet order.
struct LossPoint {
    Eigen::VectorXd input;
    Eigen::VectorXd coeff;
};

/// A squared linear functional of network jets:
///   contribution = scale * (offset + sum_p coeff_p . jet(x_p))^2.
/// Groups of size one cover pointwise residuals; larger groups cover
/// quadrature sums (flux normalization) and value differences (symmetry).
struct LossGroup {
    JetOrder order = JetOrder::Second;
    std::vector<int> active;   // input indices the jets differentiate against
    double offset = 0.0;
    double scale = 1.0;
    std::vector<LossPoint> points;
};

/// Number of jet components for `n_active` differentiation directions.
inline int jet_components(JetOrder order, int n_active) {
    switch (order) {
        case JetOrder::Value: return 1;
        case JetOrder::First: return 1 + n_active;
        default: return 1 + n_active + n_active * (n_active + 1) / 2;
    }
}

/// Component index of the stored upper-triangular Hessian entry (p <= q)
/// in the jet layout [value, grad..., hess...].
inline int jet_hess_index(int n_active, int p, int q) {
    return 1 + n_active + p * n_active - p * (p - 1) / 2 + (q - p);
}

/// Loss of a sum of squared jet functionals without the parameter
/// gradient (forward pass only).
double loss_value(const MlpNetwork& net, const std::vector<LossGroup>& groups,
                  int n_chunks = 32);

/// Loss and exact parameter gradient of a sum of squared jet functionals.
/// Reverse accumulation runs over the jet forward graph, so mixed
/// value-parameter third derivatives are analytic (tanh''' included).
/// Work is split into a fixed number of chunks summed in a fixed order;
/// results do not depend on the number of threads.
/// Throws std::runtime_error if the loss turns non-finite.
double loss_param_grad(const MlpNetwork& net, const std::vector<LossGroup>& groups,
                       ParamGradient& grad, int n_chunks = 32);

/// Same over the subset groups[subset[i]], with every group's contribution
/// multiplied by scale_mult. Lets training prebuild the full collocation
/// batch once and draw mini-batches by index.
double loss_param_grad(const MlpNetwork& net, const std::vector<LossGroup>& groups,
                       const std::vector<std::int64_t>& subset, double scale_mult,
                       ParamGradient& grad, int n_chunks = 32);

/// Moment estimates for decoupled weight-decay Adam.
struct AdamWState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long step = 0;

    static AdamWState fresh(const MlpNetwork& net);
};

struct AdamWParams {
    double lr = 1e-3;
    double weight_decay = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One AdamW update in place. Throws std::runtime_error if the gradient
/// contains non-finite entries (the step is not applied).
void adamw_step(MlpNetwork& net, const ParamGradient& grad, AdamWState& state,
                const AdamWParams& params);

}  // namespace sgreen
