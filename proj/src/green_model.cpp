#include "sgreen/green_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace sgreen {

namespace {
constexpr double kPi = std::numbers::pi;
}

AugmentedKind AugmentedKind::default_for(int dim) {
    if (dim == 1) return abs();
    if (dim == 2) return log();
    return power(2.0 - dim);
}

std::string AugmentedKind::to_string() const {
    switch (type) {
        case Type::Abs: return "abs";
        case Type::Log: return "log";
        default: return "power";
    }
}

AugmentedKind AugmentedKind::from_string(const std::string& s, double exponent) {
    if (s == "abs") return abs();
    if (s == "log") return log();
    if (s == "power") return power(exponent);
    throw std::invalid_argument("AugmentedKind: unknown kind '" + s + "'");
}

AugmentedValue augmented_variable(const AugmentedKind& kind, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) {
    const Eigen::VectorXd diff = x - y;
    const double r2 = diff.squaredNorm();
    if (r2 == 0.0) throw std::invalid_argument("augmented_variable: x == y");

    AugmentedValue out;
    switch (kind.type) {
        case AugmentedKind::Type::Abs: {
            out.phi = std::abs(diff(0));
            out.grad = Eigen::VectorXd::Constant(1, diff(0) > 0.0 ? 1.0 : -1.0);
            out.grad_sq = 1.0;
            out.laplacian = 0.0;
            break;
        }
        case AugmentedKind::Type::Log: {
            out.phi = 0.5 * std::log(r2);
            out.grad = diff / r2;
            out.grad_sq = 1.0 / r2;
            out.laplacian = 0.0;
            break;
        }
        case AugmentedKind::Type::Power: {
            const double p = kind.exponent;
            const double r = std::sqrt(r2);
            const double rpm2 = std::pow(r, p - 2.0);
            out.phi = rpm2 * r2;
            out.grad = p * rpm2 * diff;
            out.grad_sq = p * p * rpm2 * rpm2 * r2;
            out.laplacian = p * (p + static_cast<double>(diff.size()) - 2.0) * rpm2;
            break;
        }
    }
    return out;
}

void TrainConfig::validate(int dim) const {
    if (depth < 1 || width < 1) throw std::invalid_argument("TrainConfig: bad network shape");
    if (n_regular < 1 || n_boundary < 1 || n_sources < 1 || n_singular < 1)
        throw std::invalid_argument("TrainConfig: data sizes must be positive");
    if (beta_snglr < 0 || beta_bndry < 0 || beta_symtr < 0)
        throw std::invalid_argument("TrainConfig: penalties must be nonnegative");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be nonnegative");
    if (!std::is_sorted(milestones.begin(), milestones.end()))
        throw std::invalid_argument("TrainConfig: milestones must be increasing");
    if (dim == 2 && eps_radii.empty())
        throw std::invalid_argument("TrainConfig: d=2 requires normalization radii");
}

namespace {

double default_r_excl(int dim) { return dim == 1 ? 1e-3 : 5e-3; }

Eigen::VectorXd sample_in_domain(const EllipticProblem& problem, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (problem.domain == DomainKind::Interval) {
        Eigen::VectorXd x(1);
        x(0) = unit(rng);
        return x;
    }
    const double r = std::sqrt(unit(rng));
    const double theta = 2.0 * kPi * unit(rng);
    Eigen::VectorXd x(2);
    x << r * std::cos(theta), r * std::sin(theta);
    return x;
}

}  // namespace

CollocationBatch sample_collocation(const EllipticProblem& problem, const TrainConfig& config,
                                    std::mt19937_64& rng) {
    const int d = problem.dim;
    CollocationBatch batch;
    batch.dim = d;
    batch.kind = AugmentedKind::default_for(d);
    batch.r_excl = config.r_excl > 0.0 ? config.r_excl : default_r_excl(d);

    const int M = config.n_sources;
    batch.sources.resize(M, d);
    for (int m = 0; m < M; ++m) batch.sources.row(m) = sample_in_domain(problem, rng);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    batch.regular.resize(M);
    batch.boundary.resize(M);
    for (int m = 0; m < M; ++m) {
        Eigen::MatrixXd pts(config.n_regular, d);
        const Eigen::VectorXd y = batch.sources.row(m);
        for (int n = 0; n < config.n_regular; ++n) {
            int attempts = 0;
            while (true) {
                const Eigen::VectorXd x = sample_in_domain(problem, rng);
                if ((x - y).norm() >= batch.r_excl) {
                    pts.row(n) = x;
                    break;
                }
                if (++attempts > 10000)
                    throw std::runtime_error("sample_collocation: rejection sampling failed");
            }
        }
        batch.regular[m] = std::move(pts);

        Eigen::MatrixXd bnd(config.n_boundary, d);
        for (int n = 0; n < config.n_boundary; ++n) {
            if (d == 1) {
                bnd(n, 0) = n % 2 == 0 ? 0.0 : 1.0;
            } else {
                const double theta = 2.0 * kPi * unit(rng);
                bnd.row(n) << std::cos(theta), std::sin(theta);
            }
        }
        batch.boundary[m] = std::move(bnd);
    }

    if (d == 2) {
        // N_S points split evenly across the configured circles; midpoint
        // angles with a random phase per ring. Rings that stick out of the
        // disc are dropped for that source.
        const int n_rings = static_cast<int>(config.eps_radii.size());
        const int per_ring = std::max(1, config.n_singular / n_rings);
        batch.rings.resize(M);
        for (int m = 0; m < M; ++m) {
            const Eigen::Vector2d y = batch.sources.row(m);
            for (double eps : config.eps_radii) {
                if (y.norm() + eps >= 1.0) continue;
                CollocationBatch::SingularRing ring;
                ring.radius = eps;
                ring.points.resize(per_ring, 2);
                const double phase = 2.0 * kPi * unit(rng);
                for (int n = 0; n < per_ring; ++n) {
                    const double theta = phase + 2.0 * kPi * (n + 0.5) / per_ring;
                    ring.points.row(n) =
                        y + eps * Eigen::Vector2d(std::cos(theta), std::sin(theta));
                }
                batch.rings[m].push_back(std::move(ring));
            }
        }
    }
    return batch;
}

namespace {

std::vector<int> active_dims(int d) {
    std::vector<int> a(d + 1);
    for (int i = 0; i < d; ++i) a[i] = i;
    a[d] = 2 * d;  // augmented coordinate
    return a;
}

Eigen::VectorXd net_input(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double phi) {
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd u(2 * d + 1);
    u.head(d) = x;
    u.segment(d, d) = y;
    u(2 * d) = phi;
    return u;
}

// Interior residual coefficients: the linear functional of the jet whose
// value is div(c grad G) + k2 G expanded through the augmented variable.
Eigen::VectorXd reglr_coeff(const EllipticProblem& problem, const AugmentedKind& kind,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const int d = problem.dim;
    const int na = d + 1;
    const AugmentedValue av = augmented_variable(kind, x, y);
    const double c = problem.c(x);
    const Eigen::VectorXd gc = problem.grad_c(x);

    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(jet_components(JetOrder::Second, na));
    coeff(0) = problem.k2(x);
    for (int i = 0; i < d; ++i) coeff(1 + i) = gc(i);
    coeff(1 + d) = gc.dot(av.grad) + c * av.laplacian;
    for (int i = 0; i < d; ++i) {
        coeff(jet_hess_index(na, i, i)) += c;
        coeff(jet_hess_index(na, i, d)) += 2.0 * c * av.grad(i);
    }
    coeff(jet_hess_index(na, d, d)) += c * av.grad_sq;
    return coeff;
}

// Builders produce the full canonical group sets with unit scale; the
// normalizations (plain means) are applied by the callers, which lets the
// trainer draw mini-batches by group index.
std::vector<LossGroup> build_reglr_groups(const CollocationBatch& batch,
                                          const EllipticProblem& problem) {
    const int d = batch.dim;
    const std::vector<int> active = active_dims(d);
    std::vector<LossGroup> groups;
    groups.reserve(static_cast<std::size_t>(batch.num_sources()) *
                   (batch.regular.empty() ? 0 : batch.regular[0].rows()));
    for (int m = 0; m < batch.num_sources(); ++m) {
        const Eigen::VectorXd y = batch.sources.row(m);
        for (int n = 0; n < batch.regular[m].rows(); ++n) {
            const Eigen::VectorXd x = batch.regular[m].row(n);
            LossGroup g;
            g.order = JetOrder::Second;
            g.active = active;
            LossPoint pt;
            pt.coeff = reglr_coeff(problem, batch.kind, x, y);
            pt.input = net_input(x, y, augmented_variable(batch.kind, x, y).phi);
            g.points.push_back(std::move(pt));
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

// ring_offsets (size M+1) maps each source to its contiguous block of ring
// groups; sources whose circles were all dropped contribute none.
std::vector<LossGroup> build_snglr_groups(const CollocationBatch& batch,
                                          const EllipticProblem& problem,
                                          std::vector<std::int64_t>* ring_offsets = nullptr) {
    const int d = batch.dim;
    const std::vector<int> active = active_dims(d);
    std::vector<LossGroup> groups;
    if (ring_offsets) ring_offsets->assign(1, 0);

    if (d == 1) {
        // -2 c(y) dG/dz = 1 at (y, y, 0): squared residual (2 c dG/dz + 1)^2.
        for (int m = 0; m < batch.num_sources(); ++m) {
            const Eigen::VectorXd y = batch.sources.row(m);
            LossGroup g;
            g.order = JetOrder::First;
            g.active = active;
            g.offset = 1.0;
            LossPoint pt;
            pt.input = net_input(y, y, 0.0);
            pt.coeff = Eigen::VectorXd::Zero(jet_components(JetOrder::First, 2));
            pt.coeff(2) = 2.0 * problem.c(y);
            g.points.push_back(std::move(pt));
            groups.push_back(std::move(g));
            if (ring_offsets) ring_offsets->push_back(static_cast<std::int64_t>(groups.size()));
        }
        return groups;
    }

    // Flux normalization over each circle: the residual is
    // 1 + (2 pi eps / N) sum_n c (grad_x G + grad(phi) dG/dz) . n_hat.
    for (int m = 0; m < batch.num_sources(); ++m) {
        const Eigen::VectorXd y = batch.sources.row(m);
        for (const auto& ring : batch.rings[m]) {
            const int np = static_cast<int>(ring.points.rows());
            LossGroup g;
            g.order = JetOrder::First;
            g.active = active;
            g.offset = 1.0;
            const double w = 2.0 * kPi * ring.radius / np;
            for (int n = 0; n < np; ++n) {
                const Eigen::VectorXd x = ring.points.row(n);
                const AugmentedValue av = augmented_variable(batch.kind, x, y);
                const Eigen::VectorXd normal = (x - y) / (x - y).norm();
                const double cv = problem.c(x);
                LossPoint pt;
                pt.input = net_input(x, y, av.phi);
                pt.coeff = Eigen::VectorXd::Zero(jet_components(JetOrder::First, d + 1));
                for (int i = 0; i < d; ++i) pt.coeff(1 + i) = w * cv * normal(i);
                pt.coeff(1 + d) = w * cv * av.grad.dot(normal);
                g.points.push_back(std::move(pt));
            }
            groups.push_back(std::move(g));
        }
        if (ring_offsets) ring_offsets->push_back(static_cast<std::int64_t>(groups.size()));
    }
    return groups;
}

std::vector<LossGroup> build_bndry_groups(const CollocationBatch& batch) {
    std::vector<LossGroup> groups;
    for (int m = 0; m < batch.num_sources(); ++m) {
        const Eigen::VectorXd y = batch.sources.row(m);
        for (int n = 0; n < batch.boundary[m].rows(); ++n) {
            const Eigen::VectorXd x = batch.boundary[m].row(n);
            LossGroup g;
            g.order = JetOrder::Value;
            LossPoint pt;
            pt.input = net_input(x, y, augmented_variable(batch.kind, x, y).phi);
            pt.coeff = Eigen::VectorXd::Ones(1);
            g.points.push_back(std::move(pt));
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

std::vector<LossGroup> build_symtr_groups(const CollocationBatch& batch) {
    std::vector<LossGroup> groups;
    for (int m = 0; m < batch.num_sources(); ++m) {
        const Eigen::VectorXd y = batch.sources.row(m);
        for (int n = 0; n < batch.regular[m].rows(); ++n) {
            const Eigen::VectorXd x = batch.regular[m].row(n);
            const double phi = augmented_variable(batch.kind, x, y).phi;
            LossGroup g;
            g.order = JetOrder::Value;
            LossPoint fwd, swp;
            fwd.input = net_input(x, y, phi);
            fwd.coeff = Eigen::VectorXd::Ones(1);
            swp.input = net_input(y, x, phi);
            swp.coeff = -Eigen::VectorXd::Ones(1);
            g.points.push_back(std::move(fwd));
            g.points.push_back(std::move(swp));
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

double mean_loss(const MlpNetwork& net, const std::vector<LossGroup>& groups) {
    if (groups.empty()) return 0.0;
    return loss_value(net, groups) / static_cast<double>(groups.size());
}

}  // namespace

double loss_reglr(const MlpNetwork& net, const CollocationBatch& batch,
                  const EllipticProblem& problem) {
    return mean_loss(net, build_reglr_groups(batch, problem));
}

double loss_snglr(const MlpNetwork& net, const CollocationBatch& batch,
                  const EllipticProblem& problem) {
    return mean_loss(net, build_snglr_groups(batch, problem));
}

double loss_bndry(const MlpNetwork& net, const CollocationBatch& batch) {
    return mean_loss(net, build_bndry_groups(batch));
}

double loss_symtr(const MlpNetwork& net, const CollocationBatch& batch) {
    return mean_loss(net, build_symtr_groups(batch));
}

double GreenSurrogate::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if ((x - y).squaredNorm() == 0.0) {
        if (dim == 1) {
            // 1D kernels are continuous across the diagonal; phi = 0 there.
            return forward(net, net_input(x, y, 0.0));
        }
        throw std::invalid_argument("GreenSurrogate::evaluate: x == y, use diagonal_value");
    }
    const double phi = augmented_variable(kind, x, y).phi;
    return 0.5 * forward(net, net_input(x, y, phi)) + 0.5 * forward(net, net_input(y, x, phi));
}

Eigen::VectorXd GreenSurrogate::evaluate_batch(const Eigen::MatrixXd& x,
                                               const Eigen::MatrixXd& y) const {
    const int n = static_cast<int>(x.rows());
    const int d = dim;
    Eigen::MatrixXd inputs(2 * d + 1, 2 * n);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd xi = x.row(i);
        const Eigen::VectorXd yi = y.row(i);
        double phi = 0.0;
        if ((xi - yi).squaredNorm() > 0.0)
            phi = augmented_variable(kind, xi, yi).phi;
        else if (d != 1)
            throw std::invalid_argument("evaluate_batch: x == y row, use diagonal_value");
        inputs.col(2 * i) << xi, yi, phi;
        inputs.col(2 * i + 1) << yi, xi, phi;
    }
    const Eigen::VectorXd vals = forward_batch(net, inputs);
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) out(i) = 0.5 * vals(2 * i) + 0.5 * vals(2 * i + 1);
    return out;
}

namespace {

// Ring average used by the diagonal policies; drops samples outside the
// domain and flags the caller when that happens.
template <typename EvalFn>
double ring_average(const EvalFn& eval, const Eigen::VectorXd& x, double r_avg, int k_avg,
                    DomainKind domain, bool* clipped) {
    double sum = 0.0;
    int kept = 0;
    for (int k = 0; k < k_avg; ++k) {
        const double theta = 2.0 * kPi * k / k_avg;
        Eigen::VectorXd p = x;
        p(0) += r_avg * std::cos(theta);
        p(1) += r_avg * std::sin(theta);
        const bool inside = domain == DomainKind::UnitDisc ? p.norm() <= 1.0
                                                           : (p(0) >= 0.0 && p(0) <= 1.0);
        if (!inside) {
            if (clipped) *clipped = true;
            continue;
        }
        sum += eval(p);
        ++kept;
    }
    if (kept == 0) throw std::runtime_error("diagonal ring average: no sample inside the domain");
    return sum / kept;
}

}  // namespace

double diagonal_value(const GreenSurrogate& surrogate, const Eigen::VectorXd& x, double r_avg,
                      int k_avg, bool* clipped) {
    if (clipped) *clipped = false;
    if (surrogate.dim == 1) return surrogate.evaluate(x, x);
    return ring_average([&](const Eigen::VectorXd& p) { return surrogate.evaluate(x, p); }, x,
                        r_avg, k_avg, surrogate.domain, clipped);
}

GreenSurrogate train(const EllipticProblem& problem, const AugmentedKind& kind,
                     const TrainConfig& config,
                     const std::function<void(const TrainLogEntry&)>& logger) {
    const int d = problem.dim;
    config.validate(d);
    if (kind.type == AugmentedKind::Type::Abs && d != 1)
        throw std::invalid_argument("train: abs augmentation requires d = 1");
    if (kind.type == AugmentedKind::Type::Log && d != 2)
        throw std::invalid_argument("train: log augmentation requires d = 2");
    if (kind.type == AugmentedKind::Type::Power && kind.exponent >= 0.0 &&
        kind.exponent != 2.0 - d)
        throw std::invalid_argument("train: power exponent must be negative or 2 - d");

    std::mt19937_64 rng(config.seed);
    MlpNetwork net = init_network(2 * d + 1, config.depth, config.width, config.seed);
    CollocationBatch batch = sample_collocation(problem, config, rng);
    batch.kind = kind;

    // All collocation groups are materialized up front; each epoch draws a
    // mini-batch of sources (and per-source point subsets) by group index.
    std::vector<std::int64_t> ring_offsets;
    const std::vector<LossGroup> reglr_all = build_reglr_groups(batch, problem);
    const std::vector<LossGroup> snglr_all = build_snglr_groups(batch, problem, &ring_offsets);
    const std::vector<LossGroup> bndry_all = build_bndry_groups(batch);
    const std::vector<LossGroup> symtr_all = build_symtr_groups(batch);

    AdamWState state = AdamWState::fresh(net);
    AdamWParams adam;
    adam.weight_decay = config.weight_decay;
    adam.beta1 = config.adam_beta1;
    adam.beta2 = config.adam_beta2;
    adam.eps = config.adam_eps;

    const int M = batch.num_sources();
    const int n_src = config.batch_sources > 0 ? std::min(config.batch_sources, M) : M;
    const int n_pts = config.batch_points > 0 ? std::min(config.batch_points, config.n_regular)
                                              : config.n_regular;
    const int n_bnd = config.batch_boundary > 0
                          ? std::min(config.batch_boundary, config.n_boundary)
                          : config.n_boundary;

    std::vector<int> src_perm(M);
    std::iota(src_perm.begin(), src_perm.end(), 0);
    std::vector<int> pt_perm(config.n_regular);
    std::iota(pt_perm.begin(), pt_perm.end(), 0);
    std::vector<int> bnd_perm(config.n_boundary);
    std::iota(bnd_perm.begin(), bnd_perm.end(), 0);

    std::vector<std::int64_t> sel_reglr, sel_snglr, sel_bndry;
    sel_reglr.reserve(static_cast<std::size_t>(n_src) * n_pts);
    sel_bndry.reserve(static_cast<std::size_t>(n_src) * n_bnd);

    ParamGradient g_total = net.zero_gradient();
    ParamGradient g_term = net.zero_gradient();

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double lr = config.learning_rate;
        for (int m : config.milestones)
            if (epoch > m) lr *= 0.1;
        adam.lr = lr;

        if (n_src < M) std::shuffle(src_perm.begin(), src_perm.end(), rng);
        sel_reglr.clear();
        sel_snglr.clear();
        sel_bndry.clear();
        for (int s = 0; s < n_src; ++s) {
            const int m = src_perm[s];
            if (n_pts < config.n_regular) std::shuffle(pt_perm.begin(), pt_perm.end(), rng);
            for (int t = 0; t < n_pts; ++t)
                sel_reglr.push_back(static_cast<std::int64_t>(m) * config.n_regular + pt_perm[t]);
            for (std::int64_t r = ring_offsets[m]; r < ring_offsets[m + 1]; ++r)
                sel_snglr.push_back(r);
            if (n_bnd < config.n_boundary) std::shuffle(bnd_perm.begin(), bnd_perm.end(), rng);
            for (int t = 0; t < n_bnd; ++t)
                sel_bndry.push_back(static_cast<std::int64_t>(m) * config.n_boundary + bnd_perm[t]);
        }
        const double w_reglr = 1.0 / static_cast<double>(sel_reglr.size());
        const double w_snglr = sel_snglr.empty() ? 0.0 : 1.0 / static_cast<double>(sel_snglr.size());
        const double w_bndry = 1.0 / static_cast<double>(sel_bndry.size());

        TrainLogEntry entry;
        entry.epoch = epoch;
        entry.lr = lr;
        try {
            g_total.set_zero();
            entry.reglr = loss_param_grad(net, reglr_all, sel_reglr, w_reglr, g_term,
                                          config.n_chunks);
            g_total.axpy(1.0, g_term);
            if (!sel_snglr.empty()) {
                entry.snglr = loss_param_grad(net, snglr_all, sel_snglr, w_snglr, g_term,
                                              config.n_chunks);
                g_total.axpy(config.beta_snglr, g_term);
            }
            entry.bndry = loss_param_grad(net, bndry_all, sel_bndry, w_bndry, g_term,
                                          config.n_chunks);
            g_total.axpy(config.beta_bndry, g_term);
            // The symmetry pairs reuse the regular selection.
            entry.symtr = loss_param_grad(net, symtr_all, sel_reglr, w_reglr, g_term,
                                          config.n_chunks);
            g_total.axpy(config.beta_symtr, g_term);

            entry.total = entry.reglr + config.beta_snglr * entry.snglr +
                          config.beta_bndry * entry.bndry + config.beta_symtr * entry.symtr;
            adamw_step(net, g_total, state, adam);
        } catch (const std::runtime_error& err) {
            throw std::runtime_error("train: diverged at epoch " + std::to_string(epoch) + ": " +
                                     err.what());
        }

        if (logger && (epoch % config.log_every == 0 || epoch == config.epochs)) logger(entry);
    }

    GreenSurrogate surrogate;
    surrogate.net = std::move(net);
    surrogate.dim = d;
    surrogate.kind = kind;
    surrogate.domain = problem.domain;
    return surrogate;
}

Eigen::VectorXd Kernel::eval_batch(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const {
    Eigen::VectorXd out(x.rows());
    for (int i = 0; i < x.rows(); ++i) out(i) = eval(x.row(i), y.row(i));
    return out;
}

double ExactDisc2dKernel::diag(const Eigen::VectorXd& x) const {
    return ring_average([&](const Eigen::VectorXd& p) { return eval(x, p); }, x, policy_.r_avg,
                        policy_.k_avg, DomainKind::UnitDisc, nullptr);
}

Eigen::VectorXd reconstruct_solution_1d(const Kernel& kernel, const EllipticProblem& problem,
                                        int n_elements, const Eigen::VectorXd& eval_points,
                                        double r_excl) {
    const double h = 1.0 / n_elements;
    Eigen::MatrixXd quad(n_elements, 1);
    Eigen::VectorXd fq(n_elements);
    Eigen::VectorXd pt(1);
    for (int e = 0; e < n_elements; ++e) {
        quad(e, 0) = (e + 0.5) * h;
        pt(0) = quad(e, 0);
        fq(e) = problem.f(pt);
    }

    Eigen::VectorXd u(eval_points.size());
    Eigen::MatrixXd xrep(n_elements, 1);
    for (int i = 0; i < eval_points.size(); ++i) {
        const double x = eval_points(i);
        xrep.setConstant(x);
        Eigen::VectorXd vals = kernel.eval_batch(xrep, quad);
        Eigen::VectorXd xv(1);
        xv(0) = x;
        for (int e = 0; e < n_elements; ++e)
            if (std::abs(quad(e, 0) - x) < r_excl) vals(e) = kernel.diag(xv);
        u(i) = h * vals.dot(fq);
    }
    return u;
}

Eigen::VectorXd reconstruct_solution_2d(const Kernel& kernel, const EllipticProblem& problem,
                                        const DiscMesh& mesh, const Eigen::MatrixXd& eval_points,
                                        double r_excl) {
    const int nt = mesh.num_triangles();
    Eigen::MatrixXd quad(3 * nt, 2);
    Eigen::VectorXd wf(3 * nt);
    for (int t = 0; t < nt; ++t) {
        const Eigen::Vector2d a = mesh.vertices.row(mesh.triangles(t, 0));
        const Eigen::Vector2d b = mesh.vertices.row(mesh.triangles(t, 1));
        const Eigen::Vector2d c = mesh.vertices.row(mesh.triangles(t, 2));
        const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
        const Eigen::Vector2d mids[3] = {0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
        for (int q = 0; q < 3; ++q) {
            quad.row(3 * t + q) = mids[q];
            wf(3 * t + q) = area / 3.0 * problem.f(mids[q]);
        }
    }

    Eigen::VectorXd u(eval_points.rows());
    Eigen::MatrixXd xrep(quad.rows(), 2);
    for (int i = 0; i < eval_points.rows(); ++i) {
        const Eigen::Vector2d x = eval_points.row(i);
        xrep.rowwise() = x.transpose();
        Eigen::VectorXd vals = kernel.eval_batch(xrep, quad);
        for (int q = 0; q < quad.rows(); ++q)
            if ((quad.row(q).transpose() - x).norm() < r_excl) vals(q) = kernel.diag(x);
        u(i) = vals.dot(wf);
    }
    return u;
}

}  // namespace sgreen
