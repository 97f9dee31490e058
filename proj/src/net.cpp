#include "sgreen/net.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sgreen {

void ParamGradient::set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
}

void ParamGradient::axpy(double alpha, const ParamGradient& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += alpha * other.weights[l];
        biases[l] += alpha * other.biases[l];
    }
}

bool ParamGradient::all_finite() const {
    for (const auto& w : weights)
        if (!w.allFinite()) return false;
    for (const auto& b : biases)
        if (!b.allFinite()) return false;
    return true;
}

std::size_t MlpNetwork::num_parameters() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
}

ParamGradient MlpNetwork::zero_gradient() const {
    ParamGradient g;
    g.weights.reserve(weights.size());
    g.biases.reserve(biases.size());
    for (const auto& w : weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
    return g;
}

bool MlpNetwork::all_finite() const {
    for (const auto& w : weights)
        if (!w.allFinite()) return false;
    for (const auto& b : biases)
        if (!b.allFinite()) return false;
    return true;
}

MlpNetwork init_network(int input_dim, int depth, int width, std::uint64_t seed) {
    if (input_dim < 1 || depth < 1 || width < 1)
        throw std::invalid_argument("init_network: dimensions must be positive");

    MlpNetwork net;
    net.input_dim = input_dim;
    net.depth = depth;
    net.width = width;

    std::mt19937_64 rng(seed);
    auto make_layer = [&](int rows, int cols) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
        std::uniform_real_distribution<double> dist(-scale, scale);
        Eigen::MatrixXd w(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) w(i, j) = dist(rng);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(rows));
    };

    make_layer(width, input_dim);
    for (int l = 1; l < depth; ++l) make_layer(width, width);
    make_layer(1, width);
    return net;
}

double forward(const MlpNetwork& net, const Eigen::VectorXd& x) {
    if (x.size() != net.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    Eigen::VectorXd a = x;
    for (int l = 0; l <= net.depth; ++l) {
        Eigen::VectorXd s = net.weights[l] * a + net.biases[l];
        if (l < net.depth)
            a = s.array().tanh().matrix();
        else
            a = s;
    }
    return a(0);
}

Eigen::VectorXd forward_batch(const MlpNetwork& net, const Eigen::MatrixXd& x) {
    if (x.rows() != net.input_dim)
        throw std::invalid_argument("forward_batch: input dimension mismatch");
    Eigen::MatrixXd a = x;
    for (int l = 0; l <= net.depth; ++l) {
        Eigen::MatrixXd s = (net.weights[l] * a).colwise() + net.biases[l];
        if (l < net.depth)
            a = s.array().tanh().matrix();
        else
            a = s;
    }
    return a.row(0).transpose();
}

namespace {

constexpr int kMaxComponents = 32;

// Row-major weight copies so the forward accumulation streams through each
// row; built once per loss evaluation.
struct NetView {
    explicit NetView(const MlpNetwork& net) : net(&net) {
        w_rm.resize(net.weights.size());
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            const auto& w = net.weights[l];
            w_rm[l].resize(static_cast<std::size_t>(w.rows()) * w.cols());
            for (int i = 0; i < w.rows(); ++i)
                for (int j = 0; j < w.cols(); ++j)
                    w_rm[l][static_cast<std::size_t>(i) * w.cols() + j] = w(i, j);
        }
    }
    const MlpNetwork* net;
    std::vector<std::vector<double>> w_rm;
};

// Scratch buffers for one network evaluation with jets: layer l caches its
// pre-activation jets (s) and input jets (a); v holds tanh values.
struct PointCache {
    std::vector<std::vector<double>> s;
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> v;
};

class JetEngine {
public:
    JetEngine(const NetView& view, JetOrder order, const std::vector<int>& active)
        : view_(view), net_(*view.net), order_(order), active_(active),
          na_(static_cast<int>(active.size())), K_(jet_components(order, na_)) {
        if (K_ > kMaxComponents) throw std::invalid_argument("JetEngine: too many jet components");
    }

    int components() const { return K_; }

    // The training hot paths (d+1 active inputs, first or second order) get
    // fixed-trip-count instantiations so the component loops unroll.
    void forward(const Eigen::VectorXd& x, PointCache& cache, double* out) const {
        if (order_ == JetOrder::Second && na_ == 2) return forward_impl<2, 2>(x, cache, out);
        if (order_ == JetOrder::Second && na_ == 3) return forward_impl<3, 2>(x, cache, out);
        if (order_ == JetOrder::First && na_ == 2) return forward_impl<2, 1>(x, cache, out);
        if (order_ == JetOrder::First && na_ == 3) return forward_impl<3, 1>(x, cache, out);
        return forward_impl<-1, -1>(x, cache, out);
    }

    void backward(const PointCache& cache, const double* out_adj, ParamGradient& grad) const {
        if (order_ == JetOrder::Second && na_ == 2) return backward_impl<2, 2>(cache, out_adj, grad);
        if (order_ == JetOrder::Second && na_ == 3) return backward_impl<3, 2>(cache, out_adj, grad);
        if (order_ == JetOrder::First && na_ == 2) return backward_impl<2, 1>(cache, out_adj, grad);
        if (order_ == JetOrder::First && na_ == 3) return backward_impl<3, 1>(cache, out_adj, grad);
        return backward_impl<-1, -1>(cache, out_adj, grad);
    }

private:
    template <int NA_C, int ORD_C>
    void forward_impl(const Eigen::VectorXd& x, PointCache& cache, double* out) const {
        const int na = NA_C >= 0 ? NA_C : na_;
        const JetOrder order = ORD_C >= 0 ? static_cast<JetOrder>(ORD_C) : order_;
        const int K = NA_C >= 0 ? jet_components(static_cast<JetOrder>(ORD_C), NA_C) : K_;
        const int L = net_.depth + 1;
        cache.s.resize(L);
        cache.a.resize(L);
        cache.v.resize(net_.depth);

        auto& a0 = cache.a[0];
        a0.assign(static_cast<std::size_t>(net_.input_dim) * K, 0.0);
        for (int j = 0; j < net_.input_dim; ++j) a0[static_cast<std::size_t>(j) * K] = x(j);
        if (order != JetOrder::Value)
            for (int t = 0; t < na; ++t) a0[static_cast<std::size_t>(active_[t]) * K + 1 + t] = 1.0;

        for (int l = 0; l < L; ++l) {
            const int rows = static_cast<int>(net_.weights[l].rows());
            const int cols = static_cast<int>(net_.weights[l].cols());
            const double* wrm = view_.w_rm[l].data();
            const Eigen::VectorXd& b = net_.biases[l];
            const std::vector<double>& ain = cache.a[l];
            auto& s = cache.s[l];
            s.resize(static_cast<std::size_t>(rows) * K);

            for (int i = 0; i < rows; ++i) {
                const double* wrow = wrm + static_cast<std::size_t>(i) * cols;
                double acc[kMaxComponents];
                for (int k = 0; k < K; ++k) acc[k] = 0.0;
                for (int j = 0; j < cols; ++j) {
                    const double w = wrow[j];
                    const double* aj = &ain[static_cast<std::size_t>(j) * K];
                    for (int k = 0; k < K; ++k) acc[k] += w * aj[k];
                }
                double* si = &s[static_cast<std::size_t>(i) * K];
                si[0] = acc[0] + b(i);
                for (int k = 1; k < K; ++k) si[k] = acc[k];
            }
            if (l == net_.depth) break;

            auto& aout = cache.a[l + 1];
            aout.resize(static_cast<std::size_t>(rows) * K);
            auto& v = cache.v[l];
            v.resize(rows);
            for (int i = 0; i < rows; ++i) {
                const double* si = &s[static_cast<std::size_t>(i) * K];
                double* ti = &aout[static_cast<std::size_t>(i) * K];
                const double tv = std::tanh(si[0]);
                v[i] = tv;
                const double d1 = 1.0 - tv * tv;
                ti[0] = tv;
                if (order == JetOrder::Value) continue;
                for (int p = 0; p < na; ++p) ti[1 + p] = d1 * si[1 + p];
                if (order == JetOrder::Second) {
                    const double d2 = -2.0 * tv * d1;
                    int h = 1 + na;
                    for (int p = 0; p < na; ++p)
                        for (int q = p; q < na; ++q, ++h)
                            ti[h] = d1 * si[h] + d2 * si[1 + p] * si[1 + q];
                }
            }
        }
        std::memcpy(out, cache.s[net_.depth].data(), sizeof(double) * K);
    }

    template <int NA_C, int ORD_C>
    void backward_impl(const PointCache& cache, const double* out_adj, ParamGradient& grad) const {
        const int na = NA_C >= 0 ? NA_C : na_;
        const JetOrder order = ORD_C >= 0 ? static_cast<JetOrder>(ORD_C) : order_;
        const int K = NA_C >= 0 ? jet_components(static_cast<JetOrder>(ORD_C), NA_C) : K_;
        std::vector<double> cur(out_adj, out_adj + K);
        std::vector<double> nxt;
        for (int l = net_.depth; l >= 0; --l) {
            const Eigen::MatrixXd& W = net_.weights[l];
            const int rows = static_cast<int>(W.rows());
            const int cols = static_cast<int>(W.cols());
            const double* wcm = W.data();  // column-major
            const std::vector<double>& ain = cache.a[l];
            Eigen::MatrixXd& gW = grad.weights[l];
            Eigen::VectorXd& gb = grad.biases[l];

            for (int i = 0; i < rows; ++i) gb(i) += cur[static_cast<std::size_t>(i) * K];

            if (l > 0) {
                nxt.resize(static_cast<std::size_t>(cols) * K);
                for (int j = 0; j < cols; ++j) {
                    const double* wcol = wcm + static_cast<std::size_t>(j) * rows;
                    const double* aj = &ain[static_cast<std::size_t>(j) * K];
                    double* gWcol = gW.data() + static_cast<std::size_t>(j) * rows;
                    double accj[kMaxComponents];
                    for (int k = 0; k < K; ++k) accj[k] = 0.0;
                    for (int i = 0; i < rows; ++i) {
                        const double w = wcol[i];
                        const double* sbi = &cur[static_cast<std::size_t>(i) * K];
                        double gacc = 0.0;
                        for (int k = 0; k < K; ++k) {
                            accj[k] += w * sbi[k];
                            gacc += sbi[k] * aj[k];
                        }
                        gWcol[i] += gacc;
                    }
                    double* tj = &nxt[static_cast<std::size_t>(j) * K];
                    for (int k = 0; k < K; ++k) tj[k] = accj[k];
                }
            } else {
                for (int j = 0; j < cols; ++j) {
                    const double* aj = &ain[static_cast<std::size_t>(j) * K];
                    double* gWcol = gW.data() + static_cast<std::size_t>(j) * rows;
                    for (int i = 0; i < rows; ++i) {
                        const double* sbi = &cur[static_cast<std::size_t>(i) * K];
                        double gacc = 0.0;
                        for (int k = 0; k < K; ++k) gacc += sbi[k] * aj[k];
                        gWcol[i] += gacc;
                    }
                }
                break;
            }

            // tanh backward: activation adjoints -> pre-activation adjoints,
            // using tanh derivatives up to third order (the jets already
            // carry second derivatives).
            const std::vector<double>& s = cache.s[l - 1];
            const std::vector<double>& v = cache.v[l - 1];
            cur.assign(static_cast<std::size_t>(cols) * K, 0.0);
            for (int i = 0; i < cols; ++i) {
                const double* tb = &nxt[static_cast<std::size_t>(i) * K];
                const double* si = &s[static_cast<std::size_t>(i) * K];
                double* sb = &cur[static_cast<std::size_t>(i) * K];
                const double tv = v[i];
                const double d1 = 1.0 - tv * tv;
                sb[0] = tb[0] * d1;
                if (order == JetOrder::Value) continue;
                const double d2 = -2.0 * tv * d1;
                double acc0 = 0.0;
                for (int p = 0; p < na; ++p) {
                    acc0 += tb[1 + p] * si[1 + p];
                    sb[1 + p] = d1 * tb[1 + p];
                }
                sb[0] += d2 * acc0;
                if (order == JetOrder::Second) {
                    const double d3 = -2.0 * (d1 * d1 + tv * d2);
                    int h = 1 + na;
                    for (int p = 0; p < na; ++p) {
                        for (int q = p; q < na; ++q, ++h) {
                            const double th = tb[h];
                            sb[0] += th * (d2 * si[h] + d3 * si[1 + p] * si[1 + q]);
                            sb[h] = d1 * th;
                            sb[1 + p] += th * d2 * si[1 + q];
                            sb[1 + q] += th * d2 * si[1 + p];
                        }
                    }
                }
            }
        }
    }

    const NetView& view_;
    const MlpNetwork& net_;
    JetOrder order_;
    const std::vector<int>& active_;
    int na_;
    int K_;
};

}  // namespace

Jet2 forward_jet2(const MlpNetwork& net, const Eigen::VectorXd& x) {
    if (x.size() != net.input_dim)
        throw std::invalid_argument("forward_jet2: input dimension mismatch");
    std::vector<int> active(net.input_dim);
    for (int i = 0; i < net.input_dim; ++i) active[i] = i;
    NetView view(net);
    JetEngine engine(view, JetOrder::Second, active);
    PointCache cache;
    std::vector<double> out(engine.components());
    engine.forward(x, cache, out.data());

    Jet2 jet;
    jet.value = out[0];
    jet.grad = Eigen::VectorXd(net.input_dim);
    for (int p = 0; p < net.input_dim; ++p) jet.grad(p) = out[1 + p];
    jet.hess = Eigen::MatrixXd(net.input_dim, net.input_dim);
    for (int p = 0; p < net.input_dim; ++p)
        for (int q = p; q < net.input_dim; ++q) {
            const double hval = out[jet_hess_index(net.input_dim, p, q)];
            jet.hess(p, q) = hval;
            jet.hess(q, p) = hval;
        }
    return jet;
}

namespace {

// Value-only groups (boundary and symmetry terms) go through a batched
// matrix path: all points are stacked into one forward/backward sweep of
// plain GEMMs, processed in fixed-size blocks so memory stays bounded and
// the accumulation order stays deterministic.
double value_groups_loss(const MlpNetwork& net, const std::vector<LossGroup>& groups,
                         const std::vector<std::int64_t>& idx, double scale_mult,
                         ParamGradient* grad) {
    constexpr std::int64_t kBlockPoints = 8192;
    const int L = net.depth + 1;
    double loss = 0.0;

    std::int64_t g0 = 0;
    while (g0 < static_cast<std::int64_t>(idx.size())) {
        std::int64_t g1 = g0;
        std::int64_t npts = 0;
        while (g1 < static_cast<std::int64_t>(idx.size())) {
            const std::int64_t add =
                static_cast<std::int64_t>(groups[idx[g1]].points.size());
            if (npts > 0 && npts + add > kBlockPoints) break;
            npts += add;
            ++g1;
        }

        Eigen::MatrixXd x(net.input_dim, npts);
        std::int64_t col = 0;
        for (std::int64_t g = g0; g < g1; ++g)
            for (const LossPoint& pt : groups[idx[g]].points) x.col(col++) = pt.input;

        // Forward with cached activations (a[0] = input).
        std::vector<Eigen::MatrixXd> a(L);
        a[0] = std::move(x);
        Eigen::MatrixXd out;
        for (int l = 0; l < L; ++l) {
            Eigen::MatrixXd s = (net.weights[l] * a[l]).colwise() + net.biases[l];
            if (l < net.depth)
                a[l + 1] = s.array().tanh().matrix();
            else
                out = std::move(s);
        }

        Eigen::RowVectorXd adj(npts);
        col = 0;
        for (std::int64_t g = g0; g < g1; ++g) {
            const LossGroup& grp = groups[idx[g]];
            double r = grp.offset;
            const std::int64_t base = col;
            for (const LossPoint& pt : grp.points) r += pt.coeff(0) * out(0, col++);
            const double w = grp.scale * scale_mult;
            loss += w * r * r;
            if (grad) {
                const double seed = 2.0 * w * r;
                std::int64_t c = base;
                for (const LossPoint& pt : grp.points) adj(c++) = seed * pt.coeff(0);
            }
        }

        if (grad) {
            Eigen::MatrixXd cur = adj;
            for (int l = net.depth; l >= 0; --l) {
                grad->weights[l].noalias() += cur * a[l].transpose();
                grad->biases[l] += cur.rowwise().sum();
                if (l > 0) {
                    Eigen::MatrixXd back = net.weights[l].transpose() * cur;
                    cur = back.cwiseProduct(
                        (1.0 - a[l].array().square()).matrix());
                }
            }
        }
        g0 = g1;
    }
    return loss;
}

// Shared worker for the loss evaluators. Jet groups run through the
// per-point engine in fixed chunks; value-only groups take the batched
// path. The fixed-order reductions make the result independent of the
// thread count.
double loss_over_subset(const MlpNetwork& net, const std::vector<LossGroup>& groups,
                        const std::int64_t* subset_in, std::int64_t count_in, double scale_mult,
                        ParamGradient* grad, int n_chunks) {
    if (grad) grad->set_zero();
    if (count_in == 0) return 0.0;

    // Split by evaluation path, preserving order.
    std::vector<std::int64_t> jet_idx, value_idx;
    jet_idx.reserve(count_in);
    for (std::int64_t t = 0; t < count_in; ++t) {
        const std::int64_t gi = subset_in ? subset_in[t] : t;
        if (groups[gi].order == JetOrder::Value)
            value_idx.push_back(gi);
        else
            jet_idx.push_back(gi);
    }

    double total = 0.0;
    if (!value_idx.empty()) total += value_groups_loss(net, groups, value_idx, scale_mult, grad);
    const std::int64_t* subset = jet_idx.data();
    const std::int64_t count = static_cast<std::int64_t>(jet_idx.size());
    if (count == 0) {
        if (!std::isfinite(total)) throw std::runtime_error("loss evaluation: non-finite loss");
        return total;
    }
    const int nc = static_cast<int>(std::min<std::int64_t>(n_chunks, count));

    NetView view(net);
    std::vector<double> chunk_loss(nc, 0.0);
    std::vector<ParamGradient> chunk_grad;
    if (grad) {
        chunk_grad.resize(nc);
        for (int c = 0; c < nc; ++c) chunk_grad[c] = net.zero_gradient();
    }

#pragma omp parallel for schedule(static, 1)
    for (int c = 0; c < nc; ++c) {
        const std::int64_t lo = count * c / nc;
        const std::int64_t hi = count * (c + 1) / nc;
        std::vector<PointCache> caches(1);
        std::vector<std::vector<double>> outs(1);
        std::vector<double> adj;
        for (std::int64_t t = lo; t < hi; ++t) {
            const LossGroup& g = groups[subset[t]];
            JetEngine engine(view, g.order, g.active);
            const int K = engine.components();
            if (caches.size() < g.points.size()) caches.resize(g.points.size());
            if (outs.size() < g.points.size()) outs.resize(g.points.size());

            double r = g.offset;
            for (std::size_t p = 0; p < g.points.size(); ++p) {
                outs[p].resize(K);
                engine.forward(g.points[p].input, caches[p], outs[p].data());
                const Eigen::VectorXd& cf = g.points[p].coeff;
                for (int k = 0; k < K && k < cf.size(); ++k) r += cf(k) * outs[p][k];
            }
            const double w = g.scale * scale_mult;
            chunk_loss[c] += w * r * r;

            if (grad) {
                const double seed_scale = 2.0 * w * r;
                adj.resize(K);
                for (std::size_t p = 0; p < g.points.size(); ++p) {
                    const Eigen::VectorXd& cf = g.points[p].coeff;
                    for (int k = 0; k < K; ++k) adj[k] = k < cf.size() ? seed_scale * cf(k) : 0.0;
                    engine.backward(caches[p], adj.data(), chunk_grad[c]);
                }
            }
        }
    }

    for (int c = 0; c < nc; ++c) {
        total += chunk_loss[c];
        if (grad) grad->axpy(1.0, chunk_grad[c]);
    }
    if (!std::isfinite(total)) throw std::runtime_error("loss evaluation: non-finite loss");
    return total;
}

}  // namespace

double loss_param_grad(const MlpNetwork& net, const std::vector<LossGroup>& groups,
                       ParamGradient& grad, int n_chunks) {
    return loss_over_subset(net, groups, nullptr, static_cast<std::int64_t>(groups.size()), 1.0,
                            &grad, n_chunks);
}

double loss_param_grad(const MlpNetwork& net, const std::vector<LossGroup>& groups,
                       const std::vector<std::int64_t>& subset, double scale_mult,
                       ParamGradient& grad, int n_chunks) {
    return loss_over_subset(net, groups, subset.data(),
                            static_cast<std::int64_t>(subset.size()), scale_mult, &grad, n_chunks);
}

double loss_value(const MlpNetwork& net, const std::vector<LossGroup>& groups, int n_chunks) {
    return loss_over_subset(net, groups, nullptr, static_cast<std::int64_t>(groups.size()), 1.0,
                            nullptr, n_chunks);
}

AdamWState AdamWState::fresh(const MlpNetwork& net) {
    AdamWState st;
    for (const auto& w : net.weights) {
        st.m_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        st.v_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : net.biases) {
        st.m_b.push_back(Eigen::VectorXd::Zero(b.size()));
        st.v_b.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    return st;
}

void adamw_step(MlpNetwork& net, const ParamGradient& grad, AdamWState& state,
                const AdamWParams& params) {
    if (!grad.all_finite())
        throw std::runtime_error("adamw_step: non-finite gradient");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(state.step));

    auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
        m = params.beta1 * m + (1.0 - params.beta1) * g;
        v = params.beta2 * v + (1.0 - params.beta2) * g.cwiseProduct(g);
        theta -= params.lr * params.weight_decay * theta;
        theta -= (params.lr / bc1) *
                 m.cwiseQuotient((v / bc2).cwiseSqrt().unaryExpr(
                     [&](double s) { return s + params.eps; }));
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        update(net.weights[l], grad.weights[l], state.m_w[l], state.v_w[l]);
        update(net.biases[l], grad.biases[l], state.m_b[l], state.v_b[l]);
    }
}

}  // namespace sgreen
