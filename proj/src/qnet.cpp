#include "goaltrack/qnet.hpp"

#include "goaltrack/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace goaltrack {

namespace {

constexpr const char* kCheckpointMagic = "goaltrack-qnet";
constexpr int kCheckpointVersion = 1;

void check_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw std::invalid_argument("qnet: need at least input and output sizes");
    for (int s : sizes)
        if (s < 1) throw std::invalid_argument("qnet: layer sizes must be positive");
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

template <typename F>
void for_each_block(QNetParams& p, F&& f) {
    for (auto& layer : p.layers) {
        f(layer.w.data(), static_cast<std::size_t>(layer.w.size()));
        f(layer.b.data(), static_cast<std::size_t>(layer.b.size()));
    }
}

template <typename F>
void for_each_block(const QNetParams& p, F&& f) {
    for (const auto& layer : p.layers) {
        f(layer.w.data(), static_cast<std::size_t>(layer.w.size()));
        f(layer.b.data(), static_cast<std::size_t>(layer.b.size()));
    }
}

} // namespace

QNetParams QNetParams::zeros(const std::vector<int>& sizes) {
    check_sizes(sizes);
    QNetParams p;
    for (std::size_t i = 1; i < sizes.size(); ++i)
        p.layers.push_back({Eigen::MatrixXd::Zero(sizes[i], sizes[i - 1]), Eigen::VectorXd::Zero(sizes[i])});
    return p;
}

QNetParams QNetParams::glorot(const std::vector<int>& sizes, Rng& rng) {
    QNetParams p = zeros(sizes);
    for (auto& layer : p.layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.w.rows() + layer.w.cols()));
        for (Eigen::Index i = 0; i < layer.w.size(); ++i) layer.w.data()[i] = rng.uniform(-limit, limit);
    }
    return p;
}

std::vector<int> QNetParams::sizes() const {
    std::vector<int> out;
    if (layers.empty()) return out;
    out.push_back(static_cast<int>(layers.front().w.cols()));
    for (const auto& l : layers) out.push_back(static_cast<int>(l.w.rows()));
    return out;
}

int QNetParams::input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().w.cols()); }
int QNetParams::output_size() const { return layers.empty() ? 0 : static_cast<int>(layers.back().w.rows()); }

std::size_t QNetParams::parameter_count() const {
    std::size_t n = 0;
    for_each_block(*this, [&](const double*, std::size_t len) { n += len; });
    return n;
}

std::vector<double> QNetParams::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for_each_block(*this, [&](const double* p, std::size_t len) { out.insert(out.end(), p, p + len); });
    return out;
}

void QNetParams::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw std::invalid_argument("qnet: flat parameter size mismatch");
    std::size_t pos = 0;
    for_each_block(*this, [&](double* p, std::size_t len) {
        std::copy_n(flat.data() + pos, len, p);
        pos += len;
    });
}

bool QNetParams::all_finite() const {
    bool ok = true;
    for_each_block(*this, [&](const double* p, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) ok = ok && std::isfinite(p[i]);
    });
    return ok;
}

bool operator==(const QNetParams& a, const QNetParams& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const auto& la = a.layers[i];
        const auto& lb = b.layers[i];
        if (la.w.rows() != lb.w.rows() || la.w.cols() != lb.w.cols() || la.w != lb.w || la.b != lb.b) return false;
    }
    return true;
}

Eigen::VectorXd forward(const QNetParams& params, std::span<const double> state) {
    if (static_cast<int>(state.size()) != params.input_size())
        throw std::invalid_argument("qnet: state has " + std::to_string(state.size()) + " entries, network expects " +
                                    std::to_string(params.input_size()));
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& layer = params.layers[i];
        Eigen::VectorXd z = layer.w * a + layer.b;
        a = (i + 1 < params.layers.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
    }
    return a;
}

Eigen::MatrixXd forward_batch(const QNetParams& params, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != params.input_size()) throw std::invalid_argument("qnet: batch input size mismatch");
    Eigen::MatrixXd a = inputs;
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& layer = params.layers[i];
        Eigen::MatrixXd z = layer.w * a;
        z.colwise() += layer.b;
        a = (i + 1 < params.layers.size()) ? relu(z) : z;
    }
    return a;
}

void td_loss_grad(std::span<const Transition> batch, const QNetParams& theta, const QNetParams& theta_star,
                  double gamma, TdWorkspace& ws, TdLossGrad& out) {
    if (batch.empty()) throw std::invalid_argument("td_loss_grad: empty batch");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("td_loss_grad: gamma must be in (0, 1]");
    if (theta.sizes() != theta_star.sizes()) throw std::invalid_argument("td_loss_grad: network shape mismatch");
    const auto n = static_cast<Eigen::Index>(batch.size());
    const Eigen::Index in = theta.input_size();
    const Eigen::Index out_size = theta.output_size();
    const std::size_t depth = theta.layers.size();

    ws.x.resize(in, n);
    ws.x_next.resize(in, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Transition& t = batch[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(t.state.size()) != in || static_cast<Eigen::Index>(t.next_state.size()) != in)
            throw std::invalid_argument("td_loss_grad: transition state size mismatch");
        if (static_cast<Eigen::Index>(t.action) >= out_size)
            throw std::invalid_argument("td_loss_grad: action out of range");
        ws.x.col(i) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), in);
        ws.x_next.col(i) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), in);
    }

    // Forward passes; the online pass keeps pre-activations for backprop.
    ws.acts.resize(depth);
    ws.pre.resize(depth);
    ws.target_acts.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        const bool hidden = l + 1 < depth;
        const Eigen::MatrixXd& a_prev = l == 0 ? ws.x : ws.acts[l - 1];
        ws.pre[l].noalias() = theta.layers[l].w * a_prev;
        ws.pre[l].colwise() += theta.layers[l].b;
        if (hidden) {
            ws.acts[l] = ws.pre[l].cwiseMax(0.0);
        } else {
            ws.acts[l] = ws.pre[l];
        }

        const Eigen::MatrixXd& t_prev = l == 0 ? ws.x_next : ws.target_acts[l - 1];
        ws.target_acts[l].noalias() = theta_star.layers[l].w * t_prev;
        ws.target_acts[l].colwise() += theta_star.layers[l].b;
        if (hidden) ws.target_acts[l] = ws.target_acts[l].cwiseMax(0.0);
    }
    const Eigen::MatrixXd& q = ws.acts.back();
    const Eigen::MatrixXd& q_next = ws.target_acts.back();

    ws.deltas.resize(depth);
    Eigen::MatrixXd& top = ws.deltas.back();
    top.setZero(out_size, n);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Transition& t = batch[static_cast<std::size_t>(i)];
        const double y = t.done ? t.reward : t.reward + gamma * q_next.col(i).maxCoeff();
        const auto a = static_cast<Eigen::Index>(t.action);
        const double err = q(a, i) - y;
        loss += err * err;
        top(a, i) = 2.0 * err / static_cast<double>(n);
    }
    out.loss = loss / static_cast<double>(n);

    out.grads.layers.resize(depth);
    for (std::size_t l = depth; l-- > 0;) {
        const Eigen::MatrixXd& a_prev = l == 0 ? ws.x : ws.acts[l - 1];
        const Eigen::MatrixXd& delta = ws.deltas[l];
        out.grads.layers[l].w.noalias() = delta * a_prev.transpose();
        out.grads.layers[l].b = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd& below = ws.deltas[l - 1];
            below.noalias() = theta.layers[l].w.transpose() * delta;
            below.array() *= (ws.pre[l - 1].array() > 0.0).cast<double>();
        }
    }
}

TdLossGrad td_loss_grad(std::span<const Transition> batch, const QNetParams& theta, const QNetParams& theta_star,
                        double gamma) {
    TdWorkspace ws;
    TdLossGrad out;
    td_loss_grad(batch, theta, theta_star, gamma, ws, out);
    return out;
}

OptimState OptimState::for_params(const QNetParams& theta, double lr, double rho, double eps) {
    OptimState s;
    s.sq_avg = QNetParams::zeros(theta.sizes());
    s.lr = lr;
    s.rho = rho;
    s.eps = eps;
    return s;
}

void rmsprop_step(QNetParams& theta, const QNetParams& grads, OptimState& opt) {
    if (opt.sq_avg.layers.empty()) opt.sq_avg = QNetParams::zeros(theta.sizes());
    if (theta.sizes() != grads.sizes() || theta.sizes() != opt.sq_avg.sizes())
        throw std::invalid_argument("rmsprop_step: shape mismatch");
    for (std::size_t l = 0; l < theta.layers.size(); ++l) {
        auto update = [&](auto& param, const auto& g, auto& v) {
            v.array() = opt.rho * v.array() + (1.0 - opt.rho) * g.array().square();
            param.array() -= opt.lr * g.array() / (v.array() + opt.eps).sqrt();
        };
        update(theta.layers[l].w, grads.layers[l].w, opt.sq_avg.layers[l].w);
        update(theta.layers[l].b, grads.layers[l].b, opt.sq_avg.layers[l].b);
    }
}

void save_checkpoint(std::ostream& os, const QNetParams& params, const OptimState* opt) {
    os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
    const auto sizes = params.sizes();
    os << "sizes " << sizes.size();
    for (int s : sizes) os << ' ' << s;
    os << '\n';
    auto write_values = [&](const QNetParams& p) {
        for_each_block(p, [&](const double* v, std::size_t len) {
            for (std::size_t i = 0; i < len; ++i) os << format_double(v[i]) << (i + 1 == len ? '\n' : ' ');
        });
    };
    os << "params\n";
    write_values(params);
    if (opt != nullptr) {
        os << "rmsprop " << format_double(opt->rho) << ' ' << format_double(opt->eps) << ' '
           << format_double(opt->lr) << '\n';
        write_values(opt->sq_avg);
    } else {
        os << "no-optimizer\n";
    }
}

Checkpoint load_checkpoint(std::istream& is) {
    auto fail = [](const std::string& what) -> void { throw std::runtime_error("checkpoint: " + what); };
    auto read_double = [&]() {
        std::string tok;
        if (!(is >> tok)) fail("truncated file");
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) fail("bad number '" + tok + "'");
        return v;
    };
    auto expect = [&](const std::string& word) {
        std::string tok;
        if (!(is >> tok) || tok != word) fail("expected '" + word + "'");
    };

    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != kCheckpointMagic) fail("not a goaltrack checkpoint");
    if (version != kCheckpointVersion) fail("unsupported version " + std::to_string(version));
    expect("sizes");
    std::size_t count = 0;
    if (!(is >> count) || count < 2 || count > 64) fail("bad layer count");
    std::vector<int> sizes(count);
    for (auto& s : sizes)
        if (!(is >> s) || s < 1) fail("bad layer size");

    auto read_values = [&](QNetParams& p) {
        for_each_block(p, [&](double* v, std::size_t len) {
            for (std::size_t i = 0; i < len; ++i) v[i] = read_double();
        });
    };
    Checkpoint cp;
    cp.params = QNetParams::zeros(sizes);
    expect("params");
    read_values(cp.params);
    std::string tag;
    if (!(is >> tag)) fail("truncated file");
    if (tag == "rmsprop") {
        cp.has_optimizer = true;
        cp.optimizer.rho = read_double();
        cp.optimizer.eps = read_double();
        cp.optimizer.lr = read_double();
        cp.optimizer.sq_avg = QNetParams::zeros(sizes);
        read_values(cp.optimizer.sq_avg);
    } else if (tag != "no-optimizer") {
        fail("unknown section '" + tag + "'");
    }
    return cp;
}

std::uint64_t checksum(const QNetParams& params) {
    std::uint64_t h = 1469598103934665603ULL;
    for_each_block(params, [&](const double* v, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, &v[i], sizeof bits);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xffu;
                h *= 1099511628211ULL;
            }
        }
    });
    return h;
}

} // namespace goaltrack
