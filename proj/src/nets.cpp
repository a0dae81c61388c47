#include "marlsim/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "marlsim/common.hpp"
#include "marlsim/kernels.hpp"

namespace marlsim {

int NetShape::total_head_dim() const {
    return std::accumulate(head_dims.begin(), head_dims.end(), 0);
}

PolicyValueNet::PolicyValueNet(NetShape shape) : shape_(std::move(shape)) {
    if (shape_.obs_dim <= 0) throw ConfigError("network obs_dim must be positive");
    if (shape_.hidden <= 0) throw ConfigError("network hidden width must be positive");
    if (shape_.head_dims.empty()) throw ConfigError("network needs at least one action head");
    head_offsets_.resize(shape_.head_dims.size() + 1, 0);
    for (std::size_t i = 0; i < shape_.head_dims.size(); ++i) {
        if (shape_.head_dims[i] <= 0) throw ConfigError("head dimensions must be positive");
        head_offsets_[i + 1] = head_offsets_[i] + shape_.head_dims[i];
    }
    const int d = shape_.obs_dim, h = shape_.hidden;
    const int l1 = shape_.total_head_dim() + 1;
    params_.assign(static_cast<std::size_t>(h) * d + h + static_cast<std::size_t>(h) * h + h +
                       static_cast<std::size_t>(l1) * h + l1,
                   0.0);
}

const double* PolicyValueNet::w1() const { return params_.data(); }
const double* PolicyValueNet::b1() const {
    return params_.data() + static_cast<std::size_t>(shape_.hidden) * shape_.obs_dim;
}
const double* PolicyValueNet::w2() const { return b1() + shape_.hidden; }
const double* PolicyValueNet::b2() const {
    return w2() + static_cast<std::size_t>(shape_.hidden) * shape_.hidden;
}
const double* PolicyValueNet::wo() const { return b2() + shape_.hidden; }
const double* PolicyValueNet::bo() const {
    return wo() + static_cast<std::size_t>(shape_.total_head_dim() + 1) * shape_.hidden;
}

void PolicyValueNet::init(std::uint64_t seed) {
    std::fill(params_.begin(), params_.end(), 0.0);
    std::mt19937_64 rng(seed);
    const int d = shape_.obs_dim, h = shape_.hidden;
    auto xavier = [&](double* w, std::size_t n, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (std::size_t i = 0; i < n; ++i) w[i] = (2.0 * uniform_unit(rng) - 1.0) * limit;
    };
    double* p = params_.data();
    xavier(p, static_cast<std::size_t>(h) * d, d, h);
    xavier(p + static_cast<std::size_t>(h) * d + h, static_cast<std::size_t>(h) * h, h, h);
    // output layer stays zero: uniform policy, zero value
}

PolicyValueNet::Forward PolicyValueNet::forward(const double* obs, int batch) const {
    const int d = shape_.obs_dim, h = shape_.hidden;
    const int l1 = shape_.total_head_dim() + 1;
    Forward f;
    f.batch = batch;
    f.x.assign(obs, obs + static_cast<std::size_t>(batch) * d);
    f.h1.resize(static_cast<std::size_t>(batch) * h);
    f.h2.resize(static_cast<std::size_t>(batch) * h);
    f.out.resize(static_cast<std::size_t>(batch) * l1);

    kernels::gemm_nt(f.h1.data(), f.x.data(), w1(), batch, d, h);
    for (int t = 0; t < batch; ++t)
        for (int j = 0; j < h; ++j) {
            double& z = f.h1[static_cast<std::size_t>(t) * h + j];
            z = std::tanh(z + b1()[j]);
        }
    kernels::gemm_nt(f.h2.data(), f.h1.data(), w2(), batch, h, h);
    for (int t = 0; t < batch; ++t)
        for (int j = 0; j < h; ++j) {
            double& z = f.h2[static_cast<std::size_t>(t) * h + j];
            z = std::tanh(z + b2()[j]);
        }
    kernels::gemm_nt(f.out.data(), f.h2.data(), wo(), batch, h, l1);
    for (int t = 0; t < batch; ++t)
        for (int j = 0; j < l1; ++j) f.out[static_cast<std::size_t>(t) * l1 + j] += bo()[j];
    return f;
}

double PolicyValueNet::value(const Forward& f, int t) const {
    const int l1 = shape_.total_head_dim() + 1;
    return f.out[static_cast<std::size_t>(t) * l1 + l1 - 1];
}

void PolicyValueNet::head_log_probs(const Forward& f, int t, int head, double* lp) const {
    const int l1 = shape_.total_head_dim() + 1;
    const int k = shape_.head_dims[head];
    const double* z = f.out.data() + static_cast<std::size_t>(t) * l1 + head_offsets_[head];
    double mx = z[0];
    for (int i = 1; i < k; ++i) mx = std::max(mx, z[i]);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += std::exp(z[i] - mx);
    const double lse = mx + std::log(sum);
    for (int i = 0; i < k; ++i) lp[i] = z[i] - lse;
}

double PolicyValueNet::action_log_prob(const Forward& f, int t, const int* action) const {
    double total = 0.0;
    std::vector<double> lp;
    for (std::size_t head = 0; head < shape_.head_dims.size(); ++head) {
        lp.resize(shape_.head_dims[head]);
        head_log_probs(f, t, static_cast<int>(head), lp.data());
        total += lp[action[head]];
    }
    return total;
}

double PolicyValueNet::entropy(const Forward& f, int t) const {
    double total = 0.0;
    std::vector<double> lp;
    for (std::size_t head = 0; head < shape_.head_dims.size(); ++head) {
        lp.resize(shape_.head_dims[head]);
        head_log_probs(f, t, static_cast<int>(head), lp.data());
        for (double l : lp) total -= std::exp(l) * l;
    }
    return total;
}

std::vector<int> PolicyValueNet::sample_action(const Forward& f, int t, std::mt19937_64& rng) const {
    std::vector<int> action(shape_.head_dims.size(), 0);
    std::vector<double> lp;
    for (std::size_t head = 0; head < shape_.head_dims.size(); ++head) {
        const int k = shape_.head_dims[head];
        lp.resize(k);
        head_log_probs(f, t, static_cast<int>(head), lp.data());
        const double u = uniform_unit(rng);
        double acc = 0.0;
        int chosen = k - 1;
        for (int i = 0; i < k; ++i) {
            acc += std::exp(lp[i]);
            if (u < acc) {
                chosen = i;
                break;
            }
        }
        action[head] = chosen;
    }
    return action;
}

std::vector<int> PolicyValueNet::greedy_action(const Forward& f, int t) const {
    const int l1 = shape_.total_head_dim() + 1;
    std::vector<int> action(shape_.head_dims.size(), 0);
    for (std::size_t head = 0; head < shape_.head_dims.size(); ++head) {
        const int k = shape_.head_dims[head];
        const double* z = f.out.data() + static_cast<std::size_t>(t) * l1 + head_offsets_[head];
        int best = 0;
        for (int i = 1; i < k; ++i)
            if (z[i] > z[best]) best = i;
        action[head] = best;
    }
    return action;
}

std::vector<double> PolicyValueNet::backward(const Forward& f, const std::vector<double>& dout) const {
    const int b = f.batch;
    const int d = shape_.obs_dim, h = shape_.hidden;
    const int l1 = shape_.total_head_dim() + 1;
    std::vector<double> grad(params_.size(), 0.0);
    double* g = grad.data();
    double* gw1 = g;
    double* gb1 = g + static_cast<std::size_t>(h) * d;
    double* gw2 = gb1 + h;
    double* gb2 = gw2 + static_cast<std::size_t>(h) * h;
    double* gwo = gb2 + h;
    double* gbo = gwo + static_cast<std::size_t>(l1) * h;

    // output layer
    kernels::gemm_tn(gwo, dout.data(), f.h2.data(), b, l1, h);
    for (int t = 0; t < b; ++t)
        for (int j = 0; j < l1; ++j) gbo[j] += dout[static_cast<std::size_t>(t) * l1 + j];

    // into h2
    std::vector<double> dh(static_cast<std::size_t>(b) * h);
    kernels::gemm_nn(dh.data(), dout.data(), wo(), b, l1, h);
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= 1.0 - f.h2[i] * f.h2[i];

    kernels::gemm_tn(gw2, dh.data(), f.h1.data(), b, h, h);
    for (int t = 0; t < b; ++t)
        for (int j = 0; j < h; ++j) gb2[j] += dh[static_cast<std::size_t>(t) * h + j];

    // into h1
    std::vector<double> dh1(static_cast<std::size_t>(b) * h);
    kernels::gemm_nn(dh1.data(), dh.data(), w2(), b, h, h);
    for (std::size_t i = 0; i < dh1.size(); ++i) dh1[i] *= 1.0 - f.h1[i] * f.h1[i];

    kernels::gemm_tn(gw1, dh1.data(), f.x.data(), b, h, d);
    for (int t = 0; t < b; ++t)
        for (int j = 0; j < h; ++j) gb1[j] += dh1[static_cast<std::size_t>(t) * h + j];

    return grad;
}

Adam::Adam(std::size_t n, double step_size, double beta1, double beta2, double eps)
    : step_size_(step_size), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw ConfigError("optimizer size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        params[i] -= step_size_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
}

void Adam::restore(std::uint64_t t, std::vector<double> m, std::vector<double> v) {
    if (m.size() != m_.size() || v.size() != v_.size())
        throw ConfigError("optimizer size mismatch");
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
}

}  // namespace marlsim
