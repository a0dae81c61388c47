#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace marlsim {

// Shape of the policy-value network: obs -> tanh -> tanh -> one categorical
// logit block per action dimension plus a scalar state value.
struct NetShape {
    int obs_dim = 0;
    int hidden = 64;
    std::vector<int> head_dims;

    int total_head_dim() const;
    bool operator==(const NetShape&) const = default;
};

// Feedforward policy-value network with all parameters in one contiguous
// double vector (gradient checks and optimizer bookkeeping stay trivial).
// Layout: W1[H*D], b1[H], W2[H*H], b2[H], Wo[(L+1)*H], bo[L+1], where L is
// the summed head width and output row L is the state value.
class PolicyValueNet {
public:
    explicit PolicyValueNet(NetShape shape);

    const NetShape& shape() const { return shape_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Xavier-uniform trunk, zero output layer: the initial policy is exactly
    // uniform over every head and the initial value is exactly zero.
    void init(std::uint64_t seed);

    struct Forward {
        int batch = 0;
        std::vector<double> x;    // batch x D
        std::vector<double> h1;   // batch x H
        std::vector<double> h2;   // batch x H
        std::vector<double> out;  // batch x (L+1): head logits then value
    };
    Forward forward(const double* obs, int batch) const;

    double value(const Forward& f, int t) const;
    // Writes the log-softmax of head `head` for sample `t` into lp[K_head].
    void head_log_probs(const Forward& f, int t, int head, double* lp) const;
    double action_log_prob(const Forward& f, int t, const int* action) const;
    double entropy(const Forward& f, int t) const;
    std::vector<int> sample_action(const Forward& f, int t, std::mt19937_64& rng) const;
    std::vector<int> greedy_action(const Forward& f, int t) const;

    // Backpropagates d(loss)/d(out) — shape batch x (L+1) — into a parameter
    // gradient the size of params().
    std::vector<double> backward(const Forward& f, const std::vector<double>& dout) const;

private:
    NetShape shape_;
    std::vector<int> head_offsets_;  // prefix sums into the logit block
    std::vector<double> params_;

    const double* w1() const;
    const double* b1() const;
    const double* w2() const;
    const double* b2() const;
    const double* wo() const;
    const double* bo() const;
};

class Adam {
public:
    Adam(std::size_t n, double step_size, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(std::vector<double>& params, const std::vector<double>& grad);

    double step_size() const { return step_size_; }
    void set_step_size(double s) { step_size_ = s; }
    std::uint64_t steps_taken() const { return t_; }
    const std::vector<double>& m() const { return m_; }
    const std::vector<double>& v() const { return v_; }
    void restore(std::uint64_t t, std::vector<double> m, std::vector<double> v);

private:
    double step_size_;
    double beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace marlsim
