#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orch/preprocess.hpp"
#include "orch/rng.hpp"

namespace orch {

struct Hyperparams {
    double learning_rate = 0.01;
    double gamma = 0.95;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int64_t epsilon_decay_steps = 10000;
    int batch_size = 64;
    int64_t target_sync_every = 500;
    int64_t train_steps = 50000;
    int hidden_layers = 5;
    int hidden_width = 64;
    double grad_clip_norm = 5.0;
    int replay_capacity = 50000;

    void validate() const;
};

// Linear from epsilon_start to epsilon_end over epsilon_decay_steps, then flat.
double epsilon_at(const Hyperparams& hp, int64_t step);

// Multilayer perceptron Q(s, .) with rectifier hidden layers and identity
// output, plus the learned task-id embedding table that fills the first
// eight state dimensions. The embedding is part of the trainable
// parameters: training re-embeds stored experiences by bucket so its
// gradient is exact.
struct QNetwork {
    std::vector<Eigen::MatrixXd> weights; // out x in per layer
    std::vector<Eigen::VectorXd> biases;
    EmbeddingTable embedding;             // kEmbeddingBuckets x kEmbeddingWidth

    int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
    int output_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }
    std::vector<int> layer_dims() const;
    bool finite() const;

    // Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] init, seed-derived.
    static QNetwork init(int input, int n_actions, const Hyperparams& hp, uint64_t seed);
};

// Input vector for the network: embedding span re-looked-up by bucket when
// the state carries one, raw values otherwise.
Eigen::VectorXd network_input(const QNetwork& net, const StateVector& s);

Eigen::VectorXd forward(const QNetwork& net, const StateVector& s); // throws DimensionMismatch

struct Experience {
    StateVector s;
    int action = 0;
    double reward = 0.0;
    StateVector s_next;
    bool done = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}

    void push(Experience e);
    size_t size() const { return ring_.size(); }
    size_t capacity() const { return capacity_; }
    const Experience& at(size_t i) const { return ring_[i]; }

    std::vector<const Experience*> sample(size_t batch, Rng& rng) const;

private:
    size_t capacity_;
    size_t write_ = 0;
    std::vector<Experience> ring_;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::MatrixXd embedding;

    double squared_norm() const;
};

// Mean squared TD error of the batch against y = r + gamma * (1 - done) *
// max_a' Q_target(s', a').
double td_loss(const QNetwork& net, const QNetwork& target,
               const std::vector<const Experience*>& batch, const Hyperparams& hp);

std::pair<double, Gradients> td_loss_and_gradients(const QNetwork& net, const QNetwork& target,
                                                   const std::vector<const Experience*>& batch,
                                                   const Hyperparams& hp);

// One clipped SGD step; returns the pre-update loss. Throws EmptyBatch.
double train_step(QNetwork& net, const QNetwork& target,
                  const std::vector<const Experience*>& batch, const Hyperparams& hp);

// Epsilon-greedy; greedy ties resolve to the lowest index.
int act(const QNetwork& net, const StateVector& s, double epsilon, Rng& rng);
int greedy_action(const QNetwork& net, const StateVector& s);

// Max Q over remediation actions minus max over standard actions; the
// continuous flagging score behind the ROC curve.
double q_margin(const QNetwork& net, const StateVector& s, int n_workers);

// Environment abstraction for the trainer: the warehouse adapter and the
// toy MDPs used by the tabular consistency tests both implement it.
class TrainEnv {
public:
    virtual ~TrainEnv() = default;
    virtual void start_episode(int64_t episode_index) = 0;
    virtual bool done() const = 0;
    virtual StateVector observe(const QNetwork& net) const = 0;
    virtual std::pair<double, bool> apply(int action_index) = 0; // reward, done
    virtual int action_dim() const = 0;
    virtual int state_dim() const = 0;
};

struct TrainResult {
    QNetwork net;
    std::vector<double> episode_rewards;
    std::vector<double> losses; // one sample per target sync
    int64_t steps = 0;
};

TrainResult train_dqn(TrainEnv& env, const Hyperparams& hp, uint64_t seed);

// Grid search over hyperparameter points; score_fn returns the validation
// disruption-recovery accuracy of one point on one fold. Best point by
// highest mean, ties by earliest grid order. Throws EmptyGrid.
struct GridScore {
    Hyperparams hp;
    std::vector<double> fold_scores;
    double mean_score = 0.0;
};

struct GridResult {
    size_t best_index = 0;
    std::vector<GridScore> table;
};

GridResult grid_search(const std::vector<Hyperparams>& grid, int folds,
                       const std::function<double(const Hyperparams&, int)>& score_fn);

// Versioned JSON checkpoint; reload reproduces forward outputs bit-exactly.
void save_dqn_checkpoint(const QNetwork& net, const Hyperparams& hp, uint64_t seed,
                         int64_t steps, const std::string& path);

struct DqnCheckpoint {
    QNetwork net;
    Hyperparams hp;
    uint64_t seed = 0;
    int64_t steps = 0;
};

DqnCheckpoint load_dqn_checkpoint(const std::string& path);

} // namespace orch
