#include "orch/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace orch {

using ordered_json = nlohmann::ordered_json;

void Hyperparams::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw OrchError(ErrorCode::InvalidConfig, "gamma in [0,1)");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) ||
        !(epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
        throw OrchError(ErrorCode::InvalidConfig, "epsilons in [0,1]");
    }
    if (learning_rate <= 0.0) throw OrchError(ErrorCode::InvalidConfig, "learning_rate positive");
    if (batch_size < 1) throw OrchError(ErrorCode::InvalidConfig, "batch_size positive");
    if (hidden_layers < 1 || hidden_width < 1) {
        throw OrchError(ErrorCode::InvalidConfig, "hidden topology positive");
    }
    if (target_sync_every < 1) throw OrchError(ErrorCode::InvalidConfig, "target_sync_every positive");
    if (epsilon_decay_steps < 1) throw OrchError(ErrorCode::InvalidConfig, "epsilon_decay_steps positive");
    if (train_steps < 0) throw OrchError(ErrorCode::InvalidConfig, "train_steps non-negative");
    if (replay_capacity < batch_size) throw OrchError(ErrorCode::InvalidConfig, "replay too small");
}

double epsilon_at(const Hyperparams& hp, int64_t step) {
    const double frac = std::min(1.0, static_cast<double>(step) /
                                          static_cast<double>(hp.epsilon_decay_steps));
    return hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) * frac;
}

std::vector<int> QNetwork::layer_dims() const {
    std::vector<int> dims;
    if (weights.empty()) return dims;
    dims.push_back(static_cast<int>(weights.front().cols()));
    for (const auto& w : weights) dims.push_back(static_cast<int>(w.rows()));
    return dims;
}

bool QNetwork::finite() const {
    for (const auto& w : weights) {
        if (!w.allFinite()) return false;
    }
    for (const auto& b : biases) {
        if (!b.allFinite()) return false;
    }
    return embedding.allFinite();
}

QNetwork QNetwork::init(int input, int n_actions, const Hyperparams& hp, uint64_t seed) {
    QNetwork net;
    Rng rng(derive_seed(seed, stream_tag::net_init));
    std::vector<int> dims;
    dims.push_back(input);
    for (int l = 0; l < hp.hidden_layers; ++l) dims.push_back(hp.hidden_width);
    dims.push_back(n_actions);

    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l];
        const int out = dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Eigen::MatrixXd w(out, in);
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform_real(-bound, bound);
        }
        Eigen::VectorXd b(out);
        for (int r = 0; r < out; ++r) b[r] = rng.uniform_real(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }

    net.embedding.resize(kEmbeddingBuckets, StateVector::kEmbeddingWidth);
    const double ebound = 1.0 / std::sqrt(static_cast<double>(StateVector::kEmbeddingWidth));
    for (int r = 0; r < kEmbeddingBuckets; ++r) {
        for (int c = 0; c < StateVector::kEmbeddingWidth; ++c) {
            net.embedding(r, c) = rng.uniform_real(0.0, ebound);
        }
    }
    return net;
}

Eigen::VectorXd network_input(const QNetwork& net, const StateVector& s) {
    if (s.task_bucket < 0) return s.values;
    Eigen::VectorXd x = s.values;
    x.head<StateVector::kEmbeddingWidth>() = net.embedding.row(s.task_bucket).transpose();
    return x;
}

namespace {

Eigen::VectorXd forward_input(const QNetwork& net, const Eigen::VectorXd& x0) {
    Eigen::VectorXd a = x0;
    for (size_t l = 0; l < net.weights.size(); ++l) {
        a = (net.weights[l] * a + net.biases[l]).eval();
        if (l + 1 < net.weights.size()) a = a.cwiseMax(0.0);
    }
    return a;
}

} // namespace

Eigen::VectorXd forward(const QNetwork& net, const StateVector& s) {
    const Eigen::VectorXd x = network_input(net, s);
    if (x.size() != net.input_dim()) {
        throw OrchError(ErrorCode::DimensionMismatch,
                        "input " + std::to_string(x.size()) + " vs net " +
                            std::to_string(net.input_dim()));
    }
    return forward_input(net, x);
}

void ReplayBuffer::push(Experience e) {
    if (ring_.size() < capacity_) {
        ring_.push_back(std::move(e));
    } else {
        ring_[write_] = std::move(e); // overwrite oldest
    }
    write_ = (write_ + 1) % capacity_;
}

std::vector<const Experience*> ReplayBuffer::sample(size_t batch, Rng& rng) const {
    std::vector<const Experience*> out;
    out.reserve(batch);
    for (size_t i = 0; i < batch; ++i) {
        out.push_back(&ring_[rng.below(ring_.size())]);
    }
    return out;
}

double Gradients::squared_norm() const {
    double total = embedding.squaredNorm();
    for (const auto& w : weights) total += w.squaredNorm();
    for (const auto& b : biases) total += b.squaredNorm();
    return total;
}

namespace {

// Forward pass over a batch with cached pre-activations for backprop.
struct BatchForward {
    Eigen::MatrixXd x0;                  // input x batch
    std::vector<Eigen::MatrixXd> zs;     // pre-activation per layer
    std::vector<Eigen::MatrixXd> as;     // post-activation per layer (last = output)
};

BatchForward batch_forward(const QNetwork& net, const Eigen::MatrixXd& x0) {
    BatchForward f;
    f.x0 = x0;
    Eigen::MatrixXd a = x0;
    for (size_t l = 0; l < net.weights.size(); ++l) {
        Eigen::MatrixXd z = net.weights[l] * a;
        z.colwise() += net.biases[l];
        f.zs.push_back(z);
        a = (l + 1 < net.weights.size()) ? z.cwiseMax(0.0).eval() : z;
        f.as.push_back(a);
    }
    return f;
}

Eigen::MatrixXd batch_inputs(const QNetwork& net, const std::vector<const Experience*>& batch,
                             bool next_state) {
    const auto dim = static_cast<Eigen::Index>(net.input_dim());
    Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(batch.size()));
    for (size_t i = 0; i < batch.size(); ++i) {
        const StateVector& s = next_state ? batch[i]->s_next : batch[i]->s;
        x.col(static_cast<Eigen::Index>(i)) = network_input(net, s);
    }
    return x;
}

Eigen::VectorXd td_targets(const QNetwork& target, const std::vector<const Experience*>& batch,
                           const Hyperparams& hp) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
    const Eigen::MatrixXd xn = batch_inputs(target, batch, true);
    const BatchForward fn = batch_forward(target, xn);
    for (size_t i = 0; i < batch.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        const double bootstrap =
            batch[i]->done ? 0.0 : hp.gamma * fn.as.back().col(col).maxCoeff();
        y[col] = batch[i]->reward + bootstrap;
    }
    return y;
}

} // namespace

double td_loss(const QNetwork& net, const QNetwork& target,
               const std::vector<const Experience*>& batch, const Hyperparams& hp) {
    if (batch.empty()) throw OrchError(ErrorCode::EmptyBatch, "td_loss on empty batch");
    const Eigen::VectorXd y = td_targets(target, batch, hp);
    const Eigen::MatrixXd x = batch_inputs(net, batch, false);
    const BatchForward f = batch_forward(net, x);
    double loss = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        const double q = f.as.back()(batch[i]->action, col);
        const double d = q - y[col];
        loss += d * d;
    }
    return loss / static_cast<double>(batch.size());
}

std::pair<double, Gradients> td_loss_and_gradients(const QNetwork& net, const QNetwork& target,
                                                   const std::vector<const Experience*>& batch,
                                                   const Hyperparams& hp) {
    if (batch.empty()) throw OrchError(ErrorCode::EmptyBatch, "gradients on empty batch");
    const auto b = static_cast<Eigen::Index>(batch.size());
    const Eigen::VectorXd y = td_targets(target, batch, hp);
    const Eigen::MatrixXd x = batch_inputs(net, batch, false);
    const BatchForward f = batch_forward(net, x);

    const size_t layers = net.weights.size();
    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    g.embedding = Eigen::MatrixXd::Zero(net.embedding.rows(), net.embedding.cols());

    // dLoss/dQ(s,a) = 2 (q - y) / B at the taken action, zero elsewhere.
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(net.output_dim(), b);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < b; ++i) {
        const int a = batch[static_cast<size_t>(i)]->action;
        const double q = f.as.back()(a, i);
        const double d = q - y[i];
        loss += d * d;
        delta(a, i) = 2.0 * d / static_cast<double>(b);
    }
    loss /= static_cast<double>(b);

    for (size_t l = layers; l-- > 0;) {
        const Eigen::MatrixXd& a_prev = (l == 0) ? f.x0 : f.as[l - 1];
        g.weights[l] = delta * a_prev.transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd up = net.weights[l].transpose() * delta;
            delta = (f.zs[l - 1].array() > 0.0).cast<double>() * up.array();
        } else {
            const Eigen::MatrixXd dx = net.weights[0].transpose() * delta;
            for (Eigen::Index i = 0; i < b; ++i) {
                const int bucket = batch[static_cast<size_t>(i)]->s.task_bucket;
                if (bucket >= 0) {
                    g.embedding.row(bucket) +=
                        dx.col(i).head<StateVector::kEmbeddingWidth>().transpose();
                }
            }
        }
    }
    return {loss, std::move(g)};
}

double train_step(QNetwork& net, const QNetwork& target,
                  const std::vector<const Experience*>& batch, const Hyperparams& hp) {
    auto [loss, g] = td_loss_and_gradients(net, target, batch, hp);

    double scale = 1.0;
    if (hp.grad_clip_norm > 0.0) {
        const double norm = std::sqrt(g.squared_norm());
        if (norm > hp.grad_clip_norm) scale = hp.grad_clip_norm / norm;
    }
    const double lr = hp.learning_rate * scale;
    for (size_t l = 0; l < net.weights.size(); ++l) {
        net.weights[l] -= lr * g.weights[l];
        net.biases[l] -= lr * g.biases[l];
    }
    net.embedding -= lr * g.embedding;
    return loss;
}

int greedy_action(const QNetwork& net, const StateVector& s) {
    const Eigen::VectorXd q = forward(net, s);
    int best = 0;
    for (int a = 1; a < q.size(); ++a) {
        if (q[a] > q[best]) best = a; // strict: ties keep the lowest index
    }
    return best;
}

int act(const QNetwork& net, const StateVector& s, double epsilon, Rng& rng) {
    const bool explore = rng.next_double() < epsilon;
    if (explore) return static_cast<int>(rng.below(static_cast<uint64_t>(net.output_dim())));
    return greedy_action(net, s);
}

double q_margin(const QNetwork& net, const StateVector& s, int n_workers) {
    const Eigen::VectorXd q = forward(net, s);
    const int reroute = n_workers;
    const int expedite = n_workers + 1;
    const int defer = n_workers + 2;
    const double best_remediation = std::max(q[reroute], q[expedite]);
    double best_standard = q[defer];
    for (int a = 0; a < n_workers; ++a) best_standard = std::max(best_standard, q[a]);
    return best_remediation - best_standard;
}

TrainResult train_dqn(TrainEnv& env, const Hyperparams& hp, uint64_t seed) {
    hp.validate();
    TrainResult result;
    result.net = QNetwork::init(env.state_dim(), env.action_dim(), hp, seed);
    QNetwork target = result.net;
    ReplayBuffer buffer(static_cast<size_t>(hp.replay_capacity));
    Rng explore_rng(derive_seed(seed, stream_tag::exploration));
    Rng sample_rng(derive_seed(seed, stream_tag::replay_sample));

    int64_t step = 0;
    int64_t episode = 0;
    double episode_reward = 0.0;
    env.start_episode(episode);

    while (step < hp.train_steps) {
        if (env.done()) {
            result.episode_rewards.push_back(episode_reward);
            episode_reward = 0.0;
            env.start_episode(++episode);
            continue;
        }
        Experience e;
        e.s = env.observe(result.net);
        e.action = act(result.net, e.s, epsilon_at(hp, step), explore_rng);
        const auto [reward, done] = env.apply(e.action);
        e.reward = reward;
        e.done = done;
        if (done) {
            e.s_next = e.s; // unused: bootstrap is cut by the done flag
        } else {
            e.s_next = env.observe(result.net);
        }
        episode_reward += reward;
        buffer.push(std::move(e));

        if (buffer.size() >= static_cast<size_t>(hp.batch_size)) {
            const auto batch = buffer.sample(static_cast<size_t>(hp.batch_size), sample_rng);
            const double loss = train_step(result.net, target, batch, hp);
            if ((step + 1) % hp.target_sync_every == 0) {
                target = result.net;
                result.losses.push_back(loss);
            }
        }
        ++step;
    }
    result.steps = step;
    if (episode_reward != 0.0) result.episode_rewards.push_back(episode_reward);
    return result;
}

GridResult grid_search(const std::vector<Hyperparams>& grid, int folds,
                       const std::function<double(const Hyperparams&, int)>& score_fn) {
    if (grid.empty()) throw OrchError(ErrorCode::EmptyGrid, "grid_search needs points");
    GridResult result;
    for (const auto& hp : grid) {
        GridScore score;
        score.hp = hp;
        double total = 0.0;
        for (int f = 0; f < folds; ++f) {
            const double s = score_fn(hp, f);
            score.fold_scores.push_back(s);
            total += s;
        }
        score.mean_score = total / static_cast<double>(folds);
        result.table.push_back(std::move(score));
    }
    for (size_t i = 1; i < result.table.size(); ++i) {
        if (result.table[i].mean_score > result.table[result.best_index].mean_score) {
            result.best_index = i; // strict: ties keep the earliest point
        }
    }
    return result;
}

namespace {

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)].get<double>();
    }
    return m;
}

ordered_json hp_to_json(const Hyperparams& hp) {
    ordered_json j;
    j["learning_rate"] = hp.learning_rate;
    j["gamma"] = hp.gamma;
    j["epsilon_start"] = hp.epsilon_start;
    j["epsilon_end"] = hp.epsilon_end;
    j["epsilon_decay_steps"] = hp.epsilon_decay_steps;
    j["batch_size"] = hp.batch_size;
    j["target_sync_every"] = hp.target_sync_every;
    j["train_steps"] = hp.train_steps;
    j["hidden_layers"] = hp.hidden_layers;
    j["hidden_width"] = hp.hidden_width;
    j["grad_clip_norm"] = hp.grad_clip_norm;
    j["replay_capacity"] = hp.replay_capacity;
    return j;
}

Hyperparams hp_from_json(const ordered_json& j) {
    Hyperparams hp;
    hp.learning_rate = j.at("learning_rate").get<double>();
    hp.gamma = j.at("gamma").get<double>();
    hp.epsilon_start = j.at("epsilon_start").get<double>();
    hp.epsilon_end = j.at("epsilon_end").get<double>();
    hp.epsilon_decay_steps = j.at("epsilon_decay_steps").get<int64_t>();
    hp.batch_size = j.at("batch_size").get<int>();
    hp.target_sync_every = j.at("target_sync_every").get<int64_t>();
    hp.train_steps = j.at("train_steps").get<int64_t>();
    hp.hidden_layers = j.at("hidden_layers").get<int>();
    hp.hidden_width = j.at("hidden_width").get<int>();
    hp.grad_clip_norm = j.at("grad_clip_norm").get<double>();
    hp.replay_capacity = j.at("replay_capacity").get<int>();
    return hp;
}

} // namespace

void save_dqn_checkpoint(const QNetwork& net, const Hyperparams& hp, uint64_t seed,
                         int64_t steps, const std::string& path) {
    ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "dqn";
    j["layer_dims"] = net.layer_dims();
    ordered_json weights = ordered_json::array();
    for (const auto& w : net.weights) weights.push_back(matrix_to_json(w));
    j["weights"] = std::move(weights);
    ordered_json biases = ordered_json::array();
    for (const auto& b : net.biases) {
        ordered_json vec = ordered_json::array();
        for (Eigen::Index i = 0; i < b.size(); ++i) vec.push_back(b[i]);
        biases.push_back(std::move(vec));
    }
    j["biases"] = std::move(biases);
    j["embedding"] = matrix_to_json(net.embedding);
    ordered_json meta;
    meta["seed"] = seed;
    meta["train_steps_run"] = steps;
    meta["hyperparams"] = hp_to_json(hp);
    j["metadata"] = std::move(meta);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw OrchError(ErrorCode::IoError, "cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw OrchError(ErrorCode::IoError, "write failed: " + path);
}

DqnCheckpoint load_dqn_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw OrchError(ErrorCode::MissingInput, "checkpoint not found: " + path);
    const auto j = ordered_json::parse(in);
    const int version = j.at("schema_version").get<int>();
    if (version != 1) {
        throw OrchError(ErrorCode::SchemaVersionMismatch,
                        "checkpoint schema_version " + std::to_string(version));
    }
    if (j.at("kind").get<std::string>() != "dqn") {
        throw OrchError(ErrorCode::SchemaVersionMismatch, "not a dqn checkpoint");
    }
    DqnCheckpoint ck;
    for (const auto& w : j.at("weights")) ck.net.weights.push_back(matrix_from_json(w));
    for (const auto& b : j.at("biases")) {
        Eigen::VectorXd vec(static_cast<Eigen::Index>(b.size()));
        for (Eigen::Index i = 0; i < vec.size(); ++i) vec[i] = b[static_cast<size_t>(i)].get<double>();
        ck.net.biases.push_back(std::move(vec));
    }
    ck.net.embedding = matrix_from_json(j.at("embedding"));
    const auto& meta = j.at("metadata");
    ck.seed = meta.at("seed").get<uint64_t>();
    ck.steps = meta.at("train_steps_run").get<int64_t>();
    ck.hp = hp_from_json(meta.at("hyperparams"));
    return ck;
}

} // namespace orch
