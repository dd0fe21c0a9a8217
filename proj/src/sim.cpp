#include "orch/sim.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "orch/lexicon.hpp"

namespace orch {

ScenarioParams make_scenario(const GenConfig& cfg, uint64_t seed) {
    ScenarioParams p;
    p.n_workers = cfg.n_workers;
    Rng rng(derive_seed(seed, stream_tag::scenario));
    static constexpr double kSpeeds[3] = {0.9, 1.0, 1.1};
    p.worker_speeds.resize(cfg.n_workers);
    for (auto& s : p.worker_speeds) s = kSpeeds[rng.below(3)];
    p.noise_seed = derive_seed(seed, stream_tag::episode_noise);
    return p;
}

Environment::Environment(std::shared_ptr<const std::vector<TransactionRecord>> slice,
                         const ScenarioParams& params)
    : records_(std::move(slice)), params_(params) {
    if (!records_ || records_->empty()) {
        throw OrchError(ErrorCode::EmptySlice, "environment needs a non-empty record slice");
    }
    if (params_.worker_speeds.size() != static_cast<size_t>(params_.n_workers)) {
        params_.worker_speeds.assign(static_cast<size_t>(params_.n_workers), 1.0);
    }
    reset();
}

void Environment::reset() {
    const auto& records = *records_;
    tasks_.clear();
    tasks_.reserve(records.size());

    std::vector<size_t> order(records.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (records[a].timestamp != records[b].timestamp) {
            return records[a].timestamp < records[b].timestamp;
        }
        return records[a].record_id < records[b].record_id;
    });

    const int64_t epoch = records[order.front()].timestamp;
    Rng noise(params_.noise_seed);
    std::vector<double> planned;
    planned.reserve(records.size());
    for (size_t idx : order) {
        const auto& r = records[idx];
        TaskRuntime t;
        t.record_index = idx;
        t.arrival = r.timestamp - epoch;
        t.deadline = r.deadline - epoch;
        if (r.truth_disruption_type == DisruptionType::OrderSurge) {
            // Frozen noise keyed by record id: the same record carries the
            // same hidden delay in any episode or cloned rollout.
            Rng task_noise = noise.derive(r.record_id);
            t.delay_remaining =
                task_noise.uniform_int(params_.surge_delay_min, params_.surge_delay_max);
        }
        tasks_.push_back(t);
        planned.push_back(r.planned_minutes);
    }

    // Burst context: arrivals within the 10 minutes ending at own arrival,
    // counting the whole same-minute group (a burst's first member sees
    // the full burst, unlike the strictly-preceding rolling feature).
    std::vector<int64_t> ts;
    ts.reserve(tasks_.size());
    for (const auto& t : tasks_) ts.push_back(t.arrival);
    const TemporalFeatures temporal = temporal_features(ts);
    size_t lower = 0;
    for (size_t i = 0; i < tasks_.size(); ++i) {
        while (ts[lower] < ts[i] - 10) ++lower;
        size_t upper = i;
        while (upper + 1 < tasks_.size() && ts[upper + 1] == ts[i]) ++upper;
        tasks_[i].burst_context = static_cast<int64_t>(upper - lower + 1);
        tasks_[i].inter_arrival = temporal.inter_arrival_minutes[i];
    }

    p99_planned_ = quantile_nearest_rank(planned, 0.99);

    workers_.assign(static_cast<size_t>(params_.n_workers), WorkerState{});
    inventory_.clear();
    for (const auto& r : records) {
        if (r.record_type == RecordType::Inventory) {
            const auto dash = r.location.find('-');
            inventory_[r.location.substr(0, dash)] += r.quantity;
        }
    }

    queue_.clear();
    next_arrival_ = 0;
    clock_ = 0;
    log_ = EpisodeLog{};
    step_limit_ = 64 * static_cast<int64_t>(tasks_.size()) + 256;
    deliver_arrivals();
}

bool Environment::done() const {
    if (!queue_.empty() || next_arrival_ < tasks_.size()) return false;
    for (const auto& w : workers_) {
        if (w.busy_until > clock_) return false;
    }
    return true;
}

const Environment::TaskRuntime& Environment::head() const {
    if (queue_.empty()) throw OrchError(ErrorCode::EmptyQueue, "no head task");
    return tasks_[queue_.front()];
}

Environment::TaskRuntime& Environment::head() {
    if (queue_.empty()) throw OrchError(ErrorCode::EmptyQueue, "no head task");
    return tasks_[queue_.front()];
}

RecordView Environment::head_view() const { return observable_view(record_of(head())); }
bool Environment::head_rerouted() const { return head().rerouted; }
bool Environment::head_expedited() const { return head().expedited; }
bool Environment::head_flagged() const { return head().flagged; }

bool Environment::head_evidence_down() const {
    const auto& t = head();
    const auto& r = record_of(t);
    if (r.equipment_down) return true;
    const std::string status = params_.normalize_tokens
                                   ? Lexicon::shipped().normalize(r.status_label)
                                   : r.status_label;
    return status == "down";
}

std::array<bool, 3> Environment::equipment_flags() const {
    std::array<bool, 3> flags{false, false, false};
    if (queue_.empty()) return flags;
    const auto& t = head();
    if (!t.rerouted && head_evidence_down()) {
        flags[static_cast<size_t>(record_of(t).required_equipment)] = true;
    }
    return flags;
}

int Environment::arrivals_last_10min() const {
    return static_cast<int>(head().burst_context);
}

double Environment::head_inter_arrival() const { return head().inter_arrival; }

bool Environment::worker_idle(int i) const {
    return workers_[static_cast<size_t>(i)].busy_until <= clock_;
}

std::optional<int> Environment::lowest_idle_worker() const {
    for (int i = 0; i < params_.n_workers; ++i) {
        if (worker_idle(i)) return i;
    }
    return std::nullopt;
}

StateVector Environment::observe(const EmbeddingTable& emb) const {
    const auto& t = head();
    EncodeContext ctx;
    const auto flags = equipment_flags();
    for (int e = 0; e < 3; ++e) ctx.equipment_flags[e] = flags[static_cast<size_t>(e)];
    ctx.queue_length = static_cast<int>(queue_.size());
    ctx.arrivals_last_10min = static_cast<int>(t.burst_context);
    ctx.clock = clock_;
    ctx.p99_planned_minutes = p99_planned_;
    ctx.worker_idle.resize(workers_.size());
    for (size_t w = 0; w < workers_.size(); ++w) {
        ctx.worker_idle[w] = workers_[w].busy_until <= clock_ ? 1 : 0;
    }

    const auto& r = record_of(t);
    RecordView view = observable_view(r);
    // Re-based episode time: the encoder compares deadline against clock.
    const int64_t epoch_shift = r.timestamp - t.arrival;
    view.timestamp = t.arrival;
    view.deadline = r.deadline - epoch_shift;
    if (!view.priority.has_value()) view.priority = Priority::Normal; // imputed default
    return encode_state(view, ctx, emb);
}

bool Environment::downtime_active(const TaskRuntime& t) const {
    return record_of(t).truth_disruption_type == DisruptionType::EquipmentDowntime && !t.rerouted;
}

int64_t Environment::service_minutes(const TaskRuntime& t, int worker) const {
    const auto& r = record_of(t);
    double minutes = r.planned_minutes * params_.worker_speeds[static_cast<size_t>(worker)];
    if (downtime_active(t)) minutes *= 2.0;
    int64_t service = static_cast<int64_t>(std::ceil(minutes));
    if (t.rerouted) service += 5;
    return service;
}

void Environment::deliver_arrivals() {
    while (next_arrival_ < tasks_.size() && tasks_[next_arrival_].arrival <= clock_) {
        queue_.push_back(next_arrival_);
        ++next_arrival_;
    }
}

bool Environment::advance_once() {
    int64_t next = -1;
    if (next_arrival_ < tasks_.size()) next = tasks_[next_arrival_].arrival;
    for (const auto& w : workers_) {
        if (w.busy_until > clock_ && (next < 0 || w.busy_until < next)) next = w.busy_until;
    }
    if (next < 0 || next <= clock_) return false;
    clock_ = next;
    deliver_arrivals();
    return true;
}

void Environment::advance_while_queue_empty() {
    while (queue_.empty() && !done()) {
        if (!advance_once()) break;
    }
    log_.total_simulated_minutes = clock_;
}

void Environment::defer_movement(StepOutcome& out) {
    if (queue_.size() >= 2) {
        const size_t idx = queue_.front();
        queue_.pop_front();
        const size_t back = std::min<size_t>(3, queue_.size());
        queue_.insert(queue_.begin() + static_cast<long>(back), idx);
    }
    if (!lowest_idle_worker().has_value() || queue_.size() == 1) {
        if (!advance_once()) clock_ += 5; // idle system: let time pass
        deliver_arrivals();
    }
    (void)out;
}

void Environment::resolve_assignment(int worker, StepOutcome& out) {
    TaskRuntime& t = head();
    const auto& r = record_of(t);
    const int64_t start = clock_ + t.delay_remaining;
    const int64_t completed = start + service_minutes(t, worker);
    const bool met = completed <= t.deadline;
    const int64_t wait_blocks = std::min<int64_t>(reward::kMaxWaitBlocks, (start - t.arrival) / 10);

    out.reward += (met ? reward::kDeadlineMet : reward::kDeadlineMissed) +
                  reward::kWaitBlock * static_cast<double>(wait_blocks);

    TaskOutcome event;
    event.record_id = r.record_id;
    event.task_id = r.task_id.digits();
    event.completed_at = completed;
    event.deadline_met = met;
    event.remediated = t.flagged;
    out.events.push_back(event);

    auto& w = workers_[static_cast<size_t>(worker)];
    w.busy_until = completed;
    w.assigned_record = r.record_id;
    if (r.record_type == RecordType::Order) {
        const auto dash = r.location.find('-');
        auto it = inventory_.find(r.location.substr(0, dash));
        if (it != inventory_.end()) it->second = std::max<int64_t>(0, it->second - r.quantity);
    }

    t.resolved = true;
    queue_.pop_front();
    advance_while_queue_empty();
}

void Environment::force_resolve_remaining(StepOutcome& out) {
    while (next_arrival_ < tasks_.size()) {
        queue_.push_back(next_arrival_);
        ++next_arrival_;
    }
    while (!queue_.empty()) {
        TaskRuntime& t = tasks_[queue_.front()];
        const auto& r = record_of(t);
        TaskOutcome event;
        event.record_id = r.record_id;
        event.task_id = r.task_id.digits();
        event.completed_at = std::max(clock_, t.deadline + 1); // missed, never before arrival
        event.deadline_met = false;
        event.remediated = t.flagged;
        out.events.push_back(event);
        out.reward += reward::kDeadlineMissed;
        t.resolved = true;
        queue_.pop_front();
    }
}

StepOutcome Environment::step(const ActionSpec& action) {
    if (queue_.empty()) throw OrchError(ErrorCode::EmptyQueue, "step on empty queue");

    StepOutcome out;
    switch (action.kind) {
        case ActionSpec::Kind::AssignWorker: {
            const int i = action.worker_index;
            if (i < 0 || i >= params_.n_workers) {
                throw OrchError(ErrorCode::InvalidWorkerIndex,
                                "worker " + std::to_string(i) + " of " +
                                    std::to_string(params_.n_workers));
            }
            if (worker_idle(i)) {
                resolve_assignment(i, out);
            } else {
                // Legal but useless; costs and lets time move.
                out.reward += reward::kInvalidAssign;
                if (!advance_once()) clock_ += 5;
                deliver_arrivals();
            }
            break;
        }
        case ActionSpec::Kind::RerouteTask: {
            TaskRuntime& t = head();
            t.flagged = true;
            out.reward += reward::kRemediation;
            if (!t.rerouted) {
                t.rerouted = true; // healthy equipment: downtime multiplier gone, +5 min handling
            } else {
                defer_movement(out);
            }
            break;
        }
        case ActionSpec::Kind::ExpediteTask: {
            TaskRuntime& t = head();
            t.flagged = true;
            out.reward += reward::kRemediation;
            if (t.delay_remaining > 0) {
                t.delay_remaining /= 2;
                t.expedited = true;
            } else {
                t.expedited = true;
                defer_movement(out);
            }
            break;
        }
        case ActionSpec::Kind::Defer: {
            defer_movement(out);
            break;
        }
    }

    ++log_.steps;
    if (log_.steps >= step_limit_ && !queue_.empty()) {
        force_resolve_remaining(out); // liveness guard; not reached by sane policies
    }

    advance_while_queue_empty();
    out.done = done();
    log_.total_reward += out.reward;
    log_.total_simulated_minutes = clock_;
    for (const auto& e : out.events) log_.outcomes.push_back(e);
    return out;
}

namespace {

double rollout_best(Environment env, int depth, int action_space) {
    // Total reward of the best action sequence of length <= depth.
    if (depth == 0 || !env.decision_ready()) return 0.0;
    double best = -1e300;
    for (int a = 0; a < action_space; ++a) {
        Environment branch = env;
        const StepOutcome out = branch.step(action_from_index(a, branch.n_workers()));
        double total = out.reward;
        if (!out.done) total += rollout_best(std::move(branch), depth - 1, action_space);
        if (total > best) best = total;
    }
    return best;
}

} // namespace

ActionSpec oracle_best_action(const Environment& env, int horizon) {
    if (!env.decision_ready()) throw OrchError(ErrorCode::EmptyQueue, "oracle on empty queue");
    const int actions = env.action_space();
    double sequences = 1.0;
    for (int h = 0; h < horizon; ++h) sequences *= actions;
    if (sequences > 100000.0) {
        throw OrchError(ErrorCode::StateTooLarge, "oracle would enumerate > 1e5 sequences");
    }

    int best_action = 0;
    double best_total = -1e300;
    for (int a = 0; a < actions; ++a) {
        Environment branch = env;
        const StepOutcome out = branch.step(action_from_index(a, branch.n_workers()));
        double total = out.reward;
        if (!out.done) total += rollout_best(std::move(branch), horizon - 1, actions);
        if (total > best_total) { // strict: ties keep the earliest action
            best_total = total;
            best_action = a;
        }
    }
    return action_from_index(best_action, env.n_workers());
}

std::string serialize_episode_log(const EpisodeLog& log, int episode_index) {
    std::string out;
    for (const auto& e : log.outcomes) {
        nlohmann::ordered_json j;
        j["episode"] = episode_index;
        j["record_id"] = e.record_id;
        j["task_id"] = e.task_id;
        j["completed_at"] = e.completed_at;
        j["deadline_met"] = e.deadline_met;
        j["remediated"] = e.remediated;
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace orch
