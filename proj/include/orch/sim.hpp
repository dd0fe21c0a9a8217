#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orch/datagen.hpp"
#include "orch/domain.hpp"
#include "orch/preprocess.hpp"
#include "orch/rng.hpp"

namespace orch {

// Fixed dynamics constants. The reward table is:
//   +1.0 task completes by deadline, -1.0 it misses (credited at the
//        assignment that determines completion),
//   -0.1 per remediation action,
//   -0.2 per assignment to a busy worker,
//   -0.01 per full 10-minute block the assigned task waited in queue,
//        capped at 20 blocks so a step stays within [-1.2, +1.0].
namespace reward {
inline constexpr double kDeadlineMet = 1.0;
inline constexpr double kDeadlineMissed = -1.0;
inline constexpr double kRemediation = -0.1;
inline constexpr double kInvalidAssign = -0.2;
inline constexpr double kWaitBlock = -0.01;
inline constexpr int kMaxWaitBlocks = 20;
}

struct ScenarioParams {
    int n_workers = 8;
    std::vector<double> worker_speeds; // service-time multipliers, one per worker
    int shift_minutes = 480;
    int surge_delay_min = 30; // hidden handling overhead for surge tasks
    int surge_delay_max = 50;
    bool normalize_tokens = true; // lexicon on the status evidence channel
    uint64_t noise_seed = 0;      // frozen episode noise (surge delays)
};

// Worker speeds drawn once per scenario from {0.9, 1.0, 1.1}.
ScenarioParams make_scenario(const GenConfig& cfg, uint64_t seed);

struct TaskOutcome {
    uint64_t record_id = 0;
    std::string task_id;
    int64_t completed_at = 0; // minutes since episode start
    bool deadline_met = false;
    bool remediated = false;
};

struct StepOutcome {
    double reward = 0.0;
    bool done = false;
    std::vector<TaskOutcome> events;
};

struct EpisodeLog {
    std::vector<TaskOutcome> outcomes;
    double total_reward = 0.0;
    int64_t total_simulated_minutes = 0;
    int64_t steps = 0;
};

struct WorkerState {
    int64_t busy_until = 0;
    std::optional<uint64_t> assigned_record;
};

// Event-driven warehouse episode over one slice of records. One decision
// per head-of-queue task; between decisions the clock jumps to the next
// arrival or worker-free event. Copyable so the oracle can roll out
// cloned futures against the same frozen noise.
class Environment {
public:
    Environment(std::shared_ptr<const std::vector<TransactionRecord>> slice,
                const ScenarioParams& params);

    void reset(); // deterministic given (slice, params)

    bool done() const;
    bool decision_ready() const { return !queue_.empty(); }

    int n_workers() const { return params_.n_workers; }
    int action_space() const { return action_count(params_.n_workers); }
    int64_t clock() const { return clock_; }
    size_t queue_length() const { return queue_.size(); }
    size_t presented_tasks() const { return tasks_.size(); }
    const ScenarioParams& params() const { return params_; }

    // Observable surface (policies may read all of this; truth_* stay private).
    RecordView head_view() const;
    bool head_rerouted() const;
    bool head_expedited() const;
    bool head_flagged() const;
    std::array<bool, 3> equipment_flags() const;
    int arrivals_last_10min() const; // burst context anchored at head arrival
    double head_inter_arrival() const;
    bool worker_idle(int i) const;
    std::optional<int> lowest_idle_worker() const;
    const std::map<std::string, int64_t>& inventory_levels() const { return inventory_; }
    double p99_planned_minutes() const { return p99_planned_; }

    StateVector observe(const EmbeddingTable& emb) const; // throws EmptyQueue

    StepOutcome step(const ActionSpec& action); // throws EmptyQueue, InvalidWorkerIndex

    const EpisodeLog& log() const { return log_; }

private:
    struct TaskRuntime {
        size_t record_index = 0;
        int64_t arrival = 0;       // re-based minutes
        int64_t deadline = 0;      // re-based
        int64_t delay_remaining = 0; // surge handling overhead, cut by Expedite
        int64_t burst_context = 1; // arrivals within 10 min of own arrival
        double inter_arrival = 0.0;
        bool rerouted = false;
        bool expedited = false;
        bool flagged = false;
        bool resolved = false;
    };

    const TransactionRecord& record_of(const TaskRuntime& t) const {
        return (*records_)[t.record_index];
    }
    const TaskRuntime& head() const;
    TaskRuntime& head();
    bool head_evidence_down() const;
    bool downtime_active(const TaskRuntime& t) const;
    int64_t service_minutes(const TaskRuntime& t, int worker) const;
    void deliver_arrivals();
    bool advance_once(); // jump to next event; returns false when none
    void advance_while_queue_empty();
    void defer_movement(StepOutcome& out);
    void resolve_assignment(int worker, StepOutcome& out);
    void force_resolve_remaining(StepOutcome& out);

    std::shared_ptr<const std::vector<TransactionRecord>> records_;
    ScenarioParams params_;

    std::vector<TaskRuntime> tasks_;       // sorted by (arrival, record_id)
    std::deque<size_t> queue_;             // indices into tasks_
    size_t next_arrival_ = 0;
    std::vector<WorkerState> workers_;
    std::map<std::string, int64_t> inventory_; // aisle zone -> units
    int64_t clock_ = 0;
    double p99_planned_ = 1.0;
    int64_t step_limit_ = 0;
    EpisodeLog log_;
};

// Exhaustive rollout of all action sequences up to `horizon` on cloned
// environments with the same frozen noise; returns the first action of
// the best sequence, ties by action enumeration order.
// Throws StateTooLarge when action_space^horizon > 100000.
ActionSpec oracle_best_action(const Environment& env, int horizon = 3);

// One JSON line per task outcome, episode-tagged.
std::string serialize_episode_log(const EpisodeLog& log, int episode_index);

} // namespace orch
