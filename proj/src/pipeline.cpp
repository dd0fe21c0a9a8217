#include "orch/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace orch {

std::vector<std::vector<size_t>> shift_row_groups(const Dataset& ds, int shift_minutes) {
    std::vector<std::vector<size_t>> groups;
    if (ds.records.empty()) return groups;
    for (size_t i = 0; i < ds.records.size(); ++i) {
        const auto shift = static_cast<size_t>(ds.records[i].timestamp / shift_minutes);
        if (shift >= groups.size()) groups.resize(shift + 1);
        groups[shift].push_back(i);
    }
    // Arrival pacing can leave an empty window; drop them.
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    return groups;
}

std::vector<SlicePtr> make_shift_slices(const Dataset& ds,
                                        const std::vector<std::vector<size_t>>& groups,
                                        const std::vector<size_t>& shift_indices) {
    std::vector<SlicePtr> slices;
    slices.reserve(shift_indices.size());
    for (size_t s : shift_indices) {
        auto slice = std::make_shared<std::vector<TransactionRecord>>();
        slice->reserve(groups[s].size());
        for (size_t row : groups[s]) slice->push_back(ds.records[row]);
        slices.push_back(std::move(slice));
    }
    return slices;
}

SplitSpec split_shifts(const Dataset& ds, const std::vector<std::vector<size_t>>& groups,
                       double train_frac, int k, uint64_t seed) {
    std::vector<uint8_t> shift_labels;
    shift_labels.reserve(groups.size());
    for (const auto& g : groups) {
        uint8_t disrupted = 0;
        for (size_t row : g) {
            if (ds.records[row].truth_disrupted) {
                disrupted = 1;
                break;
            }
        }
        shift_labels.push_back(disrupted);
    }
    // Degenerate stratification (all shifts same label) still shuffles.
    const bool single_class = std::count(shift_labels.begin(), shift_labels.end(), uint8_t{1}) == 0 ||
                              std::count(shift_labels.begin(), shift_labels.end(), uint8_t{0}) == 0;
    if (single_class) shift_labels.assign(shift_labels.size(), 0);
    return split(shift_labels, train_frac, k, seed);
}

WarehouseTrainEnv::WarehouseTrainEnv(std::vector<SlicePtr> slices, ScenarioParams scenario)
    : slices_(std::move(slices)), scenario_(scenario) {
    if (slices_.empty()) throw OrchError(ErrorCode::EmptySlice, "no training slices");
}

void WarehouseTrainEnv::start_episode(int64_t episode_index) {
    const size_t idx = static_cast<size_t>(episode_index) % slices_.size();
    env_ = std::make_unique<Environment>(slices_[idx], scenario_);
}

bool WarehouseTrainEnv::done() const { return env_->done(); }

StateVector WarehouseTrainEnv::observe(const QNetwork& net) const {
    return env_->observe(net.embedding);
}

std::pair<double, bool> WarehouseTrainEnv::apply(int action_index) {
    const StepOutcome out = env_->step(action_from_index(action_index, env_->n_workers()));
    return {out.reward, out.done};
}

int WarehouseTrainEnv::action_dim() const { return env_ ? env_->action_space() : 0; }

namespace {

ForestConfig forest_config(const RunConfig& cfg) {
    ForestConfig fc;
    fc.n_trees = cfg.n_trees;
    fc.max_depth = cfg.max_depth;
    fc.min_samples_split = cfg.min_samples_split;
    fc.seed = cfg.gen.seed;
    return fc;
}

std::vector<size_t> rows_of_shifts(const std::vector<std::vector<size_t>>& groups,
                                   const std::vector<size_t>& shifts) {
    std::vector<size_t> rows;
    for (size_t s : shifts) rows.insert(rows.end(), groups[s].begin(), groups[s].end());
    std::sort(rows.begin(), rows.end());
    return rows;
}

Forest train_forest_on_rows(const RunConfig& cfg, const PreprocessOutput& pre,
                            const std::vector<size_t>& rows) {
    FeatureMatrix sub;
    sub.row_count = rows.size();
    for (const auto& c : pre.matrix.columns) {
        FeatureColumn col;
        col.name = c.name;
        col.is_numeric = c.is_numeric;
        if (c.is_numeric) {
            col.numeric.reserve(rows.size());
            for (size_t r : rows) col.numeric.push_back(c.numeric[r]);
        } else {
            col.categorical.reserve(rows.size());
            for (size_t r : rows) col.categorical.push_back(c.categorical[r]);
        }
        sub.columns.push_back(std::move(col));
    }
    std::vector<uint8_t> labels;
    labels.reserve(rows.size());
    for (size_t r : rows) labels.push_back(pre.labels[r]);
    return train_forest(pre.transform.apply(sub), labels, forest_config(cfg));
}

QNetwork train_dqn_on_slices(const RunConfig& cfg, const std::vector<SlicePtr>& slices,
                             const ScenarioParams& scenario, const Hyperparams& hp,
                             std::vector<double>* episode_rewards) {
    WarehouseTrainEnv env(slices, scenario);
    env.start_episode(0);
    TrainResult result = train_dqn(env, hp, cfg.gen.seed);
    if (episode_rewards != nullptr) *episode_rewards = result.episode_rewards;
    return std::move(result.net);
}

std::vector<EvalResult> evaluate_policies(const RunConfig& cfg, const Dataset& ds,
                                          const PreprocessOutput& pre,
                                          const std::vector<SlicePtr>& test_slices,
                                          const ScenarioParams& scenario, const QNetwork& dqn,
                                          const Forest& forest) {
    std::vector<EvalResult> results;
    {
        auto agent = make_dqn_agent(dqn);
        results.push_back(evaluate_policy(*agent, test_slices, scenario));
    }
    {
        auto agent =
            make_forest_agent(forest, pre.transform, ds.extra_schema, cfg.normalize);
        results.push_back(evaluate_policy(*agent, test_slices, scenario));
    }
    {
        auto agent = make_rule_agent(cfg.rule);
        results.push_back(evaluate_policy(*agent, test_slices, scenario));
    }
    return results;
}

} // namespace

PipelineRun run_full_pipeline(const RunConfig& cfg) {
    PipelineRun run;
    run.dataset = generate_dataset(cfg.gen);
    run.pre = preprocess_dataset(run.dataset, cfg.normalize, static_cast<size_t>(cfg.feature_limit));

    const auto groups = shift_row_groups(run.dataset, cfg.shift_minutes);
    run.shift_split = split_shifts(run.dataset, groups, cfg.train_frac, cfg.cv_folds, cfg.gen.seed);
    run.scenario = make_scenario(cfg.gen, cfg.gen.seed);
    run.scenario.shift_minutes = cfg.shift_minutes;
    run.scenario.normalize_tokens = cfg.normalize;

    const auto train_slices = make_shift_slices(run.dataset, groups, run.shift_split.train_indices);
    const auto test_slices = make_shift_slices(run.dataset, groups, run.shift_split.test_indices);

    run.forest = train_forest_on_rows(cfg, run.pre, rows_of_shifts(groups, run.shift_split.train_indices));
    run.dqn = train_dqn_on_slices(cfg, train_slices, run.scenario, cfg.hp, &run.dqn_episode_rewards);
    run.results = evaluate_policies(cfg, run.dataset, run.pre, test_slices, run.scenario, run.dqn,
                                    run.forest);
    return run;
}

void run_generate(const RunConfig& cfg) {
    const Dataset ds = generate_dataset(cfg.gen);
    write_dataset(ds, cfg.resolve(cfg.dataset_path));
}

void run_preprocess(const RunConfig& cfg) {
    const Dataset ds = load_dataset(cfg.resolve(cfg.dataset_path), cfg.normalize);
    const PreprocessOutput pre =
        preprocess_dataset(ds, cfg.normalize, static_cast<size_t>(cfg.feature_limit));
    write_feature_matrix(pre.matrix, pre.transform, cfg.resolve(cfg.features_path),
                         cfg.resolve(cfg.features_meta_path));
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OrchError(ErrorCode::IoError, "cannot open " + path);
    out << text;
    if (!out) throw OrchError(ErrorCode::IoError, "write failed: " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw OrchError(ErrorCode::MissingInput, "missing input: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

std::string curve_csv(const std::vector<double>& rewards) {
    std::string out = "episode,total_reward\n";
    char buf[64];
    for (size_t i = 0; i < rewards.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.10g\n", i, rewards[i]);
        out += buf;
    }
    return out;
}

} // namespace

void run_train(const RunConfig& cfg, const std::string& policy) {
    const Dataset ds = load_dataset(cfg.resolve(cfg.dataset_path), cfg.normalize);
    // Scenario, episode noise and the shift split are properties of the
    // dataset artifact (its manifest seed), so train and evaluate agree
    // no matter which run seed they were invoked with.
    const auto groups = shift_row_groups(ds, cfg.shift_minutes);
    const SplitSpec shifts = split_shifts(ds, groups, cfg.train_frac, cfg.cv_folds, ds.config.seed);

    if (policy == "forest") {
        const LoadedFeatures feats =
            load_feature_matrix(cfg.resolve(cfg.features_path), cfg.resolve(cfg.features_meta_path));
        const auto rows = rows_of_shifts(groups, shifts.train_indices);
        FeatureMatrix sub;
        sub.row_count = rows.size();
        for (const auto& c : feats.matrix.columns) {
            FeatureColumn col;
            col.name = c.name;
            col.is_numeric = c.is_numeric;
            if (c.is_numeric) {
                for (size_t r : rows) col.numeric.push_back(c.numeric[r]);
            } else {
                for (size_t r : rows) col.categorical.push_back(c.categorical[r]);
            }
            sub.columns.push_back(std::move(col));
        }
        std::vector<uint8_t> all_labels = disruption_labels(ds);
        std::vector<uint8_t> labels;
        for (size_t r : rows) labels.push_back(all_labels[r]);
        const Forest forest = train_forest(feats.transform.apply(sub), labels, forest_config(cfg));
        save_forest_checkpoint(forest, feats.transform, cfg.resolve(cfg.forest_checkpoint_path));
        return;
    }
    if (policy != "dqn") {
        throw OrchError(ErrorCode::InvalidConfig, "train expects --policy dqn or forest");
    }

    ScenarioParams scenario = make_scenario(ds.config, ds.config.seed);
    scenario.shift_minutes = cfg.shift_minutes;
    scenario.normalize_tokens = cfg.normalize;
    const auto train_slices = make_shift_slices(ds, groups, shifts.train_indices);

    Hyperparams hp = cfg.hp;
    if (!cfg.grid_learning_rates.empty() || !cfg.grid_hidden_widths.empty()) {
        // Small hyperparameter grid scored by recovery accuracy across the
        // CV folds; the best point trains the final policy.
        std::vector<Hyperparams> grid;
        const auto lrs = cfg.grid_learning_rates.empty() ? std::vector<double>{hp.learning_rate}
                                                         : cfg.grid_learning_rates;
        const auto widths = cfg.grid_hidden_widths.empty() ? std::vector<int>{hp.hidden_width}
                                                           : cfg.grid_hidden_widths;
        for (double lr : lrs) {
            for (int w : widths) {
                Hyperparams point = hp;
                point.learning_rate = lr;
                point.hidden_width = w;
                grid.push_back(point);
            }
        }
        const int folds = static_cast<int>(shifts.folds.size());
        const LoadedFeatures feats =
            load_feature_matrix(cfg.resolve(cfg.features_path), cfg.resolve(cfg.features_meta_path));
        const auto score_fn = [&](const Hyperparams& point, int fold) {
            std::vector<size_t> val_shifts = shifts.folds[static_cast<size_t>(fold)];
            std::vector<size_t> fit_shifts;
            for (size_t f = 0; f < shifts.folds.size(); ++f) {
                if (static_cast<int>(f) == fold) continue;
                fit_shifts.insert(fit_shifts.end(), shifts.folds[f].begin(), shifts.folds[f].end());
            }
            std::sort(fit_shifts.begin(), fit_shifts.end());
            std::sort(val_shifts.begin(), val_shifts.end());
            const auto fit_slices = make_shift_slices(ds, groups, fit_shifts);
            const auto val_slices = make_shift_slices(ds, groups, val_shifts);
            Hyperparams fold_hp = point;
            fold_hp.train_steps = std::max<int64_t>(1, point.train_steps / 4);
            const QNetwork net = train_dqn_on_slices(cfg, fit_slices, scenario, fold_hp, nullptr);
            auto agent = make_dqn_agent(net);
            const EvalResult r = evaluate_policy(*agent, val_slices, scenario);
            return r.accuracy_recovery;
        };
        const GridResult result = grid_search(grid, folds, score_fn);
        hp = result.table[result.best_index].hp;

        std::string table = "learning_rate,hidden_width,mean_recovery\n";
        char buf[96];
        for (const auto& row : result.table) {
            std::snprintf(buf, sizeof buf, "%.10g,%d,%.10g\n", row.hp.learning_rate,
                          row.hp.hidden_width, row.mean_score);
            table += buf;
        }
        write_text(cfg.resolve("grid_scores.csv"), table);
    }

    std::vector<double> rewards;
    const QNetwork net = train_dqn_on_slices(cfg, train_slices, scenario, hp, &rewards);
    save_dqn_checkpoint(net, hp, cfg.gen.seed, hp.train_steps, cfg.resolve(cfg.dqn_checkpoint_path));
    write_text(cfg.resolve(cfg.curve_path), curve_csv(rewards));
}

void run_evaluate(const RunConfig& cfg, const std::string& policy) {
    const Dataset ds = load_dataset(cfg.resolve(cfg.dataset_path), cfg.normalize);
    const auto groups = shift_row_groups(ds, cfg.shift_minutes);
    const SplitSpec shifts = split_shifts(ds, groups, cfg.train_frac, cfg.cv_folds, ds.config.seed);
    const auto test_slices = make_shift_slices(ds, groups, shifts.test_indices);

    ScenarioParams scenario = make_scenario(ds.config, ds.config.seed);
    scenario.shift_minutes = cfg.shift_minutes;
    scenario.normalize_tokens = cfg.normalize;

    std::unique_ptr<PolicyAgent> agent;
    if (policy == "dqn") {
        const DqnCheckpoint ck = load_dqn_checkpoint(cfg.resolve(cfg.dqn_checkpoint_path));
        agent = make_dqn_agent(ck.net);
    } else if (policy == "forest") {
        const ForestCheckpoint ck = load_forest_checkpoint(cfg.resolve(cfg.forest_checkpoint_path));
        agent = make_forest_agent(ck.forest, ck.transform, ds.extra_schema, cfg.normalize);
    } else if (policy == "rule") {
        agent = make_rule_agent(cfg.rule);
    } else {
        throw OrchError(ErrorCode::InvalidConfig, "evaluate expects --policy dqn, forest or rule");
    }

    const EvalResult result = evaluate_policy(*agent, test_slices, scenario);
    write_text(cfg.resolve("eval_" + policy + ".json"), eval_result_json(result));
    write_text(cfg.resolve("roc_" + policy + ".csv"), roc_csv(result.roc));
    std::string episodes;
    for (size_t e = 0; e < result.episodes.size(); ++e) {
        episodes += serialize_episode_log(result.episodes[e], static_cast<int>(e));
    }
    write_text(cfg.resolve("episodes_" + policy + ".jsonl"), episodes);
}

void run_report(const RunConfig& cfg) {
    std::vector<EvalResult> results;
    for (const char* policy : {"dqn", "forest", "rule"}) {
        results.push_back(
            eval_result_from_json(read_text(cfg.resolve(std::string("eval_") + policy + ".json"))));
    }
    const double baseline = results.back().mean_completion_minutes; // rule
    write_text(cfg.resolve("metrics.csv"), metrics_csv(results, baseline));
    write_text(cfg.resolve("heatmap.csv"), heatmap_csv(results.front().heatmap));
    write_text(cfg.resolve("summary.txt"), summary_text(results, baseline));
}

void run_sweep(const RunConfig& cfg, const std::string& out_csv) {
    const auto runner = [&](int field_count) {
        RunConfig point = cfg;
        point.gen.n_records = cfg.sweep_n;
        point.gen.field_count = field_count;
        point.hp.train_steps = cfg.sweep_train_steps;
        point.feature_limit = std::min<int>(cfg.feature_limit, 100);
        const PipelineRun run = run_full_pipeline(point);
        std::vector<SweepPoint> points;
        for (const auto& r : run.results) {
            points.push_back({field_count, r.policy, r.accuracy_recovery});
        }
        return points;
    };
    const auto points = schema_sweep(cfg.sweep_fields, runner);
    write_text(cfg.resolve(out_csv), sweep_csv(points));
}

} // namespace orch
