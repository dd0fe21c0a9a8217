#include "orch/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace orch {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw OrchError(ErrorCode::InvalidConfig, key + ": integer expected, got '" + value + "'");
    }
}

uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw OrchError(ErrorCode::InvalidConfig, key + ": unsigned expected, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw OrchError(ErrorCode::InvalidConfig, key + ": number expected, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw OrchError(ErrorCode::InvalidConfig, key + ": boolean expected, got '" + value + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
    std::vector<T> out;
    if (trim(value).empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse(key, trim(item)));
    return out;
}

} // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "n") gen.n_records = parse_int(key, value);
    else if (key == "disruption_rate") gen.disruption_rate = parse_double(key, value);
    else if (key == "multilingual_rate") gen.multilingual_rate = parse_double(key, value);
    else if (key == "missing_rate") gen.missing_rate = parse_double(key, value);
    else if (key == "outlier_rate") gen.outlier_rate = parse_double(key, value);
    else if (key == "fields") gen.field_count = static_cast<int>(parse_int(key, value));
    else if (key == "workers") gen.n_workers = static_cast<int>(parse_int(key, value));
    else if (key == "seed") gen.seed = parse_uint(key, value);
    else if (key == "shift_minutes") shift_minutes = static_cast<int>(parse_int(key, value));
    else if (key == "normalize") normalize = parse_bool(key, value);
    else if (key == "learning_rate") hp.learning_rate = parse_double(key, value);
    else if (key == "gamma") hp.gamma = parse_double(key, value);
    else if (key == "epsilon_start") hp.epsilon_start = parse_double(key, value);
    else if (key == "epsilon_end") hp.epsilon_end = parse_double(key, value);
    else if (key == "epsilon_decay_steps") hp.epsilon_decay_steps = parse_int(key, value);
    else if (key == "batch_size") hp.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "target_sync_every") hp.target_sync_every = parse_int(key, value);
    else if (key == "train_steps") hp.train_steps = parse_int(key, value);
    else if (key == "hidden_layers") hp.hidden_layers = static_cast<int>(parse_int(key, value));
    else if (key == "hidden_width") hp.hidden_width = static_cast<int>(parse_int(key, value));
    else if (key == "grad_clip_norm") hp.grad_clip_norm = parse_double(key, value);
    else if (key == "replay_capacity") hp.replay_capacity = static_cast<int>(parse_int(key, value));
    else if (key == "n_trees") n_trees = static_cast<int>(parse_int(key, value));
    else if (key == "max_depth") max_depth = static_cast<int>(parse_int(key, value));
    else if (key == "min_samples_split") min_samples_split = static_cast<int>(parse_int(key, value));
    else if (key == "surge_threshold") rule.surge_threshold = static_cast<int>(parse_int(key, value));
    else if (key == "remediate_on_equipment_flag") rule.remediate_on_equipment_flag = parse_bool(key, value);
    else if (key == "train_frac") train_frac = parse_double(key, value);
    else if (key == "cv_folds") cv_folds = static_cast<int>(parse_int(key, value));
    else if (key == "feature_limit") feature_limit = static_cast<int>(parse_int(key, value));
    else if (key == "grid_learning_rates")
        grid_learning_rates = parse_list<double>(key, value, parse_double);
    else if (key == "grid_hidden_widths")
        grid_hidden_widths = parse_list<int>(key, value, [](const std::string& k, const std::string& v) {
            return static_cast<int>(parse_int(k, v));
        });
    else if (key == "sweep_fields")
        sweep_fields = parse_list<int>(key, value, [](const std::string& k, const std::string& v) {
            return static_cast<int>(parse_int(k, v));
        });
    else if (key == "sweep_n") sweep_n = parse_int(key, value);
    else if (key == "sweep_train_steps") sweep_train_steps = parse_int(key, value);
    else if (key == "workdir") workdir = value;
    else if (key == "dataset") dataset_path = value;
    else if (key == "features") features_path = value;
    else if (key == "features_meta") features_meta_path = value;
    else if (key == "dqn_checkpoint") dqn_checkpoint_path = value;
    else if (key == "forest_checkpoint") forest_checkpoint_path = value;
    else if (key == "curve") curve_path = value;
    else throw OrchError(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
}

void RunConfig::validate() const {
    gen.validate();
    hp.validate();
    rule.validate();
    if (shift_minutes < 30) throw OrchError(ErrorCode::InvalidConfig, "shift_minutes too small");
    if (!(train_frac > 0.0 && train_frac < 1.0)) {
        throw OrchError(ErrorCode::InvalidConfig, "train_frac in (0,1)");
    }
    if (cv_folds < 2) throw OrchError(ErrorCode::InvalidConfig, "cv_folds >= 2");
    if (feature_limit < kCoreFieldCount) {
        throw OrchError(ErrorCode::InvalidConfig, "feature_limit below core field count");
    }
    if (n_trees < 1 || max_depth < 1 || min_samples_split < 2) {
        throw OrchError(ErrorCode::InvalidConfig, "forest topology invalid");
    }
    for (int fc : sweep_fields) {
        if (fc < kCoreFieldCount || fc > 900) {
            throw OrchError(ErrorCode::FieldCountOutOfRange,
                            "sweep field count " + std::to_string(fc));
        }
    }
    if (sweep_n < 100) throw OrchError(ErrorCode::InvalidConfig, "sweep_n too small");
}

std::string RunConfig::resolve(const std::string& relpath) const {
    if (!relpath.empty() && relpath.front() == '/') return relpath;
    if (workdir.empty() || workdir == ".") return relpath;
    return workdir + "/" + relpath;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw OrchError(ErrorCode::MissingInput, "config file not found: " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw OrchError(ErrorCode::InvalidConfig,
                            path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        entries.emplace_back(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
    }
    return entries;
}

RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig cfg;
    if (!config_path.empty()) {
        for (const auto& [key, value] : parse_config_file(config_path)) {
            cfg.apply(key, value);
        }
    }
    bool seed_overridden = false;
    for (const auto& [key, value] : overrides) {
        if (key == "seed") seed_overridden = true;
    }
    if (const char* env_seed = std::getenv("ORCH_SEED"); env_seed != nullptr && !seed_overridden) {
        cfg.apply("seed", env_seed);
    }
    for (const auto& [key, value] : overrides) {
        cfg.apply(key, value);
    }
    cfg.validate();
    return cfg;
}

} // namespace orch
