#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/core/types.hpp"
#include "sdg/grpo/advantages.hpp"
#include "sdg/grpo/objective.hpp"
#include "sdg/persuasion/instances.hpp"
#include "sdg/persuasion/pipeline.hpp"
#include "sdg/policy/toy_policy.hpp"

namespace sdg {

struct TrainerConfig {
    int group_size = 8;
    double clip_epsilon = 0.2;
    double kl_weight = 0.04;
    double learning_rate = 1e-6;
    int epochs = 3;
    std::uint64_t seed = 0;
    int max_steps = 0;   // 0 runs every epoch to completion
    int batch_size = 1;  // instances accumulated per parameter update
    double temperature = 1.0;
    int sample_max_tokens = 16;
    RewardMode reward_mode = RewardMode::Full;

    void validate() const {
        if (group_size < 2) throw ConfigError("group size must be >= 2");
        if (clip_epsilon <= 0.0 || clip_epsilon >= 1.0) throw ConfigError("clip epsilon must lie in (0, 1)");
        if (kl_weight < 0.0) throw ConfigError("KL weight must be >= 0");
        if (learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (max_steps < 0) throw ConfigError("max steps must be >= 0");
        if (batch_size < 1) throw ConfigError("batch size must be >= 1");
        if (temperature <= 0.0) throw ConfigError("temperature must be > 0");
        if (sample_max_tokens < 1) throw ConfigError("sample budget must be >= 1");
    }

    json to_json() const {
        return {{"group_size", group_size},
                {"clip_epsilon", clip_epsilon},
                {"kl_weight", kl_weight},
                {"learning_rate", learning_rate},
                {"epochs", epochs},
                {"seed", seed},
                {"max_steps", max_steps},
                {"batch_size", batch_size},
                {"temperature", temperature},
                {"sample_max_tokens", sample_max_tokens},
                {"reward_mode", to_string(reward_mode)}};
    }

    static TrainerConfig from_json(const json& j) {
        TrainerConfig c;
        c.group_size = j.value("group_size", c.group_size);
        c.clip_epsilon = j.value("clip_epsilon", c.clip_epsilon);
        c.kl_weight = j.value("kl_weight", c.kl_weight);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.epochs = j.value("epochs", c.epochs);
        c.seed = j.value("seed", c.seed);
        c.max_steps = j.value("max_steps", c.max_steps);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.temperature = j.value("temperature", c.temperature);
        c.sample_max_tokens = j.value("sample_max_tokens", c.sample_max_tokens);
        if (j.contains("reward_mode")) c.reward_mode = reward_mode_from_string(j.at("reward_mode"));
        c.validate();
        return c;
    }
};

// One line of the training trace. Emitted after the update it describes:
// mean_reward is the measured group mean; kl, clip_fraction, and objective
// are re-evaluated at the post-step weights against the step's snapshot.
struct StepMetrics {
    int step = 0;
    double mean_reward = 0.0;
    double kl = 0.0;
    double clip_fraction = 0.0;
    double objective = 0.0;

    json to_json() const {
        return {{"step", step},
                {"mean_reward", mean_reward},
                {"kl", kl},
                {"clip_fraction", clip_fraction},
                {"objective", objective}};
    }

    static StepMetrics from_json(const json& j) {
        return StepMetrics{j.at("step").get<int>(), j.at("mean_reward").get<double>(), j.at("kl").get<double>(),
                           j.at("clip_fraction").get<double>(), j.at("objective").get<double>()};
    }
};

// Metrics files are JSONL: an optional leading header object keyed
// "metrics_config" carrying the producing run's configuration, then one
// step record per line.
inline void write_metrics_jsonl(const std::string& path, const std::vector<StepMetrics>& metrics,
                                const json* config_echo = nullptr) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open metrics file for writing: " + path);
    if (config_echo) out << json{{"metrics_config", *config_echo}}.dump() << '\n';
    for (const auto& m : metrics) out << m.to_json().dump() << '\n';
}

// The header config of a metrics file, or null when it has none.
inline json read_metrics_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open metrics file for reading: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (j.is_object() && j.contains("metrics_config")) return j.at("metrics_config");
        break;
    }
    return json();
}

inline std::vector<StepMetrics> read_metrics_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open metrics file for reading: " + path);
    std::vector<StepMetrics> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        const bool header = first && j.is_object() && j.contains("metrics_config");
        first = false;
        if (header) continue;
        out.push_back(StepMetrics::from_json(j));
    }
    return out;
}

constexpr int checkpoint_version = 1;

inline json checkpoint_to_json(const ToyPolicyParams& params, const TrainerConfig& config) {
    return {{"version", checkpoint_version},
            {"kind", "toy_policy"},
            {"feature_map", "token_bag_window_bias"},
            {"policy", params.to_json()},
            {"trainer", config.to_json()}};
}

struct Checkpoint {
    ToyPolicyParams params;
    TrainerConfig config;
};

inline Checkpoint checkpoint_from_json(const json& j) {
    if (j.value("version", 0) != checkpoint_version) throw ConfigError("unsupported checkpoint version");
    if (j.value("kind", "") != "toy_policy") throw ConfigError("unsupported checkpoint kind");
    return Checkpoint{ToyPolicyParams::from_json(j.at("policy")), TrainerConfig::from_json(j.at("trainer"))};
}

inline void write_checkpoint(const std::string& path, const ToyPolicyParams& params, const TrainerConfig& config) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
    out << checkpoint_to_json(params, config).dump(2) << '\n';
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint for reading: " + path);
    json j;
    in >> j;
    return checkpoint_from_json(j);
}

struct TrainResult {
    ToyPolicyParams params;  // final weights
    std::vector<StepMetrics> metrics;
    int steps = 0;
    int instances_skipped = 0;
};

// Dataset-driven ascent on the group-relative clipped objective. Per
// instance: snapshot the weights, draw the group from the snapshot, measure,
// normalize, step. Instance order reshuffles every epoch; instance-level
// failures are counted and skipped. The reference policy is the initial
// refiner, frozen for the whole run.
inline TrainResult train(const std::vector<TrainingInstance>& dataset, ToyPolicy& refiner, TextPolicy& measurer,
                         const TrainerConfig& config, const PersuasionConfig& persuasion) {
    config.validate();
    if (dataset.empty()) throw ConfigError("training needs a non-empty dataset");
    if (!measurer.can_score()) throw UnsupportedCapability(measurer.name() + " cannot measure rewards");

    ToyPolicy reference("reference", refiner.params());
    DeterministicRandomStream rng = new_rng(config.seed);
    TrainResult result;

    // Pending accumulation toward the next parameter update.
    Matrix pending;
    int pending_groups = 0;
    double pending_reward_sum = 0.0;
    struct LastGroup {
        ChatPrompt prompt;
        std::vector<std::string> candidates;
        std::vector<double> advantages;
        ToyPolicyParams snapshot;
    };
    std::optional<LastGroup> last;

    auto flush = [&]() {
        if (pending_groups == 0) return;
        if (config.max_steps > 0 && result.steps >= config.max_steps) return;
        refiner.mutable_params().weights.add_scaled(pending, config.learning_rate / pending_groups);
        ++result.steps;
        ToyPolicy snapshot("snapshot", last->snapshot);
        GroupEvaluation after = evaluate_group(refiner, snapshot, reference, last->prompt, last->candidates,
                                               last->advantages, config.clip_epsilon, config.kl_weight);
        result.metrics.push_back(StepMetrics{result.steps, pending_reward_sum / pending_groups, after.kl,
                                             after.clip_fraction, after.objective});
        pending = Matrix();
        pending_groups = 0;
        pending_reward_sum = 0.0;
    };
    bool done = false;

    for (int epoch = 0; epoch < config.epochs && !done; ++epoch) {
        std::vector<std::size_t> order(dataset.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        for (std::size_t idx : order) {
            if (config.max_steps > 0 && result.steps >= config.max_steps) {
                done = true;
                break;
            }
            const TrainingInstance& instance = dataset[idx];
            try {
                SpeakingContext ctx = instance.context();
                ToyPolicy snapshot("snapshot", refiner.params());
                GenerationSettings settings{config.temperature, config.sample_max_tokens, &rng};
                CandidateGroup group =
                    sample_group(ctx, instance.base, snapshot, config.group_size, persuasion, settings);
                Intent intent = instance.intent();
                measure_group(group, intent, ctx, measurer, config.reward_mode, persuasion);
                std::vector<double> advantages = compute_advantages(group.rewards);
                ChatPrompt prompt = render_refine_prompt(ctx, instance.base, persuasion);
                Matrix grad = objective_gradient(refiner, snapshot, reference, prompt, group.candidates,
                                                 advantages, config.clip_epsilon, config.kl_weight);
                if (pending_groups == 0) pending = std::move(grad);
                else pending.add_scaled(grad, 1.0);
                ++pending_groups;
                for (double r : group.rewards) pending_reward_sum += r / static_cast<double>(group.rewards.size());
                last.emplace(LastGroup{std::move(prompt), std::move(group.candidates), std::move(advantages),
                                       snapshot.params()});
                if (pending_groups >= config.batch_size) flush();
            } catch (const Error&) {
                ++result.instances_skipped;
            }
        }
        flush();  // partial batch at the epoch boundary still updates
    }
    result.params = refiner.params();
    return result;
}

}  // namespace sdg
