// Single command-line entry point for the full pipeline: play one match,
// generate self-play logs, extract a training dataset, train the toy
// refiner, evaluate agent pools, and measure persuasion rewards.
//
// Configuration precedence: flags > --config file > built-in defaults. The
// effective configuration is echoed into every output artifact. Exit codes:
// 0 success, 1 runtime failure, 2 usage or configuration error.
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "sdg/arena/agents.hpp"
#include "sdg/arena/match_runner.hpp"
#include "sdg/arena/selfplay.hpp"
#include "sdg/arena/tournament.hpp"
#include "sdg/grpo/trainer.hpp"
#include "sdg/persuasion/instances.hpp"
#include "sdg/persuasion/pipeline.hpp"
#include "sdg/policy/toy_policy.hpp"

namespace sdg::cli {

using namespace sdg::arena;

struct RunConfig {
    // Shared.
    std::string game = "werewolf";
    std::uint64_t seed = 0;
    int round_cap = 20;
    int workers = 1;
    std::string tie_rule = "random_elimination";
    bool record_intents = false;
    std::string agents;  // pool file; empty selects the built-in pool
    std::string out;

    // selfplay
    int count = 500;
    std::vector<std::string> backends{"stub:a"};

    // extract
    std::string logs;
    int sample = 4000;

    // train
    std::string dataset;
    std::string init;      // starting checkpoint; empty starts from zeros
    std::string measurer;  // scoring binding; empty freezes the initial refiner
    int vocab_cap = 256;
    std::string metrics;
    TrainerConfig trainer;

    // eval
    std::string mode = "tournament";
    int matches = -1;  // unset; resolves to 500 (tournament) or 50 (team)
    std::string side;  // unset; resolves to the game's first team
    std::string variant;
    std::string opponent;
    bool table = false;

    // measure
    std::string instance;
    int index = 0;
    std::string candidate;
    std::string measure_mode = "all";
};

werewolf::TieRule tie_rule_from_string(const std::string& s) {
    if (s == "random_elimination") return werewolf::TieRule::RandomElimination;
    if (s == "no_elimination") return werewolf::TieRule::NoElimination;
    throw ConfigError("unknown tie rule: " + s + " (expected random_elimination or no_elimination)");
}

RewardMode measure_mode_from_string(const std::string& s) {
    if (s == "all") throw ConfigError("reward mode 'all' is not a single mode");
    return reward_mode_from_string(s);
}

void apply_trainer_config(TrainerConfig& tc, const json& j) {
    if (!j.is_object()) throw ConfigError("config key 'trainer' must hold an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "group_size") tc.group_size = value.get<int>();
        else if (key == "clip_epsilon") tc.clip_epsilon = value.get<double>();
        else if (key == "kl_weight") tc.kl_weight = value.get<double>();
        else if (key == "learning_rate") tc.learning_rate = value.get<double>();
        else if (key == "epochs") tc.epochs = value.get<int>();
        else if (key == "seed") tc.seed = value.get<std::uint64_t>();
        else if (key == "max_steps") tc.max_steps = value.get<int>();
        else if (key == "batch_size") tc.batch_size = value.get<int>();
        else if (key == "temperature") tc.temperature = value.get<double>();
        else if (key == "sample_max_tokens") tc.sample_max_tokens = value.get<int>();
        else if (key == "reward_mode") tc.reward_mode = reward_mode_from_string(value.get<std::string>());
        else throw ConfigError("unknown config key: trainer." + key);
    }
}

// Applies a JSON config file onto the defaults. Every key must be known.
void apply_config_file(RunConfig& rc, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "game") rc.game = value.get<std::string>();
        else if (key == "seed") rc.seed = value.get<std::uint64_t>();
        else if (key == "round_cap") rc.round_cap = value.get<int>();
        else if (key == "workers") rc.workers = value.get<int>();
        else if (key == "tie_rule") rc.tie_rule = value.get<std::string>();
        else if (key == "record_intents") rc.record_intents = value.get<bool>();
        else if (key == "agents") rc.agents = value.get<std::string>();
        else if (key == "out") rc.out = value.get<std::string>();
        else if (key == "count") rc.count = value.get<int>();
        else if (key == "backends") rc.backends = value.get<std::vector<std::string>>();
        else if (key == "logs") rc.logs = value.get<std::string>();
        else if (key == "sample") rc.sample = value.get<int>();
        else if (key == "dataset") rc.dataset = value.get<std::string>();
        else if (key == "init") rc.init = value.get<std::string>();
        else if (key == "measurer") rc.measurer = value.get<std::string>();
        else if (key == "vocab_cap") rc.vocab_cap = value.get<int>();
        else if (key == "metrics") rc.metrics = value.get<std::string>();
        else if (key == "trainer") apply_trainer_config(rc.trainer, value);
        else if (key == "mode") rc.mode = value.get<std::string>();
        else if (key == "matches") rc.matches = value.get<int>();
        else if (key == "side") rc.side = value.get<std::string>();
        else if (key == "variant") rc.variant = value.get<std::string>();
        else if (key == "opponent") rc.opponent = value.get<std::string>();
        else if (key == "table") rc.table = value.get<bool>();
        else if (key == "instance") rc.instance = value.get<std::string>();
        else if (key == "index") rc.index = value.get<int>();
        else if (key == "candidate") rc.candidate = value.get<std::string>();
        else if (key == "measure_mode") rc.measure_mode = value.get<std::string>();
        else throw ConfigError("unknown config key: " + key);
    }
}

// Re-applies every flag the user actually passed on top of the config file.
struct Overlay {
    std::vector<std::pair<const CLI::Option*, std::function<void()>>> slots;

    void bind(const CLI::Option* option, std::function<void()> apply) {
        slots.emplace_back(option, std::move(apply));
    }

    void run() const {
        for (const auto& [option, apply] : slots) {
            if (option->count() > 0) apply();
        }
    }
};

struct CommandContext {
    CLI::App* cmd = nullptr;
    RunConfig flags;  // flag values land here first
    std::string config_path;
    Overlay overlay;

    template <typename T>
    void option(const std::string& name, T RunConfig::*field, const std::string& desc, RunConfig& rc) {
        auto* o = cmd->add_option(name, flags.*field, desc);
        overlay.bind(o, [this, field, &rc] { rc.*field = flags.*field; });
    }

    void flag(const std::string& name, bool RunConfig::*field, const std::string& desc, RunConfig& rc) {
        auto* o = cmd->add_flag(name, flags.*field, desc);
        overlay.bind(o, [this, field, &rc] { rc.*field = flags.*field; });
    }

    // Resolves precedence: defaults, then config file, then passed flags.
    void resolve(RunConfig& rc) const {
        if (!config_path.empty()) apply_config_file(rc, config_path);
        overlay.run();
    }
};

json trainer_echo(const TrainerConfig& tc) { return tc.to_json(); }

void validate_common(const RunConfig& rc) {
    if (rc.round_cap < 1) throw ConfigError("round cap must be >= 1");
    if (rc.workers < 1) throw ConfigError("workers must be >= 1");
    tie_rule_from_string(rc.tie_rule);
    game_kind_from_string(rc.game);
}

std::vector<AgentSpec> builtin_play_pool() {
    AgentSpec spec;
    spec.id = "tables";
    spec.framework = Framework::Scripted;
    return {spec};
}

std::vector<AgentSpec> builtin_eval_pool() {
    AgentSpec a;
    a.id = "stub-a";
    a.framework = Framework::Vanilla;
    a.backend = "stub:a";
    AgentSpec b = a;
    b.id = "stub-b";
    b.backend = "stub:b";
    return {a, b};
}

std::vector<AgentSpec> load_pool(const std::string& path, std::vector<AgentSpec> fallback) {
    if (path.empty()) return fallback;
    return read_agent_pool(path);
}

std::string outcome_line(const MatchRecord& rec) {
    if (rec.aborted()) {
        std::string why = "round cap";
        if (!rec.events.empty() && rec.events.back().kind == "agent_failure")
            why = rec.events.back().payload.at("error").get<std::string>();
        return "match " + rec.match_id + ": aborted at round " + std::to_string(rec.terminal_round) +
               " (" + why + ")";
    }
    return "match " + rec.match_id + ": " + std::string(to_string(*rec.winner)) + " wins in round " +
           std::to_string(rec.terminal_round) + " (" + std::to_string(rec.turns.size()) + " turns)";
}

int cmd_play(const RunConfig& rc) {
    validate_common(rc);
    const GameKind game = game_kind_from_string(rc.game);
    const auto pool = load_pool(rc.agents, builtin_play_pool());
    const int seats = seats_for(game);

    json echo{{"command", "play"},      {"game", rc.game},
              {"seed", rc.seed},        {"round_cap", rc.round_cap},
              {"tie_rule", rc.tie_rule}, {"record_intents", rc.record_intents},
              {"agents", rc.agents.empty() ? "builtin" : rc.agents},
              {"out", rc.out}};

    MatchPlan plan;
    plan.game = game;
    plan.seed = rc.seed;
    plan.round_cap = rc.round_cap;
    plan.record_intents = rc.record_intents;
    plan.tie_rule = tie_rule_from_string(rc.tie_rule);
    plan.config_echo = echo;
    if (static_cast<int>(pool.size()) == seats) {
        plan.seats = pool;
    } else if (pool.size() == 1) {
        plan.seats.assign(static_cast<std::size_t>(seats), pool.front());
    } else {
        DeterministicRandomStream rng(rc.seed);
        for (int s = 0; s < seats; ++s) plan.seats.push_back(pool[rng.uniform_int(pool.size())]);
    }

    const MatchRecord rec = run_match(plan);
    if (!rc.out.empty()) write_jsonl(rc.out, {rec});
    std::cout << outcome_line(rec) << "\n";
    if (!rc.out.empty()) std::cout << "wrote 1 match log to " << rc.out << "\n";
    return 0;
}

int cmd_selfplay(const RunConfig& rc) {
    validate_common(rc);
    if (rc.out.empty()) throw ConfigError("selfplay needs --out for the match logs");
    if (rc.count < 0) throw ConfigError("count must be >= 0");
    if (rc.backends.empty()) throw ConfigError("selfplay needs at least one backend");

    SelfplayConfig config;
    config.game = game_kind_from_string(rc.game);
    config.count = rc.count;
    config.backends = rc.backends;
    config.seed = rc.seed;
    config.round_cap = rc.round_cap;
    config.workers = rc.workers;
    config.config_echo = json{{"command", "selfplay"}, {"game", rc.game},
                              {"count", rc.count},     {"backends", rc.backends},
                              {"seed", rc.seed},       {"round_cap", rc.round_cap},
                              {"workers", rc.workers}, {"tie_rule", rc.tie_rule},
                              {"out", rc.out}};

    auto plans = plan_selfplay(config);
    for (auto& plan : plans) plan.tie_rule = tie_rule_from_string(rc.tie_rule);
    const auto records = run_plans(plans, config.workers);
    write_jsonl(rc.out, records);

    int aborted = 0;
    std::size_t turns = 0;
    for (const auto& rec : records) {
        aborted += rec.aborted() ? 1 : 0;
        turns += rec.turns.size();
    }
    std::cout << "wrote " << records.size() << " match logs to " << rc.out << " (" << aborted
              << " aborted, " << turns << " turns)\n";
    return 0;
}

int cmd_extract(const RunConfig& rc) {
    if (rc.logs.empty()) throw ConfigError("extract needs --logs with self-play match logs");
    if (rc.out.empty()) throw ConfigError("extract needs --out for the dataset");
    if (rc.sample < 0) throw ConfigError("sample must be >= 0");

    const auto records = read_match_jsonl(rc.logs);
    ExtractStats stats;
    const auto instances = extract_dataset(records, rc.sample, rc.seed, &stats);

    const json echo{{"command", "extract"}, {"logs", rc.logs},
                    {"sample", rc.sample},  {"seed", rc.seed},
                    {"out", rc.out}};
    write_dataset_jsonl(rc.out, instances, &echo);
    std::cout << "extracted " << instances.size() << " of " << stats.instances << " instances to "
              << rc.out << " (skipped: " << stats.skipped_no_follower << " no follower, "
              << stats.skipped_no_intent << " no intent, " << stats.skipped_malformed
              << " malformed)\n";
    return 0;
}

// Most frequent dataset words first (ties lexicographic), truncated to cap.
Vocabulary dataset_vocabulary(const std::vector<TrainingInstance>& dataset, int cap) {
    if (cap < 1) throw ConfigError("vocab cap must be >= 1");
    std::map<std::string, long> counts;
    auto feed = [&](const std::string& text) {
        std::string word;
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!word.empty()) counts[word] += 1;
                word.clear();
            } else {
                word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
        }
        if (!word.empty()) counts[word] += 1;
    };
    for (const auto& inst : dataset) {
        feed(inst.desired);
        feed(inst.undesired);
        feed(inst.base);
        for (const auto& u : inst.dialogue) feed(u.text);
    }
    counts.erase(Vocabulary::unk_token);
    counts.erase(Vocabulary::eos_token);
    std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(ranked.size()) > cap) ranked.resize(static_cast<std::size_t>(cap));
    std::vector<std::string> words;
    for (const auto& [word, n] : ranked) words.push_back(word);
    return Vocabulary(words);
}

int cmd_train(const RunConfig& rc) {
    if (rc.dataset.empty()) throw ConfigError("train needs --dataset");
    if (rc.out.empty()) throw ConfigError("train needs --out for the checkpoint");

    const auto dataset = read_dataset_jsonl(rc.dataset);
    if (dataset.empty()) throw ConfigError("dataset " + rc.dataset + " holds no instances");

    ToyPolicyParams start = rc.init.empty()
                                ? ToyPolicyParams::zeros(dataset_vocabulary(dataset, rc.vocab_cap))
                                : read_checkpoint(rc.init).params;
    ToyPolicy refiner("refiner", start);

    std::shared_ptr<TextPolicy> measurer;
    if (rc.measurer.empty()) {
        measurer = std::make_shared<ToyPolicy>("measurer", start);
    } else {
        measurer = make_policy(rc.measurer);
        if (!measurer->can_score()) {
            throw ConfigError("measurer binding " + rc.measurer + " cannot score candidates");
        }
    }

    const TrainerConfig tc = rc.trainer;
    const PersuasionConfig pc;
    const auto result = train(dataset, refiner, *measurer, tc, pc);

    write_checkpoint(rc.out, result.params, tc);
    const json echo{{"command", "train"},   {"dataset", rc.dataset},
                    {"init", rc.init},      {"measurer", rc.measurer},
                    {"vocab_cap", rc.vocab_cap}, {"out", rc.out},
                    {"metrics", rc.metrics}, {"trainer", trainer_echo(tc)}};
    if (!rc.metrics.empty()) write_metrics_jsonl(rc.metrics, result.metrics, &echo);

    std::cout << "trained " << result.steps << " steps on " << dataset.size() << " instances ("
              << result.instances_skipped << " skipped)";
    if (!result.metrics.empty()) {
        std::cout << "; mean reward " << result.metrics.front().mean_reward << " -> "
                  << result.metrics.back().mean_reward;
    }
    std::cout << "; wrote checkpoint to " << rc.out;
    if (!rc.metrics.empty()) std::cout << " and metrics to " << rc.metrics;
    std::cout << "\n";
    return 0;
}

Team side_for(const RunConfig& rc, GameKind game) {
    const auto [first, second] = team_sides(game);
    if (rc.side.empty()) return first;
    std::string s = rc.side;
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    const Team team = team_from_string(s);
    if (team != first && team != second) {
        throw ConfigError("side " + rc.side + " does not play " + std::string(to_string(game)));
    }
    return team;
}

const AgentSpec& find_spec(const std::vector<AgentSpec>& pool, const std::string& id) {
    for (const auto& spec : pool) {
        if (spec.id == id) return spec;
    }
    throw ConfigError("agent id not in pool: " + id);
}

int cmd_eval(const RunConfig& rc) {
    validate_common(rc);
    const GameKind game = game_kind_from_string(rc.game);
    const auto pool = load_pool(rc.agents, builtin_eval_pool());
    if (rc.mode != "tournament" && rc.mode != "team") {
        throw ConfigError("unknown eval mode: " + rc.mode + " (expected tournament or team)");
    }

    if (rc.mode == "tournament") {
        TournamentConfig config;
        config.game = game;
        config.matches = rc.matches < 0 ? 500 : rc.matches;
        config.seed = rc.seed;
        config.round_cap = rc.round_cap;
        config.workers = rc.workers;
        config.record_intents = rc.record_intents;
        config.config_echo = json{{"command", "eval"},      {"mode", "tournament"},
                                  {"game", rc.game},        {"matches", config.matches},
                                  {"seed", rc.seed},        {"round_cap", rc.round_cap},
                                  {"workers", rc.workers},  {"tie_rule", rc.tie_rule},
                                  {"agents", rc.agents.empty() ? "builtin" : rc.agents},
                                  {"out", rc.out}};

        auto plans = plan_tournament(pool, config);
        for (auto& plan : plans) plan.tie_rule = tie_rule_from_string(rc.tie_rule);
        const auto report = tally_tournament(pool, config, run_plans(plans, config.workers));

        if (rc.table || rc.out.empty()) std::cout << report.render_table();
        if (!rc.out.empty()) {
            std::ofstream out(rc.out);
            if (!out) throw ConfigError("cannot open report file for writing: " + rc.out);
            out << json{{"config", config.config_echo}, {"report", report.to_json()}}.dump(2) << "\n";
            std::cout << "wrote report to " << rc.out << "\n";
        }
        return 0;
    }

    const Team side = side_for(rc, game);
    const AgentSpec variant = find_spec(pool, rc.variant.empty() ? pool.front().id : rc.variant);
    const AgentSpec opponent =
        find_spec(pool, rc.opponent.empty() ? pool[1 % pool.size()].id : rc.opponent);

    TeamEvalConfig config;
    config.game = game;
    config.side = side;
    config.matches = rc.matches < 0 ? 50 : rc.matches;
    config.seed = rc.seed;
    config.round_cap = rc.round_cap;
    config.workers = rc.workers;
    config.config_echo = json{{"command", "eval"},     {"mode", "team"},
                              {"game", rc.game},       {"side", to_string(side)},
                              {"variant", variant.id}, {"opponent", opponent.id},
                              {"matches", config.matches}, {"seed", rc.seed},
                              {"round_cap", rc.round_cap}, {"workers", rc.workers},
                              {"tie_rule", rc.tie_rule},
                              {"agents", rc.agents.empty() ? "builtin" : rc.agents},
                              {"out", rc.out}};

    const auto report = run_team_eval(variant, opponent, config);
    std::cout << to_string(game) << " team eval: " << variant.id << " as " << to_string(side)
              << " vs " << opponent.id << ": " << report.wins << "/" << report.completed
              << " wins (rate " << report.win_rate() << ", " << report.aborted << " aborted)\n";
    if (!rc.out.empty()) {
        std::ofstream out(rc.out);
        if (!out) throw ConfigError("cannot open report file for writing: " + rc.out);
        out << json{{"config", config.config_echo}, {"report", report.to_json()}}.dump(2) << "\n";
        std::cout << "wrote report to " << rc.out << "\n";
    }
    return 0;
}

TrainingInstance load_instance(const std::string& path, int index) {
    if (index < 0) throw ConfigError("index must be >= 0");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open instance file: " + path);
    std::string all{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

    json whole = json::value_t::discarded;
    try {
        whole = json::parse(all);
    } catch (const json::exception&) {
    }
    if (whole.is_object()) {
        if (index != 0) throw ConfigError("instance file holds a single instance; index must be 0");
        return TrainingInstance::from_json(whole);
    }
    if (whole.is_array()) {
        if (index >= static_cast<int>(whole.size()))
            throw ConfigError("index " + std::to_string(index) + " out of range for " + path);
        return TrainingInstance::from_json(whole.at(static_cast<std::size_t>(index)));
    }

    // JSONL dataset: skip the header line, count instance lines.
    std::istringstream lines(all);
    std::string line;
    bool first = true;
    int at = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        const bool header = first && j.is_object() && j.contains("dataset_config");
        first = false;
        if (header) continue;
        if (at == index) return TrainingInstance::from_json(j);
        at += 1;
    }
    throw ConfigError("index " + std::to_string(index) + " out of range for " + path);
}

int cmd_measure(const RunConfig& rc) {
    if (rc.instance.empty()) throw ConfigError("measure needs --instance");
    if (rc.candidate.empty()) throw ConfigError("measure needs --candidate");
    if (rc.measurer.empty()) throw ConfigError("measure needs --measurer (a scoring binding, e.g. toy:ckpt.json)");

    const TrainingInstance instance = load_instance(rc.instance, rc.index);
    auto measurer = make_policy(rc.measurer);
    if (!measurer->can_score()) {
        throw ConfigError("measurer binding " + rc.measurer + " cannot score candidates");
    }

    const SpeakingContext ctx = instance.context();
    const Intent intent = instance.intent();
    const PersuasionConfig pc;

    std::cout.precision(17);
    if (rc.measure_mode == "all") {
        for (RewardMode mode : {RewardMode::Full, RewardMode::PositiveOnly, RewardMode::NegativeOnly}) {
            std::cout << to_string(mode) << ": "
                      << measure_reward(rc.candidate, intent, ctx, *measurer, mode, pc) << "\n";
        }
        return 0;
    }
    const RewardMode mode = measure_mode_from_string(rc.measure_mode);
    std::cout << measure_reward(rc.candidate, intent, ctx, *measurer, mode, pc) << "\n";
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"Social-deduction persuasion pipeline: match play, self-play log generation, "
                 "dataset extraction, refiner training, evaluation, and reward measurement."};
    app.require_subcommand(1);

    RunConfig rc;  // defaults; the config file and passed flags land on top
    std::vector<std::unique_ptr<CommandContext>> contexts;
    auto add_command = [&](const std::string& name, const std::string& desc) {
        auto ctx = std::make_unique<CommandContext>();
        ctx->cmd = app.add_subcommand(name, desc);
        ctx->cmd->add_option("--config", ctx->config_path, "JSON config file (flags override it)");
        contexts.push_back(std::move(ctx));
        return contexts.back().get();
    };

    auto* play = add_command("play", "Run one match and print the outcome");
    play->option("--game", &RunConfig::game, "Game: werewolf, avalon, or onuw", rc);
    play->option("--agents", &RunConfig::agents, "Agent pool file (default: one scripted agent)", rc);
    play->option("--seed", &RunConfig::seed, "Match seed", rc);
    play->option("--round-cap", &RunConfig::round_cap, "Abort after this many rounds", rc);
    play->option("--tie-rule", &RunConfig::tie_rule,
                 "Werewolf day-vote ties: random_elimination or no_elimination", rc);
    play->flag("--record-intents", &RunConfig::record_intents, "Record leader intents per turn", rc);
    play->option("--out", &RunConfig::out, "Write the match log (JSONL) here", rc);

    auto* selfplay = add_command("selfplay", "Generate self-play match logs");
    selfplay->option("--game", &RunConfig::game, "Game: werewolf, avalon, or onuw", rc);
    selfplay->option("--count", &RunConfig::count, "Number of matches (default 500)", rc);
    selfplay->option("--backends", &RunConfig::backends,
                     "Backend bindings sampled per seat (stub:<tag>, toy:<ckpt>, remote:<model>@<url>)", rc);
    selfplay->option("--seed", &RunConfig::seed, "Run seed", rc);
    selfplay->option("--round-cap", &RunConfig::round_cap, "Abort after this many rounds", rc);
    selfplay->option("--tie-rule", &RunConfig::tie_rule,
                     "Werewolf day-vote ties: random_elimination or no_elimination", rc);
    selfplay->option("--workers", &RunConfig::workers, "Parallel match workers", rc);
    selfplay->option("--out", &RunConfig::out, "Write match logs (JSONL) here", rc);

    auto* extract = add_command("extract", "Sample a training dataset from match logs");
    extract->option("--logs", &RunConfig::logs, "Self-play match logs (JSONL)", rc);
    extract->option("--sample", &RunConfig::sample, "Instances to draw without replacement (default 4000)", rc);
    extract->option("--seed", &RunConfig::seed, "Sampling seed", rc);
    extract->option("--out", &RunConfig::out, "Write the dataset (JSONL) here", rc);

    auto* train = add_command("train", "Train the toy refiner on a dataset");
    train->option("--dataset", &RunConfig::dataset, "Training dataset (JSONL)", rc);
    train->option("--init", &RunConfig::init, "Starting checkpoint (default: zero weights)", rc);
    train->option("--measurer", &RunConfig::measurer,
                  "Scoring binding for rewards (default: frozen copy of the initial refiner)", rc);
    train->option("--vocab-cap", &RunConfig::vocab_cap, "Vocabulary size cap for fresh starts", rc);
    auto bind_trainer = [&](const std::string& name, auto TrainerConfig::*field, const std::string& desc) {
        auto* o = train->cmd->add_option(name, train->flags.trainer.*field, desc);
        train->overlay.bind(o, [train, field, &rc] { rc.trainer.*field = train->flags.trainer.*field; });
    };
    bind_trainer("--n", &TrainerConfig::group_size, "Group size (default 8)");
    bind_trainer("--epsilon", &TrainerConfig::clip_epsilon, "Clip range (default 0.2)");
    bind_trainer("--beta", &TrainerConfig::kl_weight, "KL penalty weight (default 0.04)");
    bind_trainer("--lr", &TrainerConfig::learning_rate, "Learning rate");
    bind_trainer("--epochs", &TrainerConfig::epochs, "Passes over the dataset (default 3)");
    bind_trainer("--steps", &TrainerConfig::max_steps, "Stop after this many steps (0: run every epoch)");
    bind_trainer("--batch", &TrainerConfig::batch_size, "Instances per parameter update");
    bind_trainer("--temperature", &TrainerConfig::temperature, "Sampling temperature");
    bind_trainer("--max-tokens", &TrainerConfig::sample_max_tokens, "Sampled candidate token budget");
    {
        auto* o = train->cmd->add_option("--reward-mode", train->flags.measure_mode,
                                         "full, positive_only, or negative_only");
        train->overlay.bind(o, [train, &rc] {
            rc.trainer.reward_mode = reward_mode_from_string(train->flags.measure_mode);
        });
    }
    {
        auto* o = train->cmd->add_option("--seed", train->flags.seed, "Training seed");
        train->overlay.bind(o, [train, &rc] { rc.trainer.seed = train->flags.seed; });
    }
    train->option("--out", &RunConfig::out, "Write the trained checkpoint here", rc);
    train->option("--metrics", &RunConfig::metrics, "Write per-step metrics (JSONL) here", rc);

    auto* eval = add_command("eval", "Run a tournament or a team evaluation");
    eval->option("--mode", &RunConfig::mode, "tournament or team", rc);
    eval->option("--game", &RunConfig::game, "Game: werewolf, avalon, or onuw", rc);
    eval->option("--agents", &RunConfig::agents, "Agent pool file (default: two stub-backed agents)", rc);
    eval->option("--matches", &RunConfig::matches, "Match count (default 500 tournament, 50 team)", rc);
    eval->option("--seed", &RunConfig::seed, "Run seed", rc);
    eval->option("--round-cap", &RunConfig::round_cap, "Abort after this many rounds", rc);
    eval->option("--tie-rule", &RunConfig::tie_rule,
                 "Werewolf day-vote ties: random_elimination or no_elimination", rc);
    eval->option("--workers", &RunConfig::workers, "Parallel match workers", rc);
    eval->flag("--record-intents", &RunConfig::record_intents, "Record leader intents per turn", rc);
    eval->option("--side", &RunConfig::side, "Team mode: side the variant plays (default: first team)", rc);
    eval->option("--variant", &RunConfig::variant, "Team mode: agent id under evaluation", rc);
    eval->option("--opponent", &RunConfig::opponent, "Team mode: agent id for the other side", rc);
    eval->flag("--table", &RunConfig::table, "Print the plain-text report table", rc);
    eval->option("--out", &RunConfig::out, "Write the JSON report here", rc);

    auto* measure = add_command("measure", "Score one candidate utterance against an instance");
    measure->option("--instance", &RunConfig::instance,
                    "Instance file: one JSON object, an array, or a dataset JSONL", rc);
    measure->option("--index", &RunConfig::index, "Instance index within the file (default 0)", rc);
    measure->option("--candidate", &RunConfig::candidate, "Candidate utterance text", rc);
    measure->option("--measurer", &RunConfig::measurer, "Scoring binding, e.g. toy:ckpt.json", rc);
    measure->option("--mode", &RunConfig::measure_mode,
                    "full, positive_only, negative_only, or all (default all)", rc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CommandContext* active = nullptr;
        for (const auto& ctx : contexts) {
            if (app.got_subcommand(ctx->cmd)) active = ctx.get();
        }
        if (!active) throw ConfigError("no command given");
        active->resolve(rc);
        const std::string name = active->cmd->get_name();
        if (name == "play") return cmd_play(rc);
        if (name == "selfplay") return cmd_selfplay(rc);
        if (name == "extract") return cmd_extract(rc);
        if (name == "train") return cmd_train(rc);
        if (name == "eval") return cmd_eval(rc);
        return cmd_measure(rc);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sdg::cli

int main(int argc, char** argv) { return sdg::cli::run(argc, argv); }
