#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/core/match_log.hpp"
#include "sdg/core/public_state.hpp"
#include "sdg/core/types.hpp"
#include "sdg/games/rules.hpp"
#include "sdg/persuasion/pipeline.hpp"

namespace sdg {

// One dataset row: everything needed to rebuild the leader's training-time
// speaking context (R, G_t, D_t, r_t, r_{t+1}) plus the recorded base
// utterance and intent.
struct TrainingInstance {
    GameKind game = GameKind::Werewolf;
    std::uint64_t seed = 0;
    int turn = 0;
    std::string rules;
    PublicState public_state;
    std::vector<Utterance> dialogue;  // D_t, turns 1..t-1
    PlayerId speaker = 0;
    std::string speaker_role;
    PlayerId next_speaker = 0;
    std::string next_role;
    std::string base;
    std::string desired;
    std::string undesired;

    SpeakingContext context() const {
        SpeakingContext ctx;
        ctx.rules = RulesText{game, rules};
        ctx.public_state = public_state;
        for (const auto& u : dialogue) ctx.dialogue.append(u.speaker, u.text);
        ctx.speaker = speaker;
        ctx.speaker_role = speaker_role;
        ctx.next_speaker = next_speaker;
        ctx.next_role = next_role;
        return ctx;
    }

    Intent intent() const { return Intent{desired, undesired, ""}; }

    json to_json() const {
        json lines = json::array();
        for (const auto& u : dialogue) lines.push_back({{"speaker", u.speaker}, {"text", u.text}});
        return json{{"game", to_string(game)},
                    {"seed", seed},
                    {"turn", turn},
                    {"rules", rules},
                    {"public_state", public_state.to_json()},
                    {"dialogue", lines},
                    {"speaker", speaker},
                    {"speaker_role", speaker_role},
                    {"next_speaker", next_speaker},
                    {"next_role", next_role},
                    {"base", base},
                    {"desired", desired},
                    {"undesired", undesired}};
    }

    static TrainingInstance from_json(const json& j) {
        TrainingInstance t;
        t.game = game_kind_from_string(j.at("game").get<std::string>());
        t.seed = j.at("seed").get<std::uint64_t>();
        t.turn = j.at("turn").get<int>();
        t.rules = j.at("rules").get<std::string>();
        t.public_state = PublicState::from_json(j.at("public_state"));
        int n = 1;
        for (const auto& line : j.at("dialogue"))
            t.dialogue.push_back(
                Utterance{line.at("speaker").get<PlayerId>(), line.at("text").get<std::string>(), n++});
        t.speaker = j.at("speaker").get<PlayerId>();
        t.speaker_role = j.at("speaker_role").get<std::string>();
        t.next_speaker = j.at("next_speaker").get<PlayerId>();
        t.next_role = j.at("next_role").get<std::string>();
        t.base = j.at("base").get<std::string>();
        t.desired = j.at("desired").get<std::string>();
        t.undesired = j.at("undesired").get<std::string>();
        return t;
    }
};

struct ExtractStats {
    int instances = 0;
    int skipped_no_follower = 0;  // last speech of its discussion stretch
    int skipped_no_intent = 0;
    int skipped_malformed = 0;

    int skipped() const { return skipped_no_follower + skipped_no_intent + skipped_malformed; }
};

namespace detail {

inline const GameEvent* speech_event_for_turn(const MatchRecord& record, int t) {
    for (const auto& e : record.events)
        if (e.kind == "speech" && e.payload.contains("t") && e.payload.at("t").get<int>() == t) return &e;
    return nullptr;
}

}  // namespace detail

// Rebuilds the recording-time context of turn t. Returns nothing (and ticks
// the matching counter) when the turn cannot be a training instance: no
// follower inside the same discussion stretch, missing intent, or a log too
// damaged to reconstruct.
inline std::optional<TrainingInstance> build_training_instance(const MatchRecord& record, int t,
                                                               ExtractStats* stats = nullptr) {
    ExtractStats local;
    ExtractStats& s = stats ? *stats : local;

    const TurnEntry* turn = nullptr;
    const TurnEntry* next = nullptr;
    for (const auto& entry : record.turns) {
        if (entry.t == t) turn = &entry;
        if (entry.t == t + 1) next = &entry;
    }
    if (!turn) {
        s.skipped_malformed++;
        return std::nullopt;
    }
    if (!turn->desired || !turn->undesired) {
        s.skipped_no_intent++;
        return std::nullopt;
    }
    const GameEvent* speech = detail::speech_event_for_turn(record, t);
    if (!speech || !speech->payload.contains("state")) {
        s.skipped_malformed++;
        return std::nullopt;
    }
    if (!next) {
        s.skipped_no_follower++;
        return std::nullopt;
    }
    // The follower must answer within the same discussion stretch: same
    // phase, same round.
    const GameEvent* next_speech = detail::speech_event_for_turn(record, t + 1);
    if (!next_speech) {
        s.skipped_malformed++;
        return std::nullopt;
    }
    if (next_speech->phase != speech->phase ||
        next_speech->payload.at("round").get<int>() != speech->payload.at("round").get<int>()) {
        s.skipped_no_follower++;
        return std::nullopt;
    }

    std::string speaker_role;
    std::string next_role;
    try {
        speaker_role = record.role_of(turn->speaker);
        next_role = record.role_of(next->speaker);
    } catch (const Error&) {
        s.skipped_malformed++;
        return std::nullopt;
    }
    if (speaker_role.empty() || next_role.empty()) {
        s.skipped_malformed++;
        return std::nullopt;
    }

    TrainingInstance out;
    out.game = record.game;
    out.seed = record.seed;
    out.turn = t;
    out.rules = rules_text(record.game).text;
    out.public_state = PublicState::from_json(speech->payload.at("state"));
    for (const auto& entry : record.turns)
        if (entry.t < t) out.dialogue.push_back(Utterance{entry.speaker, entry.final_text, entry.t});
    out.speaker = turn->speaker;
    out.speaker_role = speaker_role;
    out.next_speaker = next->speaker;
    out.next_role = next_role;
    out.base = turn->base.value_or(turn->final_text);
    out.desired = *turn->desired;
    out.undesired = *turn->undesired;
    s.instances++;
    return out;
}

inline std::vector<TrainingInstance> extract_all_instances(const MatchRecord& record, ExtractStats* stats = nullptr) {
    std::vector<TrainingInstance> out;
    for (const auto& turn : record.turns) {
        auto instance = build_training_instance(record, turn.t, stats);
        if (instance) out.push_back(std::move(*instance));
    }
    return out;
}

// Dataset files are JSONL: an optional leading header object keyed
// "dataset_config" carrying the producing run's configuration, then one
// instance per line.
inline void write_dataset_jsonl(const std::string& path, const std::vector<TrainingInstance>& instances,
                                const json* config_echo = nullptr) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open dataset file for writing: " + path);
    if (config_echo) out << json{{"dataset_config", *config_echo}}.dump() << "\n";
    for (const auto& instance : instances) out << instance.to_json().dump() << "\n";
}

inline std::vector<TrainingInstance> read_dataset_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    std::vector<TrainingInstance> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        const bool header = first && j.is_object() && j.contains("dataset_config");
        first = false;
        if (header) continue;
        out.push_back(TrainingInstance::from_json(j));
    }
    return out;
}

// The header config of a dataset file, or null when it has none.
inline json read_dataset_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (j.is_object() && j.contains("dataset_config")) return j.at("dataset_config");
        break;
    }
    return json();
}

}  // namespace sdg
