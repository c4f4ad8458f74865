#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sdg/core/types.hpp"

namespace sdg {

struct PlayerEntry {
    PlayerId id = 0;
    std::string role;
    std::string agent;

    json to_json() const { return json{{"id", id}, {"role", role}, {"agent", agent}}; }

    static PlayerEntry from_json(const json& j) {
        return PlayerEntry{j.at("id").get<PlayerId>(), j.at("role").get<std::string>(),
                           j.at("agent").get<std::string>()};
    }
};

// One discussion utterance. `base` and the intent pair are present when the
// speaking agent produced them (LLM-framework agents; scripted agents speak
// final text directly).
struct TurnEntry {
    int t = 0;
    PlayerId speaker = 0;
    std::optional<std::string> base;
    std::string final_text;
    std::optional<std::string> desired;
    std::optional<std::string> undesired;

    json to_json() const {
        json j{{"t", t}, {"speaker", speaker}, {"u_final", final_text}};
        if (base) j["u_base"] = *base;
        if (desired && undesired) j["intent"] = json{{"desired", *desired}, {"undesired", *undesired}};
        return j;
    }

    static TurnEntry from_json(const json& j) {
        TurnEntry e;
        e.t = j.at("t").get<int>();
        e.speaker = j.at("speaker").get<PlayerId>();
        e.final_text = j.at("u_final").get<std::string>();
        if (j.contains("u_base")) e.base = j.at("u_base").get<std::string>();
        if (j.contains("intent")) {
            e.desired = j.at("intent").at("desired").get<std::string>();
            e.undesired = j.at("intent").at("undesired").get<std::string>();
        }
        return e;
    }
};

// Full record of one match: seats, event log, transcript, outcome.
// Aborted matches (safety cap) carry no winner and are excluded from
// win-rate statistics downstream.
struct MatchRecord {
    std::string match_id;
    GameKind game = GameKind::Werewolf;
    std::uint64_t seed = 0;
    std::vector<PlayerEntry> players;
    std::vector<GameEvent> events;
    std::vector<TurnEntry> turns;
    std::optional<Team> winner;
    int terminal_round = 0;
    OutcomeReason reason = OutcomeReason::WinCondition;
    json config_echo = json::object();

    bool aborted() const { return reason == OutcomeReason::RoundCapAbort; }

    json to_json() const {
        json players_j = json::array();
        for (const auto& p : players) players_j.push_back(p.to_json());
        json events_j = json::array();
        for (const auto& e : events) events_j.push_back(e.to_json());
        json turns_j = json::array();
        for (const auto& t : turns) turns_j.push_back(t.to_json());
        json outcome{{"winner", winner ? to_string(*winner) : "none"},
                     {"rounds", terminal_round},
                     {"reason", to_string(reason)}};
        return json{{"match_id", match_id}, {"game", to_string(game)}, {"seed", seed},
                    {"players", players_j}, {"events", events_j},     {"turns", turns_j},
                    {"outcome", outcome},   {"config", config_echo}};
    }

    static MatchRecord from_json(const json& j) {
        MatchRecord r;
        r.match_id = j.at("match_id").get<std::string>();
        r.game = game_kind_from_string(j.at("game").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& p : j.at("players")) r.players.push_back(PlayerEntry::from_json(p));
        for (const auto& e : j.at("events")) r.events.push_back(GameEvent::from_json(e));
        for (const auto& t : j.at("turns")) r.turns.push_back(TurnEntry::from_json(t));
        const auto& outcome = j.at("outcome");
        const auto winner = outcome.at("winner").get<std::string>();
        if (winner != "none") r.winner = team_from_string(winner);
        r.terminal_round = outcome.at("rounds").get<int>();
        r.reason = outcome.at("reason").get<std::string>() == "round_cap_abort"
                       ? OutcomeReason::RoundCapAbort
                       : OutcomeReason::WinCondition;
        if (j.contains("config")) r.config_echo = j.at("config");
        return r;
    }

    std::string role_of(PlayerId id) const {
        for (const auto& p : players) {
            if (p.id == id) return p.role;
        }
        throw Error("no such player in match record: " + std::to_string(id));
    }
};

inline void write_jsonl(const std::string& path, const std::vector<MatchRecord>& records) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    for (const auto& r : records) out << r.to_json().dump() << '\n';
}

inline std::vector<MatchRecord> read_match_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path);
    std::vector<MatchRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(MatchRecord::from_json(json::parse(line)));
    }
    return records;
}

}  // namespace sdg
