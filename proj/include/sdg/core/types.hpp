#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdg/core/errors.hpp"

namespace sdg {

using json = nlohmann::json;

// Player seats are 1-based across all engines and file formats.
using PlayerId = int;

inline std::string player_name(PlayerId id) { return "Player " + std::to_string(id); }

enum class GameKind { Werewolf, Avalon, Onuw };

inline const char* to_string(GameKind g) {
    switch (g) {
        case GameKind::Werewolf: return "werewolf";
        case GameKind::Avalon: return "avalon";
        case GameKind::Onuw: return "onuw";
    }
    throw Error("unknown game kind");
}

inline GameKind game_kind_from_string(const std::string& s) {
    if (s == "werewolf") return GameKind::Werewolf;
    if (s == "avalon") return GameKind::Avalon;
    if (s == "onuw") return GameKind::Onuw;
    throw ConfigError("unknown game: " + s);
}

enum class Team { Village, Werewolf, Good, Evil };

inline const char* to_string(Team t) {
    switch (t) {
        case Team::Village: return "Village";
        case Team::Werewolf: return "Werewolf";
        case Team::Good: return "Good";
        case Team::Evil: return "Evil";
    }
    throw Error("unknown team");
}

inline Team team_from_string(const std::string& s) {
    if (s == "Village") return Team::Village;
    if (s == "Werewolf") return Team::Werewolf;
    if (s == "Good") return Team::Good;
    if (s == "Evil") return Team::Evil;
    throw ConfigError("unknown team: " + s);
}

// The two sides of a game, informed-minority side second.
inline std::pair<Team, Team> team_sides(GameKind g) {
    switch (g) {
        case GameKind::Werewolf: return {Team::Village, Team::Werewolf};
        case GameKind::Avalon: return {Team::Good, Team::Evil};
        case GameKind::Onuw: return {Team::Village, Team::Werewolf};
    }
    throw Error("unknown game kind");
}

struct Utterance {
    PlayerId speaker = 0;
    std::string text;
    int turn = 0;  // 1-based, contiguous per match
};

// Append-only transcript; turn numbers are assigned on append.
class DialogueHistory {
public:
    const Utterance& append(PlayerId speaker, std::string text) {
        if (text.empty()) throw Error("dialogue entry must be non-empty");
        entries_.push_back(Utterance{speaker, std::move(text), static_cast<int>(entries_.size()) + 1});
        return entries_.back();
    }

    const std::vector<Utterance>& entries() const { return entries_; }
    int size() const { return static_cast<int>(entries_.size()); }
    bool empty() const { return entries_.empty(); }

    // Entries strictly before the given turn number.
    DialogueHistory prefix_before(int turn) const {
        DialogueHistory out;
        for (const auto& u : entries_) {
            if (u.turn < turn) out.entries_.push_back(u);
        }
        return out;
    }

    // "Player k: <text>", one line per utterance, in turn order.
    std::string render() const {
        std::string out;
        for (const auto& u : entries_) {
            if (!out.empty()) out += '\n';
            out += player_name(u.speaker) + ": " + u.text;
        }
        return out;
    }

private:
    std::vector<Utterance> entries_;
};

enum class Visibility { Public, Hidden, Private };

inline const char* to_string(Visibility v) {
    switch (v) {
        case Visibility::Public: return "public";
        case Visibility::Hidden: return "hidden";
        case Visibility::Private: return "private";
    }
    throw Error("unknown visibility");
}

inline Visibility visibility_from_string(const std::string& s) {
    if (s == "public") return Visibility::Public;
    if (s == "hidden") return Visibility::Hidden;
    if (s == "private") return Visibility::Private;
    throw ConfigError("unknown visibility: " + s);
}

// One entry of the match event log. The event log is the source of truth
// for a match: every deal, decision, speech, and resolution lands here.
// Hidden payloads never surface through public views.
struct GameEvent {
    std::string phase;
    std::optional<PlayerId> actor;
    std::string kind;
    json payload;
    Visibility visibility = Visibility::Public;

    json to_json() const {
        json j{{"phase", phase}, {"kind", kind}, {"payload", payload},
               {"visibility", to_string(visibility)}};
        if (actor) j["actor"] = *actor;
        return j;
    }

    static GameEvent from_json(const json& j) {
        GameEvent e;
        e.phase = j.at("phase").get<std::string>();
        e.kind = j.at("kind").get<std::string>();
        e.payload = j.at("payload");
        e.visibility = visibility_from_string(j.at("visibility").get<std::string>());
        if (j.contains("actor")) e.actor = j.at("actor").get<PlayerId>();
        return e;
    }
};

enum class OutcomeReason { WinCondition, RoundCapAbort };

inline const char* to_string(OutcomeReason r) {
    return r == OutcomeReason::WinCondition ? "win_condition" : "round_cap_abort";
}

struct GameOutcome {
    Team winner = Team::Village;
    int terminal_round = 0;
    OutcomeReason reason = OutcomeReason::WinCondition;
};

struct RulesText {
    GameKind game = GameKind::Werewolf;
    std::string text;
};

}  // namespace sdg
