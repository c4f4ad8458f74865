#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdg/core/types.hpp"

namespace sdg {

// Everything every player can see: round, phase, who is alive, and the
// public record of resolutions (eliminations, tallies, quest results).
// Role assignments of living players never appear here; `details` carries
// game-specific public facts only.
struct PublicState {
    GameKind game = GameKind::Werewolf;
    int round = 0;
    std::string phase;
    std::vector<PlayerId> alive;
    std::vector<PlayerId> eliminated;  // in elimination order
    json details = json::object();

    json to_json() const {
        return json{{"game", to_string(game)}, {"round", round}, {"phase", phase},
                    {"alive", alive},          {"eliminated", eliminated},
                    {"details", details}};
    }

    static PublicState from_json(const json& j) {
        PublicState s;
        s.game = game_kind_from_string(j.at("game").get<std::string>());
        s.round = j.at("round").get<int>();
        s.phase = j.at("phase").get<std::string>();
        s.alive = j.at("alive").get<std::vector<PlayerId>>();
        s.eliminated = j.at("eliminated").get<std::vector<PlayerId>>();
        s.details = j.at("details");
        return s;
    }

    std::string render() const {
        std::string out = "Game: ";
        out += to_string(game);
        out += " | Round " + std::to_string(round) + " | Phase: " + phase;
        out += "\nAlive: " + name_list(alive);
        out += "\nEliminated: " + (eliminated.empty() ? std::string("none") : name_list(eliminated));
        for (const auto& [key, value] : details.items()) {
            if (value.is_array()) {
                out += "\n" + key + ":";
                for (const auto& item : value) {
                    out += "\n  " + (item.is_string() ? item.get<std::string>() : item.dump());
                }
            } else {
                out += "\n" + key + ": " + (value.is_string() ? value.get<std::string>() : value.dump());
            }
        }
        return out;
    }

private:
    static std::string name_list(const std::vector<PlayerId>& ids) {
        if (ids.empty()) return "none";
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ", ";
            out += player_name(ids[i]);
        }
        return out;
    }
};

// Role-granted knowledge for one viewer. `facts` holds structured night
// knowledge (probe results, peeks, learned roles) keyed by "kind".
struct PrivateView {
    PlayerId viewer = 0;
    std::string role;  // the viewer's own role (initial deal)
    std::map<PlayerId, std::string> known_roles;
    std::map<PlayerId, std::string> known_alignments;  // "good" / "evil"
    std::vector<json> facts;

    json to_json() const {
        json roles = json::object();
        for (const auto& [id, r] : known_roles) roles[std::to_string(id)] = r;
        json aligns = json::object();
        for (const auto& [id, a] : known_alignments) aligns[std::to_string(id)] = a;
        return json{{"viewer", viewer},           {"role", role},
                    {"known_roles", roles},       {"known_alignments", aligns},
                    {"facts", facts}};
    }
};

struct PlayerView {
    PublicState public_state;
    PrivateView private_view;

    json to_json() const {
        return json{{"public", public_state.to_json()}, {"private", private_view.to_json()}};
    }
};

}  // namespace sdg
