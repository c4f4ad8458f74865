#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "sdg/core/public_state.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/core/types.hpp"

namespace sdg::onuw {

enum class Role { Werewolf, Villager, Seer, Robber, Troublemaker, Insomniac };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::Werewolf: return "Werewolf";
        case Role::Villager: return "Villager";
        case Role::Seer: return "Seer";
        case Role::Robber: return "Robber";
        case Role::Troublemaker: return "Troublemaker";
        case Role::Insomniac: return "Insomniac";
    }
    throw Error("unknown role");
}

inline Team team_of(Role r) { return r == Role::Werewolf ? Team::Werewolf : Team::Village; }

struct Options {
    // Literal reading eliminates every player tied at the top tally. The
    // standard variant spares everyone when the top tally is a single vote.
    bool standard_tie = false;
};

struct SeerPlayer { PlayerId target = 0; };
struct SeerCenter {};
struct SeerSkip {};
using SeerChoice = std::variant<SeerPlayer, SeerCenter, SeerSkip>;

struct RobberSwap { PlayerId target = 0; };
struct RobberSkip {};
using RobberChoice = std::variant<RobberSwap, RobberSkip>;

struct VoteOutcome {
    std::map<PlayerId, int> tallies;
    std::vector<PlayerId> eliminated;
    std::map<PlayerId, Role> reveals;  // final cards of the eliminated
    GameOutcome outcome;
};

// One Night Werewolf for 5 players and a 7-card deck with 2 face-down
// center cards. Night actions run once each in a fixed order keyed to the
// ORIGINAL deal; swapped cards act for their new owners afterwards.
class Game {
public:
    static constexpr int player_count = 5;
    static constexpr int center_count = 2;

    static Game setup(std::uint64_t seed, Options opts = {}) {
        DeterministicRandomStream rng(seed);
        // Werewolf card always goes to a player; conditionally uniform deal.
        const PlayerId wolf_seat = static_cast<PlayerId>(rng.uniform_int(player_count)) + 1;
        std::vector<Role> rest{Role::Villager, Role::Villager,     Role::Seer,
                               Role::Robber,   Role::Troublemaker, Role::Insomniac};
        rng.shuffle(rest);
        std::array<Role, player_count> players{};
        std::array<Role, center_count> center{};
        std::size_t next = 0;
        for (PlayerId id = 1; id <= player_count; ++id) {
            players[static_cast<std::size_t>(id - 1)] =
                (id == wolf_seat) ? Role::Werewolf : rest[next++];
        }
        for (int i = 0; i < center_count; ++i) center[static_cast<std::size_t>(i)] = rest[next++];
        return Game(players, center, std::move(rng), seed, opts);
    }

    static Game from_deal(const std::array<Role, player_count>& players,
                          const std::array<Role, center_count>& center, std::uint64_t seed,
                          Options opts = {}) {
        std::map<Role, int> counts;
        for (Role r : players) counts[r] += 1;
        for (Role r : center) counts[r] += 1;
        const bool deck_ok = counts[Role::Werewolf] == 1 && counts[Role::Villager] == 2 &&
                             counts[Role::Seer] == 1 && counts[Role::Robber] == 1 &&
                             counts[Role::Troublemaker] == 1 && counts[Role::Insomniac] == 1;
        if (!deck_ok) throw IllegalProposal("deal must use the full 7-card deck exactly once");
        bool wolf_with_player = false;
        for (Role r : players) wolf_with_player |= r == Role::Werewolf;
        if (!wolf_with_player) throw IllegalProposal("the Werewolf card is always dealt to a player");
        return Game(players, center, DeterministicRandomStream(seed), seed, opts);
    }

    Role initial_role(PlayerId id) const { return initial_.at(seat_index(id)); }
    Role current_role(PlayerId id) const { return current_.at(seat_index(id)); }
    Role center_card(int i) const { return center_.at(static_cast<std::size_t>(i)); }
    std::uint64_t seed() const { return seed_; }
    const std::string& phase() const { return phase_; }

    std::vector<PlayerId> living() const {
        std::vector<PlayerId> out;
        for (PlayerId id = 1; id <= player_count; ++id) out.push_back(id);
        return out;
    }

    std::optional<PlayerId> holder_of(Role role) const {
        for (PlayerId id = 1; id <= player_count; ++id) {
            if (initial_role(id) == role) return id;
        }
        return std::nullopt;
    }

    // The single werewolf learns it has no packmates. No center peek.
    json night_werewolf() {
        const PlayerId actor = require_turn(Role::Werewolf);
        json fact{{"kind", "werewolf_alone"}};
        record_night(actor, Role::Werewolf, fact);
        return fact;
    }

    // Board is untouched when the Seer acts, so the peek reflects the deal.
    json night_seer(const SeerChoice& choice) {
        const PlayerId actor = require_turn(Role::Seer);
        json fact;
        if (const auto* pick = std::get_if<SeerPlayer>(&choice)) {
            if (pick->target == actor) throw IllegalTarget("seer examines another player");
            seat_index(pick->target);
            fact = json{{"kind", "seer_peek"},
                        {"target", pick->target},
                        {"role", to_string(current_role(pick->target))}};
        } else if (std::holds_alternative<SeerCenter>(choice)) {
            fact = json{{"kind", "seer_center"},
                        {"cards", {to_string(center_[0]), to_string(center_[1])}}};
        } else {
            fact = json{{"kind", "seer_skip"}};
        }
        record_night(actor, Role::Seer, fact);
        return fact;
    }

    json night_robber(const RobberChoice& choice) {
        const PlayerId actor = require_turn(Role::Robber);
        json fact;
        if (const auto* swap = std::get_if<RobberSwap>(&choice)) {
            if (swap->target == actor) throw IllegalTarget("robber swaps with another player");
            seat_index(swap->target);
            std::swap(current_[seat_index(actor)], current_[seat_index(swap->target)]);
            fact = json{{"kind", "robber_swap"},
                        {"target", swap->target},
                        {"new_role", to_string(current_role(actor))}};
        } else {
            fact = json{{"kind", "robber_skip"}};
        }
        record_night(actor, Role::Robber, fact);
        return fact;
    }

    // Mandatory swap of two other players; the troublemaker learns nothing.
    void night_troublemaker(PlayerId a, PlayerId b) {
        const PlayerId actor = require_turn(Role::Troublemaker);
        if (a == b) throw IllegalTarget("troublemaker swaps two distinct players");
        if (a == actor || b == actor) throw IllegalTarget("troublemaker swaps two OTHER players");
        seat_index(a);
        seat_index(b);
        std::swap(current_[seat_index(a)], current_[seat_index(b)]);
        record_night(actor, Role::Troublemaker, json{{"kind", "troublemaker_swap"}, {"a", a}, {"b", b}});
    }

    json night_insomniac() {
        const PlayerId actor = require_turn(Role::Insomniac);
        json fact{{"kind", "insomniac_check"}, {"role", to_string(current_role(actor))}};
        record_night(actor, Role::Insomniac, fact);
        return fact;
    }

    // Which initial roles still have a pending night action, in order.
    std::vector<Role> pending_night_roles() const {
        std::vector<Role> out;
        for (Role r : night_order()) {
            if (holder_of(r) && !acted_.count(r)) out.push_back(r);
        }
        return out;
    }

    void finish_night() {
        if (phase_ != "night") throw IllegalPhase("not in the night phase");
        if (!pending_night_roles().empty()) throw IllegalPhase("night actions still pending");
        phase_ = "discussion";
    }

    std::vector<PlayerId> discussion_order() const { return living(); }

    const Utterance& add_speech(PlayerId speaker, const std::string& text) {
        if (outcome_) throw IllegalPhase("the match is over");
        seat_index(speaker);
        const auto& u = dialogue_.append(speaker, text);
        push_event(phase_, speaker, "speech",
                   json{{"t", u.turn},
                        {"speaker", speaker},
                        {"text", u.text},
                        {"round", 1},
                        {"state", public_state().to_json()}},
                   Visibility::Public);
        return u;
    }

    // Single simultaneous vote; the match is decided here. Every player
    // tied at the top tally is eliminated (see Options for the variant)
    // and reveals their final card.
    VoteOutcome resolve_vote(const std::map<PlayerId, PlayerId>& ballots) {
        if (outcome_) throw IllegalPhase("the match is over");
        if (phase_ == "night") throw IllegalPhase("voting happens after the night");
        if (ballots.size() != player_count) throw IllegalBallot("expected one ballot per player");
        VoteOutcome out;
        json ballots_j = json::object();
        for (const auto& [voter, target] : ballots) {
            seat_index(voter);
            seat_index(target);
            if (voter == target) throw IllegalBallot("players vote for another player");
            out.tallies[target] += 1;
            ballots_j[std::to_string(voter)] = target;
        }
        int top = 0;
        for (const auto& [_, n] : out.tallies) top = std::max(top, n);
        const bool spare_all = opts_.standard_tie && top <= 1;
        if (!spare_all) {
            for (const auto& [id, n] : out.tallies) {
                if (n == top) out.eliminated.push_back(id);
            }
        }

        json tallies_j = json::object();
        for (const auto& [id, n] : out.tallies) tallies_j[std::to_string(id)] = n;
        push_event("voting", std::nullopt, "vote",
                   json{{"ballots", ballots_j}, {"tallies", tallies_j}, {"eliminated", out.eliminated}},
                   Visibility::Public);

        bool wolf_eliminated = false;
        for (PlayerId id : out.eliminated) {
            const Role final_role = current_role(id);
            out.reveals[id] = final_role;
            wolf_eliminated |= final_role == Role::Werewolf;
            eliminated_.push_back(id);
            push_event("voting", std::nullopt, "reveal",
                       json{{"player", id}, {"role", to_string(final_role)}}, Visibility::Public);
        }

        json final_roles = json::object();
        for (PlayerId id = 1; id <= player_count; ++id) {
            final_roles[std::to_string(id)] = to_string(current_role(id));
        }
        push_event("voting", std::nullopt, "final_roles", json{{"roles", final_roles}},
                   Visibility::Hidden);

        out.outcome = GameOutcome{wolf_eliminated ? Team::Village : Team::Werewolf, 1,
                                  OutcomeReason::WinCondition};
        outcome_ = out.outcome;
        phase_ = "terminal";
        push_event("terminal", std::nullopt, "victory",
                   json{{"winner", to_string(out.outcome.winner)}, {"round", 1}}, Visibility::Public);
        return out;
    }

    std::optional<GameOutcome> check_victory() const { return outcome_; }
    bool finished() const { return outcome_.has_value(); }
    const std::optional<GameOutcome>& outcome() const { return outcome_; }

    PublicState public_state() const {
        PublicState s;
        s.game = GameKind::Onuw;
        s.round = 1;
        s.phase = phase_;
        s.alive = living();
        s.eliminated = eliminated_;
        s.details["center_cards"] = center_count;
        return s;
    }

    PlayerView view(PlayerId viewer) const {
        PlayerView v;
        v.public_state = public_state();
        v.private_view.viewer = viewer;
        v.private_view.role = to_string(initial_role(viewer));
        auto it = night_knowledge_.find(viewer);
        if (it != night_knowledge_.end()) {
            for (const auto& fact : it->second) v.private_view.facts.push_back(fact);
        }
        return v;
    }

    const std::vector<GameEvent>& events() const { return events_; }
    const DialogueHistory& dialogue() const { return dialogue_; }
    DeterministicRandomStream& rng() { return rng_; }
    const Options& options() const { return opts_; }

private:
    Game(const std::array<Role, player_count>& players, const std::array<Role, center_count>& center,
         DeterministicRandomStream rng, std::uint64_t seed, Options opts)
        : initial_(players), current_(players), center_(center), rng_(std::move(rng)),
          seed_(seed), opts_(opts) {
        json deal = json::object();
        for (PlayerId id = 1; id <= player_count; ++id) {
            deal[std::to_string(id)] = to_string(initial_role(id));
        }
        push_event("setup", std::nullopt, "deal",
                   json{{"players", deal}, {"center", {to_string(center_[0]), to_string(center_[1])}}},
                   Visibility::Hidden);
        phase_ = "night";
    }

    static std::vector<Role> night_order() {
        return {Role::Werewolf, Role::Seer, Role::Robber, Role::Troublemaker, Role::Insomniac};
    }

    static std::size_t seat_index(PlayerId id) {
        if (id < 1 || id > player_count) throw IllegalTarget("no such player");
        return static_cast<std::size_t>(id - 1);
    }

    // Night order is fixed; each dealt role acts exactly once.
    PlayerId require_turn(Role role) {
        if (phase_ != "night") throw IllegalPhase("night actions happen at night");
        const auto holder = holder_of(role);
        if (!holder) throw IllegalPhase("role not dealt to a player");
        if (acted_.count(role)) throw IllegalPhase("role already acted tonight");
        for (Role earlier : night_order()) {
            if (earlier == role) break;
            if (holder_of(earlier) && !acted_.count(earlier)) {
                throw IllegalPhase("night actions run in the fixed role order");
            }
        }
        return *holder;
    }

    void record_night(PlayerId actor, Role role, const json& fact) {
        acted_.insert(role);
        night_knowledge_[actor].push_back(fact);
        push_event("night", actor, "night_action",
                   json{{"role", to_string(role)}, {"fact", fact}}, Visibility::Private);
    }

    void push_event(std::string phase, std::optional<PlayerId> actor, std::string kind,
                    json payload, Visibility vis) {
        events_.push_back(GameEvent{std::move(phase), actor, std::move(kind), std::move(payload), vis});
    }

    std::array<Role, player_count> initial_{};
    std::array<Role, player_count> current_{};
    std::array<Role, center_count> center_{};
    DeterministicRandomStream rng_;
    std::uint64_t seed_ = 0;
    Options opts_;
    std::string phase_ = "setup";
    std::set<Role> acted_;
    std::map<PlayerId, std::vector<json>> night_knowledge_;
    std::vector<PlayerId> eliminated_;
    std::optional<GameOutcome> outcome_;
    std::vector<GameEvent> events_;
    DialogueHistory dialogue_;
};

}  // namespace sdg::onuw
