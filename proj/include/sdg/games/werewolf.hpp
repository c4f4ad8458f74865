#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdg/core/public_state.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/core/types.hpp"

namespace sdg::werewolf {

enum class Role { Werewolf, Seer, Guardian, Villager };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::Werewolf: return "Werewolf";
        case Role::Seer: return "Seer";
        case Role::Guardian: return "Guardian";
        case Role::Villager: return "Villager";
    }
    throw Error("unknown role");
}

enum class TieRule { RandomElimination, NoElimination };

struct Options {
    TieRule tie_rule = TieRule::RandomElimination;
};

struct WolfProposal {
    PlayerId proposer = 0;
    PlayerId target = 0;
};

struct NightResolution {
    PlayerId target = 0;
    std::optional<PlayerId> protected_player;
    std::optional<PlayerId> probed;
    std::optional<bool> probe_is_werewolf;
    std::optional<PlayerId> eliminated;
};

// 7-player Werewolf. Rounds alternate night and day; the engine owns the
// event log and transcript, callers drive the phases in order:
//   resolve_werewolf_target -> resolve_night -> add_speech* -> resolve_day_vote
class Game {
public:
    static constexpr int player_count = 7;

    static Game setup(std::uint64_t seed, Options opts = {}) {
        std::vector<Role> deck{Role::Werewolf, Role::Werewolf, Role::Seer,
                               Role::Guardian, Role::Villager, Role::Villager,
                               Role::Villager};
        DeterministicRandomStream rng(seed);
        rng.shuffle(deck);
        std::array<Role, player_count> roles{};
        std::copy(deck.begin(), deck.end(), roles.begin());
        return Game(roles, std::move(rng), seed, opts);
    }

    // Fixed deal for transcript fixtures and oracles.
    static Game from_roles(const std::array<Role, player_count>& roles, std::uint64_t seed,
                           Options opts = {}) {
        validate_role_multiset(roles);
        return Game(roles, DeterministicRandomStream(seed), seed, opts);
    }

    Role role_of(PlayerId id) const { return roles_.at(seat_index(id)); }
    bool alive(PlayerId id) const { return alive_.at(seat_index(id)); }
    int round() const { return round_; }
    const std::string& phase() const { return phase_; }
    std::uint64_t seed() const { return seed_; }

    std::vector<PlayerId> living() const {
        std::vector<PlayerId> out;
        for (PlayerId id = 1; id <= player_count; ++id) {
            if (alive(id)) out.push_back(id);
        }
        return out;
    }

    std::vector<PlayerId> living_werewolves() const {
        std::vector<PlayerId> out;
        for (PlayerId id : living()) {
            if (role_of(id) == Role::Werewolf) out.push_back(id);
        }
        return out;
    }

    // Lower-id living werewolf proposes, the other decides. With a single
    // werewolf left the proposal stands as the decision.
    PlayerId resolve_werewolf_target(const std::vector<WolfProposal>& proposals) {
        require_running();
        enter_night();
        const auto wolves = living_werewolves();
        if (wolves.empty()) throw IllegalPhase("no living werewolves");
        if (proposals.size() != wolves.size()) {
            throw IllegalProposal("expected one proposal per living werewolf");
        }
        for (std::size_t i = 0; i < wolves.size(); ++i) {
            if (proposals[i].proposer != wolves[i]) {
                throw IllegalProposal("proposals must come from the living werewolves in id order");
            }
            validate_wolf_target(proposals[i].proposer, proposals[i].target);
        }
        const PlayerId target = proposals.back().target;  // highest-id wolf decides
        json plist = json::array();
        for (const auto& p : proposals) {
            plist.push_back(json{{"proposer", p.proposer}, {"target", p.target}});
        }
        push_event("night", wolves.back(), "night_target",
                   json{{"proposals", plist}, {"target", target}}, Visibility::Hidden);
        return target;
    }

    // Applies the whole night. Protection requires a living Guardian, the
    // probe a living Seer; pass nullopt when the role is dead or absent.
    NightResolution resolve_night(PlayerId target, std::optional<PlayerId> protection,
                                  std::optional<PlayerId> probe) {
        require_running();
        enter_night();
        validate_wolf_target(living_werewolves().empty() ? 0 : living_werewolves().front(), target);

        NightResolution res;
        res.target = target;

        if (protection) {
            const PlayerId guardian = find_living(Role::Guardian);
            if (guardian == 0) throw IllegalTarget("protection without a living Guardian");
            if (!alive(*protection)) throw IllegalTarget("guardian must protect a living player");
            res.protected_player = protection;
            push_event("night", guardian, "night_protect", json{{"target", *protection}},
                       Visibility::Hidden);
        }
        if (probe) {
            const PlayerId seer = find_living(Role::Seer);
            if (seer == 0) throw IllegalTarget("probe without a living Seer");
            if (!alive(*probe)) throw IllegalTarget("seer must probe a living player");
            if (*probe == seer) throw IllegalTarget("seer cannot probe themself");
            const bool is_wolf = role_of(*probe) == Role::Werewolf;
            res.probed = probe;
            res.probe_is_werewolf = is_wolf;
            probe_results_[*probe] = is_wolf;
            push_event("night", seer, "night_probe",
                       json{{"target", *probe}, {"is_werewolf", is_wolf}}, Visibility::Hidden);
        }

        if (!protection || *protection != target) {
            eliminate(target, "night");
            res.eliminated = target;
        }
        last_night_eliminated_ = res.eliminated;

        phase_ = "day";
        push_event("day", std::nullopt, "announcement",
                   json{{"round", round_},
                        {"eliminated", res.eliminated ? json(*res.eliminated) : json(nullptr)},
                        {"text", announcement_text(res.eliminated)}},
                   Visibility::Public);
        maybe_declare_victory();
        return res;
    }

    // Living players in ascending seat order.
    std::vector<PlayerId> discussion_order() const { return living(); }

    const Utterance& add_speech(PlayerId speaker, const std::string& text) {
        require_running();
        if (!alive(speaker)) throw IllegalPhase("dead players do not speak");
        const auto& u = dialogue_.append(speaker, text);
        push_event(phase_ == "night" ? "night" : "day", speaker, "speech",
                   json{{"t", u.turn},
                        {"speaker", speaker},
                        {"text", u.text},
                        {"round", round_},
                        {"state", public_state().to_json()}},
                   Visibility::Public);
        return u;
    }

    // Simultaneous ballots from every living player; nullopt abstains.
    // Plurality eliminates; ties follow the configured rule.
    std::optional<PlayerId> resolve_day_vote(
        const std::map<PlayerId, std::optional<PlayerId>>& ballots) {
        require_running();
        const auto voters = living();
        if (ballots.size() != voters.size()) {
            throw IllegalBallot("expected exactly one ballot per living player");
        }
        std::map<PlayerId, int> tallies;
        for (const auto& [voter, choice] : ballots) {
            if (!alive(voter)) throw IllegalBallot("dead players do not vote");
            if (!choice) continue;
            if (*choice == voter) throw IllegalBallot("players vote for another player or abstain");
            if (!alive(*choice)) throw IllegalBallot("votes must target living players");
            tallies[*choice] += 1;
        }

        std::optional<PlayerId> eliminated;
        bool tie = false;
        if (!tallies.empty()) {
            int top = 0;
            for (const auto& [_, n] : tallies) top = std::max(top, n);
            std::vector<PlayerId> leaders;
            for (const auto& [id, n] : tallies) {
                if (n == top) leaders.push_back(id);
            }
            tie = leaders.size() > 1;
            if (!tie) {
                eliminated = leaders.front();
            } else if (opts_.tie_rule == TieRule::RandomElimination) {
                eliminated = leaders[rng_.uniform_int(leaders.size())];
            }
        }

        json ballots_j = json::object();
        for (const auto& [voter, choice] : ballots) {
            ballots_j[std::to_string(voter)] = choice ? json(*choice) : json("abstain");
        }
        json tallies_j = json::object();
        for (const auto& [id, n] : tallies) tallies_j[std::to_string(id)] = n;
        push_event("day", std::nullopt, "vote",
                   json{{"round", round_},
                        {"ballots", ballots_j},
                        {"tallies", tallies_j},
                        {"tie", tie},
                        {"eliminated", eliminated ? json(*eliminated) : json(nullptr)}},
                   Visibility::Public);
        day_records_.push_back(vote_summary(round_, tallies, tie, eliminated));

        if (eliminated) eliminate(*eliminated, "vote");
        phase_ = "dusk";
        maybe_declare_victory();
        return eliminated;
    }

    // Werewolves win at parity or better; the village wins with no werewolf
    // alive. At most one condition can hold.
    std::optional<GameOutcome> check_victory() const {
        if (outcome_) return outcome_;
        int wolves = 0, others = 0;
        for (PlayerId id : living()) {
            (role_of(id) == Role::Werewolf ? wolves : others) += 1;
        }
        if (wolves == 0) return GameOutcome{Team::Village, round_, OutcomeReason::WinCondition};
        if (wolves >= others) return GameOutcome{Team::Werewolf, round_, OutcomeReason::WinCondition};
        return std::nullopt;
    }

    bool finished() const { return outcome_.has_value(); }
    const std::optional<GameOutcome>& outcome() const { return outcome_; }

    PublicState public_state() const {
        PublicState s;
        s.game = GameKind::Werewolf;
        s.round = round_;
        s.phase = phase_;
        s.alive = living();
        s.eliminated = eliminated_order_;
        if (round_ > 0 && phase_ != "setup") {
            s.details["night_result"] = announcement_text(last_night_eliminated_);
        }
        if (!day_records_.empty()) s.details["vote_record"] = day_records_;
        return s;
    }

    PlayerView view(PlayerId viewer) const {
        PlayerView v;
        v.public_state = public_state();
        v.private_view.viewer = viewer;
        v.private_view.role = to_string(role_of(viewer));
        if (role_of(viewer) == Role::Werewolf) {
            for (PlayerId id = 1; id <= player_count; ++id) {
                if (id != viewer && role_of(id) == Role::Werewolf) {
                    v.private_view.known_roles[id] = to_string(Role::Werewolf);
                }
            }
        }
        if (role_of(viewer) == Role::Seer) {
            for (const auto& [target, is_wolf] : probe_results_) {
                v.private_view.facts.push_back(
                    json{{"kind", "seer_probe"}, {"target", target}, {"is_werewolf", is_wolf}});
                if (is_wolf) v.private_view.known_roles[target] = to_string(Role::Werewolf);
            }
        }
        return v;
    }

    const std::vector<GameEvent>& events() const { return events_; }
    const DialogueHistory& dialogue() const { return dialogue_; }
    DeterministicRandomStream& rng() { return rng_; }
    const Options& options() const { return opts_; }

private:
    Game(const std::array<Role, player_count>& roles, DeterministicRandomStream rng,
         std::uint64_t seed, Options opts)
        : roles_(roles), rng_(std::move(rng)), seed_(seed), opts_(opts) {
        alive_.fill(true);
        json deal = json::object();
        for (PlayerId id = 1; id <= player_count; ++id) {
            deal[std::to_string(id)] = to_string(role_of(id));
        }
        push_event("setup", std::nullopt, "deal", json{{"roles", deal}}, Visibility::Hidden);
    }

    static void validate_role_multiset(const std::array<Role, player_count>& roles) {
        std::map<Role, int> counts;
        for (Role r : roles) counts[r] += 1;
        if (counts[Role::Werewolf] != 2 || counts[Role::Seer] != 1 ||
            counts[Role::Guardian] != 1 || counts[Role::Villager] != 3) {
            throw IllegalProposal("role multiset must be 2 Werewolves, Seer, Guardian, 3 Villagers");
        }
    }

    static std::size_t seat_index(PlayerId id) {
        if (id < 1 || id > player_count) throw IllegalTarget("no such player");
        return static_cast<std::size_t>(id - 1);
    }

    void require_running() const {
        if (outcome_) throw IllegalPhase("the match is over");
    }

    void enter_night() {
        if (phase_ == "night") return;
        round_ += 1;
        phase_ = "night";
        last_night_eliminated_ = std::nullopt;
    }

    void validate_wolf_target(PlayerId proposer, PlayerId target) const {
        if (!alive(target)) throw IllegalTarget("night target must be alive");
        if (role_of(target) == Role::Werewolf) throw IllegalTarget("werewolves never target a teammate");
        (void)proposer;
    }

    PlayerId find_living(Role role) const {
        for (PlayerId id : living()) {
            if (role_of(id) == role) return id;
        }
        return 0;
    }

    static std::string announcement_text(std::optional<PlayerId> eliminated) {
        if (eliminated) return player_name(*eliminated) + " was eliminated during the night.";
        return "No one was eliminated during the night.";
    }

    static std::string vote_summary(int round, const std::map<PlayerId, int>& tallies, bool tie,
                                    std::optional<PlayerId> eliminated) {
        std::string out = "Day " + std::to_string(round) + " vote:";
        if (tallies.empty()) {
            out += " all abstained";
        } else {
            for (const auto& [id, n] : tallies) {
                out += " " + player_name(id) + "=" + std::to_string(n) + ",";
            }
            out.pop_back();
        }
        if (tie) out += " (tie)";
        out += eliminated ? "; eliminated " + player_name(*eliminated) : "; no one eliminated";
        return out;
    }

    void eliminate(PlayerId id, const std::string& cause) {
        alive_[seat_index(id)] = false;
        eliminated_order_.push_back(id);
        push_event(phase_ == "night" ? "night" : "day", std::nullopt, "elimination",
                   json{{"player", id}, {"cause", cause}, {"round", round_}}, Visibility::Public);
    }

    void maybe_declare_victory() {
        if (outcome_) return;
        if (auto result = check_victory()) {
            outcome_ = result;
            phase_ = "terminal";
            push_event("terminal", std::nullopt, "victory",
                       json{{"winner", to_string(result->winner)}, {"round", result->terminal_round}},
                       Visibility::Public);
        }
    }

    void push_event(std::string phase, std::optional<PlayerId> actor, std::string kind,
                    json payload, Visibility vis) {
        events_.push_back(GameEvent{std::move(phase), actor, std::move(kind), std::move(payload), vis});
    }

    std::array<Role, player_count> roles_{};
    std::array<bool, player_count> alive_{};
    DeterministicRandomStream rng_;
    std::uint64_t seed_ = 0;
    Options opts_;
    int round_ = 0;
    std::string phase_ = "setup";
    std::optional<GameOutcome> outcome_;
    std::optional<PlayerId> last_night_eliminated_;
    std::vector<PlayerId> eliminated_order_;
    std::vector<std::string> day_records_;
    std::map<PlayerId, bool> probe_results_;
    std::vector<GameEvent> events_;
    DialogueHistory dialogue_;
};

}  // namespace sdg::werewolf
