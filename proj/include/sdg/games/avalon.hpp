#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdg/core/public_state.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/core/types.hpp"

namespace sdg::avalon {

enum class Role { Servant, Minion, Merlin, Assassin };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::Servant: return "Servant";
        case Role::Minion: return "Minion";
        case Role::Merlin: return "Merlin";
        case Role::Assassin: return "Assassin";
    }
    throw Error("unknown role");
}

inline bool is_evil(Role r) { return r == Role::Minion || r == Role::Assassin; }

enum class TeamVoteResult { Approved, Rejected, ForcedApproved };

inline const char* to_string(TeamVoteResult r) {
    switch (r) {
        case TeamVoteResult::Approved: return "approved";
        case TeamVoteResult::Rejected: return "rejected";
        case TeamVoteResult::ForcedApproved: return "forced_approved";
    }
    throw Error("unknown vote result");
}

enum class QuestBallot { Success, Fail };

struct QuestResult {
    int mission = 0;
    int pass_count = 0;
    int fail_count = 0;
    bool success = false;
};

// 5-player Avalon. Quest team sizes 2,3,2,3,3; open team votes with strict
// majority; a fifth consecutive rejection forces the proposal through.
// Nobody is ever eliminated, so every match terminates by construction.
class Game {
public:
    static constexpr int player_count = 5;
    static constexpr std::array<int, 5> team_sizes{2, 3, 2, 3, 3};

    static Game setup(std::uint64_t seed) {
        std::vector<Role> deck{Role::Servant, Role::Servant, Role::Minion, Role::Merlin,
                               Role::Assassin};
        DeterministicRandomStream rng(seed);
        rng.shuffle(deck);
        std::array<Role, player_count> roles{};
        std::copy(deck.begin(), deck.end(), roles.begin());
        return Game(roles, std::move(rng), seed);
    }

    static Game from_roles(const std::array<Role, player_count>& roles, std::uint64_t seed) {
        std::map<Role, int> counts;
        for (Role r : roles) counts[r] += 1;
        if (counts[Role::Servant] != 2 || counts[Role::Minion] != 1 ||
            counts[Role::Merlin] != 1 || counts[Role::Assassin] != 1) {
            throw IllegalProposal("role multiset must be 2 Servants, Minion, Merlin, Assassin");
        }
        return Game(roles, DeterministicRandomStream(seed), seed);
    }

    Role role_of(PlayerId id) const { return roles_.at(seat_index(id)); }
    std::uint64_t seed() const { return seed_; }
    PlayerId current_leader() const { return leader_; }
    int mission() const { return static_cast<int>(resolved_.size()) + 1; }
    int successes() const { return successes_; }
    int failures() const { return failures_; }
    int rejection_count() const { return rejections_; }
    const std::string& phase() const { return phase_; }

    std::vector<PlayerId> living() const {
        std::vector<PlayerId> out;
        for (PlayerId id = 1; id <= player_count; ++id) out.push_back(id);
        return out;
    }

    int team_size_for(int mission_number) const {
        if (mission_number < 1 || mission_number > 5) throw IllegalPhase("mission out of range");
        return team_sizes[static_cast<std::size_t>(mission_number - 1)];
    }

    void propose_team(PlayerId leader, std::vector<PlayerId> members) {
        require_phase("team_selection");
        if (leader != leader_) throw IllegalProposal("only the current leader proposes");
        const int want = team_size_for(mission());
        if (static_cast<int>(members.size()) != want) {
            throw IllegalProposal("team must have exactly " + std::to_string(want) + " members");
        }
        std::set<PlayerId> uniq(members.begin(), members.end());
        if (static_cast<int>(uniq.size()) != want) throw IllegalProposal("team members must be distinct");
        for (PlayerId id : members) seat_index(id);
        std::sort(members.begin(), members.end());
        pending_team_ = members;
        push_event("team_selection", leader, "propose",
                   json{{"mission", mission()}, {"leader", leader}, {"team", members}},
                   Visibility::Public);
        phase_ = "team_voting";
    }

    const std::vector<PlayerId>& pending_team() const { return pending_team_; }

    // Open ballots from all five players. Strict majority approves; the
    // fifth consecutive rejection is converted to a forced approval.
    TeamVoteResult resolve_team_vote(const std::map<PlayerId, bool>& ballots) {
        require_phase("team_voting");
        if (ballots.size() != player_count) throw IllegalBallot("expected one ballot per player");
        int approvals = 0;
        json ballots_j = json::object();
        for (const auto& [voter, approve] : ballots) {
            seat_index(voter);
            approvals += approve ? 1 : 0;
            ballots_j[std::to_string(voter)] = approve ? "approve" : "reject";
        }
        TeamVoteResult result;
        if (approvals * 2 > player_count) {
            result = TeamVoteResult::Approved;
        } else if (rejections_ == 4) {
            result = TeamVoteResult::ForcedApproved;
        } else {
            result = TeamVoteResult::Rejected;
        }
        push_event("team_voting", std::nullopt, "team_vote",
                   json{{"mission", mission()},
                        {"team", pending_team_},
                        {"ballots", ballots_j},
                        {"approvals", approvals},
                        {"result", to_string(result)}},
                   Visibility::Public);
        vote_record_.push_back("Mission " + std::to_string(mission()) + " team [" +
                               id_list(pending_team_) + "]: " + std::to_string(approvals) +
                               " approve, " + std::to_string(player_count - approvals) +
                               " reject - " + to_string(result));

        if (result == TeamVoteResult::Rejected) {
            rejections_ += 1;
            rotate_leader();
            pending_team_.clear();
            phase_ = "team_selection";
        } else {
            rejections_ = 0;
            phase_ = "quest";
        }
        return result;
    }

    // Ballots come from exactly the approved team; good roles can only play
    // Success. Public record carries counts only, never attribution.
    QuestResult resolve_quest(const std::map<PlayerId, QuestBallot>& ballots) {
        require_phase("quest");
        std::set<PlayerId> team(pending_team_.begin(), pending_team_.end());
        if (ballots.size() != team.size()) throw IllegalBallot("expected one ballot per team member");
        QuestResult result;
        result.mission = mission();
        json hidden = json::object();
        for (const auto& [member, ballot] : ballots) {
            if (!team.count(member)) throw IllegalBallot("ballot from a player not on the team");
            if (ballot == QuestBallot::Fail && !is_evil(role_of(member))) {
                throw IllegalBallot("good players cannot play Fail");
            }
            (ballot == QuestBallot::Fail ? result.fail_count : result.pass_count) += 1;
            hidden[std::to_string(member)] = ballot == QuestBallot::Fail ? "fail" : "pass";
        }
        result.success = result.fail_count == 0;

        push_event("quest", std::nullopt, "quest_ballots", json{{"mission", result.mission}, {"ballots", hidden}},
                   Visibility::Hidden);
        push_event("quest", std::nullopt, "quest_vote",
                   json{{"mission", result.mission},
                        {"pass", result.pass_count},
                        {"fail", result.fail_count},
                        {"success", result.success}},
                   Visibility::Public);
        quest_record_.push_back("Mission " + std::to_string(result.mission) + ": " +
                                std::to_string(result.pass_count) + " Pass, " +
                                std::to_string(result.fail_count) + " Fail - " +
                                (result.success ? "Mission succeeds" : "Mission fails"));

        (result.success ? successes_ : failures_) += 1;
        resolved_.push_back(result);
        pending_team_.clear();
        rotate_leader();

        if (failures_ >= 3) {
            declare(GameOutcome{Team::Evil, static_cast<int>(resolved_.size()),
                                OutcomeReason::WinCondition});
        } else if (successes_ >= 3) {
            phase_ = "assassination";
        } else {
            phase_ = "team_selection";
        }
        return result;
    }

    bool assassination_pending() const { return phase_ == "assassination"; }

    PlayerId assassin() const {
        for (PlayerId id = 1; id <= player_count; ++id) {
            if (role_of(id) == Role::Assassin) return id;
        }
        throw Error("no assassin dealt");
    }

    // Terminal: evil wins iff the named player is Merlin.
    GameOutcome resolve_assassination(PlayerId target) {
        require_phase("assassination");
        seat_index(target);
        const bool hit = role_of(target) == Role::Merlin;
        push_event("assassination", assassin(), "assassination",
                   json{{"target", target}, {"merlin", hit}}, Visibility::Public);
        declare(GameOutcome{hit ? Team::Evil : Team::Good, static_cast<int>(resolved_.size()),
                            OutcomeReason::WinCondition});
        return *outcome_;
    }

    // Three failed quests end the game for evil outright; three successes
    // hand the decision to the assassin, so they are not terminal here.
    std::optional<GameOutcome> check_victory() const {
        if (outcome_) return outcome_;
        if (failures_ >= 3) {
            return GameOutcome{Team::Evil, static_cast<int>(resolved_.size()),
                               OutcomeReason::WinCondition};
        }
        return std::nullopt;
    }

    bool finished() const { return outcome_.has_value(); }
    const std::optional<GameOutcome>& outcome() const { return outcome_; }

    // Leader speaks first, then the others in ascending seat order.
    std::vector<PlayerId> discussion_order() const {
        std::vector<PlayerId> out;
        for (int k = 0; k < player_count; ++k) {
            out.push_back(((leader_ - 1 + k) % player_count) + 1);
        }
        return out;
    }

    const Utterance& add_speech(PlayerId speaker, const std::string& text) {
        if (outcome_) throw IllegalPhase("the match is over");
        seat_index(speaker);
        const auto& u = dialogue_.append(speaker, text);
        push_event(phase_, speaker, "speech",
                   json{{"t", u.turn},
                        {"speaker", speaker},
                        {"text", u.text},
                        {"round", mission()},
                        {"state", public_state().to_json()}},
                   Visibility::Public);
        return u;
    }

    PublicState public_state() const {
        PublicState s;
        s.game = GameKind::Avalon;
        s.round = mission();
        s.phase = phase_;
        s.alive = living();
        s.details["leader"] = player_name(leader_);
        s.details["mission_sizes"] = std::vector<int>(team_sizes.begin(), team_sizes.end());
        s.details["successes"] = successes_;
        s.details["failures"] = failures_;
        s.details["consecutive_rejections"] = rejections_;
        if (!pending_team_.empty()) s.details["proposed_team"] = "[" + id_list(pending_team_) + "]";
        if (!vote_record_.empty()) s.details["team_votes"] = vote_record_;
        if (!quest_record_.empty()) s.details["quests"] = quest_record_;
        return s;
    }

    PlayerView view(PlayerId viewer) const {
        PlayerView v;
        v.public_state = public_state();
        v.private_view.viewer = viewer;
        v.private_view.role = to_string(role_of(viewer));
        if (role_of(viewer) == Role::Merlin) {
            for (PlayerId id = 1; id <= player_count; ++id) {
                if (id == viewer) continue;
                v.private_view.known_alignments[id] = is_evil(role_of(id)) ? "evil" : "good";
            }
        } else if (is_evil(role_of(viewer))) {
            for (PlayerId id = 1; id <= player_count; ++id) {
                if (id != viewer && is_evil(role_of(id))) {
                    v.private_view.known_alignments[id] = "evil";
                }
            }
        }
        return v;
    }

    const std::vector<GameEvent>& events() const { return events_; }
    const DialogueHistory& dialogue() const { return dialogue_; }
    DeterministicRandomStream& rng() { return rng_; }

private:
    Game(const std::array<Role, player_count>& roles, DeterministicRandomStream rng,
         std::uint64_t seed)
        : roles_(roles), rng_(std::move(rng)), seed_(seed) {
        json deal = json::object();
        for (PlayerId id = 1; id <= player_count; ++id) {
            deal[std::to_string(id)] = to_string(role_of(id));
        }
        push_event("setup", std::nullopt, "deal", json{{"roles", deal}}, Visibility::Hidden);
        phase_ = "team_selection";
    }

    static std::size_t seat_index(PlayerId id) {
        if (id < 1 || id > player_count) throw IllegalTarget("no such player");
        return static_cast<std::size_t>(id - 1);
    }

    static std::string id_list(const std::vector<PlayerId>& ids) {
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ", ";
            out += player_name(ids[i]);
        }
        return out;
    }

    void require_phase(const std::string& phase) const {
        if (outcome_) throw IllegalPhase("the match is over");
        if (phase_ != phase) throw IllegalPhase("expected phase " + phase + ", in " + phase_);
    }

    void rotate_leader() { leader_ = (leader_ % player_count) + 1; }

    void declare(GameOutcome outcome) {
        outcome_ = outcome;
        phase_ = "terminal";
        push_event("terminal", std::nullopt, "victory",
                   json{{"winner", to_string(outcome.winner)}, {"round", outcome.terminal_round}},
                   Visibility::Public);
    }

    void push_event(std::string phase, std::optional<PlayerId> actor, std::string kind,
                    json payload, Visibility vis) {
        events_.push_back(GameEvent{std::move(phase), actor, std::move(kind), std::move(payload), vis});
    }

    std::array<Role, player_count> roles_{};
    DeterministicRandomStream rng_;
    std::uint64_t seed_ = 0;
    PlayerId leader_ = 1;
    int successes_ = 0;
    int failures_ = 0;
    int rejections_ = 0;
    std::string phase_ = "setup";
    std::vector<PlayerId> pending_team_;
    std::vector<QuestResult> resolved_;
    std::optional<GameOutcome> outcome_;
    std::vector<std::string> vote_record_;
    std::vector<std::string> quest_record_;
    std::vector<GameEvent> events_;
    DialogueHistory dialogue_;
};

}  // namespace sdg::avalon
