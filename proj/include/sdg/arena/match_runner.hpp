#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sdg/arena/agents.hpp"
#include "sdg/core/match_log.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/core/types.hpp"
#include "sdg/games/avalon.hpp"
#include "sdg/games/onuw.hpp"
#include "sdg/games/rules.hpp"
#include "sdg/games/werewolf.hpp"
#include "sdg/persuasion/pipeline.hpp"

namespace sdg::arena {

inline int seats_for(GameKind game) {
    switch (game) {
        case GameKind::Werewolf: return werewolf::Game::player_count;
        case GameKind::Avalon: return avalon::Game::player_count;
        case GameKind::Onuw: return onuw::Game::player_count;
    }
    throw Error("unknown game kind");
}

// One match to run: the engine seed deals roles first, then seats are bound
// to agents independently of the deal.
struct MatchPlan {
    GameKind game = GameKind::Werewolf;
    std::uint64_t seed = 0;
    std::vector<AgentSpec> seats;  // seat k is seats[k-1]
    std::string match_id;
    int round_cap = 20;
    bool record_intents = false;
    werewolf::TieRule tie_rule = werewolf::TieRule::RandomElimination;
    json config_echo = json::object();

    void validate() const {
        if (static_cast<int>(seats.size()) != seats_for(game))
            throw ConfigError("plan needs one agent per seat: " + std::to_string(seats_for(game)));
        if (round_cap < 1) throw ConfigError("round cap must be >= 1");
        for (const auto& spec : seats) spec.validate();
    }
};

namespace detail {

// Internal control flow for the safety cap; not an agent or engine error.
struct RoundCapReached {
    int round = 0;
};

struct MatchState {
    const MatchPlan& plan;
    const AgentFactory& factory;
    MatchRecord& record;
    std::vector<std::unique_ptr<Agent>> agents;
    DeterministicRandomStream rng;

    MatchState(const MatchPlan& p, const AgentFactory& f, MatchRecord& r)
        : plan(p), factory(f), record(r), rng(DeterministicRandomStream::mix(p.seed, 0xA6E17ull)) {
        for (const auto& spec : plan.seats) agents.push_back(factory.make(spec));
    }

    Agent& agent(PlayerId seat) { return *agents.at(static_cast<std::size_t>(seat - 1)); }

    template <typename Game>
    json act(Game& game, PlayerId seat, const std::string& kind, json args = json::object()) {
        ActionRequest req;
        req.game = plan.game;
        req.kind = kind;
        req.actor = seat;
        req.view = game.view(seat);
        req.args = std::move(args);
        return agent(seat).act(req, rng);
    }

    // Runs one discussion stretch: each seat in order speaks once, knowing
    // who answers next within the stretch.
    template <typename Game>
    void discussion(Game& game, const std::vector<PlayerId>& order) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            const PlayerId speaker = order[i];
            const PlayerId next = i + 1 < order.size() ? order[i + 1] : 0;
            SpeakingContext ctx;
            ctx.rules = rules_text(plan.game);
            ctx.public_state = game.public_state();
            ctx.dialogue = game.dialogue();
            ctx.speaker = speaker;
            ctx.speaker_role = record.role_of(speaker);
            ctx.next_speaker = next;
            SpeechTurn turn = agent(speaker).speak(ctx, plan.record_intents && next > 0, rng);
            const Utterance& u = game.add_speech(speaker, turn.final_text);
            TurnEntry entry;
            entry.t = u.turn;
            entry.speaker = speaker;
            entry.base = std::move(turn.base);
            entry.final_text = u.text;
            if (turn.intent) {
                entry.desired = turn.intent->desired;
                entry.undesired = turn.intent->undesired;
            }
            record.turns.push_back(std::move(entry));
        }
    }
};

inline void run_werewolf(MatchState& st) {
    auto game = werewolf::Game::setup(st.plan.seed, werewolf::Options{st.plan.tie_rule});
    for (PlayerId id = 1; id <= werewolf::Game::player_count; ++id) {
        st.record.players.push_back(PlayerEntry{id, to_string(game.role_of(id)), st.agent(id).id()});
    }
    auto find_living = [&](werewolf::Role role) -> PlayerId {
        for (PlayerId id : game.living()) {
            if (game.role_of(id) == role) return id;
        }
        return 0;
    };
    try {
        while (!game.finished()) {
            if (game.round() >= st.plan.round_cap) throw RoundCapReached{game.round()};
            std::vector<werewolf::WolfProposal> proposals;
            for (PlayerId wolf : game.living_werewolves()) {
                proposals.push_back(
                    werewolf::WolfProposal{wolf, st.act(game, wolf, "wolf_target").get<PlayerId>()});
            }
            const PlayerId target = game.resolve_werewolf_target(proposals);
            std::optional<PlayerId> protection;
            if (const PlayerId guardian = find_living(werewolf::Role::Guardian)) {
                protection = st.act(game, guardian, "protect").get<PlayerId>();
            }
            std::optional<PlayerId> probe;
            if (const PlayerId seer = find_living(werewolf::Role::Seer)) {
                probe = st.act(game, seer, "probe").get<PlayerId>();
            }
            game.resolve_night(target, protection, probe);
            if (game.finished()) break;

            st.discussion(game, game.discussion_order());

            std::map<PlayerId, std::optional<PlayerId>> ballots;
            for (PlayerId voter : game.living()) {
                const json choice = st.act(game, voter, "day_vote");
                ballots[voter] = choice.is_null() ? std::optional<PlayerId>() : choice.get<PlayerId>();
            }
            game.resolve_day_vote(ballots);
        }
        st.record.events = game.events();
        if (game.finished()) {
            st.record.winner = game.outcome()->winner;
            st.record.terminal_round = game.outcome()->terminal_round;
            st.record.reason = game.outcome()->reason;
        }
    } catch (const RoundCapReached& cap) {
        st.record.events = game.events();
        st.record.events.push_back(GameEvent{"abort", std::nullopt, "round_cap",
                                             json{{"round", cap.round}}, Visibility::Public});
        st.record.terminal_round = cap.round;
        st.record.reason = OutcomeReason::RoundCapAbort;
    } catch (const Error& e) {
        st.record.events = game.events();
        st.record.events.push_back(GameEvent{"abort", std::nullopt, "agent_failure",
                                             json{{"error", e.what()}}, Visibility::Public});
        st.record.terminal_round = game.round();
        st.record.reason = OutcomeReason::RoundCapAbort;
    }
}

inline void run_avalon(MatchState& st) {
    auto game = avalon::Game::setup(st.plan.seed);
    for (PlayerId id = 1; id <= avalon::Game::player_count; ++id) {
        st.record.players.push_back(PlayerEntry{id, to_string(game.role_of(id)), st.agent(id).id()});
    }
    try {
        while (!game.finished()) {
            if (game.mission() > st.plan.round_cap) throw RoundCapReached{game.mission()};
            const std::string phase = game.phase();
            if (phase == "team_selection") {
                st.discussion(game, game.discussion_order());
                const PlayerId leader = game.current_leader();
                const json team = st.act(game, leader, "propose_team",
                                         json{{"mission", game.mission()},
                                              {"size", game.team_size_for(game.mission())}});
                game.propose_team(leader, team.get<std::vector<PlayerId>>());
            } else if (phase == "team_voting") {
                std::map<PlayerId, bool> ballots;
                for (PlayerId voter : game.living()) {
                    ballots[voter] = st.act(game, voter, "team_vote",
                                            json{{"team", game.pending_team()}})
                                         .get<bool>();
                }
                game.resolve_team_vote(ballots);
            } else if (phase == "quest") {
                std::map<PlayerId, avalon::QuestBallot> ballots;
                for (PlayerId member : game.pending_team()) {
                    const auto ballot = st.act(game, member, "quest_ballot",
                                               json{{"mission", game.mission()}})
                                            .get<std::string>();
                    ballots[member] = ballot == "fail" ? avalon::QuestBallot::Fail
                                                       : avalon::QuestBallot::Success;
                }
                game.resolve_quest(ballots);
            } else if (phase == "assassination") {
                const PlayerId assassin = game.assassin();
                game.resolve_assassination(st.act(game, assassin, "assassinate").get<PlayerId>());
            } else {
                throw Error("unexpected avalon phase: " + phase);
            }
        }
        st.record.events = game.events();
        st.record.winner = game.outcome()->winner;
        st.record.terminal_round = game.outcome()->terminal_round;
        st.record.reason = game.outcome()->reason;
    } catch (const RoundCapReached& cap) {
        st.record.events = game.events();
        st.record.events.push_back(GameEvent{"abort", std::nullopt, "round_cap",
                                             json{{"round", cap.round}}, Visibility::Public});
        st.record.terminal_round = cap.round;
        st.record.reason = OutcomeReason::RoundCapAbort;
    } catch (const Error& e) {
        st.record.events = game.events();
        st.record.events.push_back(GameEvent{"abort", std::nullopt, "agent_failure",
                                             json{{"error", e.what()}}, Visibility::Public});
        st.record.terminal_round = game.mission();
        st.record.reason = OutcomeReason::RoundCapAbort;
    }
}

inline void run_onuw(MatchState& st) {
    auto game = onuw::Game::setup(st.plan.seed);
    for (PlayerId id = 1; id <= onuw::Game::player_count; ++id) {
        st.record.players.push_back(
            PlayerEntry{id, to_string(game.initial_role(id)), st.agent(id).id()});
    }
    try {
        for (onuw::Role role : game.pending_night_roles()) {
            const PlayerId holder = *game.holder_of(role);
            switch (role) {
                case onuw::Role::Werewolf: game.night_werewolf(); break;
                case onuw::Role::Seer: {
                    const json choice = st.act(game, holder, "seer_choice");
                    const std::string kind = choice.at("kind").get<std::string>();
                    if (kind == "player") {
                        game.night_seer(onuw::SeerPlayer{choice.at("target").get<PlayerId>()});
                    } else if (kind == "center") {
                        game.night_seer(onuw::SeerCenter{});
                    } else {
                        game.night_seer(onuw::SeerSkip{});
                    }
                    break;
                }
                case onuw::Role::Robber: {
                    const json choice = st.act(game, holder, "robber_choice");
                    if (choice.at("kind").get<std::string>() == "swap") {
                        game.night_robber(onuw::RobberSwap{choice.at("target").get<PlayerId>()});
                    } else {
                        game.night_robber(onuw::RobberSkip{});
                    }
                    break;
                }
                case onuw::Role::Troublemaker: {
                    const json swap = st.act(game, holder, "troublemaker_swap");
                    game.night_troublemaker(swap.at("a").get<PlayerId>(), swap.at("b").get<PlayerId>());
                    break;
                }
                case onuw::Role::Insomniac: game.night_insomniac(); break;
                case onuw::Role::Villager: break;
            }
        }
        game.finish_night();

        st.discussion(game, game.discussion_order());

        std::map<PlayerId, PlayerId> ballots;
        for (PlayerId voter : game.living()) {
            ballots[voter] = st.act(game, voter, "vote").get<PlayerId>();
        }
        game.resolve_vote(ballots);

        st.record.events = game.events();
        st.record.winner = game.outcome()->winner;
        st.record.terminal_round = game.outcome()->terminal_round;
        st.record.reason = game.outcome()->reason;
    } catch (const Error& e) {
        st.record.events = game.events();
        st.record.events.push_back(GameEvent{"abort", std::nullopt, "agent_failure",
                                             json{{"error", e.what()}}, Visibility::Public});
        st.record.terminal_round = 1;
        st.record.reason = OutcomeReason::RoundCapAbort;
    }
}

}  // namespace detail

// Drives one full match. Agent and rule violations abort the match rather
// than propagate: the record is flagged, keeps everything up to the
// failure, and carries no winner. Only unresolvable plans (bad specs,
// missing checkpoints) throw.
inline MatchRecord run_match(const MatchPlan& plan, const AgentFactory& factory) {
    plan.validate();
    MatchRecord record;
    record.game = plan.game;
    record.seed = plan.seed;
    record.match_id = plan.match_id.empty()
                          ? std::string(to_string(plan.game)) + "-" + std::to_string(plan.seed) + "-0"
                          : plan.match_id;
    record.config_echo = plan.config_echo;
    json seat_ids = json::array();
    for (const auto& spec : plan.seats) seat_ids.push_back(spec.id);
    record.config_echo["match"] = json{{"game", to_string(plan.game)},
                                       {"seed", plan.seed},
                                       {"round_cap", plan.round_cap},
                                       {"record_intents", plan.record_intents},
                                       {"seats", seat_ids}};

    detail::MatchState state(plan, factory, record);
    switch (plan.game) {
        case GameKind::Werewolf: detail::run_werewolf(state); break;
        case GameKind::Avalon: detail::run_avalon(state); break;
        case GameKind::Onuw: detail::run_onuw(state); break;
    }
    return record;
}

inline MatchRecord run_match(const MatchPlan& plan) {
    return run_match(plan, AgentFactory(plan.seats));
}

}  // namespace sdg::arena
