#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "sdg/games/avalon.hpp"
#include "support/replays.hpp"

using namespace sdg;
using namespace sdg::avalon;

namespace {

Game fixed_game() {
    // 1 Merlin, 2 Servant, 3 Minion, 4 Assassin, 5 Servant
    return Game::from_roles({Role::Merlin, Role::Servant, Role::Minion, Role::Assassin,
                             Role::Servant},
                            21);
}

std::map<PlayerId, bool> unanimous(bool approve) {
    std::map<PlayerId, bool> b;
    for (PlayerId id = 1; id <= 5; ++id) b[id] = approve;
    return b;
}

void run_successful_quest(Game& game, std::vector<PlayerId> team) {
    game.propose_team(game.current_leader(), team);
    game.resolve_team_vote(unanimous(true));
    std::map<PlayerId, QuestBallot> ballots;
    for (PlayerId id : team) ballots[id] = QuestBallot::Success;
    game.resolve_quest(ballots);
}

}  // namespace

TEST_CASE("setup deals two servants, merlin, minion, assassin") {
    auto game = Game::setup(9);
    std::map<Role, int> counts;
    for (PlayerId id = 1; id <= 5; ++id) counts[game.role_of(id)] += 1;
    REQUIRE(counts[Role::Servant] == 2);
    REQUIRE(counts[Role::Merlin] == 1);
    REQUIRE(counts[Role::Minion] == 1);
    REQUIRE(counts[Role::Assassin] == 1);
    REQUIRE(game.current_leader() == 1);
    REQUIRE(game.mission() == 1);
}

TEST_CASE("merlin sees alignments, evil see each other, servants see nothing") {
    auto game = fixed_game();
    const auto merlin = game.view(1);
    REQUIRE(merlin.private_view.known_alignments.at(3) == "evil");
    REQUIRE(merlin.private_view.known_alignments.at(4) == "evil");
    REQUIRE(merlin.private_view.known_alignments.at(2) == "good");
    REQUIRE(merlin.private_view.known_alignments.at(5) == "good");

    const auto minion = game.view(3);
    REQUIRE(minion.private_view.known_alignments.size() == 1);
    REQUIRE(minion.private_view.known_alignments.at(4) == "evil");

    const auto servant = game.view(2);
    REQUIRE(servant.private_view.known_alignments.empty());
    REQUIRE(servant.private_view.known_roles.empty());
}

TEST_CASE("team sizes follow the 2-3-2-3-3 schedule") {
    auto game = fixed_game();
    REQUIRE(game.team_size_for(1) == 2);
    REQUIRE(game.team_size_for(2) == 3);
    REQUIRE(game.team_size_for(3) == 2);
    REQUIRE(game.team_size_for(4) == 3);
    REQUIRE(game.team_size_for(5) == 3);
    REQUIRE_THROWS_AS(game.propose_team(1, {1, 2, 3}), IllegalProposal);
    REQUIRE_THROWS_AS(game.propose_team(1, {1, 1}), IllegalProposal);
    REQUIRE_THROWS_AS(game.propose_team(2, {1, 2}), IllegalProposal);
}

TEST_CASE("a strict majority approves a team") {
    auto game = fixed_game();
    game.propose_team(1, {1, 2});
    auto result = game.resolve_team_vote({{1, true}, {2, true}, {3, true}, {4, false}, {5, false}});
    REQUIRE(result == TeamVoteResult::Approved);
    REQUIRE(game.phase() == "quest");
}

TEST_CASE("a 2-3 split rejects and rotates leadership") {
    auto game = fixed_game();
    game.propose_team(1, {1, 2});
    auto result = game.resolve_team_vote({{1, true}, {2, true}, {3, false}, {4, false}, {5, false}});
    REQUIRE(result == TeamVoteResult::Rejected);
    REQUIRE(game.current_leader() == 2);
    REQUIRE(game.rejection_count() == 1);
    REQUIRE(game.mission() == 1);
}

TEST_CASE("the fifth consecutive rejection forces the proposal through") {
    auto game = fixed_game();
    for (int i = 0; i < 4; ++i) {
        game.propose_team(game.current_leader(), {1, 2});
        REQUIRE(game.resolve_team_vote(unanimous(false)) == TeamVoteResult::Rejected);
    }
    REQUIRE(game.rejection_count() == 4);
    game.propose_team(game.current_leader(), {1, 2});
    REQUIRE(game.resolve_team_vote(unanimous(false)) == TeamVoteResult::ForcedApproved);
    REQUIRE(game.rejection_count() == 0);
    REQUIRE(game.phase() == "quest");
}

TEST_CASE("good players cannot play fail and outsiders cannot ballot") {
    auto game = fixed_game();
    game.propose_team(1, {1, 2});
    game.resolve_team_vote(unanimous(true));
    REQUIRE_THROWS_AS(game.resolve_quest({{1, QuestBallot::Success}, {2, QuestBallot::Fail}}),
                      IllegalBallot);
    REQUIRE_THROWS_AS(game.resolve_quest({{1, QuestBallot::Success}, {3, QuestBallot::Fail}}),
                      IllegalBallot);
    REQUIRE_THROWS_AS(game.resolve_quest({{1, QuestBallot::Success}}), IllegalBallot);
}

TEST_CASE("any single fail card fails the quest") {
    auto game = fixed_game();
    game.propose_team(1, {1, 3});
    game.resolve_team_vote(unanimous(true));
    auto result = game.resolve_quest({{1, QuestBallot::Success}, {3, QuestBallot::Fail}});
    REQUIRE_FALSE(result.success);
    REQUIRE(result.pass_count == 1);
    REQUIRE(result.fail_count == 1);
    REQUIRE(game.failures() == 1);
    REQUIRE(game.current_leader() == 2);
    REQUIRE(game.mission() == 2);
}

TEST_CASE("quest attribution stays hidden while counts go public") {
    auto game = fixed_game();
    game.propose_team(1, {1, 3});
    game.resolve_team_vote(unanimous(true));
    game.resolve_quest({{1, QuestBallot::Success}, {3, QuestBallot::Fail}});
    bool saw_public_counts = false;
    for (const auto& e : game.events()) {
        if (e.kind == "quest_vote") {
            REQUIRE(e.visibility == Visibility::Public);
            REQUIRE(e.payload.at("pass") == 1);
            REQUIRE(e.payload.at("fail") == 1);
            REQUIRE_FALSE(e.payload.contains("ballots"));
            saw_public_counts = true;
        }
        if (e.kind == "quest_ballots") REQUIRE(e.visibility == Visibility::Hidden);
    }
    REQUIRE(saw_public_counts);
}

TEST_CASE("three failed quests end the game for evil") {
    auto game = fixed_game();
    for (int i = 0; i < 3; ++i) {
        const auto size = game.team_size_for(game.mission());
        std::vector<PlayerId> team{3, 4};
        if (size == 3) team.push_back(1);
        game.propose_team(game.current_leader(), team);
        game.resolve_team_vote(unanimous(true));
        std::map<PlayerId, QuestBallot> ballots;
        for (PlayerId id : team) ballots[id] = QuestBallot::Success;
        ballots[3] = QuestBallot::Fail;
        game.resolve_quest(ballots);
    }
    REQUIRE(game.finished());
    REQUIRE(game.outcome()->winner == Team::Evil);
    REQUIRE(game.outcome()->terminal_round == 3);
}

TEST_CASE("three successes open the assassination window") {
    auto game = fixed_game();
    run_successful_quest(game, {1, 2});
    run_successful_quest(game, {1, 2, 5});
    run_successful_quest(game, {2, 5});
    REQUIRE_FALSE(game.finished());
    REQUIRE(game.assassination_pending());
    REQUIRE_FALSE(game.check_victory().has_value());

    SECTION("hitting merlin wins for evil") {
        auto outcome = game.resolve_assassination(1);
        REQUIRE(outcome.winner == Team::Evil);
    }
    SECTION("missing merlin preserves the good win") {
        auto outcome = game.resolve_assassination(5);
        REQUIRE(outcome.winner == Team::Good);
    }
    SECTION("a self-target is a legal miss") {
        auto outcome = game.resolve_assassination(4);
        REQUIRE(outcome.winner == Team::Good);
    }
}

TEST_CASE("assassination outside its window is illegal") {
    auto game = fixed_game();
    REQUIRE_THROWS_AS(game.resolve_assassination(1), IllegalPhase);
}

TEST_CASE("quests cannot resolve without an approved team") {
    auto game = fixed_game();
    game.propose_team(1, {1, 2});
    game.resolve_team_vote({{1, true}, {2, true}, {3, false}, {4, false}, {5, false}});
    REQUIRE_THROWS_AS(game.resolve_quest({{1, QuestBallot::Success}, {2, QuestBallot::Success}}),
                      IllegalPhase);
}

TEST_CASE("discussion order starts at the leader and wraps ascending") {
    auto game = fixed_game();
    game.propose_team(1, {1, 2});
    game.resolve_team_vote(unanimous(false));
    game.propose_team(2, {1, 2});
    game.resolve_team_vote(unanimous(false));
    REQUIRE(game.current_leader() == 3);
    REQUIRE(game.discussion_order() == std::vector<PlayerId>{3, 4, 5, 1, 2});
}

TEST_CASE("every avalon match terminates by construction") {
    // Even a pathological all-reject table ends within five missions.
    auto game = fixed_game();
    int guard = 0;
    while (!game.finished() && !game.assassination_pending()) {
        REQUIRE(++guard < 200);
        const auto size = game.team_size_for(game.mission());
        std::vector<PlayerId> team;
        for (PlayerId id = 1; id <= size; ++id) team.push_back(id);
        game.propose_team(game.current_leader(), team);
        if (game.resolve_team_vote(unanimous(false)) == TeamVoteResult::Rejected) continue;
        std::map<PlayerId, QuestBallot> ballots;
        for (PlayerId id : team) {
            ballots[id] = is_evil(game.role_of(id)) ? QuestBallot::Fail : QuestBallot::Success;
        }
        game.resolve_quest(ballots);
    }
    REQUIRE((game.finished() || game.assassination_pending()));
}

TEST_CASE("transcript replay reproduces both mission records") {
    auto game = fixtures::avalon_transcript();

    REQUIRE(game.successes() == 1);
    REQUIRE(game.failures() == 1);
    REQUIRE(game.mission() == 3);

    int team_votes = 0;
    int quests = 0;
    for (const auto& e : game.events()) {
        if (e.kind == "team_vote") {
            team_votes += 1;
            if (e.payload.at("mission") == 1) {
                REQUIRE(e.payload.at("approvals") == 4);
                REQUIRE(e.payload.at("result") == "approved");
                REQUIRE(e.payload.at("ballots").at("4") == "reject");
            } else {
                REQUIRE(e.payload.at("approvals") == 5);
            }
        }
        if (e.kind == "quest_vote") {
            quests += 1;
            if (e.payload.at("mission") == 1) {
                REQUIRE(e.payload.at("pass") == 2);
                REQUIRE(e.payload.at("fail") == 0);
                REQUIRE(e.payload.at("success") == true);
            } else {
                REQUIRE(e.payload.at("mission") == 2);
                REQUIRE(e.payload.at("pass") == 2);
                REQUIRE(e.payload.at("fail") == 1);
                REQUIRE(e.payload.at("success") == false);
            }
        }
    }
    REQUIRE(team_votes == 2);
    REQUIRE(quests == 2);

    const auto state = game.public_state();
    const auto rendered = state.render();
    REQUIRE(rendered.find("2 Pass, 1 Fail - Mission fails") != std::string::npos);
    REQUIRE(rendered.find("2 Pass, 0 Fail - Mission succeeds") != std::string::npos);
}
