#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "sdg/games/onuw.hpp"
#include "support/replays.hpp"

using namespace sdg;
using namespace sdg::onuw;

namespace {

Game fixed_game(Options opts = {}) {
    // 1 Werewolf, 2 Seer, 3 Robber, 4 Troublemaker, 5 Villager; center Villager+Insomniac
    return Game::from_deal({Role::Werewolf, Role::Seer, Role::Robber, Role::Troublemaker,
                            Role::Villager},
                           {Role::Villager, Role::Insomniac}, 31, opts);
}

void run_night_defaults(Game& game) {
    if (game.holder_of(Role::Werewolf)) game.night_werewolf();
    if (game.holder_of(Role::Seer)) game.night_seer(SeerSkip{});
    if (game.holder_of(Role::Robber)) game.night_robber(RobberSkip{});
    if (auto tm = game.holder_of(Role::Troublemaker)) {
        PlayerId a = 0, b = 0;
        for (PlayerId id = 1; id <= 5 && b == 0; ++id) {
            if (id == *tm) continue;
            (a == 0 ? a : b) = id;
        }
        game.night_troublemaker(a, b);
    }
    if (game.holder_of(Role::Insomniac)) game.night_insomniac();
    game.finish_night();
}

}  // namespace

TEST_CASE("the deck is dealt fully and the werewolf always sits with a player") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto game = Game::setup(seed);
        std::map<Role, int> counts;
        for (PlayerId id = 1; id <= 5; ++id) counts[game.initial_role(id)] += 1;
        counts[game.center_card(0)] += 1;
        counts[game.center_card(1)] += 1;
        REQUIRE(counts[Role::Werewolf] == 1);
        REQUIRE(counts[Role::Villager] == 2);
        REQUIRE(counts[Role::Seer] == 1);
        REQUIRE(counts[Role::Robber] == 1);
        REQUIRE(counts[Role::Troublemaker] == 1);
        REQUIRE(counts[Role::Insomniac] == 1);
        REQUIRE(game.holder_of(Role::Werewolf).has_value());
    }
}

TEST_CASE("the werewolf seat is uniform across seeds") {
    const int trials = 10000;
    std::array<int, 5> counts{};
    for (int s = 0; s < trials; ++s) {
        auto game = Game::setup(static_cast<std::uint64_t>(s));
        counts[*game.holder_of(Role::Werewolf) - 1] += 1;
    }
    for (int seat = 0; seat < 5; ++seat) {
        const double freq = static_cast<double>(counts[seat]) / trials;
        REQUIRE(freq == Catch::Approx(0.2).margin(0.02));
    }
}

TEST_CASE("a bad fixture deal is rejected") {
    REQUIRE_THROWS_AS(Game::from_deal({Role::Villager, Role::Seer, Role::Robber,
                                       Role::Troublemaker, Role::Villager},
                                      {Role::Werewolf, Role::Insomniac}, 1),
                      IllegalProposal);
    REQUIRE_THROWS_AS(Game::from_deal({Role::Werewolf, Role::Werewolf, Role::Robber,
                                       Role::Troublemaker, Role::Villager},
                                      {Role::Villager, Role::Insomniac}, 1),
                      IllegalProposal);
}

TEST_CASE("night actions run once each in the fixed role order") {
    auto game = fixed_game();
    REQUIRE_THROWS_AS(game.night_seer(SeerSkip{}), IllegalPhase);  // werewolf first
    game.night_werewolf();
    REQUIRE_THROWS_AS(game.night_werewolf(), IllegalPhase);  // acts once
    REQUIRE_THROWS_AS(game.night_robber(RobberSkip{}), IllegalPhase);  // seer pending
    game.night_seer(SeerPlayer{1});
    game.night_robber(RobberSkip{});
    REQUIRE_THROWS_AS(game.finish_night(), IllegalPhase);  // troublemaker pending
    game.night_troublemaker(1, 2);
    REQUIRE(game.pending_night_roles().empty());  // insomniac sits in the center
    game.finish_night();
    REQUIRE(game.phase() == "discussion");
}

TEST_CASE("the werewolf learns it acts alone and sees no center card") {
    auto game = fixed_game();
    auto fact = game.night_werewolf();
    REQUIRE(fact.at("kind") == "werewolf_alone");
    REQUIRE_FALSE(fact.contains("cards"));
}

TEST_CASE("the seer reads the pre-swap board") {
    auto game = fixed_game();
    game.night_werewolf();
    auto fact = game.night_seer(SeerPlayer{3});
    REQUIRE(fact.at("role") == "Robber");
    REQUIRE_THROWS_AS(game.night_seer(SeerPlayer{3}), IllegalPhase);
}

TEST_CASE("the seer may inspect the center instead") {
    auto game = fixed_game();
    game.night_werewolf();
    auto fact = game.night_seer(SeerCenter{});
    REQUIRE(fact.at("cards") == json({"Villager", "Insomniac"}));
}

TEST_CASE("the robber takes the target card and learns it") {
    auto game = fixed_game();
    game.night_werewolf();
    game.night_seer(SeerSkip{});
    auto fact = game.night_robber(RobberSwap{1});
    REQUIRE(fact.at("new_role") == "Werewolf");
    REQUIRE(game.current_role(3) == Role::Werewolf);
    REQUIRE(game.current_role(1) == Role::Robber);
    REQUIRE(game.initial_role(3) == Role::Robber);
}

TEST_CASE("the troublemaker swaps two other players blind") {
    auto game = fixed_game();
    game.night_werewolf();
    game.night_seer(SeerSkip{});
    game.night_robber(RobberSkip{});
    REQUIRE_THROWS_AS(game.night_troublemaker(4, 1), IllegalTarget);  // includes self
    REQUIRE_THROWS_AS(game.night_troublemaker(2, 2), IllegalTarget);
    game.night_troublemaker(1, 2);
    REQUIRE(game.current_role(1) == Role::Seer);
    REQUIRE(game.current_role(2) == Role::Werewolf);
}

TEST_CASE("self-votes are rejected and every player must vote") {
    auto game = fixed_game();
    run_night_defaults(game);
    REQUIRE_THROWS_AS(game.resolve_vote({{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}}), IllegalBallot);
    REQUIRE_THROWS_AS(game.resolve_vote({{2, 1}, {3, 1}, {4, 1}, {5, 1}}), IllegalBallot);
}

TEST_CASE("village wins exactly when the final werewolf holder is eliminated") {
    SECTION("wolf caught") {
        auto game = fixed_game();
        run_night_defaults(game);  // troublemaker (P4) swaps P1 and P2: wolf moves to P2
        REQUIRE(game.current_role(2) == Role::Werewolf);
        auto out = game.resolve_vote({{1, 2}, {2, 1}, {3, 2}, {4, 2}, {5, 2}});
        REQUIRE(out.eliminated == std::vector<PlayerId>{2});
        REQUIRE(out.reveals.at(2) == Role::Werewolf);
        REQUIRE(out.outcome.winner == Team::Village);
    }
    SECTION("initial holder eliminated after losing the card is not a village win") {
        auto game = fixed_game();
        run_night_defaults(game);
        REQUIRE(game.current_role(1) == Role::Seer);
        auto out = game.resolve_vote({{2, 1}, {1, 2}, {3, 1}, {4, 1}, {5, 1}});
        REQUIRE(out.eliminated == std::vector<PlayerId>{1});
        REQUIRE(out.reveals.at(1) == Role::Seer);
        REQUIRE(out.outcome.winner == Team::Werewolf);
    }
}

TEST_CASE("the literal tie rule eliminates every top-tally player") {
    auto game = fixed_game();
    run_night_defaults(game);
    // 5-cycle: everyone at exactly one vote
    auto out = game.resolve_vote({{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 1}});
    REQUIRE(out.eliminated.size() == 5);
    REQUIRE(out.outcome.winner == Team::Village);  // wolf among the eliminated
}

TEST_CASE("the standard tie variant spares an all-ones board") {
    auto game = fixed_game(Options{true});
    run_night_defaults(game);
    auto out = game.resolve_vote({{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 1}});
    REQUIRE(out.eliminated.empty());
    REQUIRE(out.outcome.winner == Team::Werewolf);

    auto game2 = fixed_game(Options{true});
    run_night_defaults(game2);
    auto out2 = game2.resolve_vote({{1, 2}, {3, 2}, {2, 1}, {4, 5}, {5, 1}});
    REQUIRE(out2.eliminated.size() == 2);  // players 1 and 2 at two votes each
}

TEST_CASE("votes before the discussion phase are rejected") {
    auto game = fixed_game();
    REQUIRE_THROWS_AS(game.resolve_vote({{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 1}}), IllegalPhase);
}

TEST_CASE("private night knowledge stays in the actor's view") {
    auto game = fixed_game();
    game.night_werewolf();
    game.night_seer(SeerPlayer{1});
    game.night_robber(RobberSkip{});
    game.night_troublemaker(1, 2);
    game.finish_night();

    const auto seer_view = game.view(2);
    REQUIRE(seer_view.private_view.facts.size() == 1);
    REQUIRE(seer_view.private_view.facts[0].at("kind") == "seer_peek");
    const auto villager_view = game.view(5);
    REQUIRE(villager_view.private_view.facts.empty());
    for (const auto& e : game.events()) {
        if (e.kind == "night_action") REQUIRE(e.visibility == Visibility::Private);
        if (e.kind == "deal" || e.kind == "final_roles") REQUIRE(e.visibility == Visibility::Hidden);
    }
}

TEST_CASE("transcript replay lands the recorded final board") {
    auto game = fixtures::onuw_transcript();

    REQUIRE(game.current_role(1) == Role::Villager);
    REQUIRE(game.current_role(2) == Role::Troublemaker);
    REQUIRE(game.current_role(3) == Role::Robber);
    REQUIRE(game.current_role(4) == Role::Werewolf);
    REQUIRE(game.current_role(5) == Role::Seer);

    const auto seer = game.view(3);
    REQUIRE(seer.private_view.facts.size() == 1);
    REQUIRE(seer.private_view.facts[0].at("target") == 1);
    REQUIRE(seer.private_view.facts[0].at("role") == "Villager");

    const auto robber = game.view(4);
    REQUIRE(robber.private_view.facts.size() == 1);
    REQUIRE(robber.private_view.facts[0].at("new_role") == "Werewolf");

    REQUIRE(game.phase() == "discussion");

    // Finish the match: the table catches the card thief.
    game.add_speech(1, "I was checked early and I am clean. Who moved cards?");
    game.add_speech(2, "Someone's story will not add up. Listen closely.");
    game.add_speech(3, "I started as Seer and saw Player 1 as a Villager.");
    game.add_speech(4, "I am just a Villager. Player 3's claim sounds rehearsed.");
    game.add_speech(5, "If cards moved, the original owners are no longer what they claim.");
    auto out = game.resolve_vote({{1, 4}, {2, 4}, {3, 4}, {4, 3}, {5, 4}});
    REQUIRE(out.eliminated == std::vector<PlayerId>{4});
    REQUIRE(out.outcome.winner == Team::Village);
}
