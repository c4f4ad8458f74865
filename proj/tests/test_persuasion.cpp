#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sdg/games/rules.hpp"
#include "sdg/games/werewolf.hpp"
#include "sdg/persuasion/instances.hpp"
#include "sdg/persuasion/parsing.hpp"
#include "sdg/persuasion/pipeline.hpp"
#include "sdg/persuasion/templates.hpp"
#include "sdg/policy/stub_policy.hpp"
#include "sdg/policy/toy_policy.hpp"

using namespace sdg;

namespace {

std::map<std::string, std::string> full_bindings() {
    return {{"game_rules", "rules text"},
            {"player_name", "Player 3"},
            {"player_role", "Seer"},
            {"game_state", "state text"},
            {"dialog_history", "Player 1: hello"},
            {"next_player_name", "Player 4"},
            {"base_utterance", "base text"},
            {"target_response", "target text"}};
}

SpeakingContext sample_context() {
    SpeakingContext ctx;
    ctx.rules = rules_text(GameKind::Werewolf);
    ctx.public_state.game = GameKind::Werewolf;
    ctx.public_state.round = 1;
    ctx.public_state.phase = "day";
    ctx.public_state.alive = {1, 2, 3, 4, 5, 6, 7};
    ctx.dialogue.append(1, "I have nothing to report.");
    ctx.dialogue.append(2, "Someone is lying already.");
    ctx.speaker = 3;
    ctx.speaker_role = "Seer";
    ctx.next_speaker = 4;
    ctx.next_role = "Villager";
    return ctx;
}

Vocabulary measurer_vocab() {
    return Vocabulary({"vote", "trust", "player", "yes", "no", "wolf", "seer", "for", "i", "will"});
}

ToyPolicy random_measurer(std::uint64_t seed, double scale = 0.6) {
    ToyPolicyParams params = ToyPolicyParams::zeros(measurer_vocab());
    auto rng = new_rng(seed);
    for (double& w : params.weights.a) w = scale * (2.0 * rng.uniform_real() - 1.0);
    return ToyPolicy("measurer", std::move(params));
}

// Measurer whose desired-response first-token logit rises by 2.0 per keyword
// occurrence in the feature window; all other weights zero.
ToyPolicy keyword_measurer() {
    ToyPolicyParams params = ToyPolicyParams::zeros(measurer_vocab());
    int keyword_row = *params.vocab.id_of("vote");
    int desired_col = *params.vocab.id_of("yes");
    params.weights.at(keyword_row, desired_col) = 2.0;
    return ToyPolicy("keyword-measurer", std::move(params));
}

PersuasionConfig compact_config() {
    PersuasionConfig config;
    config.templates = TemplateSet::compact();
    return config;
}

GenerationSettings no_stream() { return {}; }

// A finished-enough Werewolf record: two day-discussion stretches with
// synthetic intents recorded on every turn.
MatchRecord two_day_record() {
    using namespace werewolf;
    std::array<Role, 7> roles{Role::Villager, Role::Seer, Role::Villager, Role::Werewolf,
                              Role::Werewolf, Role::Guardian, Role::Villager};
    Game game = Game::from_roles(roles, 901);

    game.resolve_werewolf_target({{4, 1}, {5, 1}});
    game.resolve_night(1, 1, 3);  // protected: everyone reaches day one alive
    for (PlayerId p : game.discussion_order()) game.add_speech(p, "Round one words from " + player_name(p) + ".");
    std::map<PlayerId, std::optional<PlayerId>> abstain;
    for (PlayerId p : game.living()) abstain[p] = std::nullopt;
    game.resolve_day_vote(abstain);

    game.resolve_werewolf_target({{4, 2}, {5, 2}});
    game.resolve_night(2, 2, 5);
    for (PlayerId p : game.discussion_order()) game.add_speech(p, "Round two words from " + player_name(p) + ".");

    MatchRecord record;
    record.match_id = "werewolf-901-0";
    record.game = GameKind::Werewolf;
    record.seed = 901;
    for (PlayerId p = 1; p <= 7; ++p) record.players.push_back({p, to_string(game.role_of(p)), "scripted"});
    record.events = game.events();
    for (const auto& u : game.dialogue().entries()) {
        TurnEntry t;
        t.t = u.turn;
        t.speaker = u.speaker;
        t.final_text = u.text;
        t.base = u.text;
        t.desired = "I will vote for Player 5.";
        t.undesired = "I trust Player 5.";
        record.turns.push_back(t);
    }
    record.winner = std::nullopt;
    record.terminal_round = game.round();
    record.reason = OutcomeReason::RoundCapAbort;
    return record;
}

}  // namespace

TEST_CASE("paper templates render every placeholder") {
    TemplateSet set = TemplateSet::paper();
    auto bindings = full_bindings();
    for (const PromptTemplate* t : {&set.intent, &set.base, &set.refine, &set.measure}) {
        ChatPrompt prompt = t->render(bindings);
        REQUIRE(prompt.messages.size() >= 2);
        for (const auto& message : prompt.messages) {
            for (const auto& [name, value] : bindings) {
                REQUIRE(message.text.find("{" + name + "}") == std::string::npos);
            }
        }
    }
    std::string system = set.intent.render(bindings).messages[0].text;
    REQUIRE(system.find("rules text") != std::string::npos);
    REQUIRE(system.find("Player 3") != std::string::npos);
}

TEST_CASE("missing bindings fail the render") {
    TemplateSet set = TemplateSet::paper();
    auto bindings = full_bindings();
    bindings.erase("game_state");
    REQUIRE_THROWS_AS(set.intent.render(bindings), TemplateRenderError);
}

TEST_CASE("bound values are never re-expanded") {
    PromptTemplate t{"t", {{MessageSource::User, "before {game_state} after"}}, {}};
    std::map<std::string, std::string> bindings{{"game_state", "injected {game_rules} stays literal"}};
    std::string out = t.render(bindings).messages[0].text;
    REQUIRE(out == "before injected {game_rules} stays literal after");
}

TEST_CASE("template asset files match the embedded registry byte for byte") {
    TemplateSet set = TemplateSet::paper();
    auto check = [](const PromptTemplate& t, const std::string& file) {
        std::ifstream in(std::string(SDG_ASSET_DIR) + "/templates/" + file);
        REQUIRE(in.good());
        std::ostringstream buf;
        buf << in.rdbuf();
        REQUIRE(buf.str() == t.asset_text());
    };
    check(set.intent, "intent.txt");
    check(set.base, "base_utterance.txt");
    check(set.refine, "refine.txt");
    check(set.measure, "measure.txt");
}

TEST_CASE("template sets load back from asset directories") {
    TemplateSet loaded = TemplateSet::from_directory(std::string(SDG_ASSET_DIR) + "/templates");
    TemplateSet embedded = TemplateSet::paper();
    auto same = [](const PromptTemplate& a, const PromptTemplate& b) {
        REQUIRE(a.sections.size() == b.sections.size());
        for (std::size_t i = 0; i < a.sections.size(); ++i) {
            REQUIRE(a.sections[i].source == b.sections[i].source);
            REQUIRE(a.sections[i].body == b.sections[i].body);
        }
    };
    same(loaded.intent, embedded.intent);
    same(loaded.base, embedded.base);
    same(loaded.refine, embedded.refine);
    same(loaded.measure, embedded.measure);
}

TEST_CASE("registry carries the canonical prompt framing") {
    TemplateSet set = TemplateSet::paper();
    const std::string& intent_user = set.intent.sections[1].body;
    REQUIRE(intent_user.find("Most Desired Response: [The specific response you want from the next player]") !=
            std::string::npos);
    REQUIRE(intent_user.find("Most Undesired Response: [The specific response you want to avoid from the next "
                             "player]") != std::string::npos);
    // The shared system block keeps its original wording, typo included.
    for (const PromptTemplate* t : {&set.intent, &set.base, &set.refine, &set.measure})
        REQUIRE(t->sections[0].body.find("Your are {player_name} and your role is {player_role}.") !=
                std::string::npos);
    REQUIRE(set.measure.sections[2].body.find("Response: {target_response}") != std::string::npos);
    REQUIRE(set.refine.sections[1].body.find("Base utterance:\n\n{base_utterance}") != std::string::npos);
}

TEST_CASE("labeled field parser handles fences brackets and multiline values") {
    std::string raw =
        "```\nStrategic Analysis: [Player 2 wavered\nand contradicted herself]\n\n"
        "Most Desired Response: [I will vote for Player 2.]\n"
        "Most Undesired Response: I trust Player 2\n```";
    auto fields = parse_labeled_fields(raw, TemplateSet::intent_labels());
    REQUIRE(fields.at("Strategic Analysis") == "Player 2 wavered\nand contradicted herself");
    REQUIRE(fields.at("Most Desired Response") == "I will vote for Player 2.");
    REQUIRE(fields.at("Most Undesired Response") == "I trust Player 2");
}

TEST_CASE("labels only open blocks at line starts") {
    std::string raw =
        "Strategic Analysis: [mentions Most Desired Response: inline]\n"
        "Most Desired Response: [a]\nMost Undesired Response: [b]";
    auto fields = parse_labeled_fields(raw, TemplateSet::intent_labels());
    REQUIRE(fields.at("Strategic Analysis") == "mentions Most Desired Response: inline");
}

TEST_CASE("parser reports the first missing label") {
    std::string raw = "Strategic Analysis: [x]\nMost Desired Response: [y]";
    try {
        parse_labeled_fields(raw, TemplateSet::intent_labels());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(std::string(e.what()).find("Most Undesired Response") != std::string::npos);
        REQUIRE(e.raw_text == raw);
    }
}

TEST_CASE("intent identification parses and validates the block") {
    SpeakingContext ctx = sample_context();
    PersuasionConfig config;

    SECTION("well formed block round trips") {
        ScriptedPolicy backend({"Strategic Analysis: [pressure the villager]\n"
                                "Most Desired Response: [I will vote for Player 5.]\n"
                                "Most Undesired Response: [I trust Player 5.]"});
        Intent intent = identify_intent(ctx, backend, config, no_stream());
        REQUIRE(intent.desired == "I will vote for Player 5.");
        REQUIRE(intent.undesired == "I trust Player 5.");
        REQUIRE(intent.analysis == "pressure the villager");
    }
    SECTION("a retry rescues a malformed first attempt") {
        ScriptedPolicy backend({"gibberish",
                                "Strategic Analysis: [a]\nMost Desired Response: [b]\nMost Undesired Response: [c]"});
        Intent intent = identify_intent(ctx, backend, config, no_stream());
        REQUIRE(intent.desired == "b");
        REQUIRE(backend.remaining() == 0);
    }
    SECTION("persistent failure exhausts the retry budget") {
        std::vector<std::string> bad(4, "Strategic Analysis: [a]\nMost Desired Response: [b]");
        ScriptedPolicy backend(bad);
        REQUIRE_THROWS_AS(identify_intent(ctx, backend, config, no_stream()), IntentParseError);
        REQUIRE(backend.remaining() == 0);  // 1 + parse_retries attempts
    }
    SECTION("identical desired and undesired is a parse failure") {
        std::vector<std::string> same(
            4, "Strategic Analysis: [a]\nMost Desired Response: [same]\nMost Undesired Response: [same]");
        ScriptedPolicy backend(same);
        REQUIRE_THROWS_AS(identify_intent(ctx, backend, config, no_stream()), IntentParseError);
    }
    SECTION("the next speaker is required") {
        SpeakingContext bare = ctx;
        bare.next_speaker = 0;
        ScriptedPolicy backend({"x"});
        REQUIRE_THROWS_AS(identify_intent(bare, backend, config, no_stream()), ConfigError);
    }
}

TEST_CASE("base generation parses labeled backends and passes raw ones through") {
    SpeakingContext ctx = sample_context();
    PersuasionConfig config;

    SECTION("labeled backend") {
        ScriptedPolicy backend({"Response: [I checked Player 5 last night.]"});
        REQUIRE(generate_base(ctx, backend, config, no_stream()) == "I checked Player 5 last night.");
    }
    SECTION("empty response field fails") {
        std::vector<std::string> empty(4, "Response: []");
        ScriptedPolicy backend(empty);
        REQUIRE_THROWS_AS(generate_base(ctx, backend, config, no_stream()), BaseParseError);
    }
    SECTION("raw backend text is used verbatim") {
        ToyPolicyParams params = ToyPolicyParams::zeros(measurer_vocab());
        for (int r = 0; r < params.weights.rows; ++r) params.weights.at(r, 1) = -40.0;  // hold off eos
        ToyPolicy backend("toy", params);
        auto rng = new_rng(5);
        GenerationSettings settings{1.0, 4, &rng};
        std::string base = generate_base(ctx, backend, compact_config(), settings);
        REQUIRE_FALSE(base.empty());
        REQUIRE(base.find("Response:") == std::string::npos);
    }
}

TEST_CASE("refinement falls back to the base only when configured") {
    SpeakingContext ctx = sample_context();
    PersuasionConfig config;

    SECTION("happy path") {
        ScriptedPolicy refiner({"Analysis: [sharpen it]\nResponse: [Vote Player 5 with me today.]"});
        RefineResult out = refine(ctx, "vote five", refiner, config, no_stream());
        REQUIRE(out.text == "Vote Player 5 with me today.");
        REQUIRE_FALSE(out.fell_back);
    }
    SECTION("analysis label is optional") {
        ScriptedPolicy refiner({"Response: [Tightened.]"});
        REQUIRE(refine(ctx, "loose", refiner, config, no_stream()).text == "Tightened.");
    }
    SECTION("fallback returns the base") {
        std::vector<std::string> bad(4, "no labels here");
        ScriptedPolicy refiner(bad);
        RefineResult out = refine(ctx, "the original", refiner, config, no_stream());
        REQUIRE(out.text == "the original");
        REQUIRE(out.fell_back);
    }
    SECTION("fallback disabled surfaces the parse error") {
        PersuasionConfig strict = config;
        strict.refine_fallback_to_base = false;
        std::vector<std::string> bad(4, "no labels here");
        ScriptedPolicy refiner(bad);
        REQUIRE_THROWS_AS(refine(ctx, "base", refiner, strict, no_stream()), RefineParseError);
    }
    SECTION("empty base is a precondition violation") {
        ScriptedPolicy refiner({"Response: [x]"});
        REQUIRE_THROWS_AS(refine(ctx, "", refiner, config, no_stream()), ConfigError);
    }
}

TEST_CASE("group sampling preserves order and enforces the minimum size") {
    SpeakingContext ctx = sample_context();
    PersuasionConfig config;

    SECTION("n below two is rejected") {
        StubPolicy refiner;
        REQUIRE_THROWS_AS(sample_group(ctx, "base", refiner, 1, config, no_stream()), GroupTooSmall);
    }
    SECTION("eight candidates from the stub refiner") {
        StubPolicy refiner;
        auto rng = new_rng(17);
        GenerationSettings settings{1.0, 16, &rng};
        CandidateGroup group = sample_group(ctx, "base utterance", refiner, 8, config, settings);
        REQUIRE(group.candidates.size() == 8);
        for (const auto& c : group.candidates) REQUIRE_FALSE(c.empty());
        REQUIRE(group.base == "base utterance");
    }
    SECTION("near zero temperature makes toy candidates identical") {
        ToyPolicyParams params = ToyPolicyParams::zeros(measurer_vocab());
        params.weights.at(params.bias_row(), *params.vocab.id_of("vote")) = 3.0;
        ToyPolicy refiner("toy", params);
        auto rng = new_rng(3);
        GenerationSettings settings{1e-9, 3, &rng};
        CandidateGroup group = sample_group(ctx, "base", refiner, 4, compact_config(), settings);
        for (const auto& c : group.candidates) REQUIRE(c == group.candidates[0]);
        REQUIRE(group.candidates[0] == "vote vote vote");
    }
    SECTION("a bad slot retries then the group fails") {
        ScriptedPolicy refiner({"Response: [ok one]", "junk", "Response: [ok two]", "junk", "junk", "junk", "junk"});
        PersuasionConfig tight = config;
        tight.parse_retries = 1;
        CandidateGroup group = sample_group(ctx, "base", refiner, 2, tight, no_stream());
        REQUIRE(group.candidates == std::vector<std::string>{"ok one", "ok two"});
        ScriptedPolicy hopeless({"junk", "junk", "junk", "junk"});
        REQUIRE_THROWS_AS(sample_group(ctx, "base", hopeless, 2, tight, no_stream()), GroupSampleError);
    }
}

TEST_CASE("reward modes decompose exactly") {
    SpeakingContext ctx = sample_context();
    PersuasionConfig config = compact_config();
    auto rng = new_rng(91);
    for (int trial = 0; trial < 100; ++trial) {
        ToyPolicy measurer = random_measurer(1000 + trial);
        Intent intent{"yes i will vote", "no i trust player", ""};
        std::string candidate = trial % 2 ? "you should vote now" : "wolf seer trust";
        double full = measure_reward(candidate, intent, ctx, measurer, RewardMode::Full, config);
        double pos = measure_reward(candidate, intent, ctx, measurer, RewardMode::PositiveOnly, config);
        double neg = measure_reward(candidate, intent, ctx, measurer, RewardMode::NegativeOnly, config);
        REQUIRE(full == pos + neg);  // bit-exact identity
    }
    (void)rng;
}

TEST_CASE("reward measurement is deterministic and cancels identical intents") {
    SpeakingContext ctx = sample_context();
    PersuasionConfig config = compact_config();
    ToyPolicy measurer = random_measurer(7);

    Intent intent{"yes", "no", ""};
    double first = measure_reward("vote trust", intent, ctx, measurer, RewardMode::Full, config);
    double second = measure_reward("vote trust", intent, ctx, measurer, RewardMode::Full, config);
    REQUIRE(first == second);

    Intent same{"yes", "yes", ""};
    for (const char* candidate : {"vote", "trust player", "wolf wolf wolf"})
        REQUIRE(measure_reward(candidate, same, ctx, measurer, RewardMode::Full, config) == 0.0);
}

TEST_CASE("keyword candidates strictly outrank keyword free ones") {
    SpeakingContext ctx = sample_context();
    PersuasionConfig config = compact_config();
    ToyPolicy measurer = keyword_measurer();
    Intent intent{"yes", "no", ""};

    // Exhaustive over all candidates of length 1..3 drawn from plain words.
    std::vector<std::string> words{"vote", "trust", "player", "wolf", "seer"};
    std::vector<std::string> candidates;
    for (const auto& a : words) {
        candidates.push_back(a);
        for (const auto& b : words) {
            candidates.push_back(a + " " + b);
            for (const auto& c : words) candidates.push_back(a + " " + b + " " + c);
        }
    }
    double min_with = 1e300, max_without = -1e300;
    for (const auto& candidate : candidates) {
        double r = measure_reward(candidate, intent, ctx, measurer, RewardMode::Full, config);
        bool has_keyword = (" " + candidate + " ").find(" vote ") != std::string::npos;
        if (has_keyword)
            min_with = std::min(min_with, r);
        else
            max_without = std::max(max_without, r);
    }
    REQUIRE(min_with > max_without);
    REQUIRE(min_with >= 2.0 - 1e-9);
    REQUIRE(max_without == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("rewards need a scoring measurer and a known follower") {
    SpeakingContext ctx = sample_context();
    PersuasionConfig config = compact_config();
    Intent intent{"yes", "no", ""};

    StubPolicy generation_only;
    REQUIRE_THROWS_AS(measure_reward("x", intent, ctx, generation_only, RewardMode::Full, config),
                      UnsupportedCapability);

    ToyPolicy measurer = random_measurer(8);
    SpeakingContext blind = ctx;
    blind.next_role.clear();
    REQUIRE_THROWS_AS(measure_reward("x", intent, blind, measurer, RewardMode::Full, config), ConfigError);

    PersuasionConfig broken = config;
    broken.templates.measure.sections.pop_back();  // no assistant section left
    REQUIRE_THROWS_AS(measure_reward("x", intent, ctx, measurer, RewardMode::Full, broken), ConfigError);
}

TEST_CASE("rewards are local to the measured dialogue") {
    MatchRecord record = two_day_record();
    auto instance = build_training_instance(record, 3);
    REQUIRE(instance.has_value());

    MatchRecord tampered = record;
    for (auto& turn : tampered.turns)
        if (turn.t > 3) turn.final_text = "completely different later chatter";
    auto again = build_training_instance(tampered, 3);
    REQUIRE(again.has_value());
    REQUIRE(again->to_json() == instance->to_json());

    ToyPolicy measurer = random_measurer(9);
    PersuasionConfig config = compact_config();
    double a = measure_reward("vote for player 5", instance->intent(), instance->context(), measurer,
                              RewardMode::Full, config);
    double b = measure_reward("vote for player 5", again->intent(), again->context(), measurer, RewardMode::Full,
                              config);
    REQUIRE(a == b);
}

TEST_CASE("a seven speech day yields six instances") {
    MatchRecord record = two_day_record();
    ExtractStats stats;
    std::vector<TrainingInstance> day_one;
    for (int t = 1; t <= 7; ++t) {
        auto instance = build_training_instance(record, t, &stats);
        if (instance) day_one.push_back(std::move(*instance));
    }
    REQUIRE(day_one.size() == 6);
    REQUIRE(stats.skipped_no_follower == 1);  // the seventh speaker has no same-day follower

    // Context of the k-th instance: dialogue holds exactly k-1 utterances.
    for (std::size_t i = 0; i < day_one.size(); ++i) {
        REQUIRE(day_one[i].dialogue.size() == i);
        REQUIRE(day_one[i].next_speaker == record.turns[i + 1].speaker);
        REQUIRE(day_one[i].public_state.phase == "day");
        REQUIRE(day_one[i].public_state.round == 1);
    }
}

TEST_CASE("extraction spans rounds but never crosses them") {
    MatchRecord record = two_day_record();
    ExtractStats stats;
    auto instances = extract_all_instances(record, &stats);
    // 7 + 7 speeches; the last of each day has no same-round follower.
    REQUIRE(instances.size() == 12);
    REQUIRE(stats.instances == 12);
    REQUIRE(stats.skipped_no_follower == 2);
    REQUIRE(stats.skipped_no_intent == 0);
    REQUIRE(stats.skipped_malformed == 0);

    // Round-two instances carry the full prior dialogue and the round-2 state.
    const TrainingInstance& first_round_two = instances[6];
    REQUIRE(first_round_two.turn == 8);
    REQUIRE(first_round_two.dialogue.size() == 7);
    REQUIRE(first_round_two.public_state.round == 2);
}

TEST_CASE("tampered logs are skipped and counted not crashed") {
    SECTION("missing intent") {
        MatchRecord record = two_day_record();
        record.turns[2].desired.reset();
        ExtractStats stats;
        auto instances = extract_all_instances(record, &stats);
        REQUIRE(instances.size() == 11);
        REQUIRE(stats.skipped_no_intent == 1);
    }
    SECTION("missing state snapshot") {
        MatchRecord record = two_day_record();
        for (auto& e : record.events)
            if (e.kind == "speech" && e.payload.at("t") == 2) e.payload.erase("state");
        ExtractStats stats;
        auto instances = extract_all_instances(record, &stats);
        REQUIRE(instances.size() == 11);
        REQUIRE(stats.skipped_malformed == 1);
    }
    SECTION("follower role unknown") {
        MatchRecord record = two_day_record();
        record.players.erase(record.players.begin() + 1);  // drop Player 2's entry
        ExtractStats stats;
        extract_all_instances(record, &stats);
        REQUIRE(stats.skipped_malformed > 0);
    }
}

TEST_CASE("instances round trip through the dataset format losslessly") {
    MatchRecord record = two_day_record();
    auto instances = extract_all_instances(record);
    REQUIRE_FALSE(instances.empty());

    std::string path = "dataset_roundtrip_test.jsonl";
    write_dataset_jsonl(path, instances);
    auto back = read_dataset_jsonl(path);
    REQUIRE(back.size() == instances.size());
    for (std::size_t i = 0; i < back.size(); ++i) REQUIRE(back[i].to_json().dump() == instances[i].to_json().dump());
    std::remove(path.c_str());

    // The rebuilt context renders the same prompt as the original.
    SpeakingContext ctx = instances[3].context();
    REQUIRE(ctx.dialogue.size() == static_cast<int>(instances[3].dialogue.size()));
    REQUIRE(ctx.public_state.render() == instances[3].public_state.render());
}
