#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdg/core/rng.hpp"
#include "sdg/games/rules.hpp"
#include "sdg/grpo/trainer.hpp"
#include "sdg/persuasion/instances.hpp"
#include "sdg/persuasion/templates.hpp"
#include "sdg/policy/toy_policy.hpp"

namespace sdg {

// Synthetic training environment with a known optimum: the measurer's
// log-odds of the desired response over the undesired one rise by exactly
// `keyword_gain` per occurrence of the keyword inside its feature window, and
// by nothing else, so the group reward of a candidate is directly the
// keyword count it shows the measurer.
struct KeywordEnvironment {
    Vocabulary vocab;
    std::string keyword;
    std::string desired;
    std::string undesired;
    double keyword_gain = 2.0;
    ToyPolicyParams measurer_params;
    ToyPolicyParams refiner_init;
    PersuasionConfig persuasion;
    std::vector<TrainingInstance> dataset;

    ToyPolicy measurer() const { return ToyPolicy("keyword-measurer", measurer_params); }
    ToyPolicy refiner() const { return ToyPolicy("refiner", refiner_init); }
};

inline KeywordEnvironment make_keyword_environment(int instance_count, std::uint64_t seed) {
    if (instance_count < 1) throw ConfigError("keyword environment needs at least one instance");
    KeywordEnvironment env;
    env.vocab = Vocabulary({"vote", "trust", "player", "yes", "no", "wolf", "seer", "for", "i", "will"});
    env.keyword = "vote";
    env.desired = "yes";
    env.undesired = "no";

    env.measurer_params = ToyPolicyParams::zeros(env.vocab);
    env.measurer_params.weights.at(*env.vocab.id_of(env.keyword), *env.vocab.id_of(env.desired)) =
        env.keyword_gain;
    env.refiner_init = ToyPolicyParams::zeros(env.vocab);

    // Dialogue-final prompt layouts keep the candidate inside the measurer's
    // feature window.
    env.persuasion.templates = TemplateSet::compact();

    DeterministicRandomStream rng = new_rng(seed);
    const std::vector<std::string> words = {"trust", "player", "wolf", "seer", "for", "i", "will"};
    auto phrase = [&](int min_len, int max_len) {
        const int len = min_len + rng.uniform_int(max_len - min_len + 1);
        std::string out;
        for (int i = 0; i < len; ++i) {
            if (i > 0) out += ' ';
            out += words[rng.uniform_int(words.size())];
        }
        return out;
    };

    for (int i = 0; i < instance_count; ++i) {
        TrainingInstance inst;
        inst.game = GameKind::Werewolf;
        inst.seed = seed;
        inst.turn = 1 + static_cast<int>(rng.uniform_int(3));
        inst.rules = rules_text(GameKind::Werewolf).text;
        inst.public_state.game = GameKind::Werewolf;
        inst.public_state.round = 1;
        inst.public_state.phase = "day";
        inst.public_state.alive = {1, 2, 3, 4, 5, 6, 7};
        for (int t = 1; t < inst.turn; ++t)
            inst.dialogue.push_back(Utterance{static_cast<PlayerId>(1 + (t - 1) % 7), phrase(2, 5), t});
        inst.speaker = 1 + static_cast<int>(rng.uniform_int(7));
        inst.speaker_role = "Villager";
        inst.next_speaker = 1 + (inst.speaker % 7);
        inst.next_role = "Villager";
        inst.base = phrase(2, 4);
        inst.desired = env.desired;
        inst.undesired = env.undesired;
        env.dataset.push_back(std::move(inst));
    }
    return env;
}

}  // namespace sdg
