#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/core/public_state.hpp"
#include "sdg/core/types.hpp"
#include "sdg/persuasion/parsing.hpp"
#include "sdg/persuasion/templates.hpp"
#include "sdg/policy/policy.hpp"

namespace sdg {

// The leader's view when composing turn t: (R, G_t, D_t, r_t), plus the
// follower's seat; the follower's role is full information and is present
// only on training instances.
struct SpeakingContext {
    RulesText rules;
    PublicState public_state;
    DialogueHistory dialogue;
    PlayerId speaker = 0;
    std::string speaker_role;
    PlayerId next_speaker = 0;
    std::string next_role;  // empty outside training

    bool has_next_role() const { return !next_role.empty(); }

    void validate() const {
        if (speaker <= 0) throw ConfigError("speaking context needs a speaker");
        if (next_speaker == speaker) throw ConfigError("next speaker must differ from the speaker");
        if (speaker_role.empty()) throw ConfigError("speaking context needs the speaker's role");
    }
};

// The follower responses the leader most wants to elicit and to avoid.
struct Intent {
    std::string desired;
    std::string undesired;
    std::string analysis;
};

enum class RewardMode { Full, PositiveOnly, NegativeOnly };

inline std::string to_string(RewardMode m) {
    switch (m) {
        case RewardMode::Full: return "full";
        case RewardMode::PositiveOnly: return "positive_only";
        case RewardMode::NegativeOnly: return "negative_only";
    }
    throw Error("bad reward mode");
}

inline RewardMode reward_mode_from_string(const std::string& s) {
    if (s == "full") return RewardMode::Full;
    if (s == "positive_only") return RewardMode::PositiveOnly;
    if (s == "negative_only") return RewardMode::NegativeOnly;
    throw ConfigError("unknown reward mode: " + s);
}

struct CandidateGroup {
    std::string base;
    std::vector<std::string> candidates;
    std::vector<double> rewards;  // parallel to candidates once measured
    RewardMode mode = RewardMode::Full;
};

struct PersuasionConfig {
    TemplateSet templates = TemplateSet::paper();
    int parse_retries = 3;  // re-prompts after the first failed attempt
    bool refine_fallback_to_base = true;
};

struct RefineResult {
    std::string text;
    bool fell_back = false;
};

namespace detail {

inline std::map<std::string, std::string> context_bindings(const SpeakingContext& ctx) {
    return {{"game_rules", ctx.rules.text},
            {"player_name", player_name(ctx.speaker)},
            {"player_role", ctx.speaker_role},
            {"game_state", ctx.public_state.render()},
            {"dialog_history", ctx.dialogue.render()}};
}

// Retry loop shared by the labeled operations; `extract` throws ParseError.
template <typename Extract>
auto generate_with_retries(TextPolicy& backend, const ChatPrompt& prompt, const GenerationSettings& settings,
                           int parse_retries, Extract extract) {
    std::string raw;
    for (int attempt = 0; attempt <= parse_retries; ++attempt) {
        raw = backend.generate(prompt, settings).text;
        try {
            return extract(raw);
        } catch (const ParseError&) {
            if (attempt == parse_retries) throw;
        }
    }
    throw ParseError("unreachable", raw);
}

}  // namespace detail

// Intent identification: ask the backend what the follower should and
// should not say.
// Never falls back; an unparseable intent poisons the turn and the caller
// skips it.
inline Intent identify_intent(const SpeakingContext& ctx, TextPolicy& backend, const PersuasionConfig& config,
                              const GenerationSettings& settings) {
    ctx.validate();
    if (ctx.next_speaker <= 0) throw ConfigError("intent identification needs the next speaker");
    auto bindings = detail::context_bindings(ctx);
    bindings["next_player_name"] = player_name(ctx.next_speaker);
    ChatPrompt prompt = config.templates.intent.render(bindings);
    try {
        return detail::generate_with_retries(
            backend, prompt, settings, config.parse_retries, [&](const std::string& raw) {
                auto fields = parse_labeled_fields(raw, config.templates.intent.output_labels);
                Intent intent{fields.at("Most Desired Response"), fields.at("Most Undesired Response"),
                              fields.count("Strategic Analysis") ? fields.at("Strategic Analysis") : ""};
                if (intent.desired.empty() || intent.undesired.empty())
                    throw ParseError("intent fields must be non-empty", raw);
                if (intent.desired == intent.undesired)
                    throw ParseError("desired and undesired responses must differ", raw);
                return intent;
            });
    } catch (const ParseError& e) {
        throw IntentParseError(e.what(), e.raw_text);
    }
}

inline std::string generate_base(const SpeakingContext& ctx, TextPolicy& backend, const PersuasionConfig& config,
                                 const GenerationSettings& settings) {
    ctx.validate();
    ChatPrompt prompt = config.templates.base.render(detail::context_bindings(ctx));
    if (!backend.labeled_output()) {
        std::string text = backend.generate(prompt, settings).text;
        if (text.empty()) throw BaseParseError("raw backend produced an empty utterance", text);
        return text;
    }
    try {
        return detail::generate_with_retries(backend, prompt, settings, config.parse_retries,
                                             [&](const std::string& raw) {
                                                 auto fields = parse_labeled_fields(
                                                     raw, config.templates.base.output_labels);
                                                 if (fields.at("Response").empty())
                                                     throw ParseError("empty response field", raw);
                                                 return fields.at("Response");
                                             });
    } catch (const ParseError& e) {
        throw BaseParseError(e.what(), e.raw_text);
    }
}

// The exact prompt the refiner samples from; the trainer scores candidates
// against this same rendering.
inline ChatPrompt render_refine_prompt(const SpeakingContext& ctx, const std::string& base,
                                       const PersuasionConfig& config) {
    auto bindings = detail::context_bindings(ctx);
    bindings["base_utterance"] = base;
    return config.templates.refine.render(bindings);
}

namespace detail {

// One refinement sample, parse included, no fallback.
inline std::string refine_once(const SpeakingContext& ctx, const std::string& base, TextPolicy& refiner,
                               const PersuasionConfig& config, const GenerationSettings& settings) {
    ChatPrompt prompt = render_refine_prompt(ctx, base, config);
    if (!refiner.labeled_output()) {
        std::string text = refiner.generate(prompt, settings).text;
        if (text.empty()) throw ParseError("raw refiner produced an empty utterance", text);
        return text;
    }
    return generate_with_retries(refiner, prompt, settings, 0, [&](const std::string& raw) {
        static const std::vector<std::string> required{"Response"};
        auto fields = parse_labeled_fields(raw, config.templates.refine.output_labels, &required);
        if (fields.at("Response").empty()) throw ParseError("empty response field", raw);
        return fields.at("Response");
    });
}

}  // namespace detail

// Refinement: rewrite the base utterance. Used at inference for the final
// u_t; parse failure falls back to the base when configured.
inline RefineResult refine(const SpeakingContext& ctx, const std::string& base, TextPolicy& refiner,
                           const PersuasionConfig& config, const GenerationSettings& settings) {
    ctx.validate();
    if (base.empty()) throw ConfigError("refine needs a non-empty base utterance");
    std::string raw_seen;
    for (int attempt = 0; attempt <= config.parse_retries; ++attempt) {
        try {
            return {detail::refine_once(ctx, base, refiner, config, settings), false};
        } catch (const ParseError& e) {
            raw_seen = e.raw_text;
        }
    }
    if (config.refine_fallback_to_base) return {base, true};
    throw RefineParseError("refinement failed to parse after retries", raw_seen);
}

// Group sampling: n independent refinement samples under identical inputs, order
// preserved. Slots retry on parse failure, then the whole group fails.
inline CandidateGroup sample_group(const SpeakingContext& ctx, const std::string& base, TextPolicy& refiner, int n,
                                   const PersuasionConfig& config, const GenerationSettings& settings) {
    ctx.validate();
    if (n < 2) throw GroupTooSmall("candidate group needs n >= 2");
    if (base.empty()) throw ConfigError("sample_group needs a non-empty base utterance");
    CandidateGroup group;
    group.base = base;
    for (int i = 0; i < n; ++i) {
        std::string raw_seen;
        bool filled = false;
        for (int attempt = 0; attempt <= config.parse_retries && !filled; ++attempt) {
            try {
                group.candidates.push_back(detail::refine_once(ctx, base, refiner, config, settings));
                filled = true;
            } catch (const ParseError& e) {
                raw_seen = e.raw_text;
            }
        }
        if (!filled)
            throw GroupSampleError("candidate slot " + std::to_string(i) + " failed to parse after retries",
                                   raw_seen);
    }
    return group;
}

// Reward measurement, full or single-sided. The follower's
// prompt seats the Measurer as p_{t+1} with full information, approximates
// G_{t+1} by G_t, and extends the dialogue with the candidate; the target is
// scored as the assistant continuation after "Response: ".
inline double measure_reward(const std::string& candidate, const Intent& intent, const SpeakingContext& ctx,
                             TextPolicy& measurer, RewardMode mode, const PersuasionConfig& config) {
    ctx.validate();
    if (!measurer.can_score()) throw UnsupportedCapability(measurer.name() + " cannot measure rewards");
    if (ctx.next_speaker <= 0 || !ctx.has_next_role())
        throw ConfigError("reward measurement needs the follower's seat and role");

    std::map<std::string, std::string> bindings{
        {"game_rules", ctx.rules.text},
        {"player_name", player_name(ctx.next_speaker)},
        {"player_role", ctx.next_role},
        {"game_state", ctx.public_state.render()},  // G_{t+1} ~= G_t
    };
    std::string dialogue = ctx.dialogue.render();
    if (!dialogue.empty()) dialogue += '\n';
    dialogue += player_name(ctx.speaker) + ": " + candidate;
    bindings["dialog_history"] = dialogue;

    ChatPrompt prompt;
    std::string prefix;
    for (const auto& section : config.templates.measure.sections) {
        auto split = section.body.find("{target_response}");
        if (split == std::string::npos) {
            prompt.messages.push_back(
                {section.source, PromptTemplate::render_body(section.body, bindings, "measure")});
            continue;
        }
        // Scored span boundary: everything after the placeholder is dropped.
        prefix = PromptTemplate::render_body(section.body.substr(0, split), bindings, "measure");
        prompt.messages.push_back({section.source, prefix});
        break;
    }
    if (prompt.messages.empty() || prompt.messages.back().source != MessageSource::Assistant)
        throw ConfigError("measure template needs an assistant section with {target_response}");

    auto logp = [&](const std::string& target) { return measurer.score(prompt, target).total; };
    switch (mode) {
        case RewardMode::Full: return logp(intent.desired) - logp(intent.undesired);
        case RewardMode::PositiveOnly: return logp(intent.desired);
        case RewardMode::NegativeOnly: return -logp(intent.undesired);
    }
    throw Error("bad reward mode");
}

inline void measure_group(CandidateGroup& group, const Intent& intent, const SpeakingContext& ctx,
                          TextPolicy& measurer, RewardMode mode, const PersuasionConfig& config) {
    group.mode = mode;
    group.rewards.clear();
    for (const auto& candidate : group.candidates)
        group.rewards.push_back(measure_reward(candidate, intent, ctx, measurer, mode, config));
}

}  // namespace sdg
