#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/policy/chat.hpp"
#include "sdg/policy/policy.hpp"

namespace sdg {

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Offline chat backend producing well-formed labeled blocks for each prompt
// family (intent, refinement, plain response). Output is a pure function of
// the prompt text, the tag, and the caller's random stream, so self-play
// stays reproducible without a network.
class StubPolicy final : public TextPolicy {
  public:
    explicit StubPolicy(std::string tag = "a") : tag_(std::move(tag)) {}

    std::string name() const override { return "stub-" + tag_; }

    GenerationResult generate(const ChatPrompt& prompt, const GenerationSettings& settings) override {
        settings.validate();
        std::string text = prompt.flat_text();
        DeterministicRandomStream local(fnv1a64(text) ^ fnv1a64(tag_));
        DeterministicRandomStream& rng = settings.rng ? *settings.rng : local;
        if (text.find("Most Desired Response:") != std::string::npos) return {intent_block(rng), false};
        if (text.find("Base utterance:") != std::string::npos) return {refine_block(rng), false};
        return {response_block(rng), false};
    }

  private:
    static std::string player(DeterministicRandomStream& rng) {
        return "Player " + std::to_string(rng.uniform_range(1, 7));
    }

    static std::string sentence(DeterministicRandomStream& rng) {
        static const std::array<const char*, 4> opener = {"I think", "Honestly,", "For the record,", "Listen,"};
        static const std::array<const char*, 4> claim = {
            "%P has been dodging every question",
            "we should keep our trust in %P for now",
            "%P's story changed between rounds",
            "the quiet ones worry me more than %P",
        };
        static const std::array<const char*, 4> closer = {
            "Let's not rush this vote.",
            "Watch how they respond next.",
            "That is my honest read.",
            "We can't afford a mistake today.",
        };
        std::string c = claim[rng.uniform_int(claim.size())];
        std::string p = player(rng);
        if (auto pos = c.find("%P"); pos != std::string::npos) c.replace(pos, 2, p);
        return std::string(opener[rng.uniform_int(opener.size())]) + " " + c + ". " +
               closer[rng.uniform_int(closer.size())];
    }

    static std::string intent_block(DeterministicRandomStream& rng) {
        std::string mark = player(rng);
        std::string shield = player(rng);
        return "Strategic Analysis: [" + sentence(rng) +
               "]\n\nMost Desired Response: [I agree, " + mark + " is suspicious. I will vote for " + mark +
               ".]\n\nMost Undesired Response: [I don't buy that at all. " + shield + " is the real threat.]";
    }

    static std::string refine_block(DeterministicRandomStream& rng) {
        return "Analysis: [" + sentence(rng) + "]\n\nResponse: [" + sentence(rng) + "]";
    }

    static std::string response_block(DeterministicRandomStream& rng) {
        return "Response: [" + sentence(rng) + "]";
    }

    std::string tag_;
};

// Replays a fixed queue of generations; parser and retry paths are driven
// with it in tests.
class ScriptedPolicy final : public TextPolicy {
  public:
    explicit ScriptedPolicy(std::vector<std::string> outputs, bool labeled = true, std::string tag = "scripted")
        : outputs_(outputs.begin(), outputs.end()), labeled_(labeled), tag_(std::move(tag)) {}

    std::string name() const override { return tag_; }
    bool labeled_output() const override { return labeled_; }

    GenerationResult generate(const ChatPrompt& prompt, const GenerationSettings& settings) override {
        settings.validate();
        prompt.require_nonempty();
        if (outputs_.empty()) throw ConfigError("scripted policy exhausted: " + tag_);
        std::string out = outputs_.front();
        outputs_.pop_front();
        return {out, false};
    }

    std::size_t remaining() const { return outputs_.size(); }

  private:
    std::deque<std::string> outputs_;
    bool labeled_;
    std::string tag_;
};

}  // namespace sdg
