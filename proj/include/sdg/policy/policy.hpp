#pragma once

#include <string>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/policy/chat.hpp"

namespace sdg {

// Per-token log-probabilities of a scored continuation. total is the log of
// the joint probability; every entry is <= 0.
struct ScoredSequence {
    std::vector<std::string> tokens;
    std::vector<double> logprobs;
    double total = 0.0;
};

struct GenerationResult {
    std::string text;
    bool truncated = false;  // token budget hit before end-of-sequence
};

// Interface behind every policy in the pipeline. labeled_output() announces
// whether generations follow the labeled block protocol ("Response: [...]")
// and need parsing; a raw policy's text is used verbatim. can_score() is a
// declared trait: scoring a generation-only policy throws.
class TextPolicy {
  public:
    virtual ~TextPolicy() = default;
    virtual std::string name() const = 0;
    virtual bool can_score() const { return false; }
    virtual bool labeled_output() const { return true; }
    virtual GenerationResult generate(const ChatPrompt& prompt, const GenerationSettings& settings) = 0;
    virtual ScoredSequence score(const ChatPrompt& prompt, const std::string& target) {
        (void)prompt;
        (void)target;
        throw UnsupportedCapability(name() + " cannot score sequences");
    }
};

}  // namespace sdg
