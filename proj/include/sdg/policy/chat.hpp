#pragma once

#include <string>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/core/rng.hpp"

namespace sdg {

enum class MessageSource { System, User, Assistant };

inline std::string to_string(MessageSource s) {
    switch (s) {
        case MessageSource::System: return "system";
        case MessageSource::User: return "user";
        case MessageSource::Assistant: return "assistant";
    }
    throw Error("bad message source");
}

struct ChatMessage {
    MessageSource source = MessageSource::User;
    std::string text;
};

// Ordered chat transcript. Backends speaking the chat protocol consume the
// structured form; token-level policies read the flat rendering, which is the
// message texts joined with single newlines. At least one message required.
struct ChatPrompt {
    std::vector<ChatMessage> messages;

    void require_nonempty() const {
        if (messages.empty()) throw ConfigError("chat prompt needs at least one message");
    }

    std::string flat_text() const {
        require_nonempty();
        std::string out;
        for (std::size_t i = 0; i < messages.size(); ++i) {
            if (i) out += '\n';
            out += messages[i].text;
        }
        return out;
    }
};

// Sampling knobs shared by every backend. The random stream is borrowed, not
// owned; token-level generation draws from it, remote backends ignore it.
struct GenerationSettings {
    double temperature = 1.0;
    int max_tokens = 64;
    DeterministicRandomStream* rng = nullptr;

    void validate() const {
        if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
        if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    }
};

}  // namespace sdg
