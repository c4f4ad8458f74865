#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/policy/chat.hpp"

namespace sdg {

struct TemplateSection {
    MessageSource source = MessageSource::System;
    std::string body;
};

// Prompt template with {placeholder} slots. Rendering demands a binding for
// every placeholder in the body; the rendered text never contains one.
// output_labels is the expected output format: the labeled fields a backend's
// reply must carry (empty for scored-continuation templates).
struct PromptTemplate {
    std::string id;
    std::vector<TemplateSection> sections;
    std::vector<std::string> output_labels;

    static bool placeholder_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    }

    static std::string render_body(const std::string& body, const std::map<std::string, std::string>& bindings,
                                   const std::string& id) {
        std::string out;
        for (std::size_t i = 0; i < body.size();) {
            if (body[i] != '{') {
                out += body[i++];
                continue;
            }
            std::size_t end = i + 1;
            while (end < body.size() && placeholder_char(body[end])) ++end;
            if (end >= body.size() || body[end] != '}' || end == i + 1) {
                out += body[i++];  // literal brace, not a placeholder
                continue;
            }
            std::string name = body.substr(i + 1, end - i - 1);
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw TemplateRenderError("template " + id + ": placeholder {" + name + "} has no binding");
            out += it->second;
            i = end + 1;
        }
        return out;
    }

    ChatPrompt render(const std::map<std::string, std::string>& bindings) const {
        ChatPrompt prompt;
        for (const auto& s : sections) prompt.messages.push_back({s.source, render_body(s.body, bindings, id)});
        return prompt;
    }

    // The on-disk asset form: figure layout with section headers.
    std::string asset_text() const {
        std::string out;
        for (std::size_t i = 0; i < sections.size(); ++i) {
            if (i) out += "\n\n";
            switch (sections[i].source) {
                case MessageSource::System: out += "System Prompt:"; break;
                case MessageSource::User: out += "User Prompt:"; break;
                case MessageSource::Assistant: out += "AI Message:"; break;
            }
            out += "\n\n" + sections[i].body;
        }
        out += "\n";
        return out;
    }

    static PromptTemplate from_asset_text(const std::string& id, const std::string& text,
                                          std::vector<std::string> output_labels) {
        PromptTemplate t{id, {}, std::move(output_labels)};
        std::istringstream in(text);
        std::string line;
        std::string body;
        bool have_section = false;
        MessageSource source = MessageSource::System;
        auto flush = [&] {
            if (!have_section) return;
            while (!body.empty() && body.back() == '\n') body.pop_back();
            t.sections.push_back({source, body});
            body.clear();
        };
        while (std::getline(in, line)) {
            if (line == "System Prompt:" || line == "User Prompt:" || line == "AI Message:") {
                flush();
                have_section = true;
                source = line == "System Prompt:" ? MessageSource::System
                         : line == "User Prompt:" ? MessageSource::User
                                                  : MessageSource::Assistant;
                std::getline(in, line);  // blank separator after the header
                continue;
            }
            if (!have_section) {
                if (!line.empty()) throw ConfigError("template asset " + id + ": text before first section header");
                continue;
            }
            body += line;
            body += '\n';
        }
        flush();
        if (t.sections.empty()) throw ConfigError("template asset " + id + " has no sections");
        return t;
    }
};

// The four pipeline prompts. paper() is the default registry; compact() is a
// dialogue-final layout whose measurement prompt ends in a one-word assistant
// prefix, keeping a candidate utterance inside a short-window measurer's
// sight. Custom sets load from a directory of assets.
struct TemplateSet {
    PromptTemplate intent;
    PromptTemplate base;
    PromptTemplate refine;
    PromptTemplate measure;

    static const std::vector<std::string>& intent_labels() {
        static const std::vector<std::string> labels{"Strategic Analysis", "Most Desired Response",
                                                     "Most Undesired Response"};
        return labels;
    }
    static const std::vector<std::string>& base_labels() {
        static const std::vector<std::string> labels{"Response"};
        return labels;
    }
    static const std::vector<std::string>& refine_labels() {
        static const std::vector<std::string> labels{"Analysis", "Response"};
        return labels;
    }

    static TemplateSet paper();
    static TemplateSet compact();

    static TemplateSet from_directory(const std::string& dir) {
        auto load = [&](const std::string& id, std::vector<std::string> labels) {
            std::ifstream in(dir + "/" + id + ".txt");
            if (!in) throw ConfigError("template asset not found: " + dir + "/" + id + ".txt");
            std::ostringstream buf;
            buf << in.rdbuf();
            return PromptTemplate::from_asset_text(id, buf.str(), std::move(labels));
        };
        return TemplateSet{load("intent", intent_labels()), load("base_utterance", base_labels()),
                           load("refine", refine_labels()), load("measure", {})};
    }
};

namespace template_text {

// Shared context block of the system prompts.
inline constexpr const char* context_block =
    R"({game_rules}

Your are {player_name} and your role is {player_role}.

Current game state:

{game_state}

Conversation history:

{dialog_history})";

inline const std::string intent_system = std::string(
                                             R"(You are an expert social deduction game strategist.

Your task is to analyze the current game situation and identify strategic communication objectives.

)") + context_block;

inline const std::string intent_user =
    R"(Analyze the current situation and identify what you want the next player ({next_player_name}) to say or do in their upcoming turn.

Consider:

1. What response from {next_player_name} would be most beneficial for your win condition?

2. What response would be most harmful to your objectives?

Provide your analysis in the following format:

```

Strategic Analysis: [Your reasoning about the current situation and what you need to achieve]

Most Desired Response: [The specific response you want from the next player]

Most Undesired Response: [The specific response you want to avoid from the next player]

```)";

inline const std::string speaker_system = std::string(
                                              R"(You are a skilled social deduction game player with excellent communication abilities.

)") + context_block;

inline const std::string speaker_user =
    R"(It's your turn to speak, {player_name}.

Analyze the current situation carefully:

- Consider what information you want to share or withhold

- Think about how to advance your win condition

- Consider how other players might interpret your words

Generate a natural, strategic response that fits your role and the current game context. Your response should be conversational and help achieve your objectives.

Provide your response in the following format:

```

Response: [Your response]

```)";

inline const std::string refine_system = std::string(
                                             R"(You are a communication expert specializing in persuasive dialogue refinement for social deduction games.

)") + context_block;

inline const std::string refine_user =
    R"(You have a base utterance that needs to be refined for maximum persuasive impact:

Base utterance:

{base_utterance}

Your goal is to refine this utterance to be more persuasive while maintaining naturalness and staying true to your role. Consider:

- How to make your message more compelling

- What tone and phrasing would be most convincing

- How to subtly guide other players' thinking

Generate a refined version of the base utterance:

Provide your response in the following format:

```

Analysis: [Your reasoning about the current situation and what you need to achieve]

Response: [The refined version of the base utterance]

```)";

inline const std::string measure_assistant =
    R"(```

Response: {target_response}

```)";

}  // namespace template_text

inline TemplateSet TemplateSet::paper() {
    using namespace template_text;
    TemplateSet set;
    set.intent = {"intent",
                  {{MessageSource::System, intent_system}, {MessageSource::User, intent_user}},
                  intent_labels()};
    set.base = {"base_utterance",
                {{MessageSource::System, speaker_system}, {MessageSource::User, speaker_user}},
                base_labels()};
    set.refine = {"refine",
                  {{MessageSource::System, refine_system}, {MessageSource::User, refine_user}},
                  refine_labels()};
    set.measure = {"measure",
                   {{MessageSource::System, speaker_system},
                    {MessageSource::User, speaker_user},
                    {MessageSource::Assistant, measure_assistant}},
                   {}};
    return set;
}

inline TemplateSet TemplateSet::compact() {
    TemplateSet set;
    set.intent = {"intent",
                  {{MessageSource::System, "{game_rules}"},
                   {MessageSource::User,
                    "State:\n{game_state}\n\nDialogue:\n{dialog_history}\n\nYou are {player_name} ({player_role}). "
                    "What should {next_player_name} say next?\n\nStrategic Analysis: [..]\n\nMost Desired Response: "
                    "[..]\n\nMost Undesired Response: [..]"}},
                  intent_labels()};
    set.base = {"base_utterance",
                {{MessageSource::System, "{game_rules}"},
                 {MessageSource::User,
                  "State:\n{game_state}\n\nDialogue:\n{dialog_history}\n\nSpeak now, {player_name} ({player_role})."}},
                base_labels()};
    set.refine = {"refine",
                  {{MessageSource::System, "{game_rules}"},
                   {MessageSource::User, "{dialog_history}\n\nRewrite persuasively as {player_name}: {base_utterance}"}},
                  refine_labels()};
    // Dialogue is the last user content; the assistant prefix is one token.
    set.measure = {"measure",
                   {{MessageSource::System, "{game_rules}"},
                    {MessageSource::User, "{game_state}\n\n{dialog_history}"},
                    {MessageSource::Assistant, "Response: {target_response}"}},
                   {}};
    return set;
}

}  // namespace sdg
