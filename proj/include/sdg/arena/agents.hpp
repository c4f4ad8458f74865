#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/core/public_state.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/core/types.hpp"
#include "sdg/grpo/trainer.hpp"
#include "sdg/persuasion/pipeline.hpp"
#include "sdg/policy/policy.hpp"
#include "sdg/policy/remote_policy.hpp"
#include "sdg/policy/stub_policy.hpp"
#include "sdg/policy/toy_policy.hpp"

namespace sdg::arena {

// Scripted agents decide from deterministic tables keyed on their view;
// Vanilla agents speak their backend's base utterance directly; Refined
// agents pass the base through a refiner first.
enum class Framework { Scripted, Vanilla, Refined };

inline const char* to_string(Framework f) {
    switch (f) {
        case Framework::Scripted: return "scripted";
        case Framework::Vanilla: return "vanilla";
        case Framework::Refined: return "refined";
    }
    throw Error("unknown framework");
}

inline Framework framework_from_string(const std::string& s) {
    if (s == "scripted") return Framework::Scripted;
    if (s == "vanilla") return Framework::Vanilla;
    if (s == "refined") return Framework::Refined;
    throw ConfigError("unknown agent framework: " + s);
}

// Pool entry. `backend` and `refiner` are policy bindings: "stub:<tag>",
// "toy:<checkpoint path>", or "remote:<model>@<base url>". `script` holds
// the scripted framework's decision-table overrides.
struct AgentSpec {
    std::string id;
    Framework framework = Framework::Scripted;
    std::string backend;
    std::string refiner;
    json script = json::object();

    void validate() const {
        if (id.empty()) throw ConfigError("agent spec needs an id");
        if (framework != Framework::Scripted && backend.empty())
            throw ConfigError("agent " + id + " needs a backend binding");
        if (framework == Framework::Refined && refiner.empty())
            throw ConfigError("refined agent " + id + " needs a refiner binding");
        if (!script.is_object()) throw ConfigError("agent " + id + ": script must be an object");
    }

    json to_json() const {
        json j{{"id", id}, {"framework", to_string(framework)}};
        if (!backend.empty()) j["backend"] = backend;
        if (!refiner.empty()) j["refiner"] = refiner;
        if (!script.empty()) j["script"] = script;
        return j;
    }

    static AgentSpec from_json(const json& j) {
        AgentSpec s;
        s.id = j.at("id").get<std::string>();
        s.framework = framework_from_string(j.at("framework").get<std::string>());
        s.backend = j.value("backend", std::string());
        s.refiner = j.value("refiner", std::string());
        s.script = j.value("script", json::object());
        for (const auto& [key, _] : j.items()) {
            static const std::set<std::string> known{"id", "framework", "backend", "refiner", "script"};
            if (!known.count(key)) throw ConfigError("unknown agent spec key: " + key);
        }
        s.validate();
        return s;
    }
};

inline std::vector<AgentSpec> read_agent_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open agent pool file: " + path);
    json j = json::parse(in, nullptr, true);
    if (!j.is_array() || j.empty()) throw ConfigError("agent pool must be a non-empty array: " + path);
    std::vector<AgentSpec> out;
    std::set<std::string> seen;
    for (const auto& entry : j) {
        out.push_back(AgentSpec::from_json(entry));
        if (!seen.insert(out.back().id).second)
            throw ConfigError("duplicate agent id in pool: " + out.back().id);
    }
    return out;
}

inline void write_agent_pool(const std::string& path, const std::vector<AgentSpec>& pool) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open agent pool file for writing: " + path);
    json j = json::array();
    for (const auto& spec : pool) j.push_back(spec.to_json());
    out << j.dump(2) << '\n';
}

// Instantiates the policy behind a binding string. Toy checkpoints are read
// from disk here; remote bindings defer credential checks to first use.
inline std::shared_ptr<TextPolicy> make_policy(const std::string& binding) {
    if (binding == "stub") return std::make_shared<StubPolicy>("a");
    if (binding.rfind("stub:", 0) == 0) return std::make_shared<StubPolicy>(binding.substr(5));
    if (binding.rfind("toy:", 0) == 0) {
        Checkpoint ck = read_checkpoint(binding.substr(4));
        return std::make_shared<ToyPolicy>(binding, std::move(ck.params));
    }
    if (binding.rfind("remote:", 0) == 0) {
        const std::string rest = binding.substr(7);
        const auto at = rest.find('@');
        if (at == std::string::npos || at == 0 || at + 1 >= rest.size())
            throw ConfigError("remote binding must be remote:<model>@<base url>: " + binding);
        RemoteConfig cfg;
        cfg.model = rest.substr(0, at);
        cfg.base_url = rest.substr(at + 1);
        return std::make_shared<RemotePolicy>(std::move(cfg));
    }
    throw ConfigError("unknown policy binding: " + binding);
}

// What one seat says on its turn: the raw base utterance (when a backend
// produced one), the text actually spoken, and the recorded intent pair.
struct SpeechTurn {
    std::optional<std::string> base;
    std::string final_text;
    std::optional<Intent> intent;
};

// One game decision solicited from a seat. `kind` selects the decision
// ("wolf_target", "protect", "probe", "day_vote", "propose_team",
// "team_vote", "quest_ballot", "assassinate", "seer_choice",
// "robber_choice", "troublemaker_swap", "vote"); `view` is everything the
// actor is entitled to see; `args` carries decision-specific inputs.
struct ActionRequest {
    GameKind game = GameKind::Werewolf;
    std::string kind;
    PlayerId actor = 0;
    PlayerView view;
    json args = json::object();
};

// Per-match playing instance of one pool entry. Matches own their agents
// and random stream, so a single match is deterministic given its plan and
// independent of any other match.
class Agent {
public:
    explicit Agent(AgentSpec spec) : spec_(std::move(spec)) {}
    virtual ~Agent() = default;

    const AgentSpec& spec() const { return spec_; }
    const std::string& id() const { return spec_.id; }

    virtual json act(const ActionRequest& req, DeterministicRandomStream& rng) = 0;
    virtual SpeechTurn speak(const SpeakingContext& ctx, bool record_intent,
                             DeterministicRandomStream& rng) = 0;

private:
    AgentSpec spec_;
};

namespace detail {

inline std::vector<PlayerId> living_others(const ActionRequest& req) {
    std::vector<PlayerId> out;
    for (PlayerId id : req.view.public_state.alive) {
        if (id != req.actor) out.push_back(id);
    }
    if (out.empty()) throw Error("no legal target for " + req.kind);
    return out;
}

inline bool knows_role(const ActionRequest& req, PlayerId id, const std::string& role) {
    const auto& known = req.view.private_view.known_roles;
    auto it = known.find(id);
    return it != known.end() && it->second == role;
}

inline bool knows_evil(const ActionRequest& req, PlayerId id) {
    const auto& known = req.view.private_view.known_alignments;
    auto it = known.find(id);
    return it != known.end() && it->second == "evil";
}

// Living players a werewolf may eat: everyone except the pack.
inline std::vector<PlayerId> wolf_targets(const ActionRequest& req) {
    std::vector<PlayerId> out;
    for (PlayerId id : living_others(req)) {
        if (!knows_role(req, id, "Werewolf")) out.push_back(id);
    }
    if (out.empty()) throw Error("no legal wolf target");
    return out;
}

inline std::set<PlayerId> probed_targets(const ActionRequest& req) {
    std::set<PlayerId> out;
    for (const auto& fact : req.view.private_view.facts) {
        if (fact.value("kind", std::string()) == "seer_probe") out.insert(fact.at("target").get<PlayerId>());
    }
    return out;
}

// A probed werewolf still alive, if the seer found one.
inline std::optional<PlayerId> known_living_wolf(const ActionRequest& req) {
    const auto& alive = req.view.public_state.alive;
    for (const auto& fact : req.view.private_view.facts) {
        if (fact.value("kind", std::string()) != "seer_probe") continue;
        if (!fact.value("is_werewolf", false)) continue;
        const PlayerId target = fact.at("target").get<PlayerId>();
        if (std::find(alive.begin(), alive.end(), target) != alive.end()) return target;
    }
    return std::nullopt;
}

}  // namespace detail

// Seeded baseline decision rules shared by the LLM-framework agents: legal
// by construction, random enough to explore every phase of every game.
inline json rule_decision(const ActionRequest& req, DeterministicRandomStream& rng) {
    const std::string& role = req.view.private_view.role;
    if (req.kind == "wolf_target") return rng.pick(detail::wolf_targets(req));
    if (req.kind == "protect") return rng.pick(req.view.public_state.alive);
    if (req.kind == "probe") {
        const auto probed = detail::probed_targets(req);
        std::vector<PlayerId> fresh;
        for (PlayerId id : detail::living_others(req)) {
            if (!probed.count(id)) fresh.push_back(id);
        }
        return rng.pick(fresh.empty() ? detail::living_others(req) : fresh);
    }
    if (req.kind == "day_vote") {
        if (role == "Werewolf") return rng.pick(detail::wolf_targets(req));
        if (role == "Seer") {
            if (auto wolf = detail::known_living_wolf(req)) return *wolf;
        }
        return rng.pick(detail::living_others(req));
    }
    if (req.kind == "propose_team") {
        std::vector<PlayerId> seats = req.view.public_state.alive;
        rng.shuffle(seats);
        seats.resize(static_cast<std::size_t>(req.args.at("size").get<int>()));
        return seats;
    }
    if (req.kind == "team_vote") {
        if (role == "Minion" || role == "Assassin") {
            for (const auto& member : req.args.at("team")) {
                const PlayerId id = member.get<PlayerId>();
                if (id == req.actor || detail::knows_evil(req, id)) return true;
            }
            return rng.bernoulli(0.3);
        }
        return rng.bernoulli(0.7);
    }
    if (req.kind == "quest_ballot") {
        if ((role == "Minion" || role == "Assassin") && rng.bernoulli(0.8)) return "fail";
        return "pass";
    }
    if (req.kind == "assassinate") {
        std::vector<PlayerId> suspects;
        for (PlayerId id : detail::living_others(req)) {
            if (!detail::knows_evil(req, id)) suspects.push_back(id);
        }
        return rng.pick(suspects);
    }
    if (req.kind == "seer_choice") {
        const double draw = rng.uniform_real();
        if (draw < 0.5) return json{{"kind", "player"}, {"target", rng.pick(detail::living_others(req))}};
        if (draw < 0.8) return json{{"kind", "center"}};
        return json{{"kind", "skip"}};
    }
    if (req.kind == "robber_choice") {
        if (rng.bernoulli(0.7))
            return json{{"kind", "swap"}, {"target", rng.pick(detail::living_others(req))}};
        return json{{"kind", "skip"}};
    }
    if (req.kind == "troublemaker_swap") {
        std::vector<PlayerId> others = detail::living_others(req);
        rng.shuffle(others);
        if (others.size() < 2) throw Error("troublemaker needs two other players");
        return json{{"a", others[0]}, {"b", others[1]}};
    }
    if (req.kind == "vote") return rng.pick(detail::living_others(req));
    throw Error("unknown action kind: " + req.kind);
}

// Deterministic decision tables keyed on the actor's view, with per-kind
// overrides from the spec's script object. Every arena behavior is
// reachable without a language model through these agents.
class ScriptedAgent final : public Agent {
public:
    explicit ScriptedAgent(AgentSpec spec) : Agent(std::move(spec)) {}

    json act(const ActionRequest& req, DeterministicRandomStream&) override {
        maybe_throw(req.kind);
        const json* over = override_for(req.kind);
        if (req.kind == "wolf_target") return over ? fixed_seat(*over) : detail::wolf_targets(req).front();
        if (req.kind == "protect") return pick_seat(req, over, req.actor);
        if (req.kind == "probe") {
            if (over) return fixed_seat(*over);
            const auto probed = detail::probed_targets(req);
            for (PlayerId id : detail::living_others(req)) {
                if (!probed.count(id)) return id;
            }
            return detail::living_others(req).front();
        }
        if (req.kind == "day_vote") {
            if (over && over->is_string() && over->get<std::string>() == "abstain") return nullptr;
            return pick_seat(req, over, detail::living_others(req).front());
        }
        if (req.kind == "propose_team") {
            if (over) return *over;
            std::vector<PlayerId> team{req.actor};
            for (PlayerId id : detail::living_others(req)) {
                if (static_cast<int>(team.size()) == req.args.at("size").get<int>()) break;
                team.push_back(id);
            }
            return team;
        }
        if (req.kind == "team_vote") {
            if (!over) return true;
            if (over->is_boolean()) return over->get<bool>();
            return over->get<std::string>() == "approve";
        }
        if (req.kind == "quest_ballot") {
            const std::string& role = req.view.private_view.role;
            const bool evil = role == "Minion" || role == "Assassin";
            if (over) return over->get<std::string>();
            return evil ? "fail" : "pass";
        }
        if (req.kind == "assassinate") {
            if (over) return fixed_seat(*over);
            for (PlayerId id : detail::living_others(req)) {
                if (!detail::knows_evil(req, id)) return id;
            }
            return detail::living_others(req).front();
        }
        if (req.kind == "seer_choice") {
            if (over && over->is_number_integer()) return json{{"kind", "player"}, {"target", *over}};
            const std::string choice = over ? over->get<std::string>() : "center";
            return json{{"kind", choice}};
        }
        if (req.kind == "robber_choice") {
            if (over && over->is_number_integer()) return json{{"kind", "swap"}, {"target", *over}};
            return json{{"kind", over ? over->get<std::string>() : "skip"}};
        }
        if (req.kind == "troublemaker_swap") {
            if (over && over->is_array()) return json{{"a", (*over)[0]}, {"b", (*over)[1]}};
            if (over) return *over;
            const auto others = detail::living_others(req);
            if (others.size() < 2) throw Error("troublemaker needs two other players");
            return json{{"a", others[0]}, {"b", others[1]}};
        }
        if (req.kind == "vote") return pick_seat(req, over, detail::living_others(req).front());
        throw Error("unknown action kind: " + req.kind);
    }

    SpeechTurn speak(const SpeakingContext&, bool, DeterministicRandomStream&) override {
        maybe_throw("speech");
        const json* over = override_for("speech");
        return SpeechTurn{std::nullopt, over ? over->get<std::string>() : "I have nothing to add.",
                          std::nullopt};
    }

private:
    const json* override_for(const std::string& kind) const {
        auto it = spec().script.find(kind);
        return it == spec().script.end() ? nullptr : &*it;
    }

    void maybe_throw(const std::string& kind) const {
        auto it = spec().script.find("throw_on");
        if (it != spec().script.end() && it->get<std::string>() == kind)
            throw Error("scripted failure at " + kind + ": " + id());
    }

    static PlayerId fixed_seat(const json& over) { return over.get<PlayerId>(); }

    // Fixed seat, a named selector, or the caller's default.
    json pick_seat(const ActionRequest& req, const json* over, PlayerId fallback) const {
        if (!over) return fallback;
        if (over->is_number_integer()) return fixed_seat(*over);
        const std::string sel = over->get<std::string>();
        if (sel == "self") return req.actor;
        if (sel == "lowest") return detail::living_others(req).front();
        if (sel == "highest") return detail::living_others(req).back();
        throw ConfigError("unknown seat selector: " + sel);
    }
};

namespace detail {

inline GenerationSettings agent_settings(DeterministicRandomStream& rng) {
    GenerationSettings s;
    s.temperature = 1.0;
    s.max_tokens = 64;
    s.rng = &rng;
    return s;
}

}  // namespace detail

// Backend base utterances are spoken verbatim; game decisions come from the
// shared baseline rules. The intent pair is recorded when asked and the
// turn has a follower, and a turn whose intent fails to parse is recorded
// without one rather than aborting the match.
class VanillaAgent : public Agent {
public:
    VanillaAgent(AgentSpec spec, std::shared_ptr<TextPolicy> backend)
        : Agent(std::move(spec)), backend_(std::move(backend)) {}

    json act(const ActionRequest& req, DeterministicRandomStream& rng) override {
        return rule_decision(req, rng);
    }

    SpeechTurn speak(const SpeakingContext& ctx, bool record_intent,
                     DeterministicRandomStream& rng) override {
        SpeechTurn turn;
        const auto settings = detail::agent_settings(rng);
        if (record_intent && ctx.next_speaker > 0) {
            try {
                turn.intent = identify_intent(ctx, *backend_, persuasion_, settings);
            } catch (const ParseError&) {
                turn.intent = std::nullopt;
            }
        }
        turn.base = generate_base(ctx, *backend_, persuasion_, settings);
        turn.final_text = finalize(ctx, *turn.base, rng);
        return turn;
    }

protected:
    virtual std::string finalize(const SpeakingContext&, const std::string& base,
                                 DeterministicRandomStream&) {
        return base;
    }

    TextPolicy& backend() { return *backend_; }
    const PersuasionConfig& persuasion() const { return persuasion_; }

private:
    std::shared_ptr<TextPolicy> backend_;
    PersuasionConfig persuasion_;
};

// Vanilla plus a refinement pass over the base utterance. Refinement falls
// back to the base on parse failure, so a weak refiner degrades to Vanilla
// instead of aborting matches.
class RefinedAgent final : public VanillaAgent {
public:
    RefinedAgent(AgentSpec spec, std::shared_ptr<TextPolicy> backend,
                 std::shared_ptr<TextPolicy> refiner)
        : VanillaAgent(std::move(spec), std::move(backend)), refiner_(std::move(refiner)) {}

private:
    std::string finalize(const SpeakingContext& ctx, const std::string& base,
                         DeterministicRandomStream& rng) override {
        return refine(ctx, base, *refiner_, persuasion(), detail::agent_settings(rng)).text;
    }

    std::shared_ptr<TextPolicy> refiner_;
};

// Builds per-match agent instances. Toy checkpoints named by the given
// specs are read once here and shared read-only across matches, so worker
// threads never touch the filesystem.
class AgentFactory {
public:
    AgentFactory() = default;

    explicit AgentFactory(const std::vector<AgentSpec>& specs) {
        for (const auto& spec : specs) preload(spec);
    }

    void preload(const AgentSpec& spec) {
        spec.validate();
        for (const auto& binding : {spec.backend, spec.refiner}) {
            if (binding.rfind("toy:", 0) == 0 && !toy_params_.count(binding)) {
                toy_params_.emplace(binding, read_checkpoint(binding.substr(4)).params);
            }
        }
    }

    std::unique_ptr<Agent> make(const AgentSpec& spec) const {
        spec.validate();
        switch (spec.framework) {
            case Framework::Scripted: return std::make_unique<ScriptedAgent>(spec);
            case Framework::Vanilla: return std::make_unique<VanillaAgent>(spec, policy(spec.backend));
            case Framework::Refined:
                return std::make_unique<RefinedAgent>(spec, policy(spec.backend), policy(spec.refiner));
        }
        throw Error("unknown framework");
    }

private:
    std::shared_ptr<TextPolicy> policy(const std::string& binding) const {
        auto it = toy_params_.find(binding);
        if (it != toy_params_.end()) return std::make_shared<ToyPolicy>(binding, it->second);
        return make_policy(binding);
    }

    std::map<std::string, ToyPolicyParams> toy_params_;
};

}  // namespace sdg::arena
