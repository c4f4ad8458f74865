#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/grpo/advantages.hpp"
#include "sdg/policy/chat.hpp"
#include "sdg/policy/policy.hpp"
#include "sdg/policy/toy_policy.hpp"

namespace sdg {

// Sequence-level importance ratio: exp of the candidate's score difference
// under the identical prompt. One scalar per candidate; never per token.
inline double importance_ratio(TextPolicy& current, TextPolicy& snapshot, const ChatPrompt& prompt,
                               const std::string& candidate) {
    if (!current.can_score() || !snapshot.can_score())
        throw UnsupportedCapability("importance ratio needs scoring policies");
    return std::exp(current.score(prompt, candidate).total - snapshot.score(prompt, candidate).total);
}

// Clipped surrogate term: min(rho * A, clip(rho, 1-eps, 1+eps) * A).
inline double clipped_term(double rho, double advantage, double epsilon) {
    if (epsilon <= 0.0 || epsilon >= 1.0) throw ConfigError("clip epsilon must lie in (0, 1)");
    const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(rho * advantage, clipped * advantage);
}

namespace detail {

// Every step-context visited while emitting the candidates' tokens after the
// prompt, duplicates kept: the penalty weights states by visitation.
inline std::vector<std::vector<int>> visited_contexts(const Vocabulary& vocab, const ChatPrompt& prompt,
                                                      const std::vector<std::string>& candidates) {
    std::vector<std::vector<int>> out;
    const std::vector<int> base = vocab.tokenize(prompt.flat_text());
    for (const auto& candidate : candidates) {
        std::vector<int> ctx = base;
        for (int id : vocab.tokenize(candidate)) {
            out.push_back(ctx);
            ctx.push_back(id);
        }
    }
    return out;
}

inline const ToyPolicy& as_enumerable(const TextPolicy& policy) {
    const auto* toy = dynamic_cast<const ToyPolicy*>(&policy);
    if (toy == nullptr)
        throw UnsupportedCapability(policy.name() + " has no enumerable next-token distribution");
    return *toy;
}

}  // namespace detail

// Exact categorical KL(policy || reference) averaged over the step-contexts
// visited by the candidates. Zero candidates (or all-empty ones) yield 0.
inline double kl_penalty(const TextPolicy& policy, const TextPolicy& reference, const ChatPrompt& prompt,
                         const std::vector<std::string>& candidates) {
    const ToyPolicy& cur = detail::as_enumerable(policy);
    const ToyPolicy& ref = detail::as_enumerable(reference);
    if (cur.vocab().tokens() != ref.vocab().tokens() || cur.params().window != ref.params().window)
        throw ConfigError("KL penalty needs a shared vocabulary and feature window");
    const auto contexts = detail::visited_contexts(cur.vocab(), prompt, candidates);
    if (contexts.empty()) return 0.0;
    double total = 0.0;
    for (const auto& ctx : contexts) {
        const auto logp = cur.next_token_logprobs(ctx);
        const auto logq = ref.next_token_logprobs(ctx);
        double kl = 0.0;
        for (std::size_t k = 0; k < logp.size(); ++k) kl += std::exp(logp[k]) * (logp[k] - logq[k]);
        total += kl;
    }
    return total / static_cast<double>(contexts.size());
}

struct GroupEvaluation {
    std::vector<double> ratios;
    std::vector<double> terms;   // clipped surrogate per candidate
    double surrogate = 0.0;      // mean of terms
    double kl = 0.0;
    double clip_fraction = 0.0;  // candidates where the clip bound set the term
    double objective = 0.0;      // surrogate - beta * kl
};

// J(theta) over one sampled group, with the per-candidate pieces exposed.
inline GroupEvaluation evaluate_group(ToyPolicy& current, ToyPolicy& snapshot, ToyPolicy& reference,
                                      const ChatPrompt& prompt, const std::vector<std::string>& candidates,
                                      const std::vector<double>& advantages, double epsilon, double beta) {
    if (candidates.size() != advantages.size())
        throw ConfigError("candidate and advantage counts must match");
    if (candidates.size() < 2) throw GroupTooSmall("objective needs a group of at least 2");
    if (beta < 0.0) throw ConfigError("KL weight must be >= 0");
    GroupEvaluation ev;
    int clipped = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double rho = importance_ratio(current, snapshot, prompt, candidates[i]);
        const double term = clipped_term(rho, advantages[i], epsilon);
        if (term != rho * advantages[i]) ++clipped;
        ev.ratios.push_back(rho);
        ev.terms.push_back(term);
        ev.surrogate += term;
    }
    ev.surrogate /= static_cast<double>(candidates.size());
    ev.clip_fraction = static_cast<double>(clipped) / static_cast<double>(candidates.size());
    ev.kl = kl_penalty(current, reference, prompt, candidates);
    ev.objective = ev.surrogate - beta * ev.kl;
    return ev;
}

// Analytic gradient of J in the current weights. The surrogate contributes
// A_i * rho_i * grad score(candidate_i) wherever the unclipped branch is the
// active minimum (the saturated branch is constant in theta); the penalty
// contributes, per visited context, outer(f, p * (log p - log q - KL)).
inline Matrix objective_gradient(ToyPolicy& current, ToyPolicy& snapshot, ToyPolicy& reference,
                                 const ChatPrompt& prompt, const std::vector<std::string>& candidates,
                                 const std::vector<double>& advantages, double epsilon, double beta) {
    if (candidates.size() != advantages.size())
        throw ConfigError("candidate and advantage counts must match");
    if (candidates.size() < 2) throw GroupTooSmall("objective needs a group of at least 2");
    const ToyPolicyParams& params = current.params();
    Matrix grad(params.feature_dim(), params.vocab.size());

    const double n = static_cast<double>(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double rho = importance_ratio(current, snapshot, prompt, candidates[i]);
        const double unclipped = rho * advantages[i];
        if (clipped_term(rho, advantages[i], epsilon) != unclipped) continue;
        grad.add_scaled(current.logprob_gradient(prompt, candidates[i]), advantages[i] * rho / n);
    }

    if (beta > 0.0) {
        const ToyPolicy& ref = detail::as_enumerable(reference);
        const auto contexts = detail::visited_contexts(params.vocab, prompt, candidates);
        if (!contexts.empty()) {
            Matrix kl_grad(params.feature_dim(), params.vocab.size());
            for (const auto& ctx : contexts) {
                const auto logp = current.next_token_logprobs(ctx);
                const auto logq = ref.next_token_logprobs(ctx);
                std::vector<double> p(logp.size());
                double kl = 0.0;
                for (std::size_t k = 0; k < logp.size(); ++k) {
                    p[k] = std::exp(logp[k]);
                    kl += p[k] * (logp[k] - logq[k]);
                }
                for (const auto& [row, count] : current.active_features(ctx)) {
                    for (std::size_t k = 0; k < p.size(); ++k)
                        kl_grad.at(row, static_cast<int>(k)) +=
                            count * p[k] * (logp[k] - logq[k] - kl);
                }
            }
            grad.add_scaled(kl_grad, -beta / static_cast<double>(contexts.size()));
        }
    }
    return grad;
}

}  // namespace sdg
