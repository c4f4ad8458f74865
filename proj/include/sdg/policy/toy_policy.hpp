#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sdg/core/errors.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/core/types.hpp"
#include "sdg/policy/chat.hpp"
#include "sdg/policy/policy.hpp"
#include "sdg/policy/tokenizer.hpp"

namespace sdg {

// Dense row-major matrix, just enough linear algebra for the toy model.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

    void add_scaled(const Matrix& other, double scale) {
        if (other.rows != rows || other.cols != cols) throw ConfigError("matrix shape mismatch");
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * other.a[i];
    }

    double max_abs_diff(const Matrix& other) const {
        if (other.rows != rows || other.cols != cols) throw ConfigError("matrix shape mismatch");
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - other.a[i]));
        return m;
    }
};

// Trainable softmax model over a closed vocabulary. Features are the counts
// of the last `window` context tokens plus a bias slot, so F = V + 1; the
// logits are f . W with W of shape F x V.
struct ToyPolicyParams {
    Vocabulary vocab;
    int window = 4;
    Matrix weights;

    static ToyPolicyParams zeros(Vocabulary v, int window = 4) {
        ToyPolicyParams p{std::move(v), window, Matrix()};
        p.weights = Matrix(p.feature_dim(), p.vocab.size());
        return p;
    }

    int feature_dim() const { return vocab.size() + 1; }
    int bias_row() const { return vocab.size(); }

    void validate() const {
        if (window < 1) throw ConfigError("feature window must be >= 1");
        if (weights.rows != feature_dim() || weights.cols != vocab.size())
            throw ConfigError("weight matrix must be (V+1) x V");
        for (double w : weights.a)
            if (!std::isfinite(w)) throw ConfigError("weights must be finite");
    }

    json to_json() const {
        return {{"tokens", vocab.tokens()}, {"window", window}, {"weights", weights.a}};
    }

    static ToyPolicyParams from_json(const json& j) {
        Vocabulary v(j.at("tokens").get<std::vector<std::string>>());
        ToyPolicyParams p = zeros(std::move(v), j.at("window").get<int>());
        auto w = j.at("weights").get<std::vector<double>>();
        if (w.size() != p.weights.a.size()) throw ConfigError("checkpoint weight count mismatch");
        p.weights.a = std::move(w);
        p.validate();
        return p;
    }
};

class ToyPolicy final : public TextPolicy {
  public:
    ToyPolicy(std::string name, ToyPolicyParams params) : name_(std::move(name)), params_(std::move(params)) {
        params_.validate();
    }

    std::string name() const override { return name_; }
    bool can_score() const override { return true; }
    bool labeled_output() const override { return false; }

    const ToyPolicyParams& params() const { return params_; }
    ToyPolicyParams& mutable_params() { return params_; }
    const Vocabulary& vocab() const { return params_.vocab; }

    // Nonzero feature entries as (row, count) pairs: the token bag over the
    // last `window` context tokens, then the bias row with count 1.
    std::vector<std::pair<int, double>> active_features(const std::vector<int>& context) const {
        std::vector<std::pair<int, double>> f;
        std::size_t take = std::min<std::size_t>(context.size(), static_cast<std::size_t>(params_.window));
        for (std::size_t i = context.size() - take; i < context.size(); ++i) {
            int id = context[i];
            bool merged = false;
            for (auto& [row, count] : f)
                if (row == id) {
                    count += 1.0;
                    merged = true;
                    break;
                }
            if (!merged) f.emplace_back(id, 1.0);
        }
        f.emplace_back(params_.bias_row(), 1.0);
        return f;
    }

    std::vector<double> logits(const std::vector<int>& context) const {
        const int v = params_.vocab.size();
        std::vector<double> z(static_cast<std::size_t>(v), 0.0);
        for (const auto& [row, count] : active_features(context))
            for (int c = 0; c < v; ++c) z[c] += count * params_.weights.at(row, c);
        return z;
    }

    std::vector<double> next_token_logprobs(const std::vector<int>& context, double temperature = 1.0) const {
        std::vector<double> z = logits(context);
        if (temperature != 1.0)
            for (double& x : z) x /= temperature;
        double m = z[0];
        for (double x : z) m = std::max(m, x);
        double lse = 0.0;
        for (double x : z) lse += std::exp(x - m);
        lse = m + std::log(lse);
        for (double& x : z) x -= lse;
        return z;
    }

    std::vector<double> next_token_distribution(const std::vector<int>& context, double temperature = 1.0) const {
        std::vector<double> p = next_token_logprobs(context, temperature);
        for (double& x : p) x = std::exp(x);
        return p;
    }

    // Joint log-probability of exactly the target's tokens conditioned on the
    // flattened prompt plus the preceding target tokens. Empty target: 0.
    ScoredSequence score(const ChatPrompt& prompt, const std::string& target) override {
        std::vector<int> ctx = params_.vocab.tokenize(prompt.flat_text());
        ScoredSequence out;
        for (int id : params_.vocab.tokenize(target)) {
            std::vector<double> lp = next_token_logprobs(ctx);
            out.tokens.push_back(params_.vocab.token(id));
            out.logprobs.push_back(lp[static_cast<std::size_t>(id)]);
            out.total += lp[static_cast<std::size_t>(id)];
            ctx.push_back(id);
        }
        return out;
    }

    // Raw fixed-length sampling with no end-of-sequence stop; the coherence
    // oracle needs exact length-L sequence frequencies, eos draws included.
    std::vector<int> sample_tokens(const ChatPrompt& prompt, int count, double temperature,
                                   DeterministicRandomStream& rng) const {
        std::vector<int> ctx = params_.vocab.tokenize(prompt.flat_text());
        std::vector<int> made;
        for (int i = 0; i < count; ++i) {
            int id = draw(ctx, temperature, rng);
            made.push_back(id);
            ctx.push_back(id);
        }
        return made;
    }

    GenerationResult generate(const ChatPrompt& prompt, const GenerationSettings& settings) override {
        settings.validate();
        if (settings.rng == nullptr) throw ConfigError("toy generation needs a random stream");
        std::vector<int> ctx = params_.vocab.tokenize(prompt.flat_text());
        std::vector<int> made;
        bool ended = false;
        for (int i = 0; i < settings.max_tokens; ++i) {
            int id = draw(ctx, settings.temperature, *settings.rng);
            if (id == params_.vocab.eos_id()) {
                ended = true;
                break;
            }
            made.push_back(id);
            ctx.push_back(id);
        }
        return {params_.vocab.detokenize(made), !ended};
    }

    // Exact gradient of score(prompt, target).total in the weights:
    // d lp_t / d W[r][c] = f_r * (1{c=t} - p_c) summed over target steps.
    Matrix logprob_gradient(const ChatPrompt& prompt, const std::string& target) const {
        Matrix g(params_.feature_dim(), params_.vocab.size());
        std::vector<int> ctx = params_.vocab.tokenize(prompt.flat_text());
        for (int id : params_.vocab.tokenize(target)) {
            std::vector<double> p = next_token_distribution(ctx);
            for (const auto& [row, count] : active_features(ctx)) {
                for (int c = 0; c < params_.vocab.size(); ++c) g.at(row, c) -= count * p[static_cast<std::size_t>(c)];
                g.at(row, id) += count;
            }
            ctx.push_back(id);
        }
        return g;
    }

  private:
    int draw(const std::vector<int>& context, double temperature, DeterministicRandomStream& rng) const {
        std::vector<double> p = next_token_distribution(context, temperature);
        double u = rng.uniform_real();
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            acc += p[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(p.size()) - 1;  // float round-off guard
    }

    std::string name_;
    ToyPolicyParams params_;
};

}  // namespace sdg
