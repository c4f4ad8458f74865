#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sdg/arena/match_runner.hpp"
#include "sdg/core/match_log.hpp"
#include "sdg/core/rng.hpp"
#include "sdg/persuasion/instances.hpp"

namespace sdg::arena {

// Runs every plan, one match per entry, preserving plan order in the
// result. Workers pull plan indices from a shared counter; each match is
// self-contained, so the only shared write is each worker's own result
// slot. Aborted matches come back as flagged records, not errors.
inline std::vector<MatchRecord> run_plans(const std::vector<MatchPlan>& plans, int workers = 1) {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    AgentFactory factory;
    for (const auto& plan : plans) {
        for (const auto& spec : plan.seats) factory.preload(spec);
    }
    std::vector<MatchRecord> results(plans.size());
    if (workers == 1 || plans.size() < 2) {
        for (std::size_t i = 0; i < plans.size(); ++i) results[i] = run_match(plans[i], factory);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plans.size()) return;
            try {
                results[i] = run_match(plans[i], factory);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int n = std::min<int>(workers, static_cast<int>(plans.size()));
    for (int k = 0; k < n; ++k) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

struct SelfplayConfig {
    GameKind game = GameKind::Werewolf;
    int count = 500;
    std::vector<std::string> backends;  // policy bindings, sampled per seat
    std::uint64_t seed = 0;
    int round_cap = 20;
    int workers = 1;
    json config_echo = json::object();

    void validate() const {
        if (count < 0) throw ConfigError("selfplay count must be >= 0");
        if (backends.empty()) throw ConfigError("selfplay needs at least one backend");
        if (round_cap < 1) throw ConfigError("round cap must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
    }
};

// Seat-to-backend assignment is uniform with replacement over the pool,
// drawn from a single planning stream so the whole run is a pure function
// of the config. Per-match engine seeds are derived, not sequential.
inline std::vector<MatchPlan> plan_selfplay(const SelfplayConfig& config) {
    config.validate();
    DeterministicRandomStream plan_rng(config.seed);
    std::vector<MatchPlan> plans;
    plans.reserve(static_cast<std::size_t>(config.count));
    for (int i = 0; i < config.count; ++i) {
        MatchPlan plan;
        plan.game = config.game;
        plan.seed = DeterministicRandomStream::mix(config.seed, static_cast<std::uint64_t>(i));
        plan.match_id = std::string(to_string(config.game)) + "-" + std::to_string(config.seed) +
                        "-" + std::to_string(i);
        plan.round_cap = config.round_cap;
        plan.record_intents = true;
        plan.config_echo = config.config_echo;
        for (int seat = 0; seat < seats_for(config.game); ++seat) {
            const auto& binding = config.backends[plan_rng.uniform_int(config.backends.size())];
            AgentSpec spec;
            spec.id = binding;
            spec.framework = Framework::Vanilla;
            spec.backend = binding;
            plan.seats.push_back(std::move(spec));
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

inline std::vector<MatchRecord> generate_selfplay(const SelfplayConfig& config) {
    return run_plans(plan_selfplay(config), config.workers);
}

// Uniform sample without replacement from the pool of every extractable
// turn across the given logs, in draw order; sampling the full pool yields
// a permutation of it.
inline std::vector<TrainingInstance> extract_dataset(const std::vector<MatchRecord>& logs,
                                                     int sample_size, std::uint64_t seed,
                                                     ExtractStats* stats = nullptr) {
    if (sample_size < 0) throw ConfigError("sample size must be >= 0");
    std::vector<TrainingInstance> pool;
    for (const auto& record : logs) {
        auto instances = extract_all_instances(record, stats);
        for (auto& instance : instances) pool.push_back(std::move(instance));
    }
    if (static_cast<std::size_t>(sample_size) > pool.size()) {
        throw SampleExceedsPool("sample size " + std::to_string(sample_size) +
                                " exceeds instance pool " + std::to_string(pool.size()));
    }
    DeterministicRandomStream rng(seed);
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<TrainingInstance> out;
    out.reserve(static_cast<std::size_t>(sample_size));
    for (int k = 0; k < sample_size; ++k) {
        const std::size_t j = static_cast<std::size_t>(k) +
                              rng.uniform_int(order.size() - static_cast<std::size_t>(k));
        std::swap(order[static_cast<std::size_t>(k)], order[j]);
        out.push_back(pool[order[static_cast<std::size_t>(k)]]);
    }
    return out;
}

}  // namespace sdg::arena
