#pragma once

#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sdg/arena/match_runner.hpp"
#include "sdg/arena/selfplay.hpp"
#include "sdg/core/match_log.hpp"
#include "sdg/core/rng.hpp"

namespace sdg::arena {

// The side a seat fought for. Werewolf and Avalon teams follow the dealt
// role; in the one-night game the card a player HOLDS at the vote decides
// the team, so swapped players count for their final card's side.
inline Team seat_team(const MatchRecord& record, PlayerId seat) {
    const std::string role = record.role_of(seat);
    switch (record.game) {
        case GameKind::Werewolf: return role == "Werewolf" ? Team::Werewolf : Team::Village;
        case GameKind::Avalon:
            return role == "Minion" || role == "Assassin" ? Team::Evil : Team::Good;
        case GameKind::Onuw: {
            for (const auto& event : record.events) {
                if (event.kind != "final_roles") continue;
                const std::string final_role =
                    event.payload.at("roles").at(std::to_string(seat)).get<std::string>();
                return final_role == "Werewolf" ? Team::Werewolf : Team::Village;
            }
            return role == "Werewolf" ? Team::Werewolf : Team::Village;
        }
    }
    throw Error("unknown game kind");
}

struct TeamStats {
    long participation = 0;
    long wins = 0;

    double win_rate() const {
        return participation == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(participation);
    }

    json to_json() const {
        return json{{"participation", participation}, {"wins", wins}, {"win_rate", win_rate()}};
    }

    static TeamStats from_json(const json& j) {
        return TeamStats{j.at("participation").get<long>(), j.at("wins").get<long>()};
    }
};

struct AgentReport {
    std::map<std::string, TeamStats> teams;  // keyed by team name

    TeamStats overall() const {
        TeamStats total;
        for (const auto& [_, stats] : teams) {
            total.participation += stats.participation;
            total.wins += stats.wins;
        }
        return total;
    }
};

struct TournamentReport {
    GameKind game = GameKind::Werewolf;
    std::uint64_t seed = 0;
    int matches = 0;    // requested
    int completed = 0;  // counted in the statistics
    int aborted = 0;    // flagged and excluded
    std::map<std::string, AgentReport> agents;

    long total_participation() const {
        long total = 0;
        for (const auto& [_, agent] : agents) total += agent.overall().participation;
        return total;
    }

    json to_json() const {
        json agents_j = json::object();
        for (const auto& [id, agent] : agents) {
            json teams_j = json::object();
            for (const auto& [team, stats] : agent.teams) teams_j[team] = stats.to_json();
            agents_j[id] = json{{"teams", teams_j}, {"overall", agent.overall().to_json()}};
        }
        return json{{"game", to_string(game)}, {"seed", seed},       {"matches", matches},
                    {"completed", completed},  {"aborted", aborted}, {"agents", agents_j}};
    }

    static TournamentReport from_json(const json& j) {
        TournamentReport r;
        r.game = game_kind_from_string(j.at("game").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        r.matches = j.at("matches").get<int>();
        r.completed = j.at("completed").get<int>();
        r.aborted = j.at("aborted").get<int>();
        for (const auto& [id, agent_j] : j.at("agents").items()) {
            AgentReport agent;
            for (const auto& [team, stats_j] : agent_j.at("teams").items()) {
                agent.teams[team] = TeamStats::from_json(stats_j);
            }
            r.agents[id] = std::move(agent);
        }
        return r;
    }

    // Plain-text summary: participation and win rate per team, then pooled.
    std::string render_table() const {
        const auto [first, second] = team_sides(game);
        const std::string a = to_string(first);
        const std::string b = to_string(second);
        std::ostringstream out;
        out << to_string(game) << " tournament: " << matches << " matches, " << completed
            << " completed, " << aborted << " aborted, seed " << seed << "\n";
        out << std::left << std::setw(24) << "agent";
        for (const std::string& team : {a, b, std::string("overall")}) {
            out << std::right << std::setw(14) << team + " n" << std::setw(14) << team + " win";
        }
        out << "\n";
        for (const auto& [id, agent] : agents) {
            out << std::left << std::setw(24) << id;
            for (const std::string& team : {a, b}) {
                TeamStats stats;
                if (auto it = agent.teams.find(team); it != agent.teams.end()) stats = it->second;
                out << std::right << std::setw(14) << stats.participation << std::setw(14)
                    << std::fixed << std::setprecision(3) << stats.win_rate();
            }
            const TeamStats total = agent.overall();
            out << std::right << std::setw(14) << total.participation << std::setw(14)
                << std::fixed << std::setprecision(3) << total.win_rate() << "\n";
        }
        return out.str();
    }
};

struct TournamentConfig {
    GameKind game = GameKind::Werewolf;
    int matches = 500;
    std::uint64_t seed = 0;
    int round_cap = 20;
    int workers = 1;
    bool record_intents = false;
    json config_echo = json::object();

    void validate() const {
        if (matches < 0) throw ConfigError("match count must be >= 0");
        if (round_cap < 1) throw ConfigError("round cap must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
    }
};

// Seat sampling is uniform with replacement: one agent can hold several
// seats in one match. All sampling flows from one planning stream.
inline std::vector<MatchPlan> plan_tournament(const std::vector<AgentSpec>& pool,
                                              const TournamentConfig& config) {
    config.validate();
    if (pool.empty()) throw ConfigError("tournament needs a non-empty agent pool");
    for (const auto& spec : pool) spec.validate();
    DeterministicRandomStream plan_rng(config.seed);
    std::vector<MatchPlan> plans;
    plans.reserve(static_cast<std::size_t>(config.matches));
    for (int i = 0; i < config.matches; ++i) {
        MatchPlan plan;
        plan.game = config.game;
        plan.seed = DeterministicRandomStream::mix(config.seed, static_cast<std::uint64_t>(i));
        plan.match_id = std::string(to_string(config.game)) + "-" + std::to_string(config.seed) +
                        "-" + std::to_string(i);
        plan.round_cap = config.round_cap;
        plan.record_intents = config.record_intents;
        plan.config_echo = config.config_echo;
        for (int seat = 0; seat < seats_for(config.game); ++seat) {
            plan.seats.push_back(pool[plan_rng.uniform_int(pool.size())]);
        }
        plans.push_back(std::move(plan));
    }
    return plans;
}

// Folds finished matches into the report. Aborted matches are counted and
// excluded from every statistic; participation therefore sums to
// completed matches times seats, exactly.
inline TournamentReport tally_tournament(const std::vector<AgentSpec>& pool,
                                         const TournamentConfig& config,
                                         const std::vector<MatchRecord>& records) {
    TournamentReport report;
    report.game = config.game;
    report.seed = config.seed;
    report.matches = static_cast<int>(records.size());
    const auto [first, second] = team_sides(config.game);
    for (const auto& spec : pool) {
        report.agents[spec.id].teams[to_string(first)] = TeamStats{};
        report.agents[spec.id].teams[to_string(second)] = TeamStats{};
    }
    for (const auto& record : records) {
        if (record.aborted()) {
            report.aborted += 1;
            continue;
        }
        report.completed += 1;
        for (const auto& player : record.players) {
            const Team team = seat_team(record, player.id);
            TeamStats& stats = report.agents[player.agent].teams[to_string(team)];
            stats.participation += 1;
            if (record.winner && *record.winner == team) stats.wins += 1;
        }
    }
    return report;
}

inline TournamentReport run_tournament(const std::vector<AgentSpec>& pool,
                                       const TournamentConfig& config) {
    const auto records = run_plans(plan_tournament(pool, config), config.workers);
    return tally_tournament(pool, config, records);
}

// Initial-deal side of every seat; pure in (game, seed) because the deal
// is. Used to bind whole teams to one agent before the match runs.
inline std::vector<Team> initial_teams(GameKind game, std::uint64_t seed) {
    std::vector<Team> teams;
    switch (game) {
        case GameKind::Werewolf: {
            auto g = werewolf::Game::setup(seed);
            for (PlayerId id = 1; id <= werewolf::Game::player_count; ++id) {
                teams.push_back(g.role_of(id) == werewolf::Role::Werewolf ? Team::Werewolf
                                                                          : Team::Village);
            }
            return teams;
        }
        case GameKind::Avalon: {
            auto g = avalon::Game::setup(seed);
            for (PlayerId id = 1; id <= avalon::Game::player_count; ++id) {
                teams.push_back(avalon::is_evil(g.role_of(id)) ? Team::Evil : Team::Good);
            }
            return teams;
        }
        case GameKind::Onuw: {
            auto g = onuw::Game::setup(seed);
            for (PlayerId id = 1; id <= onuw::Game::player_count; ++id) {
                teams.push_back(onuw::team_of(g.initial_role(id)));
            }
            return teams;
        }
    }
    throw Error("unknown game kind");
}

struct TeamEvalConfig {
    GameKind game = GameKind::Werewolf;
    Team side = Team::Village;
    int matches = 50;
    std::uint64_t seed = 0;
    int round_cap = 20;
    int workers = 1;
    json config_echo = json::object();

    void validate() const {
        if (matches < 0) throw ConfigError("match count must be >= 0");
        if (round_cap < 1) throw ConfigError("round cap must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        const auto [first, second] = team_sides(game);
        if (side != first && side != second)
            throw ConfigError(std::string("side ") + to_string(side) + " does not play " +
                              to_string(game));
    }
};

struct TeamEvalReport {
    GameKind game = GameKind::Werewolf;
    Team side = Team::Village;
    std::string variant;
    std::string opponent;
    std::uint64_t seed = 0;
    int matches = 0;
    int completed = 0;
    int aborted = 0;
    int wins = 0;  // matches the variant's side won

    double win_rate() const {
        return completed == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(completed);
    }

    json to_json() const {
        return json{{"game", to_string(game)},   {"side", to_string(side)},
                    {"variant", variant},        {"opponent", opponent},
                    {"seed", seed},              {"matches", matches},
                    {"completed", completed},    {"aborted", aborted},
                    {"wins", wins},              {"win_rate", win_rate()}};
    }

    static TeamEvalReport from_json(const json& j) {
        TeamEvalReport r;
        r.game = game_kind_from_string(j.at("game").get<std::string>());
        r.side = team_from_string(j.at("side").get<std::string>());
        r.variant = j.at("variant").get<std::string>();
        r.opponent = j.at("opponent").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.matches = j.at("matches").get<int>();
        r.completed = j.at("completed").get<int>();
        r.aborted = j.at("aborted").get<int>();
        r.wins = j.at("wins").get<int>();
        return r;
    }
};

// Every seat dealt onto the chosen side plays the variant agent, everyone
// else the opponent; the report scores the variant's side.
inline TeamEvalReport run_team_eval(const AgentSpec& variant, const AgentSpec& opponent,
                                    const TeamEvalConfig& config) {
    config.validate();
    variant.validate();
    opponent.validate();
    std::vector<MatchPlan> plans;
    plans.reserve(static_cast<std::size_t>(config.matches));
    for (int i = 0; i < config.matches; ++i) {
        MatchPlan plan;
        plan.game = config.game;
        plan.seed = DeterministicRandomStream::mix(config.seed, static_cast<std::uint64_t>(i));
        plan.match_id = std::string(to_string(config.game)) + "-" + std::to_string(config.seed) +
                        "-" + std::to_string(i);
        plan.round_cap = config.round_cap;
        plan.config_echo = config.config_echo;
        for (Team team : initial_teams(config.game, plan.seed)) {
            plan.seats.push_back(team == config.side ? variant : opponent);
        }
        plans.push_back(std::move(plan));
    }
    const auto records = run_plans(plans, config.workers);

    TeamEvalReport report;
    report.game = config.game;
    report.side = config.side;
    report.variant = variant.id;
    report.opponent = opponent.id;
    report.seed = config.seed;
    report.matches = static_cast<int>(records.size());
    for (const auto& record : records) {
        if (record.aborted()) {
            report.aborted += 1;
            continue;
        }
        report.completed += 1;
        if (record.winner && *record.winner == config.side) report.wins += 1;
    }
    return report;
}

}  // namespace sdg::arena
