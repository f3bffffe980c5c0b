#ifndef PMATCH_EXPERIMENTS_HPP
#define PMATCH_EXPERIMENTS_HPP

/*
 * Monte Carlo experiments over the random market models.
 *
 * Trial i of an experiment seeded with s runs on derive_seed(s, i); a sweep
 * point at degree d uses derive_seed(s, bits(d)) as its experiment seed.
 * Results are folded in trial order, so every number here is a pure function
 * of the inputs regardless of the worker count.
 *
 * By the Lone Wolf property the DA output is perfect exactly when every
 * stable matching is, so a single DA run per trial decides perfection.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "pmatch/da.hpp"
#include "pmatch/error.hpp"
#include "pmatch/market.hpp"
#include "pmatch/parallel.hpp"
#include "pmatch/rng.hpp"
#include "pmatch/stability.hpp"
#include "pmatch/stats.hpp"

namespace pmatch {

// ln n * ln((1 + alpha) / (alpha + 1 / (n (1 + alpha)))); ln^2 n when alpha = 0.
inline double predicted_threshold(double n, double alpha) {
    if (!(n > 1.0)) throw ParameterError("predicted threshold needs n > 1");
    if (!(alpha >= 0.0)) throw ParameterError("alpha must be >= 0");
    return std::log(n) * std::log((1.0 + alpha) / (alpha + 1.0 / (n * (1.0 + alpha))));
}

// d / ln((1 + alpha) / (alpha + 1 / (n (1 + alpha)))): the asymptotic lower
// bound on the candidates' mean best-stable rank.
inline double rank_lower_bound(double n, double alpha, double d) {
    return d / std::log((1.0 + alpha) / (alpha + 1.0 / (n * (1.0 + alpha))));
}

struct PerfectEstimate {
    std::uint64_t trials = 0;
    std::uint64_t perfect = 0;
    double fraction = 0.0;
    Interval ci;
};

inline PerfectEstimate estimate_perfect_prob(const MarketConfig& config, ProposingSide side, std::uint64_t trials,
                                             std::size_t workers = 1) {
    config.validate();
    if (trials < 1) throw ParameterError("trials must be at least 1");
    auto perfect = run_indexed(trials, workers, [&](std::size_t i) -> std::uint8_t {
        MarketConfig cfg = config;
        cfg.seed = derive_seed(config.seed, i);
        return is_perfect(run_da_sampled(cfg, side, false)) ? 1 : 0;
    });
    PerfectEstimate est;
    est.trials = trials;
    for (auto p : perfect) est.perfect += p;
    est.fraction = static_cast<double>(est.perfect) / static_cast<double>(trials);
    est.ci = wilson_interval(est.perfect, trials);
    return est;
}

struct SweepPoint {
    double d = 0.0;
    std::uint64_t trials = 0;
    double perfect_fraction = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct SweepSpec {
    std::size_t n = 0;
    double alpha = 0.0;
    Model model = Model::CandidateLists;
    ProposingSide side = ProposingSide::CPDA;
    std::uint64_t seed = 0;
    std::uint64_t trials = 100;
    std::size_t workers = 1;
    // Grid mode when non-empty; bisection on [lo, hi] otherwise.
    std::vector<double> grid;
    double lo = 0.0;
    double hi = 0.0;
    double relative_width = 0.05;
};

struct SweepResult {
    std::vector<SweepPoint> grid;  // sorted by d
    double predicted_d0 = 0.0;
    std::optional<double> empirical_d0;
    // Consecutive grid pairs whose fractions drop with disjoint intervals.
    std::vector<std::pair<double, double>> monotonicity_violations;
    std::size_t n = 0;
    double alpha = 0.0;
    Model model = Model::CandidateLists;
    ProposingSide side = ProposingSide::CPDA;
    std::uint64_t seed = 0;
};

// 0.5 crossing by linear interpolation between the first grid point with
// fraction >= 0.5 and its predecessor.
inline std::optional<double> interpolate_crossing(const std::vector<SweepPoint>& grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i].perfect_fraction < 0.5) continue;
        if (i == 0) return grid[0].perfect_fraction == 0.5 ? std::optional<double>(grid[0].d) : std::nullopt;
        const SweepPoint& a = grid[i - 1];
        const SweepPoint& b = grid[i];
        return a.d + (0.5 - a.perfect_fraction) * (b.d - a.d) / (b.perfect_fraction - a.perfect_fraction);
    }
    return std::nullopt;
}

inline std::vector<std::pair<double, double>> find_monotonicity_violations(const std::vector<SweepPoint>& grid) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i].ci_high < grid[i - 1].ci_low) out.emplace_back(grid[i - 1].d, grid[i].d);
    return out;
}

inline SweepPoint evaluate_sweep_point(const SweepSpec& spec, double d) {
    MarketConfig cfg;
    cfg.n = spec.n;
    cfg.alpha = spec.alpha;
    cfg.d = d;
    cfg.model = spec.model;
    cfg.seed = derive_seed(spec.seed, std::bit_cast<std::uint64_t>(d));
    const PerfectEstimate est = estimate_perfect_prob(cfg, spec.side, spec.trials, spec.workers);
    return {d, est.trials, est.fraction, est.ci.lo, est.ci.hi};
}

inline SweepResult sweep_threshold(const SweepSpec& spec) {
    SweepResult out;
    out.n = spec.n;
    out.alpha = spec.alpha;
    out.model = spec.model;
    out.side = spec.side;
    out.seed = spec.seed;
    out.predicted_d0 = predicted_threshold(static_cast<double>(spec.n), spec.alpha);

    if (!spec.grid.empty()) {
        std::vector<double> ds = spec.grid;
        std::sort(ds.begin(), ds.end());
        ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
        for (double d : ds) out.grid.push_back(evaluate_sweep_point(spec, d));
        out.empirical_d0 = interpolate_crossing(out.grid);
    } else {
        if (!(spec.lo > 0.0 && spec.hi > spec.lo)) throw ParameterError("bisection needs 0 < lo < hi");
        if (!(spec.relative_width > 0.0)) throw ParameterError("bisection relative width must be positive");
        SweepPoint lo = evaluate_sweep_point(spec, spec.lo);
        SweepPoint hi = evaluate_sweep_point(spec, spec.hi);
        out.grid = {lo, hi};
        if (lo.perfect_fraction < 0.5 && hi.perfect_fraction >= 0.5) {
            while ((hi.d - lo.d) / (0.5 * (hi.d + lo.d)) > spec.relative_width) {
                SweepPoint mid = evaluate_sweep_point(spec, 0.5 * (lo.d + hi.d));
                out.grid.push_back(mid);
                (mid.perfect_fraction < 0.5 ? lo : hi) = mid;
            }
            out.empirical_d0 =
                lo.d + (0.5 - lo.perfect_fraction) * (hi.d - lo.d) / (hi.perfect_fraction - lo.perfect_fraction);
        }
        std::sort(out.grid.begin(), out.grid.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.d < b.d; });
    }
    out.monotonicity_violations = find_monotonicity_violations(out.grid);
    return out;
}

struct RankProfile {
    std::vector<double> per_trial_mean_rank;
    double mean_rank = 0.0;
    double bound = 0.0;
    double unmatched_fraction = 0.0;  // unmatched candidates / (m * trials)
    std::uint64_t unmatched_candidates = 0;
    std::size_t n = 0;
    double alpha = 0.0;
    double d = 0.0;
    std::uint64_t trials = 0;
};

// Mean best-stable rank of the candidates. CPDA is candidate-optimal, so a
// matched candidate's CPDA partner is its best stable partner; since its final
// proposal is the accepted one, that rank equals its proposal count.
inline RankProfile measure_rank_profile(const MarketConfig& config, std::uint64_t trials, std::size_t workers = 1) {
    config.validate();
    if (config.model != Model::CandidateLists) throw ParameterError("rank profile needs the candidate-lists model");
    if (trials < 1) throw ParameterError("trials must be at least 1");
    struct TrialRanks {
        double mean = 0.0;
        std::uint64_t unmatched = 0;
    };
    const std::size_t list_len = config.candidate_list_length();
    auto per_trial = run_indexed(trials, workers, [&](std::size_t i) {
        MarketConfig cfg = config;
        cfg.seed = derive_seed(config.seed, i);
        const DAResult r = run_da_lazy(cfg, ProposingSide::CPDA, false);
        TrialRanks t;
        std::uint64_t sum = 0, matched = 0;
        for (std::size_t c = 0; c < r.candidate_partner.size(); ++c) {
            if (r.candidate_partner[c] == kNoAgent) {
                ++t.unmatched;
                continue;
            }
            const std::uint32_t rank = r.proposals_made[c];
            if (rank < 1 || rank > list_len) throw InvariantViolation("candidate rank outside [1, list length]");
            sum += rank;
            ++matched;
        }
        t.mean = matched ? static_cast<double>(sum) / static_cast<double>(matched) : 0.0;
        return t;
    });

    RankProfile p;
    p.n = config.n;
    p.alpha = config.alpha;
    p.d = config.d;
    p.trials = trials;
    p.bound = rank_lower_bound(static_cast<double>(config.n), config.alpha, config.d);
    double total = 0.0;
    for (const auto& t : per_trial) {
        p.per_trial_mean_rank.push_back(t.mean);
        total += t.mean;
        p.unmatched_candidates += t.unmatched;
    }
    p.mean_rank = total / static_cast<double>(trials);
    p.unmatched_fraction = static_cast<double>(p.unmatched_candidates) /
                           (static_cast<double>(config.num_candidates()) * static_cast<double>(trials));
    return p;
}

}  // namespace pmatch

#endif  // PMATCH_EXPERIMENTS_HPP
