#ifndef PMATCH_TESTS_SUPPORT_HPP
#define PMATCH_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "pmatch/market.hpp"
#include "pmatch/rng.hpp"

namespace pmatch::testing {

// Explicit instance from hand-written lists. Job lists must already mention
// exactly the candidates that list them.
inline MarketInstance make_market(std::vector<std::vector<AgentId>> candidate_lists,
                                  std::vector<std::vector<AgentId>> job_lists) {
    MarketInstance inst;
    inst.candidates = candidate_lists.size();
    inst.jobs = job_lists.size();
    inst.config.n = inst.jobs;
    inst.config.alpha = 0.0;
    inst.config.model = Model::Symmetric;
    inst.candidate_lists = std::move(candidate_lists);
    inst.job_lists = std::move(job_lists);
    return inst;
}

// Random small instance: arbitrary bipartite edge set, independent uniform
// orders on both sides. Covers shapes the three sampling models do not.
inline MarketInstance random_small_market(Rng& rng, std::size_t max_side = 6) {
    const std::size_t m = 1 + rng.below(max_side);
    const std::size_t n = 1 + rng.below(max_side);
    const double p = 0.2 + 0.8 * rng.uniform();
    std::vector<std::vector<AgentId>> cl(m), jl(n);
    for (std::size_t c = 0; c < m; ++c)
        for (std::size_t j = 0; j < n; ++j)
            if (rng.bernoulli(p)) {
                cl[c].push_back(static_cast<AgentId>(j));
                jl[j].push_back(static_cast<AgentId>(c));
            }
    for (auto& l : cl) rng.shuffle(std::span(l));
    for (auto& l : jl) rng.shuffle(std::span(l));
    return make_market(std::move(cl), std::move(jl));
}

// Random small config drawn from one of the three models.
inline MarketConfig random_small_config(Rng& rng, std::uint64_t seed) {
    MarketConfig cfg;
    cfg.n = 1 + rng.below(5);
    const double alphas[] = {0.0, 0.2, 0.5};
    cfg.alpha = alphas[rng.below(3)];
    while (cfg.num_candidates() > 6) cfg.alpha = 0.0;
    cfg.d = 1.0 + static_cast<double>(rng.below(cfg.n));
    const Model models[] = {Model::Symmetric, Model::CandidateLists, Model::JobLists};
    cfg.model = models[rng.below(3)];
    cfg.seed = seed;
    return cfg;
}

inline std::vector<AgentId> random_order(Rng& rng, std::size_t size) {
    std::vector<AgentId> order(size);
    for (std::size_t i = 0; i < size; ++i) order[i] = static_cast<AgentId>(i);
    rng.shuffle(std::span(order));
    return order;
}

}  // namespace pmatch::testing

#endif  // PMATCH_TESTS_SUPPORT_HPP
