#ifndef PMATCH_DA_HPP
#define PMATCH_DA_HPP

/*
 * Deferred acceptance.
 *
 * The engine follows the textbook loop: the unmatched, non-exhausted proposer
 * with the lowest order index proposes to the best entry on its list it has
 * not tried yet; the receiver keeps the better of its current partner and the
 * new proposer. Because a rejected or displaced proposer always has the lowest
 * index among agents still able to propose, the loop below walks the order
 * once and follows each rejection chain to its end before moving on.
 *
 * Preferences come from an oracle. Explicit instances use their lists; the
 * lazy oracles reveal the next list entry uniformly among receivers not yet
 * tried and draw the receiver's priority for a proposer at first contact.
 */

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pmatch/error.hpp"
#include "pmatch/market.hpp"
#include "pmatch/rng.hpp"

namespace pmatch {

enum class ProposingSide { CPDA, JPDA };

inline std::string_view to_string(ProposingSide side) { return side == ProposingSide::CPDA ? "cpda" : "jpda"; }

inline ProposingSide parse_proposing_side(std::string_view text) {
    if (text == "cpda" || text == "CPDA" || text == "candidates") return ProposingSide::CPDA;
    if (text == "jpda" || text == "JPDA" || text == "jobs") return ProposingSide::JPDA;
    throw ParameterError("unknown side '" + std::string(text) + "' (expected cpda or jpda)");
}

inline constexpr Side proposer_side(ProposingSide side) {
    return side == ProposingSide::CPDA ? Side::Candidates : Side::Jobs;
}
inline constexpr Side receiver_side(ProposingSide side) { return opposite(proposer_side(side)); }

enum class Outcome : std::uint8_t { AcceptedFree, AcceptedDisplacing, Rejected };

inline std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::AcceptedFree: return "accepted_free";
        case Outcome::AcceptedDisplacing: return "accepted_displacing";
        case Outcome::Rejected: return "rejected";
    }
    return "?";
}

struct ProposalEvent {
    std::uint64_t t = 0;  // 1-based
    AgentId proposer = kNoAgent;
    AgentId proposee = kNoAgent;
    Outcome outcome = Outcome::Rejected;
    AgentId displaced = kNoAgent;  // set for AcceptedDisplacing only

    bool operator==(const ProposalEvent&) const = default;
};

struct DAResult {
    ProposingSide side = ProposingSide::CPDA;
    std::vector<AgentId> job_partner;        // per job, kNoAgent when unmatched
    std::vector<AgentId> candidate_partner;  // per candidate
    bool trace_recorded = false;
    std::vector<ProposalEvent> proposal_log;
    std::vector<std::uint32_t> proposals_made;      // per proposer
    std::vector<std::uint32_t> proposals_received;  // per receiver
    std::vector<AgentId> unmatched_proposers;       // ascending
    std::vector<AgentId> unmatched_receivers;       // ascending
    std::uint64_t total_proposals = 0;

    std::size_t matched_count() const {
        return static_cast<std::size_t>(
            std::count_if(job_partner.begin(), job_partner.end(), [](AgentId a) { return a != kNoAgent; }));
    }
    std::size_t num_jobs() const { return job_partner.size(); }
    std::size_t num_candidates() const { return candidate_partner.size(); }
    const std::vector<AgentId>& partners(Side side) const {
        return side == Side::Candidates ? candidate_partner : job_partner;
    }
};

struct DAOptions {
    bool record_trace = true;
    // Proposer order; empty means id order.
    std::span<const AgentId> order = {};
};

namespace detail {

template <class Oracle>
DAResult deferred_acceptance(Oracle& oracle, ProposingSide side, std::size_t proposers, std::size_t receivers,
                             std::span<const AgentId> order, bool record_trace) {
    DAResult result;
    result.side = side;
    result.trace_recorded = record_trace;
    result.proposals_made.assign(proposers, 0);
    result.proposals_received.assign(receivers, 0);

    std::vector<AgentId> held(receivers, kNoAgent);
    std::vector<double> held_score(receivers, 0.0);
    std::vector<AgentId> partner(proposers, kNoAgent);
    const std::uint64_t cap = static_cast<std::uint64_t>(proposers) * static_cast<std::uint64_t>(receivers);
    std::uint64_t t = 0;

    auto run_from = [&](AgentId start) {
        AgentId cur = start;
        while (cur != kNoAgent) {
            const std::uint32_t k = result.proposals_made[cur];
            if (k >= oracle.list_length(cur)) break;
            const AgentId r = oracle.choice(cur, k);
            ++result.proposals_made[cur];
            ++result.proposals_received[r];
            if (++t > cap)
                throw InvariantViolation("deferred acceptance exceeded " + std::to_string(cap) + " proposals");

            const std::optional<double> score = oracle.score(r, cur);
            ProposalEvent ev{t, cur, r, Outcome::Rejected, kNoAgent};
            AgentId next = cur;
            if (score) {
                if (held[r] == kNoAgent) {
                    ev.outcome = Outcome::AcceptedFree;
                    held[r] = cur;
                    held_score[r] = *score;
                    partner[cur] = r;
                    next = kNoAgent;
                } else if (*score < held_score[r] || (*score == held_score[r] && cur < held[r])) {
                    ev.outcome = Outcome::AcceptedDisplacing;
                    ev.displaced = held[r];
                    partner[held[r]] = kNoAgent;
                    next = held[r];
                    held[r] = cur;
                    held_score[r] = *score;
                    partner[cur] = r;
                }
            }
            if (record_trace) result.proposal_log.push_back(ev);
            cur = next;
        }
    };

    if (order.empty()) {
        for (std::size_t p = 0; p < proposers; ++p) run_from(static_cast<AgentId>(p));
    } else {
        if (order.size() != proposers) throw ParameterError("proposer order must list every proposer exactly once");
        std::vector<bool> seen(proposers, false);
        for (AgentId p : order) {
            if (p >= proposers || seen[p]) throw ParameterError("proposer order is not a permutation");
            seen[p] = true;
        }
        for (AgentId p : order) run_from(p);
    }

    result.total_proposals = t;
    const Side ps = proposer_side(side);
    auto& proposer_partner = ps == Side::Candidates ? result.candidate_partner : result.job_partner;
    auto& receiver_partner = ps == Side::Candidates ? result.job_partner : result.candidate_partner;
    proposer_partner = std::move(partner);
    receiver_partner = std::move(held);
    for (std::size_t p = 0; p < proposers; ++p)
        if (proposer_partner[p] == kNoAgent) result.unmatched_proposers.push_back(static_cast<AgentId>(p));
    for (std::size_t r = 0; r < receivers; ++r)
        if (receiver_partner[r] == kNoAgent) result.unmatched_receivers.push_back(static_cast<AgentId>(r));
    return result;
}

class ExplicitOracle {
public:
    ExplicitOracle(const MarketInstance& market, ProposingSide side)
        : proposer_lists_(market.lists(proposer_side(side))), receiver_ranks_(market.lists(receiver_side(side))) {}

    std::size_t list_length(AgentId p) const { return proposer_lists_[p].size(); }
    AgentId choice(AgentId p, std::size_t k) const { return proposer_lists_[p][k]; }
    std::optional<double> score(AgentId r, AgentId p) const {
        const std::size_t rank = receiver_ranks_.rank(r, p);
        if (rank == RankTable::npos) return std::nullopt;
        return static_cast<double>(rank);
    }

private:
    const std::vector<std::vector<AgentId>>& proposer_lists_;
    RankTable receiver_ranks_;
};

// Sparse Fisher-Yates: each proposer walks its own virtual permutation of
// [0, range), storing only displaced positions.
class LazyOracle {
public:
    LazyOracle(std::uint64_t seed, std::size_t range, std::size_t list_length)
        : rng_(seed), range_(range), list_length_(list_length) {}

    std::size_t list_length(AgentId) const { return list_length_; }

    AgentId choice(AgentId p, std::size_t k) {
        const std::uint64_t base = static_cast<std::uint64_t>(p) * range_;
        const std::uint64_t j = k + rng_.below(range_ - k);
        const std::uint64_t at_j = lookup(base + j, j);
        const std::uint64_t at_k = lookup(base + k, k);
        if (j != k) swapped_[base + j] = static_cast<std::uint32_t>(at_k);
        return static_cast<AgentId>(at_j);
    }

    std::optional<double> score(AgentId, AgentId) { return rng_.uniform(); }

private:
    std::uint64_t lookup(std::uint64_t key, std::uint64_t fallback) const {
        auto it = swapped_.find(key);
        return it == swapped_.end() ? fallback : it->second;
    }

    Rng rng_;
    std::uint64_t range_;
    std::size_t list_length_;
    std::unordered_map<std::uint64_t, std::uint32_t> swapped_;
};

}  // namespace detail

// Runs CPDA or JPDA on an explicit instance. A proposal to a receiver that does
// not list the proposer is rejected, so truncated lists behave as expected.
inline DAResult run_da(const MarketInstance& market, ProposingSide side, DAOptions options = {}) {
    validate_lists(market);
    detail::ExplicitOracle oracle(market, side);
    return detail::deferred_acceptance(oracle, side, market.num_agents(proposer_side(side)),
                                       market.num_agents(receiver_side(side)), options.order, options.record_trace);
}

// Runs DA on a list-model market whose lists are revealed as proposals happen.
// CPDA needs CandidateLists, JPDA needs JobLists.
inline DAResult run_da_lazy(const MarketConfig& config, ProposingSide side, bool record_trace = false) {
    config.validate();
    const bool cpda = side == ProposingSide::CPDA;
    if (config.model != (cpda ? Model::CandidateLists : Model::JobLists))
        throw ParameterError(std::string("lazy ") + std::string(to_string(side)) + " needs the " +
                             (cpda ? "candidate-lists" : "job-lists") + " model");
    const std::size_t proposers = cpda ? config.num_candidates() : config.num_jobs();
    const std::size_t receivers = cpda ? config.num_jobs() : config.num_candidates();
    const std::size_t len = cpda ? config.candidate_list_length() : config.job_list_length();
    detail::LazyOracle oracle(config.seed, receivers, len);
    return detail::deferred_acceptance(oracle, side, proposers, receivers, {}, record_trace);
}

// Lazy when the model matches the proposing side, explicit sampling otherwise.
inline DAResult run_da_sampled(const MarketConfig& config, ProposingSide side, bool record_trace = false) {
    const bool lazy_ok = config.model == (side == ProposingSide::CPDA ? Model::CandidateLists : Model::JobLists);
    if (lazy_ok) return run_da_lazy(config, side, record_trace);
    return run_da(sample_market(config), side, {.record_trace = record_trace});
}

struct Offer {
    AgentId job = kNoAgent;
    std::size_t job_rank_of_probe = 0;  // 1-based position of the probe on the job's list
    std::size_t probe_rank_of_job = 0;  // 1-based position of the job on the probe's list
};

// JPDA in which candidate `probe` turns down every proposal. Returns the offers
// the probe received, in arrival order. The smallest probe_rank_of_job among
// them is the probe's best stable partner rank.
inline std::vector<Offer> continue_rejecting(const MarketInstance& market, AgentId probe) {
    validate_lists(market);
    if (probe >= market.candidates)
        throw ParameterError("probe candidate " + std::to_string(probe) + " out of range (m = " +
                             std::to_string(market.candidates) + ")");
    struct ProbeOracle {
        detail::ExplicitOracle base;
        const MarketInstance& market;
        RankTable candidate_ranks;
        AgentId probe;
        std::vector<Offer> offers;

        std::size_t list_length(AgentId p) const { return base.list_length(p); }
        AgentId choice(AgentId p, std::size_t k) const { return base.choice(p, k); }
        std::optional<double> score(AgentId c, AgentId job) {
            if (c != probe) return base.score(c, job);
            const std::size_t own = candidate_ranks.rank(c, job);
            if (own != RankTable::npos) {
                // Proposals from jobs the probe does not list are unacceptable, not offers.
                const auto& jl = market.job_lists[job];
                const auto pos = static_cast<std::size_t>(std::find(jl.begin(), jl.end(), c) - jl.begin());
                offers.push_back({job, pos + 1, own + 1});
            }
            return std::nullopt;
        }
    } oracle{detail::ExplicitOracle(market, ProposingSide::JPDA), market, RankTable(market.candidate_lists), probe, {}};
    detail::deferred_acceptance(oracle, ProposingSide::JPDA, market.jobs, market.candidates, {}, false);
    return std::move(oracle.offers);
}

inline std::vector<Offer> continue_rejecting(const MarketConfig& config, AgentId probe) {
    if (config.model != Model::JobLists) throw ParameterError("continue_rejecting needs the job-lists model");
    return continue_rejecting(sample_market(config), probe);
}

inline std::optional<std::size_t> best_offer_rank(const std::vector<Offer>& offers) {
    std::optional<std::size_t> best;
    for (const auto& o : offers)
        if (!best || o.probe_rank_of_job < *best) best = o.probe_rank_of_job;
    return best;
}

}  // namespace pmatch

#endif  // PMATCH_DA_HPP
