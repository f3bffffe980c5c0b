#ifndef PMATCH_STABILITY_HPP
#define PMATCH_STABILITY_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pmatch/da.hpp"
#include "pmatch/error.hpp"
#include "pmatch/market.hpp"

namespace pmatch {

// A one-to-one set of (candidate, job) pairs.
class Matching {
public:
    Matching() = default;
    Matching(std::size_t candidates, std::size_t jobs) : of_candidate_(candidates, kNoAgent), of_job_(jobs, kNoAgent) {}

    static Matching from_result(const DAResult& result) {
        Matching m(result.num_candidates(), result.num_jobs());
        for (std::size_t j = 0; j < result.job_partner.size(); ++j)
            if (result.job_partner[j] != kNoAgent) m.add(result.job_partner[j], static_cast<AgentId>(j));
        return m;
    }

    static Matching from_pairs(std::size_t candidates, std::size_t jobs,
                               const std::vector<std::pair<AgentId, AgentId>>& pairs) {
        Matching m(candidates, jobs);
        for (auto [c, j] : pairs) m.add(c, j);
        return m;
    }

    void add(AgentId c, AgentId j) {
        if (c >= of_candidate_.size() || j >= of_job_.size())
            throw StructuralError("matching pair (" + std::to_string(c) + ", " + std::to_string(j) + ") out of range");
        if (of_candidate_[c] != kNoAgent || of_job_[j] != kNoAgent)
            throw StructuralError("matching is not one-to-one at (" + std::to_string(c) + ", " + std::to_string(j) + ")");
        of_candidate_[c] = j;
        of_job_[j] = c;
        ++size_;
    }

    void remove(AgentId c) {
        const AgentId j = of_candidate_[c];
        if (j == kNoAgent) return;
        of_candidate_[c] = kNoAgent;
        of_job_[j] = kNoAgent;
        --size_;
    }

    AgentId partner_of_candidate(AgentId c) const { return of_candidate_[c]; }
    AgentId partner_of_job(AgentId j) const { return of_job_[j]; }
    AgentId partner(Side side, AgentId a) const { return side == Side::Candidates ? of_candidate_[a] : of_job_[a]; }
    std::size_t size() const { return size_; }
    std::size_t num_candidates() const { return of_candidate_.size(); }
    std::size_t num_jobs() const { return of_job_.size(); }

    std::vector<std::pair<AgentId, AgentId>> pairs() const {
        std::vector<std::pair<AgentId, AgentId>> out;
        for (std::size_t c = 0; c < of_candidate_.size(); ++c)
            if (of_candidate_[c] != kNoAgent) out.emplace_back(static_cast<AgentId>(c), of_candidate_[c]);
        return out;
    }

    std::vector<AgentId> unmatched(Side side) const {
        const auto& v = side == Side::Candidates ? of_candidate_ : of_job_;
        std::vector<AgentId> out;
        for (std::size_t a = 0; a < v.size(); ++a)
            if (v[a] == kNoAgent) out.push_back(static_cast<AgentId>(a));
        return out;
    }

    bool operator==(const Matching& o) const { return of_candidate_ == o.of_candidate_ && of_job_ == o.of_job_; }
    auto operator<=>(const Matching& o) const { return of_candidate_ <=> o.of_candidate_; }

private:
    std::vector<AgentId> of_candidate_;
    std::vector<AgentId> of_job_;
    std::size_t size_ = 0;
};

enum class BlockingReason { MutualPreference, CandidatePrefersUnmatched, JobPrefersUnmatched };

inline std::string_view to_string(BlockingReason r) {
    switch (r) {
        case BlockingReason::MutualPreference: return "mutual_preference";
        case BlockingReason::CandidatePrefersUnmatched: return "candidate_prefers_unmatched";
        case BlockingReason::JobPrefersUnmatched: return "job_prefers_unmatched";
    }
    return "?";
}

struct BlockingPair {
    AgentId candidate = kNoAgent;
    AgentId job = kNoAgent;
    BlockingReason reason = BlockingReason::MutualPreference;

    bool operator==(const BlockingPair&) const = default;
};

// Strict rejects matched pairs that are not mutual list edges. Lenient reports
// them as blocking under "prefers to be unmatched" instead.
enum class EdgePolicy { Strict, Lenient };

// Preference lookups shared by the checkers below.
class PreferenceView {
public:
    explicit PreferenceView(const MarketInstance& market)
        : market_(market), candidate_ranks_(market.candidate_lists), job_ranks_(market.job_lists) {}

    std::size_t candidate_rank(AgentId c, AgentId j) const { return candidate_ranks_.rank(c, j); }
    std::size_t job_rank(AgentId j, AgentId c) const { return job_ranks_.rank(j, c); }
    std::size_t rank(Side side, AgentId owner, AgentId other) const {
        return side == Side::Candidates ? candidate_rank(owner, other) : job_rank(owner, other);
    }
    bool is_edge(AgentId c, AgentId j) const {
        return candidate_rank(c, j) != RankTable::npos && job_rank(j, c) != RankTable::npos;
    }
    const MarketInstance& market() const { return market_; }

private:
    const MarketInstance& market_;
    RankTable candidate_ranks_;
    RankTable job_ranks_;
};

namespace detail {

inline void check_matching_shape(const MarketInstance& market, const Matching& matching) {
    if (matching.num_candidates() != market.candidates || matching.num_jobs() != market.jobs)
        throw StructuralError("matching and instance disagree on agent counts");
}

inline void collect_blocking_pairs(const PreferenceView& prefs, const Matching& matching, EdgePolicy policy,
                                   std::vector<BlockingPair>& out, bool stop_at_first) {
    const MarketInstance& market = prefs.market();
    for (std::size_t ci = 0; ci < market.candidates; ++ci) {
        const auto c = static_cast<AgentId>(ci);
        const AgentId mc = matching.partner_of_candidate(c);
        if (mc != kNoAgent) {
            const bool c_lists = prefs.candidate_rank(c, mc) != RankTable::npos;
            const bool j_lists = prefs.job_rank(mc, c) != RankTable::npos;
            if (!(c_lists && j_lists)) {
                if (policy == EdgePolicy::Strict)
                    throw StructuralError("matched pair (" + std::to_string(c) + ", " + std::to_string(mc) +
                                          ") is not an edge of the instance");
                if (!c_lists) out.push_back({c, mc, BlockingReason::CandidatePrefersUnmatched});
                if (!j_lists) out.push_back({c, mc, BlockingReason::JobPrefersUnmatched});
                if (stop_at_first) return;
            }
        }
        const std::size_t own = mc == kNoAgent ? RankTable::npos : prefs.candidate_rank(c, mc);
        const auto& list = market.candidate_lists[c];
        // Only jobs ranked above the current partner can block with c.
        const std::size_t limit = std::min(own, list.size());
        for (std::size_t r = 0; r < limit; ++r) {
            const AgentId j = list[r];
            const std::size_t c_on_j = prefs.job_rank(j, c);
            if (c_on_j == RankTable::npos) continue;
            const AgentId mj = matching.partner_of_job(j);
            const std::size_t held = mj == kNoAgent ? RankTable::npos : prefs.job_rank(j, mj);
            if (c_on_j < held) {
                out.push_back({c, j, BlockingReason::MutualPreference});
                if (stop_at_first) return;
            }
        }
    }
}

}  // namespace detail

// All blocking pairs of `matching`, candidate-major. Empty iff the matching is stable.
inline std::vector<BlockingPair> find_blocking_pairs(const MarketInstance& market, const Matching& matching,
                                                     EdgePolicy policy = EdgePolicy::Strict) {
    validate_lists(market);
    detail::check_matching_shape(market, matching);
    PreferenceView prefs(market);
    std::vector<BlockingPair> out;
    detail::collect_blocking_pairs(prefs, matching, policy, out, false);
    return out;
}

inline bool is_stable(const MarketInstance& market, const Matching& matching) {
    return find_blocking_pairs(market, matching).empty();
}

// Every one of the n short-side agents (jobs) is matched.
inline bool is_perfect(const Matching& matching, std::size_t n) {
    if (matching.num_jobs() < n) return false;
    for (std::size_t j = 0; j < n; ++j)
        if (matching.partner_of_job(static_cast<AgentId>(j)) == kNoAgent) return false;
    return true;
}

inline bool is_perfect(const DAResult& result) {
    return std::none_of(result.job_partner.begin(), result.job_partner.end(), [](AgentId a) { return a == kNoAgent; });
}

inline constexpr std::size_t kEnumerationLimit = 8;

// Brute force over every matching of the instance graph. Desk scale only.
inline std::vector<Matching> enumerate_stable_matchings(const MarketInstance& market) {
    validate_lists(market);
    if (market.candidates > kEnumerationLimit || market.jobs > kEnumerationLimit)
        throw ScaleError("enumeration is limited to " + std::to_string(kEnumerationLimit) + "x" +
                         std::to_string(kEnumerationLimit) + " markets (got " + std::to_string(market.candidates) +
                         " candidates, " + std::to_string(market.jobs) + " jobs)");
    PreferenceView prefs(market);
    std::vector<std::vector<AgentId>> edges(market.candidates);
    for (std::size_t c = 0; c < market.candidates; ++c)
        for (AgentId j : market.candidate_lists[c])
            if (prefs.is_edge(static_cast<AgentId>(c), j)) edges[c].push_back(j);

    std::vector<Matching> stable;
    Matching current(market.candidates, market.jobs);
    std::vector<BlockingPair> scratch;
    std::function<void(std::size_t)> visit = [&](std::size_t c) {
        if (c == market.candidates) {
            scratch.clear();
            detail::collect_blocking_pairs(prefs, current, EdgePolicy::Strict, scratch, true);
            if (scratch.empty()) stable.push_back(current);
            return;
        }
        visit(c + 1);
        for (AgentId j : edges[c]) {
            if (current.partner_of_job(j) != kNoAgent) continue;
            current.add(static_cast<AgentId>(c), j);
            visit(c + 1);
            current.remove(static_cast<AgentId>(c));
        }
    };
    visit(0);
    std::sort(stable.begin(), stable.end());
    return stable;
}

// 1-based rank of `a`'s partner on its own list, nullopt when unmatched.
inline std::optional<std::size_t> partner_rank(const PreferenceView& prefs, const Matching& matching, Side side, AgentId a) {
    const AgentId p = matching.partner(side, a);
    if (p == kNoAgent) return std::nullopt;
    const std::size_t r = prefs.rank(side, a, p);
    if (r == RankTable::npos) throw StructuralError("partner is not on the agent's list");
    return r + 1;
}

// Best rank `agent` attains in any stable matching, or nullopt if it is
// unmatched in all of them. An agent on the receiving side of DA has a stable
// partner of rank <= i exactly when it is still matched after truncating its
// list to its first i entries, so this binary-searches i over the DA run in
// which `side` receives (CPDA for jobs, JPDA for candidates).
inline std::optional<std::size_t> best_stable_rank(const MarketInstance& market, Side side, AgentId agent) {
    validate_lists(market);
    if (agent >= market.num_agents(side))
        throw ParameterError(std::string(to_string(side)) + " id " + std::to_string(agent) + " out of range");
    const ProposingSide da_side = side == Side::Jobs ? ProposingSide::CPDA : ProposingSide::JPDA;
    const auto& full = market.lists(side)[agent];

    MarketInstance work = market;
    auto matched_with_prefix = [&](std::size_t len) {
        work.lists(side)[agent].assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(len));
        const DAResult r = run_da(work, da_side, {.record_trace = false});
        return r.partners(side)[agent] != kNoAgent;
    };

    if (!matched_with_prefix(full.size())) return std::nullopt;
    std::size_t lo = 1, hi = full.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (matched_with_prefix(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

inline std::optional<std::size_t> best_stable_rank(const MarketInstance& market, AgentId job) {
    return best_stable_rank(market, Side::Jobs, job);
}

}  // namespace pmatch

#endif  // PMATCH_STABILITY_HPP
