#ifndef PMATCH_BINS_HPP
#define PMATCH_BINS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "pmatch/da.hpp"
#include "pmatch/error.hpp"
#include "pmatch/market.hpp"
#include "pmatch/rng.hpp"

namespace pmatch {

struct BinOccupancy {
    std::vector<std::uint64_t> counts;
    std::uint64_t throws = 0;
    std::size_t occupied = 0;

    std::size_t bins() const { return counts.size(); }
    std::size_t empty() const { return counts.size() - occupied; }

    void add(std::size_t bin) {
        if (counts[bin]++ == 0) ++occupied;
        ++throws;
    }
};

struct FixedThrows {
    std::uint64_t throws = 0;
};
struct OccupiedReaches {
    std::size_t occupied = 0;
};
struct AllOccupied {};

using StopRule = std::variant<FixedThrows, OccupiedReaches, AllOccupied>;

inline BinOccupancy run_balls_in_bins(std::size_t bins, const StopRule& stop, Rng& rng) {
    if (bins < 1) throw ParameterError("need at least one bin");
    if (const auto* k = std::get_if<OccupiedReaches>(&stop); k && k->occupied > bins)
        throw ParameterError("cannot reach " + std::to_string(k->occupied) + " occupied bins out of " + std::to_string(bins));

    BinOccupancy occ;
    occ.counts.assign(bins, 0);
    auto done = [&] {
        return std::visit(
            [&](const auto& rule) -> bool {
                using R = std::decay_t<decltype(rule)>;
                if constexpr (std::is_same_v<R, FixedThrows>) return occ.throws >= rule.throws;
                else if constexpr (std::is_same_v<R, OccupiedReaches>) return occ.occupied >= rule.occupied;
                else return occ.occupied == bins;
            },
            stop);
    };
    while (!done()) occ.add(static_cast<std::size_t>(rng.below(bins)));
    return occ;
}

inline BinOccupancy run_balls_in_bins(std::size_t bins, const StopRule& stop, std::uint64_t seed) {
    Rng rng(seed);
    return run_balls_in_bins(bins, stop, rng);
}

struct UnmatchedEstimate {
    double centered = 0.0;  // n e^{-tau/n}
    double exact = 0.0;     // n (1 - 1/n)^tau, expected empty bins after tau throws
};

inline UnmatchedEstimate unmatched_estimate(std::size_t n, double tau) {
    if (tau < 0.0) throw ParameterError("tau must be non-negative");
    const double nn = static_cast<double>(n);
    if (n == 0) return {0.0, 0.0};
    return {nn * std::exp(-tau / nn), nn * std::exp(tau * std::log1p(-1.0 / nn))};
}

// Allowed frequency of |delta(tau) - n e^{-tau/n}| > gamma n e^{-tau/n}.
inline double unmatched_deviation_bound(std::size_t n, double tau, double gamma) {
    const double nn = static_cast<double>(n);
    return 2.0 * std::exp(tau / nn) / (gamma * gamma * nn);
}

struct AcceptanceEstimate {
    double rejection = 0.0;   // q_F = 1 - (1/n) sum 1/(b_i + 1)
    double acceptance = 1.0;  // 1 - q_F
};

inline AcceptanceEstimate acceptance_prob_estimate(const BinOccupancy& occ) {
    if (occ.counts.empty()) return {};
    double sum = 0.0;
    for (std::uint64_t b : occ.counts) sum += 1.0 / (static_cast<double>(b) + 1.0);
    const double acceptance = sum / static_cast<double>(occ.counts.size());
    return {1.0 - acceptance, acceptance};
}

// Same as acceptance_prob_estimate(...).rejection but over raw counts.
inline double rejection_proxy(const std::vector<std::uint64_t>& counts) {
    double sum = 0.0;
    for (auto b : counts) sum += 1.0 / (static_cast<double>(b) + 1.0);
    return 1.0 - sum / static_cast<double>(counts.size());
}

struct CoupledTrace {
    DAResult da_result;
    BinOccupancy occupancy;  // after all kappa throws
    // Per receiver: (proposals received j_i, balls in its bin b_i).
    std::vector<std::pair<std::uint64_t, std::uint64_t>> proposals_vs_balls;
    std::uint64_t tau = 0;    // DA proposals
    std::uint64_t kappa = 0;  // balls thrown
    std::vector<AgentId> throw_sequence;

    // Occupancy after the first t throws.
    BinOccupancy occupancy_after(std::uint64_t t) const {
        BinOccupancy occ;
        occ.counts.assign(occupancy.counts.size(), 0);
        for (std::uint64_t i = 0; i < t && i < throw_sequence.size(); ++i) occ.add(throw_sequence[i]);
        return occ;
    }
};

namespace detail {

// Each proposal is found by throwing uniform balls at the receivers until one
// lands on a receiver the proposer has not tried; wasted throws still count.
class BallsOracle {
public:
    BallsOracle(std::uint64_t seed, std::size_t receivers, std::size_t list_length)
        : rng_(seed), receivers_(receivers), list_length_(list_length), counts_(receivers, 0) {}

    std::size_t list_length(AgentId) const { return list_length_; }

    AgentId choice(AgentId p, std::size_t) {
        const std::uint64_t base = static_cast<std::uint64_t>(p) * receivers_;
        while (true) {
            const auto bin = static_cast<AgentId>(rng_.below(receivers_));
            ++counts_[bin];
            throws_.push_back(bin);
            if (tried_.insert(base + bin).second) return bin;
        }
    }

    std::optional<double> score(AgentId, AgentId) { return rng_.uniform(); }

    std::vector<std::uint64_t>& counts() { return counts_; }
    std::vector<AgentId>& throws() { return throws_; }

private:
    Rng rng_;
    std::uint64_t receivers_;
    std::size_t list_length_;
    std::vector<std::uint64_t> counts_;
    std::vector<AgentId> throws_;
    std::unordered_set<std::uint64_t> tried_;
};

}  // namespace detail

// Lazy DA driven by a balls-in-bins process with one bin per receiver.
inline CoupledTrace run_coupled_da_bins(const MarketConfig& config, ProposingSide side, bool record_trace = false) {
    config.validate();
    const bool cpda = side == ProposingSide::CPDA;
    if (config.model != (cpda ? Model::CandidateLists : Model::JobLists))
        throw ParameterError(std::string("coupled ") + std::string(to_string(side)) + " needs the " +
                             (cpda ? "candidate-lists" : "job-lists") + " model");
    const std::size_t proposers = cpda ? config.num_candidates() : config.num_jobs();
    const std::size_t receivers = cpda ? config.num_jobs() : config.num_candidates();
    const std::size_t len = cpda ? config.candidate_list_length() : config.job_list_length();

    detail::BallsOracle oracle(config.seed, receivers, len);
    CoupledTrace trace;
    trace.da_result = detail::deferred_acceptance(oracle, side, proposers, receivers, {}, record_trace);
    trace.occupancy.counts = std::move(oracle.counts());
    trace.throw_sequence = std::move(oracle.throws());
    trace.occupancy.throws = trace.throw_sequence.size();
    trace.occupancy.occupied = static_cast<std::size_t>(
        std::count_if(trace.occupancy.counts.begin(), trace.occupancy.counts.end(), [](auto b) { return b > 0; }));
    trace.tau = trace.da_result.total_proposals;
    trace.kappa = trace.occupancy.throws;
    trace.proposals_vs_balls.reserve(receivers);
    for (std::size_t r = 0; r < receivers; ++r)
        trace.proposals_vs_balls.emplace_back(trace.da_result.proposals_received[r], trace.occupancy.counts[r]);
    return trace;
}

// Checks j_i <= b_i for every receiver and tau <= kappa.
inline bool domination_holds(const CoupledTrace& trace) {
    if (trace.tau > trace.kappa) return false;
    for (auto [j, b] : trace.proposals_vs_balls)
        if (j > b) return false;
    return true;
}

}  // namespace pmatch

#endif  // PMATCH_BINS_HPP
