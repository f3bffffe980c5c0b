#ifndef PMATCH_MARKET_HPP
#define PMATCH_MARKET_HPP

/*
 * Random two-sided markets with truncated preference lists.
 *
 * There are m = round(n (1 + alpha)) candidates and n jobs. Agents are dense
 * integer ids: candidates 0..m-1, jobs 0..n-1. Lists are ordered from most to
 * least preferred.
 *
 * Three models are sampled:
 *   Symmetric       each (c, j) edge is present independently with
 *                   probability d / n; both endpoints rank their neighbours
 *                   uniformly at random.
 *   CandidateLists  each candidate lists round(d) jobs chosen uniformly
 *                   (capped at n); each job ranks the candidates that listed
 *                   it by i.i.d. uniform priorities.
 *   JobLists        the mirror image: jobs list round(d) candidates (capped
 *                   at m).
 *
 * Rounding is half-up for both m and list lengths.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmatch/error.hpp"
#include "pmatch/rng.hpp"

namespace pmatch {

using AgentId = std::uint32_t;
inline constexpr AgentId kNoAgent = std::numeric_limits<AgentId>::max();

enum class Model { Symmetric, CandidateLists, JobLists };
enum class Side { Candidates, Jobs };
enum class Representation { Explicit, LazyOracle };

inline std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

inline std::string_view to_string(Model model) {
    switch (model) {
        case Model::Symmetric: return "symmetric";
        case Model::CandidateLists: return "candidate-lists";
        case Model::JobLists: return "job-lists";
    }
    return "?";
}

inline Model parse_model(std::string_view text) {
    if (text == "symmetric") return Model::Symmetric;
    if (text == "candidate-lists" || text == "candidates") return Model::CandidateLists;
    if (text == "job-lists" || text == "jobs") return Model::JobLists;
    throw ParameterError("unknown model '" + std::string(text) + "' (expected symmetric, candidate-lists, job-lists)");
}

inline std::string_view to_string(Side side) { return side == Side::Candidates ? "candidates" : "jobs"; }

struct MarketConfig {
    std::size_t n = 1;
    double alpha = 0.0;
    double d = 1.0;
    Model model = Model::CandidateLists;
    std::uint64_t seed = 0;

    std::size_t num_jobs() const { return n; }
    std::size_t num_candidates() const {
        // Guard against n(1+alpha) landing a hair under an integer.
        return round_half_up(static_cast<double>(n) * (1.0 + alpha) + 1e-9);
    }
    std::size_t candidate_list_length() const { return std::min(round_half_up(d), n); }
    std::size_t job_list_length() const { return std::min(round_half_up(d), num_candidates()); }

    void validate() const {
        if (n == 0) throw ParameterError("n must be at least 1");
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be a finite value >= 0");
        if (!(d > 0.0) || !std::isfinite(d)) throw ParameterError("d must be positive");
        if (num_candidates() > std::numeric_limits<AgentId>::max() / 2)
            throw ParameterError("market too large for 32-bit agent ids");
        if (model == Model::JobLists) {
            if (round_half_up(d) > num_candidates())
                throw ParameterError("d out of bounds: round(d) = " + std::to_string(round_half_up(d)) +
                                     " exceeds m = " + std::to_string(num_candidates()));
        } else if (d > static_cast<double>(n)) {
            throw ParameterError("d out of bounds: d = " + std::to_string(d) + " exceeds n = " + std::to_string(n));
        }
    }
};

struct MarketInstance {
    MarketConfig config;
    Representation representation = Representation::Explicit;
    std::size_t candidates = 0;  // m
    std::size_t jobs = 0;        // n
    std::vector<std::vector<AgentId>> candidate_lists;
    std::vector<std::vector<AgentId>> job_lists;

    std::size_t num_agents(Side side) const { return side == Side::Candidates ? candidates : jobs; }
    const std::vector<std::vector<AgentId>>& lists(Side side) const {
        return side == Side::Candidates ? candidate_lists : job_lists;
    }
    std::vector<std::vector<AgentId>>& lists(Side side) { return side == Side::Candidates ? candidate_lists : job_lists; }

    bool operator==(const MarketInstance& other) const {
        return candidates == other.candidates && jobs == other.jobs && candidate_lists == other.candidate_lists &&
               job_lists == other.job_lists;
    }
};

inline constexpr Side opposite(Side side) { return side == Side::Candidates ? Side::Jobs : Side::Candidates; }

// Empty-list instance standing in for a market whose preferences are drawn on demand.
inline MarketInstance lazy_market(const MarketConfig& config) {
    config.validate();
    MarketInstance inst;
    inst.config = config;
    inst.representation = Representation::LazyOracle;
    inst.candidates = config.num_candidates();
    inst.jobs = config.num_jobs();
    return inst;
}

// Checks ids are in range and every list is duplicate-free.
inline void validate_lists(const MarketInstance& market) {
    if (market.representation != Representation::Explicit)
        throw StructuralError("operation needs an explicit instance");
    if (market.candidate_lists.size() != market.candidates || market.job_lists.size() != market.jobs)
        throw StructuralError("list count does not match agent count");
    std::vector<std::uint32_t> seen(std::max(market.candidates, market.jobs), 0);
    std::uint32_t stamp = 0;
    for (Side side : {Side::Candidates, Side::Jobs}) {
        const std::size_t other = market.num_agents(opposite(side));
        const auto& lists = market.lists(side);
        for (std::size_t a = 0; a < lists.size(); ++a) {
            ++stamp;
            for (AgentId x : lists[a]) {
                if (x >= other)
                    throw StructuralError(std::string(to_string(side)) + " " + std::to_string(a) +
                                          " lists out-of-range agent " + std::to_string(x));
                if (seen[x] == stamp)
                    throw StructuralError(std::string(to_string(side)) + " " + std::to_string(a) +
                                          " lists agent " + std::to_string(x) + " twice");
                seen[x] = stamp;
            }
        }
    }
}

// Per-owner rank lookup (0-based position) over a set of preference lists.
class RankTable {
public:
    RankTable() = default;
    explicit RankTable(const std::vector<std::vector<AgentId>>& lists) : offsets_(lists.size() + 1, 0) {
        for (std::size_t a = 0; a < lists.size(); ++a) offsets_[a + 1] = offsets_[a] + lists[a].size();
        entries_.resize(offsets_.back());
        for (std::size_t a = 0; a < lists.size(); ++a) {
            auto* base = entries_.data() + offsets_[a];
            for (std::size_t r = 0; r < lists[a].size(); ++r) base[r] = {lists[a][r], static_cast<std::uint32_t>(r)};
            std::sort(base, base + lists[a].size(), [](const Entry& x, const Entry& y) { return x.other < y.other; });
        }
    }

    // Position of `other` on `owner`'s list, or npos when absent.
    std::size_t rank(AgentId owner, AgentId other) const {
        const auto* first = entries_.data() + offsets_[owner];
        const auto* last = entries_.data() + offsets_[owner + 1];
        const auto* it = std::lower_bound(first, last, other, [](const Entry& e, AgentId v) { return e.other < v; });
        return (it != last && it->other == other) ? it->rank : npos;
    }

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

private:
    struct Entry {
        AgentId other;
        std::uint32_t rank;
    };
    std::vector<std::size_t> offsets_;
    std::vector<Entry> entries_;
};

namespace detail {

inline constexpr std::uint64_t kPriorityStream = 0x7072696f72697479ULL;  // "priority"

// Orders each receiver's proposers by keyed uniform priority (smaller is preferred,
// ties by id) and writes the result into `receiver_lists`.
inline void rank_by_priority(std::uint64_t key, std::vector<std::vector<AgentId>>& receiver_lists) {
    std::vector<std::pair<double, AgentId>> scratch;
    for (std::size_t r = 0; r < receiver_lists.size(); ++r) {
        auto& list = receiver_lists[r];
        scratch.clear();
        for (AgentId a : list) scratch.emplace_back(keyed_uniform(key, r, a), a);
        std::sort(scratch.begin(), scratch.end());
        for (std::size_t i = 0; i < list.size(); ++i) list[i] = scratch[i].second;
    }
}

inline void add_reverse_edges(const std::vector<std::vector<AgentId>>& lists, std::vector<std::vector<AgentId>>& reverse) {
    for (std::size_t a = 0; a < lists.size(); ++a)
        for (AgentId b : lists[a]) reverse[b].push_back(static_cast<AgentId>(a));
}

}  // namespace detail

// Samples an explicit instance. Deterministic in config (including its seed).
inline MarketInstance sample_market(const MarketConfig& config) {
    config.validate();
    MarketInstance inst;
    inst.config = config;
    inst.representation = Representation::Explicit;
    inst.candidates = config.num_candidates();
    inst.jobs = config.num_jobs();
    inst.candidate_lists.assign(inst.candidates, {});
    inst.job_lists.assign(inst.jobs, {});
    Rng rng(config.seed);

    switch (config.model) {
        case Model::Symmetric: {
            const double p = config.d / static_cast<double>(config.n);
            for (std::size_t c = 0; c < inst.candidates; ++c) {
                auto neighbours = bernoulli_positions(rng, static_cast<std::uint32_t>(inst.jobs), p);
                inst.candidate_lists[c].assign(neighbours.begin(), neighbours.end());
            }
            detail::add_reverse_edges(inst.candidate_lists, inst.job_lists);
            for (auto& list : inst.candidate_lists) rng.shuffle(std::span(list));
            for (auto& list : inst.job_lists) rng.shuffle(std::span(list));
            break;
        }
        case Model::CandidateLists: {
            TupleSampler sampler(static_cast<std::uint32_t>(inst.jobs));
            const std::size_t len = config.candidate_list_length();
            for (auto& list : inst.candidate_lists) sampler.draw(rng, len, list);
            detail::add_reverse_edges(inst.candidate_lists, inst.job_lists);
            detail::rank_by_priority(derive_seed(config.seed, detail::kPriorityStream), inst.job_lists);
            break;
        }
        case Model::JobLists: {
            TupleSampler sampler(static_cast<std::uint32_t>(inst.candidates));
            const std::size_t len = config.job_list_length();
            for (auto& list : inst.job_lists) sampler.draw(rng, len, list);
            detail::add_reverse_edges(inst.job_lists, inst.candidate_lists);
            detail::rank_by_priority(derive_seed(config.seed, detail::kPriorityStream), inst.candidate_lists);
            break;
        }
    }
    return inst;
}

// M1 ⊆_side M2: every `side` list of m1 is a prefix of the same agent's list in
// m2, and every opposite agent orders the entries its two lists share the same
// way in both instances.
inline bool check_containment(const MarketInstance& m1, const MarketInstance& m2, Side side) {
    if (m1.candidates != m2.candidates || m1.jobs != m2.jobs)
        throw StructuralError("containment check needs instances over the same agents");
    if (m1.representation != Representation::Explicit || m2.representation != Representation::Explicit)
        throw StructuralError("containment check needs explicit instances");

    const auto& small = m1.lists(side);
    const auto& big = m2.lists(side);
    for (std::size_t a = 0; a < small.size(); ++a) {
        if (small[a].size() > big[a].size()) return false;
        if (!std::equal(small[a].begin(), small[a].end(), big[a].begin())) return false;
    }

    const Side other = opposite(side);
    std::vector<std::size_t> position(m1.num_agents(side), RankTable::npos);
    const auto& small_other = m1.lists(other);
    const auto& big_other = m2.lists(other);
    for (std::size_t b = 0; b < small_other.size(); ++b) {
        for (std::size_t r = 0; r < big_other[b].size(); ++r) position[big_other[b][r]] = r;
        std::size_t last = 0;
        bool first = true;
        for (AgentId a : small_other[b]) {
            const std::size_t pos = position[a];
            if (pos == RankTable::npos) continue;
            if (!first && pos < last) {
                for (AgentId x : big_other[b]) position[x] = RankTable::npos;
                return false;
            }
            last = pos;
            first = false;
        }
        for (AgentId x : big_other[b]) position[x] = RankTable::npos;
    }
    return true;
}

struct SandwichTriple {
    MarketInstance lower;
    MarketInstance mid;
    MarketInstance upper;
    double delta = 0.0;
    Side side = Side::Candidates;
    bool lower_in_mid = false;
    bool mid_in_upper = false;
    bool containment_held = false;
};

// Joint sample of (list model at d(1-delta), symmetric model at d, list model
// at d(1+delta)) sharing one total order per opposite-side agent and one
// random tuple per proposing agent. For side = Jobs the list lengths are
// scaled by the job's expected degree d m / n.
inline SandwichTriple sample_sandwich_triple(const MarketConfig& config, double delta, Side side) {
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("sandwich delta must lie in (0, 1)");
    if (config.model != Model::Symmetric) throw ParameterError("sandwich triple needs a symmetric-model config");
    config.validate();

    const std::size_t m = config.num_candidates();
    const std::size_t n = config.num_jobs();
    const std::size_t owners = side == Side::Candidates ? m : n;
    const std::size_t range = side == Side::Candidates ? n : m;
    const double mean_degree = side == Side::Candidates ? config.d : config.d * static_cast<double>(m) / static_cast<double>(n);
    const double p = config.d / static_cast<double>(n);
    const std::size_t len_lower = std::min(round_half_up(mean_degree * (1.0 - delta)), range);
    const std::size_t len_upper = std::min(round_half_up(mean_degree * (1.0 + delta)), range);

    const Model list_model = side == Side::Candidates ? Model::CandidateLists : Model::JobLists;
    auto make = [&](Model model, double d) {
        MarketInstance inst;
        inst.config = config;
        inst.config.model = model;
        inst.config.d = d;
        inst.candidates = m;
        inst.jobs = n;
        inst.candidate_lists.assign(m, {});
        inst.job_lists.assign(n, {});
        return inst;
    };

    SandwichTriple triple;
    triple.delta = delta;
    triple.side = side;
    triple.lower = make(list_model, std::min(mean_degree * (1.0 - delta), static_cast<double>(range)));
    triple.mid = make(Model::Symmetric, config.d);
    triple.upper = make(list_model, std::min(mean_degree * (1.0 + delta), static_cast<double>(range)));

    Rng rng(config.seed);
    TupleSampler sampler(static_cast<std::uint32_t>(range));
    std::vector<AgentId> tuple;
    for (std::size_t a = 0; a < owners; ++a) {
        const auto degree = static_cast<std::size_t>(rng.binomial(range, p));
        tuple.clear();
        sampler.draw(rng, std::max(degree, len_upper), tuple);
        triple.lower.lists(side)[a].assign(tuple.begin(), tuple.begin() + len_lower);
        triple.mid.lists(side)[a].assign(tuple.begin(), tuple.begin() + degree);
        triple.upper.lists(side)[a].assign(tuple.begin(), tuple.begin() + len_upper);
    }

    const std::uint64_t order_key = derive_seed(config.seed, detail::kPriorityStream);
    for (MarketInstance* inst : {&triple.lower, &triple.mid, &triple.upper}) {
        detail::add_reverse_edges(inst->lists(side), inst->lists(opposite(side)));
        detail::rank_by_priority(order_key, inst->lists(opposite(side)));
    }

    triple.lower_in_mid = check_containment(triple.lower, triple.mid, side);
    triple.mid_in_upper = check_containment(triple.mid, triple.upper, side);
    triple.containment_held = triple.lower_in_mid && triple.mid_in_upper;
    return triple;
}

}  // namespace pmatch

#endif  // PMATCH_MARKET_HPP
