#include <gtest/gtest.h>

#include <algorithm>

#include "pmatch/da.hpp"
#include "pmatch/error.hpp"
#include "pmatch/stability.hpp"
#include "support.hpp"

using namespace pmatch;
using pmatch::testing::make_market;
using pmatch::testing::random_small_config;
using pmatch::testing::random_small_market;

namespace {

// Independent blocking check straight from the definition, used as an oracle.
bool naive_stable(const MarketInstance& m, const Matching& mu) {
    auto pos = [](const std::vector<AgentId>& l, AgentId x) -> std::size_t {
        auto it = std::find(l.begin(), l.end(), x);
        return it == l.end() ? SIZE_MAX : static_cast<std::size_t>(it - l.begin());
    };
    for (std::size_t c = 0; c < m.candidates; ++c)
        for (std::size_t j = 0; j < m.jobs; ++j) {
            const auto cj = pos(m.candidate_lists[c], static_cast<AgentId>(j));
            const auto jc = pos(m.job_lists[j], static_cast<AgentId>(c));
            if (cj == SIZE_MAX || jc == SIZE_MAX) continue;
            const AgentId pc = mu.partner_of_candidate(static_cast<AgentId>(c));
            const AgentId pj = mu.partner_of_job(static_cast<AgentId>(j));
            if (pc == j) continue;
            const bool c_wants = pc == kNoAgent || cj < pos(m.candidate_lists[c], pc);
            const bool j_wants = pj == kNoAgent || jc < pos(m.job_lists[j], pj);
            if (c_wants && j_wants) return false;
        }
    return true;
}

}  // namespace

TEST(Blocking, SwappedTwoByTwoHasBlockingPair) {
    const auto m = make_market({{0, 1}, {0, 1}}, {{0, 1}, {0, 1}});
    const auto mu = Matching::from_pairs(2, 2, {{0, 1}, {1, 0}});
    const auto blocking = find_blocking_pairs(m, mu);
    ASSERT_EQ(blocking.size(), 1u);
    EXPECT_EQ(blocking[0], (BlockingPair{0, 0, BlockingReason::MutualPreference}));
    EXPECT_FALSE(is_stable(m, mu));
}

TEST(Blocking, EmptyMatchingBlockedByEveryEdge) {
    const auto m = make_market({{0, 1}, {1}}, {{0}, {1, 0}});
    const auto blocking = find_blocking_pairs(m, Matching(2, 2));
    EXPECT_EQ(blocking.size(), 3u);
}

TEST(Blocking, NonEdgePolicies) {
    // c0 lists j0 but j0 does not list c0.
    const auto m = make_market({{0}}, {{}});
    const auto mu = Matching::from_pairs(1, 1, {{0, 0}});
    EXPECT_THROW(find_blocking_pairs(m, mu), StructuralError);
    const auto lenient = find_blocking_pairs(m, mu, EdgePolicy::Lenient);
    ASSERT_EQ(lenient.size(), 1u);
    EXPECT_EQ(lenient[0].reason, BlockingReason::JobPrefersUnmatched);
    EXPECT_THROW(find_blocking_pairs(m, Matching(2, 1)), StructuralError);
}

TEST(Matching, RejectsOverlapsAndRange) {
    Matching mu(2, 2);
    mu.add(0, 1);
    EXPECT_THROW(mu.add(1, 1), StructuralError);
    EXPECT_THROW(mu.add(0, 0), StructuralError);
    EXPECT_THROW(mu.add(5, 0), StructuralError);
    EXPECT_EQ(mu.size(), 1u);
    EXPECT_EQ(mu.unmatched(Side::Jobs), (std::vector<AgentId>{0}));
    mu.remove(0);
    EXPECT_EQ(mu.size(), 0u);
}

TEST(Enumerate, SmallKnownCounts) {
    EXPECT_EQ(enumerate_stable_matchings(make_market({{0, 1}, {0, 1}}, {{0, 1}, {0, 1}})).size(), 1u);
    // Cyclic 3x3 Latin square preferences: three stable matchings.
    const auto latin = make_market({{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}, {{1, 2, 0}, {2, 0, 1}, {0, 1, 2}});
    const auto s = enumerate_stable_matchings(latin);
    EXPECT_EQ(s.size(), 3u);
    // No edges: only the empty matching.
    const auto none = enumerate_stable_matchings(make_market({{}, {}}, {{}, {}}));
    ASSERT_EQ(none.size(), 1u);
    EXPECT_EQ(none[0].size(), 0u);
}

TEST(Enumerate, ScaleLimit) {
    std::vector<std::vector<AgentId>> cl(9), jl(1);
    EXPECT_THROW(enumerate_stable_matchings(make_market(cl, jl)), ScaleError);
}

TEST(Enumerate, AgreesWithNaiveOracleAndDA) {
    Rng rng(51);
    for (int t = 0; t < 300; ++t) {
        const auto m = random_small_market(rng, 5);
        const auto stable = enumerate_stable_matchings(m);
        ASSERT_FALSE(stable.empty());
        for (const auto& s : stable) EXPECT_TRUE(naive_stable(m, s));
        const auto cpda = Matching::from_result(run_da(m, ProposingSide::CPDA));
        const auto jpda = Matching::from_result(run_da(m, ProposingSide::JPDA));
        EXPECT_TRUE(std::binary_search(stable.begin(), stable.end(), cpda));
        EXPECT_TRUE(std::binary_search(stable.begin(), stable.end(), jpda));
        EXPECT_EQ(naive_stable(m, Matching(m.candidates, m.jobs)), is_stable(m, Matching(m.candidates, m.jobs)));
    }
}

TEST(LoneWolf, UnmatchedSetsAgreeAcrossStableMatchings) {
    Rng rng(52);
    for (int t = 0; t < 300; ++t) {
        const auto m = random_small_market(rng, 6);
        const auto stable = enumerate_stable_matchings(m);
        for (const auto& s : stable) {
            EXPECT_EQ(s.unmatched(Side::Candidates), stable[0].unmatched(Side::Candidates));
            EXPECT_EQ(s.unmatched(Side::Jobs), stable[0].unmatched(Side::Jobs));
        }
    }
}

TEST(Perfect, ShortSideFullyMatched) {
    EXPECT_TRUE(is_perfect(Matching::from_pairs(3, 2, {{0, 1}, {2, 0}}), 2));
    EXPECT_FALSE(is_perfect(Matching::from_pairs(3, 2, {{0, 1}}), 2));
}

TEST(BestStableRank, MatchesEnumeration) {
    Rng rng(53);
    for (int t = 0; t < 300; ++t) {
        const auto m = t % 2 ? random_small_market(rng, 6) : sample_market(random_small_config(rng, 600 + t));
        const auto stable = enumerate_stable_matchings(m);
        const PreferenceView prefs(m);
        for (Side side : {Side::Candidates, Side::Jobs}) {
            for (std::size_t a = 0; a < m.num_agents(side); ++a) {
                std::optional<std::size_t> best;
                for (const auto& s : stable) {
                    const auto r = partner_rank(prefs, s, side, static_cast<AgentId>(a));
                    if (r && (!best || *r < *best)) best = r;
                }
                EXPECT_EQ(best_stable_rank(m, side, static_cast<AgentId>(a)), best);
            }
        }
    }
}

TEST(BestStableRank, CandidateOptimalDAGivesBestRanks) {
    Rng rng(54);
    for (int t = 0; t < 200; ++t) {
        const auto m = random_small_market(rng, 6);
        const PreferenceView prefs(m);
        const auto cpda = Matching::from_result(run_da(m, ProposingSide::CPDA));
        for (std::size_t c = 0; c < m.candidates; ++c)
            EXPECT_EQ(partner_rank(prefs, cpda, Side::Candidates, static_cast<AgentId>(c)),
                      best_stable_rank(m, Side::Candidates, static_cast<AgentId>(c)));
    }
    EXPECT_THROW(best_stable_rank(make_market({{0}}, {{0}}), Side::Jobs, 3), ParameterError);
}
