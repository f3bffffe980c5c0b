#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "pmatch/chains.hpp"
#include "pmatch/error.hpp"
#include "support.hpp"

using namespace pmatch;
using pmatch::testing::make_market;
using pmatch::testing::random_small_market;

TEST(Chains, TwoByTwoHandTrace) {
    const auto m = make_market({{0, 1}, {0, 1}}, {{0, 1}, {0, 1}});
    const auto chains = extract_rejection_chains(run_da(m, ProposingSide::CPDA));
    ASSERT_EQ(chains.size(), 2u);
    EXPECT_EQ(chains[0].start_t, 1u);
    EXPECT_EQ(chains[0].events, (std::vector<ChainStep>{{0, 0, true}}));
    EXPECT_EQ(chains[1].start_t, 2u);
    EXPECT_EQ(chains[1].events, (std::vector<ChainStep>{{1, 0, false}, {1, 1, true}}));
    EXPECT_EQ(chains[1].max_consecutive_rejections, 1u);
    for (const auto& c : chains) EXPECT_EQ(c.termination, ChainTermination::UnmatchedReceiverAccepts);
}

TEST(Chains, AllFreeLogGivesUnitChains) {
    const auto m = make_market({{2, 0}, {0, 1}, {1, 2}}, {{1, 0}, {2, 1}, {0, 2}});
    const auto chains = extract_rejection_chains(run_da(m, ProposingSide::CPDA));
    ASSERT_EQ(chains.size(), 3u);
    for (const auto& c : chains) {
        EXPECT_EQ(c.proposals, 1u);
        EXPECT_EQ(c.termination, ChainTermination::UnmatchedReceiverAccepts);
    }
}

TEST(Chains, DisplacementContinuesTheChain) {
    const auto m = make_market({{0}, {0, 1}}, {{0, 1}, {1}});
    const std::vector<AgentId> order{1, 0};
    const auto chains = extract_rejection_chains(run_da(m, ProposingSide::CPDA, {.order = order}));
    ASSERT_EQ(chains.size(), 2u);
    EXPECT_EQ(chains[1].events, (std::vector<ChainStep>{{0, 0, true}, {1, 0, false}, {1, 1, true}}));
    EXPECT_EQ(chains[1].proposals, 2u);
}

TEST(Chains, ExhaustedProposerEndsChain) {
    // c1 is rejected by its only job and ends unmatched.
    const auto m = make_market({{0}, {0}}, {{0, 1}});
    const auto r = run_da(m, ProposingSide::CPDA);
    const auto chains = extract_rejection_chains(r);
    ASSERT_EQ(chains.size(), 2u);
    EXPECT_EQ(chains[1].termination, ChainTermination::ProposerExhausted);
    EXPECT_EQ(chains[1].exhausted, 1u);
    EXPECT_EQ(chains[1].max_consecutive_rejections, 1u);
}

TEST(Chains, PartitionAndTerminationOnRandomInstances) {
    Rng rng(41);
    for (int t = 0; t < 500; ++t) {
        const auto m = random_small_market(rng);
        for (auto side : {ProposingSide::CPDA, ProposingSide::JPDA}) {
            const auto r = run_da(m, side);
            const auto chains = extract_rejection_chains(r);
            std::uint64_t covered = 0, free_accepts = 0, exhausted = 0;
            std::uint64_t expected_start = 1;
            for (const auto& c : chains) {
                EXPECT_EQ(c.start_t, expected_start);
                expected_start += c.proposals;
                covered += c.proposals;
                ASSERT_FALSE(c.events.empty());
                if (c.termination == ChainTermination::UnmatchedReceiverAccepts) {
                    ++free_accepts;
                    EXPECT_TRUE(c.events.back().accept);
                } else {
                    ++exhausted;
                    EXPECT_FALSE(c.events.back().accept);
                    EXPECT_TRUE(std::binary_search(r.unmatched_proposers.begin(), r.unmatched_proposers.end(), c.exhausted));
                }
                // A run of rejections belongs to one proposer, so a run as long as the
                // longest list exhausts that proposer.
                std::size_t max_len = 0;
                for (const auto& l : m.lists(proposer_side(side))) max_len = std::max(max_len, l.size());
                if (max_len > 0 && c.max_consecutive_rejections >= max_len) {
                    bool someone_unmatched = false;
                    for (const auto& s : c.events)
                        someone_unmatched |= std::binary_search(r.unmatched_proposers.begin(), r.unmatched_proposers.end(),
                                                                s.proposer_side);
                    EXPECT_TRUE(someone_unmatched);
                }
            }
            EXPECT_EQ(covered, r.total_proposals);
            // Every matched receiver accepted exactly one proposal while free.
            EXPECT_EQ(free_accepts, r.matched_count());
            // Each unmatched proposer that made a proposal closes exactly one chain.
            std::uint64_t active_unmatched = 0;
            for (AgentId p : r.unmatched_proposers) active_unmatched += r.proposals_made[p] > 0;
            EXPECT_EQ(exhausted, active_unmatched);
        }
    }
}

TEST(Chains, MalformedLogsAreStructuralErrors) {
    const auto m = make_market({{0, 1}, {0, 1}}, {{0, 1}, {0, 1}});
    EXPECT_THROW(extract_rejection_chains(run_da(m, ProposingSide::CPDA, {.record_trace = false})), StructuralError);
    auto r = run_da(m, ProposingSide::CPDA);
    auto bad_t = r;
    bad_t.proposal_log[1].t = 5;
    EXPECT_THROW(extract_rejection_chains(bad_t), StructuralError);
    auto truncated = r;
    truncated.proposal_log.pop_back();
    EXPECT_THROW(extract_rejection_chains(truncated), StructuralError);
    auto lying = r;
    lying.proposal_log[2].outcome = Outcome::Rejected;  // c1 stops mid-chain yet is matched
    EXPECT_THROW(extract_rejection_chains(lying), StructuralError);
}

TEST(Chains, TraceAndJsonFormats) {
    const auto m = make_market({{0}, {0, 1}}, {{0, 1}, {1}});
    const std::vector<AgentId> order{1, 0};
    const auto r = run_da(m, ProposingSide::CPDA, {.order = order});
    std::ostringstream trace;
    write_trace(trace, r);
    EXPECT_EQ(trace.str(), "1 1 0 accepted_free\n2 0 0 accepted_displacing 1\n3 1 1 accepted_free\n");

    std::ostringstream json;
    write_chains(json, extract_rejection_chains(r));
    std::istringstream lines(json.str());
    std::string line;
    std::vector<nlohmann::json> parsed;
    while (std::getline(lines, line)) parsed.push_back(nlohmann::json::parse(line));
    ASSERT_EQ(parsed.size(), 2u);
    EXPECT_EQ(parsed[1]["start_t"], 2);
    EXPECT_EQ(parsed[1]["termination"], "unmatched_receiver_accepts");
    EXPECT_EQ(parsed[1]["events"].size(), 3u);
    EXPECT_EQ(parsed[1]["events"][1][2], "reject");
}
