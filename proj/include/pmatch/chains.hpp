#ifndef PMATCH_CHAINS_HPP
#define PMATCH_CHAINS_HPP

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pmatch/da.hpp"
#include "pmatch/error.hpp"

namespace pmatch {

enum class ChainTermination { UnmatchedReceiverAccepts, ProposerExhausted };

inline std::string_view to_string(ChainTermination t) {
    return t == ChainTermination::UnmatchedReceiverAccepts ? "unmatched_receiver_accepts" : "proposer_exhausted";
}

// One entry of a rejection chain: `proposer_side` is the agent on the
// proposing side, `receiver_side` the agent on the receiving side.
struct ChainStep {
    AgentId proposer_side = kNoAgent;
    AgentId receiver_side = kNoAgent;
    bool accept = false;

    bool operator==(const ChainStep&) const = default;
};

struct RejectionChain {
    std::uint64_t start_t = 0;
    std::uint64_t proposals = 0;
    std::vector<ChainStep> events;
    ChainTermination termination = ChainTermination::UnmatchedReceiverAccepts;
    // The proposer whose list ran out, for ProposerExhausted chains.
    AgentId exhausted = kNoAgent;
    std::size_t max_consecutive_rejections = 0;
};

// Splits a recorded proposal log into maximal rejection chains. A chain keeps
// going while the agent that was just rejected or displaced is the next to
// propose; it ends when a free receiver accepts, or when that agent has no
// list left (then it never proposes again and must finish unmatched).
inline std::vector<RejectionChain> extract_rejection_chains(const DAResult& result) {
    if (!result.trace_recorded) throw StructuralError("DA result carries no proposal log");
    const auto& log = result.proposal_log;
    if (log.size() != result.total_proposals) throw StructuralError("proposal log length differs from total_proposals");

    std::vector<bool> unmatched(result.proposals_made.size(), false);
    for (AgentId p : result.unmatched_proposers) {
        if (p >= unmatched.size()) throw StructuralError("unmatched proposer id out of range");
        unmatched[p] = true;
    }

    std::vector<RejectionChain> chains;
    AgentId pending = kNoAgent;
    std::size_t run = 0;

    auto close_exhausted = [&](AgentId who) {
        if (!unmatched[who])
            throw StructuralError("agent " + std::to_string(who) + " stopped proposing mid-chain but ends matched");
        chains.back().termination = ChainTermination::ProposerExhausted;
        chains.back().exhausted = who;
    };

    for (std::size_t i = 0; i < log.size(); ++i) {
        const ProposalEvent& ev = log[i];
        if (ev.t != i + 1) throw StructuralError("proposal log time steps are not consecutive from 1");
        if (ev.proposer >= result.proposals_made.size() || ev.proposee >= result.proposals_received.size())
            throw StructuralError("proposal log references an out-of-range agent");

        if (pending != kNoAgent && ev.proposer != pending) {
            close_exhausted(pending);
            pending = kNoAgent;
        }
        if (pending == kNoAgent) {
            chains.push_back({});
            chains.back().start_t = ev.t;
            run = 0;
        }
        RejectionChain& chain = chains.back();
        ++chain.proposals;
        switch (ev.outcome) {
            case Outcome::AcceptedFree:
                chain.events.push_back({ev.proposer, ev.proposee, true});
                chain.termination = ChainTermination::UnmatchedReceiverAccepts;
                run = 0;
                pending = kNoAgent;
                break;
            case Outcome::AcceptedDisplacing:
                if (ev.displaced == kNoAgent || ev.displaced >= result.proposals_made.size())
                    throw StructuralError("displacing event without a valid displaced agent");
                chain.events.push_back({ev.proposer, ev.proposee, true});
                chain.events.push_back({ev.displaced, ev.proposee, false});
                run = 0;
                pending = ev.displaced;
                break;
            case Outcome::Rejected:
                chain.events.push_back({ev.proposer, ev.proposee, false});
                chain.max_consecutive_rejections = std::max(chain.max_consecutive_rejections, ++run);
                pending = ev.proposer;
                break;
        }
    }
    if (pending != kNoAgent) close_exhausted(pending);
    return chains;
}

// `t proposer proposee outcome [displaced]`, one record per line.
inline void write_trace(std::ostream& out, const DAResult& result) {
    if (!result.trace_recorded) throw StructuralError("DA result carries no proposal log");
    for (const auto& ev : result.proposal_log) {
        out << ev.t << ' ' << ev.proposer << ' ' << ev.proposee << ' ' << to_string(ev.outcome);
        if (ev.outcome == Outcome::AcceptedDisplacing) out << ' ' << ev.displaced;
        out << '\n';
    }
}

inline nlohmann::json chain_to_json(const RejectionChain& chain) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& s : chain.events)
        events.push_back({s.proposer_side, s.receiver_side, s.accept ? "accept" : "reject"});
    nlohmann::json j = {{"start_t", chain.start_t},
                        {"proposals", chain.proposals},
                        {"termination", std::string(to_string(chain.termination))},
                        {"max_consecutive_rejections", chain.max_consecutive_rejections},
                        {"events", std::move(events)}};
    if (chain.exhausted != kNoAgent) j["exhausted"] = chain.exhausted;
    return j;
}

// One JSON object per line.
inline void write_chains(std::ostream& out, const std::vector<RejectionChain>& chains) {
    for (const auto& c : chains) out << chain_to_json(c).dump() << '\n';
}

}  // namespace pmatch

#endif  // PMATCH_CHAINS_HPP
