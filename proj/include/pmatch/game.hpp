#ifndef PMATCH_GAME_HPP
#define PMATCH_GAME_HPP

/*
 * The Good/Bad/Neutral game: each round yields G with probability p_G, B with
 * probability at least p_B and N otherwise. G wins; `streak` consecutive B's
 * lose. In the tight game B has probability exactly p_B.
 *
 * Two formulas are provided for the tight game:
 *
 *     win_prob_closed_form  p_G (1 - p_B)     / (p_G + p_N p_B^streak)
 *     win_prob_exact        p_G (1 - p_B^k)   / (p_G + p_N p_B^k),  k = streak
 *
 * The first solves P = p_G + p_N P (1 + p_B + ... + p_B^{k-1}), a recurrence
 * that drops the wins where G ends a partial run of B's. It is the exact win
 * probability only when that run is counted as a loss, and for streak >= 2 it
 * is strictly below the true value. The second comes from the full run-length
 * chain and is what simulate_game estimates for the tight policy.
 *
 * An adversary may raise the per-round B probability (taking the mass from N)
 * depending on the history; that never helps the player, which
 * coupled_dominance_check demonstrates trial by trial.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pmatch/error.hpp"
#include "pmatch/parallel.hpp"
#include "pmatch/rng.hpp"
#include "pmatch/stats.hpp"

namespace pmatch {

struct GameParams {
    double p_good = 0.0;
    double p_bad = 0.0;
    double p_neutral = 0.0;
    std::uint32_t streak = 1;

    void validate() const {
        if (!(p_good >= 0.0 && p_bad >= 0.0 && p_neutral >= 0.0))
            throw ParameterError("game probabilities must be non-negative");
        if (p_good + p_bad + p_neutral > 1.0 + 1e-12) throw ParameterError("p_G + p_B + p_N must not exceed 1");
        if (streak < 1) throw ParameterError("streak must be at least 1");
    }
};

enum class GameEvent : std::uint8_t { Good, Bad, Neutral };

// What an adversary may look at when choosing this round's B probability.
struct RoundState {
    std::uint64_t round = 1;  // 1-based
    std::uint32_t bad_run = 0;  // current run of consecutive B's
    std::uint64_t bads = 0;     // B's so far
};

struct AdversaryPolicy {
    std::string name;
    std::function<double(const GameParams&, const RoundState&)> bad_probability;
};

inline AdversaryPolicy tight_policy() {
    return {"tight", [](const GameParams& g, const RoundState&) { return g.p_bad; }};
}

// All non-good mass goes to B: no neutral rounds ever.
inline AdversaryPolicy maximal_policy() {
    return {"maximal", [](const GameParams& g, const RoundState&) { return 1.0 - g.p_good; }};
}

// Tight on odd rounds, maximal on even rounds.
inline AdversaryPolicy alternating_policy() {
    return {"alternating",
            [](const GameParams& g, const RoundState& s) { return s.round % 2 == 1 ? g.p_bad : 1.0 - g.p_good; }};
}

inline AdversaryPolicy policy_by_name(std::string_view name) {
    if (name == "tight") return tight_policy();
    if (name == "maximal") return maximal_policy();
    if (name == "alternating") return alternating_policy();
    throw ParameterError("unknown policy '" + std::string(name) + "' (expected tight, maximal, alternating)");
}

inline void require_tight(const GameParams& g, const char* what) {
    g.validate();
    if (std::abs(g.p_good + g.p_bad + g.p_neutral - 1.0) > 1e-12)
        throw ParameterError(std::string(what) + " needs p_G + p_B + p_N = 1");
}

// Edge cases for both: p_G = 0 never wins; p_B = 0 with p_G > 0 always wins.
inline double win_prob_closed_form(const GameParams& g) {
    require_tight(g, "closed form");
    if (g.p_good == 0.0) return 0.0;
    return g.p_good * (1.0 - g.p_bad) / (g.p_good + g.p_neutral * std::pow(g.p_bad, static_cast<double>(g.streak)));
}

inline double win_prob_exact(const GameParams& g) {
    require_tight(g, "exact win probability");
    if (g.p_good == 0.0) return 0.0;
    const double run = std::pow(g.p_bad, static_cast<double>(g.streak));
    return g.p_good * (1.0 - run) / (g.p_good + g.p_neutral * run);
}

// The looser bound p_G / p_B^streak.
inline double win_prob_bound(const GameParams& g) {
    g.validate();
    if (g.p_bad == 0.0) throw DivisionError("bound p_G / p_B^streak is undefined for p_B = 0");
    return g.p_good / std::pow(g.p_bad, static_cast<double>(g.streak));
}

inline constexpr std::uint64_t kGameRoundCap = 10'000'000;
inline constexpr std::size_t kGameChunk = 4096;

struct GameSimulation {
    std::uint64_t trials = 0;
    std::uint64_t wins = 0;
    std::uint64_t losses = 0;
    std::uint64_t timeouts = 0;
    double fraction = 0.0;
    Interval ci;
};

namespace detail {

inline double checked_bad_probability(const GameParams& g, const AdversaryPolicy& policy, const RoundState& s) {
    const double pb = policy.bad_probability(g, s);
    if (!(pb >= g.p_bad - 1e-15) || pb > 1.0 - g.p_good + 1e-15)
        throw ContractViolation("policy '" + policy.name + "' chose p_B^i = " + std::to_string(pb) + " at round " +
                                std::to_string(s.round) + ", outside [p_B, 1 - p_G]");
    return pb;
}

inline void advance(RoundState& s, GameEvent e) {
    ++s.round;
    if (e == GameEvent::Bad) {
        ++s.bad_run;
        ++s.bads;
    } else {
        s.bad_run = 0;
    }
}

enum class GameEnd : std::uint8_t { Win, Loss, Timeout };

inline GameEnd play_once(const GameParams& g, const AdversaryPolicy& policy, Rng& rng) {
    RoundState s;
    while (s.round <= kGameRoundCap) {
        const double pb = checked_bad_probability(g, policy, s);
        const double u = rng.uniform();
        const GameEvent e = u < g.p_good ? GameEvent::Good : (u < g.p_good + pb ? GameEvent::Bad : GameEvent::Neutral);
        if (e == GameEvent::Good) return GameEnd::Win;
        advance(s, e);
        if (s.bad_run >= g.streak) return GameEnd::Loss;
    }
    return GameEnd::Timeout;
}

}  // namespace detail

// Monte Carlo estimate with a 95% Wilson interval. Trials are split into fixed
// chunks with their own streams, so results do not depend on `workers`.
inline GameSimulation simulate_game(const GameParams& g, const AdversaryPolicy& policy, std::uint64_t trials,
                                    std::uint64_t seed, std::size_t workers = 1) {
    g.validate();
    if (trials < 1) throw ParameterError("trials must be at least 1");
    struct Counts {
        std::uint64_t wins = 0, losses = 0, timeouts = 0;
    };
    const std::size_t chunks = (trials + kGameChunk - 1) / kGameChunk;
    auto per_chunk = run_indexed(chunks, workers, [&](std::size_t chunk) {
        Rng rng(derive_seed(seed, chunk));
        Counts c;
        const std::uint64_t begin = chunk * kGameChunk;
        const std::uint64_t end = std::min<std::uint64_t>(trials, begin + kGameChunk);
        for (std::uint64_t i = begin; i < end; ++i) {
            switch (detail::play_once(g, policy, rng)) {
                case detail::GameEnd::Win: ++c.wins; break;
                case detail::GameEnd::Loss: ++c.losses; break;
                case detail::GameEnd::Timeout: ++c.timeouts; break;
            }
        }
        return c;
    });
    GameSimulation out;
    out.trials = trials;
    for (const auto& c : per_chunk) {
        out.wins += c.wins;
        out.losses += c.losses;
        out.timeouts += c.timeouts;
    }
    out.fraction = static_cast<double>(out.wins) / static_cast<double>(trials);
    out.ci = wilson_interval(out.wins, trials);
    return out;
}

struct CouplingReport {
    std::uint64_t trials = 0;
    std::uint64_t tight_wins = 0;
    std::uint64_t adversarial_wins = 0;
    std::uint64_t adversarial_loss_tight_win = 0;
    std::uint64_t adversarial_win_tight_loss = 0;  // must stay 0
    std::uint64_t identical_sequences = 0;
    std::uint64_t timeouts = 0;

    double adversarial_loss_tight_win_fraction() const {
        return trials ? static_cast<double>(adversarial_loss_tight_win) / static_cast<double>(trials) : 0.0;
    }
};

// Plays the tight game S' and derives the adversarial game S from it: G and B
// carry over, and a tight N becomes an adversarial N with probability
// (1 - p_G - p_B^i) / (1 - p_G - p_B), otherwise B. S thus has B wherever S'
// does, so S' losing forces S to lose.
inline CouplingReport coupled_dominance_check(const GameParams& g, const AdversaryPolicy& policy, std::uint64_t trials,
                                              std::uint64_t seed, std::size_t workers = 1) {
    g.validate();
    if (trials < 1) throw ParameterError("trials must be at least 1");
    const double tight_neutral = 1.0 - g.p_good - g.p_bad;
    const std::size_t chunks = (trials + kGameChunk - 1) / kGameChunk;
    auto per_chunk = run_indexed(chunks, workers, [&](std::size_t chunk) {
        Rng rng(derive_seed(seed, chunk));
        CouplingReport r;
        const std::uint64_t begin = chunk * kGameChunk;
        const std::uint64_t end = std::min<std::uint64_t>(trials, begin + kGameChunk);
        for (std::uint64_t i = begin; i < end; ++i) {
            RoundState tight_state, adv_state;
            bool adv_done = false, adv_won = false, tight_won = false, identical = true, timed_out = true;
            while (tight_state.round <= kGameRoundCap) {
                const double u = rng.uniform();
                const double v = rng.uniform();
                const GameEvent te =
                    u < g.p_good ? GameEvent::Good : (u < g.p_good + g.p_bad ? GameEvent::Bad : GameEvent::Neutral);
                if (!adv_done) {
                    const double pb = detail::checked_bad_probability(g, policy, adv_state);
                    GameEvent ae = te;
                    if (te == GameEvent::Neutral) {
                        const double keep = tight_neutral > 0.0 ? (1.0 - g.p_good - pb) / tight_neutral : 1.0;
                        ae = v < keep ? GameEvent::Neutral : GameEvent::Bad;
                    }
                    if (ae != te) identical = false;
                    if (ae == GameEvent::Good) {
                        adv_done = true;
                        adv_won = true;
                    } else {
                        detail::advance(adv_state, ae);
                        if (adv_state.bad_run >= g.streak) adv_done = true;
                    }
                }
                if (te == GameEvent::Good) {
                    tight_won = true;
                    timed_out = false;
                    break;
                }
                detail::advance(tight_state, te);
                if (tight_state.bad_run >= g.streak) {
                    timed_out = false;
                    break;
                }
            }
            ++r.trials;
            if (timed_out) {
                ++r.timeouts;
                continue;
            }
            r.tight_wins += tight_won;
            r.adversarial_wins += adv_won;
            r.adversarial_loss_tight_win += (tight_won && !adv_won);
            r.adversarial_win_tight_loss += (adv_won && !tight_won);
            r.identical_sequences += identical;
        }
        return r;
    });
    CouplingReport out;
    for (const auto& r : per_chunk) {
        out.trials += r.trials;
        out.tight_wins += r.tight_wins;
        out.adversarial_wins += r.adversarial_wins;
        out.adversarial_loss_tight_win += r.adversarial_loss_tight_win;
        out.adversarial_win_tight_loss += r.adversarial_win_tight_loss;
        out.identical_sequences += r.identical_sequences;
        out.timeouts += r.timeouts;
    }
    return out;
}

}  // namespace pmatch

#endif  // PMATCH_GAME_HPP
