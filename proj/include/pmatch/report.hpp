#ifndef PMATCH_REPORT_HPP
#define PMATCH_REPORT_HPP

// CSV output. Reals are printed with 9 significant digits ("%.9g") so files
// are byte-stable for fixed inputs.

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pmatch/bins.hpp"
#include "pmatch/da.hpp"
#include "pmatch/error.hpp"
#include "pmatch/experiments.hpp"
#include "pmatch/game.hpp"

namespace pmatch {

inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

inline constexpr const char* kSweepHeader = "n,alpha,side,d,trials,perfect_frac,ci_lo,ci_hi,predicted_d0,empirical_d0";
inline constexpr const char* kRankHeader = "n,alpha,d,trials,mean_rank,bound,unmatched_frac";
inline constexpr const char* kSimulateHeader = "n,alpha,d,side,total_proposals,matched,perfect";
inline constexpr const char* kBinsHeader = "trial,n,throws,occupied,empty,qF";
inline constexpr const char* kGameHeader =
    "pg,pb,pn,streak,policy,trials,closed_form,exact,bound,sim_frac,ci_lo,ci_hi,timeouts";

inline void write_sweep_csv(std::ostream& out, const SweepResult& r) {
    out << kSweepHeader << '\n';
    const std::string d0 = r.empirical_d0 ? format_real(*r.empirical_d0) : "NA";
    for (const auto& p : r.grid) {
        out << r.n << ',' << format_real(r.alpha) << ',' << to_string(r.side) << ',' << format_real(p.d) << ','
            << p.trials << ',' << format_real(p.perfect_fraction) << ',' << format_real(p.ci_low) << ','
            << format_real(p.ci_high) << ',' << format_real(r.predicted_d0) << ',' << d0 << '\n';
    }
}

inline void write_rank_csv(std::ostream& out, const RankProfile& p) {
    out << kRankHeader << '\n';
    out << p.n << ',' << format_real(p.alpha) << ',' << format_real(p.d) << ',' << p.trials << ','
        << format_real(p.mean_rank) << ',' << format_real(p.bound) << ',' << format_real(p.unmatched_fraction) << '\n';
}

struct SimulateRow {
    std::size_t n = 0;
    double alpha = 0.0;
    double d = 0.0;
    ProposingSide side = ProposingSide::CPDA;
    std::uint64_t total_proposals = 0;
    std::size_t matched = 0;
    bool perfect = false;
};

inline SimulateRow simulate_row(const MarketConfig& cfg, const DAResult& r) {
    return {cfg.n, cfg.alpha, cfg.d, r.side, r.total_proposals, r.matched_count(), is_perfect(r)};
}

inline void write_simulate_csv(std::ostream& out, const std::vector<SimulateRow>& rows) {
    out << kSimulateHeader << '\n';
    for (const auto& s : rows)
        out << s.n << ',' << format_real(s.alpha) << ',' << format_real(s.d) << ',' << to_string(s.side) << ','
            << s.total_proposals << ',' << s.matched << ',' << (s.perfect ? 1 : 0) << '\n';
}

struct BinsRow {
    std::uint64_t trial = 0;
    std::size_t n = 0;
    std::uint64_t throws = 0;
    std::size_t occupied = 0;
    std::size_t empty = 0;
    double q_f = 0.0;
};

inline BinsRow bins_row(std::uint64_t trial, const BinOccupancy& occ) {
    return {trial, occ.bins(), occ.throws, occ.occupied, occ.empty(), acceptance_prob_estimate(occ).rejection};
}

inline void write_bins_csv(std::ostream& out, const std::vector<BinsRow>& rows) {
    out << kBinsHeader << '\n';
    for (const auto& b : rows)
        out << b.trial << ',' << b.n << ',' << b.throws << ',' << b.occupied << ',' << b.empty << ','
            << format_real(b.q_f) << '\n';
}

struct GameRow {
    GameParams params;
    std::string policy;
    std::optional<double> closed_form;  // NA unless p_G + p_B + p_N = 1
    std::optional<double> exact;
    std::optional<double> bound;        // NA when p_B = 0
    GameSimulation sim;
};

inline void write_game_csv(std::ostream& out, const GameRow& g) {
    auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("NA"); };
    out << kGameHeader << '\n';
    out << format_real(g.params.p_good) << ',' << format_real(g.params.p_bad) << ',' << format_real(g.params.p_neutral)
        << ',' << g.params.streak << ',' << g.policy << ',' << g.sim.trials << ',' << opt(g.closed_form) << ',' << opt(g.exact) << ','
        << opt(g.bound) << ',' << format_real(g.sim.fraction) << ',' << format_real(g.sim.ci.lo) << ','
        << format_real(g.sim.ci.hi) << ',' << g.sim.timeouts << '\n';
}

// Writes `content` to `path`, reporting failures with the path.
inline void report_csv(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

template <class Writer, class Value>
std::string to_csv(Writer&& writer, const Value& value) {
    std::ostringstream out;
    writer(out, value);
    return out.str();
}

}  // namespace pmatch

#endif  // PMATCH_REPORT_HPP
