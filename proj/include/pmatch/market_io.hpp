#ifndef PMATCH_MARKET_IO_HPP
#define PMATCH_MARKET_IO_HPP

// Line-oriented instance dumps:
//
//   n m model d alpha seed
//   0: j j j ...        one line per candidate, in id order
//   ...
//   0: c c c ...        one line per job, in id order
//
// Reals are written in shortest round-trip form so load(dump(x)) == x.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pmatch/error.hpp"
#include "pmatch/market.hpp"

namespace pmatch {

inline std::string format_shortest(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline void dump_market(std::ostream& out, const MarketInstance& market) {
    if (market.representation != Representation::Explicit) throw StructuralError("only explicit instances can be dumped");
    const auto& cfg = market.config;
    out << market.jobs << ' ' << market.candidates << ' ' << to_string(cfg.model) << ' ' << format_shortest(cfg.d) << ' '
        << format_shortest(cfg.alpha) << ' ' << cfg.seed << '\n';
    for (Side side : {Side::Candidates, Side::Jobs}) {
        const auto& lists = market.lists(side);
        for (std::size_t a = 0; a < lists.size(); ++a) {
            out << a << ':';
            for (AgentId x : lists[a]) out << ' ' << x;
            out << '\n';
        }
    }
}

inline std::string dump_market(const MarketInstance& market) {
    std::ostringstream out;
    dump_market(out, market);
    return out.str();
}

namespace detail {

[[noreturn]] inline void parse_fail(std::size_t line_no, const std::string& what) {
    throw IoError("instance line " + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

inline MarketInstance load_market(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (!next_line()) throw IoError("instance file is empty");
    MarketInstance market;
    market.representation = Representation::Explicit;
    {
        std::istringstream header(line);
        std::string model;
        std::size_t n = 0, m = 0;
        double d = 0, alpha = 0;
        std::uint64_t seed = 0;
        if (!(header >> n >> m >> model >> d >> alpha >> seed)) detail::parse_fail(line_no, "bad header, expected 'n m model d alpha seed'");
        try {
            market.config.model = parse_model(model);
        } catch (const ParameterError& e) {
            detail::parse_fail(line_no, e.what());
        }
        market.config.n = n;
        market.config.alpha = alpha;
        market.config.d = d;
        market.config.seed = seed;
        market.jobs = n;
        market.candidates = m;
    }
    market.candidate_lists.assign(market.candidates, {});
    market.job_lists.assign(market.jobs, {});

    for (Side side : {Side::Candidates, Side::Jobs}) {
        auto& lists = market.lists(side);
        for (std::size_t a = 0; a < lists.size(); ++a) {
            if (!next_line()) detail::parse_fail(line_no, "missing list for " + std::string(to_string(side)) + " " + std::to_string(a));
            const auto colon = line.find(':');
            if (colon == std::string::npos) detail::parse_fail(line_no, "expected 'id: ...'");
            std::size_t id = 0;
            {
                std::istringstream label(line.substr(0, colon));
                if (!(label >> id) || id != a)
                    detail::parse_fail(line_no, "expected id " + std::to_string(a));
            }
            std::istringstream body(line.substr(colon + 1));
            long long x = 0;
            while (body >> x) {
                if (x < 0) detail::parse_fail(line_no, "negative agent id");
                lists[a].push_back(static_cast<AgentId>(x));
            }
            if (!body.eof()) detail::parse_fail(line_no, "non-numeric entry");
        }
    }
    if (next_line()) detail::parse_fail(line_no, "trailing content");
    try {
        validate_lists(market);
    } catch (const StructuralError& e) {
        throw IoError(std::string("instance is malformed: ") + e.what());
    }
    return market;
}

inline MarketInstance load_market(const std::string& text) {
    std::istringstream in(text);
    return load_market(in);
}

inline MarketInstance load_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open instance file '" + path + "'");
    try {
        return load_market(in);
    } catch (const IoError& e) {
        throw IoError(path + ": " + e.what());
    }
}

inline void save_market_file(const std::string& path, const MarketInstance& market) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write instance file '" + path + "'");
    dump_market(out, market);
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace pmatch

#endif  // PMATCH_MARKET_IO_HPP
