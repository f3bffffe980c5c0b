#ifndef PMATCH_TOOLS_CLI_HPP
#define PMATCH_TOOLS_CLI_HPP

// Command-line front end. Kept in a header so tests can run commands in-process.
//
// Exit codes: 0 success, 2 parameter error, 3 I/O error, 4 internal invariant
// violation.

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmatch/bins.hpp"
#include "pmatch/chains.hpp"
#include "pmatch/da.hpp"
#include "pmatch/error.hpp"
#include "pmatch/experiments.hpp"
#include "pmatch/game.hpp"
#include "pmatch/market.hpp"
#include "pmatch/market_io.hpp"
#include "pmatch/report.hpp"
#include "pmatch/stability.hpp"

namespace pmatch::cli {

enum ExitCode : int { kOk = 0, kParameterError = 2, kIoError = 3, kInvariantError = 4 };

// `key = value` lines; '#' starts a comment. Keys are long flag names.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParameterError("config line " + std::to_string(line_no) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

struct Params {
    std::size_t n = 1000;
    double alpha = 0.0;
    double d = 10.0;
    std::string model = "candidate-lists";
    std::string side = "cpda";
    std::uint64_t trials = 100;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string out;
    std::string trace;
    std::string chains;
    // simulate
    std::string dump;
    std::string matching_out;
    // sweep
    std::string grid;
    double lo = 0.0;
    double hi = 0.0;
    double rel_width = 0.05;
    // game
    double pg = 0.2;
    double pb = 0.5;
    double pn = 0.3;
    std::uint32_t streak = 2;
    std::string policy = "tight";
    // bins
    std::string stop = "fixed";
    std::uint64_t throws = 0;
    std::size_t k = 0;
    // verify
    std::string instance;
    std::string matching;
};

class Command {
public:
    Command(CLI::App& app, std::string name, std::string description) : sub_(app.add_subcommand(name, description)), name_(std::move(name)) {}

    template <class T>
    Command& option(const std::string& key, T& value, const std::string& help) {
        sub_->add_option("--" + key, value, help);
        keys_.push_back(key);
        printers_.push_back([&value, key] { return key + " = " + render(value); });
        return *this;
    }

    CLI::App* app() const { return sub_; }
    const std::string& name() const { return name_; }
    bool knows(const std::string& key) const { return std::find(keys_.begin(), keys_.end(), key) != keys_.end(); }

    void print_effective(std::ostream& err) const {
        err << "# pmatch " << name_ << " effective config\n";
        for (const auto& p : printers_) {
            const std::string line = p();
            if (line.size() > 2 && line.substr(line.size() - 2) == "= ") continue;
            err << line << '\n';
        }
    }

private:
    static std::string render(const std::string& s) { return s; }
    static std::string render(double x) { return format_shortest(x); }
    template <class I>
    static std::string render(const I& x) {
        return std::to_string(x);
    }

    CLI::App* sub_;
    std::string name_;
    std::vector<std::string> keys_;
    std::vector<std::function<std::string()>> printers_;
};

namespace detail {

inline MarketConfig market_config(const Params& p) {
    MarketConfig c;
    c.n = p.n;
    c.alpha = p.alpha;
    c.d = p.d;
    c.model = parse_model(p.model);
    c.seed = p.seed;
    return c;
}

inline void emit(const Params& p, std::ostream& out, const std::string& content) {
    if (p.out.empty())
        out << content;
    else
        report_csv(p.out, content);
}

inline void write_text_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    body(f);
    f.flush();
    if (!f) throw IoError("write failed for '" + path + "'");
}

inline void export_trace(const Params& p, const DAResult& result) {
    if (p.trace.empty()) return;
    write_text_file(p.trace, [&](std::ostream& f) { write_trace(f, result); });
    const std::string chains_path = p.chains.empty() ? p.trace + ".chains.jsonl" : p.chains;
    const auto chains = extract_rejection_chains(result);
    write_text_file(chains_path, [&](std::ostream& f) { write_chains(f, chains); });
}

inline std::vector<std::pair<AgentId, AgentId>> read_matching_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matching file '" + path + "'");
    std::vector<std::pair<AgentId, AgentId>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long c = 0, j = 0;
        if (!(ls >> c)) continue;
        std::string extra;
        if (!(ls >> j) || c < 0 || j < 0 || (ls >> extra))
            throw IoError(path + ":" + std::to_string(line_no) + ": expected 'c j'");
        pairs.emplace_back(static_cast<AgentId>(c), static_cast<AgentId>(j));
    }
    return pairs;
}

inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParameterError("bad grid value '" + item + "'");
        }
    }
    return out;
}

inline int cmd_simulate(const Params& p, std::ostream& out, std::ostream& err) {
    const MarketConfig cfg = market_config(p);
    const ProposingSide side = parse_proposing_side(p.side);
    const bool need_explicit = !p.dump.empty() || !p.matching_out.empty() ||
                               cfg.model != (side == ProposingSide::CPDA ? Model::CandidateLists : Model::JobLists);
    const bool trace = !p.trace.empty();
    DAResult result;
    if (need_explicit) {
        const MarketInstance inst = sample_market(cfg);
        if (!p.dump.empty()) save_market_file(p.dump, inst);
        result = run_da(inst, side, {.record_trace = trace});
        if (!find_blocking_pairs(inst, Matching::from_result(result)).empty())
            throw InvariantViolation("DA output has a blocking pair");
    } else {
        result = run_da_lazy(cfg, side, trace);
    }
    if (!p.matching_out.empty()) {
        write_text_file(p.matching_out, [&](std::ostream& f) {
            for (auto [c, j] : Matching::from_result(result).pairs()) f << c << ' ' << j << '\n';
        });
    }
    export_trace(p, result);
    emit(p, out, to_csv(write_simulate_csv, std::vector<SimulateRow>{simulate_row(cfg, result)}));
    (void)err;
    return kOk;
}

inline int cmd_sweep(const Params& p, std::ostream& out, std::ostream& err) {
    SweepSpec spec;
    spec.n = p.n;
    spec.alpha = p.alpha;
    spec.model = parse_model(p.model);
    spec.side = parse_proposing_side(p.side);
    spec.seed = p.seed;
    spec.trials = p.trials;
    spec.workers = p.workers;
    spec.grid = parse_grid(p.grid);
    spec.lo = p.lo;
    spec.hi = p.hi;
    spec.relative_width = p.rel_width;
    if (spec.grid.empty() && spec.lo == 0.0 && spec.hi == 0.0) {
        const double d0 = predicted_threshold(static_cast<double>(p.n), p.alpha);
        spec.lo = std::max(1.0, 0.5 * d0);
        spec.hi = std::min(static_cast<double>(p.n), 2.0 * d0);
    }
    const SweepResult r = sweep_threshold(spec);
    for (auto [a, b] : r.monotonicity_violations)
        err << "# warning: perfect fraction drops beyond its 95% interval between d=" << format_real(a)
            << " and d=" << format_real(b) << '\n';
    if (!r.empirical_d0) err << "# note: no 0.5 crossing found in the evaluated range\n";
    emit(p, out, to_csv(write_sweep_csv, r));
    return kOk;
}

inline int cmd_rank(const Params& p, std::ostream& out, std::ostream&) {
    MarketConfig cfg = market_config(p);
    cfg.model = Model::CandidateLists;
    const RankProfile prof = measure_rank_profile(cfg, p.trials, p.workers);
    emit(p, out, to_csv(write_rank_csv, prof));
    return kOk;
}

inline int cmd_game(const Params& p, std::ostream& out, std::ostream&) {
    GameParams g{p.pg, p.pb, p.pn, p.streak};
    g.validate();
    GameRow row;
    row.params = g;
    row.policy = p.policy;
    if (std::abs(g.p_good + g.p_bad + g.p_neutral - 1.0) <= 1e-12) {
        row.closed_form = win_prob_closed_form(g);
        row.exact = win_prob_exact(g);
    }
    if (g.p_bad > 0.0) row.bound = win_prob_bound(g);
    row.sim = simulate_game(g, policy_by_name(p.policy), p.trials, p.seed, p.workers);
    emit(p, out, to_csv(write_game_csv, row));
    return kOk;
}

inline int cmd_bins(const Params& p, std::ostream& out, std::ostream&) {
    StopRule rule;
    if (p.stop == "fixed")
        rule = FixedThrows{p.throws};
    else if (p.stop == "occupied")
        rule = OccupiedReaches{p.k};
    else if (p.stop == "all")
        rule = AllOccupied{};
    else
        throw ParameterError("unknown stop rule '" + p.stop + "' (expected fixed, occupied, all)");
    if (p.trials < 1) throw ParameterError("trials must be at least 1");
    auto rows = run_indexed(p.trials, p.workers, [&](std::size_t i) {
        return bins_row(i, run_balls_in_bins(p.n, rule, derive_seed(p.seed, i)));
    });
    emit(p, out, to_csv(write_bins_csv, rows));
    return kOk;
}

inline int cmd_verify(const Params& p, std::ostream& out, std::ostream&) {
    if (p.instance.empty()) throw ParameterError("verify needs --instance");
    const MarketInstance inst = load_market_file(p.instance);
    const ProposingSide side = parse_proposing_side(p.side);
    std::optional<DAResult> da;
    if (p.matching.empty() || !p.trace.empty()) da = run_da(inst, side, {.record_trace = !p.trace.empty()});
    if (da) export_trace(p, *da);

    const Matching matching = p.matching.empty()
                                  ? Matching::from_result(*da)
                                  : Matching::from_pairs(inst.candidates, inst.jobs, read_matching_file(p.matching));
    const auto blocking = find_blocking_pairs(inst, matching, EdgePolicy::Lenient);
    std::ostringstream report;
    if (blocking.empty())
        report << "STABLE\n";
    else
        for (const auto& b : blocking) report << "blocking " << b.candidate << ' ' << b.job << ' ' << to_string(b.reason) << '\n';
    emit(p, out, report.str());
    return kOk;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    Params p;
    CLI::App app{"Random matching markets with truncated preferences", "pmatch"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;

    std::vector<std::unique_ptr<Command>> commands;
    auto add = [&](const std::string& name, const std::string& help) -> Command& {
        commands.push_back(std::make_unique<Command>(app, name, help));
        commands.back()->app()->add_option("--config", config_path, "key = value config file (flags override it)");
        return *commands.back();
    };

    add("simulate", "run one DA and print matching statistics")
        .option("n", p.n, "number of jobs")
        .option("alpha", p.alpha, "imbalance; m = round(n (1 + alpha))")
        .option("d", p.d, "degree / list length")
        .option("model", p.model, "symmetric | candidate-lists | job-lists")
        .option("side", p.side, "cpda | jpda")
        .option("seed", p.seed, "RNG seed")
        .option("out", p.out, "CSV output path (stdout when absent)")
        .option("trace", p.trace, "write the proposal trace here")
        .option("chains", p.chains, "rejection chain output (default <trace>.chains.jsonl)")
        .option("dump", p.dump, "write the sampled instance here")
        .option("matching-out", p.matching_out, "write the matching as 'c j' lines");
    add("sweep", "estimate P(perfect) over d and locate the 0.5 crossing")
        .option("n", p.n, "number of jobs")
        .option("alpha", p.alpha, "imbalance")
        .option("model", p.model, "symmetric | candidate-lists | job-lists")
        .option("side", p.side, "cpda | jpda")
        .option("trials", p.trials, "trials per d")
        .option("seed", p.seed, "RNG seed")
        .option("workers", p.workers, "worker threads")
        .option("out", p.out, "CSV output path")
        .option("grid", p.grid, "comma-separated d values (bisection when absent)")
        .option("lo", p.lo, "bisection lower d")
        .option("hi", p.hi, "bisection upper d")
        .option("rel-width", p.rel_width, "bisection stopping width relative to d");
    add("rank", "mean best-stable rank of the candidates under CPDA")
        .option("n", p.n, "number of jobs")
        .option("alpha", p.alpha, "imbalance")
        .option("d", p.d, "list length")
        .option("trials", p.trials, "trials")
        .option("seed", p.seed, "RNG seed")
        .option("workers", p.workers, "worker threads")
        .option("out", p.out, "CSV output path");
    add("game", "closed form and simulation of the good/bad/neutral game")
        .option("pg", p.pg, "probability of G")
        .option("pb", p.pb, "minimum probability of B")
        .option("pn", p.pn, "probability of N in the tight game")
        .option("streak", p.streak, "consecutive B's that lose")
        .option("trials", p.trials, "simulated games")
        .option("policy", p.policy, "tight | maximal | alternating")
        .option("seed", p.seed, "RNG seed")
        .option("workers", p.workers, "worker threads")
        .option("out", p.out, "CSV output path");
    add("bins", "balls-in-bins occupancy")
        .option("n", p.n, "number of bins")
        .option("stop", p.stop, "fixed | occupied | all")
        .option("throws", p.throws, "throws for --stop fixed")
        .option("k", p.k, "target occupied bins for --stop occupied")
        .option("trials", p.trials, "trials")
        .option("seed", p.seed, "RNG seed")
        .option("workers", p.workers, "worker threads")
        .option("out", p.out, "CSV output path");
    add("verify", "check a matching for blocking pairs")
        .option("instance", p.instance, "instance dump")
        .option("matching", p.matching, "'c j' pairs; DA output when absent")
        .option("side", p.side, "DA side used for --trace and when no matching is given")
        .option("trace", p.trace, "write the DA proposal trace here")
        .option("chains", p.chains, "rejection chain output (default <trace>.chains.jsonl)")
        .option("out", p.out, "report output path");

    try {
        // Splice config file entries in front of the user's flags so flags win.
        std::vector<std::string> args = raw_args;
        if (!args.empty()) {
            const Command* cmd = nullptr;
            for (const auto& c : commands)
                if (c->name() == args[0]) cmd = c.get();
            std::string cfg_file;
            for (std::size_t i = 1; i < args.size(); ++i) {
                if (args[i] == "--config" && i + 1 < args.size()) cfg_file = args[i + 1];
                if (args[i].rfind("--config=", 0) == 0) cfg_file = args[i].substr(9);
            }
            if (cmd && !cfg_file.empty()) {
                std::ifstream f(cfg_file);
                if (!f) throw IoError("cannot open config file '" + cfg_file + "'");
                std::stringstream buf;
                buf << f.rdbuf();
                std::vector<std::string> injected;
                for (auto& [key, value] : parse_config_text(buf.str())) {
                    if (!cmd->knows(key)) throw ParameterError("unknown config key '" + key + "' for " + cmd->name());
                    injected.push_back("--" + key);
                    injected.push_back(value);
                }
                args.insert(args.begin() + 1, injected.begin(), injected.end());
            }
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParameterError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kParameterError;
    }

    try {
        for (const auto& c : commands) {
            if (!c->app()->parsed()) continue;
            c->print_effective(err);
            if (c->name() == "simulate") return detail::cmd_simulate(p, out, err);
            if (c->name() == "sweep") return detail::cmd_sweep(p, out, err);
            if (c->name() == "rank") return detail::cmd_rank(p, out, err);
            if (c->name() == "game") return detail::cmd_game(p, out, err);
            if (c->name() == "bins") return detail::cmd_bins(p, out, err);
            if (c->name() == "verify") return detail::cmd_verify(p, out, err);
        }
        return kParameterError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kParameterError;
    } catch (const StructuralError& e) {
        err << "error: " << e.what() << '\n';
        return kParameterError;
    } catch (const ScaleError& e) {
        err << "error: " << e.what() << '\n';
        return kParameterError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInvariantError;
    }
}

}  // namespace pmatch::cli

#endif  // PMATCH_TOOLS_CLI_HPP
