#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "jafun/conformance.hpp"
#include "jafun/frontend.hpp"
#include "jafun/heap.hpp"
#include "jafun/program.hpp"
#include "jafun/semantics.hpp"
#include "jafun/syntax.hpp"
#include "jafun/typed_semantics.hpp"
#include "jafun/typesystem.hpp"

namespace {

// Exit codes: 0 normal result / clean check, 1 uncaught exception,
// 2 stuck or lockstep divergence, 3 static error, 4 out of fuel.
constexpr int kExitOk = 0;
constexpr int kExitUncaught = 1;
constexpr int kExitStuck = 2;
constexpr int kExitStatic = 3;
constexpr int kExitFuel = 4;

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Loaded {
    jafun::Program program;
};

/// Parse + load + well_formed; diagnostics to stderr. nullopt on failure.
std::optional<Loaded> load_file(const std::string& path) {
    auto text = read_file(path);
    if (!text) {
        std::cerr << path << ": cannot read file\n";
        return std::nullopt;
    }
    jafun::ParseResult parsed = jafun::parse_program(*text);
    if (std::holds_alternative<jafun::ParseError>(parsed)) {
        std::cerr << path << ":" << to_string(std::get<jafun::ParseError>(parsed)) << "\n";
        return std::nullopt;
    }
    jafun::Program p = jafun::load(std::get<jafun::Program>(std::move(parsed)));
    auto violations = jafun::well_formed(p);
    if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << path << ": " << to_string(v) << "\n";
        return std::nullopt;
    }
    return Loaded{std::move(p)};
}

bool parse_entry(const std::string& entry, std::string& cls, std::string& method) {
    auto dot = entry.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == entry.size()) return false;
    cls = entry.substr(0, dot);
    method = entry.substr(dot + 1);
    return cls.find('.') == std::string::npos && method.find('.') == std::string::npos;
}

int run_check(const std::string& path, bool json) {
    auto loaded = load_file(path);
    if (!loaded) return kExitStatic;
    auto diagnostics = jafun::check_program(loaded->program);
    std::size_t errors = 0;
    for (const auto& d : diagnostics) {
        if (!jafun::is_warning(d)) ++errors;
        std::cerr << path << ":" << to_string(d) << "\n";
    }
    if (json) {
        nlohmann::ordered_json out;
        out["file"] = path;
        out["errors"] = errors;
        out["warnings"] = diagnostics.size() - errors;
        std::cout << out.dump() << "\n";
    } else if (errors == 0) {
        std::cout << path << ": ok (" << diagnostics.size() - errors << " warnings)\n";
    }
    return errors == 0 ? kExitOk : kExitStatic;
}

int outcome_exit_code(const jafun::Outcome& outcome) {
    switch (outcome.kind) {
    case jafun::Outcome::Kind::Normal: return kExitOk;
    case jafun::Outcome::Kind::Uncaught: return kExitUncaught;
    case jafun::Outcome::Kind::Stuck: return kExitStuck;
    case jafun::Outcome::Kind::OutOfFuel: return kExitFuel;
    }
    return kExitStuck;
}

void print_outcome(const jafun::Outcome& outcome, bool json) {
    if (json) {
        nlohmann::ordered_json out;
        out["outcome"] = to_string(outcome.kind);
        if (outcome.kind == jafun::Outcome::Kind::Normal)
            out["result"] = to_string(outcome.loc);
        if (outcome.kind == jafun::Outcome::Kind::Uncaught) {
            out["exception"] = outcome.cls;
            out["result"] = to_string(outcome.loc);
        }
        out["steps"] = outcome.steps;
        out["heapSize"] = outcome.heap.objects.size();
        std::cout << out.dump() << "\n";
        return;
    }
    switch (outcome.kind) {
    case jafun::Outcome::Kind::Normal:
        std::cout << "result: " << to_string(outcome.loc) << " after " << outcome.steps
                  << " steps\n";
        break;
    case jafun::Outcome::Kind::Uncaught:
        std::cout << "uncaught exception " << outcome.cls << " (" << to_string(outcome.loc)
                  << ") after " << outcome.steps << " steps\n";
        break;
    case jafun::Outcome::Kind::Stuck:
        std::cout << "stuck after " << outcome.steps << " steps\n";
        break;
    case jafun::Outcome::Kind::OutOfFuel:
        std::cout << "out of fuel after " << outcome.steps << " steps\n";
        break;
    }
}

/// Steps typed and untyped reducers together, checking erasure
/// commutation at every step. Returns nullopt on divergence.
std::optional<jafun::RunResult> run_lockstep(const jafun::Program& p, jafun::Heap h,
                                             jafun::TypedFrameStack tfs, std::size_t fuel) {
    jafun::RunResult result;
    std::size_t steps = 0;
    while (true) {
        jafun::FrameStack fs = jafun::erase_types(tfs);
        bool final = tfs.size() == 1 && tfs.front().fr.ctx.empty() &&
                     tfs.front().fr.redex->kind == jafun::Expr::Kind::Val &&
                     tfs.front().fr.redex->val.is_location();
        auto tr = jafun::typed_red(p, h, tfs);
        auto ur = jafun::red(p, h, fs);
        if (tr.has_value() != ur.has_value()) {
            std::cerr << "lockstep divergence at step " << steps
                      << ": one reducer stepped, the other did not\n";
            return std::nullopt;
        }
        if (!tr) {
            const jafun::Frame& fr = tfs.front().fr;
            jafun::Outcome out;
            out.heap = std::move(h);
            out.stack = jafun::erase_types(tfs);
            out.steps = steps;
            if (final) {
                out.loc = *jafun::as_location(fr.redex->val);
                if (fr.mode.is_normal()) {
                    out.kind = jafun::Outcome::Kind::Normal;
                } else {
                    out.kind = jafun::Outcome::Kind::Uncaught;
                    out.cls = fr.mode.exception_class();
                }
            } else {
                out.kind = jafun::Outcome::Kind::Stuck;
            }
            result.outcome = std::move(out);
            return result;
        }
        if (!(tr->heap == ur->heap) || !(jafun::erase_types(tr->stack) == ur->stack)) {
            std::cerr << "lockstep divergence at step " << steps
                      << ": heaps or erased stacks differ (rule " << rule_label(tr->rule)
                      << ")\n";
            return std::nullopt;
        }
        if (steps == fuel) {
            result.outcome = jafun::Outcome{jafun::Outcome::Kind::OutOfFuel, jafun::Loc::null(),
                                            "", std::move(h), jafun::erase_types(tfs), steps};
            return result;
        }
        h = std::move(tr->heap);
        tfs = std::move(tr->stack);
        ++steps;
        result.trace.push_back(jafun::TraceEvent{steps, tr->rule, tfs.size(),
                                                 h.objects.size(), tfs.back().fr.mode,
                                                 tfs.back().gamma.size()});
    }
}

int run_program(const std::string& path, const std::string& entry, const std::string& engine,
                std::size_t maxSteps, bool trace, bool dumpHeap, bool json) {
    auto loaded = load_file(path);
    if (!loaded) return kExitStatic;
    std::string cls, method;
    if (!parse_entry(entry, cls, method)) {
        std::cerr << "invalid entry point '" << entry << "' (expected Class.method)\n";
        return kExitStatic;
    }
    if (engine == "typed" || engine == "lockstep") {
        auto diagnostics = jafun::check_program(loaded->program);
        std::size_t errors = 0;
        for (const auto& d : diagnostics) {
            if (jafun::is_warning(d)) continue;
            std::cerr << path << ":" << to_string(d) << "\n";
            ++errors;
        }
        if (errors > 0) return kExitStatic;
    }
    auto start = jafun::start_typed(loaded->program, cls, method);
    if (!start) {
        std::cerr << "entry " << entry
                  << " not found, or the method takes parameters\n";
        return kExitStatic;
    }

    jafun::RunResult result;
    if (engine == "typed") {
        result = jafun::run_typed(loaded->program, std::move(start->heap),
                                  std::move(start->stack), maxSteps,
                                  jafun::TypedEngine::TypedRed);
    } else if (engine == "lockstep") {
        auto r = run_lockstep(loaded->program, std::move(start->heap),
                              std::move(start->stack), maxSteps);
        if (!r) return kExitStuck;
        result = std::move(*r);
    } else {
        jafun::FrameStack fs = jafun::erase_types(start->stack);
        result = jafun::run(loaded->program, std::move(start->heap), std::move(fs), maxSteps,
                            engine == "red2" ? jafun::UntypedEngine::Red2
                                             : jafun::UntypedEngine::Red);
    }
    if (trace) {
        for (const auto& ev : result.trace) std::cout << trace_event_json(ev) << "\n";
    }
    print_outcome(result.outcome, json);
    if (dumpHeap) std::cout << dump_heap(result.outcome.heap);
    return outcome_exit_code(result.outcome);
}

nlohmann::ordered_json report_to_json(const jafun::CheckReport& report) {
    nlohmann::ordered_json out;
    out["property"] = report.property;
    out["runs"] = report.programs;
    out["states"] = report.states;
    out["counterexamples"] = nlohmann::ordered_json::array();
    for (const auto& ce : report.counterexamples) {
        nlohmann::ordered_json c;
        c["property"] = ce.property;
        c["seed"] = ce.seed;
        c["stepIndex"] = ce.step_index;
        c["details"] = ce.details;
        c["program"] = jafun::print_program(ce.program);
        out["counterexamples"].push_back(std::move(c));
    }
    return out;
}

void print_report(const jafun::CheckReport& report, bool json) {
    if (json) {
        std::cout << report_to_json(report).dump() << "\n";
        return;
    }
    std::cout << report.property << ": " << report.programs << " runs, " << report.states
              << " states, " << report.counterexamples.size() << " counterexamples\n";
    for (const auto& ce : report.counterexamples) {
        std::cout << "  [" << ce.property << "] seed=" << ce.seed << " " << ce.details
                  << "\n";
    }
}

int run_fuzz(std::uint64_t seed, std::size_t count, const std::string& property, bool json) {
    jafun::GenConfig cfg;
    cfg.seed = seed;
    cfg.well_typed_only = true;
    std::vector<jafun::CheckReport> reports;
    if (property == "all" || property == "equiv") {
        reports.push_back(jafun::check_engine_equiv(cfg, count));
        jafun::GenConfig loose = cfg;
        loose.well_typed_only = false;
        jafun::CheckReport unrestricted = jafun::check_engine_equiv(loose, count);
        unrestricted.property = "engine-equivalence-unrestricted";
        reports.push_back(std::move(unrestricted));
    }
    if (property == "all" || property == "soundness")
        reports.push_back(jafun::check_soundness(cfg, count));
    if (property == "all" || property == "completeness")
        reports.push_back(jafun::check_completeness(cfg, count));
    if (property == "all" || property == "preservation")
        reports.push_back(jafun::check_preservation(cfg, count));
    if (property == "all" || property == "invariants")
        reports.push_back(jafun::check_structural_invariants(cfg, count));
    bool clean = true;
    for (const auto& report : reports) {
        print_report(report, json);
        if (!report.counterexamples.empty()) clean = false;
    }
    return clean ? kExitOk : kExitStuck;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jafun toolkit: parse, check and run Jafun programs"};
    app.require_subcommand(1);

    std::string file;
    std::string entry = "Main.main";
    std::string engine = "red";
    std::size_t maxSteps = 10000;
    bool trace = false;
    bool dumpHeap = false;
    bool json = false;
    std::uint64_t seed = 1;
    std::size_t count = 200;
    std::string property = "all";

    CLI::App* check = app.add_subcommand("check", "parse, well-formedness and type check");
    check->add_option("file", file, "input .jf file")->required();
    check->add_flag("--json", json, "machine-readable output");

    CLI::App* runCmd = app.add_subcommand("run", "run a program from an entry point");
    runCmd->add_option("file", file, "input .jf file")->required();
    runCmd->add_option("--entry", entry, "entry point (Class.method)");
    runCmd->add_option("--engine", engine, "red, red2, typed or lockstep")
        ->check(CLI::IsMember({"red", "red2", "typed", "lockstep"}));
    runCmd->add_option("--max-steps", maxSteps, "fuel limit");
    runCmd->add_flag("--trace", trace, "emit one JSON trace line per step");
    runCmd->add_flag("--dump-heap", dumpHeap, "dump the final heap");
    runCmd->add_flag("--json", json, "machine-readable outcome");

    CLI::App* fuzz = app.add_subcommand("fuzz", "property-check the reducers");
    fuzz->add_option("--seed", seed, "base seed");
    fuzz->add_option("--count", count, "programs per property");
    fuzz->add_option("--property", property,
                     "all, equiv, soundness, completeness, preservation or invariants")
        ->check(CLI::IsMember(
            {"all", "equiv", "soundness", "completeness", "preservation", "invariants"}));
    fuzz->add_flag("--json", json, "line-delimited JSON report");

    CLI11_PARSE(app, argc, argv);

    if (check->parsed()) return run_check(file, json);
    if (runCmd->parsed()) return run_program(file, entry, engine, maxSteps, trace, dumpHeap, json);
    return run_fuzz(seed, count, property, json);
}
