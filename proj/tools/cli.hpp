#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emuprob/csv.hpp"
#include "emuprob/emuprob.hpp"
#include "emuprob/verify.hpp"

namespace emuprob::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// A failed hypothesis check or verification: exit 1 with a reason line.
class HypothesisFailure : public Error {
public:
    using Error::Error;
    [[nodiscard]] const char* kind() const noexcept override { return "hypothesis"; }
};

namespace detail {

struct Options {
    std::string file;
    std::string set = "all";
    std::optional<StateId> start;
    std::string out_path;
    bool decimal = false;
    std::size_t workers = default_workers();
    bool strict_seed = false;
    std::optional<std::uint64_t> seed;
    std::size_t n = 0;
    bool n_given = false;
    std::string method;
    std::string tol = "1/1000000000000";
    std::size_t max_iter = 20000;
    bool show_map = false;
    std::size_t len = 10;
    std::size_t samples = 1;
    std::size_t virus_samples = 200000;
    bool distribution = false;
    std::optional<std::string> string_value;
    bool all_strings = false;
    bool weighted = false;
    std::size_t max_index = 20;
    bool concrete = false;
    std::string word;
    std::string base = "two-state";
    std::string output_perm;
    std::string input_perm;
    std::size_t k = 0;
    std::string suite = "all";
    std::string fixture;
};

struct Loaded {
    std::shared_ptr<const Universe> universe;
    std::map<std::string, std::vector<StateId>> sets;
};

inline Loaded load_universe(const std::string& path) {
    UniverseFile f = load_file(path);
    return {std::make_shared<const Universe>(std::move(f.universe)), std::move(f.sets)};
}

inline ComputerSet select_set(const Loaded& l, const std::string& name) {
    l.universe->require_minimized("analysis (run `minimize` first)");
    auto it = l.sets.find(name);
    if (it != l.sets.end()) return ComputerSet(l.universe, it->second);
    if (name == "all") return ComputerSet::all(l.universe);
    throw DomainError("no set named \"" + name + "\"");
}

inline StateId start_state(const Options& o, const ComputerSet& phi) {
    if (o.start) {
        if (!phi.contains(*o.start)) throw DomainError("start state " + std::to_string(*o.start) + " is not in the set");
        return *o.start;
    }
    if (phi.empty()) throw DomainError("empty set");
    return phi.members().front();
}

inline std::vector<StateId> ids(const ComputerSet& phi) { return {phi.members().begin(), phi.members().end()}; }

inline std::uint64_t require_seed(const Options& o, std::uint64_t fallback) {
    if (o.seed) return *o.seed;
    if (o.strict_seed) throw CLI::RequiredError("--seed (required by --strict-seed)");
    return fallback;
}

inline Fixture named_fixture(const std::string& name) {
    if (name == "two-state") return two_state_fixture();
    if (name == "figure3") return figure3_fixture();
    if (name == "toggle") return toggle_universe();
    throw CLI::ValidationError("fixture", "unknown fixture \"" + name + "\"");
}

inline std::string fixture_json(const std::string& name) {
    Fixture f = named_fixture(name);
    return serialize(f.phi.universe(), {{"phi", ids(f.phi)}});
}

inline Fixture base_fixture(const std::string& base) {
    if (base == "two-state" || base == "toggle" || base == "figure3") return named_fixture(base);
    Loaded l = load_universe(base);
    l.universe->require_minimized("sync base (run `minimize` first)");
    return {ComputerSet::all(l.universe), 0};
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline nlohmann::json parse_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// {"0": "1", "1": "0"}: a bijection between output strings.
inline OutputPermutation output_perm_from(const std::string& path) {
    nlohmann::json j = parse_json(path);
    if (!j.is_object()) throw ParseError(path + ": expected an object of output -> output");
    std::map<Output, Output> m;
    for (const auto& [from, to] : j.items()) {
        if (!to.is_string()) throw ParseError(path + ": image of \"" + from + "\" is not a string");
        m[Output::parse(from)] = Output::parse(to.get<std::string>());
    }
    return OutputPermutation(std::move(m));
}

/// {"order": n, "table": [...]} with 2^n images in lexicographic order.
inline InputPermutationTable input_perm_from(const std::string& path) {
    nlohmann::json j = parse_json(path);
    if (!j.is_object() || !j.contains("order") || !j.contains("table") || !j["order"].is_number_unsigned() ||
        !j["table"].is_array()) {
        throw ParseError(path + ": expected {\"order\": n, \"table\": [...]}");
    }
    std::vector<BitString> table;
    for (const auto& t : j["table"]) {
        if (!t.is_string()) throw ParseError(path + ": table entries must be strings");
        table.push_back(BitString::parse(t.get<std::string>()));
    }
    return {j["order"].get<std::size_t>(), std::move(table)};
}

inline void cmd_validate(const Options& o, std::ostream& out) {
    Loaded l = load_universe(o.file);
    out << "ok,states=" << l.universe->size() << ",minimized=" << (l.universe->minimized() ? "yes" : "no") << "\n";
}

inline void cmd_minimize(const Options& o, std::ostream& out) {
    UniverseFile f = load_file(o.file);
    Minimized m = minimize(f.universe);
    if (o.show_map) {
        out << "state,minimized\n";
        for (StateId q = 0; q < m.map.size(); ++q) out << q << "," << m.map[q] << "\n";
        return;
    }
    std::map<std::string, std::vector<StateId>> sets;
    for (const auto& [name, members] : f.sets) {
        std::vector<StateId> mapped;
        for (StateId q : members) mapped.push_back(m.map[q]);
        std::sort(mapped.begin(), mapped.end());
        mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
        sets[name] = std::move(mapped);
    }
    out << serialize(m.universe, sets);
}

inline void cmd_analyze(const Options& o, std::ostream& out) {
    ComputerSet phi = select_set(load_universe(o.file), o.set);
    out << "states," << phi.universe().size() << "\n";
    out << "members," << phi.size() << "\n";
    out << "branching," << (phi.branching() ? "yes" : "no") << "\n";
    out << "connected," << (phi.connected() ? "yes" : "no") << "\n";
    out << "irreducible," << (phi.irreducible() ? "yes" : "no") << "\n";
    out << "period," << (phi.period() ? std::to_string(*phi.period()) : "none") << "\n";
    out << "aperiodic," << (phi.aperiodic() ? "yes" : "no") << "\n";
    ComputerSet universal = universal_members(phi);
    out << "universal,";
    for (std::size_t i = 0; i < universal.size(); ++i) out << (i ? ";" : "") << universal.members()[i];
    out << "\n";
    if (phi.branching()) out << "class," << to_string(classify(phi).chain_class) << "\n";
}

inline void cmd_matrix(const Options& o, std::ostream& out) {
    ComputerSet phi = select_set(load_universe(o.file), o.set);
    EmulationMatrix e = emulation_matrix(phi);
    csv::write_matrix(out, e.members, e.entries, o.decimal);
}

inline void cmd_stationary(const Options& o, std::ostream& out) {
    ComputerSet phi = select_set(load_universe(o.file), o.set);
    if (o.method == "power") {
        PowerResult r = stationary_power(phi, parse_rational(o.tol), o.max_iter);
        if (!r.converged) {
            throw DomainError("power iteration did not converge in " + std::to_string(o.max_iter) + " iterations");
        }
        csv::write_vector(out, ids(phi), r.values, true);
        out << "iterations," << r.iterations << "\n";
        return;
    }
    StationaryResult r = stationary_exact(phi);
    csv::write_vector(out, ids(phi), r.pi, o.decimal);
    if (!r.limit_exists) out << "note,periodic chain: invariant vector only, n-step probabilities do not converge to it\n";
}

inline void cmd_nstep(const Options& o, std::ostream& out) {
    ComputerSet phi = select_set(load_universe(o.file), o.set);
    const StateId c = start_state(o, phi);
    std::vector<Rational> row;
    if (o.method == "tree") {
        for (const Dyadic& d : n_step_by_tree(c, phi, o.n)) row.push_back(d.to_rational());
    } else {
        row = n_step_computer(c, phi, o.n);
    }
    csv::write_vector(out, ids(phi), row, o.decimal);
}

inline void cmd_walk(const Options& o, std::ostream& out) {
    ComputerSet phi = select_set(load_universe(o.file), o.set);
    const StateId c = start_state(o, phi);
    const std::uint64_t seed = require_seed(o, 1);
    if (o.distribution) {
        auto freq = empirical_n_step(c, phi, o.len, o.samples, seed, o.workers);
        auto exact = n_step_computer(c, phi, o.len);
        out << "state,empirical,exact\n";
        for (std::size_t i = 0; i < phi.size(); ++i) {
            out << phi.members()[i] << "," << freq[i] << "," << to_string(exact[i]) << "\n";
        }
        out << "total_variation," << total_variation(freq, exact) << "\n";
        return;
    }
    out << "seed,bits,states,outputs\n";
    for (const auto& t : sample_walks(c, phi, o.len, o.samples, seed, o.workers)) out << format_trace(t) << "\n";
}

inline void cmd_probability(const Options& o, std::ostream& out) {
    ComputerSet phi = select_set(load_universe(o.file), o.set);
    if (o.weighted) {
        WeightedAverageReport r = weighted_average_identity(phi, o.n);
        if (!r.applicable) throw HypothesisFailure("inapplicable: " + r.failed_hypothesis);
        out << "output,stationary,weighted_average,equal\n";
        for (const auto& row : r.rows) {
            out << row.s.to_string() << "," << to_string(row.lhs) << "," << to_string(row.rhs) << ","
                << (row.lhs == row.rhs ? "yes" : "no") << "\n";
        }
        if (!r.holds()) throw HypothesisFailure("weighted-average identity violated");
        return;
    }
    StringDistribution d = o.n_given ? string_distribution_n(start_state(o, phi), phi, o.n) : stationary_string_distribution(phi);
    if (o.string_value) {
        const Output s = *o.string_value == "null" ? Output::undefined() : Output::parse(*o.string_value);
        StringDistribution one{{s, d.count(s) ? d.at(s) : Rational(0)}};
        csv::write_distribution(out, one, o.decimal);
        return;
    }
    csv::write_distribution(out, d, o.decimal);
}

inline void cmd_virus(const Options& o, std::ostream& out) {
    const std::uint64_t seed = require_seed(o, 7);
    VirusChain chain = virus_chain(o.max_index);
    NeverReturnEstimate r = never_return_estimate(chain, o.max_index, o.virus_samples, seed, o.workers);
    std::ostringstream num;
    num.setf(std::ios::fixed);
    num.precision(6);
    num << "estimate," << r.estimate << "\n";
    num << "ci95," << r.ci_low << "," << r.ci_high << "\n";
    out << "max_index," << o.max_index << "\nsamples," << r.samples << "\nsurvivors," << r.survivors << "\n" << num.str();
    out << "exact," << to_string(r.exact) << ",~" << to_decimal(r.exact) << "\n";
    if (o.concrete) {
        if (o.max_index > 12) throw ResourceError("concrete virus machines are limited to max_index <= 12");
        Fixture base = two_state_fixture();
        VirusMachines vm = virus_machines(o.max_index, base.phi.universe(), base.root);
        ComputerSet all = ComputerSet::all(vm.universe);
        out << "block,advance\n";
        for (std::size_t i = 1; i < o.max_index; ++i) {
            auto d = n_step_by_tree(vm.machine(i), all, i);
            out << i << "," << d[all.index_of(vm.machine(i + 1))].to_string() << "\n";
        }
    }
}

inline void cmd_sync(const Options& o, std::ostream& out) {
    Fixture base = base_fixture(o.base);
    SynchronizedSet s = synchronizing_universe(BitString::parse(o.word), base.phi.universe());
    ChainReport report = classify(s.phi);
    out << "word," << o.word << "\n";
    out << "states," << s.phi.universe().size() << "\n";
    out << "members," << s.phi.size() << "\n";
    out << "reference," << s.reference << "\n";
    out << "class," << to_string(report.chain_class) << "\n";
    if (report.chain_class == ChainClass::PositiveRecurrentFinite) {
        StationaryResult st = stationary_exact(s.phi);
        const Rational& pv = st.pi[s.phi.index_of(s.reference)];
        out << "pi_reference," << to_string(pv) << (o.decimal ? ",~" + to_decimal(pv) : "") << "\n";
        out << "bound," << to_string(pow2_inverse(s.word.size())) << "\n";
    }
    out << serialize(s.phi.universe(), {{"phi", ids(s.phi)}});
}

inline void cmd_transform(const Options& o, std::ostream& out) {
    if (o.output_perm.empty() == o.input_perm.empty()) {
        throw CLI::ValidationError("transform", "give exactly one of --output-perm and --input-perm");
    }
    Loaded l = load_universe(o.file);
    Transform t = o.output_perm.empty() ? Transform(input_perm_from(o.input_perm)) : Transform(output_perm_from(o.output_perm));
    TransformedUniverse tu = apply_transform(*l.universe, t);
    std::map<std::string, std::vector<StateId>> sets;
    for (const auto& [name, members] : l.sets) {
        std::vector<StateId> mapped;
        for (StateId q : members) mapped.push_back(tu.map[q]);
        std::sort(mapped.begin(), mapped.end());
        mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
        sets[name] = std::move(mapped);
    }
    out << serialize(*tu.universe, sets);
}

inline void cmd_quotient(const Options& o, std::ostream& out) {
    ComputerSet phi = select_set(load_universe(o.file), o.set);
    Quotient q = quotient_k(phi, o.k);
    out << "class,members\n";
    for (std::size_t i = 0; i < q.classes.size(); ++i) {
        out << i << ",";
        for (std::size_t j = 0; j < q.classes[i].size(); ++j) out << (j ? ";" : "") << q.classes[i][j];
        out << "\n";
    }
    std::vector<StateId> class_ids(q.classes.size());
    std::iota(class_ids.begin(), class_ids.end(), StateId{0});
    csv::write_matrix(out, class_ids, q.matrix, o.decimal);
    if (classify(phi).chain_class == ChainClass::PositiveRecurrentFinite) {
        csv::write_vector(out, class_ids, class_stationary(q, phi, stationary_exact(phi).pi), o.decimal);
    }
}

inline void cmd_verify(const Options& o, std::ostream& out) {
    const std::uint64_t seed = require_seed(o, 1);
    auto results = verify::run(o.suite, seed);
    for (const auto& r : results) {
        out << (r.passed ? "PASS" : "FAIL") << "," << r.suite << "," << r.name;
        if (!r.passed) out << "," << r.detail;
        out << "\n";
    }
    if (!results.empty() && !results.back().passed) throw HypothesisFailure("verification failed: " + results.back().name);
}

inline void cmd_fixture(const Options& o, std::ostream& out) { out << fixture_json(o.fixture); }

} // namespace detail

/// Runs one command line (without the program name). Output goes to `out`
/// unless --out names a file; errors are reported on `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    detail::Options o;
    CLI::App app{"Emulation-chain probability toolkit", "emuprob"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--out", o.out_path, "write results to this file instead of stdout");
    app.add_flag("--decimal", o.decimal, "add ~-marked 12-digit decimal renderings");
    app.add_option("--workers", o.workers, "worker threads for sampling")->check(CLI::PositiveNumber);
    app.add_flag("--strict-seed", o.strict_seed, "refuse to run randomized commands without --seed");

    auto file_arg = [&](CLI::App* sub) { sub->add_option("file", o.file, "universe file")->required()->check(CLI::ExistingFile); };
    auto set_opt = [&](CLI::App* sub) { sub->add_option("--set", o.set, "computer set name (default: all)"); };
    auto start_opt = [&](CLI::App* sub) { sub->add_option("--start", o.start, "start state (default: first member)"); };

    std::map<CLI::App*, void (*)(const detail::Options&, std::ostream&)> handlers;

    auto* validate = app.add_subcommand("validate", "check a universe file");
    file_arg(validate);
    handlers[validate] = detail::cmd_validate;

    auto* minimize_cmd = app.add_subcommand("minimize", "merge states with equal functions");
    file_arg(minimize_cmd);
    minimize_cmd->add_flag("--map", o.show_map, "print the state map instead of the universe");
    handlers[minimize_cmd] = detail::cmd_minimize;

    auto* analyze = app.add_subcommand("analyze", "flags, period and chain class of a set");
    file_arg(analyze);
    set_opt(analyze);
    handlers[analyze] = detail::cmd_analyze;

    auto* matrix = app.add_subcommand("matrix", "one-step emulation matrix");
    file_arg(matrix);
    set_opt(matrix);
    handlers[matrix] = detail::cmd_matrix;

    auto* stationary = app.add_subcommand("stationary", "stationary computer probabilities");
    file_arg(stationary);
    set_opt(stationary);
    stationary->add_option("--method", o.method, "exact or power")->check(CLI::IsMember({"exact", "power"}));
    stationary->add_option("--tol", o.tol, "power iteration tolerance, as p/q or an integer reciprocal");
    stationary->add_option("--max-iter", o.max_iter, "power iteration limit");
    handlers[stationary] = detail::cmd_stationary;

    auto* nstep = app.add_subcommand("nstep", "n-step computer probabilities");
    file_arg(nstep);
    set_opt(nstep);
    start_opt(nstep);
    nstep->add_option("-n", o.n, "number of steps")->required();
    nstep->add_option("--method", o.method, "tree or matrix")->check(CLI::IsMember({"tree", "matrix"}));
    handlers[nstep] = detail::cmd_nstep;

    auto* walk = app.add_subcommand("walk", "seeded random walks");
    file_arg(walk);
    set_opt(walk);
    start_opt(walk);
    walk->add_option("--seed", o.seed, "random seed");
    walk->add_option("--len", o.len, "steps per walk");
    walk->add_option("--samples", o.samples, "number of walks");
    walk->add_flag("--distribution", o.distribution, "print empirical end-state frequencies");
    handlers[walk] = detail::cmd_walk;

    auto* probability = app.add_subcommand("probability", "string probabilities");
    file_arg(probability);
    set_opt(probability);
    start_opt(probability);
    auto* n_opt = probability->add_option("-n", o.n, "walk length (default: stationary)");
    auto* string_opt = probability->add_option("--string", o.string_value, "single output (\"null\" for Undefined)");
    auto* all_opt = probability->add_flag("--all", o.all_strings, "every output (default)");
    string_opt->excludes(all_opt);
    probability->add_flag("--weighted", o.weighted, "check the weighted-average identity at order n");
    handlers[probability] = detail::cmd_probability;

    auto* virus = app.add_subcommand("virus", "never-return probability of the virus chain");
    virus->add_option("--max", o.max_index, "largest machine index");
    virus->add_option("--samples", o.virus_samples, "Monte-Carlo walks");
    virus->add_option("--seed", o.seed, "random seed");
    virus->add_flag("--concrete", o.concrete, "also report block probabilities of the concrete machines");
    handlers[virus] = detail::cmd_virus;

    auto* sync = app.add_subcommand("sync", "synchronizing-word universe");
    sync->add_option("--word", o.word, "synchronizing word")->required();
    sync->add_option("--base", o.base, "two-state, toggle, figure3 or a universe file");
    handlers[sync] = detail::cmd_sync;

    auto* transform = app.add_subcommand("transform", "apply an output or input permutation");
    file_arg(transform);
    transform->add_option("--output-perm", o.output_perm, "JSON object of output -> output")->check(CLI::ExistingFile);
    transform->add_option("--input-perm", o.input_perm, "JSON {\"order\": n, \"table\": [...]}")->check(CLI::ExistingFile);
    handlers[transform] = detail::cmd_transform;

    auto* quotient = app.add_subcommand("quotient", "k-equivalence classes and class matrix");
    file_arg(quotient);
    set_opt(quotient);
    quotient->add_option("--k", o.k, "equivalence depth")->required();
    handlers[quotient] = detail::cmd_quotient;

    auto* verify_cmd = app.add_subcommand("verify", "run property suites");
    verify_cmd->add_option("--suite", o.suite, "suite name or all");
    verify_cmd->add_option("--seed", o.seed, "seed for generated universes");
    handlers[verify_cmd] = detail::cmd_verify;

    auto* fixture = app.add_subcommand("construct-fixture", "print a built-in fixture");
    fixture->add_option("name", o.fixture, "two-state, figure3 or toggle")
        ->required()
        ->check(CLI::IsMember({"two-state", "figure3", "toggle"}));
    handlers[fixture] = detail::cmd_fixture;

    std::ostringstream buffer;
    auto flush = [&] {
        if (o.out_path.empty()) {
            out << buffer.str();
            return;
        }
        std::ofstream file(o.out_path, std::ios::binary);
        if (!file) throw ParseError("cannot write " + o.out_path);
        file << buffer.str();
    };
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        o.n_given = n_opt->count() > 0;
        if (!o.n_given && o.weighted) o.n_given = true;
        if (o.method.empty()) o.method = nstep->parsed() ? "matrix" : "exact";
        if (walk->parsed() && o.samples == 0) throw CLI::ValidationError("--samples", "must be positive");
        CLI::App* chosen = app.get_subcommands().front();
        handlers.at(chosen)(o, buffer);
        flush();
        return kExitOk;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::Error& e) {
        err << "error,usage," << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error," << e.kind() << "," << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "error," << e.kind() << "," << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        // results gathered before a failed check (verify) are still reported
        try {
            flush();
        } catch (const Error&) {
        }
        err << "error," << e.kind() << "," << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace emuprob::cli
