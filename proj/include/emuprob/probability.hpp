#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emuprob/constructions.hpp"
#include "emuprob/emulation.hpp"
#include "emuprob/markov.hpp"
#include "emuprob/universe.hpp"

namespace emuprob {

/// Output -> probability, always carrying an Undefined entry.
using StringDistribution = std::map<Output, Rational>;

inline Rational total_mass(const StringDistribution& d) {
    Rational sum = 0;
    for (const auto& [s, p] : d) sum += p;
    return sum;
}

/// Outputs occurring in the universe plus Undefined.
inline std::vector<Output> alphabet_with_undefined(const Universe& u) {
    std::vector<Output> a = u.output_alphabet();
    if (a.empty() || a.back().defined()) a.push_back(Output::undefined());
    return a;
}

/// Number of length-n inputs ending in each state, counted by pushing
/// counts through the transition graph n times.
inline std::vector<BigInt> input_counts(const Universe& u, StateId c, std::size_t n,
                                        std::size_t cap = kDefaultEnumerationCap) {
    u.check_state(c);
    if (n > cap) throw ResourceError("input length " + std::to_string(n) + " exceeds the enumeration cap " + std::to_string(cap));
    std::vector<BigInt> count(u.size());
    count[c] = 1;
    for (std::size_t step = 0; step < n; ++step) {
        std::vector<BigInt> next(u.size());
        for (StateId q = 0; q < u.size(); ++q) {
            if (count[q] == 0) continue;
            next[u.step(q, 0)] += count[q];
            next[u.step(q, 1)] += count[q];
        }
        count = std::move(next);
    }
    return count;
}

/// #{x in {0,1}^n : C(x) = s} / 2^n.
inline Dyadic output_frequency(const Universe& u, StateId c, std::size_t n, const Output& s,
                               std::size_t cap = kDefaultEnumerationCap) {
    auto count = input_counts(u, c, n, cap);
    BigInt hits = 0;
    for (StateId q = 0; q < u.size(); ++q) {
        if (u.out(q) == s) hits += count[q];
    }
    return Dyadic(hits, n);
}

inline std::map<Output, Dyadic> output_frequencies(const Universe& u, StateId c, std::size_t n,
                                                   std::size_t cap = kDefaultEnumerationCap) {
    auto count = input_counts(u, c, n, cap);
    std::map<Output, Dyadic> result;
    for (const Output& s : alphabet_with_undefined(u)) result[s] = Dyadic::zero();
    for (StateId q = 0; q < u.size(); ++q) {
        if (count[q] != 0) result[u.out(q)] += Dyadic(count[q], n);
    }
    return result;
}

/// 1 - output frequency of Undefined.
inline Dyadic halting_probability(const Universe& u, StateId c, std::size_t n, std::size_t cap = kDefaultEnumerationCap) {
    Dyadic h = Dyadic::one();
    h -= output_frequency(u, c, n, Output::undefined(), cap);
    return h;
}

/// Probability that the n-step random walk from c over the Phi-tree ends at a
/// computer whose empty-input output is s: the sum of path probabilities of
/// the depth-n nodes x with C(x) = s.
inline Dyadic string_probability_n(StateId c, const ComputerSet& phi, std::size_t n, const Output& s,
                                   std::size_t cap = kDefaultEnumerationCap) {
    PhiTree tree = phi_tree(c, phi, n, cap);
    Dyadic sum;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].size() == n && phi.universe().out(tree.states[i]) == s) {
            sum += path_probability(c, phi, tree.nodes[i]);
        }
    }
    return sum;
}

inline StringDistribution string_distribution_n(StateId c, const ComputerSet& phi, std::size_t n,
                                               std::size_t cap = kDefaultEnumerationCap) {
    PhiTree tree = phi_tree(c, phi, n, cap);
    StringDistribution d;
    for (const Output& s : alphabet_with_undefined(phi.universe())) d[s] = 0;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].size() == n) d[phi.universe().out(tree.states[i])] += path_probability(c, phi, tree.nodes[i]).to_rational();
    }
    return d;
}

/// Same quantity through the matrix: sum of n-step computer probabilities
/// over members U with U(empty) = s.
inline StringDistribution string_distribution_via_computers(StateId c, const ComputerSet& phi, std::size_t n) {
    auto row = n_step_computer(c, phi, n);
    StringDistribution d;
    for (const Output& s : alphabet_with_undefined(phi.universe())) d[s] = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) d[phi.universe().out(phi.members()[i])] += row[i];
    return d;
}

/// Stationary string distribution: stationary mass per empty-input output.
inline StringDistribution stationary_string_distribution(const ComputerSet& phi) {
    ChainReport report = classify(phi);
    if (report.chain_class != ChainClass::PositiveRecurrentFinite) {
        throw ContractError(std::string("stationary string probability requires PositiveRecurrentFinite, got ") +
                            to_string(report.chain_class));
    }
    StationaryResult st = stationary_exact(phi);
    StringDistribution d;
    for (const Output& s : alphabet_with_undefined(phi.universe())) d[s] = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) d[phi.universe().out(phi.members()[i])] += st.pi[i];
    return d;
}

inline Rational stationary_string_probability(const ComputerSet& phi, const Output& s) {
    auto d = stationary_string_distribution(phi);
    auto it = d.find(s);
    return it == d.end() ? Rational(0) : it->second;
}

struct StringCkRow {
    Output s;
    Rational lhs;
    Rational rhs;
};

struct StringCkReport {
    std::vector<StringCkRow> rows;
    Rational max_discrepancy = 0;
};

/// mu_C^(m+n)(s) against sum_U mu_C^(m)(U) mu_U^(n)(s), for every s.
inline StringCkReport string_ck_check(const ComputerSet& phi, StateId c, std::size_t m, std::size_t n) {
    auto lhs = string_distribution_n(c, phi, m + n);
    auto first = n_step_by_tree(c, phi, m);
    StringDistribution rhs;
    for (const auto& [s, p] : lhs) rhs[s] = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (first[i].is_zero()) continue;
        const Rational w = first[i].to_rational();
        for (const auto& [s, p] : string_distribution_n(phi.members()[i], phi, n)) rhs[s] += w * p;
    }
    StringCkReport report;
    for (const auto& [s, p] : lhs) {
        report.rows.push_back({s, p, rhs[s]});
        Rational diff = abs(p - rhs[s]);
        if (diff > report.max_discrepancy) report.max_discrepancy = diff;
    }
    return report;
}

struct WeightedAverageRow {
    Output s;
    Rational lhs; // mu(s | Phi)
    Rational rhs; // sum_U mu(U | Phi) mu_U^(n)(s)
};

struct WeightedAverageReport {
    bool applicable = false;
    std::string failed_hypothesis; // empty when applicable
    std::vector<WeightedAverageRow> rows;

    [[nodiscard]] bool holds() const {
        if (!applicable) return false;
        for (const auto& r : rows) {
            if (r.lhs != r.rhs) return false;
        }
        return true;
    }
};

/// Stationary string probability against the stationary average of n-bit
/// output frequencies. For n >= 1 the set must be complete and closed, up to
/// n-equivalence, under every input transformation of order <= n; a failed
/// check yields an inapplicable report naming the hypothesis.
inline WeightedAverageReport weighted_average_identity(const ComputerSet& phi, std::size_t n) {
    WeightedAverageReport report;
    if (!phi.branching()) {
        report.failed_hypothesis = "branching";
        return report;
    }
    if (classify(phi).chain_class != ChainClass::PositiveRecurrentFinite) {
        report.failed_hypothesis = "positive recurrence";
        return report;
    }
    if (n >= 1) {
        if (n > 2) throw UnsupportedError("weighted-average hypothesis checks beyond order 2");
        if (!is_complete(phi)) {
            report.failed_hypothesis = "completeness";
            return report;
        }
        for (std::size_t order = 1; order <= n; ++order) {
            for (const auto& sigma : all_input_permutations(order)) {
                if (!sigma.proper()) continue;
                if (!closed_under(phi, sigma, n)) {
                    report.failed_hypothesis = "closure under " + sigma.describe() + " up to " + std::to_string(n) + "-equivalence";
                    return report;
                }
            }
        }
    }
    report.applicable = true;
    StationaryResult st = stationary_exact(phi);
    const Universe& u = phi.universe();
    StringDistribution rhs;
    for (const Output& s : alphabet_with_undefined(u)) rhs[s] = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        for (const auto& [s, f] : output_frequencies(u, phi.members()[i], n)) rhs[s] += st.pi[i] * f.to_rational();
    }
    StringDistribution lhs = stationary_string_distribution(phi);
    for (const auto& [s, value] : rhs) report.rows.push_back({s, lhs[s], value});
    return report;
}

} // namespace emuprob
