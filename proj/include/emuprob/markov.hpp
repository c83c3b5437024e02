#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "emuprob/emulation.hpp"
#include "emuprob/rng.hpp"
#include "emuprob/scalar.hpp"
#include "emuprob/virus_chain.hpp"

namespace emuprob {

using Matrix = std::vector<std::vector<Rational>>;

/// Probability of reaching node x on the fair random walk over the Phi-tree
/// of c: each bit halves the mass when its sibling is also in the tree.
inline Dyadic path_probability(StateId c, const ComputerSet& phi, const BitString& x) {
    if (!phi.branching()) throw ContractError("path_probability requires a branching set");
    if (!phi.contains(c)) throw DomainError("state " + std::to_string(c) + " is not a member");
    const Universe& u = phi.universe();
    Dyadic mass = Dyadic::one();
    StateId q = c;
    for (std::size_t i = 0; i < x.size(); ++i) {
        StateId next = u.step(q, x[i]);
        if (!phi.contains(next)) throw DomainError("\"" + x.str() + "\" is not in the Phi-tree");
        if (phi.contains(u.step(q, 1 - x[i]))) mass = mass.half();
        q = next;
    }
    return mass;
}

/// One-step transition probabilities, rows indexed by emulator, columns by
/// emulated computer, both in member order.
struct EmulationMatrix {
    std::vector<StateId> members;
    Matrix entries;

    [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
    [[nodiscard]] const Rational& at(std::size_t i, std::size_t j) const { return entries[i][j]; }
};

inline EmulationMatrix emulation_matrix(const ComputerSet& phi) {
    if (!phi.branching()) throw ContractError("emulation_matrix requires a branching set");
    const Universe& u = phi.universe();
    const std::size_t n = phi.size();
    EmulationMatrix m{{phi.members().begin(), phi.members().end()}, Matrix(n, std::vector<Rational>(n, Rational(0)))};
    for (std::size_t i = 0; i < n; ++i) {
        StateId c = m.members[i];
        const bool both = phi.contains(u.step(c, 0)) && phi.contains(u.step(c, 1));
        for (int b = 0; b < 2; ++b) {
            StateId d = u.step(c, b);
            if (!phi.contains(d)) continue;
            m.entries[i][phi.index_of(d)] += both ? Rational(1, 2) : Rational(1);
        }
    }
    return m;
}

/// n-step computer probabilities by walking the Phi-tree explicitly and
/// summing path probabilities per end state. Member order.
inline std::vector<Dyadic> n_step_by_tree(StateId c, const ComputerSet& phi, std::size_t n,
                                          std::size_t cap = kDefaultEnumerationCap) {
    PhiTree tree = phi_tree(c, phi, n, cap);
    std::vector<Dyadic> dist(phi.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].size() != n) continue;
        dist[phi.index_of(tree.states[i])] += path_probability(c, phi, tree.nodes[i]);
    }
    return dist;
}

inline std::vector<Rational> row_times(const std::vector<Rational>& row, const Matrix& m) {
    std::vector<Rational> result(m.empty() ? 0 : m.front().size(), Rational(0));
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] == 0) continue;
        for (std::size_t j = 0; j < result.size(); ++j) {
            if (m[i][j] != 0) result[j] += row[i] * m[i][j];
        }
    }
    return result;
}

/// delta_c * E^n: the n-step distribution over members via the emulation matrix.
inline std::vector<Rational> n_step_computer(StateId c, const ComputerSet& phi, std::size_t n) {
    EmulationMatrix m = emulation_matrix(phi);
    std::vector<Rational> row(phi.size(), Rational(0));
    row[phi.index_of(c)] = 1;
    for (std::size_t k = 0; k < n; ++k) row = row_times(row, m.entries);
    return row;
}

/// Period of c in the Phi-restricted chain; nullopt when c never returns.
inline std::optional<std::size_t> period(StateId c, const ComputerSet& phi) {
    if (!phi.contains(c)) throw DomainError("state " + std::to_string(c) + " is not a member");
    return detail::restricted_period(phi.universe(), phi.indicator(), c);
}

enum class ChainClass { PositiveRecurrentFinite, PeriodicFinite, Reducible };

inline const char* to_string(ChainClass c) {
    switch (c) {
    case ChainClass::PositiveRecurrentFinite: return "PositiveRecurrentFinite";
    case ChainClass::PeriodicFinite: return "PeriodicFinite";
    case ChainClass::Reducible: return "Reducible";
    }
    return "?";
}

struct ChainReport {
    bool irreducible = false;
    std::optional<std::size_t> period; // common period when irreducible
    bool aperiodic = false;
    ChainClass chain_class = ChainClass::Reducible;
};

/// Finite-chain classification of the emulation process on a branching set.
inline ChainReport classify(const ComputerSet& phi) {
    if (!phi.branching()) throw ContractError("classify requires a branching set");
    ChainReport report;
    auto comp = detail::restricted_scc(phi.universe(), phi.indicator());
    const long first = phi.empty() ? -1 : comp[phi.members().front()];
    report.irreducible = !phi.empty() && std::all_of(phi.members().begin(), phi.members().end(),
                                                     [&](StateId q) { return comp[q] == first; });
    if (report.irreducible) report.period = period(phi.members().front(), phi);
    report.aperiodic = report.irreducible && report.period == std::size_t{1};
    if (!report.irreducible || !report.period) {
        report.chain_class = ChainClass::Reducible;
    } else {
        report.chain_class = report.aperiodic ? ChainClass::PositiveRecurrentFinite : ChainClass::PeriodicFinite;
    }
    return report;
}

/// Rank over the rationals (Gaussian elimination on a copy).
inline std::size_t rank(Matrix m) {
    std::size_t r = 0;
    const std::size_t rows = m.size();
    const std::size_t cols = rows ? m.front().size() : 0;
    for (std::size_t col = 0; col < cols && r < rows; ++col) {
        std::size_t pivot = r;
        while (pivot < rows && m[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[r], m[pivot]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (m[i][col] == 0) continue;
            Rational f = m[i][col] / m[r][col];
            for (std::size_t j = col; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        ++r;
    }
    return r;
}

/// E^T - I, whose one-dimensional kernel is spanned by the stationary vector.
inline Matrix stationary_system(const EmulationMatrix& e) {
    const std::size_t n = e.size();
    Matrix a(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = e.at(j, i) - (i == j ? 1 : 0);
    }
    return a;
}

struct StationaryResult {
    std::vector<Rational> pi; // member order
    /// False for periodic chains: pi is then the invariant measure, and the
    /// n-step probabilities do not converge to it.
    bool limit_exists = true;
};

/// Unique probability vector with pi * E = pi, by exact elimination on
/// (E^T - I) with the normalization row sum(pi) = 1 appended.
inline StationaryResult stationary_exact(const ComputerSet& phi) {
    ChainReport report = classify(phi);
    if (!report.irreducible || !report.period) {
        throw ContractError(std::string("stationary_exact requires an irreducible chain, got ") +
                            to_string(report.chain_class));
    }
    EmulationMatrix e = emulation_matrix(phi);
    const std::size_t n = e.size();
    Matrix a = stationary_system(e);
    for (auto& row : a) row.push_back(Rational(0));
    a.push_back(std::vector<Rational>(n + 1, Rational(1)));

    // Reduced row echelon form of the (n+1) x (n+1) augmented system.
    std::size_t r = 0;
    std::vector<std::size_t> pivot_col;
    for (std::size_t col = 0; col < n && r < a.size(); ++col) {
        std::size_t p = r;
        while (p < a.size() && a[p][col] == 0) ++p;
        if (p == a.size()) continue;
        std::swap(a[r], a[p]);
        Rational inv = 1 / a[r][col];
        for (std::size_t j = col; j <= n; ++j) a[r][j] *= inv;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r || a[i][col] == 0) continue;
            Rational f = a[i][col];
            for (std::size_t j = col; j <= n; ++j) a[i][j] -= f * a[r][j];
        }
        pivot_col.push_back(col);
        ++r;
    }
    if (r != n) throw InternalError("stationary system has rank " + std::to_string(r) + ", expected " + std::to_string(n));
    for (std::size_t i = r; i < a.size(); ++i) {
        if (a[i][n] != 0) throw InternalError("stationary system is inconsistent");
    }
    StationaryResult result;
    result.pi.assign(n, Rational(0));
    for (std::size_t i = 0; i < r; ++i) result.pi[pivot_col[i]] = a[i][n];
    if (row_times(result.pi, e.entries) != result.pi) throw InternalError("solution is not stationary");
    for (const auto& v : result.pi) {
        if (v <= 0) throw InternalError("stationary vector has a non-positive entry");
    }
    result.limit_exists = report.aperiodic;
    return result;
}

struct PowerResult {
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<Rational> values; // exact binary value of each floating iterate entry
    long double last_change = 0;
};

/// Power iteration from the point mass on the first member, in extended
/// precision, stopping once successive iterates differ by less than `tol`
/// in max norm.
inline PowerResult stationary_power(const ComputerSet& phi, const Rational& tol, std::size_t max_iter) {
    ChainReport report = classify(phi);
    if (!report.irreducible) throw ContractError("stationary_power requires an irreducible chain");
    EmulationMatrix e = emulation_matrix(phi);
    const std::size_t n = e.size();
    std::vector<std::vector<long double>> m(n, std::vector<long double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m[i][j] = e.at(i, j).convert_to<long double>();
    }
    const long double threshold = tol.convert_to<long double>();
    std::vector<long double> cur(n, 0.0L), next(n);
    cur[0] = 1.0L;
    PowerResult result;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        std::fill(next.begin(), next.end(), 0.0L);
        for (std::size_t i = 0; i < n; ++i) {
            if (cur[i] == 0) continue;
            for (std::size_t j = 0; j < n; ++j) next[j] += cur[i] * m[i][j];
        }
        long double change = 0;
        for (std::size_t j = 0; j < n; ++j) change = std::max(change, std::fabs(next[j] - cur[j]));
        cur.swap(next);
        result.iterations = it;
        result.last_change = change;
        if (change < threshold) {
            result.converged = true;
            break;
        }
    }
    result.values.reserve(n);
    for (long double v : cur) result.values.emplace_back(v);
    return result;
}

/// One sampled random walk on the Phi-tree.
struct WalkTrace {
    StateId start = 0;
    BitString bits;
    std::vector<StateId> visited;
    std::vector<Output> outputs;
    std::uint64_t seed = 0;
};

/// Fair walk of n steps from c: a coin decides only where both children are
/// members; a single member child is taken without consuming randomness.
inline WalkTrace sample_walk(StateId c, const ComputerSet& phi, std::size_t n, std::uint64_t seed) {
    if (!phi.branching()) throw ContractError("sample_walk requires a branching set");
    if (!phi.contains(c)) throw DomainError("state " + std::to_string(c) + " is not a member");
    const Universe& u = phi.universe();
    SplitMix64 rng(seed);
    WalkTrace trace{c, {}, {c}, {u.out(c)}, seed};
    StateId q = c;
    for (std::size_t i = 0; i < n; ++i) {
        const bool in0 = phi.contains(u.step(q, 0));
        const bool in1 = phi.contains(u.step(q, 1));
        int b = (in0 && in1) ? rng.bit() : (in1 ? 1 : 0);
        q = u.step(q, b);
        trace.bits.push_back(b);
        trace.visited.push_back(q);
        trace.outputs.push_back(u.out(q));
    }
    return trace;
}

/// "seed,bits,states,outputs" with ';' between states and between outputs.
inline std::string format_trace(const WalkTrace& t) {
    std::string line = std::to_string(t.seed) + "," + t.bits.str() + ",";
    for (std::size_t i = 0; i < t.visited.size(); ++i) line += (i ? ";" : "") + std::to_string(t.visited[i]);
    line += ",";
    for (std::size_t i = 0; i < t.outputs.size(); ++i) line += (i ? ";" : "") + t.outputs[i].to_string();
    return line;
}

inline std::size_t default_workers() {
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs body(i) for every i in [0, count) on `workers` threads, each taking a
/// contiguous range; body must write only to slot i of its own output.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t begin = count * w / workers;
            const std::size_t end = count * (w + 1) / workers;
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
}

/// Walk i uses the stream derive_seed(seed, i), so the result does not depend
/// on how samples are spread over workers.
inline std::vector<WalkTrace> sample_walks(StateId c, const ComputerSet& phi, std::size_t n, std::size_t samples,
                                           std::uint64_t seed, std::size_t workers = 1) {
    std::vector<WalkTrace> traces(samples);
    parallel_for(samples, workers, [&](std::size_t i) { traces[i] = sample_walk(c, phi, n, derive_seed(seed, i)); });
    return traces;
}

/// Empirical end-state frequencies of `samples` walks of length n (member order).
inline std::vector<double> empirical_n_step(StateId c, const ComputerSet& phi, std::size_t n, std::size_t samples,
                                            std::uint64_t seed, std::size_t workers = 1) {
    std::vector<std::size_t> ends(samples);
    parallel_for(samples, workers, [&](std::size_t i) {
        ends[i] = phi.index_of(sample_walk(c, phi, n, derive_seed(seed, i)).visited.back());
    });
    std::vector<double> freq(phi.size(), 0.0);
    for (std::size_t e : ends) freq[e] += 1.0;
    for (double& f : freq) f /= static_cast<double>(samples);
    return freq;
}

/// Half the L1 distance between two distributions.
inline double total_variation(const std::vector<double>& p, const std::vector<Rational>& q) {
    double sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::fabs(p[i] - q[i].convert_to<double>());
    return sum / 2;
}

struct NeverReturnEstimate {
    std::size_t horizon = 0;
    std::size_t samples = 0;
    std::size_t survivors = 0;
    double estimate = 0;
    double ci_low = 0;   // 95% Wilson interval
    double ci_high = 0;
    Rational exact;      // prod_{i=1}^{horizon-1} (1 - 2^-i)
};

/// Monte-Carlo probability that a walk from M_1 stays on the virus chain up
/// to M_horizon, i.e. no block i < horizon reads 0^i.
inline NeverReturnEstimate never_return_estimate(const VirusChain& chain, std::size_t horizon, std::size_t samples,
                                                 std::uint64_t seed, std::size_t workers = 1) {
    if (horizon < 2) throw DomainError("horizon must be at least 2");
    if (horizon > chain.max_index) throw DomainError("horizon exceeds the chain's max_index");
    if (samples == 0) throw DomainError("samples must be positive");
    std::vector<std::uint8_t> survived(samples, 0);
    parallel_for(samples, workers, [&](std::size_t s) {
        SplitMix64 rng(derive_seed(seed, s));
        for (std::size_t i = 1; i < horizon; ++i) {
            bool all_zero = true;
            for (std::size_t left = VirusChain::block_length(i); left > 0;) {
                const std::size_t take = std::min<std::size_t>(left, 64);
                std::uint64_t word = rng();
                if (take < 64) word >>= (64 - take);
                all_zero = all_zero && word == 0;
                left -= take;
            }
            if (all_zero) return;
        }
        survived[s] = 1;
    });
    NeverReturnEstimate r;
    r.horizon = horizon;
    r.samples = samples;
    for (auto v : survived) r.survivors += v;
    r.estimate = static_cast<double>(r.survivors) / static_cast<double>(samples);
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(samples);
    const double centre = (r.estimate + z * z / (2 * nn)) / (1 + z * z / nn);
    const double half = z / (1 + z * z / nn) * std::sqrt(r.estimate * (1 - r.estimate) / nn + z * z / (4 * nn * nn));
    r.ci_low = centre - half;
    r.ci_high = centre + half;
    r.exact = VirusChain::survival_product(horizon);
    return r;
}

} // namespace emuprob
