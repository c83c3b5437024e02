#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "emuprob/bits.hpp"
#include "emuprob/scalar.hpp"
#include "emuprob/universe.hpp"

namespace emuprob::csv {

/// Header of member ids, then one row of probabilities. With decimal set, a
/// third row repeats them as "~"-prefixed approximations.
inline void write_vector(std::ostream& os, const std::vector<StateId>& ids, const std::vector<Rational>& values,
                         bool decimal = false) {
    for (std::size_t i = 0; i < ids.size(); ++i) os << (i ? "," : "") << ids[i];
    os << "\n";
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << to_string(values[i]);
    os << "\n";
    if (decimal) {
        for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << "~" << to_decimal(values[i]);
        os << "\n";
    }
}

inline void write_matrix(std::ostream& os, const std::vector<StateId>& ids, const std::vector<std::vector<Rational>>& m,
                         bool decimal = false) {
    os << "state";
    for (StateId id : ids) os << "," << id;
    os << "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        os << ids[i];
        for (const Rational& r : m[i]) os << "," << (decimal ? "~" + to_decimal(r) : to_string(r));
        os << "\n";
    }
}

/// output,probability_num,probability_den; the empty string is an empty
/// field, Undefined is "null".
inline void write_distribution(std::ostream& os, const std::map<Output, Rational>& d, bool decimal = false) {
    os << "output,probability_num,probability_den" << (decimal ? ",approx" : "") << "\n";
    for (const auto& [s, p] : d) {
        os << s.to_string() << "," << numerator(p) << "," << denominator(p);
        if (decimal) os << ",~" << to_decimal(p);
        os << "\n";
    }
}

} // namespace emuprob::csv
