#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emuprob/universe.hpp"

namespace emuprob {

/// Contents of a universe file: the universe plus its named computer sets.
struct UniverseFile {
    Universe universe;
    std::map<std::string, std::vector<StateId>> sets;
};

namespace detail {

inline std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

inline std::string state_field(std::size_t index, const char* field) {
    return "states[" + std::to_string(index) + "]." + field;
}

inline long long require_int(const nlohmann::json& node, std::size_t index, const char* field) {
    if (!node.contains(field)) throw ParseError(state_field(index, field) + ": missing");
    const auto& value = node.at(field);
    if (!value.is_number_integer()) throw ParseError(state_field(index, field) + ": expected an integer");
    return value.get<long long>();
}

} // namespace detail

/// Parses a universe file. Type and format problems raise ParseError;
/// structural problems (ids, totality, targets, output length) are collected
/// and raised together as ValidationError.
inline UniverseFile load(const std::string& text, std::size_t max_output_bits = kDefaultMaxOutputBits) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), detail::line_of(text, e.byte));
    }
    if (!doc.is_object()) throw ParseError("top level: expected an object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "version" && key != "states" && key != "sets") throw ParseError("unknown field \"" + key + "\"");
    }
    if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"].get<long long>() != 1) {
        throw ParseError("version: expected 1");
    }
    if (!doc.contains("states") || !doc["states"].is_array()) throw ParseError("states: expected an array");

    const auto& raw_states = doc["states"];
    const std::size_t n = raw_states.size();
    std::vector<std::string> violations;
    std::vector<State> states(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = raw_states[i];
        if (!node.is_object()) throw ParseError("states[" + std::to_string(i) + "]: expected an object");
        for (const auto& [key, value] : node.items()) {
            if (key != "id" && key != "out" && key != "t0" && key != "t1") {
                throw ParseError("states[" + std::to_string(i) + "]: unknown field \"" + key + "\"");
            }
        }
        long long id = detail::require_int(node, i, "id");
        if (id != static_cast<long long>(i)) {
            violations.push_back(detail::state_field(i, "id") + ": expected " + std::to_string(i) + ", found " +
                                 std::to_string(id));
        }
        if (!node.contains("out")) throw ParseError(detail::state_field(i, "out") + ": missing");
        const auto& out = node["out"];
        if (out.is_null()) {
            states[i].out = Output::undefined();
        } else if (out.is_string()) {
            try {
                states[i].out = Output::parse(out.get<std::string>());
            } catch (const ParseError& e) {
                throw ParseError(detail::state_field(i, "out") + ": " + e.what());
            }
            if (states[i].out.value().size() > max_output_bits) {
                violations.push_back(detail::state_field(i, "out") + ": longer than " +
                                     std::to_string(max_output_bits) + " bits");
            }
        } else {
            throw ParseError(detail::state_field(i, "out") + ": expected a bit string or null");
        }
        const char* edge_names[2] = {"t0", "t1"};
        for (int b = 0; b < 2; ++b) {
            if (!node.contains(edge_names[b])) {
                violations.push_back(detail::state_field(i, edge_names[b]) + ": missing transition");
                continue;
            }
            if (!node[edge_names[b]].is_number_integer()) {
                throw ParseError(detail::state_field(i, edge_names[b]) + ": expected an integer");
            }
            long long target = node[edge_names[b]].get<long long>();
            if (target < 0 || target >= static_cast<long long>(n)) {
                violations.push_back(detail::state_field(i, edge_names[b]) + ": target " + std::to_string(target) +
                                     " is not a state id");
            } else {
                states[i].next[b] = static_cast<StateId>(target);
            }
        }
    }

    UniverseFile file;
    if (doc.contains("sets")) {
        if (!doc["sets"].is_object()) throw ParseError("sets: expected an object");
        for (const auto& [name, members] : doc["sets"].items()) {
            if (!members.is_array()) throw ParseError("sets." + name + ": expected an array");
            std::vector<StateId> ids;
            for (const auto& m : members) {
                if (!m.is_number_integer()) throw ParseError("sets." + name + ": expected integers");
                long long v = m.get<long long>();
                if (v < 0 || v >= static_cast<long long>(n)) {
                    violations.push_back("sets." + name + ": " + std::to_string(v) + " is not a state id");
                } else {
                    ids.push_back(static_cast<StateId>(v));
                }
            }
            file.sets[name] = std::move(ids);
        }
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));

    file.universe = Universe(std::move(states));
    Minimized m = minimize(file.universe);
    if (m.universe.size() == file.universe.size()) file.universe = std::move(m.universe);
    return file;
}

inline UniverseFile load_file(const std::string& path, std::size_t max_output_bits = kDefaultMaxOutputBits) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load(buffer.str(), max_output_bits);
}

/// Canonical text: one state per line, fixed key order, sets sorted by name.
inline std::string serialize(const Universe& u, const std::map<std::string, std::vector<StateId>>& sets = {}) {
    std::ostringstream os;
    os << "{\n  \"version\": 1,\n  \"states\": [\n";
    for (StateId q = 0; q < u.size(); ++q) {
        const Output& out = u.out(q);
        os << "    {\"id\": " << q << ", \"out\": "
           << (out.defined() ? "\"" + out.value().str() + "\"" : std::string("null")) << ", \"t0\": " << u.step(q, 0)
           << ", \"t1\": " << u.step(q, 1) << "}" << (q + 1 < u.size() ? "," : "") << "\n";
    }
    os << "  ],\n  \"sets\": {";
    bool first = true;
    for (const auto& [name, members] : sets) {
        os << (first ? "\n" : ",\n") << "    " << nlohmann::json(name).dump() << ": [";
        for (std::size_t i = 0; i < members.size(); ++i) os << (i ? ", " : "") << members[i];
        os << "]";
        first = false;
    }
    os << (first ? "}\n" : "\n  }\n") << "}\n";
    return os.str();
}

inline std::string serialize(const UniverseFile& file) { return serialize(file.universe, file.sets); }

} // namespace emuprob
