#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdg/core/errors.hpp"

namespace sdg {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    lines.push_back(cur);
    return lines;
}

}  // namespace detail

// Labeled-field extraction per the block protocol: a field starts at a line
// "<Label>: value" and runs until the next known label or the end; code fence
// lines are ignored; one enclosing [bracket] pair is stripped. Every label in
// `required` must come out non-missing or ParseError names the first absent
// one. `labels` only delimit blocks; when `required` is omitted all labels
// are mandatory.
inline std::map<std::string, std::string> parse_labeled_fields(const std::string& raw,
                                                               const std::vector<std::string>& labels,
                                                               const std::vector<std::string>* required = nullptr) {
    std::map<std::string, std::string> out;
    auto label_at = [&](const std::string& line) -> const std::string* {
        for (const auto& label : labels)
            if (line.compare(0, label.size(), label) == 0 && line.size() > label.size() &&
                line[label.size()] == ':')
                return &label;
        return nullptr;
    };

    const std::string* open = nullptr;
    std::string value;
    auto close = [&] {
        if (!open) return;
        std::string v = detail::trim(value);
        if (v.size() >= 2 && v.front() == '[' && v.back() == ']') v = detail::trim(v.substr(1, v.size() - 2));
        out[*open] = v;
        open = nullptr;
        value.clear();
    };

    for (const std::string& rawline : detail::split_lines(raw)) {
        std::string line = detail::trim(rawline);
        if (line.rfind("```", 0) == 0) continue;
        if (const std::string* label = label_at(line)) {
            close();
            open = label;
            value = line.substr(label->size() + 1);
            continue;
        }
        if (open) {
            value += '\n';
            value += rawline;
        }
    }
    close();

    for (const auto& label : required ? *required : labels)
        if (!out.count(label)) throw ParseError("missing labeled field: " + label, raw);
    return out;
}

}  // namespace sdg
