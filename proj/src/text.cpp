#include "jic/text.hpp"

#include <cctype>

namespace jic {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // leading whitespace dropped
    for (char c : s) {
        if (is_space(c)) {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_ws = false;
        }
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) tokens.emplace_back(s.substr(start, i - start));
    }
    return tokens;
}

size_t count_whitespace_tokens(std::string_view s) {
    size_t n = 0, i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) ++n;
    }
    return n;
}

std::vector<std::string> metric_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (char c : s) {
        if (is_space(c)) {
            flush();
        } else if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        // other punctuation dropped in place
    }
    flush();
    return tokens;
}

std::vector<std::pair<size_t, size_t>> sentence_spans(std::string_view s) {
    std::vector<std::pair<size_t, size_t>> spans;
    size_t i = 0;
    const size_t n = s.size();
    while (i < n) {
        while (i < n && is_space(s[i])) ++i;
        if (i >= n) break;
        size_t start = i;
        size_t end = n;
        for (size_t j = i; j < n; ++j) {
            char c = s[j];
            if (c == '.' || c == '!' || c == '?') {
                size_t t = j;
                while (t + 1 < n && (s[t + 1] == '.' || s[t + 1] == '!' || s[t + 1] == '?')) ++t;
                if (t + 1 >= n || is_space(s[t + 1])) {
                    end = t + 1;
                    break;
                }
                j = t;  // terminator run not followed by space: not a boundary
            }
        }
        size_t e = end;
        while (e > start && is_space(s[e - 1])) --e;
        if (e > start) spans.emplace_back(start, e);
        i = end;
    }
    return spans;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

}  // namespace jic
