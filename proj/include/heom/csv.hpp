#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace heom::csv {

/// Locale-independent %.12g.
inline std::string number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 12);
    if (ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
    return std::string(buf.data(), ptr);
}

inline std::string join(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += fields[i];
    }
    return line;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_number(std::string_view s) {
    double v = 0.0;
    if (s.empty()) throw std::invalid_argument("csv: empty field");
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("csv: malformed number '" + std::string(s) + "'");
    return v;
}

/// Numeric table with a single header line.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw std::out_of_range("csv: no column '" + std::string(name) + "'");
    }

    std::vector<double> values(std::string_view name) const {
        const std::size_t c = column(name);
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r[c]);
        return v;
    }
};

/// Strict reader: every row has the header's arity, every field is a plain
/// number, and the header must equal `expected` when one is given.
inline Table parse(std::string_view text, const std::vector<std::string>& expected = {}) {
    Table t;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') throw std::invalid_argument("csv: CR line endings are not accepted");
        if (line.empty()) {
            if (start >= text.size()) break;
            throw std::invalid_argument("csv: empty line " + std::to_string(line_no));
        }
        const auto fields = split(line);
        if (line_no == 1) {
            for (auto f : fields) t.header.emplace_back(f);
            if (!expected.empty() && t.header != expected) throw std::invalid_argument("csv: unexpected header '" + std::string(line) + "'");
            continue;
        }
        if (fields.size() != t.header.size())
            throw std::invalid_argument("csv: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) + " fields");
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) row.push_back(parse_number(f));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw std::invalid_argument("csv: missing header");
    return t;
}

}  // namespace heom::csv
