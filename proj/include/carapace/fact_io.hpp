#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "carapace/ast.hpp"
#include "carapace/errors.hpp"
#include "carapace/storage.hpp"

namespace carapace {

/// Reads tab-separated facts, one tuple per line. Symbol columns are interned
/// verbatim; number columns must parse as int64. A trailing '\r' is dropped
/// and blank lines are skipped.
inline std::vector<Tuple> read_facts(std::istream &in, const std::vector<ValueType> &columns, SymbolTable &symbols,
                                     const std::string &source = "<stream>") {
    std::vector<Tuple> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (columns.empty()) {
            out.emplace_back();
            continue;
        }
        if (line.empty())
            continue;
        Tuple t;
        std::size_t start = 0;
        for (std::size_t col = 0; col < columns.size(); ++col) {
            auto tab = line.find('\t', start);
            bool last = col + 1 == columns.size();
            if (last && tab != std::string::npos)
                throw IoError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns.size()) +
                              " columns, found more");
            if (!last && tab == std::string::npos)
                throw IoError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns.size()) +
                              " columns, found " + std::to_string(col + 1));
            std::string_view field(line.data() + start, (last ? line.size() : tab) - start);
            if (columns[col] == ValueType::Number) {
                Value v = 0;
                auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
                if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
                    throw IoError(source + ":" + std::to_string(lineno) + ": column " + std::to_string(col) +
                                  " is not an integer: '" + std::string(field) + "'");
                t.push_back(v);
            } else {
                t.push_back(symbols.intern(field));
            }
            start = tab + 1;
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<Tuple> read_facts_file(const std::filesystem::path &path, const std::vector<ValueType> &columns,
                                          SymbolTable &symbols) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    return read_facts(in, columns, symbols, path.string());
}

inline std::string render_tuple(std::span<const Value> t, const std::vector<ValueType> &columns,
                                const SymbolTable &symbols) {
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i)
            out += '\t';
        out += render_value(t[i], columns[i], symbols);
    }
    return out;
}

/// Rendered lines, sorted lexicographically.
inline std::vector<std::string> render_sorted(const TupleSet &tuples, const std::vector<ValueType> &columns,
                                              const SymbolTable &symbols) {
    std::vector<std::string> lines;
    lines.reserve(tuples.size());
    for (auto t : tuples)
        lines.push_back(render_tuple(t, columns, symbols));
    std::sort(lines.begin(), lines.end());
    return lines;
}

inline void write_lines(const std::filesystem::path &path, const std::vector<std::string> &lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    for (const auto &l : lines)
        out << l << '\n';
    if (!out)
        throw IoError("write failed for " + path.string());
}

/// Loads `<dir>/<relation>.facts` for every EDB relation of the program.
/// Returns the relations whose file does not exist (treated as empty).
inline std::vector<std::string> load_fact_directory(const Program &p, RelationalLayer &store,
                                                    const std::filesystem::path &dir) {
    std::vector<std::string> missing;
    for (const auto &rel : p.edb()) {
        auto path = dir / (rel + ".facts");
        if (!std::filesystem::exists(path)) {
            missing.push_back(rel);
            continue;
        }
        auto id = store.id(rel);
        for (const auto &t : read_facts_file(path, p.relations.at(rel).columns, *p.symbols))
            store.load_edb(id, t);
    }
    return missing;
}

} // namespace carapace
