#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace carapace {

/// Every stored constant is a 64-bit word. Numbers are stored as-is, symbols
/// as their dense id in the owning SymbolTable.
using Value = std::int64_t;

/// A fixed-arity row of constants.
using Tuple = std::vector<Value>;

enum class ValueType : std::uint8_t { Number, Symbol };

inline std::string_view to_string(ValueType t) { return t == ValueType::Number ? "number" : "symbol"; }

/// Interns strings to dense ids. Ids are handed out in first-seen order.
class SymbolTable {
public:
    Value intern(std::string_view text) {
        auto it = ids_.find(std::string(text));
        if (it != ids_.end())
            return it->second;
        auto id = static_cast<Value>(names_.size());
        names_.emplace_back(text);
        ids_.emplace(names_.back(), id);
        return id;
    }

    const std::string &resolve(Value id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= names_.size())
            throw std::out_of_range("unknown symbol id " + std::to_string(id));
        return names_[static_cast<std::size_t>(id)];
    }

    std::size_t size() const { return names_.size(); }

private:
    std::deque<std::string> names_;
    std::unordered_map<std::string, Value> ids_;
};

/// Renders a value as it appears in fact files and program text
/// (without quotes for symbols).
inline std::string render_value(Value v, ValueType t, const SymbolTable &symbols) {
    return t == ValueType::Number ? std::to_string(v) : symbols.resolve(v);
}

} // namespace carapace
