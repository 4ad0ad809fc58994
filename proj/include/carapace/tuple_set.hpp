#pragma once

#include <cassert>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "carapace/value.hpp"

namespace carapace {

namespace detail {

inline std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

inline std::uint64_t hash_values(std::span<const Value> values) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ values.size();
    for (Value v : values)
        h = mix(h ^ static_cast<std::uint64_t>(v)) + 0x9e3779b97f4a7c15ULL;
    return h;
}

} // namespace detail

/// Set of fixed-arity tuples. Tuples are stored contiguously; an
/// open-addressing table of row indices provides duplicate suppression.
class TupleSet {
public:
    explicit TupleSet(std::size_t arity = 0) : arity_(arity) {}

    std::size_t arity() const { return arity_; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    std::span<const Value> operator[](std::size_t row) const {
        return {data_.data() + row * arity_, arity_};
    }

    bool contains(std::span<const Value> t) const {
        assert(t.size() == arity_);
        if (arity_ == 0)
            return count_ != 0;
        if (slots_.empty())
            return false;
        const auto h = detail::hash_values(t);
        for (std::size_t i = h & mask_;; i = (i + 1) & mask_) {
            const auto s = slots_[i];
            if (s == 0)
                return false;
            if (hashes_[s - 1] == h && equal_row(s - 1, t))
                return true;
        }
    }

    /// Returns true iff the tuple was not present.
    bool insert(std::span<const Value> t) {
        assert(t.size() == arity_);
        if (arity_ == 0) {
            if (count_)
                return false;
            count_ = 1;
            return true;
        }
        if ((count_ + 1) * 2 > slots_.size())
            grow();
        const auto h = detail::hash_values(t);
        std::size_t i = h & mask_;
        for (;; i = (i + 1) & mask_) {
            const auto s = slots_[i];
            if (s == 0)
                break;
            if (hashes_[s - 1] == h && equal_row(s - 1, t))
                return false;
        }
        data_.insert(data_.end(), t.begin(), t.end());
        hashes_.push_back(h);
        slots_[i] = static_cast<std::uint32_t>(++count_);
        return true;
    }

    bool insert(const Tuple &t) { return insert(std::span<const Value>(t)); }
    bool contains(const Tuple &t) const { return contains(std::span<const Value>(t)); }

    /// Inserts every tuple of `other`; returns the number actually added.
    std::size_t merge(const TupleSet &other) {
        assert(other.arity_ == arity_);
        std::size_t added = 0;
        for (std::size_t r = 0; r < other.size(); ++r)
            added += insert(other[r]) ? 1 : 0;
        return added;
    }

    void clear() {
        data_.clear();
        hashes_.clear();
        slots_.clear();
        mask_ = 0;
        count_ = 0;
    }

    void swap(TupleSet &other) noexcept {
        std::swap(arity_, other.arity_);
        data_.swap(other.data_);
        hashes_.swap(other.hashes_);
        slots_.swap(other.slots_);
        std::swap(mask_, other.mask_);
        std::swap(count_, other.count_);
    }

    std::vector<Tuple> tuples() const {
        std::vector<Tuple> out;
        out.reserve(count_);
        for (std::size_t r = 0; r < count_; ++r) {
            auto row = (*this)[r];
            out.emplace_back(row.begin(), row.end());
        }
        return out;
    }

    class iterator {
    public:
        using value_type = std::span<const Value>;
        using difference_type = std::ptrdiff_t;
        iterator() = default;
        iterator(const TupleSet *set, std::size_t row) : set_(set), row_(row) {}
        std::span<const Value> operator*() const { return (*set_)[row_]; }
        iterator &operator++() {
            ++row_;
            return *this;
        }
        iterator operator++(int) {
            auto old = *this;
            ++row_;
            return old;
        }
        bool operator==(const iterator &o) const { return row_ == o.row_; }

    private:
        const TupleSet *set_ = nullptr;
        std::size_t row_ = 0;
    };

    iterator begin() const { return {this, 0}; }
    iterator end() const { return {this, count_}; }

private:
    bool equal_row(std::size_t row, std::span<const Value> t) const {
        return std::memcmp(data_.data() + row * arity_, t.data(), arity_ * sizeof(Value)) == 0;
    }

    void grow() {
        const std::size_t cap = slots_.empty() ? 16 : slots_.size() * 2;
        slots_.assign(cap, 0);
        mask_ = cap - 1;
        for (std::size_t r = 0; r < count_; ++r) {
            std::size_t i = hashes_[r] & mask_;
            while (slots_[i] != 0)
                i = (i + 1) & mask_;
            slots_[i] = static_cast<std::uint32_t>(r + 1);
        }
    }

    std::size_t arity_;
    std::vector<Value> data_;
    std::vector<std::uint64_t> hashes_;
    std::vector<std::uint32_t> slots_;
    std::size_t mask_ = 0;
    std::size_t count_ = 0;
};

/// Hash index over the rows of a TupleSet that pass a filter, keyed on a
/// subset of columns. Built per CQ execution; rows are referenced, not copied,
/// so the source set must outlive the index and stay unmodified.
class JoinIndex {
public:
    JoinIndex() = default;

    template <typename Pred>
    void build(const TupleSet &src, std::vector<std::size_t> key_columns, Pred &&keep) {
        key_ = std::move(key_columns);
        rows_.clear();
        for (std::size_t r = 0; r < src.size(); ++r) {
            auto row = src[r];
            if (keep(row))
                rows_.push_back(row.data());
        }
        if (key_.empty())
            return;
        std::size_t cap = 16;
        while (cap < rows_.size() * 2)
            cap *= 2;
        mask_ = cap - 1;
        heads_.assign(cap, 0);
        next_.assign(rows_.size(), 0);
        hashes_.resize(rows_.size());
        std::vector<Value> key(key_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            for (std::size_t k = 0; k < key_.size(); ++k)
                key[k] = rows_[i][key_[k]];
            auto h = detail::hash_values(key);
            hashes_[i] = h;
            auto &head = heads_[h & mask_];
            next_[i] = head;
            head = static_cast<std::uint32_t>(i + 1);
        }
    }

    std::size_t size() const { return rows_.size(); }
    bool keyed() const { return !key_.empty(); }

    /// Calls `on_match(const Value* row)` for every indexed row whose key
    /// columns equal `key`. Returns the number of rows visited.
    template <typename F>
    std::size_t probe(std::span<const Value> key, F &&on_match) const {
        if (key_.empty()) {
            for (const Value *row : rows_)
                on_match(row);
            return rows_.size();
        }
        if (rows_.empty())
            return 0;
        const auto h = detail::hash_values(key);
        std::size_t visited = 0;
        for (auto e = heads_[h & mask_]; e != 0; e = next_[e - 1]) {
            const auto i = e - 1;
            if (hashes_[i] != h)
                continue;
            ++visited;
            const Value *row = rows_[i];
            bool eq = true;
            for (std::size_t k = 0; k < key_.size() && eq; ++k)
                eq = row[key_[k]] == key[k];
            if (eq)
                on_match(row);
        }
        return visited;
    }

private:
    std::vector<std::size_t> key_;
    std::vector<const Value *> rows_;
    std::vector<std::uint32_t> heads_;
    std::vector<std::uint32_t> next_;
    std::vector<std::uint64_t> hashes_;
    std::size_t mask_ = 0;
};

} // namespace carapace
