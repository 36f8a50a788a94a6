#pragma once

// Cardinality, enumeration and O(#axes) indexing of the configuration space
// defined by a CSD.
//
// Each bind group collapses into one shared axis carrying the group's common
// numeric values; every knob additionally contributes an axis over the
// Cartesian product of its unbound value sets. Axes are ordered by knob, a
// shared axis sitting right after the knob axis of its first member. The
// first axis varies slowest.

#include <cstdint>
#include <iterator>
#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "db4hls/csd.hpp"
#include "db4hls/hash.hpp"

namespace db4hls::space {

using csd::Csd;
using csd::Value;

class SpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverflowError : public SpaceError {
 public:
  OverflowError() : SpaceError("configuration space cardinality overflows 64 bits") {}
};

struct Axis {
  enum class Kind { Knob, Shared };
  Kind kind = Kind::Knob;
  // Knob axis: the owning knob and the value-set positions it covers.
  int knob = -1;
  std::vector<std::size_t> set_positions;
  // Shared axis: bind tag and members; the bound set is always the last one.
  std::string tag;
  std::vector<int> members;
  // One value list per covered set (exactly one for shared axes).
  std::vector<std::vector<Value>> lists;
  std::uint64_t radix = 1;
};

/// One point of the space.
struct Configuration {
  std::uint64_t index = 0;
  std::vector<std::vector<Value>> assignments;  // one tuple per knob
  std::string key_text;                         // canonical clear-text rendering
  std::string key;                              // sha256 of key_text

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.assignments == b.assignments;
  }
};

class SpaceIndex {
 public:
  explicit SpaceIndex(Csd csd) : csd_(std::move(csd)) {
    if (auto diags = csd::validate_csd(csd_); !diags.empty()) throw csd::CsdError(std::move(diags));
    build();
  }

  const Csd& csd() const { return csd_; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::uint64_t total() const { return total_; }

  std::vector<std::uint64_t> radices() const {
    std::vector<std::uint64_t> r;
    r.reserve(axes_.size());
    for (const auto& a : axes_) r.push_back(a.radix);
    return r;
  }

  /// Mixed-radix digits of i, first axis most significant.
  std::vector<std::uint64_t> digits(std::uint64_t i) const {
    if (i >= total_)
      throw SpaceError("index " + std::to_string(i) + " out of range [0," + std::to_string(total_) + ")");
    std::vector<std::uint64_t> d(axes_.size());
    for (std::size_t a = axes_.size(); a-- > 0;) {
      d[a] = i % axes_[a].radix;
      i /= axes_[a].radix;
    }
    return d;
  }

  std::uint64_t from_digits(const std::vector<std::uint64_t>& d) const {
    if (d.size() != axes_.size()) throw SpaceError("digit vector has wrong length");
    std::uint64_t i = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      if (d[a] >= axes_[a].radix) throw SpaceError("digit out of range");
      i = i * axes_[a].radix + d[a];
    }
    return i;
  }

  Configuration decode(std::uint64_t i) const { return from_digit_vector(digits(i), i); }

  Configuration from_digit_vector(const std::vector<std::uint64_t>& d, std::uint64_t i) const {
    const auto& knobs = csd_.knobs;
    Configuration c;
    c.index = i;
    c.assignments.resize(knobs.size());
    for (std::size_t k = 0; k < knobs.size(); ++k) c.assignments[k].resize(knobs[k].value_sets.size());
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const auto& axis = axes_[a];
      if (axis.kind == Axis::Kind::Shared) {
        const auto& v = axis.lists.front()[d[a]];
        for (int m : axis.members) {
          auto& tuple = c.assignments[static_cast<std::size_t>(m)];
          tuple.back() = v;
        }
        continue;
      }
      std::uint64_t rem = d[a];
      auto& tuple = c.assignments[static_cast<std::size_t>(axis.knob)];
      for (std::size_t s = axis.lists.size(); s-- > 0;) {
        const auto& list = axis.lists[s];
        tuple[axis.set_positions[s]] = list[rem % list.size()];
        rem /= list.size();
      }
    }
    c.key_text = render_key(c.assignments);
    c.key = sha256_hex(c.key_text);
    return c;
  }

  /// Inverse of decode. Throws if the assignment is not a member of the space.
  std::uint64_t encode(const Configuration& c) const {
    const auto& knobs = csd_.knobs;
    if (c.assignments.size() != knobs.size()) throw SpaceError("configuration has wrong knob count");
    std::vector<std::uint64_t> d(axes_.size());
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const auto& axis = axes_[a];
      if (axis.kind == Axis::Kind::Shared) {
        std::optional<std::uint64_t> pos;
        for (int m : axis.members) {
          const auto& tuple = c.assignments[static_cast<std::size_t>(m)];
          if (tuple.size() != knobs[static_cast<std::size_t>(m)].value_sets.size())
            throw SpaceError("configuration tuple has wrong arity");
          auto p = position(axis.lists.front(), tuple.back());
          if (pos && *pos != p) throw SpaceError("bind group '" + axis.tag + "' not uniform");
          pos = p;
        }
        d[a] = *pos;
        continue;
      }
      const auto& tuple = c.assignments[static_cast<std::size_t>(axis.knob)];
      if (tuple.size() != knobs[static_cast<std::size_t>(axis.knob)].value_sets.size())
        throw SpaceError("configuration tuple has wrong arity");
      std::uint64_t digit = 0;
      for (std::size_t s = 0; s < axis.lists.size(); ++s)
        digit = digit * axis.lists[s].size() + position(axis.lists[s], tuple[axis.set_positions[s]]);
      d[a] = digit;
    }
    return from_digits(d);
  }

  /// Canonical clear-text key: one `head;v1;v2` segment per knob, joined by '|'.
  std::string render_key(const std::vector<std::vector<Value>>& assignments) const {
    std::string out;
    for (std::size_t k = 0; k < assignments.size(); ++k) {
      if (k) out += "|";
      out += csd_.knobs[k].head();
      for (const auto& v : assignments[k]) out += ";" + v.to_string();
    }
    return out;
  }

  /// JSON array of {knob, values[]} objects.
  nlohmann::json to_json(const Configuration& c) const {
    auto arr = nlohmann::json::array();
    for (std::size_t k = 0; k < c.assignments.size(); ++k) {
      auto values = nlohmann::json::array();
      for (const auto& v : c.assignments[k]) {
        if (v.is_numeric()) values.push_back(v.number());
        else values.push_back(v.token());
      }
      arr.push_back({{"knob", csd_.knobs[k].head()}, {"values", values}});
    }
    return arr;
  }

  // Lazy, index-ordered view over the whole space.
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Configuration;
    using difference_type = std::ptrdiff_t;
    using pointer = const Configuration*;
    using reference = const Configuration&;

    iterator() = default;
    iterator(const SpaceIndex* idx, std::uint64_t i) : idx_(idx), i_(i) {}

    Configuration operator*() const { return idx_->decode(i_); }
    iterator& operator++() {
      ++i_;
      return *this;
    }
    iterator operator++(int) {
      auto tmp = *this;
      ++i_;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.i_ == b.i_; }

   private:
    const SpaceIndex* idx_ = nullptr;
    std::uint64_t i_ = 0;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, total_}; }

 private:
  static std::uint64_t position(const std::vector<Value>& list, const Value& v) {
    for (std::size_t i = 0; i < list.size(); ++i)
      if (list[i] == v) return i;
    throw SpaceError("value '" + v.to_string() + "' not in its value set");
  }

  static std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError();
    return r;
  }

  void build() {
    std::map<std::string, std::size_t> shared_at;
    const auto& knobs = csd_.knobs;
    for (std::size_t k = 0; k < knobs.size(); ++k) {
      const auto& knob = knobs[k];
      Axis axis;
      axis.kind = Axis::Kind::Knob;
      axis.knob = static_cast<int>(k);
      std::size_t unbound = knob.value_sets.size() - (knob.bind_tag ? 1 : 0);
      for (std::size_t s = 0; s < unbound; ++s) {
        axis.set_positions.push_back(s);
        axis.lists.push_back(csd::expand_value_set(knob.value_sets[s]));
        axis.radix = checked_mul(axis.radix, axis.lists.back().size());
      }
      axes_.push_back(std::move(axis));

      if (knob.bind_tag) {
        auto it = shared_at.find(*knob.bind_tag);
        if (it == shared_at.end()) {
          Axis shared;
          shared.kind = Axis::Kind::Shared;
          shared.tag = *knob.bind_tag;
          shared.members.push_back(static_cast<int>(k));
          shared.lists.push_back(csd::expand_value_set(knob.value_sets.back()));
          shared.radix = shared.lists.front().size();
          shared_at.emplace(shared.tag, axes_.size());
          axes_.push_back(std::move(shared));
        } else {
          axes_[it->second].members.push_back(static_cast<int>(k));
        }
      }
    }
    total_ = 1;
    for (const auto& a : axes_) total_ = checked_mul(total_, a.radix);
  }

  Csd csd_;
  std::vector<Axis> axes_;
  std::uint64_t total_ = 1;
};

inline SpaceIndex build_index(const Csd& csd) { return SpaceIndex(csd); }

/// |CS| under bind constraints.
inline std::uint64_t cardinality(const Csd& csd) { return SpaceIndex(csd).total(); }

inline Configuration decode(const SpaceIndex& index, std::uint64_t i) { return index.decode(i); }

/// Lazy stream over the space in index order.
inline const SpaceIndex& enumerate(const SpaceIndex& index) { return index; }

/// n distinct configurations drawn uniformly without replacement.
/// Deterministic for a given seed (Floyd's algorithm over the index range).
inline std::vector<Configuration> sample(const SpaceIndex& index, std::uint64_t n, std::uint64_t seed) {
  const auto total = index.total();
  if (n > total)
    throw SpaceError("cannot sample " + std::to_string(n) + " of " + std::to_string(total) +
                     " configurations");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> picks;
  picks.reserve(n);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(n * 2);
  for (std::uint64_t j = total - n; j < total; ++j) {
    std::uniform_int_distribution<std::uint64_t> dist(0, j);
    auto t = dist(rng);
    auto pick = chosen.count(t) ? j : t;
    chosen.insert(pick);
    picks.push_back(pick);
  }
  std::shuffle(picks.begin(), picks.end(), rng);
  std::vector<Configuration> out;
  out.reserve(n);
  for (auto i : picks) out.push_back(index.decode(i));
  return out;
}

inline std::vector<Configuration> sample(const Csd& csd, std::uint64_t n, std::uint64_t seed) {
  return sample(SpaceIndex(csd), n, seed);
}

}  // namespace db4hls::space
