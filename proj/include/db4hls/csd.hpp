#pragma once

// Configuration Space Descriptor (CSD) language.
//
// One knob per line, fields separated by ';':
//
//   resource;last_step_scan;bucket;{RAM_2P_BRAM}
//   array_partition;last_step_scan;sum;1;{cyclic,block};{1->128,pow_2}@bind_a
//   unroll;last_step_scan;last_1;{1->128,pow_2}@bind_a
//   clock;{10}
//
// Value sets are either explicit lists or generated ranges `{lo->hi,gen}`
// with gen in {pow_2, div}. A trailing `@bind_<tag>` ties the knob's last
// (numeric) value set to every other knob carrying the same tag.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace db4hls::csd {

/// A single directive value: an integer factor or a categorical token.
class Value {
 public:
  Value() = default;
  Value(std::int64_t n) : v_(n) {}  // NOLINT(google-explicit-constructor)
  Value(std::string token) : v_(std::move(token)) {}  // NOLINT
  Value(const char* token) : v_(std::string(token)) {}  // NOLINT

  bool is_numeric() const { return std::holds_alternative<std::int64_t>(v_); }
  std::int64_t number() const { return std::get<std::int64_t>(v_); }
  const std::string& token() const { return std::get<std::string>(v_); }

  std::string to_string() const {
    return is_numeric() ? std::to_string(number()) : token();
  }

  friend bool operator==(const Value&, const Value&) = default;
  friend auto operator<=>(const Value&, const Value&) = default;

 private:
  std::variant<std::int64_t, std::string> v_{std::int64_t{0}};
};

enum class GeneratorKind { Pow2, Div };

inline std::string_view generator_token(GeneratorKind g) {
  return g == GeneratorKind::Pow2 ? "pow_2" : "div";
}

struct ExplicitList {
  std::vector<Value> values;
  friend bool operator==(const ExplicitList&, const ExplicitList&) = default;
};

struct GeneratedRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  GeneratorKind generator = GeneratorKind::Pow2;
  friend bool operator==(const GeneratedRange&, const GeneratedRange&) = default;
};

using ValueSet = std::variant<ExplicitList, GeneratedRange>;

/// Values of a set in their canonical order: written order for explicit
/// lists, ascending for generated ranges.
inline std::vector<Value> expand_value_set(const ValueSet& vs) {
  if (const auto* list = std::get_if<ExplicitList>(&vs)) return list->values;
  const auto& r = std::get<GeneratedRange>(vs);
  std::vector<Value> out;
  if (r.lo < 1 || r.hi < r.lo) return out;
  if (r.generator == GeneratorKind::Pow2) {
    for (std::int64_t p = 1; p <= r.hi; p *= 2) {
      if (p >= r.lo) out.emplace_back(p);
      if (p > r.hi / 2) break;
    }
  } else {
    std::vector<std::int64_t> large;
    for (std::int64_t d = 1; d <= r.hi / d; ++d) {
      if (r.hi % d != 0) continue;
      if (d >= r.lo) out.emplace_back(d);
      if (auto q = r.hi / d; q != d && q >= r.lo) large.push_back(q);
    }
    for (auto it = large.rbegin(); it != large.rend(); ++it) out.emplace_back(*it);
  }
  return out;
}

inline bool is_numeric_set(const ValueSet& vs) {
  if (std::holds_alternative<GeneratedRange>(vs)) return true;
  const auto& values = std::get<ExplicitList>(vs).values;
  return std::all_of(values.begin(), values.end(),
                     [](const Value& v) { return v.is_numeric(); });
}

// ---------------------------------------------------------------------------
// Directive registry

/// Field layout of one directive kind.
struct DirectiveSchema {
  std::string name;
  bool has_function = true;
  bool has_target = true;
  std::size_t fixed_params = 0;
  std::size_t value_sets = 1;
};

class DirectiveRegistry {
 public:
  DirectiveRegistry() = default;

  /// Resource, ArrayPartition, Unroll, Pipeline, Inline and Clock.
  static DirectiveRegistry builtin() {
    DirectiveRegistry r;
    r.add({"resource", true, true, 0, 1});
    r.add({"array_partition", true, true, 1, 2});
    r.add({"unroll", true, true, 0, 1});
    r.add({"pipeline", true, true, 0, 1});
    r.add({"inline", true, false, 0, 1});
    r.add({"clock", false, false, 0, 1});
    return r;
  }

  void add(DirectiveSchema schema) {
    auto name = schema.name;
    kinds_[name] = std::move(schema);
  }

  const DirectiveSchema* find(std::string_view name) const {
    auto it = kinds_.find(std::string(name));
    return it == kinds_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, DirectiveSchema> kinds_;
};

inline const DirectiveRegistry& default_registry() {
  static const DirectiveRegistry registry = DirectiveRegistry::builtin();
  return registry;
}

// ---------------------------------------------------------------------------
// Knobs and descriptors

struct Knob {
  std::string directive;
  std::string function;  // empty for clock
  std::string target;    // empty for clock and inline
  std::vector<std::string> fixed_params;
  std::vector<ValueSet> value_sets;
  std::optional<std::string> bind_tag;
  int line = 0;  // 1-based source line, 0 when built programmatically

  bool is_clock() const { return directive == "clock"; }

  /// Canonical head of the knob line (everything before the value sets).
  std::string head() const {
    std::string out = directive;
    if (!function.empty()) out += ";" + function;
    if (!target.empty()) out += ";" + target;
    for (const auto& p : fixed_params) out += ";" + p;
    return out;
  }

  friend bool operator==(const Knob& a, const Knob& b) {
    return a.directive == b.directive && a.function == b.function &&
           a.target == b.target && a.fixed_params == b.fixed_params &&
           a.value_sets == b.value_sets && a.bind_tag == b.bind_tag;
  }
};

struct Csd {
  std::vector<Knob> knobs;
  std::string source_text;

  /// Structural equality; source text and line numbers are ignored.
  friend bool operator==(const Csd& a, const Csd& b) { return a.knobs == b.knobs; }
};

// ---------------------------------------------------------------------------
// Diagnostics and errors

enum class DiagCode {
  Syntax,
  UnknownDirective,
  ArityMismatch,
  MalformedValueSet,
  EmptyValueSet,
  DuplicateValue,
  DuplicateKnob,
  BindOnCategorical,
  MismatchedBindSets,
  MissingClock,
  DuplicateClock,
};

inline std::string_view diag_name(DiagCode c) {
  switch (c) {
    case DiagCode::Syntax: return "Syntax";
    case DiagCode::UnknownDirective: return "UnknownDirective";
    case DiagCode::ArityMismatch: return "ArityMismatch";
    case DiagCode::MalformedValueSet: return "MalformedValueSet";
    case DiagCode::EmptyValueSet: return "EmptyValueSet";
    case DiagCode::DuplicateValue: return "DuplicateValue";
    case DiagCode::DuplicateKnob: return "DuplicateKnob";
    case DiagCode::BindOnCategorical: return "BindOnCategorical";
    case DiagCode::MismatchedBindSets: return "MismatchedBindSets";
    case DiagCode::MissingClock: return "MissingClock";
    case DiagCode::DuplicateClock: return "DuplicateClock";
  }
  return "Unknown";
}

struct Diagnostic {
  DiagCode code;
  int knob_index = -1;  // -1 when not tied to a knob (e.g. MissingClock)
  int line = 0;
  int column = 0;
  std::string message;

  std::string to_string() const {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ":" << column << ": ";
    os << diag_name(code);
    if (knob_index >= 0) os << " (knob " << knob_index << ")";
    if (!message.empty()) os << ": " << message;
    return os.str();
  }
};

class CsdError : public std::runtime_error {
 public:
  explicit CsdError(std::vector<Diagnostic> diags)
      : std::runtime_error(render(diags)), diags_(std::move(diags)) {}

  const std::vector<Diagnostic>& diagnostics() const { return diags_; }
  DiagCode code() const { return diags_.front().code; }

 private:
  static std::string render(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
      if (!out.empty()) out += "\n";
      out += d.to_string();
    }
    return out;
  }
  std::vector<Diagnostic> diags_;
};

// ---------------------------------------------------------------------------
// Lexical helpers

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto c0 = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(c0) || c0 == '_')) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Plain token used for function/target/fixed params: identifiers, integers,
// or hierarchical labels such as `loop_1/inner`.
inline bool is_label(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_' || u == '/' || u == '.';
  });
}

struct Field {
  std::string_view text;
  int column;  // 1-based
};

// Splits on ';' outside braces, trimming each field.
inline std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> out;
  int depth = 0;
  std::size_t start = 0;
  auto push = [&](std::size_t end) {
    auto raw = line.substr(start, end - start);
    std::size_t left = 0;
    while (left < raw.size() && std::isspace(static_cast<unsigned char>(raw[left]))) ++left;
    out.push_back({trim(raw), static_cast<int>(start + left + 1)});
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '{') ++depth;
    else if (c == '}') --depth;
    else if (c == ';' && depth == 0) {
      push(i);
      start = i + 1;
    }
  }
  push(line.size());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Value-set parsing

/// Parses the text of one brace-delimited set, braces included.
/// Throws CsdError(MalformedValueSet / DuplicateValue) on failure.
inline ValueSet parse_value_set(std::string_view text, int line = 0, int column = 0) {
  auto fail = [&](DiagCode code, std::string msg) -> ValueSet {
    throw CsdError({{code, -1, line, column, std::move(msg)}});
  };
  text = detail::trim(text);
  if (text.size() < 2 || text.front() != '{' || text.back() != '}')
    return fail(DiagCode::MalformedValueSet, "value set must be enclosed in braces");
  auto body = detail::trim(text.substr(1, text.size() - 2));
  if (body.empty()) return fail(DiagCode::MalformedValueSet, "empty value set");

  if (auto arrow = body.find("->"); arrow != std::string_view::npos) {
    auto comma = body.find(',', arrow);
    if (comma == std::string_view::npos)
      return fail(DiagCode::MalformedValueSet, "range requires a generator: {lo->hi,gen}");
    auto lo = detail::parse_int(detail::trim(body.substr(0, arrow)));
    auto hi = detail::parse_int(detail::trim(body.substr(arrow + 2, comma - arrow - 2)));
    auto gen = detail::trim(body.substr(comma + 1));
    if (!lo || !hi) return fail(DiagCode::MalformedValueSet, "range bounds must be integers");
    if (*lo < 1 || *hi < *lo)
      return fail(DiagCode::MalformedValueSet, "range requires 1 <= lo <= hi");
    GeneratedRange r{*lo, *hi, GeneratorKind::Pow2};
    if (gen == "pow_2") r.generator = GeneratorKind::Pow2;
    else if (gen == "div") r.generator = GeneratorKind::Div;
    else return fail(DiagCode::MalformedValueSet, "unknown generator '" + std::string(gen) + "'");
    if (expand_value_set(r).empty())
      return fail(DiagCode::EmptyValueSet, "range expands to no values");
    return r;
  }

  ExplicitList list;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto comma = body.find(',', pos);
    auto tok = detail::trim(body.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                                : comma - pos));
    if (auto n = detail::parse_int(tok)) {
      list.values.emplace_back(*n);
    } else if (detail::is_identifier(tok)) {
      list.values.emplace_back(std::string(tok));
    } else {
      return fail(DiagCode::MalformedValueSet, "bad value '" + std::string(tok) + "'");
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::set<Value> seen;
  for (const auto& v : list.values)
    if (!seen.insert(v).second)
      return fail(DiagCode::DuplicateValue, "duplicate value '" + v.to_string() + "'");
  return list;
}

inline std::string serialize_value_set(const ValueSet& vs) {
  std::string out = "{";
  if (const auto* r = std::get_if<GeneratedRange>(&vs)) {
    out += std::to_string(r->lo) + "->" + std::to_string(r->hi) + "," +
           std::string(generator_token(r->generator));
  } else {
    const auto& values = std::get<ExplicitList>(vs).values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ",";
      out += values[i].to_string();
    }
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// Validation

/// Checks every descriptor-level invariant. Empty result means the CSD is
/// well formed and can be expanded.
inline std::vector<Diagnostic> validate_csd(const Csd& csd,
                                            const DirectiveRegistry& registry = default_registry()) {
  std::vector<Diagnostic> diags;
  auto add = [&](DiagCode code, int idx, std::string msg) {
    int line = idx >= 0 ? csd.knobs[static_cast<std::size_t>(idx)].line : 0;
    diags.push_back({code, idx, line, 1, std::move(msg)});
  };

  int clocks = 0;
  std::set<std::string> heads;
  std::map<std::string, std::pair<int, std::vector<Value>>> bind_groups;

  for (std::size_t i = 0; i < csd.knobs.size(); ++i) {
    const auto& k = csd.knobs[i];
    int idx = static_cast<int>(i);
    const auto* schema = registry.find(k.directive);
    if (schema == nullptr) {
      add(DiagCode::UnknownDirective, idx, "unknown directive '" + k.directive + "'");
      continue;
    }
    if (k.value_sets.size() != schema->value_sets ||
        k.fixed_params.size() != schema->fixed_params ||
        k.function.empty() == schema->has_function || k.target.empty() == schema->has_target) {
      add(DiagCode::ArityMismatch, idx,
          k.directive + " expects " + std::to_string(schema->fixed_params) +
              " fixed parameter(s) and " + std::to_string(schema->value_sets) + " value set(s)");
      continue;
    }
    bool sets_ok = true;
    for (const auto& vs : k.value_sets) {
      auto values = expand_value_set(vs);
      if (values.empty()) {
        add(DiagCode::EmptyValueSet, idx, "value set " + serialize_value_set(vs) + " is empty");
        sets_ok = false;
        continue;
      }
      std::set<Value> uniq(values.begin(), values.end());
      if (uniq.size() != values.size()) {
        add(DiagCode::DuplicateValue, idx, "value set " + serialize_value_set(vs) + " repeats a value");
        sets_ok = false;
      }
      if (const auto* list = std::get_if<ExplicitList>(&vs)) {
        for (const auto& v : list->values)
          if (!v.is_numeric() && !detail::is_identifier(v.token())) {
            add(DiagCode::MalformedValueSet, idx, "bad categorical token '" + v.token() + "'");
            sets_ok = false;
          }
      }
    }
    if (k.is_clock()) {
      if (++clocks > 1) add(DiagCode::DuplicateClock, idx, "more than one clock knob");
    } else if (!heads.insert(k.head()).second) {
      add(DiagCode::DuplicateKnob, idx, "knob '" + k.head() + "' defined twice");
    }
    if (k.bind_tag && sets_ok) {
      const auto& last = k.value_sets.back();
      if (!is_numeric_set(last)) {
        add(DiagCode::BindOnCategorical, idx, "@bind_" + *k.bind_tag + " on a categorical set");
        continue;
      }
      auto values = expand_value_set(last);
      auto [it, fresh] = bind_groups.try_emplace(*k.bind_tag, idx, values);
      if (!fresh && it->second.second != values)
        add(DiagCode::MismatchedBindSets, idx,
            "bind group '" + *k.bind_tag + "' differs from knob " + std::to_string(it->second.first));
    }
  }
  if (clocks == 0) add(DiagCode::MissingClock, -1, "descriptor has no clock knob");
  return diags;
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses without semantic validation; only line-level syntax errors throw.
inline Csd parse_csd_unchecked(std::string_view text,
                               const DirectiveRegistry& registry = default_registry()) {
  Csd csd;
  csd.source_text = std::string(text);
  std::vector<Diagnostic> errors;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    auto err = [&](DiagCode code, int col, std::string msg) {
      errors.push_back({code, static_cast<int>(csd.knobs.size()), line_no, col, std::move(msg)});
    };

    Knob knob;
    knob.line = line_no;
    auto body = line;
    if (auto at = line.rfind('@'); at != std::string_view::npos && at > line.rfind('}')) {
      auto deco = detail::trim(line.substr(at + 1));
      if (deco.substr(0, 5) != "bind_" || !detail::is_identifier(deco.substr(5)) ||
          deco.size() == 5) {
        err(DiagCode::Syntax, static_cast<int>(at) + 1, "malformed decorator '@" + std::string(deco) + "'");
        continue;
      }
      knob.bind_tag = std::string(deco.substr(5));
      body = detail::trim(line.substr(0, at));
    }

    auto fields = detail::split_fields(body);
    knob.directive = std::string(fields.front().text);
    const auto* schema = registry.find(knob.directive);
    if (schema == nullptr) {
      err(DiagCode::UnknownDirective, fields.front().column,
          "unknown directive '" + knob.directive + "'");
      continue;
    }

    std::size_t f = 1;
    bool ok = true;
    auto take_label = [&](std::string& into, const char* what) {
      if (f >= fields.size() || fields[f].text.empty() || fields[f].text.front() == '{') {
        err(DiagCode::ArityMismatch, f < fields.size() ? fields[f].column : 1,
            std::string("missing ") + what);
        ok = false;
        return;
      }
      if (!detail::is_label(fields[f].text)) {
        err(DiagCode::Syntax, fields[f].column, std::string("bad ") + what + " '" +
                                                    std::string(fields[f].text) + "'");
        ok = false;
        return;
      }
      into = std::string(fields[f++].text);
    };
    if (schema->has_function) take_label(knob.function, "function");
    if (ok && schema->has_target) take_label(knob.target, "target");
    while (ok && f < fields.size() && !fields[f].text.empty() && fields[f].text.front() != '{') {
      if (!detail::is_label(fields[f].text)) {
        err(DiagCode::Syntax, fields[f].column, "bad parameter '" + std::string(fields[f].text) + "'");
        ok = false;
        break;
      }
      knob.fixed_params.emplace_back(fields[f++].text);
    }
    if (!ok) continue;
    if (f >= fields.size()) {
      err(DiagCode::ArityMismatch, static_cast<int>(body.size()), "knob has no value set");
      continue;
    }
    for (; f < fields.size(); ++f) {
      if (fields[f].text.empty() || fields[f].text.front() != '{') {
        err(DiagCode::Syntax, fields[f].column, "expected '{' to open a value set");
        ok = false;
        break;
      }
      try {
        knob.value_sets.push_back(parse_value_set(fields[f].text, line_no, fields[f].column));
      } catch (const CsdError& e) {
        auto d = e.diagnostics().front();
        d.knob_index = static_cast<int>(csd.knobs.size());
        errors.push_back(d);
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (knob.fixed_params.size() != schema->fixed_params ||
        knob.value_sets.size() != schema->value_sets) {
      err(DiagCode::ArityMismatch, 1,
          knob.directive + " expects " + std::to_string(schema->fixed_params) +
              " fixed parameter(s) and " + std::to_string(schema->value_sets) + " value set(s)");
      continue;
    }
    csd.knobs.push_back(std::move(knob));
  }
  if (!errors.empty()) throw CsdError(std::move(errors));
  return csd;
}

/// Parses and validates. Throws CsdError carrying every diagnostic.
inline Csd parse_csd(std::string_view text, const DirectiveRegistry& registry = default_registry()) {
  if (detail::trim(text).empty())
    throw CsdError({{DiagCode::MissingClock, -1, 0, 0, "empty descriptor"}});
  auto csd = parse_csd_unchecked(text, registry);
  if (auto diags = validate_csd(csd, registry); !diags.empty()) throw CsdError(std::move(diags));
  return csd;
}

inline std::string serialize_knob(const Knob& k) {
  std::string out = k.head();
  for (const auto& vs : k.value_sets) out += ";" + serialize_value_set(vs);
  if (k.bind_tag) out += "@bind_" + *k.bind_tag;
  return out;
}

/// Canonical text: one knob per line, no comments, no padding.
inline std::string serialize_csd(const Csd& csd) {
  std::string out;
  for (const auto& k : csd.knobs) out += serialize_knob(k) + "\n";
  return out;
}

}  // namespace db4hls::csd
