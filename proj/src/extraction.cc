// Copyright 2026 The polyprop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "polyprop/extraction.h"

#include <set>

#include "json.hpp"
#include "polyprop/text.h"

namespace polyprop {
namespace {

using json = nlohmann::json;

constexpr std::string_view kOpenPrefix = "== SAMPLE ";
constexpr std::string_view kClose = "== END SAMPLE ==";
constexpr std::string_view kSuffix = " ==";

bool starts_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(0, p.size()) == p;
}

bool is_word_byte(char c) {
  return is_ascii_alpha(c) || is_ascii_digit(c) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool strip_char(char c) {
  switch (c) {
    case '(': case ')': case '[': case ']': case '{': case '}':
    case ',': case ';': case ':': case '=': case '"': case '.':
      return true;
    default:
      return false;
  }
}

std::vector<std::string> phrase_words(std::string_view phrase) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < phrase.size()) {
    while (i < phrase.size() && is_ascii_space(phrase[i])) ++i;
    std::size_t j = i;
    while (j < phrase.size() && !is_ascii_space(phrase[j])) ++j;
    std::string_view w = phrase.substr(i, j - i);
    while (!w.empty() && strip_char(w.front())) w.remove_prefix(1);
    while (!w.empty() && strip_char(w.back())) w.remove_suffix(1);
    if (!w.empty()) words.push_back(to_lower_ascii(w));
    i = j;
  }
  return words;
}

// Finds the alias whose last word is closest to the quantity; among those,
// the one spanning the most words.
const PropertySpec* match_property(std::string_view phrase,
                                   const Registry& registry) {
  const auto words = phrase_words(phrase);
  const int n = static_cast<int>(words.size());
  for (int end = n; end > 0; --end) {
    for (int len = std::min(end, registry.max_alias_words()); len >= 1;
         --len) {
      std::string key;
      for (int k = end - len; k < end; ++k) {
        if (!key.empty()) key.push_back(' ');
        key += words[k];
      }
      if (const PropertySpec* spec = registry.lookup(key)) return spec;
    }
  }
  return nullptr;
}

// Comparator or approximation marker written just before the number.
std::size_t extend_start(std::string_view line, std::size_t clause_start,
                         std::size_t num_start) {
  std::size_t p = num_start;
  while (p > clause_start && is_ascii_space(line[p - 1])) --p;
  for (std::string_view m :
       {">=", "<=", "\xE2\x89\xA5", "\xE2\x89\xA4", "\xE2\xA9\xBE",
        "\xE2\xA9\xBD", ">", "<", "~", "\xE2\x89\x88", "\xE2\x88\xBC"}) {
    if (p - clause_start >= m.size() && line.substr(p - m.size(), m.size()) == m) {
      return p - m.size();
    }
  }
  return num_start;
}

void scan_measurements(std::string_view line, std::size_t base,
                       const std::string& sample_id, const Registry& registry,
                       int& ordinal, Extraction& out) {
  std::size_t clause_start = 0;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const char c = line[pos];
    if (c == ';' ||
        (c == '.' && (pos + 1 == line.size() || is_ascii_space(line[pos + 1])))) {
      clause_start = pos + 1;
      ++pos;
      continue;
    }
    const bool boundary_before = pos == 0 || !(is_word_byte(line[pos - 1]) ||
                                               line[pos - 1] == '.');
    if (!boundary_before) {
      ++pos;
      continue;
    }
    const auto num = lex_number(line.substr(pos));
    if (!num) {
      ++pos;
      continue;
    }
    const std::size_t start = extend_start(line, clause_start, pos);
    auto parsed = parse_quantity_prefix(line.substr(start));
    if (std::holds_alternative<ParseFailure>(parsed)) {
      pos += num->length;
      clause_start = pos;
      continue;
    }
    const auto& prefix = std::get<QuantityPrefix>(parsed);
    const std::size_t end = start + prefix.consumed;
    const PropertySpec* spec =
        match_property(line.substr(clause_start, start - clause_start), registry);
    if (!spec) {
      ++out.unmapped;
    } else {
      PropertyObservation obs;
      obs.record_id = sample_id + "#" + std::to_string(++ordinal);
      obs.sample_id = sample_id;
      obs.head_id = spec->head_id;
      obs.quantity = prefix.quantity;
      obs.span_begin = base + start;
      obs.span_end = base + end;
      try {
        obs.canonical_value = to_canonical(obs.quantity, *spec);
      } catch (const IncompatibleUnit&) {
        ++out.incompatible;
      }
      out.observations.push_back(std::move(obs));
    }
    pos = std::max(end, pos + 1);
    clause_start = pos;
  }
}

void append_text(std::string& dst, std::string_view text) {
  text = trim(text);
  if (text.empty()) return;
  if (!dst.empty()) dst.push_back(' ');
  dst.append(text);
}

json quantity_json(const Quantity& q) {
  json j;
  switch (q.kind) {
    case QuantityKind::kPoint:
      j["kind"] = "point";
      j["value"] = q.value;
      break;
    case QuantityKind::kRange:
      j["kind"] = "range";
      j["lo"] = q.lo;
      j["hi"] = q.hi;
      break;
    case QuantityKind::kLimit:
      j["kind"] = "limit";
      j["bound"] = q.value;
      j["direction"] = q.direction == LimitDirection::kGreater ? ">" : "<";
      break;
  }
  j["unit"] = q.unit ? json(*q.unit) : json(nullptr);
  return j;
}

Quantity quantity_from_json(const json& j) {
  std::optional<std::string> unit;
  if (j.contains("unit") && !j["unit"].is_null()) {
    unit = j["unit"].get<std::string>();
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "point") return Quantity::point(j.at("value").get<double>(), unit);
  if (kind == "range") {
    return Quantity::range(j.at("lo").get<double>(), j.at("hi").get<double>(),
                           unit);
  }
  if (kind == "limit") {
    const auto dir = j.at("direction").get<std::string>() == ">"
                         ? LimitDirection::kGreater
                         : LimitDirection::kLess;
    return Quantity::limit(dir, j.at("bound").get<double>(), unit);
  }
  throw ConfigError("unknown quantity kind '" + kind + "'");
}

}  // namespace

Extraction extract_document(std::string_view doc, const Registry& registry) {
  Extraction out;
  std::set<std::string, std::less<>> seen_ids;
  SampleSection* open = nullptr;
  int ordinal = 0;
  std::size_t line_begin = 0;
  int line_no = 0;
  while (line_begin <= doc.size()) {
    std::size_t line_end = doc.find('\n', line_begin);
    if (line_end == std::string_view::npos) line_end = doc.size();
    std::string_view raw = doc.substr(line_begin, line_end - line_begin);
    ++line_no;
    const std::string_view line = trim(raw);
    const auto where = "line " + std::to_string(line_no);

    if (line == kClose) {
      if (!open) throw MalformedDocument(where + ": END SAMPLE without open");
      open = nullptr;
    } else if (starts_with(line, kOpenPrefix) && line.size() > kOpenPrefix.size() + kSuffix.size() &&
               line.substr(line.size() - kSuffix.size()) == kSuffix) {
      if (open) {
        throw MalformedDocument(where + ": sample '" + open->sample_id +
                                "' not closed before next sample");
      }
      std::string id(trim(line.substr(
          kOpenPrefix.size(),
          line.size() - kOpenPrefix.size() - kSuffix.size())));
      if (id.empty() || id.find_first_of(" \t") != std::string::npos) {
        throw MalformedDocument(where + ": bad sample id");
      }
      if (!seen_ids.insert(id).second) {
        throw MalformedDocument(where + ": duplicate sample id '" + id + "'");
      }
      out.samples.push_back(SampleSection{id, "", ""});
      open = &out.samples.back();
      ordinal = 0;
    } else if (starts_with(line, "==")) {
      throw MalformedDocument(where + ": unrecognised delimiter");
    } else if (!open) {
      if (!line.empty() && line.front() != '#') {
        throw MalformedDocument(where + ": text outside any sample");
      }
    } else if (starts_with(line, "Sample:")) {
      append_text(open->sample_text, line.substr(7));
    } else if (starts_with(line, "Synthesis:")) {
      append_text(open->synthesis_text, line.substr(10));
    } else if (!line.empty()) {
      scan_measurements(raw, line_begin, open->sample_id, registry, ordinal, out);
    }
    if (line_end == doc.size()) break;
    line_begin = line_end + 1;
  }
  if (open) {
    throw MalformedDocument("sample '" + open->sample_id +
                            "' not closed at end of document");
  }
  return out;
}

Extraction extract_documents(const std::vector<std::string>& docs,
                             const Registry& registry) {
  Extraction all;
  std::set<std::string, std::less<>> ids;
  for (const auto& doc : docs) {
    Extraction ex = extract_document(doc, registry);
    for (auto& s : ex.samples) {
      if (!ids.insert(s.sample_id).second) {
        throw MalformedDocument("duplicate sample id '" + s.sample_id +
                                "' across documents");
      }
      all.samples.push_back(std::move(s));
    }
    for (auto& o : ex.observations) all.observations.push_back(std::move(o));
    all.unmapped += ex.unmapped;
    all.incompatible += ex.incompatible;
  }
  return all;
}

std::string extraction_to_json(const Extraction& ex, const Registry& registry) {
  json j;
  j["format"] = "polyprop.extraction";
  j["version"] = 1;
  j["unmapped"] = ex.unmapped;
  j["incompatible"] = ex.incompatible;
  json samples = json::array();
  for (const auto& s : ex.samples) {
    samples.push_back({{"sample_id", s.sample_id},
                       {"sample", s.sample_text},
                       {"synthesis", s.synthesis_text}});
  }
  j["samples"] = std::move(samples);
  json obs = json::array();
  for (const auto& o : ex.observations) {
    json r;
    r["record_id"] = o.record_id;
    r["sample_id"] = o.sample_id;
    r["head"] = registry.spec(o.head_id).name;
    r["quantity"] = quantity_json(o.quantity);
    r["canonical_value"] =
        o.canonical_value ? json(*o.canonical_value) : json(nullptr);
    r["span"] = {o.span_begin, o.span_end};
    obs.push_back(std::move(r));
  }
  j["observations"] = std::move(obs);
  return j.dump(1) + "\n";
}

Extraction extraction_from_json(std::string_view text,
                                const Registry& registry) {
  Extraction ex;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "polyprop.extraction") {
      throw ConfigError("not an extraction file");
    }
    ex.unmapped = j.value("unmapped", 0);
    ex.incompatible = j.value("incompatible", 0);
    for (const auto& s : j.at("samples")) {
      ex.samples.push_back(SampleSection{s.at("sample_id").get<std::string>(),
                                         s.at("sample").get<std::string>(),
                                         s.at("synthesis").get<std::string>()});
    }
    for (const auto& r : j.at("observations")) {
      PropertyObservation o;
      o.record_id = r.at("record_id").get<std::string>();
      o.sample_id = r.at("sample_id").get<std::string>();
      const PropertySpec* spec = registry.lookup(r.at("head").get<std::string>());
      if (!spec) throw ConfigError("unknown head in extraction file");
      o.head_id = spec->head_id;
      o.quantity = quantity_from_json(r.at("quantity"));
      if (!r.at("canonical_value").is_null()) {
        o.canonical_value = r.at("canonical_value").get<double>();
      }
      o.span_begin = r.at("span").at(0).get<std::size_t>();
      o.span_end = r.at("span").at(1).get<std::size_t>();
      ex.observations.push_back(std::move(o));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed extraction file: ") + e.what());
  }
  return ex;
}

}  // namespace polyprop
