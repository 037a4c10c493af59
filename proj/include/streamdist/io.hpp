#pragma once

// CSV and dense ARFF ingestion. Missing cells ("" or "?" in CSV, "?" in
// ARFF) become kMissing; labels are interned to dense ids in order of first
// appearance.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "streamdist/data.hpp"

namespace streamdist {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::optional<std::size_t> row = std::nullopt,
             std::optional<std::size_t> column = std::nullopt)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  std::optional<std::size_t> row() const { return row_; }
  std::optional<std::size_t> column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::optional<std::size_t> row,
                            std::optional<std::size_t> column) {
    std::string msg = what;
    if (row) msg += " (row " + std::to_string(*row);
    if (column) msg += (row ? ", " : " (") + std::string("column ") + std::to_string(*column);
    if (row || column) msg += ")";
    return msg;
  }

  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

/// Column reference by 0-based index or by header name.
using ColumnRef = std::variant<std::size_t, std::string>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Splits one record on commas. Fields may be wrapped in double quotes
// ("" escapes a quote); ARFF additionally allows single quotes.
inline std::vector<std::string> split_record(std::string_view line, bool allow_single_quotes) {
  std::vector<std::string> fields;
  std::string cur;
  char quote = 0;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) {
        if (i + 1 < line.size() && line[i + 1] == quote) {
          cur.push_back(c);
          ++i;
        } else {
          quote = 0;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' || (allow_single_quotes && c == '\'')) {
      quote = c;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quote) throw ParseError("unterminated quoted field");
  fields.push_back(was_quoted ? cur : std::string(trim(cur)));
  return fields;
}

// Parses a finite real; nullopt means the token is not a number.
inline std::optional<double> parse_real(std::string_view tok) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

class LabelInterner {
 public:
  Label intern(const std::string& name) {
    auto [it, inserted] = ids_.emplace(name, static_cast<Label>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::unordered_map<std::string, Label> ids_;
  std::vector<std::string> names_;
};

}  // namespace detail

inline Dataset parse_csv(std::istream& in, std::optional<ColumnRef> label_column = std::nullopt,
                         bool has_header = true, std::string name = "csv") {
  Dataset ds;
  ds.name = std::move(name);
  detail::LabelInterner labels;

  std::string line;
  std::optional<std::size_t> width;
  std::optional<std::size_t> label_idx;
  std::vector<std::string> header;

  if (has_header) {
    while (std::getline(in, line)) {
      detail::strip_cr(line);
      if (!detail::trim(line).empty()) break;
    }
    if (detail::trim(line).empty()) throw ParseError("CSV file is empty");
    header = detail::split_record(line, false);
    width = header.size();
  }

  auto resolve_label = [&](std::size_t w) -> std::size_t {
    if (!label_column) return w - 1;
    if (const auto* idx = std::get_if<std::size_t>(&*label_column)) {
      if (*idx >= w) throw ParseError("label column " + std::to_string(*idx) + " out of range");
      return *idx;
    }
    const auto& wanted = std::get<std::string>(*label_column);
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == wanted) return i;
    // A purely numeric name is accepted as an index.
    if (auto v = detail::parse_real(wanted); v && *v >= 0 && std::floor(*v) == *v) {
      const auto idx = static_cast<std::size_t>(*v);
      if (idx < w) return idx;
    }
    throw ParseError("label column '" + wanted + "' not found");
  };
  if (width) label_idx = resolve_label(*width);

  std::size_t row = 0;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = detail::split_record(line, false);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), row);
    }
    if (!width) {
      width = fields.size();
      label_idx = resolve_label(*width);
    }
    if (fields.size() != *width)
      throw ParseError("ragged row: expected " + std::to_string(*width) + " fields, got " +
                           std::to_string(fields.size()),
                       row);
    if (*width < 2) throw ParseError("CSV needs at least one feature and one label column", row);

    Instance inst;
    inst.features.reserve(*width - 1);
    for (std::size_t col = 0; col < fields.size(); ++col) {
      const std::string_view cell = detail::trim(fields[col]);
      if (col == *label_idx) {
        if (cell.empty() || cell == "?") throw ParseError("missing class label", row, col);
        inst.label = labels.intern(std::string(cell));
        continue;
      }
      if (cell.empty() || cell == "?") {
        inst.features.push_back(kMissing);
      } else if (auto v = detail::parse_real(cell)) {
        inst.features.push_back(*v);
      } else {
        throw ParseError("non-numeric feature value '" + std::string(cell) + "'", row, col);
      }
    }
    ds.instances.push_back(std::move(inst));
    ++row;
  }

  ds.feature_count = width ? *width - 1 : 0;
  ds.class_names = labels.names();
  ds.class_count = ds.class_names.size();
  return ds;
}

inline Dataset load_csv(const std::filesystem::path& path,
                        std::optional<ColumnRef> label_column = std::nullopt,
                        bool has_header = true) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return parse_csv(in, std::move(label_column), has_header, path.stem().string());
}

namespace detail {

struct ArffAttribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> values;  // nominal only
};

// Reads an attribute name which may be quoted; returns the remainder.
inline std::string_view take_name(std::string_view rest, std::string& name) {
  rest = trim(rest);
  if (rest.empty()) return rest;
  if (rest.front() == '\'' || rest.front() == '"') {
    const char q = rest.front();
    const auto close = rest.find(q, 1);
    if (close == std::string_view::npos) throw ParseError("unterminated quoted attribute name");
    name = std::string(rest.substr(1, close - 1));
    return rest.substr(close + 1);
  }
  std::size_t i = 0;
  while (i < rest.size() && !std::isspace(static_cast<unsigned char>(rest[i])) && rest[i] != '{')
    ++i;
  name = std::string(rest.substr(0, i));
  return rest.substr(i);
}

inline ArffAttribute parse_attribute(std::string_view decl, std::size_t line_no) {
  ArffAttribute attr;
  std::string_view rest = take_name(decl, attr.name);
  if (attr.name.empty()) throw ParseError("malformed @attribute declaration", line_no);
  rest = trim(rest);
  if (rest.empty()) throw ParseError("@attribute '" + attr.name + "' has no type", line_no);
  if (rest.front() == '{') {
    const auto close = rest.rfind('}');
    if (close == std::string_view::npos)
      throw ParseError("unterminated nominal value list for '" + attr.name + "'", line_no);
    attr.nominal = true;
    for (auto& v : split_record(rest.substr(1, close - 1), true))
      if (!v.empty()) attr.values.push_back(v);
    if (attr.values.empty())
      throw ParseError("nominal attribute '" + attr.name + "' has no values", line_no);
    return attr;
  }
  const std::string type = lower(rest.substr(0, rest.find_first_of(" \t")));
  if (type == "numeric" || type == "real" || type == "integer") return attr;
  throw ParseError("unsupported attribute type '" + type + "' for '" + attr.name + "'", line_no);
}

}  // namespace detail

inline Dataset parse_arff(std::istream& in, std::string fallback_name = "arff") {
  Dataset ds;
  ds.name = std::move(fallback_name);
  std::vector<detail::ArffAttribute> attrs;
  std::string line;
  std::size_t line_no = 0;
  bool in_data = false;

  while (!in_data && std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    const std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '%') continue;
    if (t.front() != '@') throw ParseError("unexpected text in ARFF header", line_no);
    const auto kw_end = t.find_first_of(" \t");
    const std::string kw = detail::lower(t.substr(0, kw_end));
    const std::string_view rest =
        kw_end == std::string_view::npos ? std::string_view{} : t.substr(kw_end);
    if (kw == "@relation") {
      std::string name;
      detail::take_name(rest, name);
      if (!name.empty()) ds.name = name;
    } else if (kw == "@attribute") {
      attrs.push_back(detail::parse_attribute(rest, line_no));
    } else if (kw == "@data") {
      in_data = true;
    } else {
      throw ParseError("unknown ARFF keyword '" + kw + "'", line_no);
    }
  }
  if (!in_data) throw ParseError("ARFF file has no @data section");
  if (attrs.size() < 2) throw ParseError("ARFF needs at least one feature and a class attribute");

  std::size_t class_idx = attrs.size() - 1;
  for (std::size_t i = 0; i < attrs.size(); ++i)
    if (detail::lower(attrs[i].name) == "class") class_idx = i;
  if (!attrs[class_idx].nominal)
    throw ParseError("class attribute '" + attrs[class_idx].name + "' must be nominal");
  for (std::size_t i = 0; i < attrs.size(); ++i)
    if (i != class_idx && attrs[i].nominal)
      throw ParseError("nominal feature '" + attrs[i].name + "' is not supported");

  const auto& declared = attrs[class_idx].values;
  detail::LabelInterner labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    const std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '%') continue;
    if (t.front() == '{') throw ParseError("sparse ARFF data is not supported", row);
    auto fields = detail::split_record(t, true);
    if (fields.size() != attrs.size())
      throw ParseError("ragged row: expected " + std::to_string(attrs.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       row);
    Instance inst;
    inst.features.reserve(attrs.size() - 1);
    for (std::size_t col = 0; col < fields.size(); ++col) {
      const std::string_view cell = detail::trim(fields[col]);
      if (col == class_idx) {
        if (cell == "?") throw ParseError("missing class label", row, col);
        if (std::find(declared.begin(), declared.end(), cell) == declared.end())
          throw ParseError("undeclared class value '" + std::string(cell) + "'", row, col);
        inst.label = labels.intern(std::string(cell));
      } else if (cell == "?") {
        inst.features.push_back(kMissing);
      } else if (auto v = detail::parse_real(cell)) {
        inst.features.push_back(*v);
      } else {
        throw ParseError("non-numeric feature value '" + std::string(cell) + "'", row, col);
      }
    }
    ds.instances.push_back(std::move(inst));
    ++row;
  }

  // Declared values that never occur keep ids after the observed ones.
  for (const auto& v : declared) labels.intern(v);
  ds.class_names = labels.names();
  ds.class_count = ds.class_names.size();
  ds.feature_count = attrs.size() - 1;
  return ds;
}

inline Dataset load_arff(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return parse_arff(in, path.stem().string());
}

/// Dispatches on extension: ".arff" goes to load_arff, anything else is CSV.
inline Dataset load_dataset(const std::filesystem::path& path,
                            std::optional<ColumnRef> label_column = std::nullopt,
                            bool has_header = true) {
  if (detail::lower(path.extension().string()) == ".arff") return load_arff(path);
  return load_csv(path, std::move(label_column), has_header);
}

}  // namespace streamdist
