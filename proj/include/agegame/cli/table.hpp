#pragma once

// String tables with a fixed numeric format (10 significant digits, no
// locale) and CSV/JSON writers.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace agegame::cli {

/// 10 significant digits, shortest general form; +inf prints as "inf".
inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 10);
  return std::string(buf.data(), ptr);
}

inline std::string fmt(std::int64_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string to_csv() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        out += cells[i];
      }
      out.push_back('\n');
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  /// Cells that parse fully as finite numbers become JSON numbers.
  nlohmann::ordered_json to_json() const {
    auto rows_json = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json obj;
      for (std::size_t i = 0; i < header.size(); ++i) {
        const auto& cell = i < r.size() ? r[i] : std::string();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (!cell.empty() && ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(v)) {
          obj[header[i]] = v;
        } else {
          obj[header[i]] = cell;
        }
      }
      rows_json.push_back(std::move(obj));
    }
    return rows_json;
  }

  friend bool operator==(const Table&, const Table&) = default;
};

/// Inverse of Table::to_csv. Cells never contain commas or quotes.
inline Table parse_csv(std::string_view text) {
  Table t;
  bool first = true;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    std::vector<std::string> cells;
    std::size_t c = 0;
    while (true) {
      const auto comma = line.find(',', c);
      cells.emplace_back(line.substr(c, comma == std::string_view::npos ? std::string_view::npos : comma - c));
      if (comma == std::string_view::npos) break;
      c = comma + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
    start = end + 1;
  }
  return t;
}

}  // namespace agegame::cli
