#include "cpr/table.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace cpr {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("Table: needs at least one column");
}

std::string Table::num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string Table::num(std::uint64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string Table::boolean(bool v) { return v ? "1" : "0"; }

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("Table: row width differs from column count");
  cells_.push_back(std::move(cells));
}

const std::string& Table::cell(std::size_t row, std::size_t col) const {
  if (row >= cells_.size() || col >= columns_.size())
    throw std::invalid_argument("Table: cell index out of range");
  return cells_[row][col];
}

namespace {

void append_csv_cell(std::string& out, const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) {
    out += cell;
    return;
  }
  out += '"';
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c) out += ',';
    append_csv_cell(out, columns_[c]);
  }
  out += '\n';
  for (const auto& row : cells_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      append_csv_cell(out, row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string Table::to_json() const {
  std::string out = "[";
  for (std::size_t r = 0; r < cells_.size(); ++r) {
    out += r ? ",\n " : "\n ";
    out += '{';
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) out += ", ";
      append_json_string(out, columns_[c]);
      out += ": ";
      append_json_string(out, cells_[r][c]);
    }
    out += '}';
  }
  out += cells_.empty() ? "]" : "\n]";
  out += '\n';
  return out;
}

std::string Table::to_gnuplot() const {
  // Column widths for alignment; header included.
  std::vector<std::size_t> width(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) width[c] = columns_[c].size();
  for (const auto& row : cells_)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::string out = "#";
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    out += ' ';
    out += columns_[c];
    if (c + 1 < columns_.size()) out.append(width[c] - columns_[c].size(), ' ');
  }
  out += '\n';
  for (const auto& row : cells_) {
    out += ' ';
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += ' ';
      out += row[c];
      if (c + 1 < row.size()) out.append(width[c] - row[c].size(), ' ');
    }
    out += '\n';
  }
  return out;
}

}  // namespace cpr
