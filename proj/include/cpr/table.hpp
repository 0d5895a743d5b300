#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cpr {

/// Column-named table of pre-formatted string cells with deterministic,
/// platform-independent rendering.  Numbers are formatted through
/// std::to_chars (shortest round-trip form), so re-running an experiment
/// with the same seeds yields byte-identical output.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  /// Canonical cell formatting.
  static std::string num(double v);
  static std::string num(std::uint64_t v);
  static std::string boolean(bool v);

  void add_row(std::vector<std::string> cells);

  std::size_t rows() const { return cells_.size(); }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::string& cell(std::size_t row, std::size_t col) const;

  /// Header line plus one line per row; cells containing separators are
  /// quoted RFC-4180 style.  Lines end with '\n'.
  std::string to_csv() const;

  /// Array of objects, one per row, all values as strings, keys in column
  /// order.
  std::string to_json() const;

  /// '#'-prefixed header, whitespace-aligned columns; ready for `plot`.
  std::string to_gnuplot() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> cells_;
};

}  // namespace cpr
