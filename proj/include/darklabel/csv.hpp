#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace darklabel::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may hold commas, doubled quotes, and
/// newlines. A leading UTF-8 BOM is skipped. Throws Error(Csv) on an
/// unterminated quote.
std::vector<Row> parse(std::string_view data);

struct Table {
  Row header;
  std::vector<Row> rows;

  /// Index of `name` in the header, or -1.
  int column(std::string_view name) const;
};

/// First row is the header. Rows shorter than the header are padded with
/// empty fields; longer rows are rejected.
Table parse_table(std::string_view data);

std::string escape(std::string_view field);
std::string format_row(const Row& row);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace darklabel::csv
