#include "outsel/csv.hpp"

#include <fstream>
#include <iterator>

namespace outsel {

namespace {

std::vector<std::vector<std::string>> parseRecords(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool inQuotes = false;
  bool fieldStarted = false;
  size_t i = 0;
  const size_t len = text.size();

  auto endField = [&] {
    record.push_back(std::move(field));
    field.clear();
    fieldStarted = false;
  };
  auto endRecord = [&] {
    endField();
    // A bare empty line is skipped rather than read as a one-field record.
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };

  while (i < len) {
    const char c = text[i];
    if (inQuotes) {
      if (c == '"') {
        if (i + 1 < len && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        inQuotes = false;
        ++i;
        continue;
      }
      field.push_back(c);
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (fieldStarted && !field.empty()) {
          throw ValidationError("stray quote inside unquoted CSV field");
        }
        inQuotes = true;
        fieldStarted = true;
        ++i;
        break;
      case ',':
        endField();
        ++i;
        break;
      case '\r':
        if (i + 1 < len && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        endRecord();
        ++i;
        break;
      default:
        field.push_back(c);
        fieldStarted = true;
        ++i;
    }
  }
  if (inQuotes) throw ValidationError("unterminated quoted CSV field");
  if (fieldStarted || !record.empty()) endRecord();
  return records;
}

}  // namespace

Table readCsv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  auto records = parseRecords(text);
  if (records.empty()) throw ValidationError("CSV input has no header row");

  Table table;
  table.names = std::move(records.front());
  const size_t width = table.names.size();
  table.columns.assign(width, {});
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw ValidationError("CSV row " + std::to_string(r + 1) + " has " +
                            std::to_string(records[r].size()) + " fields, expected " +
                            std::to_string(width));
    }
    for (size_t c = 0; c < width; ++c) table.columns[c].push_back(std::move(records[r][c]));
  }
  return table;
}

Table readCsvFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return readCsv(in);
}

}  // namespace outsel
