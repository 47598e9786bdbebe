#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "forestore/dataset.hpp"
#include "forestore/errors.hpp"

namespace forestore {
namespace {

// Splits one logical CSV record, which may span several physical lines when a
// quoted field contains a newline. Returns false at end of input.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  for (;;) {
    for (std::size_t k = 0; k < line.size(); ++k) {
      const char c = line[k];
      if (in_quotes) {
        if (c == '"') {
          if (k + 1 < line.size() && line[k + 1] == '"') {
            field.push_back('"');
            ++k;
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty() && !was_quoted) {
        in_quotes = true;
        was_quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\r' && k + 1 == line.size()) {
        // CRLF line ending
      } else {
        field.push_back(c);
      }
    }
    if (!in_quotes) break;
    field.push_back('\n');
    if (!std::getline(in, line)) {
      throw DataError("unterminated quoted field starting before line " +
                      std::to_string(line_no));
    }
    ++line_no;
  }
  fields.push_back(std::move(field));
  return true;
}

bool is_blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && !s.empty() &&
      s.front() != ' ' && s.back() != ' ') {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

RawTable read_raw_csv(std::istream& in) {
  RawTable table;
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  while (next_record(in, fields, line_no)) {
    if (is_blank(fields)) continue;
    table.header = fields;
    break;
  }
  if (table.header.empty()) throw DataError("CSV input has no header row");
  while (next_record(in, fields, line_no)) {
    if (is_blank(fields)) continue;
    if (fields.size() != table.header.size()) {
      throw DataError("ragged row at line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

RawTable load_raw_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_raw_csv(in);
}

Dataset read_csv(std::istream& in, const TargetColumn& target) {
  return dataset_from_raw(read_raw_csv(in), target, 0);
}

Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target) {
  return dataset_from_raw(load_raw_csv(path), target, 0);
}

void write_csv(const Dataset& ds, std::ostream& out) {
  const Schema& schema = ds.schema();
  for (const auto& attribute : schema.attributes) out << quote_if_needed(attribute.name) << ',';
  out << quote_if_needed(schema.class_name) << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
      out << quote_if_needed(schema.attributes[a].levels[ds.level(i, a)]) << ',';
    }
    out << quote_if_needed(schema.class_levels[ds.label(i)]) << '\n';
  }
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(ds, out);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace forestore
