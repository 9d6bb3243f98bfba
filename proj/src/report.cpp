#include "kdl/report.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace kdl {

std::string ResultRow::key() const {
  return domain + '\x1f' + params + '\x1f' + std::to_string(resolution) + '\x1f' + constant + '\x1f' + p;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string format_p(double p) { return format_number(p); }

ResultRow make_row(const ConstantEstimate& e, bool with_p) {
  ResultRow r;
  r.constant = e.name;
  if (with_p) r.p = format_p(e.p);
  r.value = e.value;
  r.bound = to_string(e.bound);
  r.method = e.method;
  r.note = e.note;
  return r;
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols{"domain", "params", "resolution", "constant", "p", "value",
                                             "bound", "method", "wall_time", "status", "note"};
  return cols;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_csv_record(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c != '"') {
        field += c;
      } else if (i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else {
        quoted = false;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
      }
      field.clear();
      rec.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw Error("unterminated quoted CSV field");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

void write_results(std::ostream& os, const std::vector<ResultRow>& rows, bool timing) {
  write_csv_record(os, result_columns());
  for (const auto& r : rows)
    write_csv_record(os, {r.domain, r.params, std::to_string(r.resolution), r.constant, r.p,
                          format_number(r.value), r.bound, r.method, timing ? format_number(r.wall_time) : "",
                          r.status, r.note});
}

namespace {

double parse_number(const std::string& s) {
  if (s.empty()) return 0.0;
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error("bad number '" + s + "' in results");
  return x;
}

}  // namespace

std::vector<ResultRow> read_results(std::istream& is) {
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const auto recs = parse_csv(text);
  if (recs.empty()) return {};
  if (recs[0] != result_columns()) throw Error("results header does not match");
  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const auto& f = recs[i];
    if (f.size() != result_columns().size()) throw Error("results record " + std::to_string(i) + " has wrong width");
    ResultRow r;
    r.domain = f[0];
    r.params = f[1];
    r.resolution = static_cast<int>(parse_number(f[2]));
    r.constant = f[3];
    r.p = f[4];
    r.value = parse_number(f[5]);
    r.bound = f[6];
    r.method = f[7];
    r.wall_time = parse_number(f[8]);
    r.status = f[9];
    r.note = f[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_field_csv(std::ostream& os, const DiscreteVectorField& u) {
  const FieldSpace& s = *u.space;
  const int n = s.dim();
  std::vector<std::string> head{"cell", "i", "j"};
  if (n == 3) head.emplace_back("k");
  for (int c = 0; c < n; ++c) head.push_back("u" + std::to_string(c + 1));
  write_csv_record(os, head);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const CellCoord c = s.grid().coord(s.cell(k));
    std::vector<std::string> rec{std::to_string(s.cell(k))};
    for (int a = 0; a < n; ++a) rec.push_back(std::to_string(c[static_cast<std::size_t>(a)]));
    for (int i = 0; i < n; ++i) rec.push_back(format_number(u.at(k, i)));
    write_csv_record(os, rec);
  }
}

}  // namespace kdl
