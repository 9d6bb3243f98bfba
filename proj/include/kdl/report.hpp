#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kdl/estimate.hpp"
#include "kdl/field.hpp"

namespace kdl {

/// One table row: a constant measured on one domain at one resolution.
struct ResultRow {
  std::string domain;      ///< generator name or file name
  std::string params;      ///< "key=value;key=value"
  int resolution = 0;      ///< cells per unit length
  std::string constant;    ///< e.g. K_p, C_J_lower
  std::string p;           ///< exponent as text, empty for geometric constants
  double value = 0.0;
  std::string bound;       ///< lower | upper | two_sided
  std::string method;
  double wall_time = 0.0;  ///< seconds
  std::string status = "ok";  ///< "ok" or "error: ..."
  std::string note;

  bool ok() const { return status == "ok"; }
  /// Identity of the row within a table: domain, params, resolution, constant, p.
  std::string key() const;
};

ResultRow make_row(const ConstantEstimate& e, bool with_p = true);

/// Columns of the result table, in order.
const std::vector<std::string>& result_columns();

/// Shortest text that reads back to the same double; "nan" and "inf" spelled out.
std::string format_number(double x);
/// Exponent as printed in tables: "2", "1.5".
std::string format_p(double p);

/// RFC 4180: fields with comma, quote, CR or LF are quoted, quotes doubled,
/// records end in CRLF.
std::string csv_escape(const std::string& field);
void write_csv_record(std::ostream& os, const std::vector<std::string>& fields);
/// Parses a whole RFC 4180 document; throws on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Table with header. `timing` false leaves the wall_time column empty so the
/// bytes depend only on the computed values.
void write_results(std::ostream& os, const std::vector<ResultRow>& rows, bool timing = true);
std::vector<ResultRow> read_results(std::istream& is);

/// Field export: header "cell,i,j[,k],u1,u2[,u3]" then one record per true cell
/// with the grid index, cell coordinates and components.
void write_field_csv(std::ostream& os, const DiscreteVectorField& u);

}  // namespace kdl
