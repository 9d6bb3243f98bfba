#pragma once

#include <iosfwd>
#include <string>

#include "kdl/domain.hpp"

namespace kdl {

/// Raised for unreadable or malformed domain files.
class FormatError : public Error {
 public:
  using Error::Error;
};

// KDL1 text format:
//
//   KDL1 <dim> <width> <height> [<depth>] <h> <ox> <oy> [<oz>]
//   <run lengths, whitespace separated>
//
// The runs cover the mask in row-major order (x fastest, then y, then z),
// alternating false/true and starting with a false run (which may be 0).

void write_kdl(std::ostream& os, const RasterDomain& d);
void write_kdl_file(const std::string& path, const RasterDomain& d);
RasterDomain read_kdl(std::istream& is);

/// Plain or raw PBM (P1/P4). Black (1) pixels are domain cells; the first
/// image row is the top of the domain. The origin is (0, 0).
RasterDomain read_pbm(std::istream& is, double h);

/// Dispatches on the magic: "KDL1" or "P1"/"P4" (h required for PBM).
RasterDomain read_domain_file(const std::string& path, double pbm_h = 0.0);

}  // namespace kdl
