#include "kdl/domain_io.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace kdl {

void write_kdl(std::ostream& os, const RasterDomain& d) {
  const Grid& g = d.grid();
  os << "KDL1 " << g.dim() << ' ' << g.nx() << ' ' << g.ny();
  if (g.dim() == 3) os << ' ' << g.nz();
  os << std::setprecision(17) << ' ' << g.h() << ' ' << g.origin()[0] << ' '
     << g.origin()[1];
  if (g.dim() == 3) os << ' ' << g.origin()[2];
  os << '\n';
  const auto& mask = d.mask();
  std::uint8_t state = 0;
  std::size_t run = 0;
  int on_line = 0;
  auto emit = [&](std::size_t r) {
    os << r;
    if (++on_line == 16) {
      os << '\n';
      on_line = 0;
    } else {
      os << ' ';
    }
  };
  for (std::uint8_t v : mask) {
    if (v == state) {
      ++run;
    } else {
      emit(run);
      state = v;
      run = 1;
    }
  }
  emit(run);
  if (on_line) os << '\n';
}

void write_kdl_file(const std::string& path, const RasterDomain& d) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write_kdl(os, d);
  if (!os) throw FormatError("write failed for '" + path + "'");
}

RasterDomain read_kdl(std::istream& is) {
  std::string magic;
  if (!(is >> magic) || magic != "KDL1") throw FormatError("bad magic");
  int dim = 0;
  if (!(is >> dim) || (dim != 2 && dim != 3)) throw FormatError("bad dimension");
  CellCoord n{1, 1, 1};
  for (int a = 0; a < dim; ++a)
    if (!(is >> n[a]) || n[a] <= 0) throw FormatError("bad extents");
  double h = 0;
  if (!(is >> h) || !(h > 0)) throw FormatError("bad spacing");
  Point origin{0, 0, 0};
  for (int a = 0; a < dim; ++a)
    if (!(is >> origin[a])) throw FormatError("bad origin");
  const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  std::vector<std::uint8_t> mask;
  mask.reserve(total);
  std::uint8_t state = 0;
  long long run = 0;
  while (is >> run) {
    if (run < 0 || mask.size() + static_cast<std::size_t>(run) > total)
      throw FormatError("run lengths exceed grid size");
    mask.insert(mask.end(), static_cast<std::size_t>(run), state);
    state ^= 1;
  }
  if (!is.eof()) throw FormatError("malformed run-length data");
  if (mask.size() != total) throw FormatError("run lengths do not cover grid");
  return RasterDomain(Grid(dim, n, h, origin), std::move(mask));
}

namespace {

void skip_pbm_space(std::istream& is) {
  for (;;) {
    int c = is.peek();
    if (c == '#') {
      is.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    } else if (c != EOF && std::isspace(c)) {
      is.get();
    } else {
      return;
    }
  }
}

}  // namespace

RasterDomain read_pbm(std::istream& is, double h) {
  if (!(h > 0)) throw FormatError("PBM input requires a positive spacing h");
  char p = 0, kind = 0;
  is.get(p);
  is.get(kind);
  if (p != 'P' || (kind != '1' && kind != '4')) throw FormatError("bad magic");
  int w = 0, ht = 0;
  skip_pbm_space(is);
  is >> w;
  skip_pbm_space(is);
  is >> ht;
  if (!is || w <= 0 || ht <= 0) throw FormatError("bad PBM size");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(w) * ht);
  if (kind == '1') {
    for (auto& b : bits) {
      skip_pbm_space(is);
      char c = 0;
      if (!is.get(c) || (c != '0' && c != '1')) throw FormatError("truncated PBM data");
      b = c == '1';
    }
  } else {
    is.get();  // single whitespace after header
    const int row_bytes = (w + 7) / 8;
    std::vector<unsigned char> row(static_cast<std::size_t>(row_bytes));
    for (int y = 0; y < ht; ++y) {
      if (!is.read(reinterpret_cast<char*>(row.data()), row_bytes))
        throw FormatError("truncated PBM data");
      for (int x = 0; x < w; ++x)
        bits[static_cast<std::size_t>(y) * w + x] = (row[x / 8] >> (7 - x % 8)) & 1;
    }
  }
  const int margin = 2;
  Grid g(2, {w + 2 * margin, ht + 2 * margin, 1}, h, {-margin * h, -margin * h, 0});
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (int y = 0; y < ht; ++y)
    for (int x = 0; x < w; ++x)
      mask[static_cast<std::size_t>(g.index(x + margin, ht - 1 - y + margin))] =
          bits[static_cast<std::size_t>(y) * w + x];
  return RasterDomain(std::move(g), std::move(mask));
}

RasterDomain read_domain_file(const std::string& path, double pbm_h) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  char head[2] = {0, 0};
  is.read(head, 2);
  is.clear();
  is.seekg(0);
  if (head[0] == 'P' && (head[1] == '1' || head[1] == '4')) return read_pbm(is, pbm_h);
  return read_kdl(is);
}

}  // namespace kdl
