#include "stretto/matrix_io.hpp"

#include <atomic>
#include <cstring>
#include <fstream>
#include <sstream>

namespace stretto {

namespace {

std::atomic<int> g_threads{1};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffull));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint64_t get_u64(std::istream& in, const std::string& what) {
  std::uint64_t lo = get_u32(in, what);
  std::uint64_t hi = get_u32(in, what);
  return lo | (hi << 32);
}

void put_f32_row_major(std::ostream& out, const MatF& m) {
  // floats are IEEE-754 here; serialize each as its little-endian bit pattern
  std::vector<unsigned char> buf(static_cast<std::size_t>(m.size()) * 4);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::uint32_t bits;
      float v = m(r, c);
      std::memcpy(&bits, &v, 4);
      buf[k++] = static_cast<unsigned char>(bits & 0xff);
      buf[k++] = static_cast<unsigned char>((bits >> 8) & 0xff);
      buf[k++] = static_cast<unsigned char>((bits >> 16) & 0xff);
      buf[k++] = static_cast<unsigned char>((bits >> 24) & 0xff);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
}

MatF get_f32_row_major(std::istream& in, std::uint32_t rows, std::uint32_t cols,
                       const std::string& what) {
  MatF m(rows, cols);
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols * 4);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!in) throw FormatError("truncated " + what);
  std::size_t k = 0;
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      std::uint32_t bits = static_cast<std::uint32_t>(buf[k]) |
                           (static_cast<std::uint32_t>(buf[k + 1]) << 8) |
                           (static_cast<std::uint32_t>(buf[k + 2]) << 16) |
                           (static_cast<std::uint32_t>(buf[k + 3]) << 24);
      k += 4;
      float v;
      std::memcpy(&v, &bits, 4);
      m(r, c) = v;
    }
  }
  return m;
}

void check_magic(std::istream& in, const char* magic, const std::string& what) {
  char got[4];
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0)
    throw FormatError("bad magic in " + what);
}

}  // namespace

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

void set_num_threads(int n) { g_threads.store(n < 1 ? 1 : n); }
int num_threads() { return g_threads.load(); }

void write_psgf(std::ostream& out, const MatF& m) {
  out.write("PSGF", 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  put_f32_row_major(out, m);
}

void write_psgf(const std::string& path, const MatF& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  write_psgf(f, m);
  f.flush();
  if (!f) throw IoError("write failed: " + path);
}

MatF read_psgf(std::istream& in, const std::string& what) {
  check_magic(in, "PSGF", what);
  std::uint32_t rows = get_u32(in, what);
  std::uint32_t cols = get_u32(in, what);
  return get_f32_row_major(in, rows, cols, what);
}

MatF read_psgf(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  return read_psgf(f, path);
}

void write_eidx(const std::string& path, const IndexFile& idx) {
  if (static_cast<std::size_t>(idx.rows.rows()) != idx.ids.size())
    throw ArgumentError("index rows and id count differ");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write("EIDX", 4);
  put_u32(f, static_cast<std::uint32_t>(idx.rows.rows()));
  put_u32(f, static_cast<std::uint32_t>(idx.rows.cols()));
  put_f32_row_major(f, idx.rows);
  put_u32(f, static_cast<std::uint32_t>(idx.ids.size()));
  for (const auto& id : idx.ids) {
    put_u32(f, static_cast<std::uint32_t>(id.size()));
    f.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  put_u64(f, idx.fingerprint);
  f.flush();
  if (!f) throw IoError("write failed: " + path);
}

IndexFile read_eidx(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  check_magic(f, "EIDX", path);
  std::uint32_t n = get_u32(f, path);
  std::uint32_t dim = get_u32(f, path);
  IndexFile idx;
  idx.rows = get_f32_row_major(f, n, dim, path);
  std::uint32_t nids = get_u32(f, path);
  if (nids != n) throw FormatError("id table size mismatch in " + path);
  idx.ids.resize(nids);
  for (auto& id : idx.ids) {
    std::uint32_t len = get_u32(f, path);
    id.resize(len);
    f.read(id.data(), len);
    if (!f) throw FormatError("truncated " + path);
  }
  idx.fingerprint = get_u64(f, path);
  return idx;
}

}  // namespace stretto
