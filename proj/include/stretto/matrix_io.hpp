#ifndef STRETTO_MATRIX_IO_HPP
#define STRETTO_MATRIX_IO_HPP

#include "stretto/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stretto {

// Portable binary matrix container ("PSGF"): magic, u32 rows, u32 cols,
// then row-major little-endian float32. Used for sheet and spectrogram
// passage files so any language can read them bit-exactly.
void write_psgf(const std::string& path, const MatF& m);
MatF read_psgf(const std::string& path);

void write_psgf(std::ostream& out, const MatF& m);
MatF read_psgf(std::istream& in, const std::string& what);

// Embedding index container ("EIDX"): magic, u32 n, u32 dim, float32 rows,
// then an id table (u32 count, each id u32 length + bytes) and the
// producing checkpoint fingerprint (u64).
struct IndexFile {
  MatF rows;                        // (n, dim)
  std::vector<std::string> ids;     // n entries
  std::uint64_t fingerprint = 0;
};

void write_eidx(const std::string& path, const IndexFile& idx);
IndexFile read_eidx(const std::string& path);

}  // namespace stretto

#endif
