#ifndef STRETTO_COMMON_HPP
#define STRETTO_COMMON_HPP

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stretto {

// Row-major float matrix: the layout of every on-disk matrix and of all
// passage data (sheet pixels, spectrograms, snippets).
using MatF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Snippet geometry. Sheet snippets are 160x180 pixels, audio snippets are
// 92 frequency bins by 20 frames (one second at 20 fps).
inline constexpr int kSheetHeight = 160;
inline constexpr int kSheetSnippetWidth = 180;
inline constexpr int kAudioBins = 92;
inline constexpr int kAudioSnippetFrames = 20;
inline constexpr int kAudioFrameRate = 20;

enum class Modality { Sheet, Audio };

inline const char* to_string(Modality m) {
  return m == Modality::Sheet ? "sheet" : "audio";
}

inline int snippet_rows(Modality m) {
  return m == Modality::Sheet ? kSheetHeight : kAudioBins;
}

inline int snippet_cols(Modality m) {
  return m == Modality::Sheet ? kSheetSnippetWidth : kAudioSnippetFrames;
}

// 64-bit FNV-1a, used for config/checkpoint fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

std::string hex64(std::uint64_t v);

// Number of worker threads used by the batched tower passes. 1 by default;
// every parallel region reduces in a fixed order so results do not depend
// on this setting.
void set_num_threads(int n);
int num_threads();

}  // namespace stretto

#endif
