#ifndef STRETTO_RENDER_HPP
#define STRETTO_RENDER_HPP

#include "stretto/common.hpp"
#include "stretto/events.hpp"

#include <string>
#include <vector>

namespace stretto {

// One weakly-delimited unit of music in one modality.
struct SheetPassage {
  MatF pixels;  // 160 x W, W >= 180, values in [0,1], 1 = ink
  std::string passage_id;
  std::string piece_id;
};

struct AudioPassage {
  MatF spectrogram;  // 92 bins x T frames, T >= 20, log-magnitude in [0,1]
  std::string passage_id;
  std::string piece_id;
  double duration_seconds() const {
    return static_cast<double>(spectrogram.cols()) / kAudioFrameRate;
  }
};

// Per-event coordinates inside the rendered passages. Optional in the pair
// format; the snippet pretraining path needs it.
struct AlignmentEntry {
  int event = 0;     // index into the EventSequence
  int sheet_x = 0;   // glyph horizontal center, pixels
  int frame = 0;     // onset frame in the audio rendering
};

struct RenderConfig {
  double px_per_beat = 36.0;
  int sheet_margin = 24;
  int harmonics = 4;
  double log_gain = 20.0;

  void validate() const;
};

// Sheet rendering is invariant to tempo; width is proportional to the
// notated length in beats.
SheetPassage render_sheet(const EventSequence& ev, std::uint64_t style_seed,
                          const RenderConfig& cfg = {},
                          std::vector<AlignmentEntry>* alignment = nullptr);

// Audio rendering scales with 1/tempo_ratio; each event contributes a
// decaying harmonic stack whose per-harmonic gains depend on timbre_seed.
AudioPassage render_audio(const EventSequence& ev, double tempo_ratio,
                          std::uint64_t timbre_seed,
                          const RenderConfig& cfg = {},
                          std::vector<AlignmentEntry>* alignment = nullptr);

}  // namespace stretto

#endif
