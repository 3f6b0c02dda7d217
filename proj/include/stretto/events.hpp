#ifndef STRETTO_EVENTS_HPP
#define STRETTO_EVENTS_HPP

#include "stretto/common.hpp"

#include <cstdint>
#include <vector>

namespace stretto {

struct NoteEvent {
  double onset_beats = 0.0;     // non-negative, non-decreasing in a sequence
  int pitch = 60;               // MIDI note number in [21, 108]
  double duration_beats = 1.0;  // > 0
};

// Latent ground truth shared by both rendered modalities.
struct EventSequence {
  std::vector<NoteEvent> events;
  double tempo_bpm = 120.0;
  std::uint64_t seed = 0;

  double total_beats() const;
  // audio length, in seconds, at a given tempo ratio
  double duration_seconds(double tempo_ratio = 1.0) const;
};

struct GeneratorConfig {
  int pitch_min = 40;
  int pitch_max = 88;
  int note_count_min = 10;
  int note_count_max = 34;
  // inter-onset intervals are drawn from this menu (beats)
  std::vector<double> ioi_choices = {0.5, 1.0, 1.5, 2.0};
  std::vector<double> duration_choices = {0.5, 1.0, 2.0};
  double tempo_min_bpm = 96.0;
  double tempo_max_bpm = 144.0;
  // total length in beats is clamped to this window; with the default tempo
  // range it keeps rendered durations inside [5, 25] s and more than a
  // quarter of them past 10 s
  double beats_min = 12.5;
  double beats_max = 39.5;
  int max_pitch_step = 9;       // melodic random-walk step bound

  void validate() const;
};

// Small-profile preset: short passages for quick training runs.
GeneratorConfig small_generator_config();

EventSequence generate_event_sequence(const GeneratorConfig& config,
                                      std::uint64_t seed);

}  // namespace stretto

#endif
