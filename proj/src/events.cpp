#include "stretto/events.hpp"

#include "stretto/rng.hpp"

#include <algorithm>
#include <cmath>

namespace stretto {

double EventSequence::total_beats() const {
  double end = 0.0;
  for (const auto& e : events)
    end = std::max(end, e.onset_beats + e.duration_beats);
  return end;
}

double EventSequence::duration_seconds(double tempo_ratio) const {
  return total_beats() * 60.0 / (tempo_bpm * tempo_ratio);
}

void GeneratorConfig::validate() const {
  if (pitch_min < 21 || pitch_max > 108 || pitch_min > pitch_max)
    throw ConfigError("generator pitch range must lie inside [21, 108]");
  if (note_count_min < 1 || note_count_min > note_count_max)
    throw ConfigError("generator note-count range invalid");
  if (ioi_choices.empty() || duration_choices.empty())
    throw ConfigError("generator beat-duration menus must be non-empty");
  for (double v : ioi_choices)
    if (v < 0.0) throw ConfigError("inter-onset intervals must be >= 0");
  for (double v : duration_choices)
    if (v <= 0.0) throw ConfigError("note durations must be positive");
  if (tempo_min_bpm <= 0.0 || tempo_min_bpm > tempo_max_bpm)
    throw ConfigError("generator tempo range invalid");
  if (beats_min <= 0.0 || beats_min > beats_max)
    throw ConfigError("generator beat-length window invalid");
}

GeneratorConfig small_generator_config() {
  GeneratorConfig c;
  c.note_count_min = 5;
  c.note_count_max = 13;
  c.beats_min = 5.0;
  c.beats_max = 14.0;
  c.tempo_min_bpm = 100.0;
  c.tempo_max_bpm = 140.0;
  c.ioi_choices = {0.5, 1.0, 1.5};
  c.duration_choices = {0.5, 1.0, 1.5};
  return c;
}

EventSequence generate_event_sequence(const GeneratorConfig& config,
                                      std::uint64_t seed) {
  config.validate();
  Rng rng(seed, "events");

  EventSequence seq;
  seq.seed = seed;
  seq.tempo_bpm = rng.uniform(config.tempo_min_bpm, config.tempo_max_bpm);

  int n = static_cast<int>(
      rng.uniform_int(config.note_count_min, config.note_count_max));
  int pitch = static_cast<int>(
      rng.uniform_int(config.pitch_min, config.pitch_max));

  double onset = 0.0;
  seq.events.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    NoteEvent e;
    e.onset_beats = onset;
    e.pitch = pitch;
    std::size_t di = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(config.duration_choices.size()) - 1));
    e.duration_beats = config.duration_choices[di];
    seq.events.push_back(e);

    std::size_t ii = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(config.ioi_choices.size()) - 1));
    onset += config.ioi_choices[ii];
    int step = static_cast<int>(
        rng.uniform_int(-config.max_pitch_step, config.max_pitch_step));
    pitch = std::clamp(pitch + step, config.pitch_min, config.pitch_max);
  }

  // rescale onsets/durations so the total length in beats lands in the
  // configured window; keeps the duration model calibrated independent of
  // the note count draw
  double target_beats = rng.uniform(config.beats_min, config.beats_max);
  double got = seq.total_beats();
  if (got > 0.0) {
    double scale = target_beats / got;
    // snap to a 1/4-beat grid so notation stays plausible
    for (auto& e : seq.events) {
      e.onset_beats = std::round(e.onset_beats * scale * 4.0) / 4.0;
      e.duration_beats =
          std::max(0.25, std::round(e.duration_beats * scale * 4.0) / 4.0);
    }
    std::stable_sort(seq.events.begin(), seq.events.end(),
                     [](const NoteEvent& a, const NoteEvent& b) {
                       return a.onset_beats < b.onset_beats;
                     });
  }
  return seq;
}

}  // namespace stretto
