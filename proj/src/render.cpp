#include "stretto/render.hpp"

#include "stretto/rng.hpp"

#include <algorithm>
#include <cmath>

namespace stretto {

namespace {

constexpr int kPitchLow = 21;
constexpr int kPitchHigh = 108;

// vertical placement: affine in pitch, 8 px of headroom top and bottom
double pitch_to_row(int pitch) {
  return 8.0 + (kPitchHigh - pitch) * 144.0 / (kPitchHigh - kPitchLow);
}

void splat_blob(MatF& img, double cx, double cy, double rx, double ry,
                double intensity) {
  int x0 = std::max(0, static_cast<int>(std::floor(cx - 3 * rx)));
  int x1 = std::min(static_cast<int>(img.cols()) - 1,
                    static_cast<int>(std::ceil(cx + 3 * rx)));
  int y0 = std::max(0, static_cast<int>(std::floor(cy - 3 * ry)));
  int y1 = std::min(static_cast<int>(img.rows()) - 1,
                    static_cast<int>(std::ceil(cy + 3 * ry)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double dx = (x - cx) / rx;
      double dy = (y - cy) / ry;
      double v = intensity * std::exp(-1.8 * (dx * dx + dy * dy));
      float& px = img(y, x);
      px = std::min(1.0f, px + static_cast<float>(v));
    }
  }
}

void draw_stem(MatF& img, double cx, double cy, double len, bool up,
               double intensity) {
  double x = cx + (up ? 3.0 : -3.0);
  double ytop = up ? cy - len : cy;
  double ybot = up ? cy : cy + len;
  int y0 = std::max(0, static_cast<int>(std::floor(ytop)));
  int y1 = std::min(static_cast<int>(img.rows()) - 1,
                    static_cast<int>(std::ceil(ybot)));
  int x0 = std::max(0, static_cast<int>(std::floor(x - 1.5)));
  int x1 = std::min(static_cast<int>(img.cols()) - 1,
                    static_cast<int>(std::ceil(x + 1.5)));
  for (int yy = y0; yy <= y1; ++yy) {
    for (int xx = x0; xx <= x1; ++xx) {
      double dx = xx - x;
      double v = intensity * std::exp(-2.0 * dx * dx);
      float& px = img(yy, xx);
      px = std::min(1.0f, px + static_cast<float>(v));
    }
  }
}

}  // namespace

void RenderConfig::validate() const {
  if (px_per_beat <= 0.0) throw ConfigError("px_per_beat must be positive");
  if (sheet_margin < 0) throw ConfigError("sheet margin must be >= 0");
  if (harmonics < 3) throw ConfigError("need at least 3 harmonics");
  if (log_gain <= 0.0) throw ConfigError("log gain must be positive");
}

SheetPassage render_sheet(const EventSequence& ev, std::uint64_t style_seed,
                          const RenderConfig& cfg,
                          std::vector<AlignmentEntry>* alignment) {
  cfg.validate();
  if (ev.events.empty()) throw ArgumentError("event sequence is empty");

  int width = std::max(
      kSheetSnippetWidth,
      static_cast<int>(std::lround(ev.total_beats() * cfg.px_per_beat)) +
          2 * cfg.sheet_margin);

  SheetPassage p;
  p.pixels = MatF::Zero(kSheetHeight, width);

  // staff lines, faint and constant across passages
  for (int line = 0; line < 5; ++line) {
    int y = 64 + 8 * line;
    for (int x = 0; x < width; ++x)
      p.pixels(y, x) = std::max(p.pixels(y, x), 0.22f);
  }

  Rng style(style_seed, "sheet-style");
  double size_jitter = style.uniform(0.9, 1.1);
  double ink = style.uniform(0.85, 1.0);

  if (alignment) alignment->clear();
  for (std::size_t i = 0; i < ev.events.size(); ++i) {
    const NoteEvent& e = ev.events[i];
    double cx = cfg.sheet_margin + e.onset_beats * cfg.px_per_beat;
    double cy = pitch_to_row(e.pitch);
    double rx = 3.6 * size_jitter;
    double ry = 2.6 * size_jitter;
    splat_blob(p.pixels, cx, cy, rx, ry, ink);
    bool stem_up = e.pitch < 64;
    draw_stem(p.pixels, cx, cy, 20.0 + 6.0 * e.duration_beats, stem_up,
              0.8 * ink);
    if (alignment)
      alignment->push_back(
          {static_cast<int>(i), static_cast<int>(std::lround(cx)), 0});
  }
  return p;
}

AudioPassage render_audio(const EventSequence& ev, double tempo_ratio,
                          std::uint64_t timbre_seed, const RenderConfig& cfg,
                          std::vector<AlignmentEntry>* alignment) {
  cfg.validate();
  if (tempo_ratio <= 0.0) throw ArgumentError("tempo_ratio must be positive");
  if (ev.events.empty()) throw ArgumentError("event sequence is empty");

  double sec_per_beat = 60.0 / (ev.tempo_bpm * tempo_ratio);
  int frames = std::max(
      kAudioSnippetFrames,
      static_cast<int>(std::lround(kAudioFrameRate * ev.total_beats() * sec_per_beat)));

  Eigen::MatrixXd energy = Eigen::MatrixXd::Zero(kAudioBins, frames);

  // per-harmonic gains are the soundfont analogue: strictly positive so the
  // onset-frame support does not depend on the timbre seed
  Rng timbre(timbre_seed, "timbre");
  std::vector<double> harmonic_gain(static_cast<std::size_t>(cfg.harmonics));
  for (auto& g : harmonic_gain) g = std::exp(timbre.uniform(-0.55, 0.55));

  // log-frequency axis: one bin per semitone, harmonic h sits 12*log2(h)
  // bins above the fundamental
  static const int kHarmonicOffset[] = {0, 12, 19, 24, 28, 31};

  if (alignment) alignment->clear();
  for (std::size_t i = 0; i < ev.events.size(); ++i) {
    const NoteEvent& e = ev.events[i];
    int onset = std::min(
        frames - 1,
        static_cast<int>(std::lround(kAudioFrameRate * e.onset_beats * sec_per_beat)));
    int note_frames = std::max(
        1, static_cast<int>(std::lround(kAudioFrameRate * e.duration_beats * sec_per_beat)));
    int b0 = e.pitch - kPitchLow;
    for (int h = 0; h < cfg.harmonics && h < 6; ++h) {
      int bin = b0 + kHarmonicOffset[h];
      if (bin >= kAudioBins) break;
      double amp = harmonic_gain[static_cast<std::size_t>(h)] / (h + 1.0);
      for (int t = 0; t < note_frames && onset + t < frames; ++t) {
        double env = amp * std::exp(-2.5 * t / note_frames);
        energy(bin, onset + t) += env;
        if (bin > 0) energy(bin - 1, onset + t) += 0.35 * env;
        if (bin + 1 < kAudioBins) energy(bin + 1, onset + t) += 0.35 * env;
      }
    }
    if (alignment) alignment->push_back({static_cast<int>(i), 0, onset});
  }

  // log-magnitude compression, then per-passage min-max so silence sits at 0
  Eigen::MatrixXd logmag =
      (energy.array() * cfg.log_gain + 1.0).log().matrix();
  double lo = logmag.minCoeff();
  double hi = logmag.maxCoeff();
  double span = hi - lo;
  if (span <= 0.0) span = 1.0;

  AudioPassage a;
  a.spectrogram =
      ((logmag.array() - lo) / span).cast<float>().matrix();
  return a;
}

}  // namespace stretto
