#ifndef STRETTO_MODEL_HPP
#define STRETTO_MODEL_HPP

#include "stretto/cca.hpp"
#include "stretto/common.hpp"
#include "stretto/features.hpp"
#include "stretto/nn.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stretto {

// Table-style VGG encoder: four blocks of two 3x3 convolutions (zero
// padding 1) with batch norm and ELU, each block followed by 2x2 max
// pooling; a 1x1 convolution down to trunk_maps; and a fully connected
// layer to code_dim. Channel widths are configurable so the gradient
// checker can run a tiny double-precision copy of the same code path.
struct EncoderArch {
  Modality modality = Modality::Audio;
  std::array<int, 4> block_channels = {24, 48, 96, 96};
  int trunk_maps = 32;
  int code_dim = 32;
  // 0 = the modality's snippet geometry; explicit values let reduced test
  // models run on small windows
  int override_h = 0;
  int override_w = 0;

  int input_h() const { return override_h > 0 ? override_h : snippet_rows(modality); }
  int input_w() const { return override_w > 0 ? override_w : snippet_cols(modality); }
  // spatial size ahead of the FC layer, after four floor-halving poolings
  int pooled_h() const { return input_h() / 2 / 2 / 2 / 2; }
  int pooled_w() const { return input_w() / 2 / 2 / 2 / 2; }
  int flattened_features() const { return pooled_h() * pooled_w() * trunk_maps; }
};

inline EncoderArch tiny_encoder_arch(Modality m) {
  EncoderArch a;
  a.modality = m;
  a.block_channels = {2, 2, 2, 2};
  a.trunk_maps = 4;
  a.code_dim = 8;
  a.override_h = m == Modality::Sheet ? 32 : 28;
  a.override_w = m == Modality::Sheet ? 36 : 20;
  return a;
}

template <typename S>
class SnippetEncoder {
 public:
  static constexpr int kUnits = 9;  // eight 3x3 convs + the 1x1 trunk conv

  struct Cache {
    std::array<nn::FeatureStack<S>, kUnits> unit_in;
    std::array<typename nn::BatchNorm2d<S>::Cache, kUnits> bn;
    std::array<typename nn::MaxPool2<S>::Cache, 4> pool;
    nn::Mat<S> fc_in;   // (flattened, count)
    nn::Mat<S> codes;   // post-ELU (code_dim, count)
  };

  void configure(const std::string& name, const EncoderArch& arch);
  void init_params(Rng& rng);
  void collect(nn::ParamRefs<S>& out);
  void for_each_tensor(const std::function<void(const std::string&, nn::Mat<S>&)>& fn);

  const EncoderArch& arch() const { return arch_; }

  // raw snippets (row-major H x W each) -> single-channel feature stack
  nn::FeatureStack<S> pack(const std::vector<const MatF*>& snippets) const;

  // codes: (code_dim, count). In training mode batch-norm statistics are
  // computed over the whole stack; update_running=false leaves the running
  // estimates untouched (used by frozen encoders and the gradient checker).
  nn::Mat<S> forward(const nn::FeatureStack<S>& input, bool training,
                     Cache* cache, bool update_running = true);
  void backward(Cache& cache, const nn::Mat<S>& d_codes);

 private:
  EncoderArch arch_;
  std::array<nn::Conv2d<S>, kUnits> conv_;
  std::array<nn::BatchNorm2d<S>, kUnits> bn_;
  nn::Linear<S> fc_;
};

// Encoder + GRU summarizer + linear projection for one modality.
template <typename S>
class PassageTower {
 public:
  struct Cache {
    typename SnippetEncoder<S>::Cache enc;
    std::vector<typename nn::Gru<S>::SequenceCache> seqs;
    nn::Mat<S> codes;      // (code_dim, total snippets)
    nn::Mat<S> contexts;   // (hidden, batch)
    std::vector<int> lengths;
  };

  void configure(const std::string& name, const EncoderArch& arch, int hidden,
                 int embed_dim);
  void init_params(Rng& rng);
  void collect(nn::ParamRefs<S>& out);
  void collect_head(nn::ParamRefs<S>& out);  // GRU + projection only
  void for_each_tensor(const std::function<void(const std::string&, nn::Mat<S>&)>& fn);

  SnippetEncoder<S>& encoder() { return encoder_; }
  const EncoderArch& arch() const { return encoder_.arch(); }
  int hidden_size() const { return gru_.hidden_size(); }
  int embed_dim() const { return proj_.out_features(); }

  // packed: all valid snippets of the batch, passage order; lengths
  // delimit each passage's run. Returns embeddings (embed_dim, batch).
  nn::Mat<S> forward(const nn::FeatureStack<S>& packed,
                     const std::vector<int>& lengths, bool training,
                     Cache* cache, bool encoder_training_mode = true);
  void backward(Cache& cache, const nn::Mat<S>& d_emb);

 private:
  SnippetEncoder<S> encoder_;
  nn::Gru<S> gru_;
  nn::Linear<S> proj_;
};

struct ModelMeta {
  int embed_dim = 64;
  int hidden = 128;
  std::uint64_t seed = 0;
  std::string variant;       // rnn | rnn-ft | ... | bl-pretrain
  std::string config_hash;   // fingerprint of the materialized train config
};

// The two-tower recurrent model.
template <typename S>
struct PassageModel {
  PassageTower<S> sheet;
  PassageTower<S> audio;
  NormStats sheet_norm, audio_norm;
  HopConfig hops;
  bool encoders_frozen = false;
  std::optional<CcaProjection> cca;
  ModelMeta meta;

  void configure(const EncoderArch& sheet_arch, const EncoderArch& audio_arch,
                 int hidden, int embed_dim);
  void init_params(std::uint64_t seed);
  nn::ParamRefs<S> parameters();            // all trainable tensors
  nn::ParamRefs<S> trainable_parameters();  // honors the freeze flag
  void for_each_tensor(const std::function<void(const std::string&, nn::Mat<S>&)>& fn);

  PassageTower<S>& tower(Modality m) { return m == Modality::Sheet ? sheet : audio; }
  const NormStats& norm(Modality m) const {
    return m == Modality::Sheet ? sheet_norm : audio_norm;
  }
};

// The baseline snippet model: the two encoders alone, embedding single
// fixed-size snippets into code_dim-d space.
template <typename S>
struct SnippetModel {
  SnippetEncoder<S> sheet;
  SnippetEncoder<S> audio;
  NormStats sheet_norm, audio_norm;
  HopConfig hops;
  std::optional<CcaProjection> cca;
  ModelMeta meta;

  void configure(const EncoderArch& sheet_arch, const EncoderArch& audio_arch);
  void init_params(std::uint64_t seed);
  nn::ParamRefs<S> parameters();
  void for_each_tensor(const std::function<void(const std::string&, nn::Mat<S>&)>& fn);

  SnippetEncoder<S>& encoder(Modality m) { return m == Modality::Sheet ? sheet : audio; }
  const NormStats& norm(Modality m) const {
    return m == Modality::Sheet ? sheet_norm : audio_norm;
  }
};

using PassageModelF = PassageModel<float>;
using SnippetModelF = SnippetModel<float>;

// ---------------------------------------------------------------------------
// inference helpers (deterministic: batch norm uses running statistics)

struct EmbeddingVector {
  Eigen::VectorXf values;
  Modality modality = Modality::Audio;
  std::string passage_id;
};

// Per-snippet codes for a padded batch; padded positions carry the code of
// the zero snippet.
std::vector<MatF> encode_snippets(PassageModelF& model, const PaddedBatch& batch);

EmbeddingVector embed_passage(PassageModelF& model, const SheetPassage& p);
EmbeddingVector embed_passage(PassageModelF& model, const AudioPassage& p);

// Batched embedding: one row per sequence, input order preserved.
MatF embed_sequences(PassageModelF& model, Modality modality,
                     const std::vector<SnippetSequence>& seqs);

// Snippet-model embedding of raw (un-normalized) snippets; one row each.
MatF embed_snippets(SnippetModelF& model, Modality modality,
                    const std::vector<MatF>& snippets);

// ---------------------------------------------------------------------------
// checkpoints

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, PassageModelF& model);
void save_checkpoint(const std::string& path, SnippetModelF& model);

enum class CheckpointKind { Passage, Snippet };
CheckpointKind peek_checkpoint_kind(const std::string& path);

PassageModelF load_passage_checkpoint(const std::string& path);
SnippetModelF load_snippet_checkpoint(const std::string& path);

// CNN weights (and batch-norm buffers) from a pretrained snippet model are
// copied into a passage model; GRU and projection stay as initialized.
void transfer_encoders(const SnippetModelF& from, PassageModelF& to);

std::uint64_t checkpoint_fingerprint(const std::string& path);

}  // namespace stretto

#endif
