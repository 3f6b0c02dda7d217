#include "stretto/model.hpp"
#include "stretto/model_impl.hpp"

#include "stretto/matrix_io.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace stretto {

using nlohmann::json;

namespace {

json arch_to_json(const EncoderArch& a) {
  return json{{"modality", to_string(a.modality)},
              {"block_channels", a.block_channels},
              {"trunk_maps", a.trunk_maps},
              {"code_dim", a.code_dim},
              {"override_h", a.override_h},
              {"override_w", a.override_w}};
}

EncoderArch arch_from_json(const json& j) {
  EncoderArch a;
  a.modality = j.at("modality").get<std::string>() == "sheet" ? Modality::Sheet
                                                              : Modality::Audio;
  auto v = j.at("block_channels").get<std::vector<int>>();
  if (v.size() != 4) throw FormatError("block_channels must have 4 entries");
  a.block_channels = {v[0], v[1], v[2], v[3]};
  a.trunk_maps = j.at("trunk_maps").get<int>();
  a.code_dim = j.at("code_dim").get<int>();
  a.override_h = j.value("override_h", 0);
  a.override_w = j.value("override_w", 0);
  return a;
}

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
  if (!in) throw FormatError("truncated checkpoint: " + what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_tensor(std::ostream& out, const std::string& name,
                  const Eigen::MatrixXf& m) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  // column-major storage order, little-endian float32
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::uint32_t bits;
      float v = m(r, c);
      std::memcpy(&bits, &v, 4);
      unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                            static_cast<unsigned char>((bits >> 8) & 0xff),
                            static_cast<unsigned char>((bits >> 16) & 0xff),
                            static_cast<unsigned char>((bits >> 24) & 0xff)};
      out.write(reinterpret_cast<const char*>(b), 4);
    }
  }
}

void read_tensor(std::istream& in, std::string& name, Eigen::MatrixXf& m,
                 const std::string& what) {
  std::uint32_t len = get_u32(in, what);
  name.resize(len);
  in.read(name.data(), len);
  std::uint32_t rows = get_u32(in, what);
  std::uint32_t cols = get_u32(in, what);
  m.resize(rows, cols);
  for (std::uint32_t c = 0; c < cols; ++c) {
    for (std::uint32_t r = 0; r < rows; ++r) {
      unsigned char b[4];
      in.read(reinterpret_cast<char*>(b), 4);
      if (!in) throw FormatError("truncated checkpoint: " + what);
      std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                           (static_cast<std::uint32_t>(b[1]) << 8) |
                           (static_cast<std::uint32_t>(b[2]) << 16) |
                           (static_cast<std::uint32_t>(b[3]) << 24);
      float v;
      std::memcpy(&v, &bits, 4);
      m(r, c) = v;
    }
  }
}

json meta_to_json(const ModelMeta& m, const char* kind) {
  return json{{"model_kind", kind},  {"embed_dim", m.embed_dim},
              {"hidden", m.hidden},  {"seed", m.seed},
              {"variant", m.variant}, {"config_hash", m.config_hash}};
}

void meta_from_json(const json& j, ModelMeta& m) {
  m.embed_dim = j.at("embed_dim").get<int>();
  m.hidden = j.at("hidden").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.variant = j.value("variant", std::string{});
  m.config_hash = j.value("config_hash", std::string{});
}

json norm_to_json(const NormStats& sheet, const NormStats& audio) {
  return json{{"sheet", {{"mean", sheet.mean}, {"std", sheet.stddev}}},
              {"audio", {{"mean", audio.mean}, {"std", audio.stddev}}}};
}

void norm_from_json(const json& j, NormStats& sheet, NormStats& audio) {
  sheet.mean = j.at("sheet").at("mean").get<float>();
  sheet.stddev = j.at("sheet").at("std").get<float>();
  audio.mean = j.at("audio").at("mean").get<float>();
  audio.stddev = j.at("audio").at("std").get<float>();
}

std::vector<std::pair<std::string, Eigen::MatrixXf>> cca_tensors(
    const CcaProjection& c) {
  return {{"cca.mean_x", c.mean_x},
          {"cca.mean_y", c.mean_y},
          {"cca.proj_x", c.proj_x},
          {"cca.proj_y", c.proj_y},
          {"cca.correlations", c.correlations}};
}

template <typename Model>
void save_impl(const std::string& path, Model& model, const char* kind,
               const json& extra) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write("STCK", 4);
  put_u32(f, kCheckpointVersion);

  json meta = extra;
  meta["meta"] = meta_to_json(model.meta, kind);
  meta["norm"] = norm_to_json(model.sheet_norm, model.audio_norm);
  meta["hops"] = {{"audio", model.hops.audio_hop}, {"sheet", model.hops.sheet_hop}};
  meta["has_cca"] = model.cca.has_value();
  std::string blob = meta.dump();
  put_u32(f, static_cast<std::uint32_t>(blob.size()));
  f.write(blob.data(), static_cast<std::streamsize>(blob.size()));

  std::vector<std::pair<std::string, const Eigen::MatrixXf*>> tensors;
  model.for_each_tensor([&](const std::string& name, Eigen::MatrixXf& m) {
    tensors.emplace_back(name, &m);
  });
  std::vector<std::pair<std::string, Eigen::MatrixXf>> cca;
  if (model.cca) cca = cca_tensors(*model.cca);

  put_u32(f, static_cast<std::uint32_t>(tensors.size() + cca.size()));
  for (auto& [name, m] : tensors) write_tensor(f, name, *m);
  for (auto& [name, m] : cca) write_tensor(f, name, m);
  f.flush();
  if (!f) throw IoError("write failed: " + path);
}

json read_header(std::istream& f, const std::string& path) {
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "STCK", 4) != 0)
    throw FormatError("not a checkpoint file: " + path);
  std::uint32_t version = get_u32(f, path);
  if (version != static_cast<std::uint32_t>(kCheckpointVersion)) {
    std::ostringstream os;
    os << "incompatible checkpoint version " << version << " (expected "
       << kCheckpointVersion << "): " << path;
    throw FormatError(os.str());
  }
  std::uint32_t len = get_u32(f, path);
  std::string blob(len, '\0');
  f.read(blob.data(), len);
  if (!f) throw FormatError("truncated checkpoint: " + path);
  return json::parse(blob);
}

template <typename Model>
void load_tensors(std::istream& f, const std::string& path, Model& model,
                  bool has_cca) {
  std::vector<std::pair<std::string, Eigen::MatrixXf*>> refs;
  model.for_each_tensor([&](const std::string& name, Eigen::MatrixXf& m) {
    refs.emplace_back(name, &m);
  });
  std::uint32_t count = get_u32(f, path);
  std::size_t expected = refs.size() + (has_cca ? 5 : 0);
  if (count != expected)
    throw FormatError("checkpoint tensor count mismatch: " + path);

  std::map<std::string, Eigen::MatrixXf> cca_read;
  std::size_t next = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name;
    Eigen::MatrixXf m;
    read_tensor(f, name, m, path);
    if (name.rfind("cca.", 0) == 0) {
      cca_read[name] = std::move(m);
      continue;
    }
    if (next >= refs.size() || refs[next].first != name)
      throw FormatError("unexpected tensor '" + name + "' in " + path);
    if (refs[next].second->rows() != m.rows() ||
        refs[next].second->cols() != m.cols())
      throw FormatError("tensor shape mismatch for '" + name + "' in " + path);
    *refs[next].second = std::move(m);
    ++next;
  }
  if (next != refs.size())
    throw FormatError("checkpoint is missing tensors: " + path);
  if (has_cca) {
    CcaProjection c;
    c.mean_x = cca_read.at("cca.mean_x");
    c.mean_y = cca_read.at("cca.mean_y");
    c.proj_x = cca_read.at("cca.proj_x");
    c.proj_y = cca_read.at("cca.proj_y");
    c.correlations = cca_read.at("cca.correlations");
    model.cca = std::move(c);
  }
}

// chunk size keeps peak activation memory bounded during inference
int embed_chunk(Modality m) { return m == Modality::Sheet ? 32 : 256; }

}  // namespace

void save_checkpoint(const std::string& path, PassageModelF& model) {
  json extra{{"sheet_arch", arch_to_json(model.sheet.arch())},
             {"audio_arch", arch_to_json(model.audio.arch())},
             {"encoders_frozen", model.encoders_frozen}};
  save_impl(path, model, "passage", extra);
}

void save_checkpoint(const std::string& path, SnippetModelF& model) {
  json extra{{"sheet_arch", arch_to_json(model.sheet.arch())},
             {"audio_arch", arch_to_json(model.audio.arch())}};
  save_impl(path, model, "snippet", extra);
}

CheckpointKind peek_checkpoint_kind(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  json meta = read_header(f, path);
  std::string kind = meta.at("meta").at("model_kind").get<std::string>();
  return kind == "passage" ? CheckpointKind::Passage : CheckpointKind::Snippet;
}

PassageModelF load_passage_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  json meta = read_header(f, path);
  if (meta.at("meta").at("model_kind").get<std::string>() != "passage")
    throw FormatError("not a passage checkpoint: " + path);

  PassageModelF model;
  model.configure(arch_from_json(meta.at("sheet_arch")),
                  arch_from_json(meta.at("audio_arch")),
                  meta.at("meta").at("hidden").get<int>(),
                  meta.at("meta").at("embed_dim").get<int>());
  meta_from_json(meta.at("meta"), model.meta);
  norm_from_json(meta.at("norm"), model.sheet_norm, model.audio_norm);
  model.hops.audio_hop = meta.at("hops").at("audio").get<int>();
  model.hops.sheet_hop = meta.at("hops").at("sheet").get<int>();
  model.encoders_frozen = meta.value("encoders_frozen", false);
  load_tensors(f, path, model, meta.value("has_cca", false));
  return model;
}

SnippetModelF load_snippet_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  json meta = read_header(f, path);
  if (meta.at("meta").at("model_kind").get<std::string>() != "snippet")
    throw FormatError("not a snippet checkpoint: " + path);

  SnippetModelF model;
  model.configure(arch_from_json(meta.at("sheet_arch")),
                  arch_from_json(meta.at("audio_arch")));
  meta_from_json(meta.at("meta"), model.meta);
  norm_from_json(meta.at("norm"), model.sheet_norm, model.audio_norm);
  model.hops.audio_hop = meta.at("hops").at("audio").get<int>();
  model.hops.sheet_hop = meta.at("hops").at("sheet").get<int>();
  load_tensors(f, path, model, meta.value("has_cca", false));
  return model;
}

void transfer_encoders(const SnippetModelF& from, PassageModelF& to) {
  std::map<std::string, const Eigen::MatrixXf*> source;
  const_cast<SnippetModelF&>(from).for_each_tensor(
      [&](const std::string& name, Eigen::MatrixXf& m) { source[name] = &m; });

  auto copy_into = [&](SnippetEncoder<float>& enc) {
    enc.for_each_tensor([&](const std::string& name, Eigen::MatrixXf& m) {
      auto it = source.find(name);
      if (it == source.end())
        throw FormatError("pretraining checkpoint lacks tensor '" + name + "'");
      if (it->second->rows() != m.rows() || it->second->cols() != m.cols())
        throw FormatError("pretrained tensor shape mismatch for '" + name + "'");
      m = *it->second;
    });
  };
  copy_into(to.sheet.encoder());
  copy_into(to.audio.encoder());
  to.sheet_norm = from.sheet_norm;
  to.audio_norm = from.audio_norm;
}

std::uint64_t checkpoint_fingerprint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[65536];
  while (f) {
    f.read(buf, sizeof(buf));
    std::streamsize got = f.gcount();
    if (got > 0) h = fnv1a64(buf, static_cast<std::size_t>(got), h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// inference

std::vector<MatF> encode_snippets(PassageModelF& model, const PaddedBatch& batch) {
  auto& tower = model.tower(batch.modality);
  const int max_len = batch.max_len();
  const int b = batch.size();

  std::vector<const MatF*> all;
  all.reserve(static_cast<std::size_t>(b * max_len));
  for (const auto& row : batch.tensor)
    for (const auto& snip : row) all.push_back(&snip);

  auto& enc = tower.encoder();
  nn::FeatureStack<float> stack = enc.pack(all);
  nn::Mat<float> codes = enc.forward(stack, /*training=*/false, nullptr);

  std::vector<MatF> out;
  out.reserve(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) {
    MatF m(max_len, enc.arch().code_dim);
    for (int t = 0; t < max_len; ++t)
      m.row(t) = codes.col(i * max_len + t).transpose();
    out.push_back(std::move(m));
  }
  return out;
}

MatF embed_sequences(PassageModelF& model, Modality modality,
                     const std::vector<SnippetSequence>& seqs) {
  auto& tower = model.tower(modality);
  MatF out(static_cast<Eigen::Index>(seqs.size()), model.meta.embed_dim);

  const int chunk = embed_chunk(modality);
  std::size_t i = 0;
  while (i < seqs.size()) {
    std::vector<const MatF*> snippets;
    std::vector<int> lengths;
    std::vector<SnippetSequence> normalized;
    std::size_t j = i;
    int total = 0;
    while (j < seqs.size()) {
      int len = seqs[j].length();
      if (!normalized.empty() && total + len > chunk) break;
      normalized.push_back(normalize_snippets(seqs[j], model.norm(modality)));
      lengths.push_back(len);
      total += len;
      ++j;
    }
    for (const auto& s : normalized)
      for (const auto& snip : s.snippets) snippets.push_back(&snip);

    nn::FeatureStack<float> stack = tower.encoder().pack(snippets);
    nn::Mat<float> embs =
        tower.forward(stack, lengths, /*training=*/false, nullptr);
    for (std::size_t k = i; k < j; ++k)
      out.row(static_cast<Eigen::Index>(k)) =
          embs.col(static_cast<Eigen::Index>(k - i)).transpose();
    i = j;
  }

  if (model.cca) {
    out = apply_cca(out, modality == Modality::Sheet ? CcaView::X : CcaView::Y,
                    *model.cca);
  }
  return out;
}

EmbeddingVector embed_passage(PassageModelF& model, const SheetPassage& p) {
  SnippetSequence seq = slice_passage(p, model.hops.sheet_hop);
  MatF e = embed_sequences(model, Modality::Sheet, {seq});
  return {e.row(0).transpose(), Modality::Sheet, p.passage_id};
}

EmbeddingVector embed_passage(PassageModelF& model, const AudioPassage& p) {
  SnippetSequence seq = slice_passage(p, model.hops.audio_hop);
  MatF e = embed_sequences(model, Modality::Audio, {seq});
  return {e.row(0).transpose(), Modality::Audio, p.passage_id};
}

MatF embed_snippets(SnippetModelF& model, Modality modality,
                    const std::vector<MatF>& snippets) {
  auto& enc = model.encoder(modality);
  const NormStats& norm = model.norm(modality);
  MatF out(static_cast<Eigen::Index>(snippets.size()), enc.arch().code_dim);

  const int chunk = embed_chunk(modality);
  std::size_t i = 0;
  while (i < snippets.size()) {
    std::size_t j = std::min(snippets.size(), i + static_cast<std::size_t>(chunk));
    std::vector<MatF> normalized;
    normalized.reserve(j - i);
    for (std::size_t k = i; k < j; ++k)
      normalized.emplace_back((snippets[k].array() - norm.mean) / norm.stddev);
    std::vector<const MatF*> ptrs;
    for (const auto& m : normalized) ptrs.push_back(&m);
    nn::FeatureStack<float> stack = enc.pack(ptrs);
    nn::Mat<float> codes = enc.forward(stack, /*training=*/false, nullptr);
    for (std::size_t k = i; k < j; ++k)
      out.row(static_cast<Eigen::Index>(k)) =
          codes.col(static_cast<Eigen::Index>(k - i)).transpose();
    i = j;
  }

  if (model.cca) {
    out = apply_cca(out, modality == Modality::Sheet ? CcaView::X : CcaView::Y,
                    *model.cca);
  }
  return out;
}

}  // namespace stretto
