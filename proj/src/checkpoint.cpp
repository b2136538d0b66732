// Copyright 2026 The Seqlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "seqlab/error.hpp"
#include "seqlab/model.hpp"

namespace seqlab {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'Q', 'L', 'A', 'B', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
// Guards against allocating from a corrupt header.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

class Writer {
 public:
  explicit Writer(std::ostream &out) : out_(out) {}

  template <typename T>
  void pod(const T &v) {
    out_.write(reinterpret_cast<const char *>(&v), sizeof(T));
  }
  void u64(std::uint64_t v) { pod(v); }
  void str(const std::string &s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void strings(const std::vector<std::string> &v) {
    u64(v.size());
    for (const auto &s : v) str(s);
  }
  void matrix(std::string_view name, const Matrix &m) {
    str(std::string(name));
    u64(m.rows());
    u64(m.cols());
    out_.write(reinterpret_cast<const char *>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)));
  }

 private:
  std::ostream &out_;
};

class Reader {
 public:
  explicit Reader(std::istream &in) : in_(in) {}

  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char *>(&v), sizeof(T));
    check();
    return v;
  }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > kMaxElements) throw CheckpointError("corrupt string length");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  std::vector<std::string> strings() {
    const std::uint64_t n = u64();
    if (n > kMaxElements) throw CheckpointError("corrupt list length");
    std::vector<std::string> v;
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(str());
    return v;
  }
  Matrix matrix(std::string_view expected_name) {
    const std::string name = str();
    if (name != expected_name) {
      throw CheckpointError("expected array '" + std::string(expected_name) +
                            "', found '" + name + "'");
    }
    const std::uint64_t rows = u64(), cols = u64();
    if (rows * cols > kMaxElements) throw CheckpointError("corrupt shape");
    Matrix m(rows, cols);
    in_.read(reinterpret_cast<char *>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
    check();
    return m;
  }

 private:
  void check() {
    if (!in_) throw CheckpointError("truncated checkpoint");
  }
  std::istream &in_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write '" + path.string() + "'");
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.pod(kVersion);

  const ModelConfig &c = ckpt.config;
  w.u64(c.vocab_size);
  w.u64(c.embedding_dim);
  w.pod(static_cast<std::uint32_t>(c.encoder_kind));
  w.u64(c.window_radius);
  w.u64(c.hidden_dim);
  w.pod(static_cast<std::uint32_t>(c.head_kind));
  w.u64(c.num_labels);
  w.pod(c.focal_gamma);
  w.u64(c.init_seed);
  w.pod(c.init_scale);

  w.strings(ckpt.label_vocabulary.entity_types());
  w.strings(ckpt.token_vocabulary.tokens());

  w.u64(kParameterArrays.size());
  for_each_array(
      [&](const ArrayInfo &info, const Matrix &m) { w.matrix(info.name, m); },
      ckpt.params);
  if (!out) throw CheckpointError("write to '" + path.string() + "' failed");
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path.string() + "'");
  Reader r(in);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("'" + path.string() + "' is not a checkpoint");
  }
  if (r.pod<std::uint32_t>() != kVersion) {
    throw CheckpointError("unsupported checkpoint version");
  }

  Checkpoint ckpt;
  ModelConfig &c = ckpt.config;
  c.vocab_size = r.u64();
  c.embedding_dim = r.u64();
  const auto encoder = r.pod<std::uint32_t>();
  c.window_radius = r.u64();
  c.hidden_dim = r.u64();
  const auto head = r.pod<std::uint32_t>();
  c.num_labels = r.u64();
  c.focal_gamma = r.pod<double>();
  c.init_seed = r.u64();
  c.init_scale = r.pod<double>();
  if (encoder > static_cast<std::uint32_t>(EncoderKind::kBiRecurrent) ||
      head > static_cast<std::uint32_t>(HeadKind::kSoftmaxFocal)) {
    throw CheckpointError("unknown encoder or head kind");
  }
  c.encoder_kind = static_cast<EncoderKind>(encoder);
  c.head_kind = static_cast<HeadKind>(head);
  try {
    c.validate();
  } catch (const ConfigError &e) {
    throw CheckpointError(std::string("invalid model config: ") + e.what());
  }

  ckpt.label_vocabulary = LabelVocabulary(r.strings());
  const auto tokens = r.strings();
  if (tokens.empty() || tokens[0] != TokenVocabulary::kUnkToken) {
    throw CheckpointError("token vocabulary lacks the unknown-token entry");
  }
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    ckpt.token_vocabulary.add(tokens[i]);
  }
  if (ckpt.token_vocabulary.size() != tokens.size()) {
    throw CheckpointError("token vocabulary has duplicate entries");
  }

  if (r.u64() != kParameterArrays.size()) {
    throw CheckpointError("unexpected parameter array count");
  }
  for_each_array(
      [&](const ArrayInfo &info, Matrix &m) { m = r.matrix(info.name); },
      ckpt.params);

  if (!same_shapes(ckpt.params, zeros_like(init_parameters(c)))) {
    throw CheckpointError("parameter shapes do not match the model config");
  }
  if (c.num_labels != ckpt.label_vocabulary.size()) {
    throw CheckpointError("label count does not match the label vocabulary");
  }
  return ckpt;
}

}  // namespace seqlab
