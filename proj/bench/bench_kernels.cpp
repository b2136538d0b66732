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

// Times the OpenMP kernels against their serial references on a synthetic
// batch. Usage: bench_kernels [repeats] [batch_size]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "seqlab/model.hpp"

using namespace seqlab;

namespace {

double time_ms(std::size_t repeats, const std::function<void()> &fn) {
  fn();  // warm-up
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < repeats; ++i) fn();
  const std::chrono::duration<double, std::milli> d =
      std::chrono::steady_clock::now() - start;
  return d.count() / static_cast<double>(repeats);
}

}  // namespace

int main(int argc, char **argv) {
  const std::size_t repeats = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20;
  const std::size_t batch_size = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 64;

  const Corpus corpus = make_synthetic_corpus(1, batch_size, 200);
  const auto batch = to_sequences(corpus);
  std::vector<std::vector<TokenId>> inputs;
  for (const auto &ex : batch) inputs.push_back(ex.token_ids);

  std::printf("threads %d, batch %zu, repeats %zu\n", omp_get_max_threads(),
              batch_size, repeats);
  std::printf("%-26s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms",
              "speedup");
  for (auto enc : {EncoderKind::kWindowMlp, EncoderKind::kBiRecurrent}) {
    for (auto head : {HeadKind::kCrf, HeadKind::kSoftmax}) {
      ModelConfig c;
      c.vocab_size = corpus.token_vocabulary.size();
      c.num_labels = corpus.label_vocabulary.size();
      c.encoder_kind = enc;
      c.head_kind = head;
      c.init_seed = 1;
      const ModelParameters p = init_parameters(c);
      const std::string tag = std::string(to_string(enc)) + "+" + to_string(head);

      const double gs = time_ms(repeats, [&] { compute_gradients_serial(p, c, batch); });
      const double gp = time_ms(repeats, [&] { compute_gradients(p, c, batch); });
      std::printf("%-26s %12.3f %12.3f %8.2f\n", ("grad " + tag).c_str(), gs, gp,
                  gs / gp);
      const double ds = time_ms(repeats, [&] { decode_batch_serial(p, c, inputs); });
      const double dp = time_ms(repeats, [&] { decode_batch(p, c, inputs); });
      std::printf("%-26s %12.3f %12.3f %8.2f\n", ("decode " + tag).c_str(), ds, dp,
                  ds / dp);
    }
  }
  return 0;
}
