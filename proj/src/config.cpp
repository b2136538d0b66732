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

#include "seqlab/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

#include "seqlab/error.hpp"

namespace seqlab {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string qualified(const std::string &section, const std::string &key) {
  return section + "." + key;
}

double to_double(const std::string &name, const std::string &v) {
  errno = 0;
  char *end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(name + ": '" + v + "' is not a number");
  }
  return d;
}

std::uint64_t to_u64(const std::string &name, const std::string &v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(name + ": '" + v + "' is not a nonnegative integer");
  }
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError(name + ": '" + v + "' is too large");
  return x;
}

bool to_bool(const std::string &name, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(name + ": '" + v + "' is not a boolean");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::filesystem::path resolve(const std::filesystem::path &base,
                              const std::string &v) {
  std::filesystem::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

using Handler = std::function<void(const std::string &name, const std::string &)>;

// Applies every entry through its handler; unknown keys are errors.
void apply_schema(const IniSections &ini,
                  const std::map<std::string, std::map<std::string, Handler>> &schema) {
  for (const auto &[section, entries] : ini) {
    auto s = schema.find(section);
    if (s == schema.end()) {
      throw ConfigError("unknown section [" + section + "]");
    }
    for (const auto &[key, value] : entries) {
      auto h = s->second.find(key);
      if (h == s->second.end()) {
        throw ConfigError("unknown key '" + qualified(section, key) + "'");
      }
      h->second(qualified(section, key), value);
    }
  }
}

std::map<std::string, std::map<std::string, Handler>> run_config_schema(
    RunConfig &c, const std::filesystem::path &base) {
  auto size = [](std::size_t &dst) {
    return [&dst](const std::string &n, const std::string &v) { dst = to_u64(n, v); };
  };
  auto real = [](double &dst) {
    return [&dst](const std::string &n, const std::string &v) {
      dst = to_double(n, v);
    };
  };
  return {
      {"data",
       {
           {"train", [&, base](const std::string &, const std::string &v) {
              c.train_path = resolve(base, v);
            }},
           {"dev", [&, base](const std::string &, const std::string &v) {
              c.dev_path = resolve(base, v);
            }},
           {"test", [&, base](const std::string &, const std::string &v) {
              c.test_path = resolve(base, v);
            }},
           {"entity_types", [&](const std::string &n, const std::string &v) {
              c.entity_types = split_list(v);
              if (c.entity_types.empty()) throw ConfigError(n + " is empty");
            }},
       }},
      {"model",
       {
           {"embedding_dim", size(c.model.embedding_dim)},
           {"encoder_kind", [&](const std::string &n, const std::string &v) {
              auto k = parse_encoder_kind(v);
              if (!k) throw ConfigError(n + ": unknown encoder '" + v + "'");
              c.model.encoder_kind = *k;
            }},
           {"window_radius", size(c.model.window_radius)},
           {"hidden_dim", size(c.model.hidden_dim)},
           {"head_kind", [&](const std::string &n, const std::string &v) {
              auto k = parse_head_kind(v);
              if (!k) throw ConfigError(n + ": unknown head '" + v + "'");
              c.model.head_kind = *k;
            }},
           {"focal_gamma", real(c.model.focal_gamma)},
           {"init_scale", real(c.model.init_scale)},
       }},
      {"optimizer",
       {
           {"base_lr", real(c.optimizer.base_lr)},
           {"crf_lr_multiplier", real(c.optimizer.crf_lr_multiplier)},
           {"warmup_ratio", real(c.optimizer.warmup_ratio)},
           {"batch_size", size(c.optimizer.batch_size)},
           {"max_seq_len", size(c.optimizer.max_seq_len)},
           {"epochs", size(c.optimizer.epochs)},
           {"adam_beta1", real(c.optimizer.adam_beta1)},
           {"adam_beta2", real(c.optimizer.adam_beta2)},
           {"adam_epsilon", real(c.optimizer.adam_epsilon)},
           {"grad_clip_norm", [&](const std::string &n, const std::string &v) {
              if (v == "none") {
                c.optimizer.grad_clip_norm.reset();
              } else {
                c.optimizer.grad_clip_norm = to_double(n, v);
              }
            }},
       }},
      {"fgm",
       {
           {"enabled", [&](const std::string &n, const std::string &v) {
              c.fgm.enabled = to_bool(n, v);
            }},
           {"epsilon", real(c.fgm.epsilon)},
       }},
      {"run",
       {
           {"seeds", [&](const std::string &n, const std::string &v) {
              c.seeds.clear();
              for (const auto &s : split_list(v)) c.seeds.push_back(to_u64(n, s));
              if (c.seeds.empty()) throw ConfigError(n + " is empty");
            }},
           {"output_dir", [&, base](const std::string &, const std::string &v) {
              c.output_dir = resolve(base, v);
            }},
       }},
  };
}

void validate(const RunConfig &c) {
  if (c.train_path.empty()) throw ConfigError("data.train is required");
  if (c.dev_path.empty()) throw ConfigError("data.dev is required");
  LabelVocabulary check(c.entity_types);  // throws on bad type names
  std::set<std::uint64_t> seen;
  for (auto s : c.seeds) {
    if (!seen.insert(s).second) {
      throw ConfigError("run.seeds: duplicate seed " + std::to_string(s));
    }
  }
  ModelConfig m = c.model;
  m.vocab_size = 1;
  m.num_labels = 1;
  m.validate();
  c.optimizer.validate();
  c.fgm.validate();
}

}  // namespace

IniSections parse_ini(std::istream &in) {
  IniSections out;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError(lineno, "malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    if (section.empty()) throw ParseError(lineno, "entry before any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (!out[section].emplace(key, value).second) {
      throw ParseError(lineno, "duplicate key '" + qualified(section, key) + "'");
    }
  }
  return out;
}

RunConfig parse_run_config(std::istream &in, const std::filesystem::path &base_dir) {
  const IniSections ini = parse_ini(in);
  RunConfig c;
  apply_schema(ini, run_config_schema(c, base_dir));
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_run_config(in, path.parent_path());
}

RunConfig load_model_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  const IniSections ini = parse_ini(in);
  RunConfig c;
  apply_schema(ini, run_config_schema(c, path.parent_path()));
  LabelVocabulary check(c.entity_types);
  ModelConfig m = c.model;
  m.vocab_size = 1;
  m.num_labels = 1;
  m.validate();
  return c;
}

std::string format_run_config(const RunConfig &c) {
  std::string seeds, types;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    seeds += (i ? "," : "") + std::to_string(c.seeds[i]);
  }
  for (std::size_t i = 0; i < c.entity_types.size(); ++i) {
    types += (i ? "," : "") + c.entity_types[i];
  }
  std::ostringstream o;
  o << "[data]\n"
    << "train = " << c.train_path.string() << "\n"
    << "dev = " << c.dev_path.string() << "\n";
  if (c.test_path) o << "test = " << c.test_path->string() << "\n";
  o << "entity_types = " << types << "\n\n"
    << "[model]\n"
    << "embedding_dim = " << c.model.embedding_dim << "\n"
    << "encoder_kind = " << to_string(c.model.encoder_kind) << "\n"
    << "window_radius = " << c.model.window_radius << "\n"
    << "hidden_dim = " << c.model.hidden_dim << "\n"
    << "head_kind = " << to_string(c.model.head_kind) << "\n"
    << "focal_gamma = " << fmt_double(c.model.focal_gamma) << "\n"
    << "init_scale = " << fmt_double(c.model.init_scale) << "\n\n"
    << "[optimizer]\n"
    << "base_lr = " << fmt_double(c.optimizer.base_lr) << "\n"
    << "crf_lr_multiplier = " << fmt_double(c.optimizer.crf_lr_multiplier) << "\n"
    << "warmup_ratio = " << fmt_double(c.optimizer.warmup_ratio) << "\n"
    << "batch_size = " << c.optimizer.batch_size << "\n"
    << "max_seq_len = " << c.optimizer.max_seq_len << "\n"
    << "epochs = " << c.optimizer.epochs << "\n"
    << "adam_beta1 = " << fmt_double(c.optimizer.adam_beta1) << "\n"
    << "adam_beta2 = " << fmt_double(c.optimizer.adam_beta2) << "\n"
    << "adam_epsilon = " << fmt_double(c.optimizer.adam_epsilon) << "\n"
    << "grad_clip_norm = "
    << (c.optimizer.grad_clip_norm ? fmt_double(*c.optimizer.grad_clip_norm)
                                   : std::string("none"))
    << "\n\n"
    << "[fgm]\n"
    << "enabled = " << (c.fgm.enabled ? "true" : "false") << "\n"
    << "epsilon = " << fmt_double(c.fgm.epsilon) << "\n\n"
    << "[run]\n"
    << "seeds = " << seeds << "\n"
    << "output_dir = " << c.output_dir.string() << "\n";
  return o.str();
}

std::string format_manifest(const RunManifest &m) {
  std::ostringstream o;
  o << format_run_config(m.config) << "\n"
    << "[manifest]\n"
    << "seed = " << m.seed << "\n"
    << "checkpoint = " << m.checkpoint.string() << "\n\n"
    << "[metrics]\n"
    << "dev_micro_f1 = " << fmt_double(m.dev_micro_f1) << "\n"
    << "dev_macro_f1 = " << fmt_double(m.dev_macro_f1) << "\n"
    << "train_micro_f1 = " << fmt_double(m.train_micro_f1) << "\n"
    << "final_train_loss = " << fmt_double(m.final_train_loss) << "\n";
  return o.str();
}

void save_manifest(const std::filesystem::path &path, const RunManifest &m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << format_manifest(m);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

RunManifest load_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest '" + path.string() + "'");
  const IniSections ini = parse_ini(in);
  const auto base = path.parent_path();
  RunManifest m;
  auto schema = run_config_schema(m.config, {});
  bool have_checkpoint = false;
  schema["manifest"] = {
      {"seed", [&](const std::string &n, const std::string &v) {
         m.seed = to_u64(n, v);
       }},
      {"checkpoint", [&](const std::string &, const std::string &v) {
         m.checkpoint = resolve(base, v);
         have_checkpoint = true;
       }},
  };
  auto real = [](double &dst) {
    return Handler([&dst](const std::string &n, const std::string &v) {
      dst = to_double(n, v);
    });
  };
  schema["metrics"] = {
      {"dev_micro_f1", real(m.dev_micro_f1)},
      {"dev_macro_f1", real(m.dev_macro_f1)},
      {"train_micro_f1", real(m.train_micro_f1)},
      {"final_train_loss", real(m.final_train_loss)},
  };
  apply_schema(ini, schema);
  if (!have_checkpoint) {
    throw ConfigError("manifest '" + path.string() + "' names no checkpoint");
  }
  return m;
}

}  // namespace seqlab
