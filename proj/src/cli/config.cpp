// Copyright 2026 The vfmh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfmh/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vfmh/core/errors.hpp"

namespace vfmh::cli {
namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

class Reader {
 public:
  Reader(std::string origin, std::filesystem::path base)
      : origin_(std::move(origin)), base_(std::move(base)) {}

  [[noreturn]] void fail(const std::string& key, std::size_t line,
                         const std::string& why) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": key '" + key +
                      "': " + why);
  }

  std::size_t to_size(const std::string& key, const Entry& e) const {
    std::size_t v = 0;
    const auto& s = e.value;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(key, e.line, "expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }

  double to_double(const std::string& key, const Entry& e) const {
    double v = 0;
    const auto& s = e.value;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(key, e.line, "expected a number, got '" + s + "'");
    }
    return v;
  }

  bool to_bool(const std::string& key, const Entry& e) const {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    fail(key, e.line, "expected true or false, got '" + e.value + "'");
  }

  std::filesystem::path to_path(const Entry& e) const {
    std::filesystem::path p(e.value);
    if (p.is_relative() && !base_.empty()) return base_ / p;
    return p;
  }

  template <typename T>
  T choose(const std::string& key, const Entry& e,
           const std::map<std::string, T>& options) const {
    auto it = options.find(e.value);
    if (it == options.end()) {
      std::string names;
      for (const auto& [name, v] : options) {
        names += names.empty() ? name : ", " + name;
      }
      fail(key, e.line, "'" + e.value + "' is not one of " + names);
    }
    return it->second;
  }

 private:
  std::string origin_;
  std::filesystem::path base_;
};

const std::vector<std::string>& global_keys() {
  static const std::vector<std::string> keys = {
      "data.source",        "data.n",             "data.test_n",
      "data.classes",       "data.features",      "data.spread",
      "data.separation",    "data.seed",          "data.train_images",
      "data.train_labels",  "data.test_images",   "data.test_labels",
      "data.max_train",     "data.max_test",      "data.csv",
      "session.passive",    "training.epochs",    "training.batch_size",
      "training.seed",      "training.d_emb",     "training.evaluate",
      "secure.group",       "secure.scale_bits",  "secure.test_mode",
      "secure.masking",     "transport.kind",     "transport.host",
      "transport.port",     "transport.timeout_ms", "method",
      "output.dir",         "bound.problem",      "bound.lambda",
      "bound.steps",        "bound.seeds",        "bound.lr",
      "bound.lr_scale",     "bound.curvature",    "bound.rows",
      "bound.max_violation"};
  return keys;
}

const std::vector<std::string>& party_fields() {
  static const std::vector<std::string> fields = {
      "arch", "layers", "optimizer", "lr", "momentum", "beta1", "beta2",
      "epsilon", "seed"};
  return fields;
}

void apply_party_field(const Reader& rd, PartySettings& p,
                       const std::string& key, const std::string& field,
                       const Entry& e) {
  if (field == "arch") {
    p.arch = rd.choose<Architecture>(key, e,
                                     {{"mlp3", Architecture::kMlp3},
                                      {"cnn2", Architecture::kCnn2},
                                      {"lenet", Architecture::kLenet},
                                      {"custom", Architecture::kCustom}});
  } else if (field == "layers") {
    p.layers = e.value;
  } else if (field == "optimizer") {
    p.optimizer.kind = rd.choose<optim::Kind>(
        key, e,
        {{"sgd", optim::Kind::kSgd},
         {"momentum", optim::Kind::kMomentum},
         {"adagrad", optim::Kind::kAdagrad},
         {"adam", optim::Kind::kAdam}});
  } else if (field == "lr") {
    p.optimizer.learning_rate = rd.to_double(key, e);
  } else if (field == "momentum") {
    p.optimizer.momentum = rd.to_double(key, e);
  } else if (field == "beta1") {
    p.optimizer.beta1 = rd.to_double(key, e);
  } else if (field == "beta2") {
    p.optimizer.beta2 = rd.to_double(key, e);
  } else if (field == "epsilon") {
    p.optimizer.adam_epsilon = rd.to_double(key, e);
    p.optimizer.adagrad_epsilon = rd.to_double(key, e);
  } else if (field == "seed") {
    p.init_seed = rd.to_size(key, e);
  }
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kVfedmh:
      return "vfedmh";
    case Method::kLocal:
      return "local";
    case Method::kAggVfl:
      return "aggvfl";
  }
  return "?";
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out = global_keys();
  for (const auto& f : party_fields()) out.push_back("party.<k|default>." + f);
  return out;
}

ExperimentConfig parse_config(std::string_view text, std::string_view origin,
                              const std::filesystem::path& base_dir) {
  const Reader rd(std::string(origin), base_dir);
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got '" + std::string(line) +
                        "'");
    }
    const std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": empty key");
    }
    if (!entries.emplace(key, Entry{value, line_no}).second) {
      rd.fail(key, line_no,
              "duplicate (first set on line " +
                  std::to_string(entries[key].line) + ")");
    }
  }

  ExperimentConfig cfg;
  if (auto it = entries.find("session.passive"); it != entries.end()) {
    cfg.num_passive = rd.to_size(it->first, it->second);
    if (cfg.num_passive < 1) {
      rd.fail(it->first, it->second.line, "need at least one passive party");
    }
    if (cfg.num_passive > 64) {
      rd.fail(it->first, it->second.line, "at most 64 passive parties");
    }
  }

  // Party keys: defaults first, then per-party overrides.
  PartySettings defaults;
  std::map<std::size_t, std::vector<std::pair<std::string, const Entry*>>>
      per_party;
  for (const auto& [key, e] : entries) {
    if (key.rfind("party.", 0) != 0) continue;
    const auto dot = key.find('.', 6);
    if (dot == std::string::npos) rd.fail(key, e.line, "unknown key");
    const std::string who = key.substr(6, dot - 6);
    const std::string field = key.substr(dot + 1);
    if (std::find(party_fields().begin(), party_fields().end(), field) ==
        party_fields().end()) {
      rd.fail(key, e.line, "unknown party field '" + field + "'");
    }
    if (who == "default") {
      apply_party_field(rd, defaults, key, field, e);
      continue;
    }
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(who.data(), who.data() + who.size(), k);
    if (ec != std::errc() || ptr != who.data() + who.size()) {
      rd.fail(key, e.line, "party index must be a number or 'default'");
    }
    if (k > cfg.num_passive) {
      rd.fail(key, e.line,
              "party " + std::to_string(k) + " does not exist with " +
                  std::to_string(cfg.num_passive) + " passive parties");
    }
    per_party[k].emplace_back(key, &e);
  }
  cfg.parties.assign(cfg.num_passive + 1, defaults);
  for (const auto& [k, items] : per_party) {
    for (const auto& [key, e] : items) {
      apply_party_field(rd, cfg.parties[k], key, key.substr(key.find('.', 6) + 1),
                        *e);
    }
  }

  using Setter = std::function<void(const std::string&, const Entry&)>;
  const std::map<std::string, Setter> setters = {
      {"data.source",
       [&](const auto& k, const auto& e) {
         cfg.source = rd.choose<DataSource>(k, e,
                                            {{"blobs", DataSource::kBlobs},
                                             {"idx", DataSource::kIdx},
                                             {"csv", DataSource::kCsv}});
       }},
      {"data.n", [&](const auto& k, const auto& e) { cfg.blob_n = rd.to_size(k, e); }},
      {"data.test_n", [&](const auto& k, const auto& e) { cfg.test_n = rd.to_size(k, e); }},
      {"data.classes", [&](const auto& k, const auto& e) { cfg.classes = rd.to_size(k, e); }},
      {"data.features", [&](const auto& k, const auto& e) { cfg.features = rd.to_size(k, e); }},
      {"data.spread", [&](const auto& k, const auto& e) { cfg.spread = rd.to_double(k, e); }},
      {"data.separation", [&](const auto& k, const auto& e) { cfg.separation = rd.to_double(k, e); }},
      {"data.seed", [&](const auto& k, const auto& e) { cfg.data_seed = rd.to_size(k, e); }},
      {"data.train_images", [&](const auto&, const auto& e) { cfg.train_images = rd.to_path(e); }},
      {"data.train_labels", [&](const auto&, const auto& e) { cfg.train_labels = rd.to_path(e); }},
      {"data.test_images", [&](const auto&, const auto& e) { cfg.test_images = rd.to_path(e); }},
      {"data.test_labels", [&](const auto&, const auto& e) { cfg.test_labels = rd.to_path(e); }},
      {"data.max_train", [&](const auto& k, const auto& e) { cfg.max_train = rd.to_size(k, e); }},
      {"data.max_test", [&](const auto& k, const auto& e) { cfg.max_test = rd.to_size(k, e); }},
      {"data.csv", [&](const auto&, const auto& e) { cfg.csv = rd.to_path(e); }},
      {"session.passive", [](const auto&, const auto&) {}},
      {"training.epochs", [&](const auto& k, const auto& e) { cfg.epochs = rd.to_size(k, e); }},
      {"training.batch_size",
       [&](const auto& k, const auto& e) {
         cfg.batch_size = rd.to_size(k, e);
         if (cfg.batch_size == 0) rd.fail(k, e.line, "must be at least 1");
       }},
      {"training.seed", [&](const auto& k, const auto& e) { cfg.seed = rd.to_size(k, e); }},
      {"training.d_emb",
       [&](const auto& k, const auto& e) {
         cfg.embedding_dim = rd.to_size(k, e);
         if (cfg.embedding_dim == 0) rd.fail(k, e.line, "must be positive");
       }},
      {"training.evaluate", [&](const auto& k, const auto& e) { cfg.evaluate = rd.to_bool(k, e); }},
      {"secure.group",
       [&](const auto& k, const auto& e) {
         cfg.group = rd.choose<std::string>(
             k, e, {{"p256", "p256"}, {"modp2048", "modp2048"}, {"test23", "test23"}});
       }},
      {"secure.scale_bits",
       [&](const auto& k, const auto& e) {
         const std::size_t v = rd.to_size(k, e);
         if (v < 1 || v > 40) rd.fail(k, e.line, "must lie in [1, 40]");
         cfg.scale_bits = static_cast<int>(v);
       }},
      {"secure.test_mode", [&](const auto& k, const auto& e) { cfg.test_mode = rd.to_bool(k, e); }},
      {"secure.masking", [&](const auto& k, const auto& e) { cfg.masking = rd.to_bool(k, e); }},
      {"transport.kind",
       [&](const auto& k, const auto& e) {
         cfg.transport = rd.choose<TransportKind>(
             k, e, {{"inmem", TransportKind::kInMemory}, {"tcp", TransportKind::kTcp}});
       }},
      {"transport.host", [&](const auto&, const auto& e) { cfg.host = e.value; }},
      {"transport.port",
       [&](const auto& k, const auto& e) {
         const std::size_t v = rd.to_size(k, e);
         if (v > 65535) rd.fail(k, e.line, "port out of range");
         cfg.port = static_cast<std::uint16_t>(v);
       }},
      {"transport.timeout_ms",
       [&](const auto& k, const auto& e) {
         cfg.timeout_ms = rd.to_size(k, e);
         if (cfg.timeout_ms == 0) rd.fail(k, e.line, "must be positive");
       }},
      {"method",
       [&](const auto& k, const auto& e) {
         cfg.method = rd.choose<Method>(k, e,
                                        {{"vfedmh", Method::kVfedmh},
                                         {"local", Method::kLocal},
                                         {"aggvfl", Method::kAggVfl}});
       }},
      {"output.dir", [&](const auto&, const auto& e) { cfg.output_dir = e.value; }},
      {"bound.problem",
       [&](const auto& k, const auto& e) {
         cfg.bound_problem = rd.choose<BoundProblem>(
             k, e, {{"logistic", BoundProblem::kLogistic},
                    {"quadratic", BoundProblem::kQuadratic}});
       }},
      {"bound.lambda",
       [&](const auto& k, const auto& e) {
         cfg.bound_lambda = rd.to_double(k, e);
         if (cfg.bound_lambda < 0) rd.fail(k, e.line, "must be non-negative");
       }},
      {"bound.steps", [&](const auto& k, const auto& e) { cfg.bound_steps = rd.to_size(k, e); }},
      {"bound.seeds",
       [&](const auto& k, const auto& e) {
         cfg.bound_seeds = rd.to_size(k, e);
         if (cfg.bound_seeds == 0) rd.fail(k, e.line, "must be positive");
       }},
      {"bound.lr",
       [&](const auto& k, const auto& e) {
         cfg.bound_lr = rd.to_double(k, e);
         if (!(*cfg.bound_lr > 0)) rd.fail(k, e.line, "must be positive");
       }},
      {"bound.lr_scale",
       [&](const auto& k, const auto& e) {
         cfg.bound_lr_scale = rd.to_double(k, e);
         if (!(cfg.bound_lr_scale > 0)) rd.fail(k, e.line, "must be positive");
       }},
      {"bound.curvature",
       [&](const auto& k, const auto& e) {
         cfg.bound_curvature.clear();
         std::string_view rest = e.value;
         while (true) {
           const auto comma = rest.find(',');
           Entry part{std::string(trim(rest.substr(0, comma))), e.line};
           const double a = rd.to_double(k, part);
           if (!(a > 0)) rd.fail(k, e.line, "curvatures must be positive");
           cfg.bound_curvature.push_back(a);
           if (comma == std::string_view::npos) break;
           rest.remove_prefix(comma + 1);
         }
       }},
      {"bound.rows",
       [&](const auto& k, const auto& e) {
         cfg.bound_rows = rd.to_size(k, e);
         if (cfg.bound_rows == 0) rd.fail(k, e.line, "must be positive");
       }},
      {"bound.max_violation",
       [&](const auto& k, const auto& e) {
         cfg.bound_max_violation = rd.to_double(k, e);
       }},
  };
  for (const auto& [key, e] : entries) {
    if (key.rfind("party.", 0) == 0) continue;
    auto it = setters.find(key);
    if (it == setters.end()) rd.fail(key, e.line, "unknown key");
    it->second(key, e);
  }

  for (std::size_t k = 0; k < cfg.parties.size(); ++k) {
    const auto& p = cfg.parties[k];
    if (p.arch == Architecture::kCustom && p.layers.empty()) {
      throw ConfigError(std::string(origin) + ": party " + std::to_string(k) +
                        " uses arch 'custom' without 'layers'");
    }
    try {
      p.optimizer.validate();
    } catch (const Error& err) {
      throw ConfigError(std::string(origin) + ": party " + std::to_string(k) +
                        ": " + err.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), path.parent_path());
}

}  // namespace vfmh::cli
