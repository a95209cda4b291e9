// Copyright 2026 The ARHNet Desk Authors. All Rights Reserved.
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

#include "arhnet/train_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "arhnet/error.hpp"

namespace arhnet {

GeneratorConfig TrainConfig::generator() const {
  GeneratorConfig g;
  g.levels = levels;
  g.base_channels = base_channels;
  g.norm = norm_kind;
  g.mask_input = mask_input;
  g.arh.stats = stats_mode;
  return g;
}

DiscriminatorConfig TrainConfig::discriminator() const { return {d_layers, d_base_channels}; }

AdamWConfig TrainConfig::optimizer_g() const { return {lr_g, beta1, beta2, eps, weight_decay}; }

AdamWConfig TrainConfig::optimizer_d() const { return {lr_d, beta1, beta2, eps, weight_decay}; }

TrainConfig preset(std::string_view name) {
  TrainConfig c;
  if (name == "desk") return c;
  if (name == "full") {
    c.patch_size = 64;
    c.base_channels = 16;
    c.batch_size = 16;
    c.epochs = 200;
    return c;
  }
  throw PreconditionError("unknown preset '" + std::string(name) + "' (expected desk or full)");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw PreconditionError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " + expected);
}

template <typename I>
I parse_int(std::string_view key, std::string_view v) {
  I out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (used != s.size()) bad_value(key, v, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  const char* key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, std::string_view)> set;
};

#define ARHNET_STR_FIELD(name) \
  Field{#name, [](const TrainConfig& c) { return c.name; }, [](TrainConfig& c, std::string_view v) { c.name = v; }}
#define ARHNET_INT_FIELD(name)                                                    \
  Field{#name, [](const TrainConfig& c) { return std::to_string(c.name); },        \
        [](TrainConfig& c, std::string_view v) { c.name = parse_int<decltype(c.name)>(#name, v); }}
#define ARHNET_DOUBLE_FIELD(key, member)                                          \
  Field{key, [](const TrainConfig& c) { return fmt_double(c.member); },           \
        [](TrainConfig& c, std::string_view v) { c.member = parse_double(key, v); }}
#define ARHNET_BOOL_FIELD(name)                                                   \
  Field{#name, [](const TrainConfig& c) { return std::string(c.name ? "true" : "false"); }, \
        [](TrainConfig& c, std::string_view v) { c.name = parse_bool(#name, v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      ARHNET_STR_FIELD(data_dir),
      ARHNET_STR_FIELD(out_dir),
      ARHNET_STR_FIELD(probe_dir),
      ARHNET_STR_FIELD(resume),
      ARHNET_BOOL_FIELD(normalize),
      ARHNET_INT_FIELD(seed),
      ARHNET_INT_FIELD(iterations),
      ARHNET_INT_FIELD(epochs),
      ARHNET_INT_FIELD(batch_size),
      ARHNET_INT_FIELD(patch_size),
      ARHNET_DOUBLE_FIELD("lr_g", lr_g),
      ARHNET_DOUBLE_FIELD("lr_d", lr_d),
      ARHNET_DOUBLE_FIELD("beta1", beta1),
      ARHNET_DOUBLE_FIELD("beta2", beta2),
      ARHNET_DOUBLE_FIELD("eps", eps),
      ARHNET_DOUBLE_FIELD("weight_decay", weight_decay),
      ARHNET_DOUBLE_FIELD("w_rec", weights.rec),
      ARHNET_DOUBLE_FIELD("w_btv", weights.btv),
      ARHNET_DOUBLE_FIELD("w_adv", weights.adv),
      Field{"loss_reduction", [](const TrainConfig& c) { return std::string(to_string(c.loss_reduction)); },
            [](TrainConfig& c, std::string_view v) { c.loss_reduction = parse_loss_reduction(v); }},
      Field{"hinge_convention", [](const TrainConfig& c) { return std::string(to_string(c.hinge_convention)); },
            [](TrainConfig& c, std::string_view v) { c.hinge_convention = parse_hinge_convention(v); }},
      ARHNET_INT_FIELD(boundary_radius),
      Field{"norm_kind", [](const TrainConfig& c) { return std::string(to_string(c.norm_kind)); },
            [](TrainConfig& c, std::string_view v) { c.norm_kind = parse_norm_kind(v); }},
      Field{"stats_mode", [](const TrainConfig& c) { return std::string(c.stats_mode == StatsMode::kMasked ? "masked" : "literal"); },
            [](TrainConfig& c, std::string_view v) {
              if (v == "masked") {
                c.stats_mode = StatsMode::kMasked;
              } else if (v == "literal") {
                c.stats_mode = StatsMode::kLiteral;
              } else {
                bad_value("stats_mode", v, "masked or literal");
              }
            }},
      ARHNET_INT_FIELD(levels),
      ARHNET_INT_FIELD(base_channels),
      ARHNET_BOOL_FIELD(mask_input),
      ARHNET_INT_FIELD(d_layers),
      ARHNET_INT_FIELD(d_base_channels),
      ARHNET_INT_FIELD(checkpoint_every),
      ARHNET_INT_FIELD(probe_every),
  };
  return table;
}

#undef ARHNET_STR_FIELD
#undef ARHNET_INT_FIELD
#undef ARHNET_DOUBLE_FIELD
#undef ARHNET_BOOL_FIELD

}  // namespace

void set_config_value(TrainConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "preset") {
    config = preset(value);
    return;
  }
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw PreconditionError("unknown config key '" + std::string(key) + "'");
}

TrainConfig parse_train_config(std::string_view text, const TrainConfig& base) {
  TrainConfig config = base;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw PreconditionError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(config, line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

TrainConfig load_train_config(const std::filesystem::path& path, const TrainConfig& base) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_train_config(text, base);
}

std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

std::string to_text(const TrainConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

void validate(const TrainConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw PreconditionError("invalid config: " + what);
  };
  require(c.lr_g > 0 && c.lr_d > 0, "learning rates must be > 0");
  require(c.beta1 >= 0 && c.beta1 < 1 && c.beta2 >= 0 && c.beta2 < 1, "betas must lie in [0, 1)");
  require(c.eps > 0, "eps must be > 0");
  require(c.weight_decay >= 0, "weight_decay must be >= 0");
  require(c.weights.rec >= 0 && c.weights.btv >= 0 && c.weights.adv >= 0, "loss weights must be >= 0");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(c.iterations >= 0 && c.epochs >= 0, "iterations and epochs must be >= 0");
  require(c.iterations > 0 || c.epochs > 0, "one of iterations or epochs must be > 0");
  require(c.levels >= 1 && c.levels <= 8, "levels must lie in [1, 8]");
  require(c.base_channels >= 1 && c.d_base_channels >= 1 && c.d_layers >= 1, "channel counts and d_layers must be >= 1");
  require(c.patch_size >= 1 && c.patch_size % (std::int64_t{1} << (c.levels - 1)) == 0,
          "patch_size " + std::to_string(c.patch_size) + " must be divisible by 2^(levels - 1)");
  require(c.boundary_radius >= 1, "boundary_radius must be >= 1");
  require(c.checkpoint_every >= 0 && c.probe_every >= 0, "cadences must be >= 0");
}

}  // namespace arhnet
