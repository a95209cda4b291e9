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

#include "arhnet/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include "json.hpp"
#include <numeric>
#include <sstream>

#include "arhnet/convert.hpp"
#include "arhnet/error.hpp"
#include "arhnet/harmonize.hpp"
#include "arhnet/losses.hpp"
#include "arhnet/metrics.hpp"

namespace arhnet {

namespace fs = std::filesystem;

namespace {

// Stream tags for the shuffle and evaluation streams.
constexpr std::uint64_t kShuffleTag = 0x5348554646ULL;
constexpr std::uint64_t kEvalTag = 0x4556414cULL;
constexpr std::uint64_t kInitG = 0x47ULL;
constexpr std::uint64_t kInitD = 0x44ULL;

double grad_norm(const ParamStore& store) {
  double s = 0;
  for (const auto& e : store.entries()) {
    if (!e.tensor.has_grad()) continue;
    for (float g : e.tensor.grad()) s += static_cast<double>(g) * g;
  }
  return std::sqrt(s);
}

void set_trainable(ParamStore& store, bool on) {
  for (const auto& e : store.entries()) {
    TensorF t = e.tensor;
    t.set_requires_grad(on);
  }
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

[[noreturn]] void non_finite(const StepReport& r, const char* stage) {
  throw NumericError("non-finite loss at iteration " + std::to_string(r.iteration) + " (" + stage +
                     "): l_rec=" + fmt("%g", r.l_rec) + " l_btv=" + fmt("%g", r.l_btv) +
                     " l_adv_g=" + fmt("%g", r.l_adv_g) + " l_adv_d=" + fmt("%g", r.l_adv_d));
}

}  // namespace

Model::Model(const TrainConfig& c)
    : config(c),
      g(c.generator()),
      d(c.discriminator()),
      opt_g(g.params(), c.optimizer_g()),
      opt_d(d.params(), c.optimizer_d()) {}

void Model::init(std::uint64_t seed) {
  Rng rg = Rng::derive(seed, kInitG);
  Rng rd = Rng::derive(seed, kInitD);
  g.init(rg);
  d.init(rd);
}

StepReport train_step(Model& model, const std::vector<TrainingPair>& batch) {
  if (batch.empty()) throw PreconditionError("train_step: empty batch");
  const TrainConfig& c = model.config;
  std::vector<Volume3D> clean, perturbed;
  std::vector<Mask3D> masks, bands;
  for (const auto& p : batch) {
    clean.push_back(p.image);
    perturbed.push_back(perturb_foreground(p.image, p.mask, p.perturbation));
    masks.push_back(p.mask);
    bands.push_back(extract_boundary(p.mask, c.boundary_radius));
  }
  const TensorF target = stack_volumes(clean);
  const TensorF input = stack_volumes(perturbed);
  const TensorF mask = stack_masks(masks);
  const TensorF band = stack_masks(bands);

  StepReport r;
  r.iteration = model.iteration + 1;
  const Generator::Output out = model.g.forward(input, mask);

  // Discriminator update on the detached output.
  model.d.params().zero_grad();
  {
    const TensorF fake = model.d.forward(out.harmonized.detach(), input, mask);
    const TensorF real = model.d.forward(target, input, mask);
    const TensorF ld = loss_adv_d(fake, real, c.hinge_convention);
    r.l_adv_d = ld.item();
    if (!std::isfinite(r.l_adv_d)) non_finite(r, "discriminator");
    backward(ld);
  }
  r.grad_norm_d = grad_norm(model.d.params());
  model.opt_d.step();
  model.d.params().zero_grad();

  // Generator update against the refreshed discriminator.
  model.g.params().zero_grad();
  const TensorF rec = loss_rec(target, out.harmonized, c.loss_reduction);
  const TensorF btv = loss_btv(out.harmonized, band, c.loss_reduction);
  TensorF adv = TensorF::scalar(0.0f);
  if (c.weights.adv != 0.0) {
    set_trainable(model.d.params(), false);
    adv = loss_adv_g(model.d.forward(out.harmonized, input, mask));
    set_trainable(model.d.params(), true);
  }
  const TensorF total = loss_total(rec, btv, adv, c.weights);
  r.l_rec = rec.item();
  r.l_btv = btv.item();
  r.l_adv_g = adv.item();
  r.l_total = total.item();
  if (!std::isfinite(r.l_total)) non_finite(r, "generator");
  backward(total);
  r.grad_norm_g = grad_norm(model.g.params());
  model.opt_g.step();
  model.g.params().zero_grad();
  model.iteration += 1;
  return r;
}

std::int64_t steps_per_epoch(std::int64_t cases, const TrainConfig& config) {
  return (cases + config.batch_size - 1) / config.batch_size;
}

std::int64_t total_iterations(std::int64_t cases, const TrainConfig& config) {
  return config.iterations > 0 ? config.iterations : config.epochs * steps_per_epoch(cases, config);
}

std::vector<TrainingPair> make_batch(const std::vector<Case>& cases, const TrainConfig& config, std::int64_t it) {
  const auto n = static_cast<std::int64_t>(cases.size());
  if (n == 0) throw PreconditionError("make_batch: empty dataset");
  const std::int64_t spe = steps_per_epoch(n, config);
  const std::int64_t epoch = it / spe;
  const std::int64_t pos = it % spe;
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle = Rng::derive(config.seed, static_cast<std::uint64_t>(epoch) + 1, kShuffleTag);
  for (std::int64_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::int64_t>(shuffle.uniform_index(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }
  std::vector<TrainingPair> batch;
  const Index3 size{config.patch_size, config.patch_size, config.patch_size};
  for (std::int64_t b = pos * config.batch_size; b < std::min(n, (pos + 1) * config.batch_size); ++b) {
    const std::int64_t idx = order[b];
    const Case& c = cases[idx];
    Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(epoch) + 1, static_cast<std::uint64_t>(idx));
    Patch p = extract_patch(c.image, c.mask, size, rng);
    batch.push_back({std::move(p.volume), std::move(p.mask), sample_perturbation(rng)});
  }
  return batch;
}

Perturbation evaluation_perturbation(std::uint64_t seed, std::int64_t index) {
  Rng rng = Rng::derive(seed, kEvalTag, static_cast<std::uint64_t>(index));
  return sample_perturbation(rng);
}

double probe_fpsnr(const Generator& g, const std::vector<Case>& cases, std::uint64_t seed, std::int64_t patch_size) {
  if (cases.empty()) throw PreconditionError("probe_fpsnr: no cases");
  double sum = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const Volume3D input = perturb_foreground(c.image, c.mask, evaluation_perturbation(seed, static_cast<std::int64_t>(i)));
    const Volume3D out = harmonize_with_model(g, input, c.mask, patch_size);
    sum += psnr(c.image, out, &c.mask);
  }
  return sum / static_cast<double>(cases.size());
}

CheckpointData to_checkpoint(const Model& model) {
  nlohmann::json meta;
  meta["iteration"] = model.iteration;
  meta["opt_g_steps"] = model.opt_g.steps();
  meta["opt_d_steps"] = model.opt_d.steps();
  nlohmann::json cfg = nlohmann::json::object();
  // Run locations are not stored.
  for (const auto& [k, v] : config_entries(model.config)) {
    if (k != "out_dir" && k != "resume") cfg[k] = v;
  }
  meta["config"] = cfg;
  CheckpointData data;
  data.metadata = meta.dump();
  auto add_store = [&](const ParamStore& store, const AdamW& opt, const std::string& tag) {
    const auto& entries = store.entries();
    for (std::size_t p = 0; p < entries.size(); ++p) {
      auto v = entries[p].tensor.values();
      data.buffers.push_back({entries[p].name, std::vector<float>(v.begin(), v.end())});
    }
    for (std::size_t p = 0; p < entries.size(); ++p) {
      data.buffers.push_back({tag + ".m." + entries[p].name, opt.first_moments()[p]});
      data.buffers.push_back({tag + ".v." + entries[p].name, opt.second_moments()[p]});
    }
  };
  add_store(model.g.params(), model.opt_g, "opt_g");
  add_store(model.d.params(), model.opt_d, "opt_d");
  return data;
}

namespace {

nlohmann::json parse_meta(const CheckpointData& data) {
  try {
    return nlohmann::json::parse(data.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
}

void copy_into(std::span<float> dst, const NamedBuffer& src) {
  if (src.values.size() != dst.size()) {
    throw FormatError("checkpoint buffer '" + src.name + "' holds " + std::to_string(src.values.size()) +
                      " values, model expects " + std::to_string(dst.size()));
  }
  std::copy(src.values.begin(), src.values.end(), dst.begin());
}

}  // namespace

void restore_checkpoint(Model& model, const CheckpointData& data) {
  const nlohmann::json meta = parse_meta(data);
  auto restore_store = [&](ParamStore& store, AdamW& opt, const std::string& tag) {
    const auto& entries = store.entries();
    for (std::size_t p = 0; p < entries.size(); ++p) {
      TensorF t = entries[p].tensor;
      copy_into(t.mutable_values(), data.find(entries[p].name));
      copy_into(opt.first_moments()[p], data.find(tag + ".m." + entries[p].name));
      copy_into(opt.second_moments()[p], data.find(tag + ".v." + entries[p].name));
    }
  };
  restore_store(model.g.params(), model.opt_g, "opt_g");
  restore_store(model.d.params(), model.opt_d, "opt_d");
  try {
    model.iteration = meta.at("iteration").get<std::int64_t>();
    model.opt_g.set_steps(meta.at("opt_g_steps").get<std::int64_t>());
    model.opt_d.set_steps(meta.at("opt_d_steps").get<std::int64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
}

std::unique_ptr<Model> model_from_checkpoint(const CheckpointData& data) {
  const nlohmann::json meta = parse_meta(data);
  TrainConfig config;
  if (!meta.contains("config") || !meta["config"].is_object()) throw FormatError("checkpoint metadata lacks a config");
  for (const auto& [k, v] : meta["config"].items()) {
    if (!v.is_string()) throw FormatError("checkpoint config value for '" + k + "' is not a string");
    set_config_value(config, k, v.get<std::string>());
  }
  auto model = std::make_unique<Model>(config);
  restore_checkpoint(*model, data);
  return model;
}

namespace {

// Keeps the header and the rows up to `iteration` of an existing log.
void truncate_log(const fs::path& path, std::int64_t iteration) {
  std::ifstream in(path);
  std::string line, kept;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      kept += line + "\n";
      header = false;
      continue;
    }
    if (std::stoll(line.substr(0, line.find(','))) <= iteration) kept += line + "\n";
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  out << kept;
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::function<void(const StepReport&)>& on_step) {
  validate(config);
  if (config.data_dir.empty()) throw PreconditionError("train: data_dir is not set");
  const std::vector<Case> cases = load_dataset(config.data_dir, config.normalize);
  std::vector<Case> probe;
  if (!config.probe_dir.empty()) probe = load_dataset(config.probe_dir, config.normalize);

  TrainResult result;
  result.model = std::make_unique<Model>(config);
  Model& model = *result.model;
  model.init(config.seed);
  if (!config.resume.empty()) restore_checkpoint(model, load_checkpoint(config.resume));

  const fs::path out_dir = config.out_dir;
  const fs::path ckpt_dir = out_dir / "checkpoints";
  fs::create_directories(ckpt_dir);
  result.log_path = out_dir / "log.csv";
  if (model.iteration > 0 && fs::exists(result.log_path)) {
    truncate_log(result.log_path, model.iteration);
  } else {
    std::ofstream header(result.log_path, std::ios::trunc);
    header << kLogHeader << "\n";
  }
  std::ofstream log(result.log_path, std::ios::app);
  if (!log) throw IoError("cannot write " + result.log_path.string());

  const std::int64_t total = total_iterations(static_cast<std::int64_t>(cases.size()), config);
  for (std::int64_t it = model.iteration; it < total; ++it) {
    const StepReport r = train_step(model, make_batch(cases, config, it));
    const bool last = r.iteration == total;
    std::string probe_col;
    if (!probe.empty() && (last || (config.probe_every > 0 && r.iteration % config.probe_every == 0))) {
      probe_col = fmt("%.6f", probe_fpsnr(model.g, probe, config.seed, config.patch_size));
    }
    log << r.iteration << ',' << fmt("%.9g", r.l_rec) << ',' << fmt("%.9g", r.l_btv) << ','
        << fmt("%.9g", r.l_adv_g) << ',' << fmt("%.9g", r.l_adv_d) << ',' << probe_col << '\n';
    log.flush();
    if (last || (config.checkpoint_every > 0 && r.iteration % config.checkpoint_every == 0)) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_%06lld.arhf", static_cast<long long>(r.iteration));
      result.checkpoints.push_back(ckpt_dir / name);
      save_checkpoint(to_checkpoint(model), result.checkpoints.back());
    }
    result.reports.push_back(r);
    if (on_step) on_step(r);
  }
  return result;
}

}  // namespace arhnet
