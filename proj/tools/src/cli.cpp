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

#include "arhnet/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "arhnet/augment.hpp"
#include "arhnet/checkpoint.hpp"
#include "arhnet/error.hpp"
#include "arhnet/gradcheck.hpp"
#include "arhnet/harmonize.hpp"
#include "arhnet/metrics.hpp"
#include "arhnet/parallel.hpp"
#include "arhnet/synth.hpp"
#include "arhnet/training.hpp"
#include "arhnet/volume_io.hpp"

namespace arhnet {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

struct PerturbArgs {
  std::string image, mask, out;
  double alpha = 0, lambda = 0;
  std::uint64_t seed = 0;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

int cmd_perturb(const PerturbArgs& a, std::ostream& out) {
  if (a.alpha_opt->count() == 0 && a.seed_opt->count() == 0) {
    throw UsageError("perturb: give --alpha and --lambda, or --seed");
  }
  const Volume3D image = load_volume(a.image);
  const Mask3D mask = load_mask(a.mask);
  Perturbation p{a.alpha, a.lambda};
  if (a.alpha_opt->count() == 0) {
    Rng rng(a.seed);
    p = sample_perturbation(rng);
  }
  ensure_parent(a.out);
  save_volume(perturb_foreground(image, mask, p), a.out);
  out << "alpha=" << fmt6(p.alpha) << " lambda=" << fmt6(p.lambda) << "\n";
  return kExitOk;
}

struct CompositeArgs {
  std::string host, host_mask, donor, donor_mask, host_region, out_image, out_mask;
  std::uint64_t seed = 0;
  int max_attempts = 100;
  bool allow_overlap = false;
};

int cmd_composite(const CompositeArgs& a, std::ostream& out) {
  PlacementPolicy policy;
  policy.max_attempts = a.max_attempts;
  policy.allow_overlap = a.allow_overlap;
  if (!a.host_region.empty()) policy.host_region = load_mask(a.host_region);
  Rng rng(a.seed);
  const Volume3D host = load_volume(a.host);
  const Composite c = copy_paste(host, load_mask(a.host_mask), load_volume(a.donor), load_mask(a.donor_mask), policy, rng);
  ensure_parent(a.out_image);
  ensure_parent(a.out_mask);
  save_volume(c.image, a.out_image);
  save_mask(c.mask, a.out_mask, host.spacing());
  out << "offset=" << c.offset[0] << "," << c.offset[1] << "," << c.offset[2] << "\n";
  return kExitOk;
}

struct HarmonizeArgs {
  std::string method = "hm", checkpoint, image, mask, out, hm_reference = "shell";
  int bins = 256;
  int context_radius = 8;
  std::int64_t patch_size = 0;
};

int cmd_harmonize(const HarmonizeArgs& a) {
  if (a.method == "model" && a.checkpoint.empty()) throw UsageError("harmonize --method model requires --checkpoint");
  const Volume3D image = load_volume(a.image);
  const Mask3D mask = load_mask(a.mask);
  Volume3D result;
  if (a.method == "identity") {
    result = composite_identity(image);
  } else if (a.method == "hm") {
    HistogramMatchOptions o;
    o.bins = a.bins;
    o.context_radius = a.context_radius;
    o.reference = a.hm_reference == "background" ? HmReference::kBackground : HmReference::kShell;
    result = histogram_match(image, mask, o);
  } else {
    const auto model = model_from_checkpoint(load_checkpoint(a.checkpoint));
    const std::int64_t patch = a.patch_size > 0 ? a.patch_size : model->config.patch_size;
    result = harmonize_with_model(model->g, image, mask, patch);
  }
  ensure_parent(a.out);
  save_volume(result, a.out);
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::int64_t print_every = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig config;
  if (!a.config.empty()) config = load_train_config(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--override expects key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  const TrainResult r = train(config, [&](const StepReport& s) {
    if (a.print_every > 0 && s.iteration % a.print_every == 0) {
      out << "iter " << s.iteration << " rec " << s.l_rec << " btv " << s.l_btv << " adv_g " << s.l_adv_g
          << " adv_d " << s.l_adv_d << "\n";
    }
  });
  out << "iterations " << r.model->iteration << "\nlog " << r.log_path.string() << "\n";
  if (!r.checkpoints.empty()) out << "checkpoint " << r.checkpoints.back().string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string pred_dir, gt_dir, mask_dir, metrics = "harmonization", out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const bool harmonization = a.metrics == "harmonization";
  if (harmonization && a.mask_dir.empty()) throw UsageError("eval --metrics harmonization requires --mask-dir");
  const auto preds = list_volumes(a.pred_dir);
  if (preds.empty()) throw PreconditionError("eval: no volumes in " + a.pred_dir);

  std::string csv = harmonization ? "case,mae,fmae,psnr,fpsnr\n" : "case,dice,asd,hd95\n";
  const std::size_t cols = harmonization ? 4 : 3;
  std::vector<double> sums(cols, 0.0);
  std::vector<std::int64_t> counts(cols, 0);
  auto add_row = [&](const std::string& name, const std::vector<std::optional<double>>& values) {
    csv += name;
    for (std::size_t c = 0; c < cols; ++c) {
      csv += ',';
      if (values[c]) {
        csv += fmt6(*values[c]);
        sums[c] += *values[c];
        ++counts[c];
      }
    }
    csv += '\n';
  };
  for (const auto& pred_path : preds) {
    const std::string name = pred_path.filename().string();
    const fs::path gt_path = fs::path(a.gt_dir) / name;
    if (harmonization) {
      const Volume3D pred = load_volume(pred_path);
      const Volume3D gt = load_volume(gt_path);
      const Mask3D mask = load_mask(fs::path(a.mask_dir) / name);
      const HarmonizationReport r = harmonization_report(gt, pred, mask);
      add_row(name, {r.mae, r.fmae, r.psnr_db, r.fpsnr_db});
    } else {
      const Volume3D gt = load_volume(gt_path);
      const Mask3D pred = mask_from_volume(load_volume(pred_path));
      const Mask3D truth = mask_from_volume(gt);
      std::vector<std::optional<double>> row{dice(pred, truth), std::nullopt, std::nullopt};
      try {
        const SegmentationReport r = segmentation_report(pred, truth, gt.spacing());
        row[1] = r.asd_mm;
        row[2] = r.hd95_mm;
      } catch (const DegenerateRegionError&) {
      }
      add_row(name, row);
    }
  }
  csv += "mean";
  for (std::size_t c = 0; c < cols; ++c) {
    csv += ',';
    if (counts[c] > 0) csv += fmt6(sums[c] / static_cast<double>(counts[c]));
  }
  csv += '\n';
  if (a.out.empty()) {
    out << csv;
  } else {
    write_text(a.out, csv);
  }
  return kExitOk;
}

struct SliceArgs {
  std::string image, out, axis = "z";
  std::int64_t index = 0;
  double lo = 0.0, hi = 1.0;
};

int cmd_slice(const SliceArgs& a) {
  write_text(a.out, slice_pgm(load_volume(a.image), a.axis[0], a.index, a.lo, a.hi));
  return kExitOk;
}

struct GradcheckArgs {
  std::string op = "all";
  std::uint64_t seed = 0;
  bool no_sweep = false;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  std::vector<std::string> names;
  if (a.op == "all") {
    names = gradcheck_names();
  } else {
    const auto& all = gradcheck_names();
    if (std::find(all.begin(), all.end(), a.op) == all.end()) throw UsageError("gradcheck: unknown op '" + a.op + "'");
    names = {a.op};
  }
  bool ok = true;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %10s %12s %10s  %s\n", "op", "eps", "max_rel_err", "tolerance", "status");
  out << line;
  for (const auto& name : names) {
    const GradcheckReport r = run_gradcheck(name, a.seed, !a.no_sweep);
    ok = ok && r.passed();
    std::snprintf(line, sizeof line, "%-22s %10.0e %12.3e %10.0e  %s", name.c_str(), r.eps, r.max_rel_error, r.tolerance,
                  r.passed() ? "PASS" : "FAIL");
    out << line;
    for (const auto& [eps, err] : r.sweep) {
      std::snprintf(line, sizeof line, "  [%.0e: %.2e]", eps, err);
      out << line;
    }
    out << "\n";
  }
  out << (ok ? "gradcheck passed\n" : "gradcheck FAILED\n");
  return ok ? kExitOk : kExitNumeric;
}

struct SynthArgs {
  std::string out_dir;
  SynthOptions options;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  write_synth_dataset(a.out_dir, a.options);
  out << "wrote " << a.options.train << " train and " << a.options.test << " test cases to " << a.out_dir << "\n";
  return kExitOk;
}

}  // namespace

std::string slice_pgm(const Volume3D& v, char axis, std::int64_t index, double lo, double hi) {
  const Dims3& d = v.dims();
  const int fixed = axis == 'x' ? 0 : axis == 'y' ? 1 : axis == 'z' ? 2 : -1;
  if (fixed < 0) throw PreconditionError(std::string("slice axis must be x, y or z, got '") + axis + "'");
  if (index < 0 || index >= d[fixed]) {
    throw PreconditionError("slice index " + std::to_string(index) + " outside [0, " + std::to_string(d[fixed]) + ")");
  }
  if (!(hi > lo)) throw PreconditionError("slice window needs max > min");
  const int row_axis = fixed == 0 ? 1 : 0;
  const int col_axis = fixed == 2 ? 1 : 2;
  const std::int64_t rows = d[row_axis], cols = d[col_axis];
  std::string pgm = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      Index3 p{0, 0, 0};
      p[fixed] = index;
      p[row_axis] = r;
      p[col_axis] = c;
      const double t = std::clamp((v.at(p[0], p[1], p[2]) - lo) / (hi - lo), 0.0, 1.0);
      pgm += static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0)));
    }
  }
  return pgm;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ARHNet foreground harmonization for 3D lesion volumes", "arhnet"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads; 1 is bit-reproducible")->check(CLI::PositiveNumber);

  PerturbArgs pa;
  auto* perturb = app.add_subcommand("perturb", "Apply a foreground intensity perturbation");
  perturb->add_option("--image", pa.image)->required();
  perturb->add_option("--mask", pa.mask)->required();
  perturb->add_option("--out", pa.out)->required();
  pa.alpha_opt = perturb->add_option("--alpha", pa.alpha, "fg' = (1 + alpha) fg + lambda");
  auto* lambda_opt = perturb->add_option("--lambda", pa.lambda, "Additive offset");
  pa.seed_opt = perturb->add_option("--seed", pa.seed, "Sample alpha and lambda from this seed");
  pa.alpha_opt->needs(lambda_opt);
  lambda_opt->needs(pa.alpha_opt);
  pa.seed_opt->excludes(pa.alpha_opt);

  CompositeArgs ca;
  auto* composite = app.add_subcommand("composite", "Copy-Paste a donor lesion into a host volume");
  composite->add_option("--host", ca.host)->required();
  composite->add_option("--host-mask", ca.host_mask)->required();
  composite->add_option("--donor", ca.donor)->required();
  composite->add_option("--donor-mask", ca.donor_mask)->required();
  composite->add_option("--host-region", ca.host_region, "Mask restricting paste positions");
  composite->add_option("--out-image", ca.out_image)->required();
  composite->add_option("--out-mask", ca.out_mask)->required();
  composite->add_option("--seed", ca.seed);
  composite->add_option("--max-attempts", ca.max_attempts)->check(CLI::PositiveNumber);
  composite->add_flag("--allow-overlap", ca.allow_overlap);

  HarmonizeArgs ha;
  auto* harmonize = app.add_subcommand("harmonize", "Harmonize the masked foreground");
  harmonize->add_option("--method", ha.method)->check(CLI::IsMember({"identity", "hm", "model"}));
  harmonize->add_option("--checkpoint", ha.checkpoint);
  harmonize->add_option("--image", ha.image)->required();
  harmonize->add_option("--mask", ha.mask)->required();
  harmonize->add_option("--out", ha.out)->required();
  harmonize->add_option("--bins", ha.bins)->check(CLI::PositiveNumber);
  harmonize->add_option("--context-radius", ha.context_radius)->check(CLI::PositiveNumber);
  harmonize->add_option("--hm-reference", ha.hm_reference)->check(CLI::IsMember({"shell", "background"}));
  harmonize->add_option("--patch-size", ha.patch_size, "Model window edge (default: training patch size)");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train generator and discriminator");
  train_cmd->add_option("--config", ta.config, "key = value config file");
  train_cmd->add_option("--override", ta.overrides, "key=value, applied after the config file");
  train_cmd->add_option("--print-every", ta.print_every, "Print losses every N iterations");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Metric CSV over a directory of predictions");
  eval->add_option("--pred-dir", ea.pred_dir)->required();
  eval->add_option("--gt-dir", ea.gt_dir)->required();
  eval->add_option("--mask-dir", ea.mask_dir);
  eval->add_option("--metrics", ea.metrics)->check(CLI::IsMember({"harmonization", "segmentation"}));
  eval->add_option("--out", ea.out, "CSV path (stdout when omitted)");

  SliceArgs sa;
  auto* slice = app.add_subcommand("slice-export", "Write one slice as 8-bit PGM");
  slice->add_option("--image", sa.image)->required();
  slice->add_option("--axis", sa.axis)->check(CLI::IsMember({"x", "y", "z"}));
  slice->add_option("--index", sa.index)->required();
  slice->add_option("--out", sa.out)->required();
  slice->add_option("--min", sa.lo);
  slice->add_option("--max", sa.hi);

  GradcheckArgs ga;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  gradcheck->add_option("--op", ga.op, "Op name or all");
  gradcheck->add_option("--seed", ga.seed);
  gradcheck->add_flag("--no-sweep", ga.no_sweep, "Skip the eps sweep");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth-data", "Generate the synthetic lesion dataset");
  synth->add_option("--out-dir", ya.out_dir)->required();
  synth->add_option("--n", ya.options.train, "Training cases")->check(CLI::PositiveNumber);
  synth->add_option("--n-test", ya.options.test, "Test cases")->check(CLI::NonNegativeNumber);
  synth->add_option("--size", ya.options.size, "Volume edge length");
  synth->add_option("--seed", ya.options.seed);

  const std::map<CLI::App*, std::function<int()>> commands = {
      {perturb, [&] { return cmd_perturb(pa, out); }},
      {composite, [&] { return cmd_composite(ca, out); }},
      {harmonize, [&] { return cmd_harmonize(ha); }},
      {train_cmd, [&] { return cmd_train(ta, out); }},
      {eval, [&] { return cmd_eval(ea, out); }},
      {slice, [&] { return cmd_slice(sa); }},
      {gradcheck, [&] { return cmd_gradcheck(ga, out); }},
      {synth, [&] { return cmd_synth(ya, out); }},
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_num_threads(threads);
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn();
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace arhnet
