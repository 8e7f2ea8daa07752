// promptaug command line: run | inspect | validate-adapter | decode-coco.
// Exit codes: 0 success, 1 config or usage error, 2 runtime error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "promptaug/conformance.hpp"
#include "promptaug/config.hpp"
#include "promptaug/external.hpp"
#include "promptaug/harness.hpp"
#include "promptaug/log.hpp"
#include "promptaug/overlay.hpp"
#include "promptaug/png_io.hpp"
#include "promptaug/report.hpp"

namespace fs = std::filesystem;
using namespace promptaug;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunArgs {
  std::string config;
  std::string output_dir;
  int workers = -1;
  bool strict = false;
};

struct InspectArgs {
  std::string config;
  std::string sample;
  std::size_t repeat = 0;
  std::string out = "inspect_out";
};

struct ValidateArgs {
  std::string adapter;
  std::vector<std::string> adapter_args;
  std::string golden;
  std::string record_golden;
  long handshake_ms = 120000;
  long request_ms = 60000;
  bool inline_images = false;
};

struct DecodeArgs {
  std::string annotations;
  std::string out = "coco_masks";
  std::vector<std::string> categories;
  std::size_t cap = 0;
  std::uint64_t seed = 0;
};

ExperimentConfig load(const std::string& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kConfigError, "config file not found: " + path);
  }
  ExperimentConfig cfg = load_config(path);
  apply_adapter_override(cfg);
  return cfg;
}

int cmd_run(const RunArgs& a) {
  ExperimentConfig cfg = load(a.config);
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  if (a.workers >= 0) cfg.workers = static_cast<std::size_t>(a.workers);
  if (a.strict) cfg.strict = true;

  const auto dataset = make_dataset(cfg.dataset);
  log::info("dataset " + dataset->name() + ": " + std::to_string(dataset->size()) +
            " samples");
  const RunResult result = run_experiment(cfg, *dataset);
  write_outputs(cfg.output_dir, cfg, result);

  for (const auto& row : aggregate(result.records)) {
    std::cout << row.group << '\t' << row.strategy << '\t'
              << record_kind_name(row.kind) << '\t' << row.total_points << '\t'
              << row.rank << '\t' << format_mean_std(row.mean, row.std) << '\n';
  }
  std::cout << "wrote " << (cfg.output_dir / "records.csv").string() << " and "
            << (cfg.output_dir / "summary.md").string() << '\n';

  if (!result.failures.empty()) {
    log::warn(std::to_string(result.failures.size()) + " failures, see summary.md");
    if (cfg.strict) return kExitRuntime;
    if (result.records.empty()) return kExitRuntime;
  }
  return kExitOk;
}

int cmd_inspect(const InspectArgs& a) {
  const ExperimentConfig cfg = load(a.config);
  const auto dataset = make_dataset(cfg.dataset);
  std::optional<std::size_t> index;
  for (std::size_t i = 0; i < dataset->size(); ++i) {
    if (dataset->sample_id(i) == a.sample) index = i;
  }
  if (!index) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(a.sample.c_str(), &end, 10);
    if (end != a.sample.c_str() && *end == '\0' && v < dataset->size()) index = v;
  }
  if (!index) {
    throw Error(ErrorCode::kConfigError, "no sample '" + a.sample + "' in dataset");
  }
  const Sample sample = dataset->load(*index);
  auto segmenter = make_segmenter(cfg.segmenter);
  std::unique_ptr<SaliencySource> saliency;
  if (cfg.saliency.external) {
    saliency = std::make_unique<ExternalSaliencySource>(cfg.saliency.spec);
  } else {
    saliency = std::make_unique<SpectralResidualSource>();
  }
  PipelineContext ctx{*segmenter, *saliency, cfg};
  const auto panels = render_overlays(sample, cfg, a.repeat, ctx);
  fs::create_directories(a.out);
  for (const auto& p : panels) {
    write_png(fs::path(a.out) / (p.name + ".png"), p.image);
  }
  write_png(fs::path(a.out) / "chain.png", tile_panels(panels));
  std::cout << "wrote " << panels.size() + 1 << " overlays for " << sample.id
            << " to " << a.out << '\n';
  return kExitOk;
}

int cmd_validate(const ValidateArgs& a) {
  ProcessSpec spec;
  std::string adapter = a.adapter;
  if (const char* env = std::getenv("PROMPTAUG_ADAPTER"); env && *env) adapter = env;
  if (adapter.empty()) {
    throw Error(ErrorCode::kConfigError,
                "no adapter given (--adapter or PROMPTAUG_ADAPTER)");
  }
  spec.argv.push_back(adapter);
  spec.argv.insert(spec.argv.end(), a.adapter_args.begin(), a.adapter_args.end());
  spec.handshake_timeout = std::chrono::milliseconds(a.handshake_ms);
  spec.request_timeout = std::chrono::milliseconds(a.request_ms);
  spec.inline_images = a.inline_images;

  if (!a.record_golden.empty()) {
    record_golden(spec, a.record_golden);
    std::cout << "recorded golden exchanges to " << a.record_golden << '\n';
    return kExitOk;
  }
  std::optional<fs::path> golden;
  if (!a.golden.empty()) golden = a.golden;
  const auto report = validate_adapter(spec, golden);
  std::cout << "adapter model: " << (report.model.empty() ? "?" : report.model) << '\n';
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << '\n';
  }
  std::cout << (report.passed() ? "conformance: PASS" : "conformance: FAIL") << '\n';
  return report.passed() ? kExitOk : kExitRuntime;
}

int cmd_decode_coco(const DecodeArgs& a) {
  LoadReport report;
  const CocoIndex index = parse_coco_file(a.annotations, report);
  CocoSelection sel;
  sel.categories = a.categories;
  sel.per_category_cap = a.cap;
  sel.seed = a.seed;
  const auto chosen = select_coco_annotations(index, sel);
  fs::create_directories(a.out);
  std::ofstream csv(fs::path(a.out) / "index.csv", std::ios::trunc);
  csv << "file,annotation_id,image_id,category,pixels\n";
  for (std::size_t i : chosen) {
    const auto& ann = index.annotations[i];
    const auto& image = index.images.at(ann.image_id);
    const BinaryMask mask = annotation_mask(ann, image.width, image.height);
    const std::string file = fs::path(image.file_name).stem().string() + "_" +
                             std::to_string(ann.id) + ".png";
    write_png(fs::path(a.out) / file, mask_to_image(mask));
    csv << file << ',' << ann.id << ',' << ann.image_id << ",\""
        << index.categories.at(ann.category_id) << "\"," << mask.count() << '\n';
  }
  std::cout << "decoded " << chosen.size() << " annotations to " << a.out << " ("
            << report.skipped << " skipped)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt augmentation experiments for promptable segmenters"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Execute an experiment config");
  run_cmd->add_option("-c,--config", run.config, "Experiment config (JSON)")->required();
  run_cmd->add_option("-o,--output-dir", run.output_dir, "Override output_dir");
  run_cmd->add_option("-j,--workers", run.workers, "Override worker count (0 = auto)");
  run_cmd->add_flag("--strict", run.strict, "Exit 2 when any sample fails");

  InspectArgs inspect;
  auto* inspect_cmd =
      app.add_subcommand("inspect", "Render one sample's prompt and mask chain");
  inspect_cmd->add_option("-c,--config", inspect.config, "Experiment config")->required();
  inspect_cmd->add_option("-s,--sample", inspect.sample, "Sample id or index")->required();
  inspect_cmd->add_option("-r,--repeat", inspect.repeat, "Repeat index");
  inspect_cmd->add_option("-o,--out", inspect.out, "Output directory");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand(
      "validate-adapter", "Handshake and conformance checks against an adapter");
  validate_cmd->add_option("-a,--adapter", validate.adapter, "Adapter executable");
  validate_cmd->add_option("--golden", validate.golden, "Golden request/response file");
  validate_cmd->add_option("--record-golden", validate.record_golden,
                           "Record golden exchanges from a trusted adapter");
  validate_cmd->add_option("--handshake-timeout-ms", validate.handshake_ms);
  validate_cmd->add_option("--request-timeout-ms", validate.request_ms);
  validate_cmd->add_flag("--inline", validate.inline_images, "Send images inline");
  validate_cmd->add_option("adapter_args", validate.adapter_args,
                           "Arguments passed to the adapter (after --)");

  DecodeArgs decode;
  auto* decode_cmd =
      app.add_subcommand("decode-coco", "Dump COCO instance annotations as mask PNGs");
  decode_cmd->add_option("-a,--annotations", decode.annotations, "COCO JSON")->required();
  decode_cmd->add_option("-o,--out", decode.out, "Output directory");
  decode_cmd->add_option("--categories", decode.categories, "Category names");
  decode_cmd->add_option("--cap", decode.cap, "Images per category (0 = all)");
  decode_cmd->add_option("--seed", decode.seed, "Selection seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*inspect_cmd) return cmd_inspect(inspect);
    if (*validate_cmd) return cmd_validate(validate);
    if (*decode_cmd) return cmd_decode_coco(decode);
  } catch (const Error& e) {
    log::error(std::string(error_code_name(e.code())) + ": " + e.what());
    return e.code() == ErrorCode::kConfigError ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    log::error(e.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
