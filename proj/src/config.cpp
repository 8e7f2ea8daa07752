#include "promptaug/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace promptaug {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kConfigError, field + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!keys.count(key)) fail(where + key, "unknown field");
  }
}

template <typename T>
T get(const json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(where + key, e.what());
  }
}

template <typename T>
T require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) fail(where + key, "missing");
  return get<T>(obj, where, key, T{});
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

DatasetSpec parse_dataset(const json& d, const fs::path& base) {
  if (!d.is_object()) fail("dataset", "must be an object");
  const auto kind = require<std::string>(d, "dataset.", "kind");
  if (kind == "synthetic") {
    reject_unknown(d, "dataset.", {"kind", "name", "count", "seed"});
    SyntheticSpec s;
    s.name = get<std::string>(d, "dataset.", "name", s.name);
    s.count = get<std::size_t>(d, "dataset.", "count", s.count);
    s.seed = get<std::uint64_t>(d, "dataset.", "seed", s.seed);
    if (s.count == 0) fail("dataset.count", "must be >= 1");
    return s;
  }
  if (kind == "dir") {
    reject_unknown(d, "dataset.", {"kind", "name", "images", "masks"});
    DirSpec s;
    s.name = require<std::string>(d, "dataset.", "name");
    s.images = resolve(base, require<std::string>(d, "dataset.", "images"));
    s.masks = resolve(base, require<std::string>(d, "dataset.", "masks"));
    return s;
  }
  if (kind == "coco") {
    reject_unknown(d, "dataset.", {"kind", "name", "annotations", "images",
                                   "categories", "per_category_cap",
                                   "selection_seed"});
    CocoSpec s;
    s.name = get<std::string>(d, "dataset.", "name", s.name);
    s.annotations =
        resolve(base, require<std::string>(d, "dataset.", "annotations"));
    s.images = resolve(base, require<std::string>(d, "dataset.", "images"));
    s.selection.categories =
        get<std::vector<std::string>>(d, "dataset.", "categories", {});
    s.selection.per_category_cap = get<std::size_t>(
        d, "dataset.", "per_category_cap", s.selection.per_category_cap);
    s.selection.seed = get<std::uint64_t>(d, "dataset.", "selection_seed", 0);
    return s;
  }
  fail("dataset.kind", "expected synthetic, dir or coco, got '" + kind + "'");
}

ProcessSpec parse_process(const json& p, const std::string& where) {
  ProcessSpec spec;
  spec.argv = require<std::vector<std::string>>(p, where, "argv");
  if (spec.argv.empty()) fail(where + "argv", "must not be empty");
  spec.handshake_timeout = std::chrono::milliseconds(get<std::int64_t>(
      p, where, "handshake_timeout_ms", spec.handshake_timeout.count()));
  spec.request_timeout = std::chrono::milliseconds(get<std::int64_t>(
      p, where, "request_timeout_ms", spec.request_timeout.count()));
  spec.inline_images = get<bool>(p, where, "inline_images", false);
  if (spec.handshake_timeout.count() <= 0 || spec.request_timeout.count() <= 0) {
    fail(where + "timeout", "must be positive");
  }
  return spec;
}

SegmenterKind parse_segmenter(const json& s) {
  if (!s.is_object()) fail("segmenter", "must be an object");
  const auto kind = require<std::string>(s, "segmenter.", "kind");
  auto radius = [&](int fallback) {
    const int r = get<int>(s, "segmenter.", "radius", fallback);
    if (r < 0) fail("segmenter.radius", "must be >= 0");
    return r;
  };
  if (kind == "mock_disk") {
    reject_unknown(s, "segmenter.", {"kind", "radius"});
    return MockDiskAroundSeeds{radius(MockDiskAroundSeeds{}.radius)};
  }
  if (kind == "mock_region_grow") {
    reject_unknown(s, "segmenter.", {"kind", "radius"});
    return MockRegionGrow{radius(MockRegionGrow{}.radius)};
  }
  if (kind == "mock_box_fill") {
    reject_unknown(s, "segmenter.", {"kind"});
    return MockBoxFill{};
  }
  if (kind == "external") {
    reject_unknown(s, "segmenter.", {"kind", "argv", "handshake_timeout_ms",
                                     "request_timeout_ms", "inline_images"});
    return External{parse_process(s, "segmenter.")};
  }
  fail("segmenter.kind", "expected mock_disk, mock_region_grow, mock_box_fill "
                         "or external, got '" + kind + "'");
}

}  // namespace

std::string StrategySpec::name() const {
  if (const auto* box = std::get_if<BoxScheme>(&what)) {
    return std::string(box_scheme_name(*box));
  }
  const auto& p = std::get<PointStrategy>(what);
  std::string base(strategy_name(p.kind));
  return p.source == PointSource::kGtMask ? "gt_" + base : base;
}

StrategySpec parse_strategy_spec(std::string_view name,
                                 PointSource default_source) {
  if (auto box = parse_box_scheme(name)) return {*box};
  PointStrategy p{StrategyKind::kMaxDistance, default_source};
  std::string_view bare = name;
  if (bare.starts_with("gt_")) {
    bare.remove_prefix(3);
    p.source = PointSource::kGtMask;
  }
  const auto kind = parse_strategy(bare);
  if (!kind) fail("strategies", "unknown strategy '" + std::string(name) + "'");
  p.kind = *kind;
  if (p.kind == StrategyKind::kSaliency) {
    // Saliency has no GT counterpart: it always reads the image around the
    // initial mask.
    if (name.starts_with("gt_")) fail("strategies", "gt_saliency is not defined");
    p.source = PointSource::kInitialMask;
  }
  return {p};
}

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) fail("config", "top level must be an object");
  reject_unknown(doc, "", {"dataset", "segmenter", "strategies", "point_source",
                           "extra_points", "stability", "repeats", "base_seed",
                           "distance_mode", "saliency", "point_source_initial",
                           "crop_margin", "workers", "output_dir", "strict"});
  ExperimentConfig cfg;
  if (!doc.contains("dataset")) fail("dataset", "missing");
  cfg.dataset = parse_dataset(doc["dataset"], base_dir);
  if (doc.contains("segmenter")) cfg.segmenter = parse_segmenter(doc["segmenter"]);

  const auto source = get<std::string>(doc, "", "point_source", "initial_mask");
  PointSource default_source;
  if (source == "initial_mask") default_source = PointSource::kInitialMask;
  else if (source == "gt_mask") default_source = PointSource::kGtMask;
  else fail("point_source", "expected initial_mask or gt_mask");

  const auto names = require<std::vector<std::string>>(doc, "", "strategies");
  std::set<std::string> seen;
  for (const auto& n : names) {
    auto spec = parse_strategy_spec(n, default_source);
    if (!seen.insert(spec.name()).second) fail("strategies", "duplicate '" + n + "'");
    cfg.strategies.push_back(spec);
  }

  if (doc.contains("extra_points")) {
    const json& e = doc["extra_points"];
    cfg.extra_points = e.is_array() ? get<std::vector<std::size_t>>(doc, "", "extra_points", {})
                                    : std::vector<std::size_t>{get<std::size_t>(doc, "", "extra_points", 1)};
  }
  if (cfg.extra_points.empty()) fail("extra_points", "must not be empty");
  for (auto k : cfg.extra_points) {
    if (k < 1) fail("extra_points", "each entry must be >= 1");
  }
  std::set<std::size_t> unique_k(cfg.extra_points.begin(), cfg.extra_points.end());
  cfg.extra_points.assign(unique_k.begin(), unique_k.end());

  for (const auto& n : get<std::vector<std::string>>(doc, "", "stability", {})) {
    const auto kind = parse_strategy(n);
    if (!kind || *kind == StrategyKind::kRandom) {
      fail("stability", "expected max_entropy, max_distance or saliency, got '" + n + "'");
    }
    cfg.stability.push_back(*kind);
  }

  const auto repeats = get<std::int64_t>(doc, "", "repeats", 3);
  if (repeats < 1) fail("repeats", "must be >= 1");
  cfg.repeats = static_cast<std::size_t>(repeats);
  cfg.base_seed = get<std::uint64_t>(doc, "", "base_seed", 0);

  const auto mode = get<std::string>(doc, "", "distance_mode", "max");
  if (mode == "max") cfg.distance_mode = DistanceMode::kMax;
  else if (mode == "min") cfg.distance_mode = DistanceMode::kMin;
  else fail("distance_mode", "expected max or min");

  if (doc.contains("saliency")) {
    const json& s = doc["saliency"];
    if (!s.is_object()) fail("saliency", "must be an object");
    const auto provider = get<std::string>(s, "saliency.", "provider", "intree");
    if (provider == "intree") {
      reject_unknown(s, "saliency.", {"provider"});
    } else if (provider == "external") {
      reject_unknown(s, "saliency.", {"provider", "argv", "handshake_timeout_ms",
                                      "request_timeout_ms", "inline_images"});
      cfg.saliency.external = true;
      cfg.saliency.spec = parse_process(s, "saliency.");
    } else {
      fail("saliency.provider", "expected intree or external");
    }
  }

  const auto rule = get<std::string>(doc, "", "point_source_initial", "uniform");
  if (rule == "uniform") cfg.initial_point = InitialPointRule::kUniform;
  else if (rule == "centroid") cfg.initial_point = InitialPointRule::kCentroid;
  else fail("point_source_initial", "expected uniform or centroid");

  cfg.crop_margin = get<int>(doc, "", "crop_margin", 10);
  if (cfg.crop_margin < 0) fail("crop_margin", "must be >= 0");
  cfg.workers = get<std::size_t>(doc, "", "workers", 0);
  cfg.output_dir = resolve(base_dir, get<std::string>(doc, "", "output_dir", "promptaug_out"));
  cfg.strict = get<bool>(doc, "", "strict", false);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

void apply_adapter_override(ExperimentConfig& cfg) {
  const char* env = std::getenv("PROMPTAUG_ADAPTER");
  if (env == nullptr || *env == '\0') return;
  if (auto* ext = std::get_if<External>(&cfg.segmenter)) ext->spec.argv[0] = env;
  if (cfg.saliency.external) cfg.saliency.spec.argv[0] = env;
}

std::unique_ptr<Dataset> make_dataset(const DatasetSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::unique_ptr<Dataset> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SyntheticSpec>) {
          return std::make_unique<SyntheticTwoBlobDataset>(s.name, s.count, s.seed);
        } else if constexpr (std::is_same_v<T, DirSpec>) {
          return std::make_unique<DirDataset>(s.name, s.images, s.masks);
        } else {
          return std::make_unique<CocoDataset>(s.name, s.annotations, s.images,
                                               s.selection);
        }
      },
      spec);
}

}  // namespace promptaug
