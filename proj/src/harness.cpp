#include "promptaug/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <exception>
#include <mutex>

#include "promptaug/external.hpp"
#include "promptaug/log.hpp"
#include "promptaug/rng.hpp"

namespace promptaug {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Runs `f`, prefixing any Error with the sample id.
template <typename F>
auto with_sample_context(const Sample& sample, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), sample.id + ": " + e.what());
  }
}

SegmentationResult segment_points(PipelineContext& ctx, const Sample& sample,
                                  const std::vector<Point>& points) {
  PromptSet prompts;
  for (Point p : points) prompts.points.push_back({p, PointLabel::kForeground});
  return ctx.segmenter.segment(sample.image, prompts, sample.image_path);
}

ExperimentRecord base_record(const Sample& sample, std::string strategy,
                             RecordKind kind, const InitialPass& initial,
                             std::size_t repeat) {
  ExperimentRecord rec;
  rec.sample_id = sample.id;
  rec.group = sample.group;
  rec.dataset = sample.group.substr(0, sample.group.find('/'));
  rec.strategy = std::move(strategy);
  rec.kind = kind;
  rec.repeat = repeat;
  rec.p0 = initial.p0;
  rec.dice_initial = initial.dice;
  rec.dice_augmented = initial.dice;
  rec.segment_calls = 1;
  return rec;
}

}  // namespace

std::string_view record_kind_name(RecordKind kind) {
  switch (kind) {
    case RecordKind::kPoint: return "point";
    case RecordKind::kStability: return "stability";
    case RecordKind::kBox: return "box";
  }
  return "unknown";
}

std::string flags_to_string(unsigned flags) {
  static constexpr std::pair<unsigned, const char*> kNames[] = {
      {kFlagEmptyInitial, "empty_initial"},
      {kFlagNoCandidates, "no_candidates"},
      {kFlagShortCandidates, "short_candidates"},
      {kFlagSaliencyEmpty, "saliency_empty"},
      {kFlagEmptyIntermediate, "empty_intermediate"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if (!(flags & bit)) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::string_view sample_id,
                          std::size_t repeat, std::string_view tag) {
  return derive_seed(base_seed, {fnv1a(sample_id),
                                 static_cast<std::uint64_t>(repeat), fnv1a(tag)});
}

Point sample_initial_point(const BinaryMask& gt, std::uint64_t seed,
                           InitialPointRule rule) {
  const auto points = foreground_points(gt);
  if (points.empty()) {
    throw Error(ErrorCode::kEmptyMask, "initial point needs a nonempty GT mask");
  }
  if (rule == InitialPointRule::kUniform) {
    SplitMix64 rng(seed);
    return points[rng.below(points.size())];
  }
  double cx = 0.0, cy = 0.0;
  for (Point p : points) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(points.size());
  cy /= static_cast<double>(points.size());
  Point best = points.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (Point p : points) {
    const double d = (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

InitialPass run_initial_pass(const Sample& sample, std::size_t repeat,
                             PipelineContext& ctx, bool segment) {
  return with_sample_context(sample, [&] {
    InitialPass pass;
    pass.seed = sample_seed(ctx.cfg.base_seed, sample.id, repeat, "initial");
    pass.p0 = sample_initial_point(sample.gt_mask, pass.seed, ctx.cfg.initial_point);
    if (!segment) return pass;
    pass.result = segment_points(ctx, sample, {pass.p0});
    pass.dice = dice(pass.result.mask, sample.gt_mask);
    return pass;
  });
}

ExperimentRecord run_point_pipeline(const Sample& sample,
                                    const PointStrategy& strategy,
                                    std::size_t k, const InitialPass& initial,
                                    std::size_t repeat, PipelineContext& ctx) {
  const StrategySpec spec{strategy};
  ExperimentRecord rec =
      base_record(sample, spec.name(), RecordKind::kPoint, initial, repeat);
  rec.total_points = 1 + k;
  rec.seed = sample_seed(ctx.cfg.base_seed, sample.id, repeat, rec.strategy);
  const auto start = Clock::now();

  const bool from_gt = strategy.source == PointSource::kGtMask;
  if (!from_gt && !initial.result.mask.any()) {
    rec.flags |= kFlagEmptyInitial;
    return rec;
  }

  return with_sample_context(sample, [&] {
    StrategyKind kind = strategy.kind;
    CandidateSet candidates;
    try {
      if (kind == StrategyKind::kSaliency) {
        try {
          candidates = saliency_candidates(sample.image, initial.result.mask,
                                           ctx.saliency, initial.p0,
                                           ctx.cfg.crop_margin);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kSaliencyEmpty) throw;
          // Nothing salient: draw at random from the initial mask instead.
          rec.flags |= kFlagSaliencyEmpty;
          kind = StrategyKind::kRandom;
          candidates = build_candidates(initial.result.mask, initial.p0);
        }
      } else {
        candidates = build_candidates(from_gt ? sample.gt_mask
                                              : initial.result.mask,
                                      initial.p0);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCandidates) throw;
      rec.flags |= kFlagNoCandidates;
      rec.elapsed_ms = ms_since(start);
      return rec;
    }

    std::size_t take = k;
    if (candidates.size() < k) {
      take = candidates.size();
      rec.flags |= kFlagShortCandidates;
    }
    TopKInputs in;
    in.image = &sample.image;
    in.candidates = &candidates;
    in.p0 = initial.p0;
    in.seed = rec.seed;
    in.distance_mode = ctx.cfg.distance_mode;
    rec.augmented = sample_top_k(kind, take, in);

    std::vector<Point> prompt_points{initial.p0};
    prompt_points.insert(prompt_points.end(), rec.augmented.begin(),
                         rec.augmented.end());
    const auto final_result = segment_points(ctx, sample, prompt_points);
    rec.segment_calls = 2;
    rec.dice_augmented = dice(final_result.mask, sample.gt_mask);
    rec.elapsed_ms = ms_since(start);
    return rec;
  });
}

std::vector<ExperimentRecord> run_stability_study(const Sample& sample,
                                                  StrategyKind strategy,
                                                  const InitialPass& initial,
                                                  std::size_t repeat,
                                                  PipelineContext& ctx) {
  constexpr std::size_t kRanks = 3;
  const std::string name(strategy_name(strategy));
  const std::uint64_t seed =
      sample_seed(ctx.cfg.base_seed, sample.id, repeat, name);
  return with_sample_context(sample, [&] {
    CandidateSet candidates;
    try {
      if (!initial.result.mask.any()) {
        throw Error(ErrorCode::kEmptyCandidates, "initial mask is empty");
      }
      candidates = strategy == StrategyKind::kSaliency
                       ? saliency_candidates(sample.image, initial.result.mask,
                                             ctx.saliency, initial.p0,
                                             ctx.cfg.crop_margin)
                       : build_candidates(initial.result.mask, initial.p0);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCandidates &&
          e.code() != ErrorCode::kSaliencyEmpty) {
        throw;
      }
      throw Error(ErrorCode::kInsufficientCandidates,
                  std::string("stability study: ") + e.what());
    }
    if (candidates.size() < kRanks) {
      throw Error(ErrorCode::kInsufficientCandidates,
                  "stability study needs 3 candidates, have " +
                      std::to_string(candidates.size()));
    }
    TopKInputs in;
    in.image = &sample.image;
    in.candidates = &candidates;
    in.p0 = initial.p0;
    in.seed = seed;
    in.distance_mode = ctx.cfg.distance_mode;
    const auto points = sample_top_k(strategy, kRanks, in);

    std::vector<ExperimentRecord> out;
    for (std::size_t i = 0; i < kRanks; ++i) {
      const auto start = Clock::now();
      ExperimentRecord rec =
          base_record(sample, name, RecordKind::kStability, initial, repeat);
      rec.total_points = 2;
      rec.rank = static_cast<int>(i + 1);
      rec.seed = seed;
      rec.augmented = {points[i]};
      const auto result = segment_points(ctx, sample, {initial.p0, points[i]});
      rec.segment_calls = 2;
      rec.dice_augmented = dice(result.mask, sample.gt_mask);
      rec.elapsed_ms = ms_since(start);
      out.push_back(std::move(rec));
    }
    return out;
  });
}

ExperimentRecord run_box_record(const Sample& sample, BoxScheme scheme,
                                const InitialPass& initial, std::size_t repeat,
                                PipelineContext& ctx) {
  ExperimentRecord rec = base_record(sample, std::string(box_scheme_name(scheme)),
                                     RecordKind::kBox, initial, repeat);
  rec.seed = sample_seed(ctx.cfg.base_seed, sample.id, repeat, rec.strategy);
  const auto start = Clock::now();
  return with_sample_context(sample, [&] {
    const BoxChain chain =
        run_box_scheme(scheme, sample.image, sample.gt_mask, ctx.segmenter,
                       rec.seed, initial.p0, sample.image_path);
    rec.total_points = chain.final_prompts.points.size();
    rec.box = chain.final_prompts.box;
    rec.segment_calls = chain.segment_calls;
    rec.dice_initial = dice(chain.initial.mask, sample.gt_mask);
    rec.dice_augmented = dice(chain.final_result.mask, sample.gt_mask);
    if (chain.empty_intermediate) rec.flags |= kFlagEmptyIntermediate;
    rec.elapsed_ms = ms_since(start);
    return rec;
  });
}

namespace {

bool needs_saliency(const ExperimentConfig& cfg) {
  for (const auto& s : cfg.strategies) {
    const auto* p = std::get_if<PointStrategy>(&s.what);
    if (p && p->kind == StrategyKind::kSaliency) return true;
  }
  return std::find(cfg.stability.begin(), cfg.stability.end(),
                   StrategyKind::kSaliency) != cfg.stability.end();
}

struct SampleOutput {
  std::vector<ExperimentRecord> records;
  std::vector<Failure> failures;
  std::vector<std::string> skips;
};

void process_sample(const ExperimentConfig& cfg, const Dataset& dataset,
                    std::size_t index, PipelineContext& ctx, SampleOutput& out) {
  const std::string id = dataset.sample_id(index);
  Sample sample;
  try {
    sample = dataset.load(index);
  } catch (const Error& e) {
    out.skips.push_back(std::string(e.what()));
    return;
  }
  auto fail = [&](std::string context, const Error& e) {
    out.failures.push_back({id, std::move(context), e.code(), e.what()});
  };

  bool point_pass = !cfg.stability.empty();
  for (const auto& s : cfg.strategies) {
    if (!s.is_box()) point_pass = true;
  }
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    InitialPass initial;
    try {
      initial = run_initial_pass(sample, r, ctx, false);
    } catch (const Error& e) {
      fail("initial", e);
      continue;
    }
    // A failed first pass only sinks the point-based work; box schemes
    // issue their own calls.
    bool initial_ok = false;
    if (point_pass) {
      try {
        initial = run_initial_pass(sample, r, ctx, true);
        initial_ok = true;
      } catch (const Error& e) {
        fail("initial", e);
      }
    }
    for (const auto& strategy : cfg.strategies) {
      try {
        if (const auto* box = std::get_if<BoxScheme>(&strategy.what)) {
          out.records.push_back(run_box_record(sample, *box, initial, r, ctx));
        } else if (initial_ok) {
          const auto& point = std::get<PointStrategy>(strategy.what);
          for (std::size_t k : cfg.extra_points) {
            out.records.push_back(
                run_point_pipeline(sample, point, k, initial, r, ctx));
          }
        }
      } catch (const Error& e) {
        fail(strategy.name(), e);
      }
    }
    if (!initial_ok) continue;
    for (StrategyKind kind : cfg.stability) {
      try {
        auto recs = run_stability_study(sample, kind, initial, r, ctx);
        for (auto& rec : recs) out.records.push_back(std::move(rec));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kInsufficientCandidates) {
          out.skips.push_back(std::string(e.what()) + " (repeat " +
                              std::to_string(r) + ")");
        } else {
          fail("stability/" + std::string(strategy_name(kind)), e);
        }
      }
    }
  }
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const Dataset& dataset,
                         const SegmenterFactory& segmenters,
                         const SaliencyFactory& saliency) {
  const std::size_t n = dataset.size();
  std::vector<SampleOutput> outputs(n);

  std::size_t threads = cfg.workers;
  if (threads == 0) {
    // Each worker owns a segmenter; an external one is a whole model
    // process, so only fan out when asked to.
    threads = std::holds_alternative<External>(cfg.segmenter)
                  ? 1
                  : static_cast<std::size_t>(omp_get_max_threads());
  }
  threads = std::max<std::size_t>(1, std::min(threads, n));

  const bool want_saliency = needs_saliency(cfg);
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto record_fatal = [&] {
    std::lock_guard<std::mutex> lock(fatal_mutex);
    if (!fatal) fatal = std::current_exception();
  };

#pragma omp parallel num_threads(static_cast<int>(threads))
  {
    std::unique_ptr<Segmenter> segmenter;
    std::unique_ptr<SaliencySource> source;
    try {
      segmenter = segmenters();
      source = want_saliency ? saliency()
                             : std::make_unique<SpectralResidualSource>();
    } catch (...) {
      record_fatal();
    }
#pragma omp for schedule(dynamic, 1)
    for (std::size_t i = 0; i < n; ++i) {
      if (!segmenter || !source) continue;
      {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        if (fatal) continue;
      }
      try {
        PipelineContext ctx{*segmenter, *source, cfg};
        process_sample(cfg, dataset, i, ctx, outputs[i]);
      } catch (...) {
        record_fatal();
      }
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  RunResult result;
  result.samples = n;
  result.dataset_report = dataset.report();
  for (auto& out : outputs) {
    for (auto& rec : out.records) result.records.push_back(std::move(rec));
    for (auto& f : out.failures) result.failures.push_back(std::move(f));
    for (auto& s : out.skips) {
      ++result.dataset_report.skipped;
      result.dataset_report.messages.push_back(std::move(s));
    }
  }
  constexpr std::size_t kLoggedFailures = 5;
  for (std::size_t i = 0; i < result.failures.size() && i < kLoggedFailures; ++i) {
    const auto& f = result.failures[i];
    log::warn(f.sample_id + " [" + f.context + "]: " + f.message);
  }
  if (result.failures.size() > kLoggedFailures) {
    log::warn(std::to_string(result.failures.size() - kLoggedFailures) +
              " more failures listed in the summary");
  }
  return result;
}

RunResult run_experiment(const ExperimentConfig& cfg, const Dataset& dataset) {
  SegmenterFactory segmenters = [&cfg] { return make_segmenter(cfg.segmenter); };
  SaliencyFactory saliency = [&cfg]() -> std::unique_ptr<SaliencySource> {
    if (cfg.saliency.external) {
      return std::make_unique<ExternalSaliencySource>(cfg.saliency.spec);
    }
    return std::make_unique<SpectralResidualSource>();
  };
  return run_experiment(cfg, dataset, segmenters, saliency);
}

}  // namespace promptaug
