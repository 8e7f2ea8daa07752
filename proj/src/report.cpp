#include "promptaug/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "promptaug/log.hpp"

namespace promptaug {

namespace fs = std::filesystem;

namespace {

constexpr const char* kStrategyOrder[] = {
    "initial",
    "random",
    "max_entropy",
    "max_distance",
    "saliency",
    "gt_random",
    "gt_max_entropy",
    "gt_max_distance",
    "inner_box_gt",
    "outer_box_gt",
    "inner_box_initial_box",
    "outer_box_initial_box",
    "outer_box_initial_point",
};

int strategy_order(const std::string& name) {
  for (std::size_t i = 0; i < std::size(kStrategyOrder); ++i) {
    if (name == kStrategyOrder[i]) return static_cast<int>(i);
  }
  return static_cast<int>(std::size(kStrategyOrder));
}

std::string display_name(const std::string& strategy) {
  static const std::map<std::string, std::string> kNames = {
      {"initial", "Initial"},
      {"random", "Random"},
      {"max_entropy", "Max Entropy"},
      {"max_distance", "Max Distance"},
      {"saliency", "Saliency"},
      {"gt_random", "GT Random"},
      {"gt_max_entropy", "GT Max Entropy"},
      {"gt_max_distance", "GT Max Distance"},
      {"inner_box_gt", "Inner Box of GT mask"},
      {"outer_box_gt", "Outer Box of GT mask"},
      {"inner_box_initial_box", "Augmented Inner Box from Initial Box Result"},
      {"outer_box_initial_box", "Augmented Outer Box from Initial Box Result"},
      {"outer_box_initial_point", "Augmented Outer Box from Initial Point Result"},
  };
  auto it = kNames.find(strategy);
  return it == kNames.end() ? strategy : it->second;
}

struct Key {
  std::string group;
  RecordKind kind;
  int order;
  std::string strategy;
  std::size_t total_points;
  int rank;

  auto tie() const {
    return std::tie(group, kind, order, strategy, total_points, rank);
  }
  bool operator<(const Key& o) const { return tie() < o.tie(); }
};

struct Cell {
  std::map<std::size_t, std::vector<double>> by_repeat;
  std::set<std::string> samples;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string points_field(const std::vector<Point>& points) {
  std::string out;
  for (Point p : points) {
    if (!out.empty()) out += ';';
    out += std::to_string(p.x) + ":" + std::to_string(p.y);
  }
  return out;
}

std::string make_dataset_label(const ExperimentConfig& cfg) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SyntheticSpec>) {
          return s.name + " (synthetic, seed " + std::to_string(s.seed) + ")";
        } else if constexpr (std::is_same_v<T, DirSpec>) {
          return s.name + " (directory)";
        } else {
          return s.name + " (COCO)";
        }
      },
      cfg.dataset);
}

std::string segmenter_description(const SegmenterKind& kind) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MockRegionGrow>) {
          return "mock_region_grow (radius " + std::to_string(s.radius) + ")";
        } else if constexpr (std::is_same_v<T, MockBoxFill>) {
          return "mock_box_fill";
        } else if constexpr (std::is_same_v<T, MockDiskAroundSeeds>) {
          return "mock_disk (radius " + std::to_string(s.radius) + ")";
        } else {
          return "external (" + fs::path(s.spec.argv.front()).filename().string() + ")";
        }
      },
      kind);
}

}  // namespace

std::string format_mean_std(double mean, double std) {
  return fixed(mean, 3) + "±" + fixed(std, 3);
}

std::vector<AggregateRow> aggregate(const std::vector<ExperimentRecord>& records) {
  std::map<Key, Cell> cells;
  std::set<std::tuple<std::string, std::string, std::size_t, std::size_t>> seen_initial;

  for (const auto& rec : records) {
    std::vector<std::string> groups{rec.group};
    if (!rec.dataset.empty() && rec.dataset != rec.group) groups.push_back(rec.dataset);
    for (const auto& g : groups) {
      Key key{g, rec.kind, strategy_order(rec.strategy), rec.strategy,
              rec.total_points, rec.rank};
      auto& cell = cells[key];
      cell.by_repeat[rec.repeat].push_back(rec.dice_augmented);
      cell.samples.insert(rec.sample_id);

      if (rec.kind != RecordKind::kPoint) continue;
      if (!seen_initial.emplace(g, rec.sample_id, rec.repeat, rec.total_points).second) {
        continue;
      }
      Key ikey{g, RecordKind::kPoint, strategy_order(kInitialStrategy),
               kInitialStrategy, rec.total_points, 0};
      auto& icell = cells[ikey];
      icell.by_repeat[rec.repeat].push_back(rec.dice_initial);
      icell.samples.insert(rec.sample_id);
    }
  }

  std::vector<AggregateRow> rows;
  for (auto& [key, cell] : cells) {
    if (cell.by_repeat.empty()) {
      log::warn("aggregate: empty group " + key.group + "/" + key.strategy);
      continue;
    }
    std::vector<double> means;
    for (auto& [repeat, values] : cell.by_repeat) {
      // Sorted so the sum does not depend on record order.
      std::sort(values.begin(), values.end());
      double sum = 0.0;
      for (double v : values) sum += v;
      means.push_back(sum / static_cast<double>(values.size()));
    }
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= static_cast<double>(means.size());
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= static_cast<double>(means.size());

    AggregateRow row;
    row.group = key.group;
    row.strategy = key.strategy;
    row.kind = key.kind;
    row.total_points = key.total_points;
    row.rank = key.rank;
    row.mean = mean;
    row.std = std::sqrt(var);
    row.samples = cell.samples.size();
    row.repeats = means.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_records_csv(std::ostream& out,
                       const std::vector<ExperimentRecord>& records) {
  out << "sample_id,dataset,group,strategy,kind,total_points,rank,repeat,seed,"
         "p0_x,p0_y,augmented,box,dice_initial,dice_augmented,flags,"
         "segment_calls\n";
  for (const auto& r : records) {
    std::string box;
    if (r.box) {
      box = std::to_string(r.box->x_min) + ":" + std::to_string(r.box->y_min) +
            ":" + std::to_string(r.box->x_max) + ":" + std::to_string(r.box->y_max);
    }
    out << csv_field(r.sample_id) << ',' << csv_field(r.dataset) << ','
        << csv_field(r.group) << ',' << r.strategy << ','
        << record_kind_name(r.kind) << ',' << r.total_points << ',' << r.rank
        << ',' << r.repeat << ',' << r.seed << ',' << r.p0.x << ',' << r.p0.y
        << ',' << points_field(r.augmented) << ',' << box << ','
        << fixed(r.dice_initial, 6) << ',' << fixed(r.dice_augmented, 6) << ','
        << flags_to_string(r.flags) << ',' << r.segment_calls << '\n';
  }
}

void write_timing_csv(std::ostream& out,
                      const std::vector<ExperimentRecord>& records) {
  out << "sample_id,strategy,kind,total_points,rank,repeat,elapsed_ms\n";
  for (const auto& r : records) {
    out << csv_field(r.sample_id) << ',' << r.strategy << ','
        << record_kind_name(r.kind) << ',' << r.total_points << ',' << r.rank
        << ',' << r.repeat << ',' << fixed(r.elapsed_ms, 3) << '\n';
  }
}

namespace {

using RowIndex = std::map<std::tuple<std::string, RecordKind, std::string,
                                     std::size_t, int>,
                          const AggregateRow*>;

std::string cell_text(const RowIndex& index, const std::string& group,
                      RecordKind kind, const std::string& strategy,
                      std::size_t total_points, int rank) {
  auto it = index.find({group, kind, strategy, total_points, rank});
  return it == index.end() ? "n/a"
                           : format_mean_std(it->second->mean, it->second->std);
}

void table_header(std::ostream& out, const std::vector<std::string>& columns) {
  out << '|';
  for (const auto& c : columns) out << ' ' << c << " |";
  out << "\n|";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i == 0 ? "---|" : "---:|");
  out << '\n';
}

std::string ordinal(int rank) {
  switch (rank) {
    case 1: return "1st";
    case 2: return "2nd";
    case 3: return "3rd";
  }
  return std::to_string(rank) + "th";
}

}  // namespace

void write_summary_md(std::ostream& out, const ExperimentConfig& cfg,
                      const RunResult& result,
                      const std::vector<AggregateRow>& rows) {
  RowIndex index;
  std::vector<std::string> groups;
  std::set<std::string> point_strategies_set, box_strategies_set, stab_set;
  std::set<std::size_t> point_counts;
  for (const auto& row : rows) {
    index[{row.group, row.kind, row.strategy, row.total_points, row.rank}] = &row;
    if (std::find(groups.begin(), groups.end(), row.group) == groups.end()) {
      groups.push_back(row.group);
    }
    switch (row.kind) {
      case RecordKind::kPoint:
        point_strategies_set.insert(row.strategy);
        point_counts.insert(row.total_points);
        break;
      case RecordKind::kBox: box_strategies_set.insert(row.strategy); break;
      case RecordKind::kStability: stab_set.insert(row.strategy); break;
    }
  }
  auto ordered = [](const std::set<std::string>& s) {
    std::vector<std::string> v(s.begin(), s.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return strategy_order(a) < strategy_order(b);
    });
    return v;
  };
  const auto point_strategies = ordered(point_strategies_set);
  const auto box_strategies = ordered(box_strategies_set);
  const auto stab_strategies = ordered(stab_set);

  out << "# promptaug summary\n\n";
  out << "- dataset: " << make_dataset_label(cfg) << ", " << result.samples
      << " samples, " << result.dataset_report.skipped << " skipped\n";
  out << "- segmenter: " << segmenter_description(cfg.segmenter) << "\n";
  out << "- repeats: " << cfg.repeats << ", base_seed: " << cfg.base_seed
      << ", distance_mode: "
      << (cfg.distance_mode == DistanceMode::kMax ? "max" : "min")
      << ", initial point: "
      << (cfg.initial_point == InitialPointRule::kUniform ? "uniform" : "centroid")
      << "\n";
  out << "- records: " << result.records.size() << " (" << kRecordsCsvVersion
      << ")\n";
  out << "- cells: mean±std of the per-repeat mean Dice, population std "
         "over repeats\n";

  if (!point_counts.empty()) {
    const std::size_t headline = *point_counts.begin();
    out << "\n## Point prompts (" << headline << " points)\n\n";
    std::vector<std::string> cols{"Dataset"};
    for (const auto& s : point_strategies) cols.push_back(display_name(s));
    table_header(out, cols);
    for (const auto& g : groups) {
      out << "| " << g << " |";
      for (const auto& s : point_strategies) {
        out << ' ' << cell_text(index, g, RecordKind::kPoint, s, headline, 0) << " |";
      }
      out << '\n';
    }
  }

  if (point_counts.size() > 1) {
    out << "\n## Points number\n\n";
    std::vector<std::string> cols{"Dataset", "Points Number"};
    for (const auto& s : point_strategies) cols.push_back(display_name(s));
    table_header(out, cols);
    for (const auto& g : groups) {
      for (std::size_t n : point_counts) {
        out << "| " << g << " | " << n << " points |";
        for (const auto& s : point_strategies) {
          out << ' ' << cell_text(index, g, RecordKind::kPoint, s, n, 0) << " |";
        }
        out << '\n';
      }
    }
  }

  if (!box_strategies.empty()) {
    out << "\n## Box prompts\n\n";
    std::vector<std::string> cols{"Dataset"};
    for (const auto& s : box_strategies) cols.push_back(display_name(s));
    table_header(out, cols);
    for (const auto& g : groups) {
      out << "| " << g << " |";
      for (const auto& s : box_strategies) {
        const std::size_t pts = s == "outer_box_initial_point" ? 1 : 0;
        out << ' ' << cell_text(index, g, RecordKind::kBox, s, pts, 0) << " |";
      }
      out << '\n';
    }
  }

  if (!stab_strategies.empty()) {
    out << "\n## Stability (top-3 candidates)\n\n";
    std::vector<std::string> cols{"Dataset", "Points Sequence"};
    for (const auto& s : stab_strategies) cols.push_back(display_name(s));
    table_header(out, cols);
    for (const auto& g : groups) {
      for (int rank = 1; rank <= 3; ++rank) {
        out << "| " << g << " | " << ordinal(rank) << " |";
        for (const auto& s : stab_strategies) {
          out << ' ' << cell_text(index, g, RecordKind::kStability, s, 2, rank) << " |";
        }
        out << '\n';
      }
    }
  }

  std::map<std::pair<std::string, std::string>, std::size_t> flag_counts;
  for (const auto& r : result.records) {
    for (unsigned bit = 1; bit <= kFlagEmptyIntermediate; bit <<= 1) {
      if (r.flags & bit) ++flag_counts[{r.strategy, flags_to_string(bit)}];
    }
  }
  if (!flag_counts.empty()) {
    out << "\n## Flags\n\n";
    table_header(out, {"Strategy", "Flag", "Records"});
    for (const auto& [key, count] : flag_counts) {
      out << "| " << key.first << " | " << key.second << " | " << count << " |\n";
    }
  }

  if (!result.failures.empty()) {
    out << "\n## Failures\n\n";
    for (const auto& f : result.failures) {
      out << "- " << f.sample_id << " [" << f.context << "] "
          << error_code_name(f.code) << ": " << f.message << '\n';
    }
  }
  if (!result.dataset_report.messages.empty()) {
    out << "\n## Skipped\n\n";
    for (const auto& m : result.dataset_report.messages) out << "- " << m << '\n';
  }
}

void write_outputs(const fs::path& dir, const ExperimentConfig& cfg,
                   const RunResult& result) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("records.csv");
    write_records_csv(f, result.records);
  }
  {
    auto f = open("summary.md");
    write_summary_md(f, cfg, result, aggregate(result.records));
  }
  {
    auto f = open("timing.csv");
    write_timing_csv(f, result.records);
  }
}

}  // namespace promptaug
