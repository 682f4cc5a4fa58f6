#include "capdetail/cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <unordered_map>

#include "CLI11.hpp"
#include "capdetail/analysis.h"
#include "capdetail/annotate.h"
#include "capdetail/errors.h"
#include "capdetail/filtering.h"
#include "capdetail/manifest.h"
#include "capdetail/metrics.h"
#include "capdetail/random.h"
#include "capdetail/sampler.h"
#include "capdetail/service_client.h"
#include "capdetail/text.h"

namespace capdetail {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Raised for conditions that map to kExitUsage after option parsing, such
// as refusing to overwrite an output.
struct UsageError {
  std::string message;
};

struct EndpointFlags {
  std::string parse_url;
  std::string segment_url;
  std::string itm_url;
  std::string auth_env;
  double timeout = 60.0;
  int retries = 3;
  int concurrency = 4;
  int backoff_ms = 200;
};

struct RunConfig {
  std::string manifest;
  std::string cache_dir;
  std::string out;
  std::uint64_t seed = 0;
  bool strict = false;
  bool force = false;
  unsigned jobs = 1;
  std::string format = "lines";
  std::string relation_counting = "subject_only";

  // filter
  std::string reports;
  std::string strategy = "detailness";
  std::size_t k = kDefaultPrefilterSize;
  std::size_t t = kDefaultSelectionSize;
  std::string key;

  // sample
  std::string spec;

  // analyze
  bool pearson = false;
  bool binned = false;
  std::size_t bins = kDefaultBinCount;
  std::string table;
  std::string plot_data;

  EndpointFlags endpoints;

  fs::path CacheDir() const {
    if (!cache_dir.empty()) return fs::absolute(cache_dir);
    return fs::absolute(manifest).parent_path();
  }

  RelationCounting Counting() const {
    return relation_counting == "both_endpoints"
               ? RelationCounting::kBothEndpoints
               : RelationCounting::kSubjectOnly;
  }
};

class Command {
 public:
  Command(const RunConfig& config, std::ostream& out, std::ostream& err)
      : config_(config), out_(out), err_(err) {}

  int Validate();
  int Annotate();
  int Score();
  int Filter();
  int Sample();
  int Analyze();

 private:
  std::vector<DatasetRecord> LoadRecords(bool force_strict = false);
  void CheckWritable(const fs::path& path) const;
  void WriteOutput(const fs::path& path, std::string_view data) const;
  std::unordered_map<std::string, MetricReport> LoadReports() const;
  void ReportErrors(std::span<const RecordError> errors) const;
  int BatchExit(std::size_t failures) const {
    return failures > 0 && config_.strict ? kExitPartialFailure : kExitOk;
  }

  const RunConfig& config_;
  std::ostream& out_;
  std::ostream& err_;
};

std::vector<DatasetRecord> Command::LoadRecords(bool force_strict) {
  const Strictness strictness = config_.strict || force_strict
                                    ? Strictness::kStrict
                                    : Strictness::kLenient;
  ManifestReadResult read = ReadDatasetManifest(config_.manifest, strictness);
  for (const LineError& e : read.errors) {
    err_ << config_.manifest << ":" << e.line << ": skipped: " << e.message
         << "\n";
  }
  return std::move(read.records);
}

void Command::CheckWritable(const fs::path& path) const {
  if (path.empty()) throw UsageError{"an --out path is required"};
  if (fs::exists(path) && !config_.force) {
    throw UsageError{"refusing to overwrite " + path.string() +
                     " (pass --force)"};
  }
}

void Command::WriteOutput(const fs::path& path, std::string_view data) const {
  WriteFileAtomic(path, data);
}

std::unordered_map<std::string, MetricReport> Command::LoadReports() const {
  std::unordered_map<std::string, MetricReport> by_id;
  if (config_.reports.empty()) return by_id;
  for (MetricReport& r : ParseReports(ReadFile(config_.reports))) {
    std::string id = r.record_id;
    by_id.emplace(std::move(id), std::move(r));
  }
  return by_id;
}

void Command::ReportErrors(std::span<const RecordError> errors) const {
  for (const RecordError& e : errors) {
    err_ << e.record_id << ": " << e.message << "\n";
  }
}

int Command::Validate() {
  const auto records = LoadRecords(/*force_strict=*/true);
  const fs::path cache_dir = config_.CacheDir();
  std::vector<RecordError> errors;
  std::size_t warnings = 0;
  for (const DatasetRecord& r : records) {
    try {
      if (!r.scene_graph_ref || !r.masks_ref) {
        throw Error(ErrorCode::kIo, "annotations missing (run annotate)");
      }
      const SceneGraph graph =
          ParseSceneGraph(ReadFile(ResolveRef(cache_dir, *r.scene_graph_ref)));
      const MaskDocument masks =
          ParseMaskDocument(ReadFile(ResolveRef(cache_dir, *r.masks_ref)));
      for (const auto& [id, mask] : masks) {
        if (mask.height != r.image_height || mask.width != r.image_width) {
          throw Error(ErrorCode::kDimensionMismatch,
                      "mask for object '" + id + "' does not match image");
        }
        if (graph.FindObject(id) == nullptr) {
          out_ << r.record_id << ": warning: mask for unknown object '" << id
               << "'\n";
          ++warnings;
        }
      }
      for (const std::string& w : ValidationWarnings(graph)) {
        out_ << r.record_id << ": warning: " << w << "\n";
        ++warnings;
      }
      if (!r.itm_score) {
        out_ << r.record_id << ": warning: no ITM score\n";
        ++warnings;
      }
    } catch (const Error& e) {
      errors.push_back({r.record_id, e.code(), e.what()});
    }
  }
  ReportErrors(errors);
  out_ << "validated " << records.size() << " records: " << errors.size()
       << " invalid, " << warnings << " warnings\n";
  return errors.empty() ? kExitOk : kExitValidationFailure;
}

int Command::Annotate() {
  CheckWritable(config_.out);
  const auto records = LoadRecords();
  const EndpointFlags& flags = config_.endpoints;
  const auto make_client =
      [&flags](const std::string& url) -> std::unique_ptr<ServiceClient> {
    if (url.empty()) return nullptr;
    ServiceEndpointConfig endpoint;
    endpoint.base_url = url;
    endpoint.timeout_seconds = flags.timeout;
    endpoint.max_retries = flags.retries;
    endpoint.max_concurrency = flags.concurrency;
    endpoint.auth_token_env = flags.auth_env;
    endpoint.backoff_initial_ms = flags.backoff_ms;
    return std::make_unique<ServiceClient>(endpoint);
  };
  const auto parser = make_client(flags.parse_url);
  const auto segmenter = make_client(flags.segment_url);
  const auto itm = make_client(flags.itm_url);

  const AnnotateResult result = AnnotateDataset(
      records, {parser.get(), segmenter.get(), itm.get()}, config_.CacheDir(),
      {config_.jobs});
  for (const std::string& w : result.warnings) err_ << "warning: " << w << "\n";
  ReportErrors(result.failures);
  WriteOutput(config_.out, SerializeDatasetManifest(result.records));
  out_ << "annotated " << result.records.size() << " records, "
       << result.failures.size() << " failed\n";
  return BatchExit(result.failures.size());
}

int Command::Score() {
  CheckWritable(config_.out);
  const fs::path errors_path = config_.out + ".errors.jsonl";
  CheckWritable(errors_path);
  const auto records = LoadRecords();
  LoadedInputs loaded = LoadScoringInputs(records, config_.CacheDir());
  ScoreResult scored =
      ScoreDataset(loaded.inputs, {config_.Counting(), config_.jobs});

  std::vector<RecordError> errors = std::move(loaded.errors);
  errors.insert(errors.end(), scored.errors.begin(), scored.errors.end());
  std::sort(errors.begin(), errors.end(),
            [](const RecordError& a, const RecordError& b) {
              return a.record_id < b.record_id;
            });
  std::string sidecar;
  for (const RecordError& e : errors) sidecar += SerializeRecordError(e) + "\n";
  ReportErrors(errors);
  WriteOutput(config_.out, SerializeReports(scored.reports));
  WriteOutput(errors_path, sidecar);

  if (config_.format == "table") {
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s %8s %8s %8s %12s\n", "record_id",
                  "icr%", "aod", "length", "detailness");
    out_ << line;
    for (const MetricReport& r : scored.reports) {
      const std::string cd = r.detailness ? FormatDouble(*r.detailness) : "-";
      std::snprintf(line, sizeof(line), "%-20s %8.2f %8.3f %8zu %12s\n",
                    r.record_id.c_str(), 100.0 * r.icr, r.aod, r.length,
                    cd.c_str());
      out_ << line;
    }
  }
  out_ << "scored " << scored.reports.size() << " records, " << errors.size()
       << " failed\n";
  return BatchExit(errors.size());
}

int Command::Filter() {
  CheckWritable(config_.out);
  const auto strategy = ParseStrategy(config_.strategy);
  if (!strategy) throw UsageError{"unknown strategy '" + config_.strategy + "'"};
  SelectionSpec spec;
  spec.strategy = *strategy;
  spec.k = config_.k;
  spec.t = config_.t;
  spec.seed = config_.seed;
  if (!config_.key.empty()) spec.key = ParseRankingKey(config_.key);

  const auto records = LoadRecords();
  const auto reports = LoadReports();
  const bool needs_reports =
      spec.strategy == Strategy::kDetailness ||
      (spec.strategy == Strategy::kComposite && (spec.key.icr || spec.key.aod));
  const bool needs_itm =
      spec.strategy == Strategy::kItmLength ||
      spec.strategy == Strategy::kDetailness ||
      (spec.strategy == Strategy::kComposite &&
       (spec.key.itm_prefilter || (!spec.key.icr && !spec.key.aod)));
  if (needs_reports && config_.reports.empty()) {
    throw UsageError{"strategy '" + config_.strategy + "' needs --reports"};
  }

  std::vector<Candidate> candidates;
  std::vector<RecordError> dropped;
  for (const DatasetRecord& r : records) {
    Candidate c;
    c.record_id = r.record_id;
    c.caption_length = CaptionLength(r.caption);
    c.itm = r.itm_score;
    const auto it = reports.find(r.record_id);
    if (it != reports.end()) c.report = it->second;
    if (needs_reports && !c.report) {
      dropped.push_back({r.record_id, ErrorCode::kMissingMetricReport,
                         "no metric report"});
      continue;
    }
    if (needs_itm && !c.itm) {
      dropped.push_back({r.record_id, ErrorCode::kMissingItmScore,
                         "no ITM score"});
      continue;
    }
    candidates.push_back(std::move(c));
  }
  if (!dropped.empty() && config_.strict) {
    ReportErrors(dropped);
    return kExitPartialFailure;
  }
  for (const RecordError& e : dropped) {
    err_ << e.record_id << ": excluded: " << e.message << "\n";
  }

  SelectionManifest manifest = Select(candidates, spec);
  if (!reports.empty()) {
    std::vector<MetricReport> selected;
    bool complete = true;
    for (const std::string& id : manifest.record_ids) {
      const auto it = reports.find(id);
      if (it == reports.end()) {
        complete = false;
        break;
      }
      selected.push_back(it->second);
    }
    if (complete) manifest.summary = Summarize(manifest.record_ids, selected);
  }
  WriteOutput(config_.out, SerializeSelectionManifest(manifest));
  if (config_.format == "table" && manifest.summary) {
    char line[200];
    std::snprintf(line, sizeof(line), "%-12s %8s %10s %10s %12s\n", "strategy",
                  "num", "avg_icr", "avg_aod", "avg_length");
    out_ << line;
    std::snprintf(line, sizeof(line), "%-12s %8zu %10.2f %10.2f %12.2f\n",
                  config_.strategy.c_str(), manifest.summary->count,
                  manifest.summary->avg_icr_percent, manifest.summary->avg_aod,
                  manifest.summary->avg_length);
    out_ << line;
  }
  out_ << "selected " << manifest.record_ids.size() << " of "
       << candidates.size() << " records\n";
  return kExitOk;
}

int Command::Sample() {
  CheckWritable(config_.out);
  const std::vector<SamplingTarget> targets =
      config_.spec.empty()
          ? DefaultSamplingTargets(config_.seed)
          : ParseSamplingSpec(ReadFile(config_.spec), config_.seed);
  const auto records = LoadRecords();
  const fs::path cache_dir = config_.CacheDir();

  std::string output;
  std::vector<RecordError> failures;
  std::size_t produced = 0;
  std::size_t unreachable = 0;
  for (const DatasetRecord& r : records) {
    SceneGraph graph;
    MaskDocument masks;
    try {
      if (!r.scene_graph_ref || !r.masks_ref) {
        throw Error(ErrorCode::kIo, "annotations missing (run annotate)");
      }
      graph =
          ParseSceneGraph(ReadFile(ResolveRef(cache_dir, *r.scene_graph_ref)));
      masks = ParseMaskDocument(ReadFile(ResolveRef(cache_dir, *r.masks_ref)));
    } catch (const Error& e) {
      failures.push_back({r.record_id, e.code(), e.what()});
      continue;
    }
    for (const SamplingTarget& base : targets) {
      SamplingTarget target = base;
      target.seed = DeriveSeed(base.seed, r.record_id);
      ordered_json line;
      line["record_id"] = r.record_id;
      line["dimension"] = std::string(SamplingDimensionName(target.dimension));
      line["ratio"] = target.ratio;
      line["tolerance"] = target.tolerance;
      line["seed"] = base.seed;
      try {
        const SampledVariant variant =
            target.dimension == SamplingDimension::kIcr
                ? SampleIcrSubgraph(graph, masks, r.image_height,
                                    r.image_width, target)
                : SampleAodSubgraph(graph, target);
        line["achieved_ratio"] = variant.achieved_ratio;
        line["graph"] = SceneGraphToJson(variant.subgraph);
        line["caption"] = variant.realized_caption;
        ++produced;
      } catch (const Error& e) {
        line["error"] = std::string(ErrorCodeName(e.code()));
        line["message"] = e.what();
        ++unreachable;
      }
      output += line.dump();
      output.push_back('\n');
    }
  }
  ReportErrors(failures);
  WriteOutput(config_.out, output);
  out_ << "sampled " << produced << " variants, " << unreachable
       << " targets unreachable, " << failures.size() << " records failed\n";
  return BatchExit(failures.size());
}

int Command::Analyze() {
  CheckWritable(config_.out);
  if (!config_.plot_data.empty()) CheckWritable(config_.plot_data);
  if (!config_.pearson && !config_.binned) {
    throw UsageError{"choose --pearson and/or --binned"};
  }
  ordered_json report;
  std::string plot = "series,x,y\n";
  std::string text;

  if (config_.pearson && !config_.table.empty()) {
    ordered_json groups = ordered_json::object();
    for (const auto& [group, rows] : ParseRatioTable(ReadFile(config_.table))) {
      ordered_json dims = ordered_json::object();
      text += "pearson r (" + group + " ratio vs score)\n";
      for (const auto& [dim, corr] : CorrelationTable(rows)) {
        if (corr.r) {
          dims[dim] = *corr.r;
          text += "  " + dim + ": " + FormatDouble(*corr.r) + "\n";
        } else {
          dims[dim] = {{"error", std::string(ErrorCodeName(*corr.error))}};
          text += "  " + dim + ": " + std::string(ErrorCodeName(*corr.error)) +
                  "\n";
        }
      }
      groups[group] = dims;
    }
    report["correlation_table"] = groups;
  }

  const bool needs_dataset =
      config_.binned || (config_.pearson && config_.table.empty());
  if (needs_dataset) {
    if (config_.manifest.empty() || config_.reports.empty()) {
      throw UsageError{"dataset analysis needs --manifest and --reports"};
    }
    const auto records = LoadRecords();
    const auto reports = LoadReports();
    std::map<std::string, std::vector<double>> series;
    std::vector<double> itm;
    for (const DatasetRecord& r : records) {
      const auto it = reports.find(r.record_id);
      if (it == reports.end() || !r.itm_score) continue;
      itm.push_back(*r.itm_score);
      series["icr"].push_back(it->second.icr);
      series["aod"].push_back(it->second.aod);
      series["length"].push_back(static_cast<double>(it->second.length));
    }
    if (config_.pearson && config_.table.empty()) {
      ordered_json corr = ordered_json::object();
      text += "pearson r (metric vs ITM)\n";
      for (const auto& [name, values] : series) {
        try {
          const double r = Pearson(values, itm);
          corr[name] = r;
          text += "  " + name + ": " + FormatDouble(r) + "\n";
        } catch (const Error& e) {
          corr[name] = {{"error", std::string(ErrorCodeName(e.code()))}};
          text += "  " + name + ": " + std::string(ErrorCodeName(e.code())) +
                  "\n";
        }
      }
      report["pearson"] = corr;
    }
    if (config_.binned) {
      ordered_json binned = ordered_json::object();
      for (const char* name : {"icr", "aod"}) {
        const BinnedCurve curve = BinnedMean(series[name], itm, config_.bins);
        binned[name] = BinnedCurveToJson(curve);
        text += FormatBinnedCurve(name, curve);
        for (std::size_t b = 0; b < curve.bin_means.size(); ++b) {
          if (!curve.bin_means[b]) continue;
          const double center =
              0.5 * (curve.bin_edges[b] + curve.bin_edges[b + 1]);
          plot += std::string(name) + "," + FormatDouble(center) + "," +
                  FormatDouble(*curve.bin_means[b]) + "\n";
        }
      }
      report["binned"] = binned;
    }
  }

  WriteOutput(config_.out, report.dump(2) + "\n");
  if (!config_.plot_data.empty()) WriteOutput(config_.plot_data, plot);
  if (config_.format == "table") out_ << text;
  out_ << "wrote analysis to " << config_.out << "\n";
  return kExitOk;
}

void AddCommon(CLI::App* sub, RunConfig& config, bool needs_manifest) {
  auto* manifest = sub->add_option("--manifest", config.manifest,
                                   "Dataset manifest (JSON lines)");
  if (needs_manifest) manifest->required();
  sub->add_option("--cache-dir", config.cache_dir,
                  "Annotation cache directory (default: manifest directory)");
  sub->add_option("--seed", config.seed, "Seed for all randomness")
      ->capture_default_str();
  sub->add_flag("--strict", config.strict,
                "Abort on malformed input; exit 3 on partial failure");
  sub->add_flag("!--lenient", config.strict,
                "Skip malformed input and continue (default)");
  sub->add_flag("--force", config.force, "Overwrite existing outputs");
  sub->add_option("--jobs", config.jobs, "Parallel workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--format", config.format, "Console output: lines|table")
      ->check(CLI::IsMember({"lines", "table"}))
      ->capture_default_str();
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  RunConfig config;
  CLI::App app{"Caption detailness metrics and training-data selection"};
  app.name(args.empty() ? "capdetail" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  auto* validate = app.add_subcommand(
      "validate", "Check a manifest and its annotations; exit 1 if invalid");
  AddCommon(validate, config, true);

  auto* annotate = app.add_subcommand(
      "annotate", "Fill in scene graphs, masks and ITM scores via services");
  AddCommon(annotate, config, true);
  annotate->add_option("--out", config.out, "Annotated manifest to write")
      ->required();
  annotate->add_option("--parse-url", config.endpoints.parse_url,
                       "Scene-graph parser service base URL");
  annotate->add_option("--segment-url", config.endpoints.segment_url,
                       "Segmentation service base URL");
  annotate->add_option("--itm-url", config.endpoints.itm_url,
                       "ITM scoring service base URL");
  annotate->add_option("--auth-env", config.endpoints.auth_env,
                       "Environment variable holding a bearer token");
  annotate->add_option("--timeout", config.endpoints.timeout,
                       "Per-request timeout in seconds")
      ->capture_default_str();
  annotate->add_option("--retries", config.endpoints.retries,
                       "Retries per request")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  annotate->add_option("--concurrency", config.endpoints.concurrency,
                       "Max in-flight requests per service")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  annotate->add_option("--backoff-ms", config.endpoints.backoff_ms,
                       "Initial retry backoff")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  auto* score = app.add_subcommand(
      "score", "Compute ICR, AOD, length and detailness per record");
  AddCommon(score, config, true);
  score->add_option("--out", config.out, "Metric report file (JSON lines)")
      ->required();
  score->add_option("--relation-counting", config.relation_counting,
                    "subject_only|both_endpoints")
      ->check(CLI::IsMember({"subject_only", "both_endpoints"}))
      ->capture_default_str();

  auto* filter = app.add_subcommand("filter", "Select a training subset");
  AddCommon(filter, config, true);
  filter->add_option("--out", config.out, "Selection manifest to write")
      ->required();
  filter->add_option("--reports", config.reports, "Metric report file");
  filter
      ->add_option("--strategy", config.strategy,
                   "full|random|length|itm_length|detailness|composite")
      ->check(CLI::IsMember(
          {"full", "random", "length", "itm_length", "detailness", "composite"}))
      ->capture_default_str();
  filter->add_option("--k", config.k, "ITM pre-filter size")
      ->capture_default_str();
  filter->add_option("--t", config.t, "Final subset size")
      ->capture_default_str();
  filter->add_option("--key", config.key,
                     "Composite ranking key, e.g. itm+icr+aod+len");

  auto* sample = app.add_subcommand(
      "sample", "Sample sub-graphs at target ICR/AOD ratios and realize them");
  AddCommon(sample, config, true);
  sample->add_option("--out", config.out, "Variant file (JSON lines)")
      ->required();
  sample->add_option("--spec", config.spec,
                     "Sampling spec file (default: ICR and AOD at "
                     "0.2/0.4/0.6/0.8 +- 0.05)");

  auto* analyze = app.add_subcommand(
      "analyze", "Pearson correlations and binned ITM curves");
  AddCommon(analyze, config, false);
  analyze->add_option("--out", config.out, "Analysis report (JSON)")
      ->required();
  analyze->add_option("--reports", config.reports, "Metric report file");
  analyze->add_flag("--pearson", config.pearson, "Pearson correlations");
  analyze->add_flag("--binned", config.binned, "Binned mean ITM per metric");
  analyze->add_option("--bins", config.bins, "Bin count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze->add_option("--table", config.table,
                      "Ratio/score table to correlate (JSON)");
  analyze->add_option("--plot-data", config.plot_data,
                      "CSV export of plotted series");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  std::string program = "capdetail";
  argv.push_back(args.empty() ? program.c_str() : args[0].c_str());
  for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (CLI::App* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Command command(config, out, err);
  try {
    if (validate->parsed()) return command.Validate();
    if (annotate->parsed()) return command.Annotate();
    if (score->parsed()) return command.Score();
    if (filter->parsed()) return command.Filter();
    if (sample->parsed()) return command.Sample();
    if (analyze->parsed()) return command.Analyze();
  } catch (const UsageError& e) {
    err << "error: " << e.message << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidationFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidationFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace capdetail
