// kcx: K-complex detection toolkit.
//
// Subcommands: synth | features | thresholds | calibrate | detect | eval |
// tune | bench. Structured JSON goes to stdout or --out; logs go to stderr.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kcx/json_io.hpp"
#include "kcx/parallel.hpp"
#include "kcx/record_io.hpp"

namespace fs = std::filesystem;
using kcx::json;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void emit_json(const json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    kcx::detail::save_json_file(j, out_path);
}

json record_info_json(const std::string& path, const kcx::EegRecord& rec) {
  return json{{"path", path},
              {"channels", rec.channel_count()},
              {"sampling_rate_hz", rec.sampling_rate_hz},
              {"duration_s", rec.duration_s()}};
}

// Window flags shared by the feature-based subcommands. Sample-domain flags
// win over the second-domain defaults, which are converted at the record's
// rate by rounding half up.
struct WindowFlags {
  double length_s = 1.024;
  double step_s = 0.1024;
  std::size_t length_samples = 0;  // 0 = derive from seconds
  std::size_t step_samples = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--window-length-s", length_s, "Window length in seconds");
    cmd->add_option("--window-step-s", step_s, "Window step in seconds");
    cmd->add_option("--window-length", length_samples,
                    "Window length in samples (power of two; wins over seconds)");
    cmd->add_option("--window-step", step_samples,
                    "Window step in samples (wins over seconds)");
  }

  kcx::WindowSpec resolve(double sampling_rate_hz) const {
    kcx::WindowSpec w;
    w.length_samples = length_samples > 0
                           ? length_samples
                           : kcx::seconds_to_samples(length_s, sampling_rate_hz);
    w.step_samples =
        step_samples > 0 ? step_samples : kcx::seconds_to_samples(step_s, sampling_rate_hz);
    w.validate();
    return w;
  }
};

struct KbpFlags {
  std::string params_path;
  std::vector<std::pair<std::string, double>> overrides;  // filled from options
  double pt_p1 = -1, pt_p2 = -1, pt_p3 = -1, pt_p4 = -1, pt_s = -1, cutoff = -1;
  int v_t = -1, gap = -1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--params", params_path, "KBP parameter JSON (flags win over file)");
    cmd->add_option("--pt-p1", pt_p1, "p_t for P1");
    cmd->add_option("--pt-p2", pt_p2, "p_t for P2");
    cmd->add_option("--pt-p3", pt_p3, "p_t for P3");
    cmd->add_option("--pt-p4", pt_p4, "p_t for P4");
    cmd->add_option("--pt-s", pt_s, "p_t for S");
    cmd->add_option("--vt", v_t, "channel vote threshold V_t");
    cmd->add_option("--gap-windows", gap, "max unmarked windows bridged per event");
    cmd->add_option("--cutoff-hz", cutoff, "low-pass cutoff for S");
  }

  kcx::KbpParams resolve(const WindowFlags& window, double sampling_rate_hz) const {
    kcx::KbpParams params;
    if (!params_path.empty())
      params = kcx::kbp_params_from_json(kcx::detail::load_json_file(params_path), params);
    else
      params.window = window.resolve(sampling_rate_hz);
    if (window.length_samples > 0 || window.step_samples > 0)
      params.window = window.resolve(sampling_rate_hz);
    if (pt_p1 >= 0) params.p_t_p1 = pt_p1;
    if (pt_p2 >= 0) params.p_t_p2 = pt_p2;
    if (pt_p3 >= 0) params.p_t_p3 = pt_p3;
    if (pt_p4 >= 0) params.p_t_p4 = pt_p4;
    if (pt_s >= 0) params.p_t_s = pt_s;
    if (v_t >= 0) params.v_t = v_t;
    if (gap >= 0) params.gap_windows = gap;
    if (cutoff > 0) params.cutoff_hz = cutoff;
    params.validate();
    return params;
  }
};

int run_synth(const std::string& spec_path, const std::string& out_prefix, int threads) {
  const kcx::SynthSpec spec =
      kcx::synth_spec_from_json(kcx::detail::load_json_file(spec_path));
  const kcx::SynthCorpus corpus = kcx::generate(spec, threads);

  const std::string record_path = out_prefix + ".eegbin";
  const std::string truth_path = out_prefix + ".truth.txt";
  const std::string spec_echo_path = out_prefix + ".spec.json";
  kcx::save_record_binary(corpus.record, record_path);
  kcx::save_annotations(corpus.truth, truth_path);
  kcx::detail::save_json_file(kcx::synth_spec_to_json(spec), spec_echo_path);

  emit_json(json{{"record", record_path},
                 {"truth", truth_path},
                 {"spec_echo", spec_echo_path},
                 {"events", corpus.truth.events.size()},
                 {"channels", corpus.record.channel_count()},
                 {"duration_s", corpus.record.duration_s()},
                 {"tool", kcx::kToolName},
                 {"version", kcx::kVersion}},
            "");
  return 0;
}

int run_features(const std::string& record_path, const WindowFlags& window_flags,
                 double cutoff_hz, const std::string& out_path, int threads) {
  const kcx::EegRecord rec = kcx::load_record(record_path);
  const kcx::WindowSpec window = window_flags.resolve(rec.sampling_rate_hz);
  const auto table =
      kcx::compute_features(rec, window, kcx::default_bands(), cutoff_hz, threads);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw kcx::Error("cannot write " + out_path);
    os = &file;
  }
  char line[512];
  std::snprintf(line, sizeof(line),
                "# tool=%s version=%s subcommand=features record=%s "
                "window_length_samples=%zu window_step_samples=%zu cutoff_hz=%g\n",
                kcx::kToolName, kcx::kVersion, record_path.c_str(),
                window.length_samples, window.step_samples, cutoff_hz);
  *os << line << "channel,window_index,center_time_s,p1,p2,p3,p4,s\n";
  for (std::size_t c = 0; c < rec.channel_count(); ++c)
    for (std::size_t i = 0; i < table.indexing.window_count; ++i) {
      const auto& f = table.frames[c][i];
      std::snprintf(line, sizeof(line), "%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    rec.channel_names[c].c_str(), i, table.indexing.center_time_s(i),
                    f.p1, f.p2, f.p3, f.p4, f.s);
      *os << line;
    }
  return 0;
}

int run_thresholds(const std::string& record_path, const WindowFlags& window_flags,
                   const KbpFlags& kbp_flags, const std::string& out_path,
                   const std::string& hist_path, const std::string& hist_feature,
                   const std::string& hist_channel, std::size_t hist_bins, int threads) {
  const kcx::EegRecord rec = kcx::load_record(record_path);
  const kcx::KbpParams params = kbp_flags.resolve(window_flags, rec.sampling_rate_hz);
  const auto table =
      kcx::compute_features(rec, params.window, params.bands, params.cutoff_hz, threads);
  const auto sorted = kcx::sort_features(table, threads);
  const auto thresholds = kcx::compute_thresholds(sorted, params.p_values());

  json channels = json::object();
  for (std::size_t c = 0; c < rec.channel_count(); ++c) {
    json t;
    for (std::size_t f = 0; f < 5; ++f)
      t[std::string(kcx::kFeatureNames[f])] = thresholds[c].t[f].value;
    channels[rec.channel_names[c]] = t;
  }
  emit_json(json{{"thresholds", channels},
                 {"params", kcx::kbp_params_to_json(params)},
                 {"record", record_info_json(record_path, rec)},
                 {"tool", kcx::kToolName},
                 {"version", kcx::kVersion}},
            out_path);

  if (!hist_path.empty()) {
    std::size_t feature = 5;
    for (std::size_t f = 0; f < 5; ++f)
      if (hist_feature == kcx::kFeatureNames[f]) feature = f;
    if (feature == 5)
      throw kcx::Error("unknown histogram feature \"" + hist_feature + "\"");
    std::size_t channel = rec.channel_count();
    for (std::size_t c = 0; c < rec.channel_count(); ++c)
      if (hist_channel.empty() ? c == 0 : rec.channel_names[c] == hist_channel)
        channel = c;
    if (channel == rec.channel_count())
      throw kcx::Error("histogram channel \"" + hist_channel + "\" not found");
    const auto h = kcx::make_histogram(sorted.per_channel[channel][feature], hist_bins);
    std::ofstream hf(hist_path);
    if (!hf) throw kcx::Error("cannot write " + hist_path);
    hf << "bin_left,count,cumulative_fraction\n";
    char line[128];
    for (std::size_t b = 0; b < h.bin_left.size(); ++b) {
      std::snprintf(line, sizeof(line), "%.17g,%zu,%.17g\n", h.bin_left[b], h.count[b],
                    h.cumulative_fraction[b]);
      hf << line;
    }
  }
  return 0;
}

int run_calibrate(const std::string& record_path, const std::string& truth_path,
                  const WindowFlags& window_flags, std::vector<std::size_t> bins,
                  std::vector<double> target_hz, double log_base,
                  const std::vector<std::string>& channels, const std::string& out_path,
                  int threads) {
  const kcx::EegRecord rec = kcx::load_record(record_path);
  const kcx::AnnotationSet truth = kcx::load_annotations(truth_path);
  const kcx::WindowSpec window = window_flags.resolve(rec.sampling_rate_hz);

  kcx::HarmonicSpaceSpec spec;
  spec.log_base = log_base;
  if (!bins.empty())
    spec.harmonic_bins = std::move(bins);
  else if (!target_hz.empty())
    spec.harmonic_bins =
        kcx::bins_nearest_hz(target_hz, rec.sampling_rate_hz, window.length_samples);

  const kcx::BoxStore store =
      kcx::calibrate_hcm(rec, truth, spec, window, channels, threads, record_path);
  if (store.skipped_annotations > 0)
    std::cerr << "warning: " << store.skipped_annotations
              << " annotation(s) outside the window center range were skipped\n";
  emit_json(kcx::box_store_to_json(store), out_path);
  return 0;
}

int run_detect(const std::string& algo, const std::string& record_path,
               const WindowFlags& window_flags, const KbpFlags& kbp_flags,
               const std::string& store_path, double hcm_pt, int hcm_vt, int hcm_gap,
               const std::string& out_path, int threads) {
  const kcx::EegRecord rec = kcx::load_record(record_path);
  if (algo == "kbp") {
    const kcx::KbpParams params = kbp_flags.resolve(window_flags, rec.sampling_rate_hz);
    const kcx::KbpResult res = kcx::detect_kbp(rec, params, threads);
    json out = kcx::detections_to_json(res.detections, kcx::kbp_params_to_json(params),
                                       params.window);
    out["algo"] = "kbp";
    out["record"] = record_info_json(record_path, rec);
    emit_json(out, out_path);
    return 0;
  }
  if (algo == "hcm") {
    if (store_path.empty()) throw kcx::Error("--algo hcm requires --store");
    const kcx::BoxStore store =
        kcx::box_store_from_json(kcx::detail::load_json_file(store_path));
    kcx::HcmParams params;
    params.p_t = hcm_pt;
    params.v_t = hcm_vt;
    params.gap_windows = hcm_gap;
    const kcx::HcmResult res = kcx::detect_hcm(rec, store, params, threads);
    json echo{{"p_t", params.p_t},
              {"v_t", params.v_t},
              {"gap_windows", params.gap_windows},
              {"store", store_path},
              {"bins", store.spec.harmonic_bins},
              {"log_base", store.spec.log_base}};
    json out = kcx::detections_to_json(res.detections, echo, store.window);
    out["algo"] = "hcm";
    out["record"] = record_info_json(record_path, rec);
    emit_json(out, out_path);
    return 0;
  }
  throw kcx::Error("unknown algorithm \"" + algo + "\" (expected kbp or hcm)");
}

int run_eval(const std::string& truth_path, const std::string& detections_path,
             double tolerance_s, double duration_s, const std::string& out_path) {
  const kcx::AnnotationSet truth = kcx::load_annotations(truth_path);

  kcx::AnnotationSet detections;
  double file_duration = 0.0;
  if (detections_path.size() > 5 &&
      detections_path.compare(detections_path.size() - 5, 5, ".json") == 0) {
    const json j = kcx::detail::load_json_file(detections_path);
    detections = kcx::detections_from_json(j).to_annotations();
    if (j.contains("record") && j["record"].contains("duration_s"))
      file_duration = j["record"]["duration_s"].get<double>();
  } else {
    detections = kcx::load_annotations(detections_path);
  }

  const double duration = duration_s > 0.0 ? duration_s : file_duration;
  if (!(duration > 0.0))
    throw kcx::Error(
        "record duration unknown: pass --duration or evaluate detections JSON "
        "that carries record metadata");

  const kcx::MatchSpec spec{tolerance_s, 1.0};
  const kcx::ConfusionCounts counts = kcx::evaluate(duration, detections, truth, spec);
  json out = kcx::eval_to_json(counts, spec);
  out["duration_s"] = duration;
  emit_json(out, out_path);
  return 0;
}

int run_tune(const std::string& manifest_path, const std::string& grid_path,
             const WindowFlags& window_flags, const KbpFlags& kbp_flags, double min_tpr,
             double tolerance_s, bool trace, const std::string& out_path, int threads) {
  const auto manifest =
      kcx::manifest_from_json(kcx::detail::load_json_file(manifest_path));
  const fs::path base_dir = fs::path(manifest_path).parent_path();

  std::vector<kcx::DatasetItem> dataset;
  for (const auto& [record_rel, truth_rel] : manifest) {
    kcx::DatasetItem item;
    const auto rec_path = (base_dir / record_rel).string();
    item.record = kcx::load_record(rec_path);
    item.truth = kcx::load_annotations((base_dir / truth_rel).string());
    item.id = record_rel;
    dataset.push_back(std::move(item));
  }

  const kcx::ParamGrid grid =
      grid_path.empty() ? kcx::default_grid()
                        : kcx::grid_from_json(kcx::detail::load_json_file(grid_path));
  const kcx::KbpParams base =
      kbp_flags.resolve(window_flags, dataset.front().record.sampling_rate_hz);
  std::cerr << "tuning over " << grid.size() << " combinations on " << dataset.size()
            << " record(s)\n";

  const kcx::TuneResult result = kcx::grid_search(dataset, grid, base, {tolerance_s, 1.0},
                                                  min_tpr, threads, trace);
  json out = kcx::tune_result_to_json(result, grid, trace);
  out["dataset"] = json::array();
  for (const auto& item : dataset) out["dataset"].push_back(item.id);
  out["tolerance_s"] = tolerance_s;
  emit_json(out, out_path);
  return 0;
}

int run_bench(const std::string& record_path, const WindowFlags& window_flags,
              const KbpFlags& kbp_flags, int reps, const std::string& out_path,
              int threads) {
  if (reps < 1) throw kcx::Error("repetitions must be >= 1");
  const double t_load0 = now_s();
  const kcx::EegRecord rec = kcx::load_record(record_path);
  const double load_s = now_s() - t_load0;
  const kcx::KbpParams params = kbp_flags.resolve(window_flags, rec.sampling_rate_hz);

  std::vector<double> features_s, thresholds_s, fusion_s, vote_s, total_s;
  std::size_t events = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const double t0 = now_s();
    const auto table =
        kcx::compute_features(rec, params.window, params.bands, params.cutoff_hz, threads);
    const double t1 = now_s();
    const auto sorted = kcx::sort_features(table, threads);
    const auto thresholds = kcx::compute_thresholds(sorted, params.p_values());
    const double t2 = now_s();
    std::vector<std::vector<std::uint8_t>> flags(table.channel_count());
    for (std::size_t c = 0; c < table.channel_count(); ++c)
      flags[c] = kcx::channel_flags(table.frames[c], thresholds[c]);
    const double t3 = now_s();
    const auto votes = kcx::vote_counts(flags);
    const auto marks = kcx::marks_from_votes(votes, params.v_t);
    const auto detections =
        kcx::coalesce(marks, votes, table.indexing, params.gap_windows);
    const double t4 = now_s();
    events = detections.events.size();
    features_s.push_back(t1 - t0);
    thresholds_s.push_back(t2 - t1);
    fusion_s.push_back(t3 - t2);
    vote_s.push_back(t4 - t3);
    total_s.push_back(t4 - t0);
  }

  emit_json(json{{"record", record_info_json(record_path, rec)},
                 {"params", kcx::kbp_params_to_json(params)},
                 {"reps", reps},
                 {"threads", kcx::resolve_threads(threads)},
                 {"events", events},
                 {"stages_s", {{"load", load_s},
                               {"features", median(features_s)},
                               {"thresholds", median(thresholds_s)},
                               {"fusion", median(fusion_s)},
                               {"vote", median(vote_s)}}},
                 {"end_to_end_ex_load_s", median(total_s)},
                 {"tool", kcx::kToolName},
                 {"version", kcx::kVersion}},
            out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kcx: FFT-based K-complex detection toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = KCX_THREADS env or hardware)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic EEG corpus");
  std::string synth_spec_path, synth_out;
  synth->add_option("--spec", synth_spec_path, "Synthesis spec JSON")->required();
  synth->add_option("--out", synth_out, "Output prefix")->required();

  // features
  auto* features = app.add_subcommand("features", "Dump per-window feature frames as CSV");
  std::string feat_record, feat_out;
  WindowFlags feat_window;
  double feat_cutoff = kcx::kDefaultCutoffHz;
  features->add_option("--record", feat_record, "Input record")->required();
  features->add_option("--out", feat_out, "Output CSV (default stdout)");
  features->add_option("--cutoff-hz", feat_cutoff, "Low-pass cutoff for S");
  feat_window.add_to(features);

  // thresholds
  auto* thresholds = app.add_subcommand("thresholds", "Per-channel feature thresholds");
  std::string thr_record, thr_out, thr_hist, thr_hist_feature = "s", thr_hist_channel;
  std::size_t thr_hist_bins = 50;
  WindowFlags thr_window;
  KbpFlags thr_kbp;
  thresholds->add_option("--record", thr_record, "Input record")->required();
  thresholds->add_option("--out", thr_out, "Output JSON (default stdout)");
  thresholds->add_option("--histogram", thr_hist, "Optional histogram CSV path");
  thresholds->add_option("--hist-feature", thr_hist_feature, "Histogram feature (p1..p4, s)");
  thresholds->add_option("--hist-channel", thr_hist_channel, "Histogram channel name");
  thresholds->add_option("--hist-bins", thr_hist_bins, "Histogram bin count");
  thr_window.add_to(thresholds);
  thr_kbp.add_to(thresholds);

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the HCM box store");
  std::string cal_algo = "hcm", cal_record, cal_truth, cal_out;
  std::vector<std::size_t> cal_bins;
  std::vector<double> cal_hz;
  std::vector<std::string> cal_channels;
  double cal_log_base = 2.0;
  WindowFlags cal_window;
  calibrate->add_option("--algo", cal_algo, "Algorithm (hcm)");
  calibrate->add_option("--record", cal_record, "Calibration record")->required();
  calibrate->add_option("--truth", cal_truth, "Annotation file")->required();
  calibrate->add_option("--out", cal_out, "Output store JSON (default stdout)");
  calibrate->add_option("--bins", cal_bins, "Explicit harmonic bin indices")
      ->delimiter(',');
  calibrate->add_option("--target-hz", cal_hz, "Harmonic target frequencies in Hz")
      ->delimiter(',');
  calibrate->add_option("--log-base", cal_log_base, "Box growth base (> 1)");
  calibrate->add_option("--channels", cal_channels, "Restrict calibration to channels")
      ->delimiter(',');
  cal_window.add_to(calibrate);

  // detect
  auto* detect = app.add_subcommand("detect", "Run a detector on a record");
  std::string det_algo = "kbp", det_record, det_store, det_out;
  double det_pt = 0.80;
  int det_vt = 0, det_gap = 4;
  WindowFlags det_window;
  KbpFlags det_kbp;
  detect->add_option("--algo", det_algo, "Algorithm (kbp or hcm)");
  detect->add_option("--record", det_record, "Input record")->required();
  detect->add_option("--store", det_store, "HCM box store JSON");
  detect->add_option("--pt", det_pt, "HCM power-condition p_t (<= 0 disables)");
  detect->add_option("--hcm-vt", det_vt, "HCM vote threshold");
  detect->add_option("--hcm-gap-windows", det_gap, "HCM coalescing gap");
  detect->add_option("--out", det_out, "Output detections JSON (default stdout)");
  det_window.add_to(detect);
  det_kbp.add_to(detect);

  // eval
  auto* eval = app.add_subcommand("eval", "Score detections against truth");
  std::string eval_truth, eval_detections, eval_out;
  double eval_tolerance = 0.5, eval_duration = 0.0;
  eval->add_option("--truth", eval_truth, "Truth annotations")->required();
  eval->add_option("--detections", eval_detections,
                   "Detections JSON or annotation text")->required();
  eval->add_option("--tolerance", eval_tolerance, "Match tolerance in seconds");
  eval->add_option("--duration", eval_duration,
                   "Record duration in seconds (else taken from detections JSON)");
  eval->add_option("--out", eval_out, "Output JSON (default stdout)");

  // tune
  auto* tune = app.add_subcommand("tune", "Brute-force KBP parameter search");
  std::string tune_manifest, tune_grid, tune_out;
  double tune_min_tpr = 99.0, tune_tolerance = 0.5;
  bool tune_trace = false;
  WindowFlags tune_window;
  KbpFlags tune_kbp;
  tune->add_option("--dataset", tune_manifest, "Manifest JSON of record/annotation pairs")
      ->required();
  tune->add_option("--grid", tune_grid, "Grid JSON (default: built-in coarse grid)");
  tune->add_option("--min-tpr", tune_min_tpr, "TPR constraint in percent");
  tune->add_option("--tolerance", tune_tolerance, "Match tolerance in seconds");
  tune->add_flag("--trace", tune_trace, "Record every grid point in the output");
  tune->add_option("--out", tune_out, "Output JSON (default stdout)");
  tune_window.add_to(tune);
  tune_kbp.add_to(tune);

  // bench
  auto* bench = app.add_subcommand("bench", "Time the KBP pipeline stages");
  std::string bench_record, bench_out;
  int bench_reps = 5;
  WindowFlags bench_window;
  KbpFlags bench_kbp;
  bench->add_option("--record", bench_record, "Input record")->required();
  bench->add_option("--reps", bench_reps, "Repetitions (median reported)");
  bench->add_option("--out", bench_out, "Output JSON (default stdout)");
  bench_window.add_to(bench);
  bench_kbp.add_to(bench);

  // let the global --threads appear after a subcommand too
  for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(synth)) return run_synth(synth_spec_path, synth_out, threads);
    if (app.got_subcommand(features))
      return run_features(feat_record, feat_window, feat_cutoff, feat_out, threads);
    if (app.got_subcommand(thresholds))
      return run_thresholds(thr_record, thr_window, thr_kbp, thr_out, thr_hist,
                            thr_hist_feature, thr_hist_channel, thr_hist_bins, threads);
    if (app.got_subcommand(calibrate)) {
      if (cal_algo != "hcm")
        throw kcx::Error("unknown calibration algorithm \"" + cal_algo + "\"");
      return run_calibrate(cal_record, cal_truth, cal_window, cal_bins, cal_hz,
                           cal_log_base, cal_channels, cal_out, threads);
    }
    if (app.got_subcommand(detect))
      return run_detect(det_algo, det_record, det_window, det_kbp, det_store, det_pt,
                        det_vt, det_gap, det_out, threads);
    if (app.got_subcommand(eval))
      return run_eval(eval_truth, eval_detections, eval_tolerance, eval_duration, eval_out);
    if (app.got_subcommand(tune))
      return run_tune(tune_manifest, tune_grid, tune_window, tune_kbp, tune_min_tpr,
                      tune_tolerance, tune_trace, tune_out, threads);
    if (app.got_subcommand(bench))
      return run_bench(bench_record, bench_window, bench_kbp, bench_reps, bench_out,
                       threads);
  } catch (const kcx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
