#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kcx/hcm.hpp"
#include "kcx/kbp.hpp"
#include "kcx/metrics.hpp"
#include "kcx/synth.hpp"
#include "kcx/tuner.hpp"
#include "kcx/version.hpp"

namespace kcx {

using nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                                const std::string& context) {
  if (!j.is_object()) throw Error(context + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw Error(context + ": unknown key \"" + key + "\"");
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open JSON file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    throw Error("malformed JSON in " + path + ": " + e.what());
  }
}

inline void save_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write JSON file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace detail

// --------------------------------------------------------------------------
// KBP parameters (params.json)
// --------------------------------------------------------------------------

inline json kbp_params_to_json(const KbpParams& p) {
  json bands = json::array();
  for (const auto& b : p.bands) bands.push_back({b.lo_hz, b.hi_hz});
  return json{{"p_t_p1", p.p_t_p1},
              {"p_t_p2", p.p_t_p2},
              {"p_t_p3", p.p_t_p3},
              {"p_t_p4", p.p_t_p4},
              {"p_t_s", p.p_t_s},
              {"v_t", p.v_t},
              {"window", {{"length_samples", p.window.length_samples},
                          {"step_samples", p.window.step_samples}}},
              {"bands", bands},
              {"cutoff_hz", p.cutoff_hz},
              {"gap_windows", p.gap_windows}};
}

inline WindowSpec window_from_json(const json& j, const std::string& context) {
  detail::reject_unknown_keys(j, {"length_samples", "step_samples"}, context);
  WindowSpec w;
  if (j.contains("length_samples")) w.length_samples = j["length_samples"].get<std::size_t>();
  if (j.contains("step_samples")) w.step_samples = j["step_samples"].get<std::size_t>();
  return w;
}

inline KbpParams kbp_params_from_json(const json& j, KbpParams base = {}) {
  detail::reject_unknown_keys(j,
                              {"p_t_p1", "p_t_p2", "p_t_p3", "p_t_p4", "p_t_s", "v_t",
                               "window", "bands", "cutoff_hz", "gap_windows"},
                              "params");
  if (j.contains("p_t_p1")) base.p_t_p1 = j["p_t_p1"].get<double>();
  if (j.contains("p_t_p2")) base.p_t_p2 = j["p_t_p2"].get<double>();
  if (j.contains("p_t_p3")) base.p_t_p3 = j["p_t_p3"].get<double>();
  if (j.contains("p_t_p4")) base.p_t_p4 = j["p_t_p4"].get<double>();
  if (j.contains("p_t_s")) base.p_t_s = j["p_t_s"].get<double>();
  if (j.contains("v_t")) base.v_t = j["v_t"].get<int>();
  if (j.contains("window")) base.window = window_from_json(j["window"], "params.window");
  if (j.contains("bands")) {
    const auto& arr = j["bands"];
    if (!arr.is_array() || arr.size() != 4)
      throw Error("params.bands must be an array of 4 [lo, hi] pairs");
    for (std::size_t b = 0; b < 4; ++b) {
      if (!arr[b].is_array() || arr[b].size() != 2)
        throw Error("params.bands entries must be [lo, hi] pairs");
      base.bands[b] = BandDef{arr[b][0].get<double>(), arr[b][1].get<double>()};
    }
  }
  if (j.contains("cutoff_hz")) base.cutoff_hz = j["cutoff_hz"].get<double>();
  if (j.contains("gap_windows")) base.gap_windows = j["gap_windows"].get<int>();
  base.validate();
  return base;
}

// --------------------------------------------------------------------------
// Detections (detections.json)
// --------------------------------------------------------------------------

inline json detections_to_json(const Detections& d, const json& params_echo,
                               const WindowSpec& realized_window) {
  json events = json::array();
  for (const auto& e : d.events) events.push_back({{"t", e.t}, {"support", e.support}});
  return json{{"events", events},
              {"params", params_echo},
              {"realized_window", {{"length_samples", realized_window.length_samples},
                                   {"step_samples", realized_window.step_samples}}},
              {"tool", kToolName},
              {"version", kVersion}};
}

inline Detections detections_from_json(const json& j) {
  if (!j.contains("events") || !j["events"].is_array())
    throw Error("detections JSON: missing \"events\" array");
  Detections d;
  for (const auto& e : j["events"]) {
    Detections::Event ev;
    ev.t = e.at("t").get<double>();
    ev.support = e.value("support", 0);
    d.events.push_back(ev);
  }
  return d;
}

// --------------------------------------------------------------------------
// HCM box store (store.json)
// --------------------------------------------------------------------------

inline json box_store_to_json(const BoxStore& store) {
  json boxes = json::array();
  for (const auto& b : store.boxes) boxes.push_back(b.coords);
  return json{{"spec", {{"bins", store.spec.harmonic_bins},
                        {"log_base", store.spec.log_base},
                        {"linear_floor", store.spec.linear_floor},
                        {"window", {{"length_samples", store.window.length_samples},
                                    {"step_samples", store.window.step_samples}}}}},
              {"boxes", boxes},
              {"provenance", {{"records", store.record_ids},
                              {"skipped_annotations", store.skipped_annotations},
                              {"channel_subset", store.channel_subset},
                              {"tool", kToolName},
                              {"version", kVersion}}}};
}

inline BoxStore box_store_from_json(const json& j) {
  BoxStore store;
  const auto& spec = j.at("spec");
  store.spec.harmonic_bins = spec.at("bins").get<std::vector<std::size_t>>();
  store.spec.log_base = spec.at("log_base").get<double>();
  store.spec.linear_floor = spec.at("linear_floor").get<std::vector<double>>();
  store.window = window_from_json(spec.at("window"), "store.spec.window");
  for (const auto& b : j.at("boxes")) {
    BoxIndex idx;
    idx.coords = b.get<std::vector<std::uint32_t>>();
    if (idx.coords.size() != store.spec.dimensions())
      throw Error("store box dimension mismatch");
    store.boxes.insert(std::move(idx));
  }
  if (j.contains("provenance")) {
    const auto& prov = j["provenance"];
    if (prov.contains("records"))
      store.record_ids = prov["records"].get<std::vector<std::string>>();
    if (prov.contains("skipped_annotations"))
      store.skipped_annotations = prov["skipped_annotations"].get<std::size_t>();
    if (prov.contains("channel_subset"))
      store.channel_subset = prov["channel_subset"].get<std::vector<std::string>>();
  }
  return store;
}

// --------------------------------------------------------------------------
// Synthesis spec (spec.json)
// --------------------------------------------------------------------------

inline json synth_spec_to_json(const SynthSpec& s) {
  const char* kind = s.background.noise_kind == BackgroundSpec::Kind::kPink ? "pink" : "white";
  const char* pol = s.events.template_spec.polarity == TemplateSpec::Polarity::kNeg ? "neg"
                    : s.events.template_spec.polarity == TemplateSpec::Polarity::kPos ? "pos"
                                                                                      : "random";
  return json{{"seed", s.seed},
              {"duration_s", s.duration_s},
              {"sampling_rate_hz", s.sampling_rate_hz},
              {"channel_count", s.channel_count},
              {"background", {{"noise_kind", kind}, {"rms_uv", s.background.rms_uv}}},
              {"events",
               {{"count", s.events.count},
                {"template", {{"duration_s", s.events.template_spec.duration_s},
                              {"peak_to_trough_uv", s.events.template_spec.peak_to_trough_uv},
                              {"polarity", pol}}},
                {"min_separation_s", s.events.min_separation_s},
                {"channel_visibility", s.events.channel_visibility}}}};
}

inline SynthSpec synth_spec_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"seed", "duration_s", "sampling_rate_hz", "channel_count",
                               "background", "events"},
                              "synth spec");
  SynthSpec s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.duration_s = j.at("duration_s").get<double>();
  s.sampling_rate_hz = j.at("sampling_rate_hz").get<double>();
  s.channel_count = j.at("channel_count").get<std::size_t>();
  if (j.contains("background")) {
    const auto& bg = j["background"];
    detail::reject_unknown_keys(bg, {"noise_kind", "rms_uv"}, "synth spec background");
    if (bg.contains("noise_kind")) {
      const auto kind = bg["noise_kind"].get<std::string>();
      if (kind == "pink") s.background.noise_kind = BackgroundSpec::Kind::kPink;
      else if (kind == "white") s.background.noise_kind = BackgroundSpec::Kind::kWhite;
      else throw Error("noise_kind must be \"pink\" or \"white\"");
    }
    if (bg.contains("rms_uv")) s.background.rms_uv = bg["rms_uv"].get<double>();
  }
  if (j.contains("events")) {
    const auto& ev = j["events"];
    detail::reject_unknown_keys(
        ev, {"count", "template", "min_separation_s", "channel_visibility"},
        "synth spec events");
    s.events.count = ev.at("count").get<std::size_t>();
    if (ev.contains("template")) {
      const auto& tpl = ev["template"];
      detail::reject_unknown_keys(tpl, {"duration_s", "peak_to_trough_uv", "polarity"},
                                  "synth spec template");
      if (tpl.contains("duration_s"))
        s.events.template_spec.duration_s = tpl["duration_s"].get<double>();
      if (tpl.contains("peak_to_trough_uv"))
        s.events.template_spec.peak_to_trough_uv = tpl["peak_to_trough_uv"].get<double>();
      if (tpl.contains("polarity")) {
        const auto pol = tpl["polarity"].get<std::string>();
        if (pol == "neg") s.events.template_spec.polarity = TemplateSpec::Polarity::kNeg;
        else if (pol == "pos") s.events.template_spec.polarity = TemplateSpec::Polarity::kPos;
        else if (pol == "random")
          s.events.template_spec.polarity = TemplateSpec::Polarity::kRandom;
        else throw Error("polarity must be \"neg\", \"pos\" or \"random\"");
      }
    }
    if (ev.contains("min_separation_s"))
      s.events.min_separation_s = ev["min_separation_s"].get<double>();
    if (ev.contains("channel_visibility"))
      s.events.channel_visibility = ev["channel_visibility"].get<double>();
  }
  s.validate();
  return s;
}

// --------------------------------------------------------------------------
// Tuning inputs and result (manifest.json, grid.json, tune.json)
// --------------------------------------------------------------------------

inline std::vector<std::pair<std::string, std::string>> manifest_from_json(const json& j) {
  std::vector<std::pair<std::string, std::string>> items;
  const auto& arr = j.is_array() ? j : j.at("dataset");
  for (const auto& item : arr) {
    detail::reject_unknown_keys(item, {"record", "annotations"}, "manifest entry");
    items.emplace_back(item.at("record").get<std::string>(),
                       item.at("annotations").get<std::string>());
  }
  if (items.empty()) throw Error("manifest lists no records");
  return items;
}

inline ParamGrid grid_from_json(const json& j) {
  detail::reject_unknown_keys(j, {"p1", "p2", "p3", "p4", "s", "v_t"}, "grid");
  ParamGrid grid;
  const std::array<const char*, 5> keys = {"p1", "p2", "p3", "p4", "s"};
  for (std::size_t f = 0; f < 5; ++f)
    grid.p[f] = j.at(keys[f]).get<std::vector<double>>();
  grid.v_t = j.at("v_t").get<std::vector<int>>();
  grid.validate();
  return grid;
}

inline json grid_to_json(const ParamGrid& grid) {
  return json{{"p1", grid.p[0]}, {"p2", grid.p[1]}, {"p3", grid.p[2]},
              {"p4", grid.p[3]}, {"s", grid.p[4]},  {"v_t", grid.v_t}};
}

inline json counts_to_json(const ConfusionCounts& c) {
  return json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

inline json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json tune_result_to_json(const TuneResult& r, const ParamGrid& grid,
                                bool include_trace) {
  json out{{"feasible", r.feasible},
           {"best_params", kbp_params_to_json(r.best)},
           {"best_index", r.best_index},
           {"achieved", {{"tpr_pct", optional_to_json(r.tpr_pct)},
                         {"ppv_pct", optional_to_json(r.ppv_pct)},
                         {"fpr_pct", optional_to_json(r.fpr_pct)}}},
           {"counts", counts_to_json(r.counts)},
           {"evaluated_count", r.evaluated_count},
           {"constraint_tpr_pct", r.constraint_tpr_pct},
           {"grid", grid_to_json(grid)},
           {"tool", kToolName},
           {"version", kVersion}};
  if (include_trace) {
    json trace = json::array();
    for (const auto& e : r.trace) {
      trace.push_back({{"index", e.index},
                       {"p", e.p},
                       {"v_t", e.v_t},
                       {"counts", counts_to_json(e.counts)},
                       {"tpr_pct", optional_to_json(e.tpr)},
                       {"ppv_pct", optional_to_json(e.ppv)},
                       {"fpr_pct", optional_to_json(e.fpr)}});
    }
    out["trace"] = std::move(trace);
  }
  return out;
}

// --------------------------------------------------------------------------
// Evaluation output
// --------------------------------------------------------------------------

inline json eval_to_json(const ConfusionCounts& c, const MatchSpec& spec) {
  return json{{"tp", c.tp},
              {"fp", c.fp},
              {"fn", c.fn},
              {"tn", c.tn},
              {"tpr_pct", optional_to_json(tpr_pct(c))},
              {"fpr_pct", optional_to_json(fpr_pct(c))},
              {"ppv_pct", optional_to_json(ppv_pct(c))},
              {"tolerance_s", spec.tolerance_s},
              {"tn_interval_s", spec.tn_interval_s},
              {"tool", kToolName},
              {"version", kVersion}};
}

}  // namespace kcx
