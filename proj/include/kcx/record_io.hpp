#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kcx/record.hpp"

namespace kcx {

// ---------------------------------------------------------------------------
// Record format A (debug): <name>.csv, one column per channel, first row
// channel names; sidecar <name>.json with sampling_rate_hz and channel names.
// Record format B (bulk): <name>.eegbin, layout:
//   magic "KCX1" | u32 channel_count | u64 samples_per_channel
//   | f64 sampling_rate_hz | per channel: u32 name_bytes + UTF-8 name
//   | channel-major f32 samples
// All integers and floats little-endian.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string sidecar_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  return csv_path.substr(0, dot) + ".json";
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

template <class T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T read_le(std::istream& is, std::uint64_t& offset, const char* what) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is)
    throw Error(std::string("truncated file while reading ") + what +
                " at byte offset " + std::to_string(offset));
  offset += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

inline EegRecord load_record_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open record file: " + path);

  const std::string side = detail::sidecar_path(path);
  std::ifstream sidein(side);
  if (!sidein) throw Error("cannot open sidecar file: " + side);
  nlohmann::json meta;
  try {
    sidein >> meta;
  } catch (const std::exception& e) {
    throw Error("malformed sidecar JSON " + side + ": " + e.what());
  }
  if (!meta.contains("sampling_rate_hz") || !meta["sampling_rate_hz"].is_number())
    throw Error(side + ": missing numeric field \"sampling_rate_hz\"");
  if (!meta.contains("channels") || !meta["channels"].is_array())
    throw Error(side + ": missing array field \"channels\"");
  const double rate = meta["sampling_rate_hz"].get<double>();
  if (!(rate > 0.0)) throw Error(side + ": sampling rate must be positive");
  std::vector<std::string> declared;
  for (const auto& name : meta["channels"]) declared.push_back(name.get<std::string>());

  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty file, expected header row");
  const auto header = detail::split_csv_line(line);
  if (header.size() != declared.size())
    throw Error(path + ": channel count mismatch (sidecar declares " +
                std::to_string(declared.size()) + " channels, CSV has " +
                std::to_string(header.size()) + " columns)");
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] != declared[c])
      throw Error(path + ": header column " + std::to_string(c + 1) + " is \"" +
                  header[c] + "\" but sidecar declares \"" + declared[c] + "\"");

  EegRecord rec;
  rec.channel_names = declared;
  rec.sampling_rate_hz = rate;
  rec.samples.resize(declared.size());

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != declared.size())
      throw Error(path + ":" + std::to_string(lineno) + ": expected " +
                  std::to_string(declared.size()) + " fields, got " +
                  std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      char* endp = nullptr;
      const double v = std::strtod(fields[c].c_str(), &endp);
      if (endp == fields[c].c_str() || *endp != '\0' || !std::isfinite(v))
        throw Error(path + ":" + std::to_string(lineno) + ": bad sample value \"" +
                    fields[c] + "\"");
      rec.samples[c].push_back(v);
    }
  }
  rec.validate();
  return rec;
}

inline void save_record_csv(const EegRecord& rec, const std::string& path) {
  rec.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot write record file: " + path);
  for (std::size_t c = 0; c < rec.channel_names.size(); ++c)
    out << (c ? "," : "") << rec.channel_names[c];
  out << "\n";
  out << std::setprecision(17);
  const std::size_t n = rec.samples_per_channel();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < rec.samples.size(); ++c)
      out << (c ? "," : "") << rec.samples[c][i];
    out << "\n";
  }
  nlohmann::json meta{{"sampling_rate_hz", rec.sampling_rate_hz},
                      {"channels", rec.channel_names}};
  std::ofstream side(detail::sidecar_path(path));
  if (!side) throw Error("cannot write sidecar file: " + detail::sidecar_path(path));
  side << meta.dump(2) << "\n";
}

inline EegRecord load_record_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open record file: " + path);
  std::uint64_t off = 0;

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "KCX1", 4) != 0)
    throw Error(path + ": bad magic at byte offset 0, expected \"KCX1\"");
  off = 4;

  const auto channels = detail::read_le<std::uint32_t>(in, off, "channel count");
  const auto per_channel = detail::read_le<std::uint64_t>(in, off, "sample count");
  const auto rate = detail::read_le<double>(in, off, "sampling rate");
  if (channels == 0) throw Error(path + ": channel count is zero");
  if (!(rate > 0.0))
    throw Error(path + ": non-positive sampling rate at byte offset 16");

  EegRecord rec;
  rec.sampling_rate_hz = rate;
  for (std::uint32_t c = 0; c < channels; ++c) {
    const auto len = detail::read_le<std::uint32_t>(in, off, "channel name length");
    if (len > 4096)
      throw Error(path + ": unreasonable channel name length at byte offset " +
                  std::to_string(off - 4));
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw Error(path + ": truncated channel name at byte offset " +
                         std::to_string(off));
    off += len;
    rec.channel_names.push_back(std::move(name));
  }

  rec.samples.assign(channels, {});
  std::vector<float> buf(per_channel);
  for (std::uint32_t c = 0; c < channels; ++c) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(per_channel * sizeof(float)));
    if (!in)
      throw Error(path + ": truncated sample payload for channel " +
                  std::to_string(c) + " at byte offset " + std::to_string(off));
    off += per_channel * sizeof(float);
    auto& dst = rec.samples[c];
    dst.resize(per_channel);
    for (std::uint64_t i = 0; i < per_channel; ++i) {
      if (!std::isfinite(buf[i]))
        throw Error(path + ": non-finite sample in channel " + std::to_string(c));
      dst[i] = static_cast<double>(buf[i]);
    }
  }
  rec.validate();
  return rec;
}

inline void save_record_binary(const EegRecord& rec, const std::string& path) {
  rec.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write record file: " + path);
  out.write("KCX1", 4);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.channel_count()));
  detail::write_le<std::uint64_t>(out, rec.samples_per_channel());
  detail::write_le<double>(out, rec.sampling_rate_hz);
  for (const auto& name : rec.channel_names) {
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  std::vector<float> buf;
  for (const auto& ch : rec.samples) {
    buf.assign(ch.begin(), ch.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw Error("write failed: " + path);
}

/// Dispatch on extension: .csv -> format A, .eegbin -> format B.
inline EegRecord load_record(const std::string& path) {
  if (detail::ends_with(path, ".csv")) return load_record_csv(path);
  if (detail::ends_with(path, ".eegbin")) return load_record_binary(path);
  throw Error("unknown record format (expected .csv or .eegbin): " + path);
}

// ---------------------------------------------------------------------------
// Annotation format: plain text, one event time in seconds per line,
// "#" starts a comment. Output is sorted and deduplicated.
// ---------------------------------------------------------------------------

inline AnnotationSet load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open annotation file: " + path);
  AnnotationSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(b, e - b + 1);
    char* endp = nullptr;
    const double t = std::strtod(tok.c_str(), &endp);
    if (endp == tok.c_str() || *endp != '\0' || !std::isfinite(t))
      throw Error(path + ":" + std::to_string(lineno) + ": unparseable event time \"" +
                  tok + "\"");
    if (t < 0.0)
      throw Error(path + ":" + std::to_string(lineno) + ": negative event time " + tok);
    set.events.push_back(t);
  }
  std::sort(set.events.begin(), set.events.end());
  set.events.erase(std::unique(set.events.begin(), set.events.end()), set.events.end());
  return set;
}

inline void save_annotations(const AnnotationSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write annotation file: " + path);
  out << std::setprecision(17);
  for (double t : set.events) out << t << "\n";
}

}  // namespace kcx
