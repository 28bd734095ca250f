#include "dgn/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "dgn/error.hpp"
#include "dgn/rng.hpp"

namespace dgn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  require(res.ec == std::errc(), "format_double: conversion failed");
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot write file: " + path);
  out << content;
  require(out.good(), "write failed: " + path);
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void EventSample::validate() const {
  require(channels > 0, "EventSample: channels must be > 0");
  require(std::isfinite(duration_ms) && duration_ms >= 0.0,
          "EventSample: duration_ms must be finite and >= 0");
  require(label >= 0, "EventSample: label must be >= 0");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& [c, t] = events[i];
    require(c >= 0 && c < channels,
            "EventSample: event " + std::to_string(i) + " channel " +
                std::to_string(c) + " out of range [0, " +
                std::to_string(channels) + ")");
    require(std::isfinite(t) && t >= 0.0 && t <= duration_ms,
            "EventSample: event " + std::to_string(i) + " time " +
                format_double(t) + " outside [0, " + format_double(duration_ms) +
                "]");
  }
}

std::string serialize_events(const EventSample& sample) {
  sample.validate();
  std::string out;
  out += std::to_string(sample.channels);
  out += ',';
  out += format_double(sample.duration_ms);
  out += ',';
  out += std::to_string(sample.label);
  out += '\n';
  for (const auto& [c, t] : sample.events) {
    out += std::to_string(c);
    out += ',';
    out += format_double(t);
    out += '\n';
  }
  return out;
}

namespace {

struct LineCursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 0;

  bool next(std::string_view& out) {
    if (pos >= text.size()) return false;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    out = std::string_view(text).substr(pos, nl - pos);
    pos = nl + 1;
    ++line;
    return true;
  }
};

[[noreturn]] void parse_fail(const std::string& origin, int line,
                             const std::string& what) {
  fail(origin + ":" + std::to_string(line) + ": " + what);
}

long long parse_int(std::string_view field, const std::string& origin,
                    int line) {
  long long v = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    parse_fail(origin, line, "expected integer, got '" + std::string(field) +
                                 "'");
  return v;
}

double parse_num(std::string_view field, const std::string& origin, int line) {
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    parse_fail(origin, line, "expected number, got '" + std::string(field) +
                                 "'");
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

EventSample parse_events(const std::string& text, const std::string& origin) {
  LineCursor cur{text};
  std::string_view line;
  if (!cur.next(line)) parse_fail(origin, 1, "empty file");
  auto header = split_fields(line);
  if (header.size() != 3)
    parse_fail(origin, cur.line,
               "header must be 'channels,duration_ms,label'");
  EventSample sample;
  sample.channels = static_cast<Index>(parse_int(header[0], origin, cur.line));
  sample.duration_ms = parse_num(header[1], origin, cur.line);
  sample.label = static_cast<Index>(parse_int(header[2], origin, cur.line));
  while (cur.next(line)) {
    if (line.empty() && cur.pos >= text.size()) break;  // trailing newline
    auto fields = split_fields(line);
    if (fields.size() != 2)
      parse_fail(origin, cur.line, "event line must be 'channel,time_ms'");
    sample.events.emplace_back(
        static_cast<Index>(parse_int(fields[0], origin, cur.line)),
        parse_num(fields[1], origin, cur.line));
  }
  try {
    sample.validate();
  } catch (const Error& e) {
    fail(origin + ": " + e.what());
  }
  return sample;
}

void save_events(const EventSample& sample, const std::string& path) {
  write_text_file(path, serialize_events(sample));
}

EventSample load_events(const std::string& path) {
  return parse_events(read_text_file(path), path);
}

SpikeTensor time_bin(const EventSample& sample, double bin_ms,
                     std::optional<Index> max_steps, BinMode mode) {
  require(bin_ms > 0.0, "time_bin: bin_ms must be > 0");
  sample.validate();
  Index natural =
      static_cast<Index>(std::ceil(sample.duration_ms / bin_ms - 1e-9));
  if (natural == 0 && !sample.events.empty()) natural = 1;
  const Index steps = max_steps ? *max_steps : natural;
  require(steps >= 0, "time_bin: negative step count");
  Matrix m = Matrix::Zero(sample.channels, steps);
  Index dropped = 0;
  for (const auto& [c, t] : sample.events) {
    Index b = static_cast<Index>(std::floor(t / bin_ms));
    if (b >= natural) b = natural - 1;  // event exactly at duration_ms
    if (b >= steps) {
      ++dropped;
      continue;
    }
    if (mode == BinMode::Count)
      m(c, b) += 1.0;
    else
      m(c, b) = 1.0;
  }
  if (dropped > 0)
    std::fprintf(stderr,
                 "time_bin: truncated %lld event(s) beyond %lld steps\n",
                 static_cast<long long>(dropped),
                 static_cast<long long>(steps));
  return SpikeTensor(std::move(m));
}

DatasetManifest load_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(path + ": manifest parse error: " + e.what());
  }
  DatasetManifest m;
  try {
    m.format_version = j.at("format_version").get<int>();
    require(m.format_version == 1,
            path + ": unsupported manifest format_version " +
                std::to_string(m.format_version));
    m.name = j.at("name").get<std::string>();
    m.channels = j.at("channels").get<Index>();
    m.num_classes = j.at("num_classes").get<Index>();
    for (const auto& e : j.at("samples")) {
      DatasetManifest::Entry entry;
      entry.file = e.at("file").get<std::string>();
      entry.split = e.value("split", std::string("train"));
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    fail(path + ": manifest field error: " + e.what());
  }
  require(m.channels > 0 && m.num_classes > 0,
          path + ": channels and num_classes must be > 0");
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  json j;
  j["format_version"] = manifest.format_version;
  j["name"] = manifest.name;
  j["channels"] = manifest.channels;
  j["num_classes"] = manifest.num_classes;
  j["samples"] = json::array();
  for (const auto& e : manifest.entries)
    j["samples"].push_back({{"file", e.file}, {"split", e.split}});
  write_text_file(path, j.dump(2) + "\n");
}

EventDataset load_dataset(const std::string& manifest_path) {
  EventDataset ds;
  ds.manifest = load_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  for (const auto& entry : ds.manifest.entries) {
    const std::string file = (base / entry.file).string();
    EventSample sample = load_events(file);
    require(sample.channels == ds.manifest.channels,
            file + ": sample has " + std::to_string(sample.channels) +
                " channels, manifest declares " +
                std::to_string(ds.manifest.channels));
    require(sample.label < ds.manifest.num_classes,
            file + ": label " + std::to_string(sample.label) +
                " out of range for " +
                std::to_string(ds.manifest.num_classes) + " classes");
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

Dataset bin_dataset(const EventDataset& ds, double bin_ms,
                    std::optional<Index> max_steps, BinMode mode,
                    const std::string& split) {
  Dataset out;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    if (!split.empty() && ds.manifest.entries[i].split != split) continue;
    Sample s;
    s.x = time_bin(ds.samples[i], bin_ms, max_steps, mode);
    s.label = ds.samples[i].label;
    out.push_back(std::move(s));
  }
  return out;
}

Dataset synth_pattern_dataset(const SynthSpec& spec, std::uint64_t seed,
                              Index sample_offset) {
  require(spec.classes >= 1 && spec.channels >= 1 && spec.timesteps >= 1,
          "synth_pattern_dataset: classes, channels, timesteps must be >= 1");
  require(spec.rate >= 0.0 && spec.rate <= 1.0,
          "synth_pattern_dataset: rate must lie in [0, 1]");
  require(spec.drop >= 0.0 && spec.drop <= 1.0,
          "synth_pattern_dataset: drop must lie in [0, 1]");
  require(spec.jitter >= 0, "synth_pattern_dataset: jitter must be >= 0");

  std::vector<Matrix> protos(spec.classes);
  for (Index c = 0; c < spec.classes; ++c) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(c) << 32);
    Matrix proto = Matrix::Zero(spec.channels, spec.timesteps);
    for (Index ch = 0; ch < spec.channels; ++ch)
      for (Index t = 0; t < spec.timesteps; ++t)
        if (rng.bernoulli(spec.rate)) proto(ch, t) = 1.0;
    protos[c] = std::move(proto);
  }

  Dataset ds;
  for (Index c = 0; c < spec.classes; ++c) {
    for (Index k = 0; k < spec.samples_per_class; ++k) {
      Rng rng = derive_stream(
          seed, (static_cast<std::uint64_t>(c) << 32) |
                    static_cast<std::uint64_t>(k + 1 + sample_offset));
      Matrix m = Matrix::Zero(spec.channels, spec.timesteps);
      for (Index ch = 0; ch < spec.channels; ++ch) {
        for (Index t = 0; t < spec.timesteps; ++t) {
          if (protos[c](ch, t) == 0.0) continue;
          if (rng.bernoulli(spec.drop)) continue;
          Index tt = t;
          if (spec.jitter > 0)
            tt = t +
                 static_cast<Index>(rng.below(
                     static_cast<std::uint64_t>(2 * spec.jitter + 1))) -
                 spec.jitter;
          if (tt < 0 || tt >= spec.timesteps) continue;
          m(ch, tt) += 1.0;
        }
      }
      ds.push_back({SpikeTensor(std::move(m)), c});
    }
  }
  return ds;
}

namespace {

EventSample tensor_to_events(const SpikeTensor& x, Index label) {
  EventSample s;
  s.channels = x.channels();
  s.duration_ms = static_cast<double>(x.timesteps());
  s.label = label;
  for (Index t = 0; t < x.timesteps(); ++t)
    for (Index c = 0; c < x.channels(); ++c) {
      const auto count = static_cast<Index>(std::llround(x.values(c, t)));
      for (Index n = 0; n < count; ++n)
        s.events.emplace_back(c, (static_cast<double>(t) + 0.5));
    }
  return s;
}

}  // namespace

void write_synth_dataset(const SynthSpec& spec, std::uint64_t seed,
                         Index test_per_class, const std::string& dir) {
  fs::create_directories(dir);
  DatasetManifest manifest;
  manifest.name = "synthetic-patterns";
  manifest.channels = spec.channels;
  manifest.num_classes = spec.classes;

  auto emit = [&](const Dataset& ds, const std::string& split) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04zu.events", split.c_str(), i);
      save_events(tensor_to_events(ds[i].x, ds[i].label),
                  (fs::path(dir) / name).string());
      manifest.entries.push_back({name, split});
    }
  };
  emit(synth_pattern_dataset(spec, seed, 0), "train");
  SynthSpec test_spec = spec;
  test_spec.samples_per_class = test_per_class;
  emit(synth_pattern_dataset(test_spec, seed, spec.samples_per_class), "test");
  save_manifest(manifest, (fs::path(dir) / "manifest.json").string());
}

namespace {

json matrix_to_json(const Matrix& m) {
  json arr = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

Matrix matrix_from_json(const json& arr, Index rows, Index cols,
                        const std::string& what) {
  require(arr.is_array() && static_cast<Index>(arr.size()) == rows * cols,
          "checkpoint: " + what + " has " + std::to_string(arr.size()) +
              " entries, expected " + std::to_string(rows * cols));
  Matrix m(rows, cols);
  Index i = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = arr[i++].get<double>();
  return m;
}

constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
  net.validate();
  json payload;
  payload["input_channels"] = net.input_channels;
  payload["readout_dim"] = net.readout_dim;
  payload["spike_mode"] = to_string(net.spike_mode);
  payload["init_seed"] = net.init_seed;
  payload["layers"] = json::array();
  for (const auto& layer : net.layers) {
    json jl;
    jl["kind"] = to_string(layer.cfg.kind);
    jl["units"] = layer.cfg.units;
    jl["in_channels"] = layer.in_channels;
    jl["recurrent"] = layer.cfg.recurrent;
    jl["g_l"] = layer.cfg.g_l;
    jl["tau_s"] = layer.cfg.tau_s;
    jl["dt"] = layer.cfg.dt;
    jl["theta"] = layer.cfg.theta;
    jl["static_gate"] = layer.cfg.static_gate;
    jl["dynamic_gate"] = layer.cfg.dynamic_gate;
    jl["truncation"] = to_string(layer.cfg.truncation);
    jl["surrogate"] = {{"kind", to_string(layer.cfg.surrogate.kind)},
                       {"width", layer.cfg.surrogate.width}};
    jl["alif_beta"] = layer.cfg.alif_beta;
    jl["alif_tau"] = layer.cfg.alif_tau;
    if (layer.cfg.lif_rho)
      jl["lif_rho"] = *layer.cfg.lif_rho;
    else
      jl["lif_rho"] = nullptr;
    jl["W"] = matrix_to_json(layer.W);
    if (layer.has_gate_weights()) jl["C"] = matrix_to_json(layer.C);
    payload["layers"].push_back(std::move(jl));
  }
  payload["W_L"] = matrix_to_json(net.W_L);

  const std::string body = payload.dump();
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(fnv1a64(body)));
  json root;
  root["format"] = "dgn-checkpoint";
  root["format_version"] = kCheckpointVersion;
  root["checksum"] = checksum;
  root["payload"] = std::move(payload);
  write_text_file(path, root.dump(2) + "\n");
}

Network load_checkpoint(const std::string& path) {
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    fail(path + ": checkpoint parse error (file truncated or corrupt): " +
         e.what());
  }
  try {
    require(root.value("format", std::string()) == "dgn-checkpoint",
            path + ": not a checkpoint file");
    require(root.at("format_version").get<int>() == kCheckpointVersion,
            path + ": unsupported checkpoint version " +
                std::to_string(root.at("format_version").get<int>()));
    const std::string body = root.at("payload").dump();
    char expect[32];
    std::snprintf(expect, sizeof(expect), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(body)));
    require(root.at("checksum").get<std::string>() == expect,
            path + ": checksum mismatch, refusing to load");

    const json& payload = root.at("payload");
    Network net;
    net.input_channels = payload.at("input_channels").get<Index>();
    net.readout_dim = payload.at("readout_dim").get<Index>();
    net.spike_mode =
        spike_mode_from_string(payload.at("spike_mode").get<std::string>());
    net.init_seed = payload.at("init_seed").get<std::uint64_t>();
    for (const auto& jl : payload.at("layers")) {
      NetLayer layer;
      layer.cfg.kind = neuron_kind_from_string(jl.at("kind").get<std::string>());
      layer.cfg.units = jl.at("units").get<Index>();
      layer.in_channels = jl.at("in_channels").get<Index>();
      layer.cfg.recurrent = jl.at("recurrent").get<bool>();
      layer.cfg.g_l = jl.at("g_l").get<double>();
      layer.cfg.tau_s = jl.at("tau_s").get<double>();
      layer.cfg.dt = jl.at("dt").get<double>();
      layer.cfg.theta = jl.at("theta").get<double>();
      layer.cfg.static_gate = jl.at("static_gate").get<bool>();
      layer.cfg.dynamic_gate = jl.at("dynamic_gate").get<bool>();
      layer.cfg.truncation =
          truncation_from_string(jl.at("truncation").get<std::string>());
      layer.cfg.surrogate.kind = surrogate_kind_from_string(
          jl.at("surrogate").at("kind").get<std::string>());
      layer.cfg.surrogate.width = jl.at("surrogate").at("width").get<double>();
      layer.cfg.alif_beta = jl.at("alif_beta").get<double>();
      layer.cfg.alif_tau = jl.at("alif_tau").get<double>();
      if (!jl.at("lif_rho").is_null())
        layer.cfg.lif_rho = jl.at("lif_rho").get<double>();
      const Index cols =
          layer.in_channels + (layer.cfg.recurrent ? layer.cfg.units : 0);
      layer.W = matrix_from_json(jl.at("W"), layer.cfg.units, cols, "W");
      if (layer.cfg.kind == NeuronKind::Dgn)
        layer.C = matrix_from_json(jl.at("C"), layer.cfg.units, cols, "C");
      net.layers.push_back(std::move(layer));
    }
    net.W_L = matrix_from_json(payload.at("W_L"), net.readout_dim,
                               net.layers.back().cfg.units, "W_L");
    net.validate();
    return net;
  } catch (const json::exception& e) {
    fail(path + ": checkpoint field error: " + e.what());
  }
}

}  // namespace dgn
