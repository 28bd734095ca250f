#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgn/network.hpp"
#include "dgn/types.hpp"

namespace dgn {

// Portable event-list sample. Text grammar (one record per line, '\n'
// terminated, no padding):
//
//   line 1:   <channels>,<duration_ms>,<label>
//   line 2..: <channel>,<time_ms>
//
// Integers are plain decimal; times use the shortest representation that
// round-trips a double, so serialize(parse(f)) is byte-identical for files
// this library wrote. Event order is preserved.
struct EventSample {
  Index channels = 0;
  double duration_ms = 0.0;
  Index label = 0;
  std::vector<std::pair<Index, double>> events;  // (channel, time_ms)

  void validate() const;
};

std::string serialize_events(const EventSample& sample);
EventSample parse_events(const std::string& text, const std::string& origin);
void save_events(const EventSample& sample, const std::string& path);
EventSample load_events(const std::string& path);

enum class BinMode { Count, BinaryOr };

// values(c, t) = number of events of channel c with time in
// [t*bin_ms, (t+1)*bin_ms); an event exactly at duration_ms lands in the last
// bin. BinaryOr caps each cell at 1. Without max_steps the tensor has
// ceil(duration_ms / bin_ms) steps; with it, longer samples are truncated
// (trailing events dropped) and shorter ones zero-padded.
SpikeTensor time_bin(const EventSample& sample, double bin_ms,
                     std::optional<Index> max_steps = std::nullopt,
                     BinMode mode = BinMode::Count);

struct DatasetManifest {
  std::string name;
  Index channels = 0;
  Index num_classes = 0;
  int format_version = 1;
  struct Entry {
    std::string file;
    std::string split;  // "train" / "test" / "validation"
  };
  std::vector<Entry> entries;
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

struct EventDataset {
  DatasetManifest manifest;
  std::vector<EventSample> samples;  // manifest order
};

// Loads and validates every referenced sample (existence, channel range,
// label < num_classes). Sample file paths are relative to the manifest.
EventDataset load_dataset(const std::string& manifest_path);

// Bins every sample of the given split ("" selects all).
Dataset bin_dataset(const EventDataset& ds, double bin_ms,
                    std::optional<Index> max_steps = std::nullopt,
                    BinMode mode = BinMode::Count,
                    const std::string& split = "");

// Desk-scale synthetic task: each class gets a random binary prototype raster
// (cell spike probability `rate`); samples are prototypes with per-spike
// timestep jitter in [-jitter, jitter] (spikes shifted off the grid are
// dropped) and per-spike dropout. Streams: prototype of class c uses
// derive_stream(seed, c << 32); sample k of class c uses
// derive_stream(seed, (c << 32) | (k + 1 + sample_offset)).
struct SynthSpec {
  Index classes = 2;
  Index channels = 20;
  Index timesteps = 50;
  double rate = 0.08;
  Index jitter = 1;
  double drop = 0.1;
  Index samples_per_class = 40;
};

Dataset synth_pattern_dataset(const SynthSpec& spec, std::uint64_t seed,
                              Index sample_offset = 0);

// Writes a synthetic dataset as portable event files plus a manifest
// (1 ms bins; one event per unit of count, at the bin midpoint).
void write_synth_dataset(const SynthSpec& spec, std::uint64_t seed,
                         Index test_per_class, const std::string& dir);

// Versioned JSON checkpoint: full topology, every weight matrix row-major,
// truncation/surrogate choices, init seed, and an FNV-1a checksum over the
// payload so truncation/corruption is detected before any weight is used.
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

std::uint64_t fnv1a64(const std::string& data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace dgn
