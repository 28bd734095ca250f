#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "dgn/data_io.hpp"
#include "dgn/error.hpp"
#include "dgn/gradcheck.hpp"
#include "dgn/network.hpp"

using namespace dgn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dgn_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

EventSample demo_sample() {
  EventSample s;
  s.channels = 4;
  s.duration_ms = 100.0;
  s.label = 2;
  s.events = {{0, 1.5}, {3, 2.25}, {0, 2.3}, {1, 99.999}, {2, 100.0}};
  return s;
}

}  // namespace

TEST_CASE("time_bin") {
  SUBCASE("no events give a zero tensor with ceil(duration/bin) steps") {
    EventSample s;
    s.channels = 3;
    s.duration_ms = 10.0;
    s.label = 0;
    SpikeTensor x = time_bin(s, 4.0);
    CHECK(x.timesteps() == 3);  // ceil(10 / 4)
    CHECK(x.values.isZero());
  }
  SUBCASE("counts are preserved") {
    EventSample s;
    s.channels = 1;
    s.duration_ms = 8.0;
    s.label = 0;
    s.events = {{0, 1.0}, {0, 2.0}, {0, 3.0}};
    SpikeTensor x = time_bin(s, 4.0);
    CHECK(x.values(0, 0) == 3.0);
    CHECK(x.values(0, 1) == 0.0);
  }
  SUBCASE("1000 ms at 4 ms bins gives 250 steps") {
    EventSample s;
    s.channels = 700;
    s.duration_ms = 1000.0;
    s.label = 0;
    CHECK(time_bin(s, 4.0).timesteps() == 250);
  }
  SUBCASE("binary mode caps cells at one") {
    EventSample s;
    s.channels = 1;
    s.duration_ms = 4.0;
    s.label = 0;
    s.events = {{0, 0.5}, {0, 1.5}, {0, 2.5}};
    CHECK(time_bin(s, 4.0, std::nullopt, BinMode::BinaryOr).values(0, 0) == 1.0);
  }
  SUBCASE("total count is conserved without truncation") {
    EventSample s = demo_sample();
    CHECK(time_bin(s, 4.0).values.sum() == static_cast<double>(s.events.size()));
  }
  SUBCASE("padding and truncation against max_steps") {
    EventSample s = demo_sample();
    CHECK(time_bin(s, 4.0, Index{40}).timesteps() == 40);
    SpikeTensor truncated = time_bin(s, 4.0, Index{10});
    CHECK(truncated.timesteps() == 10);
    CHECK(truncated.values.sum() == 3.0);  // the two late events dropped
  }
  SUBCASE("boundary event at exactly duration lands in the last bin") {
    EventSample s;
    s.channels = 1;
    s.duration_ms = 8.0;
    s.label = 0;
    s.events = {{0, 8.0}};
    SpikeTensor x = time_bin(s, 4.0);
    CHECK(x.values(0, 1) == 1.0);
  }
}

TEST_CASE("event file round trips") {
  TempDir dir;
  EventSample s = demo_sample();

  SUBCASE("save -> load preserves every event exactly") {
    save_events(s, dir.file("a.events"));
    EventSample back = load_events(dir.file("a.events"));
    CHECK(back.channels == s.channels);
    CHECK(back.duration_ms == s.duration_ms);
    CHECK(back.label == s.label);
    REQUIRE(back.events.size() == s.events.size());
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      CHECK(back.events[i].first == s.events[i].first);
      CHECK(back.events[i].second == s.events[i].second);
    }
  }
  SUBCASE("serialize(parse(f)) is byte-identical for canonical files") {
    const std::string canon = serialize_events(s);
    CHECK(serialize_events(parse_events(canon, "mem")) == canon);
  }
  SUBCASE("rejects events outside the duration") {
    EventSample bad = s;
    bad.events.push_back({0, 101.0});
    CHECK_THROWS_AS(serialize_events(bad), Error);
  }
  SUBCASE("rejects out-of-range channels with a diagnostic") {
    const std::string text = "2,10,0\n5,1.0\n";
    CHECK_THROWS_WITH_AS(parse_events(text, "f.events"),
                         doctest::Contains("channel 5 out of range"), Error);
  }
  SUBCASE("rejects malformed lines naming the line number") {
    const std::string text = "2,10,0\n1;0.5\n";
    CHECK_THROWS_WITH_AS(parse_events(text, "f.events"),
                         doctest::Contains("f.events:2"), Error);
  }
}

TEST_CASE("manifest and dataset loading") {
  TempDir dir;
  EventSample a = demo_sample();
  a.label = 0;
  EventSample b = demo_sample();
  b.label = 1;
  save_events(a, dir.file("a.events"));
  save_events(b, dir.file("b.events"));

  DatasetManifest m;
  m.name = "demo";
  m.channels = 4;
  m.num_classes = 2;
  m.entries = {{"a.events", "train"}, {"b.events", "test"}};
  save_manifest(m, dir.file("manifest.json"));

  SUBCASE("round trip and deterministic order") {
    EventDataset ds = load_dataset(dir.file("manifest.json"));
    REQUIRE(ds.samples.size() == 2);
    CHECK(ds.samples[0].label == 0);
    CHECK(ds.samples[1].label == 1);
    Dataset train = bin_dataset(ds, 4.0, std::nullopt, BinMode::Count, "train");
    CHECK(train.size() == 1);
  }
  SUBCASE("empty manifest loads an empty dataset without error") {
    DatasetManifest empty = m;
    empty.entries.clear();
    save_manifest(empty, dir.file("empty.json"));
    EventDataset ds = load_dataset(dir.file("empty.json"));
    CHECK(ds.samples.empty());
  }
  SUBCASE("label out of range is rejected naming the sample") {
    EventSample bad = demo_sample();
    bad.label = 7;
    save_events(bad, dir.file("bad.events"));
    DatasetManifest m2 = m;
    m2.entries = {{"bad.events", "train"}};
    save_manifest(m2, dir.file("m2.json"));
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("m2.json")),
                         doctest::Contains("bad.events"), Error);
  }
}

TEST_CASE("synthetic pattern dataset") {
  SynthSpec spec;
  spec.classes = 2;
  spec.channels = 12;
  spec.timesteps = 20;
  spec.rate = 0.2;
  spec.samples_per_class = 5;

  SUBCASE("deterministic from the seed") {
    Dataset a = synth_pattern_dataset(spec, 7);
    Dataset b = synth_pattern_dataset(spec, 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK((a[i].x.values.array() == b[i].x.values.array()).all());
  }
  SUBCASE("jitter = 0 and drop = 0 reproduce the class prototype") {
    SynthSpec clean = spec;
    clean.jitter = 0;
    clean.drop = 0.0;
    Dataset ds = synth_pattern_dataset(clean, 7);
    for (Index k = 1; k < clean.samples_per_class; ++k)
      CHECK((ds[0].x.values.array() == ds[k].x.values.array()).all());
  }
  SUBCASE("sample offset continues the stream disjointly") {
    Dataset train = synth_pattern_dataset(spec, 7, 0);
    Dataset test = synth_pattern_dataset(spec, 7, spec.samples_per_class);
    bool any_diff = false;
    for (std::size_t i = 0; i < train.size(); ++i)
      any_diff = any_diff ||
                 (train[i].x.values.array() != test[i].x.values.array()).any();
    CHECK(any_diff);
  }
}

TEST_CASE("write_synth_dataset emits a loadable portable dataset") {
  TempDir dir;
  SynthSpec spec;
  spec.classes = 2;
  spec.channels = 6;
  spec.timesteps = 10;
  spec.rate = 0.3;
  spec.samples_per_class = 3;
  write_synth_dataset(spec, 5, 2, dir.path.string());
  EventDataset ds = load_dataset(dir.file("manifest.json"));
  CHECK(ds.samples.size() == 2 * (3 + 2));
  Dataset train = bin_dataset(ds, 1.0, spec.timesteps, BinMode::Count, "train");
  REQUIRE(train.size() == 6);
  // Binning the written events at 1 ms reproduces the in-memory tensors.
  Dataset direct = synth_pattern_dataset(spec, 5, 0);
  for (std::size_t i = 0; i < train.size(); ++i)
    CHECK((train[i].x.values.array() == direct[i].x.values.array()).all());
}

TEST_CASE("checkpoints") {
  TempDir dir;
  Network net = random_small_net(3001, false);
  net.init_seed = 991;
  SpikeTensor x = random_input(net, 3001, 7);

  SUBCASE("bit-exact round trip of prediction") {
    save_checkpoint(net, dir.file("net.ckpt.json"));
    Network back = load_checkpoint(dir.file("net.ckpt.json"));
    CHECK(back.init_seed == net.init_seed);
    auto a = forward(net, x).readout.y_pred;
    auto b = forward(back, x).readout.y_pred;
    CHECK((a.array() == b.array()).all());
  }
  SUBCASE("file content is stable across saves") {
    save_checkpoint(net, dir.file("c1.json"));
    save_checkpoint(net, dir.file("c2.json"));
    CHECK(fnv1a64(read_text_file(dir.file("c1.json"))) ==
          fnv1a64(read_text_file(dir.file("c2.json"))));
  }
  SUBCASE("truncated file fails the checksum, not with garbage weights") {
    save_checkpoint(net, dir.file("t.json"));
    std::string text = read_text_file(dir.file("t.json"));
    write_text_file(dir.file("t.json"), text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(dir.file("t.json")), Error);
  }
  SUBCASE("tampered payload fails the checksum") {
    save_checkpoint(net, dir.file("m.json"));
    std::string text = read_text_file(dir.file("m.json"));
    auto pos = text.find("\"g_l\"");
    REQUIRE(pos != std::string::npos);
    while (pos < text.size() && !std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    REQUIRE(pos < text.size());
    text[pos] = text[pos] == '9' ? '3' : '9';
    write_text_file(dir.file("m.json"), text);
    CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("m.json")),
                         doctest::Contains("checksum"), Error);
  }
}

TEST_CASE("format_double round trips") {
  for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 2.5e-17, 99.999, 1000.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
