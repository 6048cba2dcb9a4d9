#include "ersim/ertt.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ersim/error.hpp"

namespace ersim {

namespace {

constexpr std::uint8_t kMagic[4] = {'E', 'R', 'T', 'T'};
// 1000 s; keeps every ns value exactly representable through the seconds conversion.
constexpr std::uint64_t kMaxRepNs = 1'000'000'000'000ull;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t to_ns(double seconds) {
  if (!(seconds >= 0.0) || seconds > 1.8e10) throw FormatError("time cannot be represented in ns");
  return static_cast<std::uint64_t>(std::llround(seconds * 1e9));
}

double from_ns(std::uint64_t ns) { return static_cast<double>(ns) * 1e-9; }

struct NsTiming {
  std::uint64_t t_rep, t_pulse, t_coll;
};

NsTiming timing_ns(const PulseSequence& seq) {
  return {to_ns(seq.t_rep), to_ns(seq.t_pulse), to_ns(seq.t_coll)};
}

// Record time on the ns grid, kept inside [t_pulse, t_pulse + t_coll).
std::uint64_t record_ns(double t, const NsTiming& ns) {
  const std::uint64_t v = to_ns(t);
  return std::clamp(v, ns.t_pulse, ns.t_pulse + ns.t_coll - 1);
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::uint8_t> encode_clickstream(const ClickStream& stream) {
  const NsTiming ns = timing_ns(stream.sequence);
  if (ns.t_pulse == 0 || ns.t_coll == 0 || ns.t_pulse + ns.t_coll > ns.t_rep || ns.t_rep > kMaxRepNs)
    throw FormatError("pulse sequence does not fit the nanosecond grid");
  std::vector<std::uint8_t> out;
  out.reserve(kErttHeaderSize + kErttRecordSize * stream.size());
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_u16(out, kErttVersion);
  put_u64(out, ns.t_rep);
  put_u64(out, ns.t_pulse);
  put_u64(out, ns.t_coll);
  put_u64(out, stream.size());
  std::uint64_t prev_shot = 0, prev_t = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Click& c = stream.records[i];
    const std::uint64_t t = record_ns(c.t, ns);
    if (i > 0 && (c.shot < prev_shot || (c.shot == prev_shot && t < prev_t)))
      throw FormatError("records are not sorted by (shot, time)");
    put_u64(out, c.shot);
    put_u64(out, t);
    prev_shot = c.shot;
    prev_t = t;
  }
  return out;
}

ClickStream decode_clickstream(std::span<const std::uint8_t> bytes, std::optional<std::uint64_t> n_shots) {
  if (bytes.size() < kErttHeaderSize) throw FormatError("truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic (expected ERTT)");
  const std::uint16_t version = get_u16(bytes.data() + 4);
  if (version != kErttVersion) throw FormatError("unsupported format version " + std::to_string(version));
  const NsTiming ns{get_u64(bytes.data() + 6), get_u64(bytes.data() + 14), get_u64(bytes.data() + 22)};
  const std::uint64_t count = get_u64(bytes.data() + 30);
  if (ns.t_pulse == 0 || ns.t_coll == 0 || ns.t_pulse > ns.t_rep || ns.t_coll > ns.t_rep - ns.t_pulse)
    throw FormatError("inconsistent pulse timing in header");
  if (ns.t_rep > kMaxRepNs) throw FormatError("repetition period in header is implausibly long");
  const std::uint64_t body = bytes.size() - kErttHeaderSize;
  if (count > body / kErttRecordSize) throw FormatError("truncated record section");
  if (body != count * kErttRecordSize) throw FormatError("trailing bytes after record section");

  ClickStream stream;
  stream.sequence.t_rep = from_ns(ns.t_rep);
  stream.sequence.t_pulse = from_ns(ns.t_pulse);
  stream.sequence.t_coll = from_ns(ns.t_coll);
  stream.records.reserve(count);
  const std::uint8_t* p = bytes.data() + kErttHeaderSize;
  std::uint64_t prev_shot = 0, prev_t = 0;
  for (std::uint64_t i = 0; i < count; ++i, p += kErttRecordSize) {
    const std::uint64_t shot = get_u64(p);
    const std::uint64_t t = get_u64(p + 8);
    if (t >= ns.t_rep) throw FormatError("record " + std::to_string(i) + ": time beyond repetition period");
    if (t < ns.t_pulse || t - ns.t_pulse >= ns.t_coll)
      throw FormatError("record " + std::to_string(i) + ": time outside the collection window");
    if (shot == UINT64_MAX) throw FormatError("record " + std::to_string(i) + ": shot index overflow");
    if (i > 0 && (shot < prev_shot || (shot == prev_shot && t < prev_t)))
      throw FormatError("record " + std::to_string(i) + ": records not sorted");
    stream.records.push_back({shot, from_ns(t)});
    prev_shot = shot;
    prev_t = t;
  }
  const std::uint64_t min_shots = stream.empty() ? 1 : stream.records.back().shot + 1;
  if (n_shots && *n_shots < min_shots) throw FormatError("shot count smaller than the recorded shot indices");
  stream.sequence.n_shots = n_shots.value_or(min_shots);
  return stream;
}

void write_clickstream(const ClickStream& stream, const std::string& path) {
  const auto bytes = encode_clickstream(stream);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

ClickStream read_clickstream(const std::string& path, std::optional<std::uint64_t> n_shots) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_clickstream(bytes, n_shots);
}

ClickStream quantize_to_ns(const ClickStream& stream) {
  const NsTiming ns = timing_ns(stream.sequence);
  ClickStream out = stream;
  out.sequence.t_rep = from_ns(ns.t_rep);
  out.sequence.t_pulse = from_ns(ns.t_pulse);
  out.sequence.t_coll = from_ns(ns.t_coll);
  for (Click& c : out.records) c.t = from_ns(record_ns(c.t, ns));
  return out;
}

}  // namespace ersim
