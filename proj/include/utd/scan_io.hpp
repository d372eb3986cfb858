#pragma once

// Scan files.
//
// UTS1 (little endian):
//   char[4]  "UTS1"
//   u32      version = 1
//   u32      trace_count
//   u32      samples_per_trace
//   f64      sample_rate_hz
//   u8       kind (0 tofd_bscan, 1 sscan)
//   f64      axis[trace_count]
//   f32      samples[trace_count][samples_per_trace]
//
// CSV: a "# fs=<Hz> kind=<name>" header line, then one trace per row with
// the axis value first.  Samples are written as float32 in both formats,
// so a scan read back from either encoding is identical.

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "error.hpp"
#include "pipeline.hpp"

namespace utd {

inline const char* kind_name(scan_kind k) { return k == scan_kind::sscan ? "sscan" : "tofd_bscan"; }

inline scan_kind parse_kind(std::string_view s) {
  if (s == "tofd_bscan") return scan_kind::tofd_bscan;
  if (s == "sscan") return scan_kind::sscan;
  throw input_error("scan_io", "unknown scan kind '" + std::string(s) + "'");
}

namespace detail {

template <class U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class LeReader {
 public:
  explicit LeReader(std::string data) : data_(std::move(data)) {}

  template <class U>
  U uint(const char* field) {
    need(sizeof(U), field);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }

  double f64(const char* field) { return std::bit_cast<double>(uint<std::uint64_t>(field)); }
  float f32(const char* field) { return std::bit_cast<float>(uint<std::uint32_t>(field)); }

  std::string bytes(std::size_t n, const char* field) {
    need(n, field);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n, const char* field) const {
    if (data_.size() - pos_ < n) throw input_error("scan_io", std::string("file truncated while reading ") + field);
  }
  std::string data_;
  std::size_t pos_ = 0;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("scan_io", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("scan_io", "cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw input_error("scan_io", "write failed for " + path);
}

template <class V>
void append_number(std::string& out, V v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), end);
}

template <class V>
V parse_number(std::string_view s, const std::string& field) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  V v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
    throw input_error("scan_io", "malformed number in " + field);
  return v;
}

}  // namespace detail

template <std::floating_point T>
std::string encode_uts1(const ScanSet<T>& scan) {
  scan.validate();
  std::string out = "UTS1";
  detail::put_le<std::uint32_t>(out, 1);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(scan.traces.size()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(scan.samples_per_trace()));
  detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(static_cast<double>(scan.fs())));
  out.push_back(static_cast<char>(scan.kind));
  for (double a : scan.axis) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(a));
  for (const auto& t : scan.traces)
    for (T v : t.samples) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

template <std::floating_point T = double>
ScanSet<T> decode_uts1(std::string data) {
  detail::LeReader r(std::move(data));
  if (r.bytes(4, "magic") != "UTS1") throw input_error("scan_io", "bad magic (expected UTS1)");
  const auto version = r.uint<std::uint32_t>("version");
  if (version != 1) throw input_error("scan_io", "unsupported version " + std::to_string(version));
  const auto count = r.uint<std::uint32_t>("trace_count");
  const auto spt = r.uint<std::uint32_t>("samples_per_trace");
  const double fs = r.f64("sample_rate");
  const auto kind = r.uint<std::uint8_t>("kind");
  if (kind > 1) throw input_error("scan_io", "invalid kind byte " + std::to_string(kind));
  if (!(fs > 0) || !std::isfinite(fs)) throw input_error("scan_io", "invalid sample_rate");
  if (count == 0) throw input_error("scan_io", "trace_count is zero");
  const std::uint64_t expected = 8ULL * count + 4ULL * count * spt;
  if (r.remaining() < expected) throw input_error("scan_io", "file truncated: axis/samples shorter than header declares");
  if (r.remaining() > expected) throw input_error("scan_io", "trailing bytes after samples");

  ScanSet<T> scan;
  scan.kind = static_cast<scan_kind>(kind);
  for (std::uint32_t i = 0; i < count; ++i) scan.axis.push_back(r.f64("axis"));
  for (std::uint32_t i = 0; i < count; ++i) {
    RfTrace<T> t{std::vector<T>(spt), static_cast<T>(fs), 0};
    for (auto& v : t.samples) v = static_cast<T>(r.f32("samples"));
    scan.traces.push_back(std::move(t));
  }
  scan.validate();
  return scan;
}

template <std::floating_point T>
void write_uts1(const std::string& path, const ScanSet<T>& scan) {
  detail::spit(path, encode_uts1(scan));
}

template <std::floating_point T = double>
ScanSet<T> read_uts1(const std::string& path) {
  return decode_uts1<T>(detail::slurp(path));
}

template <std::floating_point T>
std::string encode_csv(const ScanSet<T>& scan) {
  scan.validate();
  std::string out = "# fs=";
  detail::append_number(out, static_cast<double>(scan.fs()));
  out += " kind=";
  out += kind_name(scan.kind);
  out += '\n';
  for (std::size_t i = 0; i < scan.traces.size(); ++i) {
    detail::append_number(out, scan.axis[i]);
    for (T v : scan.traces[i].samples) {
      out += ',';
      detail::append_number(out, static_cast<float>(v));
    }
    out += '\n';
  }
  return out;
}

template <std::floating_point T = double>
ScanSet<T> decode_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw input_error("scan_io", "missing '# fs=... kind=...' header");
  double fs = 0;
  std::optional<scan_kind> kind;
  {
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("fs=", 0) == 0)
        fs = detail::parse_number<double>(std::string_view(tok).substr(3), "header fs");
      else if (tok.rfind("kind=", 0) == 0)
        kind = parse_kind(std::string_view(tok).substr(5));
    }
  }
  if (!(fs > 0)) throw input_error("scan_io", "header fs missing or not positive");
  if (!kind) throw input_error("scan_io", "header kind missing");

  ScanSet<T> scan;
  scan.kind = *kind;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    std::vector<std::string_view> cells;
    std::string_view sv(line);
    for (std::size_t start = 0;;) {
      const auto comma = sv.find(',', start);
      cells.push_back(sv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() < 3) throw input_error("scan_io", "row " + std::to_string(row) + " has fewer than 2 samples");
    scan.axis.push_back(detail::parse_number<double>(cells[0], "row " + std::to_string(row) + " axis"));
    RfTrace<T> t{{}, static_cast<T>(fs), 0};
    for (std::size_t c = 1; c < cells.size(); ++c)
      t.samples.push_back(static_cast<T>(
          detail::parse_number<float>(cells[c], "row " + std::to_string(row) + " column " + std::to_string(c + 1))));
    if (!scan.traces.empty() && t.size() != scan.traces.front().size())
      throw input_error("scan_io", "row " + std::to_string(row) + " length differs from the first row");
    scan.traces.push_back(std::move(t));
  }
  scan.validate();
  return scan;
}

template <std::floating_point T>
void write_csv(const std::string& path, const ScanSet<T>& scan) {
  detail::spit(path, encode_csv(scan));
}

template <std::floating_point T = double>
ScanSet<T> read_csv(const std::string& path) {
  return decode_csv<T>(detail::slurp(path));
}

/// Picks the format from the extension: ".csv" is CSV, anything else UTS1.
template <std::floating_point T = double>
ScanSet<T> read_scan(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return read_csv<T>(path);
  return read_uts1<T>(path);
}

template <std::floating_point T>
void write_scan(const std::string& path, const ScanSet<T>& scan) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    write_csv(path, scan);
  else
    write_uts1(path, scan);
}

}  // namespace utd
