#include "cpr/measurement_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

namespace cpr {

namespace {

constexpr char kTextMagic[] = "cpr-intensity";
constexpr char kSignalMagic[] = "cpr-signal";
constexpr char kBinaryMagic[4] = {'C', 'P', 'R', 'M'};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view tok, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw std::invalid_argument(std::string("malformed number in ") + what);
  return v;
}

std::uint64_t parse_u64(std::string_view tok, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw std::invalid_argument(std::string("malformed integer in ") + what);
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64(std::string& out, double v) { append_u64(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw std::invalid_argument("truncated binary measurement data");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("cannot write " + path);
}

}  // namespace

std::string measurements_to_text(const IntensityMeasurements& m) {
  validate(m);
  std::string out;
  out += kTextMagic;
  out += " 1\n";
  out += "mode ";
  out += to_string(m.mode);
  out += "\nn " + std::to_string(m.n);
  out += "\nl " + std::to_string(m.blocks);
  out += "\nsigma2 " + format_double(m.sigma2);
  out += "\nseed " + std::to_string(m.seed);
  if (m.mode == SensingMode::Fourier) {
    out += "\nsampling";
    for (std::size_t r : m.sampling) out += " " + std::to_string(r + 1);
  }
  out += "\nvalues\n";
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t l = 0; l < m.blocks; ++l) {
      if (l) out += ' ';
      out += format_double(m.at(s, l));
    }
    out += '\n';
  }
  return out;
}

IntensityMeasurements measurements_from_text(const std::string& text) {
  const std::vector<std::string_view> lines = split_lines(text);
  if (lines.empty()) throw std::invalid_argument("empty measurement text");
  {
    const auto head = split_ws(lines[0]);
    if (head.size() != 2 || head[0] != kTextMagic || head[1] != "1")
      throw std::invalid_argument("not a cpr-intensity v1 file");
  }
  IntensityMeasurements m;
  std::size_t i = 1;
  bool saw_values = false;
  for (; i < lines.size(); ++i) {
    const auto toks = split_ws(lines[i]);
    if (toks.empty()) continue;
    if (toks[0] == "values") {
      saw_values = true;
      ++i;
      break;
    }
    if (toks[0] == "mode" && toks.size() == 2) {
      m.mode = sensing_mode_from_string(std::string(toks[1]));
    } else if (toks[0] == "n" && toks.size() == 2) {
      m.n = parse_u64(toks[1], "n");
    } else if (toks[0] == "l" && toks.size() == 2) {
      m.blocks = parse_u64(toks[1], "l");
    } else if (toks[0] == "sigma2" && toks.size() == 2) {
      m.sigma2 = parse_double(toks[1], "sigma2");
    } else if (toks[0] == "seed" && toks.size() == 2) {
      m.seed = parse_u64(toks[1], "seed");
    } else if (toks[0] == "sampling") {
      for (std::size_t t = 1; t < toks.size(); ++t) {
        const std::uint64_t one_based = parse_u64(toks[t], "sampling");
        if (one_based == 0) throw std::invalid_argument("sampling indices are 1-based");
        m.sampling.push_back(static_cast<std::size_t>(one_based - 1));
      }
    } else {
      throw std::invalid_argument("unknown header line in measurement text");
    }
  }
  if (!saw_values) throw std::invalid_argument("measurement text has no values section");
  if (lines.size() - i != 4) throw std::invalid_argument("expected exactly 4 mask rows");
  m.values.resize(4 * m.blocks);
  for (std::size_t s = 0; s < 4; ++s) {
    const auto toks = split_ws(lines[i + s]);
    if (toks.size() != m.blocks) throw std::invalid_argument("mask row length differs from l");
    for (std::size_t l = 0; l < m.blocks; ++l) m.at(s, l) = parse_double(toks[l], "values");
  }
  validate(m);
  return m;
}

std::string measurements_to_binary(const IntensityMeasurements& m) {
  validate(m);
  std::string out(kBinaryMagic, 4);
  out.push_back(1);  // version
  out.push_back(static_cast<char>(m.mode));
  append_u64(out, m.n);
  append_u64(out, m.blocks);
  append_u64(out, m.seed);
  append_f64(out, m.sigma2);
  append_u64(out, m.sampling.size());
  for (std::size_t r : m.sampling) append_u64(out, r + 1);
  for (double v : m.values) append_f64(out, v);
  return out;
}

IntensityMeasurements measurements_from_binary(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kBinaryMagic, 4) != 0)
    throw std::invalid_argument("not a CPRM binary file");
  ByteReader r(std::string_view(bytes).substr(4));
  if (r.u8() != 1) throw std::invalid_argument("unsupported CPRM version");
  const std::uint8_t mode = r.u8();
  if (mode > 2) throw std::invalid_argument("unknown sensing mode in CPRM file");
  IntensityMeasurements m;
  m.mode = static_cast<SensingMode>(mode);
  m.n = r.u64();
  m.blocks = r.u64();
  m.seed = r.u64();
  m.sigma2 = r.f64();
  // Each intensity needs 8 bytes, so the block count is bounded by the
  // payload size; reject absurd headers before any allocation.
  if (m.blocks > bytes.size()) throw std::invalid_argument("block count exceeds payload size");
  const std::uint64_t count = r.u64();
  if (count > m.blocks) throw std::invalid_argument("sampling count exceeds block count");
  m.sampling.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t one_based = r.u64();
    if (one_based == 0) throw std::invalid_argument("sampling indices are 1-based");
    m.sampling.push_back(static_cast<std::size_t>(one_based - 1));
  }
  m.values.resize(4 * m.blocks);
  for (double& v : m.values) v = r.f64();
  if (!r.exhausted()) throw std::invalid_argument("trailing bytes after CPRM payload");
  validate(m);
  return m;
}

void save_measurements_text(const IntensityMeasurements& m, const std::string& path) {
  write_file(path, measurements_to_text(m));
}

void save_measurements_binary(const IntensityMeasurements& m, const std::string& path) {
  write_file(path, measurements_to_binary(m));
}

IntensityMeasurements load_measurements(const std::string& path) {
  const std::string content = read_file(path);
  if (content.size() >= 4 && std::memcmp(content.data(), kBinaryMagic, 4) == 0)
    return measurements_from_binary(content);
  return measurements_from_text(content);
}

std::string signal_to_text(const ComplexSignal& x) {
  std::string out;
  out += kSignalMagic;
  out += " 1\nn " + std::to_string(x.size()) + "\n";
  for (const Complex& v : x) {
    out += format_double(v.real());
    out += ' ';
    out += format_double(v.imag());
    out += '\n';
  }
  return out;
}

ComplexSignal signal_from_text(const std::string& text) {
  const std::vector<std::string_view> lines = split_lines(text);
  if (lines.size() < 2) throw std::invalid_argument("truncated signal text");
  {
    const auto head = split_ws(lines[0]);
    if (head.size() != 2 || head[0] != kSignalMagic || head[1] != "1")
      throw std::invalid_argument("not a cpr-signal v1 file");
  }
  const auto dim = split_ws(lines[1]);
  if (dim.size() != 2 || dim[0] != "n") throw std::invalid_argument("signal text missing dimension");
  const std::uint64_t n = parse_u64(dim[1], "n");
  if (lines.size() - 2 != n) throw std::invalid_argument("signal entry count differs from n");
  ComplexSignal x;
  x.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto toks = split_ws(lines[2 + i]);
    if (toks.size() != 2) throw std::invalid_argument("signal entries need re and im");
    x.emplace_back(parse_double(toks[0], "signal"), parse_double(toks[1], "signal"));
  }
  return x;
}

void save_signal(const ComplexSignal& x, const std::string& path) {
  write_file(path, signal_to_text(x));
}

ComplexSignal load_signal(const std::string& path) { return signal_from_text(read_file(path)); }

}  // namespace cpr
