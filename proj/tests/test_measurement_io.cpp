#include <doctest.h>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

#include "cpr/measurement_io.hpp"
#include "cpr/rng.hpp"

using cpr::ComplexSignal;
using cpr::IntensityMeasurements;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const char* name)
      : path(std::filesystem::temp_directory_path() /
             (std::string("cpr-io-") + name + "-" + std::to_string(::getpid()))) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  std::string str() const { return path.string(); }
};

IntensityMeasurements sample_measurements() {
  cpr::Rng rng(5);
  ComplexSignal x(12);
  for (auto& v : x) v = rng.complex_gaussian();
  const cpr::MaskSet masks = cpr::build_masks(12);
  cpr::Rng noise(6);
  IntensityMeasurements m = cpr::measure_fourier(x, masks, {0, 3, 4, 11}, 0.01, noise);
  m.seed = 42;
  return m;
}

}  // namespace

TEST_CASE("text serialization round-trips measurements exactly") {
  const IntensityMeasurements m = sample_measurements();
  const IntensityMeasurements back = cpr::measurements_from_text(cpr::measurements_to_text(m));
  CHECK(back.mode == m.mode);
  CHECK(back.n == m.n);
  CHECK(back.blocks == m.blocks);
  CHECK(back.sampling == m.sampling);
  CHECK(back.sigma2 == m.sigma2);
  CHECK(back.seed == m.seed);
  CHECK(back.values == m.values);
}

TEST_CASE("binary serialization round-trips measurements exactly") {
  const IntensityMeasurements m = sample_measurements();
  const std::string bytes = cpr::measurements_to_binary(m);
  CHECK(bytes.compare(0, 4, "CPRM") == 0);
  const IntensityMeasurements back = cpr::measurements_from_binary(bytes);
  CHECK(back.mode == m.mode);
  CHECK(back.n == m.n);
  CHECK(back.sampling == m.sampling);
  CHECK(back.sigma2 == m.sigma2);
  CHECK(back.seed == m.seed);
  CHECK(back.values == m.values);
}

TEST_CASE("the text header is stable") {
  IntensityMeasurements m;
  m.mode = cpr::SensingMode::Fourier;
  m.n = 8;
  m.blocks = 2;
  m.sampling = {0, 5};
  m.sigma2 = 0.25;
  m.seed = 7;
  m.values = {1.0, 0.5, 2.0, 0.25, 3.0, 0.125, 4.0, 1.5};

  const char* expected =
      "cpr-intensity 1\n"
      "mode fourier\n"
      "n 8\n"
      "l 2\n"
      "sigma2 0.25\n"
      "seed 7\n"
      "sampling 1 6\n"
      "values\n"
      "1 0.5\n"
      "2 0.25\n"
      "3 0.125\n"
      "4 1.5\n";
  CHECK(cpr::measurements_to_text(m) == expected);
}

TEST_CASE("loading sniffs the format from the leading bytes") {
  const IntensityMeasurements m = sample_measurements();

  TempFile text("text");
  cpr::save_measurements_text(m, text.str());
  CHECK(cpr::load_measurements(text.str()).values == m.values);

  TempFile binary("binary");
  cpr::save_measurements_binary(m, binary.str());
  CHECK(cpr::load_measurements(binary.str()).values == m.values);
}

TEST_CASE("dense-mode records omit the sampling line") {
  cpr::Rng rng(9);
  ComplexSignal x(10);
  for (auto& v : x) v = rng.complex_gaussian();
  const IntensityMeasurements m =
      cpr::measure_operator(x, cpr::SensingOperator::bernoulli(4, 10, 17));

  const std::string text = cpr::measurements_to_text(m);
  CHECK(text.find("sampling") == std::string::npos);
  const IntensityMeasurements back = cpr::measurements_from_text(text);
  CHECK(back.mode == cpr::SensingMode::Bernoulli);
  CHECK(back.seed == 17);
  CHECK(back.sampling.empty());
  CHECK(back.values == m.values);

  const IntensityMeasurements bin = cpr::measurements_from_binary(cpr::measurements_to_binary(m));
  CHECK(bin.sampling.empty());
  CHECK(bin.values == m.values);
}

TEST_CASE("malformed text is rejected with a reason") {
  const std::string good = cpr::measurements_to_text(sample_measurements());

  CHECK_THROWS_AS(cpr::measurements_from_text(""), std::invalid_argument);
  CHECK_THROWS_AS(cpr::measurements_from_text("nonsense 1\n"), std::invalid_argument);

  std::string wrong_version = good;
  wrong_version.replace(wrong_version.find("1"), 1, "9");
  CHECK_THROWS_AS(cpr::measurements_from_text(wrong_version), std::invalid_argument);

  std::string negative = good;
  const auto pos = negative.find("values\n") + 7;
  negative.insert(pos, "-");
  CHECK_THROWS_AS(cpr::measurements_from_text(negative), std::invalid_argument);

  std::string truncated = good;
  truncated.resize(truncated.rfind('\n', truncated.size() - 2));
  CHECK_THROWS_AS(cpr::measurements_from_text(truncated), std::invalid_argument);
}

TEST_CASE("malformed binary is rejected before allocation") {
  const std::string good = cpr::measurements_to_binary(sample_measurements());

  CHECK_THROWS_AS(cpr::measurements_from_binary(""), std::invalid_argument);
  CHECK_THROWS_AS(cpr::measurements_from_binary("CPRX"), std::invalid_argument);
  CHECK_THROWS_AS(cpr::measurements_from_binary(good.substr(0, good.size() / 2)),
                  std::invalid_argument);

  // A count field pointing far past the payload must not be trusted.
  std::string lying = good;
  const std::size_t count_offset = 4 + 1 + 1 + 8;  // magic, version, mode, n
  for (int i = 0; i < 8; ++i) lying[count_offset + i] = char(0xff);
  CHECK_THROWS_AS(cpr::measurements_from_binary(lying), std::invalid_argument);
}

TEST_CASE("missing files raise io errors, not parse errors") {
  CHECK_THROWS_AS(cpr::load_measurements("/definitely/not/here"), cpr::IoError);
  CHECK_THROWS_AS(cpr::load_signal("/definitely/not/here"), cpr::IoError);
  const IntensityMeasurements m = sample_measurements();
  CHECK_THROWS_AS(cpr::save_measurements_text(m, "/definitely/not/here"), cpr::IoError);
}

TEST_CASE("signal files round-trip exactly") {
  cpr::Rng rng(30);
  ComplexSignal x(9);
  for (auto& v : x) v = rng.complex_gaussian();
  x[3] = cpr::Complex(0.0, 0.0);

  const std::string text = cpr::signal_to_text(x);
  CHECK(cpr::signal_from_text(text) == x);

  TempFile file("signal");
  cpr::save_signal(x, file.str());
  CHECK(cpr::load_signal(file.str()) == x);

  CHECK_THROWS_AS(cpr::signal_from_text("cpr-signal 1\nn 2\n1 2\n"), std::invalid_argument);
  CHECK_THROWS_AS(cpr::signal_from_text("hello\n"), std::invalid_argument);
}
