#pragma once

#include <string>

#include "cpr/measurement.hpp"

namespace cpr {

/// Raised when a file cannot be opened, read or written.  Malformed content
/// in a file that did open raises std::invalid_argument instead.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text form: line-oriented header followed by one line of intensities per
/// mask.  Doubles are printed shortest-round-trip, so save/load is exact.
/// Sampling indices are written 1-based.  Layout:
///
///   cpr-intensity 1
///   mode fourier
///   n 512
///   l 64
///   sigma2 0.001
///   seed 42
///   sampling 1 5 9 ...      (fourier mode only)
///   values
///   <l doubles>             (mask 1)
///   ... three more lines
std::string measurements_to_text(const IntensityMeasurements& m);
IntensityMeasurements measurements_from_text(const std::string& text);

/// Binary form: magic "CPRM", u8 version (1), u8 mode, little-endian u64
/// n / l / seed, f64 sigma2, u64 sampling count followed by that many u64
/// 1-based indices, then 4*l f64 intensities mask-major.
std::string measurements_to_binary(const IntensityMeasurements& m);
IntensityMeasurements measurements_from_binary(const std::string& bytes);

void save_measurements_text(const IntensityMeasurements& m, const std::string& path);
void save_measurements_binary(const IntensityMeasurements& m, const std::string& path);

/// Reads either form, sniffing the leading magic.  Throws
/// std::invalid_argument on malformed content and IoError on I/O failure.
IntensityMeasurements load_measurements(const std::string& path);

/// Dense complex vector as text ("cpr-signal 1", dimension, then one
/// "re im" line per entry); exact round-trip.
std::string signal_to_text(const ComplexSignal& x);
ComplexSignal signal_from_text(const std::string& text);
void save_signal(const ComplexSignal& x, const std::string& path);
ComplexSignal load_signal(const std::string& path);

}  // namespace cpr
