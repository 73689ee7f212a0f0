#pragma once

#include <optional>
#include <vector>

#include "spikeopt/common.hpp"
#include "spikeopt/rng.hpp"

namespace spikeopt::encode {

using SpikeTrain = std::vector<Tick>;

struct EncodingWindow {
  Tick length = 1;      // T
  Tick resolution = 1;  // distinguishable levels

  void validate() const;
  // `resolution` evenly spaced values covering [0, 1].
  [[nodiscard]] std::vector<double> levels() const;
};

SpikeTrain rate_encode(double value, const EncodingWindow& window);
double rate_decode(const SpikeTrain& train, const EncodingWindow& window);

struct TtfsOptions {
  bool silent_zero = false;  // value 0 emits no spike instead of a last-tick spike
};
std::optional<Tick> ttfs_encode(double value, const EncodingWindow& window, TtfsOptions options = {});
double ttfs_decode(std::optional<Tick> tick, const EncodingWindow& window);

SpikeTrain isi_encode(double value, const EncodingWindow& window);
double isi_decode(const SpikeTrain& train, const EncodingWindow& window);

// Tick t fires iff rng.uniform(t, 0) < value.
SpikeTrain poisson_encode(double value, const EncodingWindow& window, const CounterRng& rng);

}  // namespace spikeopt::encode
