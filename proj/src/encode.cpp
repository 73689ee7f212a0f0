#include "spikeopt/encode.hpp"

#include <cmath>

namespace spikeopt::encode {

namespace {

void check_unit(double value, const char* who) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidArgument(std::string(who) + ": value must lie in [0,1]");
  }
}

Tick round_tick(double x) { return static_cast<Tick>(std::llround(x)); }

}  // namespace

void EncodingWindow::validate() const {
  if (length < 1) throw InvalidArgument("EncodingWindow: length must be >= 1");
  if (resolution < 1 || resolution > length) throw InvalidArgument("EncodingWindow: resolution must lie in [1, length]");
}

std::vector<double> EncodingWindow::levels() const {
  validate();
  if (resolution == 1) return {0.0};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(resolution));
  for (Tick i = 0; i < resolution; ++i) out.push_back(static_cast<double>(i) / static_cast<double>(resolution - 1));
  return out;
}

SpikeTrain rate_encode(double value, const EncodingWindow& window) {
  window.validate();
  check_unit(value, "rate_encode");
  const Tick count = round_tick(value * static_cast<double>(window.length));
  SpikeTrain train;
  train.reserve(static_cast<std::size_t>(count));
  // Spread evenly; T/count >= 1 keeps the ticks distinct.
  for (Tick k = 0; k < count; ++k) train.push_back(k * window.length / count);
  return train;
}

double rate_decode(const SpikeTrain& train, const EncodingWindow& window) {
  window.validate();
  for (Tick t : train) {
    if (t < 0 || t >= window.length) throw InvalidArgument("rate_decode: spike outside window");
  }
  return static_cast<double>(train.size()) / static_cast<double>(window.length);
}

std::optional<Tick> ttfs_encode(double value, const EncodingWindow& window, TtfsOptions options) {
  window.validate();
  check_unit(value, "ttfs_encode");
  if (options.silent_zero && value == 0.0) return std::nullopt;
  return round_tick((1.0 - value) * static_cast<double>(window.length - 1));
}

double ttfs_decode(std::optional<Tick> tick, const EncodingWindow& window) {
  window.validate();
  if (!tick) return 0.0;
  if (*tick < 0 || *tick >= window.length) throw InvalidArgument("ttfs_decode: spike outside window");
  if (window.length == 1) return 1.0;
  return 1.0 - static_cast<double>(*tick) / static_cast<double>(window.length - 1);
}

SpikeTrain isi_encode(double value, const EncodingWindow& window) {
  window.validate();
  check_unit(value, "isi_encode");
  if (window.length < 3) throw InvalidArgument("isi_encode: window must span at least 3 ticks");
  const Tick gap = 1 + round_tick(value * static_cast<double>(window.length - 2));
  return {0, gap};
}

double isi_decode(const SpikeTrain& train, const EncodingWindow& window) {
  window.validate();
  if (window.length < 3) throw InvalidArgument("isi_decode: window must span at least 3 ticks");
  if (train.size() != 2) throw InvalidArgument("isi_decode: expected exactly two spikes");
  const Tick gap = train[1] - train[0];
  if (gap < 1 || train[0] < 0 || train[1] >= window.length) throw InvalidArgument("isi_decode: invalid spike pair");
  return static_cast<double>(gap - 1) / static_cast<double>(window.length - 2);
}

SpikeTrain poisson_encode(double value, const EncodingWindow& window, const CounterRng& rng) {
  window.validate();
  check_unit(value, "poisson_encode");
  SpikeTrain train;
  for (Tick t = 0; t < window.length; ++t) {
    if (rng.uniform(static_cast<std::uint64_t>(t), 0) < value) train.push_back(t);
  }
  return train;
}

}  // namespace spikeopt::encode
