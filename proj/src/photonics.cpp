#include "sdlab/photonics.hpp"

#include <cmath>
#include <stdexcept>

namespace sdlab::ex {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

PumpPattern pump_pattern(double a, double b, double c) {
  if (a < -800.0 || a > 800.0 || b < -400.0 || b > 400.0 || c < -200.0 || c > 200.0)
    throw std::invalid_argument("pump_pattern: parameters outside the sweep box");
  PumpPattern p;
  p.a = a;
  p.b = b;
  p.c = c;
  p.raw.resize(kPumpSamples);
  for (int i = 0; i < kPumpSamples; ++i) {
    const double x = static_cast<double>(i) / (kPumpSamples - 1);
    const double y = a * x * x + b * x + c * std::sqrt(x);
    p.raw[i] = y > 0.0 ? y : 0.0;
  }
  return p;
}

std::vector<double> wrap_pattern(const std::vector<double>& raw) {
  std::vector<double> w(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    double m = std::fmod(raw[i], kTwoPi);
    if (m < 0.0) m += kTwoPi;
    w[i] = m / kTwoPi;
  }
  return w;
}

double directivity_surrogate(const std::array<double, 4>& z) {
  const double z1 = z[0], z2 = z[1];
  return 0.0467 * z1 * z1 - 0.0265 * z2 * z2 - 0.175 * z1 - 0.0955 * z1 * z2 + 0.22 * z2 + 2.707;
}

double directivity_surrogate(const std::vector<double>& z) {
  if (z.size() < 2) throw std::invalid_argument("directivity_surrogate: need at least z1, z2");
  std::array<double, 4> a{z[0], z[1], 0.0, 0.0};
  return directivity_surrogate(a);
}

double grating_signal(int order) {
  if (order < 1 || order > kGratingOrders)
    throw std::invalid_argument("grating_signal: order out of range");
  const double d = (order - 47.0) / 18.0;
  // modulation phase in degrees keeps the curve unimodal over 1..160
  const double phase_rad = order * 0.017453292519943295;
  return std::exp(-d * d) + 0.02 * std::sin(phase_rad);
}

}  // namespace sdlab::ex
