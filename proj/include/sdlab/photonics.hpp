#pragma once

#include <array>
#include <vector>

namespace sdlab::ex {

inline constexpr int kPumpSamples = 864;

// y = a x^2 + b x + c sqrt(x) on x in [0,1], clamped to >= 0
struct PumpPattern {
  std::vector<double> raw;
  double a = 0.0, b = 0.0, c = 0.0;
};

PumpPattern pump_pattern(double a, double b, double c);

// phase wrap (y mod 2 pi) / 2 pi -> [0, 1)
std::vector<double> wrap_pattern(const std::vector<double>& raw);

// Discovered directivity polynomial over the first two latent variables;
// z3 and z4 are accepted and ignored.
double directivity_surrogate(const std::array<double, 4>& z);
double directivity_surrogate(const std::vector<double>& z);

// Synthetic stand-in for the 1-D grating-order search: a smooth bump over
// integer orders 1..160 with a gentle modulation, single global optimum.
inline constexpr int kGratingOrders = 160;
double grating_signal(int order);

}  // namespace sdlab::ex
