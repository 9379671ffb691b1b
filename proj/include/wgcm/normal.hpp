#pragma once

namespace wgcm {

// Standard normal CDF, accurate to ~1e-15 absolute.
double normal_cdf(double x);

// Inverse standard normal CDF (Wichura's PPND16 rational approximation),
// ~1e-15 relative accuracy on (0,1). p outside (0,1) returns +/-infinity.
double normal_quantile(double p);

}  // namespace wgcm
