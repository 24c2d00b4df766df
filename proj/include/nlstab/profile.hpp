#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nlstab/field.hpp"

namespace nlstab {

using Profile = std::function<double(double)>;

/// Cell averages of an analytic profile by 3-point Gauss-Legendre per cell.
DensityField sample_cell_averages(const Profile& rho0, int n_cells);

/// h cos^2(pi (x - c) / w) on |x - c| < w/2, zero elsewhere (C^1, support of length w).
Profile bump_profile(double center, double width, double height);

enum class PerturbationShape {
  Sine,        // sin(2 pi x), zero mean
  Cosine,      // cos(pi x)
  Compatible,  // sin(2 pi x) sin^2(pi x): zero mean, vanishes with its slope at both ends
  Bump,        // cos^2 bump centred at 0.5 with width 0.5
  Random       // seeded sum of low Fourier modes, unit max amplitude
};

PerturbationShape parse_shape(const std::string& name);
std::string to_string(PerturbationShape shape);

/// rho_bar + amplitude * shape(x).
Profile perturbation_profile(double rho_bar, PerturbationShape shape, double amplitude,
                             std::uint64_t seed = 0);

/// Reads cell values from a snapshot CSV with header `x,rho`.
DensityField read_snapshot_csv(const std::string& path);

}  // namespace nlstab
