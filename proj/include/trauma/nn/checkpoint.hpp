#pragma once

#include <string>

#include "trauma/nn/optim.hpp"

namespace trauma::nn {

// params.bin: per parameter, in registration order:
//   u32 name length | name bytes | u32 rank | u32 dims[rank] | f32 payload
// all little-endian; payload row-major, values narrowed to 32-bit.
void save_params(const std::string& path, const ParamSet& params);

// Restores values (widened to 64-bit) into an already-built ParamSet; every
// stored record must match a registered name and shape, and vice versa.
void load_params(const std::string& path, ParamSet& params);

}  // namespace trauma::nn
