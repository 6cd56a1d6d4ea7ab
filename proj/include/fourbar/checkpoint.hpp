#pragma once

#include <string>

#include "fourbar/neural.hpp"

namespace fourbar {

// Self-describing binary container (see docs/checkpoint-format.md):
// magic "FBLSTM01", a length-prefixed JSON header (type, hyperparameters,
// epoch, optimizer step, RNG states, training report, array directory), then
// the named float64 arrays in directory order, little-endian, row-major.
// Captures weights and Adam moments, so resuming reproduces the unbroken
// single-run trajectory bit for bit.
void save_checkpoint(const std::string& path, const TrainState& state);
TrainState load_checkpoint(const std::string& path);

} // namespace fourbar
